//! Agent logic programs over a propositional Fluent Calculus.
//!
//! The crate provides the term layer, prime-implicate state representation,
//! the loader for domain and program files, the SLD interpreter with
//! `do`/`?` atoms, simulated environments and a brute-force reference model.

pub mod domain;
pub mod env;
pub mod experiment;
pub mod interp;
pub mod oracle;
pub mod parser;
pub mod pi;
pub mod reader;
pub mod term;
pub mod wumpus;

pub use domain::{ActionSpec, DomainFile, Program, Query, SensorAxiom, Signature, StateProperty};
pub use env::{Environment, MazeEnv, ReplayEnv};
pub use interp::{AgentState, Config, Interpreter, Outcome, Run, RuntimeError};
pub use parser::{parse_domain, parse_program, parse_query, ParseError};
pub use pi::{EngineError, PiList};
pub use term::{Clause, Literal, Substitution, Term, Var};
pub use wumpus::{Variant, WumpusConfig, WumpusEnv, WumpusWorld};
