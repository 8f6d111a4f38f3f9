//! Fixture builders shared by the benchmarks.

use alpprolog::term::normalize_clause;
use alpprolog::wumpus::{agent_program, emit_domain, AGENT_QUERY};
use alpprolog::{
    parse_domain, parse_program, parse_query, Clause, DomainFile, Literal, Program, Query, Term, Variant, WumpusConfig,
    WumpusWorld,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `clauses` random ground clauses over `p(0..atoms)`; tautologies dropped.
pub fn random_cnf(seed: u64, atoms: i64, clauses: usize, max_len: usize) -> Vec<Clause> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..clauses)
        .filter_map(|_| {
            let len = rng.gen_range(1..=max_len);
            let lits: Vec<Literal> = (0..len)
                .map(|_| {
                    let a = Term::app("p", vec![Term::Int(rng.gen_range(0..atoms))]);
                    if rng.gen() {
                        Literal::neg(a)
                    } else {
                        Literal::pos(a)
                    }
                })
                .collect();
            normalize_clause(lits).into_clause()
        })
        .collect()
}

pub struct WumpusCase {
    pub world: WumpusWorld,
    pub domain: DomainFile,
    pub program: Program,
    pub query: Query,
}

/// Generated solvable world with its domain and the reference agent.
pub fn wumpus_case(size: usize, variant: Variant, seed: u64) -> WumpusCase {
    let world = WumpusWorld::generate(&WumpusConfig::new(size, seed)).expect("world");
    let domain = parse_domain(&emit_domain(&world, variant)).expect("domain");
    let program = parse_program(&agent_program(variant), &domain.signature).expect("program");
    let query = parse_query(AGENT_QUERY, &domain.signature).expect("query");
    WumpusCase { world, domain, program, query }
}
