//! In-memory form of action domains and agent programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::term::{Literal, Named, Sym, Term, Var};

/// Name/arity pair.
pub type Functor = (Sym, usize);

/// What a functor denotes, as fixed by the domain declarations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Fluent,
    SenseFluent,
    Action,
    Aux,
    Builtin,
    Plain,
}

/// Declared functors of a domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub fluents: BTreeSet<Functor>,
    pub sensors: BTreeSet<Functor>,
    pub actions: BTreeSet<Functor>,
    pub aux: BTreeSet<Functor>,
    pub objects: BTreeMap<Sym, Vec<Term>>,
}

const BUILTINS: &[(&str, usize)] = &[
    ("true", 0),
    ("fail", 0),
    ("=", 2),
    ("\\=", 2),
    ("is", 2),
    ("<", 2),
    (">", 2),
    ("=<", 2),
    (">=", 2),
    ("=:=", 2),
    ("=\\=", 2),
    ("succ", 2),
];

pub fn is_builtin(name: &str, arity: usize) -> bool {
    BUILTINS.iter().any(|(n, a)| *n == name && *a == arity)
}

impl Signature {
    pub fn sort_of(&self, name: &str, arity: usize) -> Sort {
        let key = |set: &BTreeSet<Functor>| set.iter().any(|(n, a)| &**n == name && *a == arity);
        if key(&self.fluents) {
            Sort::Fluent
        } else if key(&self.sensors) {
            Sort::SenseFluent
        } else if key(&self.actions) {
            Sort::Action
        } else if key(&self.aux) {
            Sort::Aux
        } else if is_builtin(name, arity) {
            Sort::Builtin
        } else {
            Sort::Plain
        }
    }

    pub fn sort_of_term(&self, t: &Term) -> Sort {
        match t.functor() {
            Some((n, a)) => self.sort_of(n, a),
            None => Sort::Plain,
        }
    }
}

/// Element of a property clause: a fluent literal or a positive aux atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropAtom {
    Fluent(Literal),
    Aux(Term),
}

impl PropAtom {
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> PropAtom {
        match self {
            PropAtom::Fluent(l) => PropAtom::Fluent(l.map_vars(f)),
            PropAtom::Aux(t) => PropAtom::Aux(t.map_vars(f)),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            PropAtom::Fluent(l) => l.atom.collect_vars(out),
            PropAtom::Aux(t) => t.collect_vars(out),
        }
    }
}

/// A disjunction of property atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropClause(pub Vec<PropAtom>);

impl PropClause {
    pub fn fluents(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter().filter_map(|a| match a {
            PropAtom::Fluent(l) => Some(l),
            PropAtom::Aux(_) => None,
        })
    }

    pub fn aux(&self) -> impl Iterator<Item = &Term> {
        self.0.iter().filter_map(|a| match a {
            PropAtom::Aux(t) => Some(t),
            PropAtom::Fluent(_) => None,
        })
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> PropClause {
        PropClause(self.0.iter().map(|a| a.map_vars(f)).collect())
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.0.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    pub fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }
}

/// A PI-list shaped state property: a conjunction of [`PropClause`]s.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateProperty(pub Vec<PropClause>);

impl StateProperty {
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> StateProperty {
        StateProperty(self.0.iter().map(|c| c.map_vars(f)).collect())
    }

    pub fn apply(&self, s: &crate::term::Substitution) -> StateProperty {
        self.map_vars(&mut |v| s.get(v).cloned().unwrap_or(Term::Var(v)))
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for c in &self.0 {
            c.0.iter().for_each(|a| a.collect_vars(&mut out));
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }

    pub fn clauses(&self) -> &[PropClause] {
        &self.0
    }
}

/// One effect case: condition and the ground-after-binding effect literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectCase {
    pub condition: StateProperty,
    pub effects: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpec {
    pub head: Term,
    pub precondition: StateProperty,
    pub cases: Vec<EffectCase>,
    pub var_names: Vec<Sym>,
}

impl ActionSpec {
    pub fn functor(&self) -> Option<(&str, usize)> {
        self.head.functor()
    }

    pub fn var_count(&self) -> u32 {
        self.var_names.len() as u32
    }

    /// Copy with every variable id shifted by `offset`.
    pub fn renamed(&self, offset: u32) -> ActionSpec {
        let mut f = |v: Var| Term::Var(Var(v.0 + offset));
        ActionSpec {
            head: self.head.map_vars(&mut f),
            precondition: self.precondition.map_vars(&mut f),
            cases: self
                .cases
                .iter()
                .map(|c| EffectCase {
                    condition: c.condition.map_vars(&mut f),
                    effects: c.effects.iter().map(|l| l.map_vars(&mut f)).collect(),
                })
                .collect(),
            var_names: Vec::new(),
        }
    }
}

/// A `Val-Index-Meaning` triple of a sensor axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SensorCase {
    pub result: Term,
    pub index: StateProperty,
    pub meaning: StateProperty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SensorAxiom {
    pub sense: Sym,
    /// The variable receiving the observed value.
    pub value_var: Var,
    pub cases: Vec<SensorCase>,
    pub var_names: Vec<Sym>,
}

impl SensorAxiom {
    pub fn var_count(&self) -> u32 {
        self.var_names.len() as u32
    }

    /// Distinct ground results, in declaration order.
    pub fn results(&self) -> Vec<&Term> {
        let mut out: Vec<&Term> = Vec::new();
        for c in &self.cases {
            if !out.contains(&&c.result) {
                out.push(&c.result);
            }
        }
        out
    }

    pub fn renamed(&self, offset: u32) -> SensorAxiom {
        let mut f = |v: Var| Term::Var(Var(v.0 + offset));
        SensorAxiom {
            sense: self.sense.clone(),
            value_var: Var(self.value_var.0 + offset),
            cases: self
                .cases
                .iter()
                .map(|c| SensorCase {
                    result: c.result.map_vars(&mut f),
                    index: c.index.map_vars(&mut f),
                    meaning: c.meaning.map_vars(&mut f),
                })
                .collect(),
            var_names: Vec::new(),
        }
    }
}

/// A goal in a clause body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BodyLiteral {
    Call(Term),
    Do(Term),
    /// Argument of `?(..)`, kept as a term and classified when evaluated.
    Query(Term),
    Cut,
}

impl BodyLiteral {
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> BodyLiteral {
        match self {
            BodyLiteral::Call(t) => BodyLiteral::Call(t.map_vars(f)),
            BodyLiteral::Do(t) => BodyLiteral::Do(t.map_vars(f)),
            BodyLiteral::Query(t) => BodyLiteral::Query(t.map_vars(f)),
            BodyLiteral::Cut => BodyLiteral::Cut,
        }
    }

    /// The goal as a plain term, for tracing.
    pub fn to_term(&self) -> Term {
        match self {
            BodyLiteral::Call(t) => t.clone(),
            BodyLiteral::Do(t) => Term::app("do", vec![t.clone()]),
            BodyLiteral::Query(t) => Term::app("?", vec![t.clone()]),
            BodyLiteral::Cut => Term::atom("!"),
        }
    }
}

/// Source position (1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramClause {
    pub head: Term,
    pub body: Vec<BodyLiteral>,
    pub var_names: Vec<Sym>,
    pub span: Span,
}

impl ProgramClause {
    pub fn var_count(&self) -> u32 {
        self.var_names.len() as u32
    }

    pub fn functor(&self) -> (Sym, usize) {
        match &self.head {
            Term::App(f, args) => (f.clone(), args.len()),
            _ => unreachable!("clause heads are validated to be callable"),
        }
    }
}

/// An agent program: clauses in textual order plus an optional `:- Goal.` query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<ProgramClause>,
    pub query: Option<Query>,
}

/// A goal sequence with its variable names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub goals: Vec<BodyLiteral>,
    pub var_names: Vec<Sym>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainFile {
    pub signature: Signature,
    /// Ground initial state; prime by construction.
    pub initial_state: crate::pi::PiList,
    pub actions: Vec<ActionSpec>,
    pub sensor_axioms: Vec<SensorAxiom>,
    pub aux_program: Vec<ProgramClause>,
    pub warnings: Vec<String>,
}

impl DomainFile {
    pub fn action_spec(&self, name: &str, arity: usize) -> Option<&ActionSpec> {
        self.actions.iter().find(|a| a.functor() == Some((name, arity)))
    }

    pub fn sensor_axiom(&self, name: &str) -> Option<&SensorAxiom> {
        self.sensor_axioms.iter().find(|s| &*s.sense == name)
    }
}

/// Display helper for properties in PI-list syntax.
pub struct ShowProperty<'a>(pub &'a StateProperty, pub &'a [Sym]);

impl fmt::Display for ShowProperty<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.0 .0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let one = |f: &mut fmt::Formatter<'_>, a: &PropAtom| match a {
                PropAtom::Fluent(l) => write!(f, "{}", Named { item: l, names: self.1 }),
                PropAtom::Aux(t) => write!(f, "{}", Named { item: t, names: self.1 }),
            };
            if c.0.len() == 1 {
                one(f, &c.0[0])?;
            } else {
                f.write_str("[")?;
                for (j, a) in c.0.iter().enumerate() {
                    if j > 0 {
                        f.write_str(", ")?;
                    }
                    one(f, a)?;
                }
                f.write_str("]")?;
            }
        }
        f.write_str("]")
    }
}
