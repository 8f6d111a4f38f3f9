//! Symbolic terms, fluent literals, clauses and substitutions.
//!
//! Ground terms carry a canonical total order: integers first (numerically),
//! then compounds by functor name, arity and arguments left to right.
//! Variables sort before everything else by id, which only matters for the
//! purely syntactic normalisation of non-ground clauses.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned-by-sharing symbol name.
pub type Sym = Arc<str>;

/// A logic variable. Ids are scoped per clause activation; the owner of a
/// term keeps the name table if it needs to print them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Int(i64),
    /// Compound term; an atom is a compound without arguments.
    App(Sym, Arc<[Term]>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("canonical comparison of non-ground term {0}")]
    NonGround(String),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::App(Arc::from(name), Arc::from(Vec::new()))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(name), Arc::from(args))
    }

    pub fn app_sym(name: Sym, args: Vec<Term>) -> Term {
        Term::App(name, Arc::from(args))
    }

    pub fn var(id: u32) -> Term {
        Term::Var(Var(id))
    }

    pub fn nil() -> Term {
        Term::atom("[]")
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::app(".", vec![head, tail])
    }

    /// Build a proper list from `items`, ending in `tail`.
    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, t| Term::cons(t, acc))
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    /// Elements of a proper list, or `None` if `self` is not one.
    pub fn as_list(&self) -> Option<Vec<&Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::App(f, args) if args.is_empty() && &**f == "[]" => return Some(out),
                Term::App(f, args) if args.len() == 2 && &**f == "." => {
                    out.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::App(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Term::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::Int(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Variables in left-to-right first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.0),
            Term::Int(_) => None,
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    /// Replace every variable through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::Int(_) => self.clone(),
            Term::App(name, args) => {
                if args.is_empty() {
                    return self.clone();
                }
                Term::App(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    /// Shift every variable id by `offset`.
    pub fn offset_vars(&self, offset: u32) -> Term {
        if self.is_ground() {
            return self.clone();
        }
        self.map_vars(&mut |v| Term::Var(Var(v.0 + offset)))
    }

    /// Compare while treating the first variable met in `pattern` as a
    /// wildcard that ends the comparison. Candidates agreeing with the
    /// ground prefix of `pattern` form a contiguous block in canonical order.
    pub fn prefix_cmp(candidate: &Term, pattern: &Term) -> Ordering {
        fn go(c: &Term, p: &Term) -> Option<Ordering> {
            match (c, p) {
                (_, Term::Var(_)) => None,
                (Term::Var(_), _) => Some(Ordering::Less),
                (Term::Int(a), Term::Int(b)) => Some(a.cmp(b)),
                (Term::Int(_), Term::App(..)) => Some(Ordering::Less),
                (Term::App(..), Term::Int(_)) => Some(Ordering::Greater),
                (Term::App(f, xs), Term::App(g, ys)) => {
                    let o = f.cmp(g).then(xs.len().cmp(&ys.len()));
                    if o != Ordering::Equal {
                        return Some(o);
                    }
                    for (x, y) in xs.iter().zip(ys.iter()) {
                        match go(x, y) {
                            Some(Ordering::Equal) => continue,
                            other => return other,
                        }
                    }
                    Some(Ordering::Equal)
                }
            }
        }
        go(candidate, pattern).unwrap_or(Ordering::Equal)
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Var(_), _) => Ordering::Less,
            (_, Term::Var(_)) => Ordering::Greater,
            (Term::Int(a), Term::Int(b)) => a.cmp(b),
            (Term::Int(_), Term::App(..)) => Ordering::Less,
            (Term::App(..), Term::Int(_)) => Ordering::Greater,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f.cmp(g).then(xs.len().cmp(&ys.len())).then_with(|| xs.iter().cmp(ys.iter()))
            }
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical comparison of two ground terms.
pub fn compare(t1: &Term, t2: &Term) -> Result<Ordering, TermError> {
    for t in [t1, t2] {
        if !t.is_ground() {
            return Err(TermError::NonGround(t.to_string()));
        }
    }
    Ok(t1.cmp(t2))
}

/// A possibly negated fluent. Orders by fluent first, positive before
/// negative, so `f` is immediately followed by `-f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Term,
    pub negative: bool,
}

impl Literal {
    pub fn pos(atom: Term) -> Literal {
        Literal { atom, negative: false }
    }

    pub fn neg(atom: Term) -> Literal {
        Literal { atom, negative: true }
    }

    pub fn complement(&self) -> Literal {
        Literal { atom: self.atom.clone(), negative: !self.negative }
    }

    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.negative != other.negative && self.atom == other.atom
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Literal {
        Literal { atom: self.atom.map_vars(f), negative: self.negative }
    }

    /// `prefix_cmp` lifted to literals; the sign only counts once the atom
    /// pattern is fully ground.
    pub fn prefix_cmp(candidate: &Literal, pattern: &Literal) -> Ordering {
        match Term::prefix_cmp(&candidate.atom, &pattern.atom) {
            Ordering::Equal if pattern.atom.is_ground() => candidate.negative.cmp(&pattern.negative),
            o => o,
        }
    }
}

/// A sorted, duplicate-free disjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause(Arc<[Literal]>);

/// Result of clause normalisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    Clause(Clause),
    Tautology,
}

impl Normalized {
    pub fn into_clause(self) -> Option<Clause> {
        match self {
            Normalized::Clause(c) => Some(c),
            Normalized::Tautology => None,
        }
    }
}

/// Sort, deduplicate and detect complementary pairs.
pub fn normalize_clause(lits: impl IntoIterator<Item = Literal>) -> Normalized {
    let mut v: Vec<Literal> = lits.into_iter().collect();
    v.sort();
    v.dedup();
    // complementary literals are adjacent under the literal order
    if v.windows(2).any(|w| w[0].is_complement_of(&w[1])) {
        return Normalized::Tautology;
    }
    Normalized::Clause(Clause(Arc::from(v)))
}

impl Clause {
    pub fn empty() -> Clause {
        Clause(Arc::from(Vec::new()))
    }

    pub fn unit(lit: Literal) -> Clause {
        Clause(Arc::from(vec![lit]))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.0.len() == 1
    }

    pub fn is_ground(&self) -> bool {
        self.0.iter().all(Literal::is_ground)
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.0.binary_search(lit).is_ok()
    }

    pub fn mentions_atom(&self, atom: &Term) -> bool {
        self.0.iter().any(|l| &l.atom == atom)
    }

    /// `self ⊆ other`, by linear merge of the sorted literal sequences.
    pub fn subsumes(&self, other: &Clause) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for l in self.0.iter() {
            for m in it.by_ref() {
                match m.cmp(l) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    /// Resolvent on `lit ∈ self`, `¬lit ∈ other`; `None` when tautologous.
    pub fn resolve(&self, lit: &Literal, other: &Clause) -> Option<Clause> {
        let comp = lit.complement();
        let lits = self.0.iter().filter(|l| *l != lit).chain(other.0.iter().filter(|l| **l != comp)).cloned();
        normalize_clause(lits).into_clause()
    }
}

impl Ord for Clause {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for Clause {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finite map from variables to terms, kept idempotent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.bindings.get(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.bindings.get(&v).cloned().unwrap_or(Term::Var(v)))
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal { atom: self.apply(&l.atom), negative: l.negative }
    }

    /// Add `v ↦ t`, keeping the map idempotent. Fails on occurs-check.
    pub fn bind(&mut self, v: Var, t: Term) -> bool {
        let t = self.apply(&t);
        if let Term::Var(w) = t {
            if w == v {
                return true;
            }
        }
        if t.occurs(v) {
            return false;
        }
        let single = |x: &Term| x.map_vars(&mut |w| if w == v { t.clone() } else { Term::Var(w) });
        for val in self.bindings.values_mut() {
            if val.occurs(v) {
                *val = single(val);
            }
        }
        self.bindings.insert(v, t);
        true
    }

    /// Extend `self` so that it also unifies `a` and `b`.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.apply(a);
        let b = self.apply(b);
        match (&a, &b) {
            (Term::Var(x), _) => self.bind(*x, b),
            (_, Term::Var(y)) => self.bind(*y, a),
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    /// Compose: the result applies `self` first, then `other`.
    pub fn compose(&self, other: &Substitution) -> Option<Substitution> {
        let mut out = self.clone();
        for (v, t) in other.iter() {
            if !out.unify(&Term::Var(*v), t) {
                return None;
            }
        }
        Some(out)
    }

    /// Keep only the bindings for `vars`.
    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        Substitution {
            bindings: self.bindings.iter().filter(|(v, _)| vars.contains(v)).map(|(v, t)| (*v, t.clone())).collect(),
        }
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.bind(v, t);
        }
        s
    }
}

/// Most general unifier of `t1` and `t2` (occurs check on).
pub fn unify(t1: &Term, t2: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    s.unify(t1, t2).then_some(s)
}

pub fn apply(s: &Substitution, t: &Term) -> Term {
    s.apply(t)
}

fn is_plain_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

fn is_symbol_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| "+-*/\\^<>=~:.?@#&$".contains(c))
}

/// Writes an atom name, quoting it when it would not re-read as itself.
pub(crate) fn write_atom_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_atom_name(name) || is_symbol_name(name) || name == "[]" || name == "!" {
        f.write_str(name)
    } else {
        write!(f, "'{}'", name.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

/// Display adapter resolving variable ids through a name table.
pub struct Named<'a, T: ?Sized> {
    pub item: &'a T,
    pub names: &'a [Sym],
}

impl<'a> Named<'a, Term> {
    fn write(&self, f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
        match t {
            Term::Var(v) => match self.names.get(v.0 as usize) {
                Some(n) => f.write_str(n),
                None => write!(f, "_G{}", v.0),
            },
            Term::Int(i) => write!(f, "{i}"),
            Term::App(name, args) => {
                if &**name == "." && args.len() == 2 {
                    return self.write_list(f, t);
                }
                write_atom_name(f, name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        self.write(f, a)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }

    fn write_list(&self, f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
        f.write_str("[")?;
        let mut cur = t;
        let mut first = true;
        loop {
            match cur {
                Term::App(n, args) if &**n == "." && args.len() == 2 => {
                    if !first {
                        f.write_str(",")?;
                    }
                    first = false;
                    self.write(f, &args[0])?;
                    cur = &args[1];
                }
                Term::App(n, args) if &**n == "[]" && args.is_empty() => break,
                other => {
                    f.write_str("|")?;
                    self.write(f, other)?;
                    break;
                }
            }
        }
        f.write_str("]")
    }
}

impl fmt::Display for Named<'_, Term> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.item)
    }
}

impl fmt::Display for Named<'_, Literal> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.item.negative {
            f.write_str("-")?;
        }
        Named { item: &self.item.atom, names: self.names }.fmt(f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Named { item: self, names: &[] }.fmt(f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Named { item: self, names: &[] }.fmt(f)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() == 1 {
            return self.0[0].fmt(f);
        }
        f.write_str("[")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            l.fmt(f)?;
        }
        f.write_str("]")
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn ground_term() -> impl Strategy<Value = Term> {
        let leaf =
            prop_oneof![(0i64..4).prop_map(Term::Int), prop::sample::select(vec!["a", "b", "f"]).prop_map(Term::atom)];
        leaf.prop_recursive(3, 12, 3, |inner| {
            (prop::sample::select(vec!["f", "g"]), prop::collection::vec(inner, 1..3))
                .prop_map(|(f, args)| Term::app(f, args))
        })
    }

    fn open_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0i64..3).prop_map(Term::Int),
            prop::sample::select(vec!["a", "b"]).prop_map(Term::atom),
            (0u32..3).prop_map(Term::var),
        ];
        leaf.prop_recursive(3, 12, 3, |inner| {
            (prop::sample::select(vec!["f", "g"]), prop::collection::vec(inner, 1..3))
                .prop_map(|(f, args)| Term::app(f, args))
        })
    }

    proptest! {
        #[test]
        fn unifier_equalises_and_is_idempotent(t1 in open_term(), t2 in open_term()) {
            if let Some(s) = unify(&t1, &t2) {
                prop_assert_eq!(s.apply(&t1), s.apply(&t2));
                let once = s.apply(&t1);
                prop_assert_eq!(s.apply(&once), once);
            }
        }

        #[test]
        fn compare_is_total_order(a in ground_term(), b in ground_term(), c in ground_term()) {
            let ab = compare(&a, &b).unwrap();
            prop_assert_eq!(ab.reverse(), compare(&b, &a).unwrap());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
            if ab != Ordering::Greater && compare(&b, &c).unwrap() != Ordering::Greater {
                prop_assert!(compare(&a, &c).unwrap() != Ordering::Greater);
            }
        }

        #[test]
        fn normalize_is_idempotent(lits in prop::collection::vec((ground_term(), any::<bool>()), 0..6)) {
            let lits: Vec<Literal> = lits.into_iter().map(|(t, n)| Literal { atom: t, negative: n }).collect();
            if let Normalized::Clause(c) = normalize_clause(lits) {
                prop_assert_eq!(normalize_clause(c.literals().to_vec()), Normalized::Clause(c));
            }
        }
    }
}
