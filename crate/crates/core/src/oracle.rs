//! Brute-force semantics for testing: model enumeration, reference prime
//! implicates and possible-world progression. Never used by the
//! interpreter itself.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::domain::{ActionSpec, DomainFile, PropAtom, SensorAxiom, StateProperty};
use crate::interp::JournalEntry;
use crate::pi::PiList;
use crate::term::{normalize_clause, unify, Clause, Literal, Substitution, Term};

pub const MODEL_ATOM_LIMIT: usize = 20;
pub const IMPLICATE_ATOM_LIMIT: usize = 10;
pub const CUBE_ATOM_LIMIT: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{got} atoms exceed the enumeration bound of {limit}")]
    TooManyAtoms { limit: usize, got: usize },
    #[error("atom {0} is not in the universe")]
    UnknownAtom(String),
    #[error("undefined world for {action}: {reason}")]
    UndefinedWorld { action: String, reason: String },
    #[error("aux rule {0} cannot be pre-evaluated")]
    AuxRule(String),
    #[error("action {0} does not match its specification")]
    ActionMismatch(String),
}

/// Total assignment over a universe of at most 20 atoms; bit `i` is the
/// truth value of atom `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub u32);

/// Clause as (positive mask, negative mask) over a small universe.
type Masks = (u32, u32);

fn masks(c: &Clause, atoms: &[Term]) -> Result<Masks, OracleError> {
    let (mut pos, mut neg) = (0u32, 0u32);
    for l in c.literals() {
        let i = atoms.iter().position(|a| *a == l.atom).ok_or_else(|| OracleError::UnknownAtom(l.atom.to_string()))?;
        if l.negative {
            neg |= 1 << i;
        } else {
            pos |= 1 << i;
        }
    }
    Ok((pos, neg))
}

fn satisfies(w: u32, (pos, neg): Masks) -> bool {
    w & pos != 0 || !w & neg != 0
}

/// Every world over `atoms` satisfying all of `clauses`.
pub fn models(clauses: &[Clause], atoms: &[Term]) -> Result<Vec<World>, OracleError> {
    if atoms.len() > MODEL_ATOM_LIMIT {
        return Err(OracleError::TooManyAtoms { limit: MODEL_ATOM_LIMIT, got: atoms.len() });
    }
    let ms = clauses.iter().map(|c| masks(c, atoms)).collect::<Result<Vec<_>, _>>()?;
    Ok((0..1u32 << atoms.len()).filter(|w| ms.iter().all(|m| satisfies(*w, *m))).map(World).collect())
}

/// Prime implicates by exhaustion: every non-tautologous clause over
/// `atoms` true in all models, minus those subsumed by a shorter one.
/// An inconsistent input yields the empty clause.
pub fn reference_prime_implicates(clauses: &[Clause], atoms: &[Term]) -> Result<Vec<Clause>, OracleError> {
    let n = atoms.len();
    if n > IMPLICATE_ATOM_LIMIT {
        return Err(OracleError::TooManyAtoms { limit: IMPLICATE_ATOM_LIMIT, got: n });
    }
    let worlds: Vec<u32> = models(clauses, atoms)?.into_iter().map(|w| w.0).collect();
    if worlds.is_empty() {
        return Ok(vec![Clause::empty()]);
    }
    let mut candidates: Vec<Masks> = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 1..total {
        let (mut pos, mut neg, mut k) = (0u32, 0u32, code);
        for i in 0..n {
            match k % 3 {
                1 => pos |= 1 << i,
                2 => neg |= 1 << i,
                _ => {}
            }
            k /= 3;
        }
        if worlds.iter().all(|w| satisfies(*w, (pos, neg))) {
            candidates.push((pos, neg));
        }
    }
    candidates.sort_by_key(|(p, q)| (p | q).count_ones());
    let mut kept: Vec<Masks> = Vec::new();
    for (pos, neg) in candidates {
        if !kept.iter().any(|(p, q)| p & !pos == 0 && q & !neg == 0) {
            kept.push((pos, neg));
        }
    }
    let mut out: Vec<Clause> = kept
        .into_iter()
        .filter_map(|(pos, neg)| {
            let lits = (0..n).filter_map(|i| {
                if pos & (1 << i) != 0 {
                    Some(Literal::pos(atoms[i].clone()))
                } else if neg & (1 << i) != 0 {
                    Some(Literal::neg(atoms[i].clone()))
                } else {
                    None
                }
            });
            normalize_clause(lits).into_clause()
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Atoms mentioned by `clauses`, in first-occurrence order.
pub fn atoms_of(clauses: &[Clause]) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for c in clauses {
        for l in c.literals() {
            if !out.contains(&l.atom) {
                out.push(l.atom.clone());
            }
        }
    }
    out
}

/// Ground aux facts of a domain.
#[derive(Clone, Debug, Default)]
pub struct AuxFacts(Vec<Term>);

impl AuxFacts {
    pub fn from_domain(domain: &DomainFile) -> Result<AuxFacts, OracleError> {
        let mut facts = Vec::new();
        for c in &domain.aux_program {
            if !c.body.is_empty() || !c.head.is_ground() {
                return Err(OracleError::AuxRule(c.head.to_string()));
            }
            facts.push(c.head.clone());
        }
        Ok(AuxFacts(facts))
    }

    fn matches<'a>(&'a self, goal: &'a Term) -> impl Iterator<Item = Substitution> + 'a {
        self.0.iter().filter_map(move |f| unify(goal, f))
    }
}

/// Interned ground atoms.
#[derive(Clone, Debug, Default)]
pub struct Universe {
    atoms: Vec<Term>,
    index: HashMap<Term, usize>,
}

impl Universe {
    pub fn intern(&mut self, t: &Term) -> Result<usize, OracleError> {
        if let Some(i) = self.index.get(t) {
            return Ok(*i);
        }
        if self.atoms.len() == CUBE_ATOM_LIMIT {
            return Err(OracleError::TooManyAtoms { limit: CUBE_ATOM_LIMIT, got: CUBE_ATOM_LIMIT + 1 });
        }
        self.index.insert(t.clone(), self.atoms.len());
        self.atoms.push(t.clone());
        Ok(self.atoms.len() - 1)
    }

    pub fn get(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn atoms(&self) -> &[Term] {
        &self.atoms
    }
}

/// Partial assignment standing for every world that agrees with it; atoms
/// fixed neither way are free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cube {
    pub pos: u128,
    pub neg: u128,
}

impl Cube {
    pub const FREE: Cube = Cube { pos: 0, neg: 0 };

    pub fn value(&self, i: usize) -> Option<bool> {
        if self.pos >> i & 1 == 1 {
            Some(true)
        } else if self.neg >> i & 1 == 1 {
            Some(false)
        } else {
            None
        }
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let bit = 1u128 << i;
        if v {
            self.pos |= bit;
            self.neg &= !bit;
        } else {
            self.neg |= bit;
            self.pos &= !bit;
        }
    }

    fn split(&self, i: usize) -> (Cube, Cube) {
        let (mut t, mut f) = (*self, *self);
        t.set(i, true);
        f.set(i, false);
        (t, f)
    }
}

/// Evaluation either succeeds or names an atom whose value it needs.
type Eval<T> = Result<T, Term>;

fn literal_value(u: &Universe, c: &Cube, l: &Literal) -> Eval<bool> {
    match u.get(&l.atom).and_then(|i| c.value(i)) {
        Some(v) => Ok(v != l.negative),
        None => Err(l.atom.clone()),
    }
}

/// Is the ground clause true in every world of `c`?
fn clause_value(u: &Universe, c: &Cube, clause: &Clause) -> Eval<bool> {
    let mut need = None;
    for l in clause.literals() {
        match literal_value(u, c, l) {
            Ok(true) => return Ok(true),
            Ok(false) => {}
            Err(a) => need = need.or(Some(a)),
        }
    }
    need.map_or(Ok(false), Err)
}

/// Substitutions (extending `s`) under which the clause holds in the world,
/// with variable literals ranging over universe atoms.
fn clause_answers(
    u: &Universe,
    c: &Cube,
    aux: &AuxFacts,
    atoms: &[PropAtom],
    s: &Substitution,
) -> Eval<Vec<Substitution>> {
    let mut out: Vec<Substitution> = Vec::new();
    let mut push = |x: Substitution| {
        if !out.contains(&x) {
            out.push(x)
        }
    };
    for a in atoms {
        match a {
            PropAtom::Fluent(l) => {
                let l = s.apply_literal(l);
                if l.is_ground() {
                    if literal_value(u, c, &l)? {
                        push(s.clone());
                    }
                    continue;
                }
                for (i, cand) in u.atoms().iter().enumerate() {
                    let mut ext = s.clone();
                    if !ext.unify(&l.atom, cand) {
                        continue;
                    }
                    match c.value(i) {
                        None => return Err(cand.clone()),
                        Some(v) if v != l.negative => push(ext),
                        Some(_) => {}
                    }
                }
            }
            PropAtom::Aux(t) => {
                let t = s.apply(t);
                for m in aux.matches(&t) {
                    if let Some(ext) = s.compose(&m) {
                        push(ext);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn property_answers(
    u: &Universe,
    c: &Cube,
    aux: &AuxFacts,
    phi: &StateProperty,
    s: &Substitution,
) -> Eval<Vec<Substitution>> {
    let mut partial = vec![s.clone()];
    for clause in phi.clauses() {
        let mut next = Vec::new();
        for p in &partial {
            for ext in clause_answers(u, c, aux, &clause.0, p)? {
                if !next.contains(&ext) {
                    next.push(ext);
                }
            }
        }
        partial = next;
    }
    Ok(partial)
}

/// Truth of an instantiated property. Non-ground fluent literals are
/// ignored, so a clause must be made true by its ground part or an aux atom.
fn property_value(u: &Universe, c: &Cube, aux: &AuxFacts, phi: &StateProperty) -> Eval<bool> {
    for clause in phi.clauses() {
        let mut holds = false;
        let mut need = None;
        for a in &clause.0 {
            match a {
                PropAtom::Fluent(l) if l.is_ground() => match literal_value(u, c, l) {
                    Ok(true) => holds = true,
                    Ok(false) => {}
                    Err(t) => need = need.or(Some(t)),
                },
                PropAtom::Fluent(_) => {}
                PropAtom::Aux(t) => holds |= aux.matches(t).next().is_some(),
            }
            if holds {
                break;
            }
        }
        if !holds {
            return need.map_or(Ok(false), Err);
        }
    }
    Ok(true)
}

/// Split `cube` until `f` can be evaluated on every part.
fn refine<T>(
    u: &mut Universe,
    cube: Cube,
    mut f: impl FnMut(&Universe, &Cube) -> Eval<T>,
) -> Result<Vec<(Cube, T)>, OracleError> {
    let mut stack = vec![cube];
    let mut out = Vec::new();
    while let Some(c) = stack.pop() {
        match f(u, &c) {
            Ok(v) => out.push((c, v)),
            Err(atom) => {
                let i = u.intern(&atom)?;
                debug_assert!(c.value(i).is_none(), "evaluation asked for fixed atom {atom}");
                let (t, fl) = c.split(i);
                stack.push(fl);
                stack.push(t);
            }
        }
    }
    Ok(out)
}

/// A set of possible worlds, as a union of cubes.
#[derive(Clone, Debug, Default)]
pub struct BeliefSet {
    pub universe: Universe,
    cubes: BTreeSet<Cube>,
}

impl BeliefSet {
    /// Every world satisfying `pi`.
    pub fn from_clauses(clauses: &[Clause]) -> Result<BeliefSet, OracleError> {
        let mut b = BeliefSet { universe: Universe::default(), cubes: BTreeSet::new() };
        for a in atoms_of(clauses) {
            b.universe.intern(&a)?;
        }
        let parts = refine(&mut b.universe, Cube::FREE, |u, c| {
            for cl in clauses {
                if !clause_value(u, c, cl)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })?;
        b.cubes = parts.into_iter().filter(|(_, ok)| *ok).map(|(c, _)| c).collect();
        Ok(b)
    }

    pub fn from_pilist(pi: &PiList) -> Result<BeliefSet, OracleError> {
        BeliefSet::from_clauses(pi.clauses())
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cubes(&self) -> impl Iterator<Item = &Cube> {
        self.cubes.iter()
    }

    /// Does every world satisfy every clause?
    pub fn all_satisfy(&mut self, clauses: &[Clause]) -> Result<bool, OracleError> {
        let cubes: Vec<Cube> = self.cubes.iter().copied().collect();
        for cube in cubes {
            let parts = refine(&mut self.universe, cube, |u, c| {
                for cl in clauses {
                    if !clause_value(u, c, cl)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            })?;
            if parts.iter().any(|(_, ok)| !ok) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Does an instantiated `?` property hold in every world?
    pub fn all_hold(&mut self, phi: &StateProperty, aux: &AuxFacts) -> Result<bool, OracleError> {
        let cubes: Vec<Cube> = self.cubes.iter().copied().collect();
        for cube in cubes {
            let parts = refine(&mut self.universe, cube, |u, c| property_value(u, c, aux, phi))?;
            if parts.iter().any(|(_, ok)| !ok) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Total worlds over the current universe, summed per cube; exact
    /// when the cubes are disjoint.
    pub fn world_count(&self) -> u128 {
        let n = self.universe.atoms().len() as u32;
        self.cubes.iter().map(|c| 1u128 << (n - (c.pos | c.neg).count_ones())).sum()
    }
}

/// Apply a ground action world by world.
pub fn progress_beliefs(
    b: &BeliefSet,
    spec: &ActionSpec,
    action: &Term,
    aux: &AuxFacts,
) -> Result<BeliefSet, OracleError> {
    let spec = spec.renamed(action.max_var().map_or(0, |m| m + 1));
    let theta0 = unify(&spec.head, action).ok_or_else(|| OracleError::ActionMismatch(action.to_string()))?;
    let precondition = spec.precondition.apply(&theta0);
    let mut out = BeliefSet { universe: b.universe.clone(), cubes: BTreeSet::new() };
    let undefined = |reason: String| OracleError::UndefinedWorld { action: action.to_string(), reason };
    for cube in b.cubes.clone() {
        let parts = refine(&mut out.universe, cube, |u, c| {
            let mut outcomes = Vec::new();
            for ans in property_answers(u, c, aux, &precondition, &Substitution::new())? {
                let theta = theta0.compose(&ans).unwrap_or_else(|| theta0.clone());
                let mut cases = Vec::new();
                for (i, case) in spec.cases.iter().enumerate() {
                    if let Some(ext) = property_answers(u, c, aux, &case.condition.apply(&theta), &Substitution::new())?
                        .into_iter()
                        .next()
                    {
                        cases.push((i, theta.compose(&ext).unwrap_or_else(|| theta.clone())));
                    }
                }
                outcomes.push(cases);
            }
            Ok(outcomes)
        })?;
        for (c, outcomes) in parts {
            if outcomes.is_empty() {
                return Err(undefined("precondition false in a possible world".into()));
            }
            for cases in outcomes {
                let [(i, theta)] = cases.as_slice() else {
                    return Err(undefined(format!("{} applicable cases in a possible world", cases.len())));
                };
                let mut next = c;
                for e in &spec.cases[*i].effects {
                    let e = theta.apply_literal(e);
                    if !e.is_ground() {
                        return Err(undefined(format!("non-ground effect {e}")));
                    }
                    let k = out.universe.intern(&e.atom)?;
                    next.set(k, !e.negative);
                }
                out.cubes.insert(next);
            }
        }
    }
    Ok(out)
}

/// Keep the worlds in which some triple for `observed` has its index and
/// meaning true.
pub fn filter_by_sensing(
    b: &BeliefSet,
    axiom: &SensorAxiom,
    observed: &Term,
    aux: &AuxFacts,
) -> Result<BeliefSet, OracleError> {
    let mut out = BeliefSet { universe: b.universe.clone(), cubes: BTreeSet::new() };
    for cube in b.cubes.clone() {
        let parts = refine(&mut out.universe, cube, |u, c| {
            for case in &axiom.cases {
                let mut theta = Substitution::new();
                if !theta.unify(&Term::Var(axiom.value_var), observed) || !theta.unify(&case.result, observed) {
                    continue;
                }
                for ans in property_answers(u, c, aux, &case.index.apply(&theta), &Substitution::new())? {
                    let full = theta.compose(&ans).unwrap_or_else(|| theta.clone());
                    if property_value(u, c, aux, &case.meaning.apply(&full))? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        })?;
        out.cubes.extend(parts.into_iter().filter(|(_, ok)| *ok).map(|(c, _)| c));
    }
    Ok(out)
}

/// Outcome of replaying a journal against the oracle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SoundnessReport {
    pub executions: usize,
    pub observations: usize,
    pub entailments: usize,
}

/// Track the possible worlds along a journal and check that every engine
/// belief is satisfied by all of them and every reported entailment holds
/// in all of them.
pub fn check_journal(domain: &DomainFile, journal: &[JournalEntry]) -> Result<SoundnessReport, String> {
    let aux = AuxFacts::from_domain(domain).map_err(|e| e.to_string())?;
    let mut b = BeliefSet::from_pilist(&domain.initial_state).map_err(|e| e.to_string())?;
    let mut report = SoundnessReport::default();
    for (k, entry) in journal.iter().enumerate() {
        match entry {
            JournalEntry::Exec { action, belief } => {
                let (name, arity) = action.functor().ok_or("non-callable action")?;
                let spec = domain.action_spec(name, arity).ok_or("unknown action")?;
                b = progress_beliefs(&b, spec, action, &aux).map_err(|e| format!("step {k}: {e}"))?;
                check_superset(&mut b, belief, k)?;
                report.executions += 1;
            }
            JournalEntry::Sense { sensor, result, belief } => {
                let axiom = domain.sensor_axiom(sensor).ok_or("unknown sensor")?;
                b = filter_by_sensing(&b, axiom, result, &aux).map_err(|e| format!("step {k}: {e}"))?;
                if b.is_empty() {
                    return Err(format!("step {k}: observation {sensor}={result} leaves no possible world"));
                }
                check_superset(&mut b, belief, k)?;
                report.observations += 1;
            }
            JournalEntry::Entailed { property, .. } => {
                if !b.all_hold(property, &aux).map_err(|e| e.to_string())? {
                    return Err(format!("step {k}: reported entailment fails in a possible world: {property:?}"));
                }
                report.entailments += 1;
            }
        }
    }
    Ok(report)
}

fn check_superset(b: &mut BeliefSet, belief: &PiList, k: usize) -> Result<(), String> {
    if b.all_satisfy(belief.clauses()).map_err(|e| e.to_string())? {
        Ok(())
    } else {
        Err(format!("step {k}: engine belief {belief} excludes a possible world"))
    }
}
