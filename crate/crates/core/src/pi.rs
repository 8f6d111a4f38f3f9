//! Prime-implicate state reasoning: closure, entailment by subsumption,
//! progression update and sensing integration.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::domain::{ActionSpec, PropAtom, PropClause, SensorAxiom, StateProperty};
use crate::term::{normalize_clause, Clause, Literal, Normalized, Substitution, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("non-ground aux answer for {0}")]
    NonGroundAuxAnswer(String),
    #[error("contradictory effects: {0}")]
    ContradictoryEffects(String),
    #[error("non-deterministic action {action}: cases {cases:?} are all applicable")]
    NonDeterministicAction { action: String, cases: Vec<usize> },
    #[error("no applicable sensor case for {sense}={observed}")]
    NoSensorCase { sense: String, observed: String },
    #[error("ambiguous sensor case for {sense}={observed}: cases {cases:?}")]
    AmbiguousSensorCase { sense: String, observed: String, cases: Vec<usize> },
    #[error("sensing {sense}={observed} contradicts the current state")]
    SensingContradiction { sense: String, observed: String },
    #[error("{observed} is not a declared result of sensor {sense}")]
    UnknownSensorResult { sense: String, observed: String },
    #[error("sensor meaning not ground after binding: {0}")]
    NonGroundMeaning(String),
    #[error("non-ground state clause: {0}")]
    NonGroundState(String),
    #[error("aux evaluation failed: {0}")]
    Aux(String),
}

/// Evaluates auxiliary atoms: every answer substitution, in SLD order.
pub trait AuxSolver {
    fn solve(&self, goal: &Term) -> Result<Vec<Substitution>, EngineError>;
}

/// For domains without auxiliary predicates.
pub struct NoAux;

impl AuxSolver for NoAux {
    fn solve(&self, goal: &Term) -> Result<Vec<Substitution>, EngineError> {
        Err(EngineError::Aux(format!("no aux program to evaluate {goal}")))
    }
}

/// A prime ground state formula: tautology-free, subsumption-free and closed
/// under resolution. Clauses are kept in canonical order (length, then
/// literals), so unit clauses form a sorted prefix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiList {
    clauses: Vec<Clause>,
}

/// Outcome of a closure computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    Prime(PiList),
    Inconsistent,
}

impl Closure {
    pub fn prime(self) -> Option<PiList> {
        match self {
            Closure::Prime(p) => Some(p),
            Closure::Inconsistent => None,
        }
    }
}

impl PiList {
    pub fn empty() -> PiList {
        PiList::default()
    }

    /// Trusted constructor; callers guarantee the invariants.
    pub(crate) fn from_sorted(clauses: Vec<Clause>) -> PiList {
        debug_assert!(clauses.windows(2).all(|w| w[0] < w[1]));
        PiList { clauses }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn units(&self) -> &[Clause] {
        let n = self.clauses.partition_point(|c| c.len() <= 1);
        &self.clauses[..n]
    }

    pub fn contains(&self, c: &Clause) -> bool {
        self.clauses.binary_search(c).is_ok()
    }

    pub fn has_unit(&self, lit: &Literal) -> bool {
        self.units().binary_search_by(|c| c.literals()[0].cmp(lit)).is_ok()
    }

    /// Is some member a subset of `c`?
    pub fn subsumes_clause(&self, c: &Clause) -> bool {
        self.clauses.iter().take_while(|p| p.len() <= c.len()).any(|p| p.subsumes(c))
    }

    pub fn atoms(&self) -> BTreeSet<Term> {
        self.clauses.iter().flat_map(|c| c.literals().iter().map(|l| l.atom.clone())).collect()
    }
}

impl fmt::Display for PiList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            c.fmt(f)?;
        }
        f.write_str("]")
    }
}

/// Given-clause saturation with literal occurrence indexing. Shorter
/// clauses are processed first; forward and backward subsumption keep the
/// processed set redundancy-free, so the final set is exactly the prime
/// implicates.
struct Saturation {
    active: Vec<Option<Clause>>,
    occurs: HashMap<Literal, Vec<usize>>,
    queue: BTreeSet<Clause>,
}

impl Saturation {
    fn new() -> Self {
        Saturation { active: Vec::new(), occurs: HashMap::new(), queue: BTreeSet::new() }
    }

    fn live(&self, id: usize) -> Option<&Clause> {
        self.active[id].as_ref()
    }

    fn forward_subsumed(&self, c: &Clause) -> bool {
        c.literals().iter().any(|l| {
            self.occurs.get(l).is_some_and(|ids| {
                ids.iter().any(|&id| self.live(id).is_some_and(|d| d.len() <= c.len() && d.subsumes(c)))
            })
        })
    }

    fn backward_subsume(&mut self, c: &Clause) {
        // every clause c subsumes contains c's rarest literal
        let Some(pivot) = c.literals().iter().min_by_key(|l| self.occurs.get(*l).map_or(0, Vec::len)) else {
            return;
        };
        let Some(ids) = self.occurs.get(pivot) else { return };
        let doomed: Vec<usize> =
            ids.iter().copied().filter(|&id| self.live(id).is_some_and(|d| c.subsumes(d))).collect();
        for id in doomed {
            self.active[id] = None;
        }
    }

    fn insert(&mut self, c: Clause) -> usize {
        let id = self.active.len();
        for l in c.literals() {
            self.occurs.entry(l.clone()).or_default().push(id);
        }
        self.active.push(Some(c));
        id
    }

    /// Returns `false` when the empty clause is derived.
    fn run(&mut self) -> bool {
        while let Some(given) = self.queue.pop_first() {
            if given.is_empty() {
                return false;
            }
            if self.forward_subsumed(&given) {
                continue;
            }
            self.backward_subsume(&given);
            let id = self.insert(given.clone());
            let mut resolvents = Vec::new();
            for lit in given.literals() {
                let Some(partners) = self.occurs.get(&lit.complement()) else { continue };
                for &pid in partners {
                    if pid == id {
                        continue;
                    }
                    let Some(other) = self.active[pid].as_ref() else { continue };
                    if let Some(r) = given.resolve(lit, other) {
                        if r.is_empty() {
                            return false;
                        }
                        resolvents.push(r);
                    }
                }
            }
            self.queue.extend(resolvents);
        }
        true
    }

    fn finish(self) -> PiList {
        let mut out: Vec<Clause> = self.active.into_iter().flatten().collect();
        out.sort();
        out.dedup();
        PiList::from_sorted(out)
    }
}

/// Prime implicates of the conjunction of `clauses`.
pub fn prime_closure<I>(clauses: I) -> Closure
where
    I: IntoIterator<Item = Clause>,
{
    let mut sat = Saturation::new();
    for c in clauses {
        debug_assert!(c.is_ground(), "prime_closure on non-ground clause {c}");
        if let Normalized::Clause(c) = normalize_clause(c.literals().iter().cloned()) {
            sat.queue.insert(c);
        }
    }
    if sat.run() {
        Closure::Prime(sat.finish())
    } else {
        Closure::Inconsistent
    }
}

/// Whether `clauses`, read as a set, is already its own prime closure.
pub fn is_prime(clauses: &[Clause]) -> bool {
    let mut given: Vec<Clause> = clauses.to_vec();
    given.sort();
    given.dedup();
    match prime_closure(given.iter().cloned()) {
        Closure::Prime(p) => p.clauses == given,
        Closure::Inconsistent => false,
    }
}

/// Progression by ground effects: drop every clause mentioning an effect
/// fluent in either sign, then add the effects as unit clauses.
pub fn update(state: &PiList, effects: &[Literal]) -> Result<PiList, EngineError> {
    if effects.is_empty() {
        return Ok(state.clone());
    }
    for (i, e) in effects.iter().enumerate() {
        if !e.is_ground() {
            return Err(EngineError::NonGroundState(e.to_string()));
        }
        if effects[..i].iter().any(|f| f.is_complement_of(e)) {
            return Err(EngineError::ContradictoryEffects(e.to_string()));
        }
    }
    let touched: std::collections::HashSet<&Term> = effects.iter().map(|e| &e.atom).collect();
    let mut out: Vec<Clause> =
        state.clauses.iter().filter(|c| !c.literals().iter().any(|l| touched.contains(&l.atom))).cloned().collect();
    out.extend(effects.iter().cloned().map(Clause::unit));
    out.sort();
    out.dedup();
    Ok(PiList::from_sorted(out))
}

/// Unify `pattern` against a ground literal under `s`, returning the
/// extension.
fn match_literal(s: &Substitution, pattern: &Literal, ground: &Literal) -> Option<Substitution> {
    if pattern.negative != ground.negative {
        return None;
    }
    let mut ext = s.clone();
    ext.unify(&pattern.atom, &ground.atom).then_some(ext)
}

/// Every θ making `{pattern}θ` a unit member of `state`.
fn unit_matches(state: &PiList, pattern: &Literal, s: &Substitution, out: &mut Vec<Substitution>) {
    let pattern = s.apply_literal(pattern);
    let units = state.units();
    if pattern.is_ground() {
        if state.has_unit(&pattern) {
            out.push(s.clone());
        }
        return;
    }
    let lo = units.partition_point(|c| Literal::prefix_cmp(&c.literals()[0], &pattern).is_lt());
    let hi = units.partition_point(|c| !Literal::prefix_cmp(&c.literals()[0], &pattern).is_gt());
    for c in &units[lo..hi] {
        if let Some(ext) = match_literal(s, &pattern, &c.literals()[0]) {
            out.push(ext);
        }
    }
}

/// Every θ (extending `s`) such that `member ⊆ query θ`. Member literals
/// are covered in order, each trying query literals left to right.
fn cover(member: &[Literal], query: &[Literal], s: Substitution, out: &mut Vec<Substitution>) {
    let Some((first, rest)) = member.split_first() else {
        out.push(s);
        return;
    };
    for q in query {
        if let Some(ext) = match_literal(&s, q, first) {
            cover(rest, query, ext, out);
        }
    }
}

fn fluent_matches(state: &PiList, fluents: &[Literal], s: &Substitution) -> Vec<Substitution> {
    let mut out = Vec::new();
    match fluents {
        [] => {}
        [single] => unit_matches(state, single, s, &mut out),
        many => {
            let query: Vec<Literal> = many.iter().map(|l| s.apply_literal(l)).collect();
            if query.iter().all(Literal::is_ground) {
                if let Normalized::Clause(c) = normalize_clause(query.iter().cloned()) {
                    if state.subsumes_clause(&c) {
                        out.push(s.clone());
                    }
                }
                return out;
            }
            let heads: BTreeSet<(&str, usize, bool)> =
                query.iter().filter_map(|l| l.atom.functor().map(|(n, a)| (n, a, l.negative))).collect();
            for member in state.clauses.iter().take_while(|c| c.len() <= query.len()) {
                let quick = member
                    .literals()
                    .iter()
                    .all(|l| l.atom.functor().is_some_and(|(n, a)| heads.contains(&(n, a, l.negative))));
                if quick {
                    cover(member.literals(), &query, s.clone(), &mut out);
                }
            }
        }
    }
    out
}

fn push_unique(out: &mut Vec<Substitution>, s: Substitution) {
    if !out.contains(&s) {
        out.push(s);
    }
}

fn entails_clause_from(
    state: &PiList,
    clause: &PropClause,
    aux: &dyn AuxSolver,
    s: &Substitution,
) -> Result<Vec<Substitution>, EngineError> {
    let fluents: Vec<Literal> = clause.fluents().cloned().collect();
    let mut out = Vec::new();
    for m in fluent_matches(state, &fluents, s) {
        push_unique(&mut out, m);
    }
    let mut fluent_vars = Vec::new();
    fluents.iter().for_each(|l| l.atom.collect_vars(&mut fluent_vars));
    for atom in clause.aux() {
        let goal = s.apply(atom);
        'answers: for answer in aux.solve(&goal)? {
            let mut ext = s.clone();
            for (v, t) in answer.iter() {
                if !t.is_ground() {
                    if fluent_vars.contains(v) {
                        return Err(EngineError::NonGroundAuxAnswer(goal.to_string()));
                    }
                    continue;
                }
                if !ext.unify(&Term::Var(*v), t) {
                    continue 'answers;
                }
            }
            push_unique(&mut out, ext);
        }
    }
    Ok(out)
}

/// Substitutions under which `clause` is entailed: its fluent part is
/// subsumed by a prime implicate of `state`, or one of its aux atoms is
/// derivable. Fluent answers come first (implicates in canonical order),
/// then aux answers left to right; duplicates are dropped.
pub fn entails_clause(
    state: &PiList,
    clause: &PropClause,
    aux: &dyn AuxSolver,
) -> Result<Vec<Substitution>, EngineError> {
    entails_clause_from(state, clause, aux, &Substitution::new())
}

/// Conjunction of clauses evaluated left to right, threading substitutions.
pub fn entails_property(
    state: &PiList,
    phi: &StateProperty,
    aux: &dyn AuxSolver,
) -> Result<Vec<Substitution>, EngineError> {
    let mut partial = vec![Substitution::new()];
    for clause in phi.clauses() {
        let mut next = Vec::new();
        for s in &partial {
            for ext in entails_clause_from(state, clause, aux, s)? {
                push_unique(&mut next, ext);
            }
        }
        if next.is_empty() {
            return Ok(next);
        }
        partial = next;
    }
    Ok(partial)
}

/// Index of an effect case within its action.
pub type CaseIndex = usize;

/// Cases whose condition is entailed under `theta`, each with the first
/// entailing extension of `theta`.
pub fn applicable_cases_with_bindings(
    state: &PiList,
    spec: &ActionSpec,
    theta: &Substitution,
    aux: &dyn AuxSolver,
) -> Result<Vec<(CaseIndex, Substitution)>, EngineError> {
    let mut found = Vec::new();
    for (i, case) in spec.cases.iter().enumerate() {
        let cond = case.condition.apply(theta);
        if let Some(first) = entails_property(state, &cond, aux)?.into_iter().next() {
            let ext = theta.compose(&first).unwrap_or_else(|| theta.clone());
            found.push((i, ext));
        }
    }
    if found.len() > 1 {
        return Err(EngineError::NonDeterministicAction {
            action: theta.apply(&spec.head).to_string(),
            cases: found.iter().map(|(i, _)| *i).collect(),
        });
    }
    Ok(found)
}

pub fn applicable_cases(
    state: &PiList,
    spec: &ActionSpec,
    theta: &Substitution,
    aux: &dyn AuxSolver,
) -> Result<Vec<CaseIndex>, EngineError> {
    Ok(applicable_cases_with_bindings(state, spec, theta, aux)?.into_iter().map(|(i, _)| i).collect())
}

/// Ground clauses of a ground fluent-only property.
pub fn ground_clauses(phi: &StateProperty) -> Result<Vec<Clause>, EngineError> {
    let mut out = Vec::new();
    for c in phi.clauses() {
        let mut lits = Vec::new();
        for a in &c.0 {
            match a {
                PropAtom::Fluent(l) if l.is_ground() => lits.push(l.clone()),
                _ => return Err(EngineError::NonGroundMeaning(format!("{a:?}"))),
            }
        }
        if let Normalized::Clause(c) = normalize_clause(lits) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Result of folding an observation into the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sensed {
    pub state: PiList,
    /// Binding of the axiom's value variable (and index variables).
    pub binding: Substitution,
    pub case: usize,
    pub meaning: Vec<Clause>,
}

/// Locate the unique triple whose result matches `observed` and whose
/// index is entailed, then close `state ∪ meaning`.
pub fn integrate_sensing(
    state: &PiList,
    axiom: &SensorAxiom,
    observed: &Term,
    aux: &dyn AuxSolver,
) -> Result<Sensed, EngineError> {
    let sense = axiom.sense.to_string();
    if !axiom.results().iter().any(|r| crate::term::unify(r, observed).is_some()) {
        return Err(EngineError::UnknownSensorResult { sense, observed: observed.to_string() });
    }
    let mut hits: Vec<(usize, Substitution)> = Vec::new();
    for (i, case) in axiom.cases.iter().enumerate() {
        let mut theta = Substitution::new();
        if !theta.unify(&Term::Var(axiom.value_var), observed) || !theta.unify(&case.result, observed) {
            continue;
        }
        let index = case.index.apply(&theta);
        if let Some(first) = entails_property(state, &index, aux)?.into_iter().next() {
            hits.push((i, theta.compose(&first).unwrap_or(theta)));
        }
    }
    let (case, binding) = match hits.len() {
        0 => return Err(EngineError::NoSensorCase { sense, observed: observed.to_string() }),
        1 => hits.pop().expect("one hit"),
        _ => {
            return Err(EngineError::AmbiguousSensorCase {
                sense,
                observed: observed.to_string(),
                cases: hits.iter().map(|(i, _)| *i).collect(),
            })
        }
    };
    let meaning = ground_clauses(&axiom.cases[case].meaning.apply(&binding))?;
    let merged = state.clauses.iter().cloned().chain(meaning.iter().cloned());
    match prime_closure(merged) {
        Closure::Prime(next) => Ok(Sensed { state: next, binding, case, meaning }),
        Closure::Inconsistent => Err(EngineError::SensingContradiction { sense, observed: observed.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EffectCase;
    use crate::term::Var;

    fn a(n: &str) -> Term {
        Term::atom(n)
    }
    fn p(n: &str) -> Literal {
        Literal::pos(a(n))
    }
    fn n(n: &str) -> Literal {
        Literal::neg(a(n))
    }
    fn cl(lits: &[Literal]) -> Clause {
        normalize_clause(lits.iter().cloned()).into_clause().unwrap()
    }
    fn at(who: &str, x: i64) -> Term {
        Term::app("at", vec![a(who), Term::Int(x)])
    }
    fn atv(who: &str, v: u32) -> Term {
        Term::app("at", vec![a(who), Term::var(v)])
    }
    fn unit_prop(l: Literal) -> PropClause {
        PropClause(vec![PropAtom::Fluent(l)])
    }

    #[test]
    fn closure_adds_resolvent() {
        // expected set from the truth-table enumeration in oracle tests
        let got = prime_closure([cl(&[p("p"), p("q")]), cl(&[n("q"), p("r")])]).prime().unwrap();
        let mut want = [cl(&[p("p"), p("q")]), cl(&[n("q"), p("r")]), cl(&[p("p"), p("r")])];
        want.sort();
        assert_eq!(got.clauses(), &want[..]);
    }

    #[test]
    fn closure_deletes_subsumed_and_tautologies() {
        let got = prime_closure([cl(&[p("p")]), cl(&[p("p"), p("q")])]).prime().unwrap();
        assert_eq!(got.clauses(), &[cl(&[p("p")])]);
        let taut = normalize_clause([p("p"), n("p")]);
        assert_eq!(taut, Normalized::Tautology);
        assert_eq!(prime_closure(Vec::new()), Closure::Prime(PiList::empty()));
    }

    #[test]
    fn closure_detects_inconsistency() {
        assert_eq!(prime_closure([cl(&[p("p")]), cl(&[n("p")])]), Closure::Inconsistent);
    }

    #[test]
    fn is_prime_examples() {
        assert!(is_prime(&[cl(&[p("p"), p("q")]), cl(&[n("q"), p("r")]), cl(&[p("p"), p("r")])]));
        assert!(!is_prime(&[cl(&[p("p")]), cl(&[p("p"), p("q")])]));
        assert!(is_prime(&[]));
    }

    fn gold_disjunction() -> PiList {
        prime_closure([cl(&[Literal::pos(at("gold", 4)), Literal::pos(at("gold", 5))])]).prime().unwrap()
    }

    #[test]
    fn disjunctive_gold_single_query_fails() {
        let got = entails_clause(&gold_disjunction(), &unit_prop(Literal::pos(atv("gold", 0))), &NoAux).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn disjunctive_gold_pair_query_binds_both() {
        let q = PropClause(vec![
            PropAtom::Fluent(Literal::pos(atv("gold", 0))),
            PropAtom::Fluent(Literal::pos(atv("gold", 1))),
        ]);
        let got = entails_clause(&gold_disjunction(), &q, &NoAux).unwrap();
        let first = &got[0];
        assert_eq!(first.get(Var(0)), Some(&Term::Int(4)));
        assert_eq!(first.get(Var(1)), Some(&Term::Int(5)));
    }

    #[test]
    fn unit_query_binds() {
        let st = prime_closure([cl(&[Literal::pos(at("gold", 4))])]).prime().unwrap();
        let got = entails_clause(&st, &unit_prop(Literal::pos(atv("gold", 0))), &NoAux).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].get(Var(0)), Some(&Term::Int(4)));
    }

    #[test]
    fn empty_property_yields_identity() {
        let got = entails_property(&PiList::empty(), &StateProperty::default(), &NoAux).unwrap();
        assert_eq!(got, vec![Substitution::new()]);
        let st = prime_closure([cl(&[p("p")])]).prime().unwrap();
        let got = entails_property(&st, &StateProperty(vec![unit_prop(p("q"))]), &NoAux).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn update_examples() {
        let st = prime_closure([
            cl(&[Literal::pos(at("agent", 1))]),
            cl(&[Literal::pos(at("gold", 4)), Literal::pos(at("gold", 5))]),
        ])
        .prime()
        .unwrap();
        let next = update(&st, &[Literal::neg(at("agent", 1)), Literal::pos(at("agent", 2))]).unwrap();
        let mut want = [
            cl(&[Literal::neg(at("agent", 1))]),
            cl(&[Literal::pos(at("agent", 2))]),
            cl(&[Literal::pos(at("gold", 4)), Literal::pos(at("gold", 5))]),
        ];
        want.sort();
        assert_eq!(next.clauses(), &want[..]);

        let st = prime_closure([cl(&[p("p"), p("q")])]).prime().unwrap();
        assert_eq!(update(&st, &[p("p")]).unwrap().clauses(), &[cl(&[p("p")])]);
        assert_eq!(update(&st, &[]).unwrap(), st);
        assert!(matches!(update(&st, &[p("r"), n("r")]), Err(EngineError::ContradictoryEffects(_))));
    }

    fn two_case_spec() -> ActionSpec {
        let case = |l: Literal| EffectCase { condition: StateProperty(vec![unit_prop(l)]), effects: vec![p("done")] };
        ActionSpec {
            head: a("act"),
            precondition: StateProperty::default(),
            cases: vec![case(p("p")), case(n("p"))],
            var_names: vec![],
        }
    }

    #[test]
    fn applicable_cases_examples() {
        let spec = two_case_spec();
        let open = prime_closure([cl(&[p("p"), p("q")])]).prime().unwrap();
        assert!(applicable_cases(&open, &spec, &Substitution::new(), &NoAux).unwrap().is_empty());
        let known = prime_closure([cl(&[p("p")])]).prime().unwrap();
        assert_eq!(applicable_cases(&known, &spec, &Substitution::new(), &NoAux).unwrap(), vec![0]);
    }

    #[test]
    fn overlapping_cases_are_rejected() {
        let mut spec = two_case_spec();
        spec.cases[1].condition = StateProperty::default();
        let known = prime_closure([cl(&[p("p")])]).prime().unwrap();
        assert!(matches!(
            applicable_cases(&known, &spec, &Substitution::new(), &NoAux),
            Err(EngineError::NonDeterministicAction { .. })
        ));
    }

    fn threat(c: &str) -> Literal {
        Literal::pos(Term::app("threatAt", vec![a(c)]))
    }

    fn smell_axiom() -> SensorAxiom {
        // cell c has neighbours n1, n2
        let here = StateProperty(vec![unit_prop(Literal::pos(Term::app("at", vec![a("agent"), a("c")])))]);
        SensorAxiom {
            sense: "perceiveSmell".into(),
            value_var: Var(0),
            cases: vec![
                crate::domain::SensorCase {
                    result: a("true"),
                    index: here.clone(),
                    meaning: StateProperty(vec![PropClause(vec![
                        PropAtom::Fluent(threat("n1")),
                        PropAtom::Fluent(threat("n2")),
                    ])]),
                },
                crate::domain::SensorCase {
                    result: a("false"),
                    index: here,
                    meaning: StateProperty(vec![
                        unit_prop(threat("n1").complement()),
                        unit_prop(threat("n2").complement()),
                    ]),
                },
            ],
            var_names: vec!["X".into()],
        }
    }

    #[test]
    fn sensing_no_smell_resolves_disjunction() {
        let st = prime_closure([
            cl(&[Literal::pos(Term::app("at", vec![a("agent"), a("c")]))]),
            cl(&[threat("n1"), threat("n3")]),
        ])
        .prime()
        .unwrap();
        let sensed = integrate_sensing(&st, &smell_axiom(), &a("false"), &NoAux).unwrap();
        assert!(sensed.state.contains(&cl(&[threat("n3")])));
        assert!(sensed.state.contains(&cl(&[threat("n1").complement()])));
        assert!(!sensed.state.contains(&cl(&[threat("n1"), threat("n3")])));
        assert_eq!(sensed.binding.get(Var(0)), Some(&a("false")));
    }

    #[test]
    fn sensing_smell_adds_disjunction() {
        let st = prime_closure([cl(&[Literal::pos(Term::app("at", vec![a("agent"), a("c")]))])]).prime().unwrap();
        let sensed = integrate_sensing(&st, &smell_axiom(), &a("true"), &NoAux).unwrap();
        assert_eq!(sensed.state.len(), 2);
        assert!(sensed.state.contains(&cl(&[threat("n1"), threat("n2")])));
    }

    #[test]
    fn sensing_errors() {
        let st = prime_closure([cl(&[Literal::pos(Term::app("at", vec![a("agent"), a("c")]))])]).prime().unwrap();
        assert!(matches!(
            integrate_sensing(&st, &smell_axiom(), &a("maybe"), &NoAux),
            Err(EngineError::UnknownSensorResult { .. })
        ));
        assert!(matches!(
            integrate_sensing(&PiList::empty(), &smell_axiom(), &a("true"), &NoAux),
            Err(EngineError::NoSensorCase { .. })
        ));
        let contra =
            prime_closure([cl(&[Literal::pos(Term::app("at", vec![a("agent"), a("c")]))]), cl(&[threat("n1")])])
                .prime()
                .unwrap();
        assert!(matches!(
            integrate_sensing(&contra, &smell_axiom(), &a("false"), &NoAux),
            Err(EngineError::SensingContradiction { .. })
        ));
    }
}
