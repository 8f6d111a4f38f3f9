//! Engine results checked against truth-table and possible-worlds oracles.

use std::collections::BTreeSet;

use alpprolog::domain::{EffectCase, PropAtom, PropClause};
use alpprolog::oracle::{
    atoms_of, check_journal, models, progress_beliefs, reference_prime_implicates, AuxFacts, BeliefSet,
};
use alpprolog::pi::{entails_clause, is_prime, prime_closure, update, Closure, NoAux};
use alpprolog::term::normalize_clause;
use alpprolog::wumpus::{agent_program, emit_domain, AGENT_QUERY};
use alpprolog::{
    parse_domain, parse_program, parse_query, ActionSpec, Clause, Config, DomainFile, Interpreter, Literal, MazeEnv,
    Outcome, StateProperty, Term, Variant, WumpusConfig, WumpusEnv, WumpusWorld,
};
use proptest::prelude::*;

fn atom(i: u8) -> Term {
    Term::app("p", vec![Term::Int(i as i64)])
}

fn lit((i, neg): (u8, bool)) -> Literal {
    if neg {
        Literal::neg(atom(i))
    } else {
        Literal::pos(atom(i))
    }
}

fn clause_of(lits: &[(u8, bool)]) -> Option<Clause> {
    normalize_clause(lits.iter().copied().map(lit)).into_clause()
}

fn cnf(atoms: u8, max_clauses: usize, max_len: usize) -> impl Strategy<Value = Vec<Clause>> {
    let lit = (0..atoms, any::<bool>());
    prop::collection::vec(prop::collection::vec(lit, 1..=max_len), 0..=max_clauses)
        .prop_map(|cs| cs.iter().filter_map(|c| clause_of(c)).collect())
}

fn closure_set(clauses: &[Clause]) -> BTreeSet<Clause> {
    match prime_closure(clauses.iter().cloned()) {
        Closure::Prime(p) => p.clauses().iter().cloned().collect(),
        Closure::Inconsistent => BTreeSet::from([Clause::empty()]),
    }
}

/// Action `a` with no precondition and the given unconditional effects.
fn unconditional(effects: Vec<Literal>) -> ActionSpec {
    ActionSpec {
        head: Term::atom("a"),
        precondition: StateProperty(Vec::new()),
        cases: vec![EffectCase { condition: StateProperty(Vec::new()), effects }],
        var_names: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closure_matches_reference(cs in cnf(6, 10, 4)) {
        let reference: BTreeSet<Clause> =
            reference_prime_implicates(&cs, &atoms_of(&cs)).unwrap().into_iter().collect();
        prop_assert_eq!(closure_set(&cs), reference);
    }

    #[test]
    fn closure_preserves_models(cs in cnf(7, 12, 3)) {
        let atoms = atoms_of(&cs);
        if let Closure::Prime(p) = prime_closure(cs.iter().cloned()) {
            prop_assert!(is_prime(p.clauses()));
            prop_assert_eq!(models(p.clauses(), &atoms).unwrap(), models(&cs, &atoms).unwrap());
        } else {
            prop_assert!(models(&cs, &atoms).unwrap().is_empty());
        }
    }

    /// Subsumption by a prime implicate decides ground clausal entailment.
    #[test]
    fn ground_entailment_is_exact(cs in cnf(6, 8, 3), q in prop::collection::vec((0u8..6, any::<bool>()), 1..4)) {
        let Some(state) = prime_closure(cs.iter().cloned()).prime() else { return Ok(()) };
        let Some(query) = clause_of(&q) else { return Ok(()) };
        let prop = PropClause(query.literals().iter().cloned().map(PropAtom::Fluent).collect());
        let engine = !entails_clause(&state, &prop, &NoAux).unwrap().is_empty();
        let mut worlds = BeliefSet::from_pilist(&state).unwrap();
        prop_assert_eq!(engine, worlds.all_satisfy(&[query]).unwrap());
    }

    #[test]
    fn update_is_prime_and_sound(
        cs in cnf(10, 10, 3),
        effects in prop::collection::btree_map(0u8..10, any::<bool>(), 0..4),
    ) {
        let Some(state) = prime_closure(cs.iter().cloned()).prime() else { return Ok(()) };
        let effects: Vec<Literal> = effects.into_iter().map(lit).collect();
        let next = update(&state, &effects).unwrap();
        prop_assert!(is_prime(next.clauses()));
        let before = BeliefSet::from_pilist(&state).unwrap();
        let mut after = progress_beliefs(&before, &unconditional(effects), &Term::atom("a"), &AuxFacts::default()).unwrap();
        prop_assert!(after.all_satisfy(next.clauses()).unwrap());
    }
}

#[test]
fn empty_and_inconsistent_inputs() {
    assert_eq!(closure_set(&[]), BTreeSet::new());
    let p = clause_of(&[(0, false)]).unwrap();
    let n = clause_of(&[(0, true)]).unwrap();
    assert_eq!(closure_set(&[p.clone(), n.clone()]), BTreeSet::from([Clause::empty()]));
    assert_eq!(reference_prime_implicates(&[p, n], &[atom(0)]).unwrap(), vec![Clause::empty()]);
}

#[test]
fn update_forgets_disjunctions_over_effects() {
    let state = prime_closure([clause_of(&[(0, false), (1, false)]).unwrap()]).prime().unwrap();
    let next = update(&state, &[lit((0, true))]).unwrap();
    assert_eq!(next.to_string(), "[-p(0)]");
}

const GLITTER_PROGRAM: &str = "
seek(Cs, B) :- ?(glitter(G)), continue(G, Cs, B).
continue(true, _, _) :- ?(at(agent,X)), ?(at(gold,X)).
continue(false, Cs, B) :- ?(at(agent,X)), select(Y, Cs, Ns), do(go(Y)), !, seek(Ns, [X|B]).
continue(false, Cs, [X|B]) :- do(go(X)), !, seek(Cs, B).
select(X, [X|Xs], Xs).
select(X, [Y|Xs], [Y|Ys]) :- select(X, Xs, Ys).
";

fn glitter_maze(cells: i64, agent: i64, candidates: &[i64]) -> DomainFile {
    let objects: Vec<String> = (1..=cells).map(|k| k.to_string()).collect();
    let gold: Vec<String> = candidates.iter().map(|g| format!("at(gold,{g})")).collect();
    let mut text = format!(
        "fluents([at/2]).\nactions([go/1]).\nsensors([glitter/1]).\naux([adj/2]).\nobjects(cell, [{}]).\n\
         initial_state([at(agent,{agent}), [{}]]).\n\
         action(go(Y), [at(agent,X), adj(X,Y)], [[] - [at(agent,Y), -at(agent,X)]]).\n\
         sensor_axiom(glitter(V), [V-true-[at(agent,C)]-[at(gold,C)], V-false-[at(agent,C)]-[-at(gold,C)]]).\n",
        objects.join(", "),
        gold.join(", ")
    );
    for k in 1..cells {
        text.push_str(&format!("adj({k},{}). adj({},{k}).\n", k + 1, k + 1));
    }
    parse_domain(&text).unwrap()
}

#[test]
fn sensing_maze_journal_is_sound() {
    for (cells, agent, gold, candidates) in [(5, 1, 4, vec![3, 4]), (6, 3, 6, vec![1, 5, 6]), (4, 2, 1, vec![1, 4])] {
        let domain = glitter_maze(cells, agent, &candidates);
        let program = parse_program(GLITTER_PROGRAM, &domain.signature).unwrap();
        let rest: Vec<String> = (1..=cells).filter(|&k| k != agent).map(|k| k.to_string()).collect();
        let query = parse_query(&format!("seek([{}],[])", rest.join(",")), &domain.signature).unwrap();
        let config = Config { journal: true, debug_checks: true, ..Config::default() };
        let run = Interpreter::new(&domain, &program, config).solve(&query, &mut MazeEnv::new(cells, agent, gold));
        assert!(matches!(run.outcome, Outcome::Success(_)), "{:?}", run.outcome);
        let report = check_journal(&domain, &run.state.journal).unwrap();
        assert!(report.observations > 0 && report.entailments > 0, "{report:?}");
    }
}

#[test]
fn small_wumpus_journals_are_sound() {
    for variant in [Variant::Ground2, Variant::Ground3] {
        for seed in 1..=3 {
            let world = WumpusWorld::generate(&WumpusConfig::new(4, seed)).unwrap();
            let domain = parse_domain(&emit_domain(&world, variant)).unwrap();
            let program = parse_program(&agent_program(variant), &domain.signature).unwrap();
            let query = parse_query(AGENT_QUERY, &domain.signature).unwrap();
            let config = Config { journal: true, ..Config::default() };
            let run = Interpreter::new(&domain, &program, config).solve(&query, &mut WumpusEnv::new(world));
            assert!(matches!(run.outcome, Outcome::Success(_)), "{:?}", run.outcome);
            check_journal(&domain, &run.state.journal).unwrap_or_else(|e| panic!("{variant} seed {seed}: {e}"));
        }
    }
}
