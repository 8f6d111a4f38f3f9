use alpprolog::env::ScriptStep;
use alpprolog::interp::{replay, Event};
use alpprolog::{
    parse_domain, parse_program, parse_query, Config, DomainFile, Interpreter, MazeEnv, Outcome, ReplayEnv, Run,
    RuntimeError, Term,
};

const MAZE: &str = include_str!("../fixtures/gold_maze.alpd");
const EXPLORE: &str = include_str!("../fixtures/gold_maze.alp");
const BARRIER: &str = include_str!("../fixtures/barrier.alp");

fn run_with(
    domain: &DomainFile,
    program: &str,
    query: &str,
    env: &mut dyn alpprolog::Environment,
    config: Config,
) -> Run {
    let program = parse_program(program, &domain.signature).unwrap();
    let query = parse_query(query, &domain.signature).unwrap();
    Interpreter::new(domain, &program, config).solve(&query, env)
}

fn maze_run(program: &str, query: &str) -> Run {
    let domain = parse_domain(MAZE).unwrap();
    run_with(&domain, program, query, &mut MazeEnv::new(5, 1, 4), Config::default())
}

fn shown(ts: &[Term]) -> Vec<String> {
    ts.iter().map(Term::to_string).collect()
}

fn answer(run: &Run) -> Vec<(String, String)> {
    match &run.outcome {
        Outcome::Success(b) => b.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect(),
        other => panic!("expected success, got {other:?}"),
    }
}

#[test]
fn explore_reaches_gold_through_three_moves() {
    let run = maze_run(EXPLORE, "explore([2,3,4,5],[])");
    assert!(matches!(run.outcome, Outcome::Success(_)), "{:?}", run.outcome);
    assert_eq!(shown(&run.state.history), ["go(2)", "go(3)", "go(4)"]);
}

#[test]
fn explore_without_three_fails_cleanly() {
    let run = maze_run(EXPLORE, "explore([2,4],[])");
    assert_eq!(run.outcome, Outcome::Failure);
    assert_eq!(shown(&run.state.history), ["go(2)", "go(1)"]);
}

#[test]
fn initial_unit_query_succeeds() {
    let run = maze_run(EXPLORE, "?([at(agent,1)])");
    assert_eq!(answer(&run), Vec::<(String, String)>::new());
    let run = maze_run(EXPLORE, "?([])");
    assert!(matches!(run.outcome, Outcome::Success(_)));
}

#[test]
fn do_binds_target_from_precondition() {
    let run = maze_run(EXPLORE, "do(go(Y))");
    assert_eq!(answer(&run), [("Y".to_string(), "2".to_string())]);
    assert_eq!(run.state.belief.to_string(), "[-at(agent,1), at(agent,2), at(gold,4)]");
}

#[test]
fn impossible_action_fails_without_executing() {
    let run = maze_run(EXPLORE, "do(go(7))");
    assert_eq!(run.outcome, Outcome::Failure);
    assert!(run.state.history.is_empty());
}

#[test]
fn backtracking_over_an_action_is_an_error() {
    let run = maze_run(BARRIER, "run");
    assert_eq!(run.outcome, Outcome::Error(RuntimeError::BacktrackedAcrossAction));
    assert_eq!(shown(&run.state.history), ["go(2)"]);
}

#[test]
fn failure_before_any_action_may_backtrack() {
    let program = "p :- q(X), do(go(X)), !.\nq(3).\nq(2).";
    let run = maze_run(program, "p");
    assert!(matches!(run.outcome, Outcome::Success(_)));
    assert_eq!(shown(&run.state.history), ["go(2)"]);
}

#[test]
fn unbound_action_argument_is_an_error() {
    let domain =
        parse_domain("fluents([at/2]).\nactions([jump/1]).\naction(jump(Y), [], [[]-[at(agent,Y)]]).").unwrap();
    let mut env = ReplayEnv::new(Vec::new());
    let run = run_with(&domain, "p :- do(jump(Y)).", "p", &mut env, Config::default());
    assert!(matches!(run.outcome, Outcome::Error(RuntimeError::UnboundActionArgument(_))), "{:?}", run.outcome);
}

#[test]
fn disjunctive_belief_answers() {
    let domain = parse_domain("fluents([at/2]).\ninitial_state([[at(gold,4), at(gold,5)]]).").unwrap();
    let mut env = ReplayEnv::new(Vec::new());
    let run = run_with(&domain, "", "?([at(gold,X)])", &mut env, Config::default());
    assert_eq!(run.outcome, Outcome::Failure);
    let run = run_with(&domain, "", "?([[at(gold,X), at(gold,Y)]])", &mut env, Config::default());
    assert_eq!(answer(&run), [("X".into(), "4".into()), ("Y".into(), "5".into())]);
}

const SMELL: &str = "fluents([at/2, threatAt/1]).\nsensors([smell/1]).\naux([adj/2]).\n\
initial_state([at(agent,1)]).\n\
sensor_axiom(smell(X), [X-true-[at(agent,1)]-[[threatAt(2), threatAt(3)]], X-false-[at(agent,1)]-[-threatAt(2), -threatAt(3)]]).\n\
adj(1,2). adj(1,3).";

#[test]
fn sensing_integrates_meaning_and_binds() {
    let domain = parse_domain(SMELL).unwrap();
    let mut env = ReplayEnv::new(vec![ScriptStep::Sense("smell".into(), Term::atom("false"))]);
    let run = run_with(&domain, "p(S) :- ?(smell(S)), ?(-threatAt(2)).", "p(S)", &mut env, Config::default());
    assert_eq!(answer(&run), [("S".into(), "false".into())]);
    assert_eq!(run.state.barrier, 1);
    assert_eq!(run.state.belief.to_string(), "[at(agent,1), -threatAt(2), -threatAt(3)]");
}

#[test]
fn sensing_into_a_bound_variable_is_an_error() {
    let domain = parse_domain(SMELL).unwrap();
    let mut env = ReplayEnv::new(vec![ScriptStep::Sense("smell".into(), Term::atom("true"))]);
    let run = run_with(&domain, "p :- X = true, ?(smell(X)).", "p", &mut env, Config::default());
    assert!(matches!(run.outcome, Outcome::Error(RuntimeError::SenseVariableNotFree(_))), "{:?}", run.outcome);
}

#[test]
fn history_replays_to_the_same_belief() {
    let domain = parse_domain(MAZE).unwrap();
    let run = run_with(&domain, EXPLORE, "explore([2,3,4,5],[])", &mut MazeEnv::new(5, 1, 4), Config::default());
    assert_eq!(replay(&domain, &run.state.events).unwrap(), run.state.belief);

    let domain = parse_domain(SMELL).unwrap();
    let events = vec![Event::Sense("smell".into(), Term::atom("true"))];
    let belief = replay(&domain, &events).unwrap();
    assert_eq!(belief.to_string(), "[at(agent,1), [threatAt(2),threatAt(3)]]");
}

#[test]
fn trace_lines() {
    let domain = parse_domain(MAZE).unwrap();
    let config = Config { trace: true, ..Config::default() };
    let run = run_with(&domain, EXPLORE, "explore([2,3,4,5],[])", &mut MazeEnv::new(5, 1, 4), config);
    assert_eq!(run.trace[0], "CALL explore([2,3,4,5],[])");
    let execs: Vec<&String> = run.trace.iter().filter(|l| l.starts_with("EXEC")).collect();
    assert_eq!(execs, ["EXEC go(2)", "EXEC go(3)", "EXEC go(4)"]);
    assert!(run.trace.iter().any(|l| l == "STATE size=3"));
    assert!(run.trace.iter().any(|l| l.starts_with("REDO ")));
    assert!(run.trace.iter().any(|l| l.starts_with("FAIL ")));
    assert_eq!(run.trace.last().unwrap(), "EXIT explore([2,3,4,5],[])");
}

#[test]
fn environment_log_matches_history() {
    let domain = parse_domain(MAZE).unwrap();
    let mut env = MazeEnv::new(5, 1, 4);
    let run = run_with(&domain, EXPLORE, "explore([2,4],[])", &mut env, Config::default());
    assert_eq!(alpprolog::Environment::received(&env), run.state.history.as_slice());
}

#[test]
fn rejected_action_is_a_runtime_error() {
    let domain = parse_domain(MAZE).unwrap();
    let mut env = ReplayEnv::new(vec![ScriptStep::Do(Term::app("go", vec![Term::Int(3)]))]);
    let run = run_with(&domain, EXPLORE, "do(go(2))", &mut env, Config::default());
    assert!(matches!(run.outcome, Outcome::Error(RuntimeError::EnvironmentRejected { .. })));
}

#[test]
fn step_budget() {
    let domain = parse_domain(MAZE).unwrap();
    let config = Config { step_limit: 1000, ..Config::default() };
    let run = run_with(&domain, "loop :- loop.", "loop", &mut MazeEnv::new(5, 1, 4), config);
    assert_eq!(run.outcome, Outcome::Error(RuntimeError::StepLimit(1000)));
}

/// Programs without `do`/`?` behave as ordinary Prolog with cut.
#[test]
fn pure_programs_match_standard_resolution() {
    let lib = "
        app([], L, L).
        app([H|T], L, [H|R]) :- app(T, L, R).
        mem(X, [X|_]).
        mem(X, [_|T]) :- mem(X, T).
        select(X, [X|Xs], Xs).
        select(X, [Y|Xs], [Y|Ys]) :- select(X, Xs, Ys).
        rev([], A, A).
        rev([H|T], A, R) :- rev(T, [H|A], R).
        max(X, Y, X) :- X >= Y, !.
        max(_, Y, Y).
        len([], 0).
        len([_|T], N) :- len(T, M), N is M + 1.
        first_mem(X, L) :- mem(X, L), !.
    ";
    let domain = parse_domain(MAZE).unwrap();
    let cases: &[(&str, &str)] = &[
        ("app(X, Y, [1,2])", "X=[] Y=[1,2]"),
        ("app([1], [2,3], Z)", "Z=[1,2,3]"),
        ("mem(X, [a,b,c]), X \\= a", "X=b"),
        ("select(X, [1,2,3], [1,3])", "X=2"),
        ("select(3, L, [1,2])", "L=[3,1,2]"),
        ("rev([1,2,3], [], R)", "R=[3,2,1]"),
        ("max(3, 5, M)", "M=5"),
        ("max(7, 5, M)", "M=7"),
        ("len([a,b,c,d], N)", "N=4"),
        ("first_mem(X, [q,r])", "X=q"),
        ("succ(3, S), succ(P, 3), T is -7 // 2, U is -7 mod 2", "S=4 P=2 T=-3 U=1"),
    ];
    for (q, expected) in cases {
        let run = run_with(&domain, lib, q, &mut MazeEnv::new(5, 1, 4), Config::default());
        let got: Vec<String> = answer(&run).into_iter().map(|(n, t)| format!("{n}={t}")).collect();
        assert_eq!(got.join(" "), *expected, "query {q}");
    }
    for q in ["mem(d, [a,b,c])", "app(X, [3], [1,2])", "max(3, 5, 3)", "1 =:= 2"] {
        let run = run_with(&domain, lib, q, &mut MazeEnv::new(5, 1, 4), Config::default());
        assert_eq!(run.outcome, Outcome::Failure, "query {q}");
    }
}

#[test]
fn debug_checks_pass_on_maze() {
    let domain = parse_domain(MAZE).unwrap();
    let config = Config { debug_checks: true, ..Config::default() };
    let run = run_with(&domain, EXPLORE, "explore([2,3,4,5],[])", &mut MazeEnv::new(5, 1, 4), config);
    assert!(matches!(run.outcome, Outcome::Success(_)));
}
