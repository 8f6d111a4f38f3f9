use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn alpprolog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alpprolog")).args(args).output().expect("spawn alpprolog")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn maze(program: &str, query: &str, extra: &[&str]) -> Output {
    let (p, d) = (fixture(program), fixture("gold_maze.alpd"));
    let mut args = vec!["run", "--program", &p, "--domain", &d, "--env", "maze:5", "--query", query];
    args.extend_from_slice(extra);
    alpprolog(&args)
}

#[test]
fn maze_success_reports_history() {
    let o = maze("gold_maze.alp", "explore([2,3,4,5],[])", &[]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("outcome: success"), "{out}");
    assert!(out.contains("history: [go(2), go(3), go(4)]"), "{out}");
}

#[test]
fn maze_failure_exit_code() {
    let o = maze("gold_maze.alp", "explore([2,4],[])", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("history: [go(2), go(1)]"));
}

#[test]
fn barrier_is_runtime_error() {
    let o = maze("barrier.alp", "run", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("backtracked across executed action"));
}

#[test]
fn trace_flag_prints_events() {
    let o = maze("gold_maze.alp", "explore([2,3,4,5],[])", &["--trace"]);
    let out = stdout(&o);
    let execs: Vec<&str> = out.lines().filter(|l| l.starts_with("EXEC ")).collect();
    assert_eq!(execs, ["EXEC go(2)", "EXEC go(3)", "EXEC go(4)"]);
    assert!(out.lines().any(|l| l.starts_with("CALL explore(")));
}

#[test]
fn answers_are_printed() {
    let o = maze("gold_maze.alp", "do(go(Y))", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("answer: Y = 2"));
}

#[test]
fn input_errors_exit_three() {
    let o = maze("missing.alp", "run", &[]);
    assert_eq!(o.status.code(), Some(3));
    let o = maze("gold_maze.alp", "explore(", &[]);
    assert_eq!(o.status.code(), Some(3));
    let o = maze("gold_maze.alp", "run", &["--no-such-flag"]);
    assert_eq!(o.status.code(), Some(3));
    // No --query and no directive.
    let (p, d) = (fixture("gold_maze.alp"), fixture("gold_maze.alpd"));
    let o = alpprolog(&["run", "--program", &p, "--domain", &d, "--env", "maze:5"]);
    assert_eq!(o.status.code(), Some(3));
    let o = alpprolog(&["run", "--program", &p, "--domain", &d, "--env", "lab:5", "--query", "true"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn help_exits_zero() {
    assert_eq!(alpprolog(&["--help"]).status.code(), Some(0));
    assert_eq!(alpprolog(&["--version"]).status.code(), Some(0));
}

#[test]
fn replay_environment() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("log.txt");
    std::fs::write(&script, "do go(2)\ndo go(3)\ndo go(4)\n").unwrap();
    let env = format!("replay:{}", script.display());
    let (p, d) = (fixture("gold_maze.alp"), fixture("gold_maze.alpd"));
    let o = alpprolog(&["run", "--program", &p, "--domain", &d, "--env", &env, "--query", "explore([2,3,4,5],[])"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    std::fs::write(&script, "do go(3)\n").unwrap();
    let o = alpprolog(&["run", "--program", &p, "--domain", &d, "--env", &env, "--query", "explore([2,3,4,5],[])"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_wumpus_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let domain = dir.path().join("w.alpd");
    let program = dir.path().join("w.alp");
    let (d, p) = (domain.to_str().unwrap(), program.to_str().unwrap());
    let o = alpprolog(&["gen-wumpus", "4", "ground3", "--seed", "5", "--out", d, "--program-out", p]);
    assert_eq!(o.status.code(), Some(0));
    let o = alpprolog(&["run", "--program", p, "--domain", d, "--env", "wumpus:4x4", "--seed", "5", "--query", "hunt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("grab]"));
}

#[test]
fn wumpus_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("world.cfg");
    std::fs::write(&cfg, "size = 6\nthreats = 2\ngold = 4,4\nseed = 9\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = alpprolog(&["gen-wumpus", "5", "ground2", "--config", c]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("5x5"), "{out}");
    assert!(out.contains("at(gold,c(4,4))"), "{out}");
    let o = alpprolog(&["gen-wumpus", "5", "ground2", "--config", c, "--gold", "2,3"]);
    assert!(stdout(&o).contains("at(gold,c(2,3))"));
}

#[test]
fn gen_wumpus_rejects_bad_sizes() {
    assert_eq!(alpprolog(&["gen-wumpus", "1", "ground2"]).status.code(), Some(3));
    assert_eq!(alpprolog(&["gen-wumpus", "40", "ground2"]).status.code(), Some(3));
    assert_eq!(alpprolog(&["gen-wumpus", "4", "ground9"]).status.code(), Some(3));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let o = alpprolog(&["bench", "--sizes", "4,5", "--seeds", "1,2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[1], "size,variant,seed,status,actions,max_state_clauses,total_ms,mean_action_ms");
    assert_eq!(lines.len(), 6);
    for row in &lines[2..] {
        assert_eq!(row.split(',').count(), 8, "{row}");
        assert!(row.contains(",ground2,"));
    }
}
