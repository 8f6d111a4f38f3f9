//! `alpprolog` command-line interface.
//!
//! Exit codes: 0 success, 1 failure, 2 runtime error, 3 parse or usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alpprolog::env::Environment;
use alpprolog::experiment::{bench, to_csv};
use alpprolog::interp::DEFAULT_STEP_LIMIT;
use alpprolog::wumpus::{agent_program, emit_domain, parse_cell, Cell};
use alpprolog::{
    parse_domain, parse_program, parse_query, Config, DomainFile, Interpreter, MazeEnv, Outcome, ReplayEnv, Term,
    Variant, WumpusConfig, WumpusEnv, WumpusWorld,
};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

const EXIT_FAILURE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "alpprolog", version, about = "Agent logic programs over a propositional Fluent Calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an agent program against an environment.
    Run(RunArgs),
    /// Generate a Wumpus world domain file.
    GenWumpus(GenArgs),
    /// Run the reference agent on generated worlds and write CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct WorldArgs {
    /// World seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Number of threat cells.
    #[arg(long)]
    threats: Option<usize>,
    /// Gold cell as x,y.
    #[arg(long, value_parser = parse_gold)]
    gold: Option<Cell>,
    /// key=value world config; flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    domain: PathBuf,
    /// Goal to prove, e.g. `explore([2,3,4,5],[])`; defaults to the
    /// program's `:- Goal.` directive.
    #[arg(long)]
    query: Option<String>,
    /// maze:K[@G] | wumpus:NxN | replay:PATH
    #[arg(long)]
    env: String,
    #[command(flatten)]
    world: WorldArgs,
    /// Print CALL/EXIT/FAIL/REDO/EXEC/SENSE/STATE lines.
    #[arg(long)]
    trace: bool,
    /// Resolution step budget.
    #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
    steps: u64,
    /// Assert primeness of the belief after every update.
    #[arg(long)]
    debug_checks: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Grid side length.
    size: usize,
    /// ground2 (adjacency as aux facts) or ground3 (connections as fluents).
    variant: Variant,
    #[command(flatten)]
    world: WorldArgs,
    /// Domain output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the reference agent program here.
    #[arg(long)]
    program_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    sizes: Vec<usize>,
    #[arg(long, default_value = "ground2")]
    variant: Variant,
    /// Seeds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
    steps: u64,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_gold(s: &str) -> Result<Cell, String> {
    parse_cell(s).ok_or_else(|| format!("expected x,y, got {s}"))
}

/// An error that maps to a specific exit code.
struct Exit(u8, anyhow::Error);

fn input<E: Into<anyhow::Error>>(e: E) -> Exit {
    Exit(EXIT_INPUT, e.into())
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(input)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Exit> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())).map_err(input),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Config file values first, then explicit flags and the size argument.
fn world_config(size: usize, args: &WorldArgs) -> Result<WumpusConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            WumpusConfig::parse(&text).with_context(|| p.display().to_string())?
        }
        None => WumpusConfig::new(size, 0),
    };
    cfg.size = size;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.threats.is_some() {
        cfg.threats = args.threats;
    }
    if args.gold.is_some() {
        cfg.gold = args.gold;
    }
    Ok(cfg)
}

fn unit_arg(domain: &DomainFile, who: &str) -> Option<i64> {
    domain.initial_state.units().iter().find_map(|c| {
        let l = &c.literals()[0];
        match (l.negative, l.atom.functor(), l.atom.args()) {
            (false, Some(("at", 2)), [Term::App(w, _), Term::Int(k)]) if &**w == who => Some(*k),
            _ => None,
        }
    })
}

fn make_env(spec: &str, domain: &DomainFile, world: &WorldArgs) -> Result<Box<dyn Environment>> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| anyhow!("environment must be kind:arg, got {spec}"))?;
    match kind {
        "maze" => {
            let (k, gold) = match arg.split_once('@') {
                Some((k, g)) => (k, Some(g.parse::<i64>().context("maze gold cell")?)),
                None => (arg, None),
            };
            let cells: i64 = k.parse().context("maze size")?;
            let gold = gold
                .or_else(|| unit_arg(domain, "gold"))
                .ok_or_else(|| anyhow!("maze gold cell not given and not in the initial state"))?;
            let agent = unit_arg(domain, "agent").ok_or_else(|| anyhow!("initial state does not place the agent"))?;
            Ok(Box::new(MazeEnv::new(cells, agent, gold)))
        }
        "wumpus" => {
            let (a, b) = arg.split_once('x').ok_or_else(|| anyhow!("wumpus size must be NxN, got {arg}"))?;
            let (a, b): (usize, usize) = (a.parse()?, b.parse()?);
            if a != b {
                bail!("wumpus worlds are square, got {arg}");
            }
            let world = WumpusWorld::generate(&world_config(a, world)?)?;
            Ok(Box::new(WumpusEnv::new(world)))
        }
        "replay" => {
            let text = fs::read_to_string(arg).with_context(|| format!("cannot read {arg}"))?;
            Ok(Box::new(ReplayEnv::parse(&text).map_err(|e| anyhow!("{arg}: {e}"))?))
        }
        _ => bail!("unknown environment {kind} (expected maze, wumpus or replay)"),
    }
}

fn cmd_run(args: RunArgs) -> Result<u8, Exit> {
    let domain_text = read(&args.domain)?;
    let program_text = read(&args.program)?;
    let domain = parse_domain(&domain_text).with_context(|| args.domain.display().to_string()).map_err(input)?;
    for w in &domain.warnings {
        log::warn!("{}: {w}", args.domain.display());
    }
    let program = parse_program(&program_text, &domain.signature)
        .with_context(|| args.program.display().to_string())
        .map_err(input)?;
    let query = match (&args.query, &program.query) {
        (Some(q), _) => parse_query(q, &domain.signature).context("--query").map_err(input)?,
        (None, Some(q)) => q.clone(),
        (None, None) => return Err(input(anyhow!("no --query and no `:- Goal.` directive in the program"))),
    };
    let mut env = make_env(&args.env, &domain, &args.world).map_err(input)?;
    let config = Config { step_limit: args.steps, trace: args.trace, debug_checks: args.debug_checks, journal: false };
    let run = Interpreter::new(&domain, &program, config).solve(&query, env.as_mut());

    for line in &run.trace {
        println!("{line}");
    }
    let code = match &run.outcome {
        Outcome::Success(bindings) => {
            println!("outcome: success");
            if bindings.is_empty() {
                println!("answer: true");
            }
            for (name, value) in bindings {
                println!("answer: {name} = {value}");
            }
            0
        }
        Outcome::Failure => {
            println!("outcome: failure");
            EXIT_FAILURE
        }
        Outcome::Error(e) => {
            println!("outcome: error: {e}");
            EXIT_RUNTIME
        }
    };
    let history: Vec<String> = run.state.history.iter().map(Term::to_string).collect();
    let sigma: Vec<String> = run.state.sigma.iter().map(|(s, r)| format!("{s}={r}")).collect();
    println!("history: [{}]", history.join(", "));
    println!("sensing: [{}]", sigma.join(", "));
    println!("belief: {} clauses (max {})", run.state.belief.len(), run.state.max_belief_len);
    if let Outcome::Error(e) = &run.outcome {
        eprintln!("error: {e}");
    }
    Ok(code)
}

fn cmd_gen(args: GenArgs) -> Result<u8, Exit> {
    let cfg = world_config(args.size, &args.world).map_err(input)?;
    let world = WumpusWorld::generate(&cfg).map_err(input)?;
    write_out(args.out.as_deref(), &emit_domain(&world, args.variant))?;
    if let Some(p) = &args.program_out {
        write_out(Some(p), &agent_program(args.variant))?;
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Exit> {
    let config = Config { step_limit: args.steps, ..Config::default() };
    let rows = bench(&args.sizes, args.variant, &args.seeds, &config).map_err(|e| input(anyhow!(e)))?;
    write_out(args.out.as_deref(), &to_csv(&rows))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::GenWumpus(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
