//! Running the reference agent on generated worlds and tabulating results.

use std::fmt;
use std::time::Instant;

use crate::interp::{Config, Interpreter, Outcome};
use crate::parser::{parse_domain, parse_program, parse_query};
use crate::wumpus::{agent_program, emit_domain, Variant, WumpusConfig, WumpusEnv, WumpusWorld, AGENT_QUERY};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    Failure,
    Error,
    /// The agent entered a threat cell.
    Dead,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Success => "success",
            RunStatus::Failure => "failure",
            RunStatus::Error => "error",
            RunStatus::Dead => "dead",
        })
    }
}

#[derive(Clone, Debug)]
pub struct AgentRun {
    pub status: RunStatus,
    pub actions: usize,
    pub max_state_clauses: usize,
    pub total_ms: f64,
    /// Wall time divided by executed actions.
    pub mean_action_ms: f64,
    pub has_gold: bool,
    pub message: Option<String>,
}

impl AgentRun {
    fn failed(message: String) -> AgentRun {
        AgentRun {
            status: RunStatus::Error,
            actions: 0,
            max_state_clauses: 0,
            total_ms: 0.0,
            mean_action_ms: 0.0,
            has_gold: false,
            message: Some(message),
        }
    }
}

/// Run the cautious agent on `world`; only `solve` is timed.
pub fn run_reference_agent(world: &WumpusWorld, variant: Variant, config: Config) -> AgentRun {
    let domain = match parse_domain(&emit_domain(world, variant)) {
        Ok(d) => d,
        Err(e) => return AgentRun::failed(format!("domain: {e}")),
    };
    let (program, query) = match (
        parse_program(&agent_program(variant), &domain.signature),
        parse_query(AGENT_QUERY, &domain.signature),
    ) {
        (Ok(p), Ok(q)) => (p, q),
        (Err(e), _) | (_, Err(e)) => return AgentRun::failed(format!("program: {e}")),
    };
    let interp = Interpreter::new(&domain, &program, config);
    let mut env = WumpusEnv::new(world.clone());
    let start = Instant::now();
    let run = interp.solve(&query, &mut env);
    let total_ms = start.elapsed().as_secs_f64() * 1000.0;
    let actions = run.state.history.len();
    let (status, message) = match (&run.outcome, env.dead()) {
        (_, true) => (RunStatus::Dead, None),
        (Outcome::Success(_), _) => (RunStatus::Success, None),
        (Outcome::Failure, _) => (RunStatus::Failure, None),
        (Outcome::Error(e), _) => (RunStatus::Error, Some(e.to_string())),
    };
    AgentRun {
        status,
        actions,
        max_state_clauses: run.state.max_belief_len,
        total_ms,
        mean_action_ms: if actions == 0 { 0.0 } else { total_ms / actions as f64 },
        has_gold: env.has_gold(),
        message,
    }
}

pub const CSV_TIMING_COMMENT: &str = "# timing=monotonic-wall-clock-ms";
pub const CSV_HEADER: &str = "size,variant,seed,status,actions,max_state_clauses,total_ms,mean_action_ms";

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub size: usize,
    pub variant: Variant,
    pub seed: u64,
    pub run: AgentRun,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{:.3}",
            self.size,
            self.variant,
            self.seed,
            self.run.status,
            self.run.actions,
            self.run.max_state_clauses,
            self.run.total_ms,
            self.run.mean_action_ms
        )
    }
}

/// One row per (size, seed) on a solvable generated world.
pub fn bench(sizes: &[usize], variant: Variant, seeds: &[u64], config: &Config) -> Result<Vec<BenchRow>, String> {
    if sizes.is_empty() {
        return Err("no sizes given".into());
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    let mut rows = Vec::new();
    for &size in sizes {
        for &seed in seeds {
            let run = match WumpusWorld::generate(&WumpusConfig::new(size, seed)) {
                Ok(world) => run_reference_agent(&world, variant, config.clone()),
                Err(e) => AgentRun::failed(e.to_string()),
            };
            rows.push(BenchRow { size, variant, seed, run });
        }
    }
    Ok(rows)
}

/// CSV text: timing comment, header, rows.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{CSV_TIMING_COMMENT}\n{CSV_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}
