//! Wumpus grid worlds: generation, the simulated environment, domain
//! emission for the two ground encodings, and the reference agent.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::{EnvError, Environment};
use crate::term::Term;

pub const MIN_SIZE: usize = 2;
pub const MAX_SIZE: usize = 32;
const MAX_REROLLS: usize = 100_000;

pub type Cell = (i64, i64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WumpusError {
    #[error("grid size {0} out of range {MIN_SIZE}..={MAX_SIZE}")]
    Size(usize),
    #[error("{threats} threats do not fit a {size}x{size} grid")]
    Threats { size: usize, threats: usize },
    #[error("gold cell {0:?} is off the grid or the start cell")]
    Gold(Cell),
    #[error("no solvable world after {0} attempts")]
    Unsolvable(usize),
    #[error("bad config: {0}")]
    Config(String),
}

/// How cell adjacency reaches the agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Adjacency as aux facts.
    Ground2,
    /// Adjacency as `conn/2` fluents in the initial state.
    Ground3,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Variant, String> {
        match s {
            "ground2" => Ok(Variant::Ground2),
            "ground3" => Ok(Variant::Ground3),
            _ => Err(format!("unknown variant {s} (expected ground2 or ground3)")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Ground2 => "ground2",
            Variant::Ground3 => "ground3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WumpusConfig {
    pub size: usize,
    /// Defaults to one threat per ten cells, at least one.
    pub threats: Option<usize>,
    /// Random when unset.
    pub gold: Option<Cell>,
    pub seed: u64,
    /// Re-roll until the cautious strategy can reach the gold.
    pub solvable: bool,
}

impl WumpusConfig {
    pub fn new(size: usize, seed: u64) -> WumpusConfig {
        WumpusConfig { size, threats: None, gold: None, seed, solvable: true }
    }

    pub fn threat_count(&self) -> usize {
        self.threats.unwrap_or((self.size * self.size / 10).max(1))
    }

    /// `key = value` lines: size, threats, gold (as `x,y`), seed, solvable.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<WumpusConfig, WumpusError> {
        let bad = |m: String| WumpusError::Config(m);
        let mut cfg = WumpusConfig::new(0, 0);
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line}")))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("{k}: not a number: {v}")));
            match k {
                "size" => cfg.size = num(v)? as usize,
                "threats" => cfg.threats = Some(num(v)? as usize),
                "seed" => cfg.seed = num(v)?,
                "solvable" => cfg.solvable = v.parse().map_err(|_| bad(format!("solvable: {v}")))?,
                "gold" => cfg.gold = Some(parse_cell(v).ok_or_else(|| bad(format!("gold: expected x,y, got {v}")))?),
                _ => return Err(bad(format!("unknown key {k}"))),
            }
        }
        if cfg.size == 0 {
            return Err(bad("size is required".into()));
        }
        Ok(cfg)
    }
}

pub fn parse_cell(s: &str) -> Option<Cell> {
    let (x, y) = s.split_once(',')?;
    Some((x.trim().parse().ok()?, y.trim().parse().ok()?))
}

pub const START: Cell = (1, 1);

pub fn cell_term((x, y): Cell) -> Term {
    Term::app("c", vec![Term::Int(x), Term::Int(y)])
}

pub fn term_cell(t: &Term) -> Option<Cell> {
    match (t.functor(), t.args()) {
        (Some(("c", 2)), [Term::Int(x), Term::Int(y)]) => Some((*x, *y)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WumpusWorld {
    pub size: usize,
    pub threats: BTreeSet<Cell>,
    pub gold: Cell,
}

impl WumpusWorld {
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let n = self.size as i64;
        (1..=n).flat_map(move |x| (1..=n).map(move |y| (x, y)))
    }

    pub fn on_grid(&self, (x, y): Cell) -> bool {
        let n = self.size as i64;
        (1..=n).contains(&x) && (1..=n).contains(&y)
    }

    /// 4-neighbourhood, in a fixed order.
    pub fn neighbours(&self, (x, y): Cell) -> Vec<Cell> {
        [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)].into_iter().filter(|c| self.on_grid(*c)).collect()
    }

    pub fn smell(&self, c: Cell) -> bool {
        self.neighbours(c).iter().any(|n| self.threats.contains(n))
    }

    /// Can an agent that only enters cells proven threat-free reach the
    /// gold? Cells become proven once a smell-free cell next to them has
    /// been visited.
    pub fn solvable(&self) -> bool {
        if self.threats.contains(&START) || self.threats.contains(&self.gold) {
            return false;
        }
        let mut seen = BTreeSet::from([START]);
        let mut queue = VecDeque::from([START]);
        while let Some(c) = queue.pop_front() {
            if c == self.gold {
                return true;
            }
            if self.smell(c) {
                continue;
            }
            for n in self.neighbours(c) {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        false
    }

    pub fn generate(cfg: &WumpusConfig) -> Result<WumpusWorld, WumpusError> {
        if !(MIN_SIZE..=MAX_SIZE).contains(&cfg.size) {
            return Err(WumpusError::Size(cfg.size));
        }
        let n = cfg.size as i64;
        let threats = cfg.threat_count();
        let free = cfg.size * cfg.size - 1 - usize::from(cfg.gold.is_some());
        if threats > free {
            return Err(WumpusError::Threats { size: cfg.size, threats });
        }
        if let Some(g) = cfg.gold {
            if g == START || !(1..=n).contains(&g.0) || !(1..=n).contains(&g.1) {
                return Err(WumpusError::Gold(g));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let all: Vec<Cell> = (1..=n).flat_map(|x| (1..=n).map(move |y| (x, y))).filter(|c| *c != START).collect();
        for _ in 0..MAX_REROLLS {
            let gold = match cfg.gold {
                Some(g) => g,
                None => *all.choose(&mut rng).expect("grid has a non-start cell"),
            };
            let pool: Vec<Cell> = all.iter().copied().filter(|c| *c != gold).collect();
            let chosen = pool.choose_multiple(&mut rng, threats).copied().collect();
            let world = WumpusWorld { size: cfg.size, threats: chosen, gold };
            if !cfg.solvable || world.solvable() {
                return Ok(world);
            }
        }
        Err(WumpusError::Unsolvable(MAX_REROLLS))
    }
}

/// Ground truth for a running agent.
#[derive(Clone, Debug)]
pub struct WumpusEnv {
    world: WumpusWorld,
    agent: Cell,
    dead: bool,
    has_gold: bool,
    log: Vec<Term>,
}

impl WumpusEnv {
    pub fn new(world: WumpusWorld) -> WumpusEnv {
        WumpusEnv { world, agent: START, dead: false, has_gold: false, log: Vec::new() }
    }

    pub fn world(&self) -> &WumpusWorld {
        &self.world
    }

    pub fn agent(&self) -> Cell {
        self.agent
    }

    pub fn dead(&self) -> bool {
        self.dead
    }

    pub fn has_gold(&self) -> bool {
        self.has_gold
    }
}

impl Environment for WumpusEnv {
    fn execute(&mut self, action: &Term) -> Result<(), EnvError> {
        let reject = |reason: &str| Err(EnvError::Rejected { action: action.to_string(), reason: reason.into() });
        if self.dead {
            return reject("the agent is dead");
        }
        match (action.functor(), action.args()) {
            (Some(("go", 1)), [c]) => {
                let Some(c) = term_cell(c) else { return reject("not a cell") };
                if !self.world.neighbours(self.agent).contains(&c) {
                    return reject("not adjacent to the agent");
                }
                self.agent = c;
                self.dead = self.world.threats.contains(&c);
            }
            (Some(("grab", 0)), []) => {
                if self.agent != self.world.gold {
                    return reject("no gold here");
                }
                self.has_gold = true;
            }
            _ => return reject("unknown action"),
        }
        self.log.push(action.clone());
        Ok(())
    }

    fn sense(&mut self, sensor: &str) -> Result<Term, EnvError> {
        let fail = |reason: &str| Err(EnvError::Sense { sensor: sensor.into(), reason: reason.into() });
        if self.dead {
            return fail("the agent is dead");
        }
        match sensor {
            "perceiveSmell" => Ok(Term::atom(if self.world.smell(self.agent) { "true" } else { "false" })),
            _ => fail("unknown sensor"),
        }
    }

    fn snapshot(&self) -> String {
        let threats: Vec<String> = self.world.threats.iter().map(|c| cell_term(*c).to_string()).collect();
        format!(
            "wumpus {n}x{n} agent={} gold={} threats=[{}] dead={} has_gold={}",
            cell_term(self.agent),
            cell_term(self.world.gold),
            threats.join(","),
            self.dead,
            self.has_gold,
            n = self.world.size
        )
    }

    fn received(&self) -> &[Term] {
        &self.log
    }
}

/// Domain text for `world`. The agent knows its start cell, that it is in
/// no other cell, where the gold is, and that the start cell is safe.
pub fn emit_domain(world: &WumpusWorld, variant: Variant) -> String {
    let mut out = String::new();
    let n = world.size;
    let cells: Vec<Cell> = world.cells().collect();
    let c = |cell: Cell| cell_term(cell).to_string();
    let _ = writeln!(out, "% Wumpus world {n}x{n}, {variant}.");
    match variant {
        Variant::Ground2 => {
            let _ = writeln!(out, "fluents([at/2, threatAt/1, visited/1, hasGold/0]).");
            let _ = writeln!(out, "aux([adj/2]).");
        }
        Variant::Ground3 => {
            let _ = writeln!(out, "fluents([at/2, threatAt/1, visited/1, hasGold/0, conn/2]).");
        }
    }
    let _ = writeln!(out, "actions([go/1, grab/0]).");
    let _ = writeln!(out, "sensors([perceiveSmell/1]).");
    let names: Vec<String> = cells.iter().map(|x| c(*x)).collect();
    let _ = writeln!(out, "objects(cell, [{}]).\n", names.join(", "));

    let mut init = vec![format!("at(agent,{})", c(START))];
    init.extend(cells.iter().filter(|x| **x != START).map(|x| format!("-at(agent,{})", c(*x))));
    init.push(format!("at(gold,{})", c(world.gold)));
    init.push(format!("-threatAt({})", c(START)));
    init.push(format!("visited({})", c(START)));
    if variant == Variant::Ground3 {
        for x in &cells {
            init.extend(world.neighbours(*x).into_iter().map(|y| format!("conn({},{})", c(*x), c(y))));
        }
    }
    let _ = writeln!(out, "initial_state([\n    {}\n]).\n", init.join(",\n    "));

    let link = match variant {
        Variant::Ground2 => "adj",
        Variant::Ground3 => "conn",
    };
    let _ = writeln!(out, "action(go(Y), [at(agent,X), {link}(X,Y)], [[] - [at(agent,Y), -at(agent,X), visited(Y)]]).");
    let _ = writeln!(out, "action(grab, [at(agent,X), at(gold,X)], [[] - [hasGold]]).\n");

    let mut triples = Vec::new();
    for x in &cells {
        let ns: Vec<Cell> = world.neighbours(*x);
        let pos: Vec<String> = ns.iter().map(|y| format!("threatAt({})", c(*y))).collect();
        let neg: Vec<String> = ns.iter().map(|y| format!("-threatAt({})", c(*y))).collect();
        triples.push(format!("X-true-[at(agent,{})]-[[{}]]", c(*x), pos.join(",")));
        triples.push(format!("X-false-[at(agent,{})]-[{}]", c(*x), neg.join(",")));
    }
    let _ = writeln!(out, "sensor_axiom(perceiveSmell(X), [\n    {}\n]).", triples.join(",\n    "));

    if variant == Variant::Ground2 {
        out.push('\n');
        for x in &cells {
            for y in world.neighbours(*x) {
                let _ = writeln!(out, "adj({},{}).", c(*x), c(y));
            }
        }
    }
    out
}

pub fn emit_wumpus_domain(cfg: &WumpusConfig, variant: Variant) -> Result<String, WumpusError> {
    Ok(emit_domain(&WumpusWorld::generate(cfg)?, variant))
}

/// The cautious strategy: enter only cells proven free of threats, depth
/// first, walking back along the way it came when stuck.
pub fn agent_program(variant: Variant) -> String {
    let link = match variant {
        Variant::Ground2 => "adj(X,Y)",
        Variant::Ground3 => "?(conn(X,Y))",
    };
    format!(
        "\
hunt :- ?(perceiveSmell(_)), !, explore([]).

explore(_) :-
    ?(at(agent,X)), ?(at(gold,X)), !,
    do(grab), !.
explore(Backtrack) :-
    ?(at(agent,X)),
    {link},
    ?(-threatAt(Y)),
    unvisited(Y),
    do(go(Y)), !,
    ?(perceiveSmell(_)), !,
    explore([X|Backtrack]).
explore([X|Backtrack]) :-
    do(go(X)), !,
    explore(Backtrack).

unvisited(Y) :- ?(visited(Y)), !, fail.
unvisited(_).
"
    )
}

pub const AGENT_QUERY: &str = "hunt";
