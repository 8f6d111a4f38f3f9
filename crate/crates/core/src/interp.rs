//! SLD resolution over agent logic programs, executing `do` and `?` atoms
//! online against an environment.

use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use log::warn;
use thiserror::Error;

use crate::domain::{BodyLiteral, DomainFile, Program, ProgramClause, Query, StateProperty};
use crate::env::{EnvError, Environment};
use crate::parser::{classify_query, QueryKind};
use crate::pi::{
    applicable_cases_with_bindings, entails_property, integrate_sensing, is_prime, update, AuxSolver, EngineError,
    PiList,
};
use crate::term::{unify, Literal, Substitution, Sym, Term, Var};

pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct Config {
    /// Resolution steps before the run is aborted.
    pub step_limit: u64,
    pub trace: bool,
    /// Assert primeness of the belief after every update.
    pub debug_checks: bool,
    /// Record belief snapshots for every execution, observation and
    /// entailed query.
    pub journal: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { step_limit: DEFAULT_STEP_LIMIT, trace: false, debug_checks: false, journal: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("backtracked across executed action")]
    BacktrackedAcrossAction,
    #[error("unbound action argument in {0}")]
    UnboundActionArgument(String),
    #[error("sense variable must be free in ?({0})")]
    SenseVariableNotFree(String),
    #[error("environment rejected action {action}: {reason}")]
    EnvironmentRejected { action: String, reason: String },
    #[error("sensing failed: {0}")]
    Sensing(String),
    #[error("no sensor axiom for {0}")]
    NoSensorAxiom(String),
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("unknown procedure {0}")]
    UnknownProcedure(String),
    #[error("instantiation error in {0}")]
    Instantiation(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("step budget of {0} resolution steps exceeded")]
    StepLimit(u64),
    #[error("debug check failed: {0}")]
    DebugCheck(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// An execution event, in the order it happened.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Exec(Term),
    Sense(Sym, Term),
}

#[derive(Clone, Debug)]
pub enum JournalEntry {
    Exec {
        action: Term,
        belief: PiList,
    },
    Sense {
        sensor: Sym,
        result: Term,
        belief: PiList,
    },
    /// A `?` property reported entailed, instantiated by the answer.
    Entailed {
        property: StateProperty,
        belief: PiList,
    },
}

#[derive(Clone, Debug)]
pub struct AgentState {
    pub belief: PiList,
    pub history: Vec<Term>,
    pub sigma: Vec<(Sym, Term)>,
    pub events: Vec<Event>,
    /// Number of execution events so far.
    pub barrier: u64,
    pub max_belief_len: usize,
    pub journal: Vec<JournalEntry>,
}

impl AgentState {
    pub fn new(belief: PiList) -> AgentState {
        let max_belief_len = belief.len();
        AgentState {
            belief,
            history: Vec::new(),
            sigma: Vec::new(),
            events: Vec::new(),
            barrier: 0,
            max_belief_len,
            journal: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Bindings of the named query variables.
    Success(Vec<(Sym, Term)>),
    Failure,
    Error(RuntimeError),
}

#[derive(Clone, Debug)]
pub struct Run {
    pub outcome: Outcome,
    pub state: AgentState,
    pub trace: Vec<String>,
    pub steps: u64,
}

struct StoredClause {
    head: Term,
    body: Vec<BodyLiteral>,
    nvars: u32,
}

struct Pred {
    clauses: Vec<StoredClause>,
    all: Rc<[usize]>,
    /// Candidates for a call whose first argument is a given ground term.
    by_first: HashMap<Term, Rc<[usize]>>,
    /// Candidates for a ground first argument not in `by_first`.
    open_first: Rc<[usize]>,
}

/// Clauses grouped by predicate, with first-argument indexing.
pub struct Database {
    preds: HashMap<(Sym, usize), Pred>,
}

impl Database {
    pub fn new<'c>(clauses: impl IntoIterator<Item = &'c ProgramClause>) -> Database {
        let mut grouped: HashMap<(Sym, usize), Vec<StoredClause>> = HashMap::new();
        for c in clauses {
            grouped.entry(c.functor()).or_default().push(StoredClause {
                head: c.head.clone(),
                body: c.body.clone(),
                nvars: c.var_count(),
            });
        }
        let preds = grouped
            .into_iter()
            .map(|(key, clauses)| {
                let mut keyed: HashMap<Term, Vec<usize>> = HashMap::new();
                let mut open = Vec::new();
                for (i, c) in clauses.iter().enumerate() {
                    match c.head.args().first() {
                        Some(a) if a.is_ground() => keyed.entry(a.clone()).or_default().push(i),
                        _ => open.push(i),
                    }
                }
                let by_first = keyed
                    .into_iter()
                    .map(|(k, mut v)| {
                        v.extend(&open);
                        v.sort_unstable();
                        (k, Rc::from(v))
                    })
                    .collect();
                let all: Rc<[usize]> = (0..clauses.len()).collect();
                (key, Pred { clauses, all, by_first, open_first: Rc::from(open) })
            })
            .collect();
        Database { preds }
    }

    fn pred(&self, name: &str, arity: usize) -> Option<&Pred> {
        self.preds.get(&(Arc::from(name), arity))
    }
}

/// The domain's auxiliary program, answering aux atoms for the entailment
/// engine by running all solutions of a nested resolution.
pub struct AuxProgram {
    db: Database,
    step_limit: u64,
}

impl AuxProgram {
    pub fn new(domain: &DomainFile) -> AuxProgram {
        AuxProgram { db: Database::new(&domain.aux_program), step_limit: DEFAULT_STEP_LIMIT }
    }
}

const FOREIGN_VAR_BASE: u32 = 1 << 30;

impl AuxSolver for AuxProgram {
    fn solve(&self, goal: &Term) -> Result<Vec<Substitution>, EngineError> {
        let vars = goal.vars();
        let local = goal.map_vars(&mut |v| Term::Var(Var(vars.iter().position(|w| *w == v).unwrap() as u32)));
        let mut m = Machine::new(&self.db, self.step_limit, false);
        m.bindings.resize(vars.len(), None);
        let start = m.frame(Goal::Lit(BodyLiteral::Call(local)), 0, None);
        let mut out = Vec::new();
        let mut next = Some(start);
        loop {
            match m.run(next.take(), &mut None) {
                Ok(true) => {
                    let s: Substitution = vars
                        .iter()
                        .enumerate()
                        .map(|(i, v)| {
                            let val = m.resolve(&Term::Var(Var(i as u32))).map_vars(&mut |w| {
                                Term::Var(if (w.0 as usize) < vars.len() {
                                    vars[w.0 as usize]
                                } else {
                                    Var(FOREIGN_VAR_BASE + w.0)
                                })
                            });
                            (*v, val)
                        })
                        .collect();
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
                Ok(false) => return Ok(out),
                Err(e) => return Err(EngineError::Aux(format!("{goal}: {e}"))),
            }
        }
    }
}

enum Goal {
    Lit(BodyLiteral),
    /// Trace marker: the call has succeeded.
    Exit(Term),
}

struct Frame {
    goal: Goal,
    /// Choice-point height a cut in this goal truncates to.
    cut_to: usize,
    next: Cont,
}

type Cont = Option<Rc<Frame>>;

enum Alt<'a> {
    Clauses {
        goal: Term,
        pred: &'a Pred,
        cands: Rc<[usize]>,
        next: usize,
        cont: Cont,
    },
    Answers {
        goal: Term,
        answers: Vec<Substitution>,
        cont: Cont,
    },
    /// Remaining alternatives of an executed action; never resumable.
    Spent,
}

struct ChoicePoint<'a> {
    alt: Alt<'a>,
    trail_len: usize,
    var_top: usize,
    barrier: u64,
}

struct Agent<'e> {
    domain: &'e DomainFile,
    aux: &'e AuxProgram,
    env: &'e mut dyn Environment,
    state: AgentState,
    config: &'e Config,
}

struct Machine<'a> {
    db: &'a Database,
    bindings: Vec<Option<Term>>,
    trail: Vec<u32>,
    cps: Vec<ChoicePoint<'a>>,
    steps: u64,
    step_limit: u64,
    barrier: u64,
    trace: Option<Vec<String>>,
}

impl<'a> Machine<'a> {
    fn new(db: &'a Database, step_limit: u64, trace: bool) -> Machine<'a> {
        Machine {
            db,
            bindings: Vec::new(),
            trail: Vec::new(),
            cps: Vec::new(),
            steps: 0,
            step_limit,
            barrier: 0,
            trace: trace.then(Vec::new),
        }
    }

    fn frame(&self, goal: Goal, cut_to: usize, next: Cont) -> Rc<Frame> {
        Rc::new(Frame { goal, cut_to, next })
    }

    fn emit(&mut self, port: &str, t: &Term) {
        if self.trace.is_none() {
            return;
        }
        let line = format!("{port} {}", self.resolve(t));
        if let Some(trace) = &mut self.trace {
            trace.push(line);
        }
    }

    fn emit_line(&mut self, line: impl FnOnce() -> String) {
        if let Some(t) = self.trace.as_mut() {
            t.push(line());
        }
    }

    fn deref(&self, t: &Term) -> Term {
        let mut t = t;
        while let Term::Var(v) = t {
            match &self.bindings[v.0 as usize] {
                Some(b) => t = b,
                None => break,
            }
        }
        t.clone()
    }

    fn walk(&self, t: &Term) -> Option<Term> {
        match t {
            Term::Var(v) => self.bindings[v.0 as usize].as_ref().map(|b| self.walk(b).unwrap_or_else(|| b.clone())),
            Term::Int(_) => None,
            Term::App(f, args) => {
                let mut out: Option<Vec<Term>> = None;
                for (i, a) in args.iter().enumerate() {
                    match (self.walk(a), out.as_mut()) {
                        (Some(n), Some(o)) => o.push(n),
                        (Some(n), None) => {
                            let mut o = args[..i].to_vec();
                            o.push(n);
                            out = Some(o);
                        }
                        (None, Some(o)) => o.push(a.clone()),
                        (None, None) => {}
                    }
                }
                out.map(|o| Term::App(f.clone(), o.into()))
            }
        }
    }

    /// `t` with every bound variable replaced by its value.
    fn resolve(&self, t: &Term) -> Term {
        self.walk(t).unwrap_or_else(|| t.clone())
    }

    fn bind(&mut self, v: Var, t: Term) {
        if self.cps.last().is_some_and(|cp| (v.0 as usize) < cp.var_top) {
            self.trail.push(v.0);
        }
        self.bindings[v.0 as usize] = Some(t);
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.deref(a);
        let b = self.deref(b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), Term::Var(y)) => {
                if x < y {
                    self.bind(*y, a.clone())
                } else {
                    self.bind(*x, b.clone())
                }
                true
            }
            (Term::Var(x), _) => {
                self.bind(*x, b.clone());
                true
            }
            (_, Term::Var(y)) => {
                self.bind(*y, a.clone());
                true
            }
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::App(f, xs), Term::App(g, ys)) => {
                if Arc::ptr_eq(xs, ys) {
                    return true;
                }
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    /// Unify a clause-local term, whose variables are shifted by `off`,
    /// with a machine term.
    fn unify_head(&mut self, p: &Term, off: u32, t: &Term) -> bool {
        match p {
            Term::Var(v) => self.unify(&Term::Var(Var(v.0 + off)), t),
            Term::Int(i) => match self.deref(t) {
                Term::Var(x) => {
                    self.bind(x, p.clone());
                    true
                }
                Term::Int(j) => *i == j,
                _ => false,
            },
            Term::App(f, ps) => match self.deref(t) {
                Term::Var(x) => {
                    self.bind(x, p.offset_vars(off));
                    true
                }
                Term::App(g, ts) => {
                    *f == g && ps.len() == ts.len() && ps.iter().zip(ts.iter()).all(|(p, t)| self.unify_head(p, off, t))
                }
                _ => false,
            },
        }
    }

    fn undo_to(&mut self, trail_len: usize, var_top: usize) {
        while self.trail.len() > trail_len {
            let v = self.trail.pop().unwrap();
            self.bindings[v as usize] = None;
        }
        self.bindings.truncate(var_top);
    }

    fn push_cp(&mut self, alt: Alt<'a>, barrier: u64) {
        let cp = ChoicePoint { alt, trail_len: self.trail.len(), var_top: self.bindings.len(), barrier };
        self.cps.push(cp);
    }

    fn cut(&mut self, to: usize) {
        self.cps.truncate(to);
        if self.cps.is_empty() {
            self.trail.clear();
        }
    }

    /// Run until the continuation is exhausted (success) or no choice point
    /// is left (failure). `start == None` resumes by backtracking.
    fn run(&mut self, start: Option<Rc<Frame>>, agent: &mut Option<&mut Agent<'_>>) -> Result<bool, RuntimeError> {
        let mut cont = match start {
            Some(f) => Some(f),
            None => match self.backtrack()? {
                Some(c) => c,
                None => return Ok(false),
            },
        };
        loop {
            let Some(frame) = cont else { return Ok(true) };
            self.steps += 1;
            if self.steps > self.step_limit {
                return Err(RuntimeError::StepLimit(self.step_limit));
            }
            let next = frame.next.clone();
            let stepped = match &frame.goal {
                Goal::Exit(t) => {
                    self.emit("EXIT", t);
                    Some(next)
                }
                Goal::Lit(BodyLiteral::Cut) => {
                    self.cut(frame.cut_to);
                    Some(next)
                }
                Goal::Lit(BodyLiteral::Call(t)) => self.call(t, next)?,
                Goal::Lit(BodyLiteral::Do(a)) => match agent.as_deref_mut() {
                    Some(ag) => self.exec_do(a, next, ag)?,
                    None => return Err(RuntimeError::InvalidQuery("do/1 outside an agent run".into())),
                },
                Goal::Lit(BodyLiteral::Query(p)) => match agent.as_deref_mut() {
                    Some(ag) => self.exec_query(p, next, ag)?,
                    None => return Err(RuntimeError::InvalidQuery("?/1 outside an agent run".into())),
                },
            };
            cont = match stepped {
                Some(c) => c,
                None => match self.backtrack()? {
                    Some(c) => c,
                    None => return Ok(false),
                },
            };
        }
    }

    /// Resume the newest choice point. `Ok(None)` when none is left.
    fn backtrack(&mut self) -> Result<Option<Cont>, RuntimeError> {
        loop {
            let Some(cp) = self.cps.last() else { return Ok(None) };
            if cp.barrier < self.barrier {
                return Err(RuntimeError::BacktrackedAcrossAction);
            }
            let (trail_len, var_top) = (cp.trail_len, cp.var_top);
            self.undo_to(trail_len, var_top);
            let height = self.cps.len() - 1;
            let cp = self.cps.last_mut().unwrap();
            match &mut cp.alt {
                Alt::Clauses { goal, pred, cands, next, cont } => {
                    let i = cands[*next];
                    let (goal, pred, cont) = (goal.clone(), *pred, cont.clone());
                    *next += 1;
                    if *next == cands.len() {
                        self.cps.pop();
                    }
                    self.emit("REDO", &goal);
                    if let Some(c) = self.enter_clause(&goal, &pred.clauses[i], cont, height) {
                        return Ok(Some(c));
                    }
                }
                Alt::Answers { goal, answers, cont } => {
                    let ans = answers.pop().expect("answer choice points are never empty");
                    let (goal, cont) = (goal.clone(), cont.clone());
                    if answers.is_empty() {
                        self.cps.pop();
                    }
                    self.emit("REDO", &goal);
                    if self.apply_answer(&ans) {
                        return Ok(Some(cont));
                    }
                }
                Alt::Spent => {
                    self.cps.pop();
                }
            }
        }
    }

    fn apply_answer(&mut self, ans: &Substitution) -> bool {
        ans.iter().all(|(v, t)| self.unify(&Term::Var(*v), t))
    }

    /// Unify `goal` with a renamed clause head and push its body.
    fn enter_clause(&mut self, goal: &Term, clause: &StoredClause, cont: Cont, cut_to: usize) -> Option<Cont> {
        let off = self.bindings.len() as u32;
        self.bindings.resize(self.bindings.len() + clause.nvars as usize, None);
        if !self.unify_head(&clause.head, off, goal) {
            return None;
        }
        let mut next = cont;
        if self.trace.is_some() {
            next = Some(self.frame(Goal::Exit(goal.clone()), cut_to, next));
        }
        for lit in clause.body.iter().rev() {
            let lit = if off == 0 { lit.clone() } else { lit.map_vars(&mut |v| Term::Var(Var(v.0 + off))) };
            next = Some(self.frame(Goal::Lit(lit), cut_to, next));
        }
        Some(next)
    }

    fn call(&mut self, t: &Term, next: Cont) -> Result<Option<Cont>, RuntimeError> {
        let goal = self.deref(t);
        let (name, arity) = match &goal {
            Term::Var(_) => return Err(RuntimeError::Instantiation("call of an unbound goal".into())),
            Term::Int(i) => return Err(RuntimeError::Type(format!("{i} is not callable"))),
            Term::App(f, args) => (f.clone(), args.len()),
        };
        self.emit("CALL", &goal);
        if crate::domain::is_builtin(&name, arity) {
            let ok = self.builtin(&name, goal.args())?;
            self.emit(if ok { "EXIT" } else { "FAIL" }, &goal);
            return Ok(ok.then_some(next));
        }
        let Some(pred) = self.db.pred(&name, arity) else {
            return Err(RuntimeError::UnknownProcedure(format!("{name}/{arity}")));
        };
        let cands = match goal.args().first().map(|a| self.resolve(a)) {
            Some(k) if k.is_ground() => pred.by_first.get(&k).cloned().unwrap_or_else(|| pred.open_first.clone()),
            _ => pred.all.clone(),
        };
        if cands.is_empty() {
            self.emit("FAIL", &goal);
            return Ok(None);
        }
        let height = self.cps.len();
        if cands.len() > 1 {
            let alt = Alt::Clauses { goal: goal.clone(), pred, cands: cands.clone(), next: 1, cont: next.clone() };
            self.push_cp(alt, self.barrier);
        }
        let entered = self.enter_clause(&goal, &pred.clauses[cands[0]], next, height);
        if entered.is_none() && cands.len() == 1 {
            self.emit("FAIL", &goal);
        }
        Ok(entered)
    }

    fn eval(&self, t: &Term) -> Result<i64, RuntimeError> {
        let t = self.deref(t);
        let overflow = || RuntimeError::Type(format!("integer overflow in {}", self.resolve(&t)));
        match &t {
            Term::Int(i) => Ok(*i),
            Term::Var(_) => Err(RuntimeError::Instantiation("arithmetic on an unbound variable".into())),
            Term::App(f, args) => match (&**f, args.len()) {
                ("-", 1) => self.eval(&args[0])?.checked_neg().ok_or_else(overflow),
                ("abs", 1) => self.eval(&args[0])?.checked_abs().ok_or_else(overflow),
                (op, 2) => {
                    let (x, y) = (self.eval(&args[0])?, self.eval(&args[1])?);
                    let r = match op {
                        "+" => x.checked_add(y),
                        "-" => x.checked_sub(y),
                        "*" => x.checked_mul(y),
                        "//" | "mod" if y == 0 => return Err(RuntimeError::Type("division by zero".into())),
                        "//" => x.checked_div(y),
                        "mod" => x.checked_rem_euclid(y),
                        "min" => Some(x.min(y)),
                        "max" => Some(x.max(y)),
                        _ => return Err(RuntimeError::Type(format!("{op}/2 is not an arithmetic function"))),
                    };
                    r.ok_or_else(overflow)
                }
                _ => Err(RuntimeError::Type(format!("{} is not an arithmetic expression", self.resolve(&t)))),
            },
        }
    }

    fn builtin(&mut self, name: &str, args: &[Term]) -> Result<bool, RuntimeError> {
        Ok(match name {
            "true" => true,
            "fail" => false,
            "=" => self.unify(&args[0], &args[1]),
            "\\=" => unify(&self.resolve(&args[0]), &self.resolve(&args[1])).is_none(),
            "is" => {
                let v = self.eval(&args[1])?;
                self.unify(&args[0], &Term::Int(v))
            }
            "<" => self.eval(&args[0])? < self.eval(&args[1])?,
            ">" => self.eval(&args[0])? > self.eval(&args[1])?,
            "=<" => self.eval(&args[0])? <= self.eval(&args[1])?,
            ">=" => self.eval(&args[0])? >= self.eval(&args[1])?,
            "=:=" => self.eval(&args[0])? == self.eval(&args[1])?,
            "=\\=" => self.eval(&args[0])? != self.eval(&args[1])?,
            "succ" => match (self.deref(&args[0]), self.deref(&args[1])) {
                (Term::Int(x), y) if x >= 0 => self.unify(&y, &Term::Int(x + 1)),
                (x @ Term::Var(_), Term::Int(y)) if y > 0 => self.unify(&x, &Term::Int(y - 1)),
                (Term::Var(_), Term::Var(_)) => return Err(RuntimeError::Instantiation("succ/2".into())),
                _ => false,
            },
            _ => unreachable!("{name} is not a builtin"),
        })
    }

    fn exec_do(&mut self, a: &Term, next: Cont, ag: &mut Agent<'_>) -> Result<Option<Cont>, RuntimeError> {
        let action = self.resolve(a);
        let shown = Term::app("do", vec![action.clone()]);
        self.emit("CALL", &shown);
        let Some(plan) = plan_action(ag.domain, ag.aux, &ag.state.belief, &action)? else {
            self.emit("FAIL", &shown);
            return Ok(None);
        };
        if plan.more {
            self.push_cp(Alt::Spent, self.barrier);
        }
        commit_action(&mut ag.state, ag.env, ag.config, &plan.action, &plan.effects)?;
        self.barrier = ag.state.barrier;
        let bound = self.unify(a, &plan.action);
        debug_assert!(bound);
        let size = ag.state.belief.len();
        self.emit_line(|| format!("EXEC {}", plan.action));
        self.emit_line(|| format!("STATE size={size}"));
        self.emit("EXIT", &shown);
        Ok(Some(next))
    }

    fn exec_query(&mut self, p: &Term, next: Cont, ag: &mut Agent<'_>) -> Result<Option<Cont>, RuntimeError> {
        let phi = self.resolve(p);
        let shown = Term::app("?", vec![phi.clone()]);
        self.emit("CALL", &shown);
        let kind = classify_query(&ag.domain.signature, &phi).map_err(|e| RuntimeError::InvalidQuery(e.to_string()))?;
        match kind {
            QueryKind::Sense { sensor, target } => {
                let Term::Var(x) = target else {
                    return Err(RuntimeError::SenseVariableNotFree(phi.to_string()));
                };
                let result = sense(&mut ag.state, ag.env, ag.domain, ag.aux, ag.config, &sensor)?;
                self.barrier = ag.state.barrier;
                self.bind(x, result.clone());
                let size = ag.state.belief.len();
                self.emit_line(|| format!("SENSE {sensor}={result}"));
                self.emit_line(|| format!("STATE size={size}"));
                self.emit("EXIT", &shown);
                Ok(Some(next))
            }
            QueryKind::Property(prop) => {
                let mut answers = entails_property(&ag.state.belief, &prop, ag.aux)?;
                if ag.config.journal {
                    for ans in &answers {
                        let entry =
                            JournalEntry::Entailed { property: prop.apply(ans), belief: ag.state.belief.clone() };
                        ag.state.journal.push(entry);
                    }
                }
                if answers.is_empty() {
                    self.emit("FAIL", &shown);
                    return Ok(None);
                }
                answers.reverse();
                let first = answers.pop().unwrap();
                if !answers.is_empty() {
                    self.push_cp(Alt::Answers { goal: shown.clone(), answers, cont: next.clone() }, self.barrier);
                }
                if !self.apply_answer(&first) {
                    return Ok(None);
                }
                self.emit("EXIT", &shown);
                Ok(Some(next))
            }
        }
    }
}

/// The grounding chosen for an action, with its effects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionPlan {
    pub action: Term,
    pub effects: Vec<Literal>,
    /// Further precondition answers were left untried.
    pub more: bool,
}

/// Find the first grounding of `action` whose precondition is entailed and
/// which has an applicable case. `Ok(None)` when there is none.
pub fn plan_action(
    domain: &DomainFile,
    aux: &dyn AuxSolver,
    belief: &PiList,
    action: &Term,
) -> Result<Option<ActionPlan>, RuntimeError> {
    let Some((name, arity)) = action.functor() else {
        return Err(RuntimeError::Instantiation(format!("do({action})")));
    };
    let Some(spec) = domain.action_spec(name, arity) else {
        return Err(RuntimeError::UnknownAction(format!("{name}/{arity}")));
    };
    let spec = spec.renamed(action.max_var().map_or(0, |m| m + 1));
    let Some(theta0) = unify(&spec.head, action) else { return Ok(None) };
    let answers = entails_property(belief, &spec.precondition.apply(&theta0), aux)?;
    for (k, ans) in answers.iter().enumerate() {
        let Some(theta) = theta0.compose(ans) else { continue };
        let ground = theta.apply(action);
        if !ground.is_ground() {
            return Err(RuntimeError::UnboundActionArgument(ground.to_string()));
        }
        let cases = applicable_cases_with_bindings(belief, &spec, &theta, aux)?;
        let Some((case, ext)) = cases.into_iter().next() else {
            warn!("no applicable case for {ground}");
            continue;
        };
        let effects: Vec<Literal> = spec.cases[case].effects.iter().map(|l| ext.apply_literal(l)).collect();
        if let Some(l) = effects.iter().find(|l| !l.is_ground()) {
            return Err(RuntimeError::UnboundActionArgument(format!("{ground}: effect {l}")));
        }
        return Ok(Some(ActionPlan { action: ground, effects, more: k + 1 < answers.len() }));
    }
    Ok(None)
}

fn check_prime(config: &Config, belief: &PiList) -> Result<(), RuntimeError> {
    if config.debug_checks && !is_prime(belief.clauses()) {
        return Err(RuntimeError::DebugCheck(format!("belief is not prime: {belief}")));
    }
    Ok(())
}

fn commit_action(
    state: &mut AgentState,
    env: &mut dyn Environment,
    config: &Config,
    action: &Term,
    effects: &[Literal],
) -> Result<(), RuntimeError> {
    env.execute(action).map_err(|e| match e {
        EnvError::Rejected { action, reason } => RuntimeError::EnvironmentRejected { action, reason },
        other => RuntimeError::EnvironmentRejected { action: action.to_string(), reason: other.to_string() },
    })?;
    state.belief = update(&state.belief, effects)?;
    check_prime(config, &state.belief)?;
    state.history.push(action.clone());
    state.events.push(Event::Exec(action.clone()));
    state.barrier += 1;
    state.max_belief_len = state.max_belief_len.max(state.belief.len());
    if config.journal {
        state.journal.push(JournalEntry::Exec { action: action.clone(), belief: state.belief.clone() });
    }
    Ok(())
}

fn sense(
    state: &mut AgentState,
    env: &mut dyn Environment,
    domain: &DomainFile,
    aux: &dyn AuxSolver,
    config: &Config,
    sensor: &Sym,
) -> Result<Term, RuntimeError> {
    let axiom = domain.sensor_axiom(sensor).ok_or_else(|| RuntimeError::NoSensorAxiom(sensor.to_string()))?;
    let observed = env.sense(sensor).map_err(|e| RuntimeError::Sensing(e.to_string()))?;
    let sensed = integrate_sensing(&state.belief, axiom, &observed, aux)?;
    state.belief = sensed.state;
    check_prime(config, &state.belief)?;
    state.sigma.push((sensor.clone(), observed.clone()));
    state.events.push(Event::Sense(sensor.clone(), observed.clone()));
    state.barrier += 1;
    state.max_belief_len = state.max_belief_len.max(state.belief.len());
    if config.journal {
        state.journal.push(JournalEntry::Sense {
            sensor: sensor.clone(),
            result: observed.clone(),
            belief: state.belief.clone(),
        });
    }
    Ok(observed)
}

/// An agent program loaded against its domain.
pub struct Interpreter<'d> {
    domain: &'d DomainFile,
    db: Database,
    aux: AuxProgram,
    config: Config,
}

impl<'d> Interpreter<'d> {
    pub fn new(domain: &'d DomainFile, program: &Program, config: Config) -> Interpreter<'d> {
        let db = Database::new(program.clauses.iter().chain(&domain.aux_program));
        let mut aux = AuxProgram::new(domain);
        aux.step_limit = config.step_limit;
        Interpreter { domain, db, aux, config }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn aux(&self) -> &AuxProgram {
        &self.aux
    }

    pub fn initial_state(&self) -> AgentState {
        AgentState::new(self.domain.initial_state.clone())
    }

    /// Run `query` from the domain's initial state.
    pub fn solve(&self, query: &Query, env: &mut dyn Environment) -> Run {
        self.solve_from(self.initial_state(), query, env)
    }

    pub fn solve_from(&self, state: AgentState, query: &Query, env: &mut dyn Environment) -> Run {
        let mut m = Machine::new(&self.db, self.config.step_limit, self.config.trace);
        m.barrier = state.barrier;
        m.bindings.resize(query.var_names.len(), None);
        let mut agent = Agent { domain: self.domain, aux: &self.aux, env, state, config: &self.config };
        let mut cont: Cont = None;
        for g in query.goals.iter().rev() {
            cont = Some(m.frame(Goal::Lit(g.clone()), 0, cont));
        }
        let result = match cont {
            Some(start) => m.run(Some(start), &mut Some(&mut agent)),
            None => Ok(true),
        };
        let outcome = match result {
            Ok(true) => Outcome::Success(
                query
                    .var_names
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| !n.starts_with('_'))
                    .map(|(i, n)| (n.clone(), m.resolve(&Term::Var(Var(i as u32)))))
                    .collect(),
            ),
            Ok(false) => Outcome::Failure,
            Err(e) => Outcome::Error(e),
        };
        Run { outcome, state: agent.state, trace: m.trace.take().unwrap_or_default(), steps: m.steps }
    }

    /// Execute a single action outside a derivation. `Ok(false)` when its
    /// precondition is not entailed.
    pub fn execute_action(
        &self,
        state: &mut AgentState,
        action: &Term,
        env: &mut dyn Environment,
    ) -> Result<Option<Term>, RuntimeError> {
        let Some(plan) = plan_action(self.domain, &self.aux, &state.belief, action)? else { return Ok(None) };
        commit_action(state, env, &self.config, &plan.action, &plan.effects)?;
        Ok(Some(plan.action))
    }

    /// Evaluate a `?` argument outside a derivation: every answer of a
    /// property, or the single binding produced by sensing.
    pub fn evaluate_query(
        &self,
        state: &mut AgentState,
        phi: &Term,
        env: &mut dyn Environment,
    ) -> Result<Vec<Substitution>, RuntimeError> {
        match classify_query(&self.domain.signature, phi).map_err(|e| RuntimeError::InvalidQuery(e.to_string()))? {
            QueryKind::Sense { sensor, target } => {
                let Term::Var(x) = target else {
                    return Err(RuntimeError::SenseVariableNotFree(phi.to_string()));
                };
                let result = sense(state, env, self.domain, &self.aux, &self.config, &sensor)?;
                Ok(vec![std::iter::once((x, result)).collect()])
            }
            QueryKind::Property(prop) => Ok(entails_property(&state.belief, &prop, &self.aux)?),
        }
    }
}

/// Recompute the belief reached by `events` from the initial state.
pub fn replay(domain: &DomainFile, events: &[Event]) -> Result<PiList, RuntimeError> {
    let aux = AuxProgram::new(domain);
    let mut belief = domain.initial_state.clone();
    for e in events {
        match e {
            Event::Exec(a) => {
                let plan = plan_action(domain, &aux, &belief, a)?
                    .ok_or_else(|| RuntimeError::UnknownAction(format!("{a} is not possible on replay")))?;
                belief = update(&belief, &plan.effects)?;
            }
            Event::Sense(s, r) => {
                let axiom = domain.sensor_axiom(s).ok_or_else(|| RuntimeError::NoSensorAxiom(s.to_string()))?;
                belief = integrate_sensing(&belief, axiom, r, &aux)?.state;
            }
        }
    }
    Ok(belief)
}
