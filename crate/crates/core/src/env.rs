//! Environments: ground truth that acknowledges actions and answers sensing
//! requests.

use thiserror::Error;

use crate::reader::read_term;
use crate::term::{Sym, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("rejected {action}: {reason}")]
    Rejected { action: String, reason: String },
    #[error("cannot sense {sensor}: {reason}")]
    Sense { sensor: String, reason: String },
}

fn reject<T>(action: &Term, reason: impl Into<String>) -> Result<T, EnvError> {
    Err(EnvError::Rejected { action: action.to_string(), reason: reason.into() })
}

/// Request/response port used by the interpreter.
pub trait Environment {
    fn execute(&mut self, action: &Term) -> Result<(), EnvError>;
    fn sense(&mut self, sensor: &str) -> Result<Term, EnvError>;
    /// Human-readable ground truth, for tests and reports.
    fn snapshot(&self) -> String;
    /// Actions acknowledged so far, in order.
    fn received(&self) -> &[Term];
}

/// Linear maze of cells `1..=cells`; `go(Y)` moves to a neighbouring cell.
/// The `glitter` sensor reports whether the gold lies in the agent's cell.
#[derive(Clone, Debug)]
pub struct MazeEnv {
    cells: i64,
    agent: i64,
    gold: i64,
    log: Vec<Term>,
}

impl MazeEnv {
    pub fn new(cells: i64, agent: i64, gold: i64) -> MazeEnv {
        MazeEnv { cells, agent, gold, log: Vec::new() }
    }

    pub fn agent(&self) -> i64 {
        self.agent
    }
}

impl Environment for MazeEnv {
    fn execute(&mut self, action: &Term) -> Result<(), EnvError> {
        let y = match (action.functor(), action.args()) {
            (Some(("go", 1)), [Term::Int(y)]) => *y,
            _ => return reject(action, "the maze only supports go/1 on cell numbers"),
        };
        if !(1..=self.cells).contains(&y) || (y - self.agent).abs() != 1 {
            return reject(action, format!("cell {y} is not adjacent to {}", self.agent));
        }
        self.agent = y;
        self.log.push(action.clone());
        Ok(())
    }

    fn sense(&mut self, sensor: &str) -> Result<Term, EnvError> {
        match sensor {
            "glitter" => Ok(Term::atom(if self.agent == self.gold { "true" } else { "false" })),
            _ => Err(EnvError::Sense { sensor: sensor.into(), reason: "the maze only has a glitter sensor".into() }),
        }
    }

    fn snapshot(&self) -> String {
        format!("maze cells=1..{} agent={} gold={}", self.cells, self.agent, self.gold)
    }

    fn received(&self) -> &[Term] {
        &self.log
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptStep {
    Do(Term),
    Sense(Sym, Term),
}

/// Replays a fixed script of expected actions and canned sensing results.
#[derive(Clone, Debug)]
pub struct ReplayEnv {
    script: Vec<ScriptStep>,
    pos: usize,
    log: Vec<Term>,
}

impl ReplayEnv {
    pub fn new(script: Vec<ScriptStep>) -> ReplayEnv {
        ReplayEnv { script, pos: 0, log: Vec::new() }
    }

    /// Script syntax, one step per line: `do go(2)` or
    /// `sense perceiveSmell false`. `%` starts a comment.
    pub fn parse(text: &str) -> Result<ReplayEnv, String> {
        let mut script = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('%').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let term = |src: &str| read_term(src).map(|r| r.term).map_err(|e| format!("line {}: {}", n + 1, e.message));
            let step = match line.split_once(char::is_whitespace) {
                Some(("do", rest)) => ScriptStep::Do(term(rest.trim())?),
                Some(("sense", rest)) => match rest.trim().split_once(char::is_whitespace) {
                    Some((s, r)) => ScriptStep::Sense(s.into(), term(r.trim())?),
                    None => return Err(format!("line {}: expected `sense <sensor> <result>`", n + 1)),
                },
                _ => return Err(format!("line {}: expected `do <action>` or `sense <sensor> <result>`", n + 1)),
            };
            script.push(step);
        }
        Ok(ReplayEnv::new(script))
    }

    pub fn remaining(&self) -> &[ScriptStep] {
        &self.script[self.pos..]
    }
}

impl Environment for ReplayEnv {
    fn execute(&mut self, action: &Term) -> Result<(), EnvError> {
        match self.script.get(self.pos) {
            Some(ScriptStep::Do(expected)) if expected == action => {
                self.pos += 1;
                self.log.push(action.clone());
                Ok(())
            }
            Some(ScriptStep::Do(expected)) => reject(action, format!("expected {expected}")),
            Some(ScriptStep::Sense(s, _)) => reject(action, format!("expected sensing {s}")),
            None => reject(action, "script exhausted"),
        }
    }

    fn sense(&mut self, sensor: &str) -> Result<Term, EnvError> {
        let fail = |reason: String| Err(EnvError::Sense { sensor: sensor.into(), reason });
        match self.script.get(self.pos) {
            Some(ScriptStep::Sense(s, r)) if &**s == sensor => {
                self.pos += 1;
                Ok(r.clone())
            }
            Some(ScriptStep::Sense(s, _)) => fail(format!("expected sensing {s}")),
            Some(ScriptStep::Do(a)) => fail(format!("expected action {a}")),
            None => fail("script exhausted".into()),
        }
    }

    fn snapshot(&self) -> String {
        format!("replay step {}/{}", self.pos, self.script.len())
    }

    fn received(&self) -> &[Term] {
        &self.log
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(y: i64) -> Term {
        Term::app("go", vec![Term::Int(y)])
    }

    #[test]
    fn maze_moves_between_neighbours() {
        let mut m = MazeEnv::new(5, 1, 4);
        assert!(m.execute(&go(2)).is_ok());
        assert_eq!(m.agent(), 2);
        let mut m = MazeEnv::new(5, 1, 4);
        assert!(m.execute(&go(4)).is_err());
        assert!(m.sense("perceiveSmell").is_err());
        assert_eq!(m.sense("glitter").unwrap(), Term::atom("false"));
        let mut m = MazeEnv::new(3, 2, 2);
        assert_eq!(m.sense("glitter").unwrap(), Term::atom("true"));
    }

    #[test]
    fn replay_follows_script() {
        let mut r = ReplayEnv::parse("do go(2)\nsense perceiveSmell false\n").unwrap();
        assert!(r.execute(&go(2)).is_ok());
        assert_eq!(r.sense("perceiveSmell").unwrap(), Term::atom("false"));

        let mut r = ReplayEnv::parse("do go(2)").unwrap();
        let e = r.execute(&go(3)).unwrap_err();
        assert!(e.to_string().contains("expected go(2)"), "{e}");

        let mut r = ReplayEnv::new(Vec::new());
        assert!(r.execute(&go(2)).is_err());
    }
}
