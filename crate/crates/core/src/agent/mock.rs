//! Deterministic in-process backends and agents for tests and offline runs.

use std::collections::VecDeque;
use std::sync::Mutex;

use super::backend::{BackendError, ChatBackend, ChatExchange};
use super::scripted::{BfsAgent, GreedyMatchAgent};
use super::{Agent, AgentError, AgentFactory, Decision, Turn};
use crate::harness::Flags;
use crate::match2::{MatchAction, MatchState};
use crate::maze::{MazeAction, MazeState};
use crate::Level;

fn exchange(system: &str, user: &str, response: String) -> ChatExchange {
    ChatExchange {
        system: system.to_string(),
        user: user.to_string(),
        response,
        latency_ms: 0,
        attempts: 1,
    }
}

/// Replays a fixed list of responses in order, then fails with `Exhausted`.
pub struct ScriptedBackend {
    responses: Mutex<VecDeque<String>>,
    prompts: Mutex<Vec<(String, String)>>,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedBackend {
            responses: Mutex::new(responses.into_iter().map(Into::into).collect()),
            prompts: Mutex::new(Vec::new()),
        }
    }

    /// Every (system, user) pair received so far.
    pub fn prompts(&self) -> Vec<(String, String)> {
        self.prompts.lock().expect("lock").clone()
    }

    pub fn remaining(&self) -> usize {
        self.responses.lock().expect("lock").len()
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, system: &str, user: &str) -> Result<ChatExchange, BackendError> {
        self.prompts.lock().expect("lock").push((system.to_string(), user.to_string()));
        let next = self.responses.lock().expect("lock").pop_front();
        next.map(|r| exchange(system, user, r)).ok_or(BackendError::Exhausted)
    }

    fn model_id(&self) -> String {
        "scripted-mock".into()
    }
}

/// Computes each response from the prompt.
pub struct FnBackend<F> {
    f: F,
    id: String,
}

impl<F> FnBackend<F>
where
    F: Fn(&str, &str) -> Result<String, BackendError> + Send + Sync,
{
    pub fn new(id: impl Into<String>, f: F) -> Self {
        FnBackend { f, id: id.into() }
    }
}

impl<F> ChatBackend for FnBackend<F>
where
    F: Fn(&str, &str) -> Result<String, BackendError> + Send + Sync,
{
    fn complete(&self, system: &str, user: &str) -> Result<ChatExchange, BackendError> {
        (self.f)(system, user).map(|r| exchange(system, user, r))
    }

    fn model_id(&self) -> String {
        self.id.clone()
    }
}

/// Knowledge lines containing `cue` change the number of wasted turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cue {
    pub cue: String,
    pub weight: i32,
    /// Levels the cue applies to; empty means all.
    pub levels: Vec<Level>,
}

impl Cue {
    pub fn new(cue: impl Into<String>, weight: i32) -> Self {
        Cue {
            cue: cue.into(),
            weight,
            levels: Vec::new(),
        }
    }

    pub fn on(mut self, levels: &[Level]) -> Self {
        self.levels = levels.to_vec();
        self
    }
}

/// A knowledge-sensitive stand-in for a model: on a maze it burns some
/// turns on invalid responses, then plays like [`BfsAgent`]. The number of
/// wasted turns is `base` plus the weights of every cue found in the
/// knowledge, per matching line, clamped at zero. Match-2 play is greedy.
#[derive(Debug, Clone)]
pub struct CuedAgentFactory {
    pub base: i32,
    pub cues: Vec<Cue>,
}

impl CuedAgentFactory {
    pub fn new(base: i32, cues: Vec<Cue>) -> Self {
        CuedAgentFactory { base, cues }
    }

    pub fn waste(&self, knowledge: &[String], level: Level) -> u32 {
        let mut n = self.base;
        for c in &self.cues {
            if c.levels.is_empty() || c.levels.contains(&level) {
                n += c.weight * knowledge.iter().filter(|k| k.contains(&c.cue)).count() as i32;
            }
        }
        n.max(0) as u32
    }
}

impl AgentFactory for CuedAgentFactory {
    fn id(&self) -> String {
        "cued-mock".into()
    }

    fn make(&self, knowledge: &[String]) -> Box<dyn Agent> {
        Box::new(CuedAgent {
            waste: [Level::Easy, Level::Medium, Level::Hard].map(|l| self.waste(knowledge, l)),
            used: 0,
        })
    }
}

struct CuedAgent {
    waste: [u32; 3],
    used: u32,
}

impl Agent for CuedAgent {
    fn id(&self) -> String {
        "cued-mock".into()
    }

    fn decide_maze(&mut self, state: &MazeState, flags: &Flags) -> Result<Turn<MazeAction>, AgentError> {
        let budget = self.waste[state.level as usize];
        if self.used < budget {
            self.used += 1;
            return Ok(Turn {
                decision: Decision::Invalid,
                exchanges: Vec::new(),
                parse_failures: 0,
            });
        }
        BfsAgent.decide_maze(state, flags)
    }

    fn decide_match2(&mut self, state: &MatchState, flags: &Flags) -> Result<Turn<MatchAction>, AgentError> {
        GreedyMatchAgent.decide_match2(state, flags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_replays_then_exhausts() {
        let b = ScriptedBackend::new(["Action: 9", "Action: 3"]);
        assert_eq!(b.complete("s", "u1").unwrap().response, "Action: 9");
        assert_eq!(b.complete("s", "u2").unwrap().response, "Action: 3");
        assert_eq!(b.complete("s", "u3").unwrap_err(), BackendError::Exhausted);
        assert_eq!(b.prompts().len(), 3);
    }

    #[test]
    fn fn_backend_sees_prompt() {
        let b = FnBackend::new("echo", |_s: &str, u: &str| Ok(format!("got {}", u.len())));
        assert_eq!(b.complete("s", "abc").unwrap().response, "got 3");
        assert_eq!(b.model_id(), "echo");
    }

    #[test]
    fn cue_weights_accumulate_per_line() {
        let f = CuedAgentFactory::new(6, vec![Cue::new("avoid", -2), Cue::new("pause", 5).on(&[Level::Medium])]);
        let k = vec!["avoid walls".to_string(), "always avoid".to_string(), "pause".to_string()];
        assert_eq!(f.waste(&k, Level::Easy), 2);
        assert_eq!(f.waste(&k, Level::Medium), 7);
        assert_eq!(f.waste(&[], Level::Hard), 6);
    }
}
