use std::sync::Arc;

use super::backend::{ChatBackend, ChatExchange};
use super::parse::{parse_match2_action, parse_maze_action, Match2Reply, ParseFailure};
use super::prompt::{build_match2_prompt, build_maze_prompt, reask};
use super::{Agent, AgentError, AgentFactory, Decision, Turn};
use crate::harness::Flags;
use crate::match2::{MatchAction, MatchState};
use crate::maze::{MazeAction, MazeState};

/// Format re-asks per step before the step is declared invalid.
pub const DEFAULT_REASKS: u32 = 2;

/// Prompts a chat backend and parses its replies into actions.
pub struct LlmAgent {
    backend: Arc<dyn ChatBackend>,
    knowledge: Vec<String>,
    reasks: u32,
}

impl LlmAgent {
    pub fn new(backend: Arc<dyn ChatBackend>, knowledge: Vec<String>) -> Self {
        LlmAgent {
            backend,
            knowledge,
            reasks: DEFAULT_REASKS,
        }
    }

    pub fn with_reasks(mut self, reasks: u32) -> Self {
        self.reasks = reasks;
        self
    }

    pub fn knowledge(&self) -> &[String] {
        &self.knowledge
    }

    fn ask<T>(
        &self,
        system: &str,
        user: &str,
        parse: impl Fn(&str) -> Result<T, ParseFailure>,
    ) -> Result<(Option<T>, Vec<ChatExchange>, u32), AgentError> {
        let mut exchanges = Vec::new();
        let mut failures = 0;
        for attempt in 0..=self.reasks {
            let prompt = if attempt == 0 { user.to_string() } else { reask(user) };
            let ex = self.backend.complete(system, &prompt)?;
            let parsed = parse(&ex.response);
            exchanges.push(ex);
            match parsed {
                Ok(v) => return Ok((Some(v), exchanges, failures)),
                Err(e) => {
                    tracing::debug!(attempt, error = %e, "unparseable response");
                    failures += 1;
                }
            }
        }
        Ok((None, exchanges, failures))
    }
}

impl Agent for LlmAgent {
    fn id(&self) -> String {
        self.backend.model_id()
    }

    fn decide_maze(&mut self, state: &MazeState, flags: &Flags) -> Result<Turn<MazeAction>, AgentError> {
        let (system, user) = build_maze_prompt(state, &self.knowledge, flags);
        let (action, exchanges, parse_failures) = self.ask(&system, &user, parse_maze_action)?;
        Ok(Turn {
            decision: action.map_or(Decision::Invalid, Decision::Act),
            exchanges,
            parse_failures,
        })
    }

    fn decide_match2(&mut self, state: &MatchState, flags: &Flags) -> Result<Turn<MatchAction>, AgentError> {
        let (system, user) = build_match2_prompt(state, &self.knowledge, flags);
        let (reply, exchanges, parse_failures) = self.ask(&system, &user, parse_match2_action)?;
        let decision = match reply {
            Some(Match2Reply::Act(a)) => Decision::Act(a),
            Some(Match2Reply::NoAction) => Decision::NoAction,
            None => Decision::Invalid,
        };
        Ok(Turn {
            decision,
            exchanges,
            parse_failures,
        })
    }
}

/// Builds [`LlmAgent`]s sharing one backend.
#[derive(Clone)]
pub struct LlmAgentFactory {
    backend: Arc<dyn ChatBackend>,
}

impl LlmAgentFactory {
    pub fn new(backend: Arc<dyn ChatBackend>) -> Self {
        LlmAgentFactory { backend }
    }
}

impl AgentFactory for LlmAgentFactory {
    fn id(&self) -> String {
        self.backend.model_id()
    }

    fn make(&self, knowledge: &[String]) -> Box<dyn Agent> {
        Box::new(LlmAgent::new(self.backend.clone(), knowledge.to_vec()))
    }
}
