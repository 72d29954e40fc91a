//! Prompt construction, response parsing, chat backends and the agents that
//! drive episodes.

pub mod backend;
pub mod llm;
pub mod mock;
pub mod parse;
pub mod prompt;
pub mod scripted;


use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::harness::Flags;
use crate::match2::{MatchAction, MatchState};
use crate::maze::{MazeAction, MazeState};

pub use backend::{BackendConfig, BackendError, ChatBackend, ChatExchange};
pub use llm::{LlmAgent, LlmAgentFactory};
pub use parse::{Match2Reply, ParseFailure};
pub use scripted::{BfsAgent, FrontierAgent, GreedyMatchAgent};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// What the agent decided for one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision<A> {
    Act(A),
    /// Match-2 `{"action": null}`.
    NoAction,
    /// No usable action after all re-asks.
    Invalid,
}

/// A decision plus the model traffic that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn<A> {
    pub decision: Decision<A>,
    pub exchanges: Vec<ChatExchange>,
    /// Responses in this turn that did not parse.
    pub parse_failures: u32,
}

pub trait Agent: Send {
    fn id(&self) -> String;

    fn decide_maze(&mut self, state: &MazeState, flags: &Flags) -> Result<Turn<MazeAction>, AgentError>;

    fn decide_match2(&mut self, state: &MatchState, flags: &Flags) -> Result<Turn<MatchAction>, AgentError>;
}

/// Creates a fresh agent per episode, primed with a knowledge list.
pub trait AgentFactory: Send + Sync {
    fn id(&self) -> String;

    fn make(&self, knowledge: &[String]) -> Box<dyn Agent>;
}

impl<F: AgentFactory + ?Sized> AgentFactory for Arc<F> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn make(&self, knowledge: &[String]) -> Box<dyn Agent> {
        (**self).make(knowledge)
    }
}

/// The built-in rule-based agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptedKind {
    Bfs,
    Frontier,
    Greedy,
}

impl ScriptedKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScriptedKind::Bfs => "bfs",
            ScriptedKind::Frontier => "frontier",
            ScriptedKind::Greedy => "greedy",
        }
    }
}

impl fmt::Display for ScriptedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScriptedKind {
    type Err = crate::ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(ScriptedKind::Bfs),
            "frontier" => Ok(ScriptedKind::Frontier),
            "greedy" => Ok(ScriptedKind::Greedy),
            _ => Err(crate::ParseEnumError {
                kind: "agent",
                value: s.to_string(),
            }),
        }
    }
}

/// Scripted agents ignore knowledge.
impl AgentFactory for ScriptedKind {
    fn id(&self) -> String {
        self.as_str().to_string()
    }

    fn make(&self, _knowledge: &[String]) -> Box<dyn Agent> {
        match self {
            ScriptedKind::Bfs => Box::new(BfsAgent),
            ScriptedKind::Frontier => Box::new(FrontierAgent),
            ScriptedKind::Greedy => Box::new(GreedyMatchAgent),
        }
    }
}
