//! Dynamic, partially observable game environments for evaluating language
//! agents, together with the tooling around them.
//!
//! * [`maze`]: 9×9 fog-of-war maze with coins, monsters and items.
//! * [`match2`]: 8×8 match-2 elimination board with props, gravity and refill.
//! * [`levelgen`]: seeded instance generation with solvability checks.
//! * [`agent`]: prompt construction, response parsing, chat backends and
//!   scripted reference agents.
//! * [`expver`]: experience summarization, replay verification, truth
//!   maintenance and the Δ-gated training loop.
//! * [`harness`]: episode runner, JSON-lines logs, replay verification and
//!   metric aggregation.
//! * [`session`]: session manager backing the human-play HTTP service.

pub mod agent;
pub mod expver;
pub mod harness;
pub mod levelgen;
pub mod match2;
pub mod maze;
pub mod session;

mod types;

pub use types::{Game, Level, ParseEnumError, Pos};

pub use agent::{Agent, AgentError, AgentFactory, Decision, Turn};
pub use harness::{EpisodeLog, Flags, MetricsReport};
pub use levelgen::{Instance, Match2Config, MazeConfig};
pub use match2::{MatchAction, MatchState};
pub use maze::{MazeAction, MazeState};
