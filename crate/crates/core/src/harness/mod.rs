//! Episode runner, JSON-lines logs, replay verification and metric tables.

mod episode;
mod log;
mod metrics;
mod suite;

#[cfg(test)]
mod tests;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::match2::MatchError;
use crate::maze::{ExplorBasis, MazeError};

pub use episode::{replay_check, replay_verify, run_episode, Divergence, Episode, GameState, MATCH2_CALL_CAP_FACTOR};
pub use log::{read_log_dir, EpisodeLog, EpisodeMetrics, LogHeader, LogStep, LogTerminal, LoggedAction};
pub use metrics::{aggregate, columns, steps_histogram, MetricsReport, ReportRow, RowMetrics, MATCH2_COLUMNS, MAZE_COLUMNS};
pub use suite::{histogram_json, run_episodes, run_suite, AbortedEpisode, RunManifest, SuiteOutcome};

/// Ablation switches and metric options for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Flags {
    /// Maze: reveal the whole map to the agent.
    pub full_vision: bool,
    /// Match-2: start with an empty prop inventory and hide prop rules.
    pub no_props: bool,
    /// Maze exploration-rate denominator.
    pub explor_basis: ExplorBasis,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Maze(#[from] MazeError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("episode already finished")]
    Terminal,
    #[error("action does not belong to this game")]
    WrongGame,
    #[error("logs span more than one game")]
    MixedGames,
    #[error("no episodes")]
    EmptyLogs,
    #[error("malformed log: {0}")]
    Log(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Machine-readable code for wire responses.
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Maze(e) => e.code(),
            HarnessError::Match(e) => e.code(),
            HarnessError::Terminal => "SessionFinished",
            HarnessError::WrongGame => "WrongGame",
            HarnessError::MixedGames => "MixedGames",
            HarnessError::EmptyLogs => "EmptyLogs",
            HarnessError::Log(_) => "MalformedLog",
            HarnessError::Io { .. } => "Io",
        }
    }
}
