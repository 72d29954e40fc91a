//! Experience abstraction, replay verification and the curated truth
//! repository that feeds the policy prompt.

mod highlights;
mod reflect;
mod train;
mod weave;


use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::BackendError;
use crate::harness::{EpisodeMetrics, HarnessError};
use crate::{Game, Level};

pub use highlights::{select_highlights, Highlight, HighlightKind, Highlights, DEFAULT_HIGHLIGHTS};
pub use reflect::{analysis_prompt, parse_experience, summarize, SUMMARY_RETRIES};
pub use train::{
    compose_policy, delta, evaluate_delta, evaluate_suite, training_loop, verify, DeltaOutcome, RoundOutcome,
    RoundRow, SuiteScore, TrainingConfig, TrainingReport, VerifiedOutcome,
};
pub use weave::{append_verbatim, maintain, organize_prompt, parse_organized, MaintainOutcome, OrganizedEntry};

#[derive(Debug, thiserror::Error)]
pub enum ExpVerError {
    #[error("no strengths/weaknesses lists after {attempts} attempts")]
    SummaryParseFailure { attempts: u32 },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("episode aborted: {0}")]
    Aborted(String),
    #[error("episode log has no steps")]
    EmptyLog,
    #[error("repository has no version {0}")]
    UnknownVersion(u32),
    #[error("instance {0} appears in both training and test suites")]
    SuiteOverlap(String),
    #[error("no test instances")]
    NoTestInstances,
    #[error("no training instances")]
    NoTrainInstances,
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed repository: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExpVerError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        ExpVerError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Backend failures end a training run; everything else is a bug or bad input.
    pub fn is_backend(&self) -> bool {
        matches!(self, ExpVerError::Backend(_) | ExpVerError::Aborted(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceSource {
    pub game: Game,
    pub level: Level,
    pub seed: u64,
    pub episode_id: String,
}

/// Strengths and weaknesses abstracted from one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub strengths: Vec<String>,
    pub weaknesses: Vec<String>,
    pub source: ExperienceSource,
    pub metrics: EpisodeMetrics,
}

impl Experience {
    pub fn id(&self) -> &str {
        &self.source.episode_id
    }

    /// Bullets prefixed with their polarity, strengths first.
    pub fn bullets(&self) -> Vec<String> {
        let s = self.strengths.iter().map(|t| format!("Strength: {t}"));
        let w = self.weaknesses.iter().map(|t| format!("Weakness: {t}"));
        s.chain(w).collect()
    }

    /// The bullets as verified truths stamped with `revision`.
    pub fn candidates(&self, revision: u32) -> Vec<Truth> {
        self.bullets()
            .into_iter()
            .map(|text| Truth {
                text,
                provenance: vec![self.id().to_string()],
                verified: true,
                revision,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub text: String,
    /// Episode ids of the experiences this entry came from.
    pub provenance: Vec<String>,
    pub verified: bool,
    /// Training round that produced this wording.
    pub revision: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoVersion {
    pub version: u32,
    pub truths: Vec<Truth>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRepository {
    pub truths: Vec<Truth>,
    pub version: u32,
    /// Earlier versions, oldest first.
    pub history: Vec<RepoVersion>,
}

impl TruthRepository {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.truths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truths.is_empty()
    }

    pub fn texts(&self) -> Vec<String> {
        self.truths.iter().map(|t| t.text.clone()).collect()
    }

    /// Replaces the entries, archiving the current version.
    pub fn commit(&mut self, truths: Vec<Truth>) {
        let prior = std::mem::replace(&mut self.truths, truths);
        self.history.push(RepoVersion {
            version: self.version,
            truths: prior,
        });
        self.version += 1;
    }

    /// Entries as they were at `version`.
    pub fn at_version(&self, version: u32) -> Option<&[Truth]> {
        if version == self.version {
            return Some(&self.truths);
        }
        self.history
            .iter()
            .find(|v| v.version == version)
            .map(|v| v.truths.as_slice())
    }

    /// Restores `version` exactly, dropping everything committed after it.
    pub fn rollback_to(&mut self, version: u32) -> Result<(), ExpVerError> {
        if version == self.version {
            return Ok(());
        }
        let i = self
            .history
            .iter()
            .position(|v| v.version == version)
            .ok_or(ExpVerError::UnknownVersion(version))?;
        let restored = self.history[i].truths.clone();
        self.history.truncate(i);
        self.truths = restored;
        self.version = version;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("repository serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ExpVerError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes through a temporary file so a crash never leaves half a repository.
    pub fn save(&self, path: &Path) -> Result<(), ExpVerError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| ExpVerError::io(dir, e))?;
        }
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, self.to_json()).map_err(|e| ExpVerError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| ExpVerError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, ExpVerError> {
        let text = fs::read_to_string(path).map_err(|e| ExpVerError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Loads `path` if it exists, otherwise starts empty.
    pub fn load_or_default(path: &Path) -> Result<Self, ExpVerError> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::default())
        }
    }
}
