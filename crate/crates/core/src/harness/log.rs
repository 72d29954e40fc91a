use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Flags, HarnessError};
use crate::agent::ChatExchange;
use crate::levelgen::Instance;
use crate::match2::{MatchAction, MatchEpisodeMetrics};
use crate::maze::{MazeAction, MazeEpisodeMetrics};
use crate::{Game, Level};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub game: Game,
    pub level: Level,
    pub seed: u64,
    /// Seed of the engine's own RNG (monster motion or refills).
    pub dynamics_seed: u64,
    pub config_hash: String,
    pub agent: String,
    pub flags: Flags,
    pub instance: Instance,
}

/// The action taken in one logged step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LoggedAction {
    Maze(MazeAction),
    Match2(MatchAction),
    /// `{"action": null}`.
    NoAction,
    /// No parseable action after all re-asks.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogStep {
    pub index: u32,
    pub observation: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exchanges: Vec<ChatExchange>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub parse_failures: u32,
    pub action: LoggedAction,
    /// Engine rejection code when the action was refused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub reward_delta: i64,
    pub events: serde_json::Value,
    pub score_after: i64,
    pub digest: String,
}

fn is_zero(n: &u32) -> bool {
    *n == 0
}

impl LogStep {
    /// The model's reasoning for this step, or a description of the action
    /// for scripted agents.
    pub fn reasoning(&self) -> String {
        if let Some(ex) = self.exchanges.last() {
            return ex.response.clone();
        }
        match self.action {
            LoggedAction::Maze(a) => a.to_string(),
            LoggedAction::Match2(a) => a.to_string(),
            LoggedAction::NoAction => "no action".into(),
            LoggedAction::Invalid => "invalid response".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpisodeMetrics {
    Maze(MazeEpisodeMetrics),
    Match2(MatchEpisodeMetrics),
}

impl EpisodeMetrics {
    pub fn success(&self) -> bool {
        match self {
            EpisodeMetrics::Maze(m) => m.success,
            EpisodeMetrics::Match2(m) => m.success,
        }
    }

    pub fn score(&self) -> i64 {
        match self {
            EpisodeMetrics::Maze(m) => m.score,
            EpisodeMetrics::Match2(m) => m.score,
        }
    }

    /// Steps consumed by the episode.
    pub fn steps(&self) -> u32 {
        match self {
            EpisodeMetrics::Maze(m) => m.steps,
            EpisodeMetrics::Match2(m) => m.steps_used,
        }
    }

    /// Metric bullets for the session-analysis prompt.
    pub fn bullets(&self) -> Vec<(String, String)> {
        let v = serde_json::to_value(self).expect("metrics serialize");
        match v {
            serde_json::Value::Object(map) => map.into_iter().map(|(k, v)| (k, v.to_string())).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogTerminal {
    pub status: String,
    /// Absent for aborted episodes.
    pub metrics: Option<EpisodeMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    /// The run hit the harness call cap.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub capped: bool,
    /// The session was ended for inactivity.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expired: bool,
}

/// One episode: header, one line per agent call, terminal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub header: LogHeader,
    pub steps: Vec<LogStep>,
    pub terminal: LogTerminal,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(LogHeader),
    Step(LogStep),
    Terminal(LogTerminal),
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LineRef<'a> {
    Header(&'a LogHeader),
    Step(&'a LogStep),
    Terminal(&'a LogTerminal),
}

impl EpisodeLog {
    pub fn is_aborted(&self) -> bool {
        self.terminal.aborted.is_some()
    }

    pub fn metrics(&self) -> Option<&EpisodeMetrics> {
        self.terminal.metrics.as_ref()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: LineRef<'_>| {
            out.push_str(&serde_json::to_string(&line).expect("log line serializes"));
            out.push('\n');
        };
        push(LineRef::Header(&self.header));
        for s in &self.steps {
            push(LineRef::Step(s));
        }
        push(LineRef::Terminal(&self.terminal));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, HarnessError> {
        Self::from_lines(text.lines().map(|l| Ok(l.to_string())))
    }

    fn from_lines(lines: impl Iterator<Item = std::io::Result<String>>) -> Result<Self, HarnessError> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut terminal = None;
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| HarnessError::Log(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(&line).map_err(|e| HarnessError::Log(format!("line {}: {e}", n + 1)))?;
            match parsed {
                Line::Header(h) if header.is_none() => header = Some(h),
                Line::Step(s) if header.is_some() && terminal.is_none() => steps.push(s),
                Line::Terminal(t) if header.is_some() && terminal.is_none() => terminal = Some(t),
                _ => return Err(HarnessError::Log(format!("line {}: out of order", n + 1))),
            }
        }
        Ok(EpisodeLog {
            header: header.ok_or_else(|| HarnessError::Log("missing header".into()))?,
            steps,
            terminal: terminal.ok_or_else(|| HarnessError::Log("missing terminal line".into()))?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let f = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_lines(BufReader::new(f).lines())
    }
}

/// Every `*.jsonl` log in a directory, sorted by file name.
pub fn read_log_dir(dir: &Path) -> Result<Vec<EpisodeLog>, HarnessError> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths.iter().map(|p| EpisodeLog::read(p)).collect()
}
