use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use super::episode::run_episode;
use super::log::EpisodeLog;
use super::metrics::{aggregate, steps_histogram, MetricsReport};
use super::{Flags, HarnessError};
use crate::agent::AgentFactory;
use crate::levelgen::Instance;
use crate::Game;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbortedEpisode {
    pub agent: String,
    pub instance: String,
    pub reason: String,
}

/// What a suite run produced on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub game: Game,
    pub flags: Flags,
    pub episodes: usize,
    pub logs: Vec<PathBuf>,
    pub aborted: Vec<AbortedEpisode>,
}

pub struct SuiteOutcome {
    pub logs: Vec<EpisodeLog>,
    pub report: MetricsReport,
    pub manifest: RunManifest,
}

/// Runs every (agent, instance) pair on a bounded worker pool. Results are
/// ordered by agent, then instance, independent of scheduling.
pub fn run_episodes(
    instances: &[Instance],
    agents: &[&dyn AgentFactory],
    knowledge: &[String],
    flags: Flags,
    workers: usize,
) -> Result<Vec<EpisodeLog>, HarnessError> {
    let jobs: Vec<(usize, usize)> = (0..agents.len())
        .flat_map(|a| (0..instances.len()).map(move |i| (a, i)))
        .collect();
    let results: Mutex<Vec<Option<Result<EpisodeLog, HarnessError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, jobs.len().max(1));
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(a, i)) = jobs.get(j) else { break };
                let mut agent = agents[a].make(knowledge);
                let log = run_episode(&instances[i], agent.as_mut(), flags);
                results.lock().expect("results lock")[j] = Some(log);
            });
        }
    });
    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Runs a suite and writes logs, reports and the run manifest into `out`:
/// `logs/<agent>__<instance>.jsonl`, `report.csv`, `report.json`,
/// `steps_histogram.json`, `run_manifest.json`.
pub fn run_suite(
    instances: &[Instance],
    agents: &[&dyn AgentFactory],
    flags: Flags,
    workers: usize,
    out: &Path,
) -> Result<SuiteOutcome, HarnessError> {
    let game = instances.first().ok_or(HarnessError::EmptyLogs)?.game();
    if instances.iter().any(|i| i.game() != game) {
        return Err(HarnessError::MixedGames);
    }
    let logs = run_episodes(instances, agents, &[], flags, workers)?;
    let log_dir = out.join("logs");
    fs::create_dir_all(&log_dir).map_err(|e| HarnessError::io(&log_dir, e))?;

    let mut paths = Vec::with_capacity(logs.len());
    let mut aborted = Vec::new();
    for log in &logs {
        let id = log.header.instance.id();
        let name = format!("{}__{id}.jsonl", sanitize(&log.header.agent));
        let path = log_dir.join(&name);
        log.write(&path)?;
        paths.push(PathBuf::from("logs").join(name));
        if let Some(reason) = &log.terminal.aborted {
            aborted.push(AbortedEpisode {
                agent: log.header.agent.clone(),
                instance: id,
                reason: reason.clone(),
            });
        }
    }

    let report = aggregate(&logs)?;
    write(&out.join("report.csv"), report.to_csv())?;
    write(&out.join("report.json"), pretty(&report.to_table_json()))?;
    write(&out.join("steps_histogram.json"), pretty(&histogram_json(&logs)))?;
    let manifest = RunManifest {
        game,
        flags,
        episodes: logs.len(),
        logs: paths,
        aborted,
    };
    write(&out.join("run_manifest.json"), pretty(&manifest))?;
    Ok(SuiteOutcome { logs, report, manifest })
}

pub fn histogram_json(logs: &[EpisodeLog]) -> serde_json::Value {
    let counts: serde_json::Map<String, serde_json::Value> = steps_histogram(logs)
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.into()))
        .collect();
    serde_json::json!({ "bin_width": 1, "counts": counts })
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn write(path: &Path, text: String) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}
