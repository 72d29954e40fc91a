use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{append_verbatim, maintain, summarize, ExpVerError, Experience, Truth, TruthRepository};
use super::{DEFAULT_HIGHLIGHTS, SUMMARY_RETRIES};
use crate::agent::prompt::with_knowledge;
use crate::agent::{AgentFactory, ChatBackend};
use crate::harness::{run_episode, run_episodes, EpisodeLog, EpisodeMetrics, Flags};
use crate::levelgen::Instance;

/// The base prompt with the repository's truths in repository order.
pub fn compose_policy(base: &str, repo: &TruthRepository) -> String {
    with_knowledge(base, &repo.texts())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifiedOutcome {
    pub promoted: bool,
    /// Score of the episode the experience was drawn from.
    pub baseline_score: i64,
    pub replay: EpisodeMetrics,
    pub log: EpisodeLog,
    /// Truths to add when promoted; empty otherwise.
    pub candidates: Vec<Truth>,
}

fn finished(log: EpisodeLog) -> Result<(EpisodeLog, EpisodeMetrics), ExpVerError> {
    if let Some(reason) = &log.terminal.aborted {
        return Err(ExpVerError::Aborted(reason.clone()));
    }
    let m = log.metrics().cloned().ok_or(ExpVerError::EmptyLog)?;
    Ok((log, m))
}

/// Replays the experience's instance with the experience appended to
/// `knowledge`. Promotion requires the replay to pass and to beat the
/// original score.
pub fn verify(
    experience: &Experience,
    instance: &Instance,
    factory: &dyn AgentFactory,
    knowledge: &[String],
    flags: Flags,
    revision: u32,
) -> Result<VerifiedOutcome, ExpVerError> {
    let mut guided = knowledge.to_vec();
    guided.extend(experience.bullets());
    let mut agent = factory.make(&guided);
    let (log, replay) = finished(run_episode(instance, agent.as_mut(), flags)?)?;
    let baseline_score = experience.metrics.score();
    let promoted = replay.success() && replay.score() > baseline_score;
    let candidates = if promoted { experience.candidates(revision) } else { Vec::new() };
    Ok(VerifiedOutcome {
        promoted,
        baseline_score,
        replay,
        log,
        candidates,
    })
}

/// Success rate and mean score over a test suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteScore {
    pub suc_rate: f64,
    pub a_score: f64,
}

impl SuiteScore {
    pub fn of(metrics: &[EpisodeMetrics]) -> Self {
        let n = metrics.len().max(1) as f64;
        SuiteScore {
            suc_rate: 100.0 * metrics.iter().filter(|m| m.success()).count() as f64 / n,
            a_score: metrics.iter().map(|m| m.score() as f64).sum::<f64>() / n,
        }
    }
}

/// Runs every test instance once under `knowledge`, in instance order.
pub fn evaluate_suite(
    tests: &[Instance],
    factory: &dyn AgentFactory,
    knowledge: &[String],
    flags: Flags,
    workers: usize,
) -> Result<Vec<EpisodeMetrics>, ExpVerError> {
    if tests.is_empty() {
        return Err(ExpVerError::NoTestInstances);
    }
    run_episodes(tests, &[factory], knowledge, flags, workers)?
        .into_iter()
        .map(|log| finished(log).map(|(_, m)| m))
        .collect()
}

/// Mean paired score difference.
pub fn delta(prev: &[EpisodeMetrics], new: &[EpisodeMetrics]) -> f64 {
    assert_eq!(prev.len(), new.len(), "paired runs");
    let n = prev.len().max(1) as f64;
    prev.iter().zip(new).map(|(p, q)| (q.score() - p.score()) as f64).sum::<f64>() / n
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaOutcome {
    pub delta: f64,
    pub accepted: bool,
    pub prev: Vec<EpisodeMetrics>,
    pub new: Vec<EpisodeMetrics>,
}

/// Compares the current repository against `prev_version` on paired test
/// runs and rolls back when the mean score dropped.
pub fn evaluate_delta(
    repo: &mut TruthRepository,
    prev_version: u32,
    tests: &[Instance],
    factory: &dyn AgentFactory,
    flags: Flags,
    workers: usize,
) -> Result<DeltaOutcome, ExpVerError> {
    let prev_texts: Vec<String> = repo
        .at_version(prev_version)
        .ok_or(ExpVerError::UnknownVersion(prev_version))?
        .iter()
        .map(|t| t.text.clone())
        .collect();
    let prev = evaluate_suite(tests, factory, &prev_texts, flags, workers)?;
    let new = evaluate_suite(tests, factory, &repo.texts(), flags, workers)?;
    gate(repo, prev_version, prev, new)
}

fn gate(
    repo: &mut TruthRepository,
    prev_version: u32,
    prev: Vec<EpisodeMetrics>,
    new: Vec<EpisodeMetrics>,
) -> Result<DeltaOutcome, ExpVerError> {
    let d = delta(&prev, &new);
    let accepted = d >= 0.0;
    if !accepted {
        repo.rollback_to(prev_version)?;
    }
    Ok(DeltaOutcome {
        delta: d,
        accepted,
        prev,
        new,
    })
}

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub rounds: u32,
    pub highlights: usize,
    pub summary_retries: u32,
    pub flags: Flags,
    /// `false` appends promoted truths verbatim instead of organizing them.
    pub truthweaver: bool,
    pub workers: usize,
    /// Explorer logs are written here as `<episode id>.jsonl`.
    pub log_dir: Option<PathBuf>,
    /// The repository is saved here after every round.
    pub repo_path: Option<PathBuf>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            rounds: 4,
            highlights: DEFAULT_HIGHLIGHTS,
            summary_retries: SUMMARY_RETRIES,
            flags: Flags::default(),
            truthweaver: true,
            workers: 1,
            log_dir: None,
            repo_path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundOutcome {
    Accepted,
    /// The Δ gate reverted the update; the round's instance is retried.
    Rejected,
    NotPromoted,
    SummaryFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub round: u32,
    pub suc_rate: f64,
    pub a_score: f64,
    pub accepted: bool,
    pub repo_version: u32,
    pub outcome: RoundOutcome,
    pub instance: String,
    pub episode_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// Test-suite score of the starting repository; absent for zero rounds.
    pub baseline: Option<SuiteScore>,
    pub rows: Vec<RoundRow>,
    /// Set when a backend failure ended the run early.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn persist(repo: &TruthRepository, path: Option<&Path>) -> Result<(), ExpVerError> {
    path.map_or(Ok(()), |p| repo.save(p))
}

fn check_suites(train: &[Instance], test: &[Instance]) -> Result<(), ExpVerError> {
    if train.is_empty() {
        return Err(ExpVerError::NoTrainInstances);
    }
    if test.is_empty() {
        return Err(ExpVerError::NoTestInstances);
    }
    let held_out: std::collections::HashSet<String> = test.iter().map(Instance::id).collect();
    match train.iter().map(Instance::id).find(|id| held_out.contains(id)) {
        Some(id) => Err(ExpVerError::SuiteOverlap(id)),
        None => Ok(()),
    }
}

/// Explore, summarize, verify, maintain and gate, once per round. The
/// repository is updated in place and saved after every round.
pub fn training_loop(
    train: &[Instance],
    test: &[Instance],
    factory: &dyn AgentFactory,
    backend: &dyn ChatBackend,
    repo: &mut TruthRepository,
    cfg: &TrainingConfig,
) -> Result<TrainingReport, ExpVerError> {
    let mut report = TrainingReport {
        baseline: None,
        rows: Vec::new(),
        aborted: None,
    };
    if cfg.rounds == 0 {
        return Ok(report);
    }
    check_suites(train, test)?;
    let repo_path = cfg.repo_path.as_deref();
    if let Some(dir) = &cfg.log_dir {
        std::fs::create_dir_all(dir).map_err(|e| ExpVerError::io(dir, e))?;
    }

    let mut current = match evaluate_suite(test, factory, &repo.texts(), cfg.flags, cfg.workers) {
        Ok(m) => m,
        Err(e) if e.is_backend() => {
            report.aborted = Some(e.to_string());
            persist(repo, repo_path)?;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.baseline = Some(SuiteScore::of(&current));

    let mut cursor = 0usize;
    for round in 1..=cfg.rounds {
        let start_version = repo.version;
        match run_round(round, &train[cursor % train.len()], test, factory, backend, repo, cfg, &mut current) {
            Ok(row) => {
                if row.outcome != RoundOutcome::Rejected {
                    cursor += 1;
                }
                tracing::info!(round, outcome = ?row.outcome, version = row.repo_version, "training round");
                report.rows.push(row);
                persist(repo, repo_path)?;
            }
            Err(e) if e.is_backend() => {
                repo.rollback_to(start_version)?;
                persist(repo, repo_path)?;
                report.aborted = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_round(
    round: u32,
    instance: &Instance,
    test: &[Instance],
    factory: &dyn AgentFactory,
    backend: &dyn ChatBackend,
    repo: &mut TruthRepository,
    cfg: &TrainingConfig,
    current: &mut Vec<EpisodeMetrics>,
) -> Result<RoundRow, ExpVerError> {
    let knowledge = repo.texts();
    let episode_id = format!("r{round:03}__{}__{}", sanitize(&factory.id()), instance.id());
    let mut explorer = factory.make(&knowledge);
    let (log, _) = finished(run_episode(instance, explorer.as_mut(), cfg.flags)?)?;
    if let Some(dir) = &cfg.log_dir {
        log.write(&dir.join(format!("{episode_id}.jsonl")))?;
    }

    let row = |outcome: RoundOutcome, current: &[EpisodeMetrics], repo: &TruthRepository, delta| {
        let s = SuiteScore::of(current);
        RoundRow {
            round,
            suc_rate: s.suc_rate,
            a_score: s.a_score,
            accepted: outcome == RoundOutcome::Accepted,
            repo_version: repo.version,
            outcome,
            instance: instance.id(),
            episode_id: episode_id.clone(),
            delta,
        }
    };

    let experience = match summarize(&log, &episode_id, backend, cfg.highlights, cfg.summary_retries) {
        Ok(e) => e,
        Err(ExpVerError::SummaryParseFailure { attempts }) => {
            tracing::warn!(round, attempts, "experience summary unparseable");
            return Ok(row(RoundOutcome::SummaryFailed, current, repo, None));
        }
        Err(e) => return Err(e),
    };

    let verified = verify(&experience, instance, factory, &knowledge, cfg.flags, round)?;
    if !verified.promoted {
        return Ok(row(RoundOutcome::NotPromoted, current, repo, None));
    }

    let prev_version = repo.version;
    if cfg.truthweaver {
        maintain(repo, verified.candidates, backend, round)?;
    } else {
        append_verbatim(repo, verified.candidates);
    }
    let new = evaluate_suite(test, factory, &repo.texts(), cfg.flags, cfg.workers)?;
    let outcome = gate(repo, prev_version, current.clone(), new)?;
    if outcome.accepted {
        *current = outcome.new;
        Ok(row(RoundOutcome::Accepted, current, repo, Some(outcome.delta)))
    } else {
        Ok(row(RoundOutcome::Rejected, current, repo, Some(outcome.delta)))
    }
}
