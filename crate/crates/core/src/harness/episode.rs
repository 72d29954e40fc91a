use serde_json::json;

use super::log::{EpisodeLog, EpisodeMetrics, LogHeader, LogStep, LogTerminal, LoggedAction};
use super::{Flags, HarnessError};
use crate::agent::{Agent, ChatExchange, Decision};
use crate::agent::prompt::match2_base_prompt;
use crate::levelgen::Instance;
use crate::match2::{Inventory, MatchError, MatchState};
use crate::maze::MazeState;

/// Agent calls allowed per match-2 step budget before the run is cut off.
pub const MATCH2_CALL_CAP_FACTOR: u32 = 4;

/// Live engine state for either game.
#[derive(Debug, Clone)]
pub enum GameState {
    Maze(MazeState),
    Match2(MatchState),
}

impl GameState {
    pub fn is_terminal(&self) -> bool {
        match self {
            GameState::Maze(s) => s.is_terminal(),
            GameState::Match2(s) => s.is_terminal(),
        }
    }

    pub fn score(&self) -> i64 {
        match self {
            GameState::Maze(s) => s.score,
            GameState::Match2(s) => s.score,
        }
    }

    pub fn digest(&self) -> String {
        match self {
            GameState::Maze(s) => s.digest(),
            GameState::Match2(s) => s.digest(),
        }
    }

    pub fn status(&self) -> String {
        let v = match self {
            GameState::Maze(s) => serde_json::to_value(s.status),
            GameState::Match2(s) => serde_json::to_value(s.status),
        };
        v.ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }

    pub fn metrics(&self, flags: &Flags) -> Option<EpisodeMetrics> {
        match self {
            GameState::Maze(s) => s.metrics_snapshot_with(flags.explor_basis).ok().map(EpisodeMetrics::Maze),
            GameState::Match2(s) => s.metrics_snapshot().ok().map(EpisodeMetrics::Match2),
        }
    }
}

/// An episode in progress: engine state plus the log being written.
#[derive(Debug, Clone)]
pub struct Episode {
    header: LogHeader,
    state: GameState,
    steps: Vec<LogStep>,
    capped: bool,
    expired: bool,
}

impl Episode {
    /// Starts an episode whose engine RNG is seeded with the instance seed.
    pub fn start(instance: &Instance, agent: &str, flags: Flags) -> Result<Self, HarnessError> {
        Self::start_with_seed(instance, agent, flags, instance.seed())
    }

    pub fn start_with_seed(
        instance: &Instance,
        agent: &str,
        flags: Flags,
        dynamics_seed: u64,
    ) -> Result<Self, HarnessError> {
        let state = match instance {
            Instance::Maze(cfg) => GameState::Maze(MazeState::init(cfg, dynamics_seed)?),
            Instance::Match2(cfg) => {
                let mut s = MatchState::init(cfg, dynamics_seed)?;
                if flags.no_props {
                    s.inventory = Inventory::NONE;
                }
                GameState::Match2(s)
            }
        };
        Ok(Episode {
            header: LogHeader {
                game: instance.game(),
                level: instance.level(),
                seed: instance.seed(),
                dynamics_seed,
                config_hash: instance.config_hash(),
                agent: agent.to_string(),
                flags,
                instance: instance.clone(),
            },
            state,
            steps: Vec::new(),
            capped: false,
            expired: false,
        })
    }

    pub fn header(&self) -> &LogHeader {
        &self.header
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn steps(&self) -> &[LogStep] {
        &self.steps
    }

    pub fn flags(&self) -> Flags {
        self.header.flags
    }

    pub fn is_terminal(&self) -> bool {
        self.state.is_terminal()
    }

    /// What the agent is shown before acting.
    pub fn observation(&self) -> String {
        match &self.state {
            GameState::Maze(s) => s.observe(self.header.flags.full_vision),
            GameState::Match2(s) => match2_base_prompt(s, &self.header.flags),
        }
    }

    /// Applies one agent call and logs it. Match-2 rejections are logged with
    /// their error code and returned as `Ok`; they consume no step.
    pub fn apply(
        &mut self,
        action: LoggedAction,
        exchanges: Vec<ChatExchange>,
        parse_failures: u32,
    ) -> Result<&LogStep, HarnessError> {
        if self.is_terminal() {
            return Err(HarnessError::Terminal);
        }
        let observation = self.observation();
        let (reward_delta, events, error) = match (&mut self.state, action) {
            (GameState::Maze(s), LoggedAction::Maze(a)) => {
                let r = s.apply_action(a)?;
                (r.reward_delta, json!(r.events), None)
            }
            (GameState::Maze(s), LoggedAction::Invalid) => {
                let r = s.apply_invalid()?;
                (r.reward_delta, json!(r.events), None)
            }
            (GameState::Match2(s), act) => {
                for _ in 0..parse_failures {
                    s.record_invalid_call();
                }
                match act {
                    LoggedAction::Match2(a) => match s.apply_action(a) {
                        Ok(r) => (
                            r.score_delta,
                            json!({"event": r.event, "cleared": r.cleared, "refilled": r.refilled}),
                            None,
                        ),
                        Err(MatchError::TerminalEpisode) => return Err(HarnessError::Terminal),
                        Err(e) => (0, json!([]), Some(e.code().to_string())),
                    },
                    LoggedAction::NoAction => {
                        s.forfeit()?;
                        (0, json!(["forfeit"]), None)
                    }
                    LoggedAction::Invalid => (0, json!([]), Some("ParseFailure".to_string())),
                    LoggedAction::Maze(_) => return Err(HarnessError::WrongGame),
                }
            }
            (GameState::Maze(_), _) => return Err(HarnessError::WrongGame),
        };
        self.steps.push(LogStep {
            index: self.steps.len() as u32 + 1,
            observation,
            exchanges,
            parse_failures,
            action,
            error,
            reward_delta,
            events,
            score_after: self.state.score(),
            digest: self.state.digest(),
        });
        Ok(self.steps.last().expect("just pushed"))
    }

    fn end_early(&mut self) {
        match &mut self.state {
            GameState::Maze(s) => s.finalize_steps_exhausted(),
            GameState::Match2(s) => s.finalize_failure(),
        }
    }

    /// Ends a still-running episode after player inactivity: step exhaustion
    /// for the maze, failure for match-2.
    pub fn expire(&mut self) {
        if !self.is_terminal() {
            self.expired = true;
            self.end_early();
        }
    }

    fn cap(&mut self) {
        self.capped = true;
        self.end_early();
    }

    /// The log so far. Terminal metrics are present once the engine is
    /// terminal.
    pub fn to_log(&self, aborted: Option<String>) -> EpisodeLog {
        let metrics = if aborted.is_some() {
            None
        } else {
            self.state.metrics(&self.header.flags)
        };
        EpisodeLog {
            header: self.header.clone(),
            steps: self.steps.clone(),
            terminal: LogTerminal {
                status: if aborted.is_some() { "aborted".into() } else { self.state.status() },
                metrics,
                aborted,
                capped: self.capped,
                expired: self.expired,
            },
        }
    }

    pub fn finish(self, aborted: Option<String>) -> EpisodeLog {
        self.to_log(aborted)
    }
}

fn logged<A>(d: Decision<A>, wrap: impl Fn(A) -> LoggedAction) -> LoggedAction {
    match d {
        Decision::Act(a) => wrap(a),
        Decision::NoAction => LoggedAction::NoAction,
        Decision::Invalid => LoggedAction::Invalid,
    }
}

/// Runs an agent on an instance until the episode ends. Backend failures
/// produce a truncated log marked aborted.
pub fn run_episode(instance: &Instance, agent: &mut dyn Agent, flags: Flags) -> Result<EpisodeLog, HarnessError> {
    let mut ep = Episode::start(instance, &agent.id(), flags)?;
    let call_cap = match instance {
        Instance::Maze(cfg) => cfg.max_steps.saturating_mul(2),
        Instance::Match2(cfg) => cfg.max_steps.saturating_mul(MATCH2_CALL_CAP_FACTOR),
    };
    let mut calls = 0;
    while !ep.is_terminal() {
        if calls >= call_cap {
            ep.cap();
            break;
        }
        calls += 1;
        let turn = match &ep.state {
            GameState::Maze(s) => agent.decide_maze(s, &flags).map(|t| {
                (logged(t.decision, LoggedAction::Maze), t.exchanges, t.parse_failures)
            }),
            GameState::Match2(s) => agent.decide_match2(s, &flags).map(|t| {
                (logged(t.decision, LoggedAction::Match2), t.exchanges, t.parse_failures)
            }),
        };
        match turn {
            Ok((action, exchanges, failures)) => {
                // A maze `null` has no meaning; it is an invalid response.
                let action = match (&ep.state, action) {
                    (GameState::Maze(_), LoggedAction::NoAction) => LoggedAction::Invalid,
                    (_, a) => a,
                };
                ep.apply(action, exchanges, failures)?;
            }
            Err(e) => {
                tracing::warn!(error = %e, instance = %instance.id(), "episode aborted");
                return Ok(ep.finish(Some(e.to_string())));
            }
        }
    }
    Ok(ep.finish(None))
}

/// Where a replay first disagreed with the log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// 1-based step index; 0 for the header, `steps + 1` for the terminal.
    pub step: u32,
    pub field: &'static str,
    pub expected: String,
    pub actual: String,
}

/// Re-executes the logged actions on a fresh engine seeded as recorded.
pub fn replay_check(log: &EpisodeLog) -> Result<(), Divergence> {
    let h = &log.header;
    let mismatch = |step, field, expected: String, actual: String| Divergence {
        step,
        field,
        expected,
        actual,
    };
    if h.instance.config_hash() != h.config_hash {
        return Err(mismatch(0, "config_hash", h.config_hash.clone(), h.instance.config_hash()));
    }
    let mut ep = Episode::start_with_seed(&h.instance, &h.agent, h.flags, h.dynamics_seed)
        .map_err(|e| mismatch(0, "init", "valid config".into(), e.to_string()))?;
    for step in &log.steps {
        let got = match ep.apply(step.action, Vec::new(), step.parse_failures) {
            Ok(s) => s.clone(),
            Err(e) => return Err(mismatch(step.index, "apply", "accepted".into(), e.to_string())),
        };
        if got.reward_delta != step.reward_delta {
            return Err(mismatch(step.index, "reward_delta", step.reward_delta.to_string(), got.reward_delta.to_string()));
        }
        if got.score_after != step.score_after {
            return Err(mismatch(step.index, "score_after", step.score_after.to_string(), got.score_after.to_string()));
        }
        if got.error != step.error {
            return Err(mismatch(step.index, "error", format!("{:?}", step.error), format!("{:?}", got.error)));
        }
        if got.digest != step.digest {
            return Err(mismatch(step.index, "digest", step.digest.clone(), got.digest));
        }
    }
    let end = log.steps.len() as u32 + 1;
    if log.terminal.capped {
        ep.cap();
    }
    if log.terminal.expired {
        ep.expire();
    }
    let aborted = log.terminal.aborted.clone();
    let replayed = ep.finish(aborted);
    if replayed.terminal.status != log.terminal.status {
        return Err(mismatch(end, "status", log.terminal.status.clone(), replayed.terminal.status));
    }
    if replayed.terminal.metrics != log.terminal.metrics {
        return Err(mismatch(
            end,
            "metrics",
            format!("{:?}", log.terminal.metrics),
            format!("{:?}", replayed.terminal.metrics),
        ));
    }
    Ok(())
}

pub fn replay_verify(log: &EpisodeLog) -> bool {
    replay_check(log).is_ok()
}
