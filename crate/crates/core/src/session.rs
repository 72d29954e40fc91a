//! Human-play sessions: one engine per session behind its own lock, with
//! fog-respecting JSON payloads and harness-compatible logs.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::harness::{Episode, EpisodeLog, Flags, GameState, HarnessError, LoggedAction};
use crate::levelgen::{Instance, SEED_SPACE};
use crate::match2::{MatchAction, MatchState};
use crate::maze::{MazeAction, MazeState};
use crate::{Game, Level};

pub const HUMAN_AGENT: &str = "human";
pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("session already finished")]
    Finished,
    #[error("session still in progress")]
    InProgress,
    #[error("invalid game or level: {0}")]
    InvalidLevel(String),
    #[error("malformed action: {0}")]
    MalformedAction(String),
    #[error("{message}")]
    Engine { code: String, message: String },
    #[error("could not write log: {0}")]
    Io(String),
}

impl SessionError {
    pub fn code(&self) -> &str {
        match self {
            SessionError::NotFound(_) => "SessionNotFound",
            SessionError::Finished => "SessionFinished",
            SessionError::InProgress => "SessionInProgress",
            SessionError::InvalidLevel(_) => "InvalidLevel",
            SessionError::MalformedAction(_) => "MalformedAction",
            SessionError::Engine { code, .. } => code,
            SessionError::Io(_) => "Io",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"code": self.code(), "message": self.to_string()}})
    }
}

impl From<HarnessError> for SessionError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Terminal => SessionError::Finished,
            e => SessionError::Engine {
                code: e.code().to_string(),
                message: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateRequest {
    pub game: String,
    pub level: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub flags: Flags,
}

#[derive(Debug)]
struct Session {
    id: String,
    episode: Episode,
    created_unix: u64,
    last_activity: Instant,
    finished: bool,
    log_path: Option<PathBuf>,
}

impl Session {
    fn payload(&self) -> Value {
        let ep = &self.episode;
        let h = ep.header();
        let mut v = json!({
            "session_id": self.id,
            "game": h.game,
            "level": h.level,
            "seed": h.seed,
            "flags": h.flags,
            "created": self.created_unix,
            "finished": self.finished,
            "status": ep.state().status(),
            "score": ep.state().score(),
            "steps_taken": ep.steps().len(),
            "observation": match ep.state() {
                GameState::Maze(s) => maze_view(s, h.flags.full_vision),
                GameState::Match2(s) => match_view(s, &h.flags),
            },
        });
        if self.finished {
            v["metrics"] = json!(ep.state().metrics(&h.flags));
            if let Some(p) = &self.log_path {
                v["log_path"] = json!(p);
            }
        }
        v
    }

    fn finalize(&mut self, dir: Option<&PathBuf>) -> Result<(), SessionError> {
        self.finished = true;
        let Some(dir) = dir else { return Ok(()) };
        let log = self.episode.to_log(None);
        let path = dir.join(format!("{HUMAN_AGENT}__{}__{}.jsonl", log.header.instance.id(), self.id));
        std::fs::create_dir_all(dir).map_err(|e| SessionError::Io(e.to_string()))?;
        log.write(&path).map_err(|e| SessionError::Io(e.to_string()))?;
        self.log_path = Some(path);
        Ok(())
    }
}

/// Only what a player can see: masked glyphs, own items, visible monsters.
fn maze_view(s: &MazeState, full_vision: bool) -> Value {
    let monsters = if full_vision { s.monsters.clone() } else { s.visible_monsters() };
    json!({
        "rows": s.glyph_rows(full_vision),
        "position": s.agent_pos,
        "lives": s.lives,
        "steps_used": s.steps_used,
        "max_steps": s.max_steps,
        "coins_collected": s.coins_collected,
        "monsters": monsters,
        "items": {
            "shovel_uses": s.pickaxe_uses,
            "sword": s.has_sword,
            "magnet": s.has_magnet,
            "key": s.has_key,
        },
    })
}

fn match_view(s: &MatchState, flags: &Flags) -> Value {
    let board: Vec<Vec<String>> = s
        .board
        .render()
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    let inv = s.inventory;
    let counts = |c: &crate::match2::ColorCounts| json!({"A": c.0[0], "B": c.0[1], "C": c.0[2], "D": c.0[3]});
    json!({
        "board": board,
        "steps_remaining": s.steps_remaining,
        "max_steps": s.max_steps,
        "inventory": {"row": inv.row, "col": inv.col, "bomb": inv.bomb, "hammer": inv.hammer},
        "props_enabled": !flags.no_props,
        "targets": counts(&s.targets),
        "eliminated": counts(&s.eliminated),
    })
}

fn parse_action(state: &GameState, payload: &Value) -> Result<LoggedAction, SessionError> {
    let action = payload.get("action").unwrap_or(payload);
    match state {
        GameState::Maze(_) => {
            let id = action
                .as_u64()
                .ok_or_else(|| SessionError::MalformedAction("maze action must be an integer 0-11".into()))?;
            let id = u32::try_from(id).map_err(|_| SessionError::MalformedAction(format!("{id} out of range")))?;
            MazeAction::from_id(id)
                .map(LoggedAction::Maze)
                .map_err(|e| SessionError::Engine {
                    code: e.code().to_string(),
                    message: e.to_string(),
                })
        }
        GameState::Match2(_) if action.is_null() => Ok(LoggedAction::NoAction),
        GameState::Match2(_) => serde_json::from_value::<MatchAction>(action.clone())
            .map(LoggedAction::Match2)
            .map_err(|e| SessionError::MalformedAction(e.to_string())),
    }
}

/// All live and recently finished sessions.
pub struct SessionManager {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    log_dir: Option<PathBuf>,
    idle_timeout: Duration,
}

impl SessionManager {
    /// Finished episodes are written to `log_dir` when one is given.
    pub fn new(log_dir: Option<PathBuf>) -> Self {
        Self::with_timeout(log_dir, DEFAULT_IDLE_TIMEOUT)
    }

    pub fn with_timeout(log_dir: Option<PathBuf>, idle_timeout: Duration) -> Self {
        SessionManager {
            sessions: RwLock::new(HashMap::new()),
            log_dir,
            idle_timeout,
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("sessions lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.to_string()))
    }

    /// Starts a session. A missing seed is drawn at random and reported back.
    pub fn create(&self, req: &CreateRequest) -> Result<Value, SessionError> {
        let game: Game = req.game.parse().map_err(|_| SessionError::InvalidLevel(req.game.clone()))?;
        let level: Level = req.level.parse().map_err(|_| SessionError::InvalidLevel(req.level.clone()))?;
        let seed = req.seed.unwrap_or_else(|| rand::random::<u64>() % SEED_SPACE);
        let instance = Instance::generate(game, level, seed).map_err(|e| SessionError::Engine {
            code: "GenerationFailed".into(),
            message: e.to_string(),
        })?;
        let episode = Episode::start(&instance, HUMAN_AGENT, req.flags)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let session = Session {
            id: id.clone(),
            episode,
            created_unix,
            last_activity: Instant::now(),
            finished: false,
            log_path: None,
        };
        let payload = session.payload();
        self.sessions
            .write()
            .expect("sessions lock")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(payload)
    }

    pub fn get_state(&self, id: &str) -> Result<Value, SessionError> {
        let session = self.get(id)?;
        let s = session.lock().expect("session lock");
        Ok(s.payload())
    }

    /// Applies one action. Engine rejections come back as errors with the
    /// engine's code; rejected match-2 actions still count as calls.
    pub fn post_action(&self, id: &str, payload: &Value) -> Result<Value, SessionError> {
        let session = self.get(id)?;
        let mut s = session.lock().expect("session lock");
        if s.finished {
            return Err(SessionError::Finished);
        }
        s.last_activity = Instant::now();
        let action = parse_action(s.episode.state(), payload)?;
        let step = s.episode.apply(action, Vec::new(), 0)?.clone();
        if s.episode.is_terminal() {
            s.finalize(self.log_dir.as_ref())?;
        }
        if let Some(code) = step.error {
            return Err(SessionError::Engine {
                message: format!("action rejected: {code}"),
                code,
            });
        }
        Ok(json!({
            "reward_delta": step.reward_delta,
            "events": step.events,
            "state": s.payload(),
        }))
    }

    /// The episode log. Withheld until the session ends because the header
    /// carries the full level layout.
    pub fn get_log(&self, id: &str) -> Result<EpisodeLog, SessionError> {
        let session = self.get(id)?;
        let s = session.lock().expect("session lock");
        if !s.finished {
            return Err(SessionError::InProgress);
        }
        Ok(s.episode.to_log(None))
    }

    /// Finalizes sessions idle since before `now - timeout` and forgets
    /// finished ones idle that long. Returns how many were finalized.
    pub fn expire_idle(&self, now: Instant) -> usize {
        let sessions: Vec<(String, Arc<Mutex<Session>>)> = self
            .sessions
            .read()
            .expect("sessions lock")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut finalized = 0;
        let mut stale = Vec::new();
        for (id, session) in sessions {
            let mut s = session.lock().expect("session lock");
            if now.saturating_duration_since(s.last_activity) < self.idle_timeout {
                continue;
            }
            if s.finished {
                stale.push(id);
                continue;
            }
            s.episode.expire();
            if let Err(e) = s.finalize(self.log_dir.as_ref()) {
                tracing::warn!(session = %id, error = %e, "failed to persist expired session");
            }
            s.last_activity = now;
            finalized += 1;
        }
        if !stale.is_empty() {
            let mut map = self.sessions.write().expect("sessions lock");
            for id in stale {
                map.remove(&id);
            }
        }
        finalized
    }
}
