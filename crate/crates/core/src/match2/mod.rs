//! 8×8 match-2 elimination.
//!
//! Eliminating a 4-connected same-color group of `n ≥ 2` tiles scores
//! `5n + 3·max(0, n − 2)`. Props clear a row, a column, a clipped 3×3 window
//! or a single tile at a fixed point cost. After every accepted action the
//! board settles under gravity and refills from the episode's generator.

mod action;
mod board;

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::{Level, Pos};

pub use action::{MatchAction, Prop};
pub use board::{Color, Group, MatchBoard, Tile, SIZE, TILE_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("no eliminable group at {0}")]
    InvalidTarget(Pos),
    #[error("no {} left in the inventory", .0.name())]
    OutOfProp(Prop),
    #[error("coordinates of `{0}` are outside the board")]
    OutOfRange(MatchAction),
    #[error("episode already terminated")]
    TerminalEpisode,
    #[error("episode is still running")]
    NotTerminal,
    #[error("invalid match-2 config: {0}")]
    InvalidConfig(String),
    #[error("group size {0} is below 2")]
    GroupTooSmall(usize),
}

impl MatchError {
    pub fn code(&self) -> &'static str {
        match self {
            MatchError::InvalidTarget(_) => "InvalidTarget",
            MatchError::OutOfProp(_) => "OutOfProp",
            MatchError::OutOfRange(_) => "OutOfRange",
            MatchError::TerminalEpisode => "TerminalEpisode",
            MatchError::NotTerminal => "NotTerminal",
            MatchError::InvalidConfig(_) => "InvalidConfig",
            MatchError::GroupTooSmall(_) => "GroupTooSmall",
        }
    }
}

/// Points for eliminating a group of `n` tiles.
pub fn score_elimination(n: usize) -> Result<i64, MatchError> {
    if n < 2 {
        return Err(MatchError::GroupTooSmall(n));
    }
    let n = n as i64;
    Ok(5 * n + 3 * (n - 2).max(0))
}

/// Per-color counters serialized as `{"A": .., "B": .., "C": .., "D": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ColorCounts(pub [u32; 4]);

impl ColorCounts {
    pub fn get(&self, c: Color) -> u32 {
        self.0[c.index()]
    }

    pub fn add(&mut self, c: Color, n: u32) {
        self.0[c.index()] += n;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `A:10, B:6, C:8, D:6`
    pub fn render(&self) -> String {
        Color::ALL
            .iter()
            .map(|c| format!("{}:{}", c.letter(), self.get(*c)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl Serialize for ColorCounts {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, u32> = Color::ALL.iter().map(|c| (c.letter().to_string(), self.get(*c))).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ColorCounts {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = BTreeMap::<String, u32>::deserialize(d)?;
        let mut out = ColorCounts::default();
        for (k, v) in m {
            let c = k
                .chars()
                .next()
                .and_then(Color::from_letter)
                .filter(|_| k.len() == 1)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown color `{k}`")))?;
            out.0[c.index()] = v;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Inventory {
    pub row: u32,
    pub col: u32,
    pub bomb: u32,
    pub hammer: u32,
}

impl Inventory {
    pub const NONE: Inventory = Inventory {
        row: 0,
        col: 0,
        bomb: 0,
        hammer: 0,
    };

    pub fn one_each() -> Self {
        Inventory {
            row: 1,
            col: 1,
            bomb: 1,
            hammer: 1,
        }
    }

    pub fn count(&self, p: Prop) -> u32 {
        match p {
            Prop::Row => self.row,
            Prop::Col => self.col,
            Prop::Bomb => self.bomb,
            Prop::Hammer => self.hammer,
        }
    }

    fn slot(&mut self, p: Prop) -> &mut u32 {
        match p {
            Prop::Row => &mut self.row,
            Prop::Col => &mut self.col,
            Prop::Bomb => &mut self.bomb,
            Prop::Hammer => &mut self.hammer,
        }
    }

    pub fn total(&self) -> u32 {
        self.row + self.col + self.bomb + self.hammer
    }
}

impl fmt::Display for Inventory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row={}, col={}, bomb={}, hammer={}", self.row, self.col, self.bomb, self.hammer)
    }
}

/// A playable match-2 instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match2Config {
    pub level: Level,
    pub max_steps: u32,
    pub targets: ColorCounts,
    pub inventory: Inventory,
    pub board: MatchBoard,
    pub seed: u64,
}

impl Match2Config {
    pub fn validate(&self) -> Result<(), MatchError> {
        if self.max_steps == 0 {
            return Err(MatchError::InvalidConfig("max_steps must be positive".into()));
        }
        if self.board.empty_count() != 0 {
            return Err(MatchError::InvalidConfig("initial board has empty cells".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Running,
    Success,
    Failure,
}

impl MatchStatus {
    pub fn is_terminal(self) -> bool {
        self != MatchStatus::Running
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchEvent {
    Eliminated { color: Color, tiles: u32 },
    PropUsed { prop: Prop, tiles: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchStepResult {
    pub score_delta: i64,
    pub event: MatchEvent,
    pub cleared: ColorCounts,
    pub refilled: u32,
    pub terminal: MatchStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchEpisodeMetrics {
    pub success: bool,
    pub score: i64,
    /// Remaining/max steps, percent.
    pub rms: f64,
    pub score_per_step: f64,
    pub clear_per_step: f64,
    /// Valid/total calls, percent.
    pub api_eff: f64,
    pub steps_used: u32,
    pub tiles_cleared: u32,
}

#[derive(Debug, Clone)]
pub struct MatchState {
    pub level: Level,
    pub board: MatchBoard,
    pub score: i64,
    pub steps_remaining: u32,
    pub max_steps: u32,
    pub inventory: Inventory,
    pub targets: ColorCounts,
    pub eliminated: ColorCounts,
    pub api_calls: u32,
    pub valid_calls: u32,
    pub status: MatchStatus,
    rng: ChaCha8Rng,
}

impl MatchState {
    /// Starts an episode. `seed` drives refills.
    pub fn init(config: &Match2Config, seed: u64) -> Result<Self, MatchError> {
        config.validate()?;
        Ok(MatchState {
            level: config.level,
            board: config.board.clone(),
            score: 0,
            steps_remaining: config.max_steps,
            max_steps: config.max_steps,
            inventory: config.inventory,
            targets: config.targets,
            eliminated: ColorCounts::default(),
            api_calls: 0,
            valid_calls: 0,
            status: MatchStatus::Running,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn is_terminal(&self) -> bool {
        self.status.is_terminal()
    }

    pub fn steps_used(&self) -> u32 {
        self.max_steps - self.steps_remaining
    }

    pub fn targets_met(&self) -> bool {
        Color::ALL.iter().all(|&c| self.eliminated.get(c) >= self.targets.get(c))
    }

    /// Every legal action in the current state.
    pub fn legal_actions(&self) -> Vec<MatchAction> {
        if self.is_terminal() {
            return Vec::new();
        }
        let mut out: Vec<MatchAction> = self
            .board
            .find_groups()
            .iter()
            .map(|g| MatchAction::Eliminate(g.cells[0]))
            .collect();
        for prop in Prop::ALL {
            if self.inventory.count(prop) == 0 {
                continue;
            }
            match prop {
                Prop::Row => out.extend((0..SIZE).map(MatchAction::Row)),
                Prop::Col => out.extend((0..SIZE).map(MatchAction::Col)),
                Prop::Bomb => out.extend(MatchBoard::positions().map(MatchAction::Bomb)),
                Prop::Hammer => out.extend(MatchBoard::positions().map(MatchAction::Hammer)),
            }
        }
        out
    }

    /// Applies one action. Every call made while the episode is running
    /// counts toward `api_calls`; rejected actions consume neither a step nor
    /// inventory.
    pub fn apply_action(&mut self, action: MatchAction) -> Result<MatchStepResult, MatchError> {
        if self.is_terminal() {
            return Err(MatchError::TerminalEpisode);
        }
        self.api_calls += 1;
        let cells = self.target_cells(action)?;
        self.valid_calls += 1;

        let mut cleared = ColorCounts::default();
        for &p in &cells {
            if let Some(c) = self.board[p].take() {
                cleared.add(c, 1);
            }
        }
        let (score_delta, event) = match action.prop() {
            None => {
                let color = Color::ALL
                    .into_iter()
                    .find(|&c| cleared.get(c) > 0)
                    .expect("eliminated group has a color");
                let n = cleared.total();
                (
                    score_elimination(n as usize)?,
                    MatchEvent::Eliminated { color, tiles: n },
                )
            }
            Some(prop) => {
                *self.inventory.slot(prop) -= 1;
                (
                    -prop.cost(),
                    MatchEvent::PropUsed {
                        prop,
                        tiles: cleared.total(),
                    },
                )
            }
        };
        for c in Color::ALL {
            self.eliminated.add(c, cleared.get(c));
        }
        self.score += score_delta;
        let refilled = self.board.gravity_and_refill(&mut self.rng) as u32;
        self.steps_remaining -= 1;
        if self.targets_met() {
            self.status = MatchStatus::Success;
        } else if self.steps_remaining == 0 {
            self.status = MatchStatus::Failure;
        }
        Ok(MatchStepResult {
            score_delta,
            event,
            cleared,
            refilled,
            terminal: self.status,
        })
    }

    /// Records a response that did not parse into an action.
    pub fn record_invalid_call(&mut self) {
        self.api_calls += 1;
    }

    /// `{"action": null}`: the agent gives up; the episode fails.
    pub fn forfeit(&mut self) -> Result<(), MatchError> {
        if self.is_terminal() {
            return Err(MatchError::TerminalEpisode);
        }
        self.api_calls += 1;
        self.status = MatchStatus::Failure;
        Ok(())
    }

    /// Ends the episode as a failure without an action (idle sessions, caps).
    pub fn finalize_failure(&mut self) {
        if !self.is_terminal() {
            self.status = MatchStatus::Failure;
        }
    }

    pub fn metrics_snapshot(&self) -> Result<MatchEpisodeMetrics, MatchError> {
        if !self.is_terminal() {
            return Err(MatchError::NotTerminal);
        }
        let used = self.steps_used();
        let per_step = |x: f64| if used == 0 { 0.0 } else { x / f64::from(used) };
        Ok(MatchEpisodeMetrics {
            success: self.status == MatchStatus::Success,
            score: self.score,
            rms: 100.0 * f64::from(self.steps_remaining) / f64::from(self.max_steps),
            score_per_step: per_step(self.score as f64),
            clear_per_step: per_step(f64::from(self.eliminated.total())),
            api_eff: if self.api_calls == 0 {
                0.0
            } else {
                100.0 * f64::from(self.valid_calls) / f64::from(self.api_calls)
            },
            steps_used: used,
            tiles_cleared: self.eliminated.total(),
        })
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let text = format!(
            "{}|{}|{}|{}|{:?}|{:?}|{}|{}|{:?}",
            self.board.render(),
            self.score,
            self.steps_remaining,
            self.inventory,
            self.targets,
            self.eliminated,
            self.api_calls,
            self.valid_calls,
            self.status
        );
        h.update(text.as_bytes());
        hex::encode(&h.finalize()[..8])
    }

    fn target_cells(&self, action: MatchAction) -> Result<Vec<Pos>, MatchError> {
        if !action.in_range(SIZE) {
            return Err(MatchError::OutOfRange(action));
        }
        if let Some(prop) = action.prop() {
            if self.inventory.count(prop) == 0 {
                return Err(MatchError::OutOfProp(prop));
            }
        }
        Ok(match action {
            MatchAction::Eliminate(p) => match self.board.group_at(p) {
                Some(g) if g.len() >= 2 => g.cells,
                _ => return Err(MatchError::InvalidTarget(p)),
            },
            MatchAction::Row(r) => (0..SIZE).map(|c| Pos::new(r, c)).collect(),
            MatchAction::Col(c) => (0..SIZE).map(|r| Pos::new(r, c)).collect(),
            MatchAction::Bomb(center) => MatchBoard::positions().filter(|p| p.chebyshev(center) <= 1).collect(),
            MatchAction::Hammer(p) => vec![p],
        })
    }
}
