//! Locally observable 9×9 maze.
//!
//! The agent moves 1–3 cells per action. Each entered cell is resolved before
//! the next sub-step, the Chebyshev radius-1 neighbourhood is revealed after
//! every sub-step, and monsters take one random step after the agent's move
//! has fully resolved.

mod action;
mod grid;
mod render;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Level, Pos};

pub use action::{Direction, MazeAction};
pub use grid::{Cell, Item, Mask, MazeGrid, CELL_COUNT, SIZE};
pub use render::FULL_VISION_NOTE;

pub const COIN_COUNT: usize = 5;
pub const DEFAULT_LIVES: u32 = 3;
pub const DEFAULT_MAX_STEPS: u32 = 100;
pub const PICKAXE_USES: u32 = 3;

pub const POINTS_EXPLORED: i64 = 10;
pub const POINTS_COIN: i64 = 500;
pub const POINTS_STEP: i64 = -50;
pub const POINTS_LIFE_LOST: i64 = -1000;
pub const POINTS_GOAL: i64 = 2000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MazeError {
    #[error("invalid maze map: {0}")]
    InvalidMap(String),
    #[error("episode already terminated")]
    TerminalEpisode,
    #[error("action id {0} is not in 0..11")]
    MalformedAction(u32),
    #[error("episode is still running")]
    NotTerminal,
}

impl MazeError {
    pub fn code(&self) -> &'static str {
        match self {
            MazeError::InvalidMap(_) => "InvalidMap",
            MazeError::TerminalEpisode => "TerminalEpisode",
            MazeError::MalformedAction(_) => "MalformedAction",
            MazeError::NotTerminal => "NotTerminal",
        }
    }
}

/// A playable maze instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeConfig {
    pub level: Level,
    pub grid: MazeGrid,
    pub start: Pos,
    pub monster_spawns: Vec<Pos>,
    pub initial_lives: u32,
    pub max_steps: u32,
    pub seed: u64,
}

impl MazeConfig {
    pub fn monster_count(level: Level) -> usize {
        match level {
            Level::Easy => 0,
            Level::Medium | Level::Hard => 2,
        }
    }

    /// Checks the structural map invariants (not reachability).
    pub fn validate(&self) -> Result<(), MazeError> {
        let bad = |m: String| Err(MazeError::InvalidMap(m));
        let goals = self.grid.count(Cell::Goal);
        if goals != 1 {
            return bad(format!("expected exactly one goal, found {goals}"));
        }
        let coins = self.grid.count(Cell::Coin);
        if coins != COIN_COUNT {
            return bad(format!("expected {COIN_COUNT} coins, found {coins}"));
        }
        for item in Item::ALL {
            let n = self.grid.count(Cell::Item(item));
            let want = usize::from(self.level == Level::Hard);
            if n != want {
                return bad(format!("expected {want} {item:?}, found {n} on {} map", self.level));
            }
        }
        if self.start.row >= SIZE || self.start.col >= SIZE {
            return bad(format!("start {} out of bounds", self.start));
        }
        if self.grid[self.start] != Cell::Empty {
            return bad(format!("start {} is not an empty cell", self.start));
        }
        let want = Self::monster_count(self.level);
        if self.monster_spawns.len() != want {
            return bad(format!("expected {want} monsters, found {}", self.monster_spawns.len()));
        }
        for (i, &m) in self.monster_spawns.iter().enumerate() {
            if m.row >= SIZE || m.col >= SIZE || self.grid[m] != Cell::Empty || m == self.start {
                return bad(format!("monster spawn {m} is not a free empty cell"));
            }
            if self.monster_spawns[..i].contains(&m) {
                return bad(format!("monsters stacked at {m}"));
            }
        }
        if self.initial_lives == 0 || self.max_steps == 0 {
            return bad("lives and max_steps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MazeStatus {
    Running,
    Success,
    DeadLivesZero,
    DeadStepsExhausted,
}

impl MazeStatus {
    pub fn is_terminal(self) -> bool {
        self != MazeStatus::Running
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MazeEvent {
    Explored(u32),
    CoinCollected,
    WallHit,
    MonsterHit,
    MonsterKilled,
    BarrierBroken,
    ItemPicked(Item),
    GoalReached,
    GoalBlockedNoKey,
    InvalidAction,
    MagnetPull(u32),
}

impl MazeEvent {
    /// Score contribution of the event (the per-action step cost is separate).
    pub fn points(self) -> i64 {
        match self {
            MazeEvent::Explored(n) => POINTS_EXPLORED * i64::from(n),
            MazeEvent::CoinCollected => POINTS_COIN,
            MazeEvent::MagnetPull(n) => POINTS_COIN * i64::from(n),
            MazeEvent::WallHit | MazeEvent::MonsterHit => POINTS_LIFE_LOST,
            MazeEvent::GoalReached => POINTS_GOAL,
            MazeEvent::MonsterKilled
            | MazeEvent::BarrierBroken
            | MazeEvent::ItemPicked(_)
            | MazeEvent::GoalBlockedNoKey
            | MazeEvent::InvalidAction => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeStepResult {
    pub reward_delta: i64,
    pub events: Vec<MazeEvent>,
    pub terminal: MazeStatus,
}

/// Table 3 style metrics of one finished maze episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazeEpisodeMetrics {
    pub success: bool,
    pub score: i64,
    pub steps: u32,
    pub explor: f64,
    pub gold: f64,
    pub rem_hp: u32,
    pub kills: u32,
    pub barr: u32,
}

/// Denominator used for the exploration percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplorBasis {
    /// All 81 cells.
    #[default]
    AllCells,
    /// Only cells that are not walls in the current grid.
    NonWall,
}

#[derive(Debug, Clone)]
pub struct MazeState {
    pub level: Level,
    pub grid: MazeGrid,
    pub agent_pos: Pos,
    pub start_pos: Pos,
    pub lives: u32,
    pub initial_lives: u32,
    pub score: i64,
    pub steps_used: u32,
    pub max_steps: u32,
    pub explored: Mask,
    pub monsters: Vec<Pos>,
    pub initial_monsters: u32,
    pub coins_collected: u32,
    pub kills: u32,
    pub barriers_destroyed: u32,
    pub pickaxe_uses: u32,
    pub has_sword: bool,
    pub has_magnet: bool,
    pub has_key: bool,
    pub status: MazeStatus,
    rng: ChaCha8Rng,
}

impl MazeState {
    /// Starts an episode. `seed` drives monster motion.
    pub fn init(config: &MazeConfig, seed: u64) -> Result<Self, MazeError> {
        config.validate()?;
        let mut state = MazeState {
            level: config.level,
            grid: config.grid.clone(),
            agent_pos: config.start,
            start_pos: config.start,
            lives: config.initial_lives,
            initial_lives: config.initial_lives,
            score: 0,
            steps_used: 0,
            max_steps: config.max_steps,
            explored: Mask::default(),
            monsters: config.monster_spawns.clone(),
            initial_monsters: config.monster_spawns.len() as u32,
            coins_collected: 0,
            kills: 0,
            barriers_destroyed: 0,
            pickaxe_uses: 0,
            has_sword: false,
            has_magnet: false,
            has_key: false,
            status: MazeStatus::Running,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        state.reveal_around();
        Ok(state)
    }

    pub fn is_terminal(&self) -> bool {
        self.status.is_terminal()
    }

    pub fn coins_on_grid(&self) -> usize {
        self.grid.count(Cell::Coin)
    }

    pub fn goal_pos(&self) -> Option<Pos> {
        self.grid.find(Cell::Goal)
    }

    /// The cell as the agent knows it, `None` while unexplored. The goal is
    /// always known.
    pub fn known_cell(&self, p: Pos) -> Option<Cell> {
        let cell = self.grid[p];
        if self.explored.get(p) || cell == Cell::Goal {
            Some(cell)
        } else {
            None
        }
    }

    pub fn visible_monsters(&self) -> Vec<Pos> {
        self.monsters.iter().copied().filter(|&m| self.explored.get(m)).collect()
    }

    pub fn observe(&self, full_vision: bool) -> String {
        render::observe(self, full_vision)
    }

    /// The rendered map as one string per row, `?` for fog.
    pub fn glyph_rows(&self, full_vision: bool) -> Vec<String> {
        render::glyph_rows(self, full_vision)
    }

    pub fn apply_action(&mut self, action: MazeAction) -> Result<MazeStepResult, MazeError> {
        self.begin_turn()?;
        let mut events = Vec::new();
        let (dr, dc) = action.direction().delta();
        for _ in 0..action.steps() {
            if !self.sub_step(dr, dc, &mut events) {
                break;
            }
        }
        Ok(self.end_turn(events))
    }

    /// Applies an unparseable or otherwise unusable model response: the turn
    /// passes with the step cost and an `InvalidAction` event.
    pub fn apply_invalid(&mut self) -> Result<MazeStepResult, MazeError> {
        self.begin_turn()?;
        Ok(self.end_turn(vec![MazeEvent::InvalidAction]))
    }

    /// Ends the episode as step-exhausted without taking a turn.
    pub fn finalize_steps_exhausted(&mut self) {
        if !self.is_terminal() {
            self.status = MazeStatus::DeadStepsExhausted;
        }
    }

    pub fn metrics_snapshot(&self) -> Result<MazeEpisodeMetrics, MazeError> {
        self.metrics_snapshot_with(ExplorBasis::AllCells)
    }

    pub fn metrics_snapshot_with(&self, basis: ExplorBasis) -> Result<MazeEpisodeMetrics, MazeError> {
        if !self.is_terminal() {
            return Err(MazeError::NotTerminal);
        }
        let explor = match basis {
            ExplorBasis::AllCells => 100.0 * self.explored.count() as f64 / CELL_COUNT as f64,
            ExplorBasis::NonWall => {
                let open: Vec<Pos> = MazeGrid::positions().filter(|&p| self.grid[p] != Cell::Wall).collect();
                let seen = open.iter().filter(|&&p| self.explored.get(p)).count();
                100.0 * seen as f64 / open.len().max(1) as f64
            }
        };
        Ok(MazeEpisodeMetrics {
            success: self.status == MazeStatus::Success,
            score: self.score,
            steps: self.steps_used,
            explor,
            gold: 100.0 * f64::from(self.coins_collected) / COIN_COUNT as f64,
            rem_hp: self.lives,
            kills: self.kills,
            barr: self.barriers_destroyed,
        })
    }

    /// Short hash over every observable and hidden field except the RNG.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let text = format!(
            "{:?}|{}|{}|{}|{}|{}|{:?}|{:?}|{}|{}|{}|{}|{}|{}|{}|{:?}",
            self.grid.rows(),
            self.agent_pos,
            self.lives,
            self.score,
            self.steps_used,
            self.explored.count(),
            self.explored,
            self.monsters,
            self.coins_collected,
            self.kills,
            self.barriers_destroyed,
            self.pickaxe_uses,
            self.has_sword,
            self.has_magnet,
            self.has_key,
            self.status,
        );
        h.update(text.as_bytes());
        hex::encode(&h.finalize()[..8])
    }

    fn begin_turn(&mut self) -> Result<(), MazeError> {
        if self.is_terminal() {
            return Err(MazeError::TerminalEpisode);
        }
        self.steps_used += 1;
        Ok(())
    }

    fn end_turn(&mut self, mut events: Vec<MazeEvent>) -> MazeStepResult {
        if self.status == MazeStatus::Running {
            self.move_monsters(&mut events);
        }
        if self.status == MazeStatus::Running && self.steps_used >= self.max_steps {
            self.status = MazeStatus::DeadStepsExhausted;
        }
        let reward_delta = POINTS_STEP + events.iter().map(|e| e.points()).sum::<i64>();
        self.score += reward_delta;
        MazeStepResult {
            reward_delta,
            events,
            terminal: self.status,
        }
    }

    /// Resolves one cell of movement. Returns whether movement continues.
    fn sub_step(&mut self, dr: isize, dc: isize, events: &mut Vec<MazeEvent>) -> bool {
        let Some(next) = self.agent_pos.offset(dr, dc, SIZE) else {
            events.push(MazeEvent::InvalidAction);
            return false;
        };

        if let Some(i) = self.monsters.iter().position(|&m| m == next) {
            if self.has_sword {
                self.monsters.remove(i);
                self.kills += 1;
                events.push(MazeEvent::MonsterKilled);
            } else {
                self.hit_by_monster(events);
                return false;
            }
        }

        let mut keep_going = true;
        match self.grid[next] {
            Cell::Wall if self.pickaxe_uses > 0 => {
                self.pickaxe_uses -= 1;
                self.grid[next] = Cell::Empty;
                self.barriers_destroyed += 1;
                events.push(MazeEvent::BarrierBroken);
            }
            Cell::Wall => {
                events.push(MazeEvent::WallHit);
                self.lose_life();
                return false;
            }
            Cell::Goal if self.level == Level::Hard && !self.has_key => {
                events.push(MazeEvent::GoalBlockedNoKey);
                return false;
            }
            Cell::Goal => {
                events.push(MazeEvent::GoalReached);
                self.status = MazeStatus::Success;
                keep_going = false;
            }
            Cell::Coin => {
                self.grid[next] = Cell::Empty;
                self.coins_collected += 1;
                events.push(MazeEvent::CoinCollected);
            }
            Cell::Item(item) => {
                self.grid[next] = Cell::Empty;
                match item {
                    Item::Pickaxe => self.pickaxe_uses = PICKAXE_USES,
                    Item::Sword => self.has_sword = true,
                    Item::Magnet => self.has_magnet = true,
                    Item::Key => self.has_key = true,
                }
                events.push(MazeEvent::ItemPicked(item));
            }
            Cell::Empty => {}
        }
        self.agent_pos = next;
        self.after_sub_step(events);
        keep_going
    }

    fn after_sub_step(&mut self, events: &mut Vec<MazeEvent>) {
        let n = self.reveal_around();
        if n > 0 {
            events.push(MazeEvent::Explored(n));
        }
        if self.has_magnet {
            let center = self.agent_pos;
            let pulled: Vec<Pos> = MazeGrid::positions()
                .filter(|&p| p.chebyshev(center) <= 2 && self.grid[p] == Cell::Coin)
                .collect();
            if !pulled.is_empty() {
                for &p in &pulled {
                    self.grid[p] = Cell::Empty;
                }
                self.coins_collected += pulled.len() as u32;
                events.push(MazeEvent::MagnetPull(pulled.len() as u32));
            }
        }
    }

    fn hit_by_monster(&mut self, events: &mut Vec<MazeEvent>) {
        events.push(MazeEvent::MonsterHit);
        self.lose_life();
        self.agent_pos = self.start_pos;
        self.after_sub_step(events);
    }

    fn lose_life(&mut self) {
        self.lives = self.lives.saturating_sub(1);
        if self.lives == 0 {
            self.status = MazeStatus::DeadLivesZero;
        }
    }

    fn reveal_around(&mut self) -> u32 {
        let center = self.agent_pos;
        let mut n = 0;
        for dr in -1..=1 {
            for dc in -1..=1 {
                if let Some(p) = center.offset(dr, dc, SIZE) {
                    if self.explored.set(p) {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    fn move_monsters(&mut self, events: &mut Vec<MazeEvent>) {
        let mut i = 0;
        while i < self.monsters.len() {
            if self.status != MazeStatus::Running {
                return;
            }
            let here = self.monsters[i];
            let options: Vec<Pos> = Direction::ALL
                .iter()
                .filter_map(|d| {
                    let (dr, dc) = d.delta();
                    here.offset(dr, dc, SIZE)
                })
                .filter(|&p| self.grid[p] == Cell::Empty && !self.monsters.contains(&p))
                .collect();
            if options.is_empty() {
                i += 1;
                continue;
            }
            let target = options[self.rng.gen_range(0..options.len())];
            if target == self.agent_pos {
                if self.has_sword {
                    self.monsters.remove(i);
                    self.kills += 1;
                    events.push(MazeEvent::MonsterKilled);
                    continue;
                }
                self.monsters[i] = target;
                self.hit_by_monster(events);
            } else {
                self.monsters[i] = target;
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests;
