//! Seeded instance generation for both games, the maze solvability check, and
//! on-disk instance suites.

use std::collections::{HashSet, VecDeque};
use std::fs;
use std::io;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::match2::{ColorCounts, Inventory, MatchBoard};
use crate::maze::{Cell, Item, MazeGrid, DEFAULT_LIVES, DEFAULT_MAX_STEPS, SIZE};
use crate::{Game, Level, Pos};

pub use crate::match2::Match2Config;
pub use crate::maze::MazeConfig;

/// Wall density range, as a fraction of the 81 cells.
pub const WALL_DENSITY: RangeInclusive<f64> = 0.18..=0.25;
pub const MAX_ATTEMPTS: usize = 500;
/// Generated seeds fall in `0..SEED_SPACE`.
pub const SEED_SPACE: u64 = 1_000_000_000;
/// Minimum Manhattan distance between start and goal.
const GOAL_MIN_DISTANCE: usize = 6;
/// Minimum Chebyshev distance between start and a monster spawn.
const MONSTER_MIN_DISTANCE: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum LevelGenError {
    #[error("no solvable {level} maze after {attempts} attempts (seed {seed})")]
    GenerationExhausted { level: Level, seed: u64, attempts: usize },
    #[error("could not draw {wanted} distinct seeds")]
    SeedCollision { wanted: usize },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed file {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// Step budget interval for a match-2 level.
pub fn match2_steps(level: Level) -> RangeInclusive<u32> {
    match level {
        Level::Easy => 15..=18,
        Level::Medium => 12..=15,
        Level::Hard => 10..=13,
    }
}

/// Per-color target interval for a match-2 level.
pub fn match2_targets(level: Level) -> RangeInclusive<u32> {
    match level {
        Level::Easy => 8..=12,
        Level::Medium => 12..=16,
        Level::Hard => 16..=20,
    }
}

pub fn gen_maze(level: Level, seed: u64) -> Result<MazeConfig, LevelGenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(cfg) = try_maze(level, seed, &mut rng) {
            if verify_solvable(&cfg) {
                return Ok(cfg);
            }
        }
    }
    Err(LevelGenError::GenerationExhausted {
        level,
        seed,
        attempts: MAX_ATTEMPTS,
    })
}

fn try_maze(level: Level, seed: u64, rng: &mut ChaCha8Rng) -> Option<MazeConfig> {
    let density = rng.gen_range(WALL_DENSITY);
    let walls = (density * (SIZE * SIZE) as f64).round() as usize;

    let mut cells: Vec<Pos> = MazeGrid::positions().collect();
    cells.shuffle(rng);
    let start = cells.pop()?;
    let mut grid = MazeGrid::open();
    for p in cells.drain(..walls) {
        grid[p] = Cell::Wall;
    }

    let goal_idx = cells.iter().position(|p| p.manhattan(start) >= GOAL_MIN_DISTANCE)?;
    grid[cells.remove(goal_idx)] = Cell::Goal;

    let mut take = |n: usize| -> Option<Vec<Pos>> {
        (cells.len() >= n).then(|| cells.drain(..n).collect())
    };
    for p in take(crate::maze::COIN_COUNT)? {
        grid[p] = Cell::Coin;
    }
    if level == Level::Hard {
        for (p, item) in take(Item::ALL.len())?.into_iter().zip(Item::ALL) {
            grid[p] = Cell::Item(item);
        }
    }
    let monster_spawns: Vec<Pos> = cells
        .iter()
        .copied()
        .filter(|p| p.chebyshev(start) >= MONSTER_MIN_DISTANCE)
        .take(MazeConfig::monster_count(level))
        .collect();
    if monster_spawns.len() != MazeConfig::monster_count(level) {
        return None;
    }

    let cfg = MazeConfig {
        level,
        grid,
        start,
        monster_spawns,
        initial_lives: DEFAULT_LIVES,
        max_steps: DEFAULT_MAX_STEPS,
        seed,
    };
    cfg.validate().ok()?;
    Some(cfg)
}

/// Breadth-first reachability from the start over non-wall cells, never
/// passing through the goal: the goal must border the reachable region, all
/// coins must be reachable and, on Hard, so must the key.
pub fn verify_solvable(config: &MazeConfig) -> bool {
    let grid = &config.grid;
    if grid[config.start] == Cell::Wall {
        return false;
    }
    let mut seen = [[false; SIZE]; SIZE];
    let mut queue = VecDeque::from([config.start]);
    seen[config.start.row][config.start.col] = true;
    let mut goal_reached = false;
    while let Some(p) = queue.pop_front() {
        for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let Some(n) = p.offset(dr, dc, SIZE) else { continue };
            match grid[n] {
                Cell::Wall => {}
                Cell::Goal => goal_reached = true,
                _ if !seen[n.row][n.col] => {
                    seen[n.row][n.col] = true;
                    queue.push_back(n);
                }
                _ => {}
            }
        }
    }
    let reachable = |cell: Cell| grid.iter().filter(|&(_, c)| c == cell).all(|(p, _)| seen[p.row][p.col]);
    goal_reached && reachable(Cell::Coin) && (config.level != Level::Hard || reachable(Cell::Item(Item::Key)))
}

/// How the prop inventory of a generated match-2 instance is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InventoryMode {
    /// One of each prop.
    #[default]
    OneEach,
    /// Each prop count drawn uniformly from 0..=2.
    Randomized,
}

pub fn gen_match2(level: Level, seed: u64) -> Match2Config {
    gen_match2_with(level, seed, InventoryMode::OneEach)
}

pub fn gen_match2_with(level: Level, seed: u64, mode: InventoryMode) -> Match2Config {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_steps = rng.gen_range(match2_steps(level));
    let mut targets = ColorCounts::default();
    for t in targets.0.iter_mut() {
        *t = rng.gen_range(match2_targets(level));
    }
    let board = MatchBoard::random(&mut rng);
    let inventory = match mode {
        InventoryMode::OneEach => Inventory::one_each(),
        InventoryMode::Randomized => Inventory {
            row: rng.gen_range(0..=2),
            col: rng.gen_range(0..=2),
            bomb: rng.gen_range(0..=2),
            hammer: rng.gen_range(0..=2),
        },
    };
    Match2Config {
        level,
        max_steps,
        targets,
        inventory,
        board,
        seed,
    }
}

/// A persisted instance of either game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "lowercase")]
pub enum Instance {
    Maze(MazeConfig),
    Match2(Match2Config),
}

impl Instance {
    pub fn generate(game: Game, level: Level, seed: u64) -> Result<Self, LevelGenError> {
        Ok(match game {
            Game::Maze => Instance::Maze(gen_maze(level, seed)?),
            Game::Match2 => Instance::Match2(gen_match2(level, seed)),
        })
    }

    pub fn game(&self) -> Game {
        match self {
            Instance::Maze(_) => Game::Maze,
            Instance::Match2(_) => Game::Match2,
        }
    }

    pub fn level(&self) -> Level {
        match self {
            Instance::Maze(c) => c.level,
            Instance::Match2(c) => c.level,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Instance::Maze(c) => c.seed,
            Instance::Match2(c) => c.seed,
        }
    }

    /// `maze-easy-1234`
    pub fn id(&self) -> String {
        format!("{}-{}-{}", self.game(), self.level(), self.seed())
    }

    /// Stable hash of the serialized config.
    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("instance serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn load(path: &Path) -> Result<Self, LevelGenError> {
        read_json(path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub game: Game,
    pub level: Level,
    pub seed: u64,
}

/// Index of a generated suite; entry paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub base_seed: u64,
    pub entries: Vec<ManifestEntry>,
}

/// Draws `count` distinct instance seeds per level from `base_seed`.
pub fn generate_suite(
    game: Game,
    levels: &[Level],
    count: usize,
    base_seed: u64,
) -> Result<Vec<Instance>, LevelGenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    let mut used = HashSet::new();
    let mut out = Vec::with_capacity(levels.len() * count);
    for &level in levels {
        for _ in 0..count {
            let seed = (0..64)
                .map(|_| rng.gen_range(0..SEED_SPACE))
                .find(|s| used.insert(*s))
                .ok_or(LevelGenError::SeedCollision {
                    wanted: levels.len() * count,
                })?;
            out.push(Instance::generate(game, level, seed)?);
        }
    }
    Ok(out)
}

/// Writes one JSON file per instance plus `manifest.json` into `dir`.
pub fn write_suite(dir: &Path, base_seed: u64, instances: &[Instance]) -> Result<SuiteManifest, LevelGenError> {
    fs::create_dir_all(dir).map_err(|source| LevelGenError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut manifest = SuiteManifest {
        base_seed,
        entries: Vec::new(),
    };
    for inst in instances {
        let rel = PathBuf::from(format!("{}.json", inst.id()));
        write_json(&dir.join(&rel), inst)?;
        manifest.entries.push(ManifestEntry {
            path: rel,
            game: inst.game(),
            level: inst.level(),
            seed: inst.seed(),
        });
    }
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Loads a manifest and every instance it lists.
pub fn load_suite(manifest_path: &Path) -> Result<(SuiteManifest, Vec<Instance>), LevelGenError> {
    let manifest: SuiteManifest = read_json(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let instances = manifest
        .entries
        .iter()
        .map(|e| Instance::load(&base.join(&e.path)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((manifest, instances))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), LevelGenError> {
    let text = serde_json::to_string_pretty(value).map_err(|source| LevelGenError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|source| LevelGenError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, LevelGenError> {
    let text = fs::read_to_string(path).map_err(|source| LevelGenError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| LevelGenError::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(level: Level, rows: &[&str], start: Pos) -> MazeConfig {
        MazeConfig {
            level,
            grid: MazeGrid::parse_rows(rows).unwrap(),
            start,
            monster_spawns: vec![],
            initial_lives: 3,
            max_steps: 100,
            seed: 0,
        }
    }

    #[test]
    fn same_seed_same_maze() {
        assert_eq!(gen_maze(Level::Easy, 1).unwrap(), gen_maze(Level::Easy, 1).unwrap());
        assert_ne!(gen_maze(Level::Easy, 1).unwrap(), gen_maze(Level::Easy, 2).unwrap());
    }

    #[test]
    fn hard_maze_has_one_of_each_item() {
        for seed in 0..20 {
            let cfg = gen_maze(Level::Hard, seed).unwrap();
            for item in Item::ALL {
                assert_eq!(cfg.grid.count(Cell::Item(item)), 1, "seed {seed}");
            }
            assert_eq!(cfg.monster_spawns.len(), 2);
        }
    }

    #[test]
    fn wall_density_in_range() {
        for seed in 0..50 {
            let cfg = gen_maze(Level::Medium, seed).unwrap();
            let walls = cfg.grid.count(Cell::Wall) as f64 / 81.0;
            assert!((0.17..=0.26).contains(&walls), "{walls}");
        }
    }

    #[test]
    fn open_map_is_solvable() {
        let rows = ["CCCCC...G", ".........", ".........", ".........", ".........", ".........", ".........", ".........", "........."];
        assert!(verify_solvable(&base(Level::Easy, &rows, Pos::new(8, 0))));
    }

    #[test]
    fn walled_off_goal_is_unsolvable() {
        let rows = ["CCCCC..#G", ".......##", ".........", ".........", ".........", ".........", ".........", ".........", "........."];
        assert!(!verify_solvable(&base(Level::Easy, &rows, Pos::new(8, 0))));
    }

    #[test]
    fn walled_off_coin_is_unsolvable() {
        let rows = ["CCCC....G", ".........", ".........", ".........", ".........", ".........", "##.......", "C#.......", "##......."];
        assert!(!verify_solvable(&base(Level::Easy, &rows, Pos::new(8, 8))));
    }

    #[test]
    fn key_behind_goal_is_unsolvable() {
        // The key at (0,8) is only reachable through the goal at (1,8).
        let rows = [
            "CCCCCT.#K",
            "WN.....#G",
            ".........",
            ".........",
            ".........",
            ".........",
            ".........",
            ".........",
            ".........",
        ];
        let cfg = base(Level::Hard, &rows, Pos::new(8, 0));
        assert!(!verify_solvable(&cfg));
        let mut open = cfg.clone();
        open.grid[Pos::new(0, 7)] = Cell::Empty;
        assert!(verify_solvable(&open));
    }

    #[test]
    fn match2_respects_intervals() {
        for seed in 0..200 {
            for level in Level::ALL {
                let cfg = gen_match2(level, seed);
                assert!(match2_steps(level).contains(&cfg.max_steps));
                assert!(cfg.targets.0.iter().all(|t| match2_targets(level).contains(t)));
                assert_eq!(cfg.board.empty_count(), 0);
            }
        }
        assert_eq!(gen_match2(Level::Easy, 3), gen_match2(Level::Easy, 3));
    }

    #[test]
    fn randomized_inventory_within_bounds() {
        let mut seen = HashSet::new();
        for seed in 0..100 {
            let inv = gen_match2_with(Level::Easy, seed, InventoryMode::Randomized).inventory;
            assert!(inv.row <= 2 && inv.col <= 2 && inv.bomb <= 2 && inv.hammer <= 2);
            seen.insert(inv);
        }
        assert!(seen.len() > 10);
    }

    #[test]
    fn easy_target_mean_is_ten() {
        let n = 1000;
        let sum: u64 = (0..n)
            .map(|seed| gen_match2(Level::Easy, seed).targets.0.iter().map(|&t| u64::from(t)).sum::<u64>())
            .sum();
        let mean = sum as f64 / (4 * n) as f64;
        assert!((mean - 10.0).abs() <= 0.5, "{mean}");
    }

    #[test]
    fn suite_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let instances = generate_suite(Game::Maze, &Level::ALL, 3, 99).unwrap();
        let seeds: HashSet<u64> = instances.iter().map(Instance::seed).collect();
        assert_eq!(seeds.len(), 9);
        let manifest = write_suite(dir.path(), 99, &instances).unwrap();
        assert_eq!(manifest.entries.len(), 9);
        let (loaded_manifest, loaded) = load_suite(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(loaded_manifest, manifest);
        assert_eq!(loaded, instances);
    }

    #[test]
    fn instance_json_is_tagged_by_game() {
        let inst = Instance::generate(Game::Match2, Level::Hard, 5).unwrap();
        let v: serde_json::Value = serde_json::to_value(&inst).unwrap();
        assert_eq!(v["game"], "match2");
        assert_eq!(v["level"], "hard");
        assert_eq!(v["seed"], 5);
        assert_eq!(v["board"].as_array().unwrap().len(), 8);
    }
}
