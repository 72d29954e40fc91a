use super::*;

const OPEN_EASY: [&str; 9] = [
    "CCCCC...G",
    ".........",
    ".........",
    ".........",
    ".........",
    ".........",
    ".........",
    ".........",
    ".........",
];

fn config(level: Level, rows: &[&str], start: Pos, monsters: &[Pos]) -> MazeConfig {
    MazeConfig {
        level,
        grid: MazeGrid::parse_rows(rows).unwrap(),
        start,
        monster_spawns: monsters.to_vec(),
        initial_lives: DEFAULT_LIVES,
        max_steps: DEFAULT_MAX_STEPS,
        seed: 7,
    }
}

fn act(state: &mut MazeState, id: u32) -> MazeStepResult {
    state.apply_action(MazeAction::from_id(id).unwrap()).unwrap()
}

fn hard_rows() -> Vec<&'static str> {
    vec![
        "CCCCC..#.",
        ".......T#",
        "W........",
        "N........",
        "K........",
        ".........",
        ".........",
        "#.......#",
        ".#..G...."
    ]
}

#[test]
fn easy_init_has_no_monsters_and_five_coins() {
    let s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]), 7).unwrap();
    assert!(s.monsters.is_empty());
    assert_eq!(s.coins_on_grid(), 5);
    assert_eq!(s.score, 0);
    assert_eq!(s.steps_used, 0);
    assert_eq!(s.lives, 3);
    let explored: Vec<Pos> = MazeGrid::positions().filter(|&p| s.explored.get(p)).collect();
    assert_eq!(explored, vec![Pos::new(7, 0), Pos::new(7, 1), Pos::new(8, 0), Pos::new(8, 1)]);
}

#[test]
fn hard_init_has_empty_inventory_and_two_monsters() {
    let rows = hard_rows();
    let cfg = config(Level::Hard, &rows, Pos::new(5, 4), &[Pos::new(0, 8), Pos::new(8, 0)]);
    let s = MazeState::init(&cfg, 7).unwrap();
    assert_eq!(s.monsters.len(), 2);
    assert_eq!(s.pickaxe_uses, 0);
    assert!(!s.has_sword && !s.has_magnet && !s.has_key);
    for item in Item::ALL {
        assert_eq!(s.grid.count(Cell::Item(item)), 1);
    }
}

#[test]
fn four_coins_is_rejected() {
    let mut rows = OPEN_EASY;
    rows[0] = "CCCC....G";
    let err = MazeState::init(&config(Level::Easy, &rows, Pos::new(8, 0), &[]), 7).unwrap_err();
    assert!(matches!(err, MazeError::InvalidMap(_)));
}

#[test]
fn missing_goal_is_rejected() {
    let mut rows = OPEN_EASY;
    rows[0] = "CCCCC....";
    assert!(MazeState::init(&config(Level::Easy, &rows, Pos::new(8, 0), &[]), 7).is_err());
}

#[test]
fn initial_observation_matches_trace_layout() {
    let s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]), 7).unwrap();
    let text = s.observe(false);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "   0 1 2 3 4 5 6 7 8");
    assert_eq!(lines[1], "  ---------------------");
    assert_eq!(lines[2], " 0 | ? ? ? ? ? ? ? ? G");
    for (r, line) in lines[3..9].iter().enumerate() {
        assert_eq!(*line, format!(" {} | ? ? ? ? ? ? ? ? ?", r + 1));
    }
    assert_eq!(lines[9], " 7 | . . ? ? ? ? ? ? ?");
    assert_eq!(lines[10], " 8 | A . ? ? ? ? ? ? ?");
    assert!(text.ends_with("Current position (row,col): (8,0)"));
    assert!(!text.contains("NOTE"));
}

#[test]
fn full_vision_has_no_fog() {
    let s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]), 7).unwrap();
    let text = s.observe(true);
    assert_eq!(text.matches('?').count(), 0);
    assert!(text.ends_with(FULL_VISION_NOTE));
    assert!(text.contains(" 0 | C C C C C . . . G"));
}

#[test]
fn saturated_mask_only_differs_by_note() {
    let mut s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]), 7).unwrap();
    s.explored = Mask::full();
    let partial = s.observe(false);
    let full = s.observe(true);
    assert_eq!(full, format!("{partial}\n\n{FULL_VISION_NOTE}"));
}

#[test]
fn coin_step_revealing_one_cell_nets_460() {
    let mut rows = OPEN_EASY;
    rows[0] = "CCCC....G";
    rows[8] = "..C......";
    let mut s = MazeState::init(&config(Level::Easy, &rows, Pos::new(8, 1), &[]), 7).unwrap();
    s.explored.set(Pos::new(7, 3));
    let r = act(&mut s, 9);
    assert_eq!(r.reward_delta, 460);
    assert_eq!(r.events, vec![MazeEvent::CoinCollected, MazeEvent::Explored(1)]);
    assert_eq!(s.agent_pos, Pos::new(8, 2));
    assert_eq!(s.coins_collected, 1);
    assert_eq!(s.grid[Pos::new(8, 2)], Cell::Empty);
}

#[test]
fn leaving_the_grid_costs_a_step_only() {
    let mut s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]), 7).unwrap();
    let r = act(&mut s, 6);
    assert_eq!(r.reward_delta, -50);
    assert_eq!(r.events, vec![MazeEvent::InvalidAction]);
    assert_eq!(s.agent_pos, Pos::new(8, 0));
    assert_eq!(s.steps_used, 1);
    assert_eq!(s.score, -50);
}

#[test]
fn right_three_into_wall_stops_on_first_cell() {
    // Hand trace: (6,2) -> (6,3) reveals (5,4),(6,4),(7,4); the wall at (6,4)
    // costs a life and ends the move on (6,3).
    let mut rows = OPEN_EASY;
    rows[6] = "....#....";
    let mut s = MazeState::init(&config(Level::Easy, &rows, Pos::new(6, 2), &[]), 7).unwrap();
    let r = act(&mut s, 11);
    assert_eq!(r.reward_delta, -1000 - 50 + 10 * 3);
    assert_eq!(r.events, vec![MazeEvent::Explored(3), MazeEvent::WallHit]);
    assert_eq!(s.agent_pos, Pos::new(6, 3));
    assert_eq!(s.lives, 2);
}

#[test]
fn scoring_constants_individually() {
    // New cell explored: +10 each.
    let mut s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(4, 4), &[]), 7).unwrap();
    let r = act(&mut s, 0);
    assert_eq!(r.events, vec![MazeEvent::Explored(3)]);
    assert_eq!(r.reward_delta, 3 * POINTS_EXPLORED + POINTS_STEP);

    // Step taken: -50 with nothing else happening.
    let r = act(&mut s, 3);
    assert!(r.events.is_empty());
    assert_eq!(r.reward_delta, POINTS_STEP);

    // Life lost: -1000.
    let mut rows = OPEN_EASY;
    rows[3] = "....#....";
    let mut s = MazeState::init(&config(Level::Easy, &rows, Pos::new(4, 4), &[]), 7).unwrap();
    let r = act(&mut s, 0);
    assert_eq!(r.events, vec![MazeEvent::WallHit]);
    assert_eq!(r.reward_delta, POINTS_LIFE_LOST + POINTS_STEP);

    // Coin collected: +500.
    let mut rows = OPEN_EASY;
    rows[0] = "CCCC....G";
    rows[3] = "....C....";
    let mut s = MazeState::init(&config(Level::Easy, &rows, Pos::new(4, 4), &[]), 7).unwrap();
    s.explored = Mask::full();
    let r = act(&mut s, 0);
    assert_eq!(r.events, vec![MazeEvent::CoinCollected]);
    assert_eq!(r.reward_delta, POINTS_COIN + POINTS_STEP);

    // Goal reached: +2000.
    let mut s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(1, 8), &[]), 7).unwrap();
    s.explored = Mask::full();
    let r = act(&mut s, 0);
    assert_eq!(r.events, vec![MazeEvent::GoalReached]);
    assert_eq!(r.reward_delta, POINTS_GOAL + POINTS_STEP);
    assert_eq!(r.terminal, MazeStatus::Success);
    assert!(matches!(s.apply_action(MazeAction::from_id(0).unwrap()), Err(MazeError::TerminalEpisode)));
}

#[test]
fn goal_stops_multi_step_move() {
    let mut s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(2, 8), &[]), 7).unwrap();
    let r = act(&mut s, 2);
    assert_eq!(s.agent_pos, Pos::new(0, 8));
    assert_eq!(r.terminal, MazeStatus::Success);
    assert_eq!(s.steps_used, 1);
}

#[test]
fn monster_hit_returns_agent_to_start() {
    let mut rows = OPEN_EASY;
    rows[3] = ".....#...";
    rows[4] = "......#..";
    rows[5] = ".....#...";
    let cfg = config(Level::Medium, &rows, Pos::new(4, 3), &[Pos::new(4, 5), Pos::new(8, 8)]);
    let mut s = MazeState::init(&cfg, 7).unwrap();
    let r = act(&mut s, 10);
    assert_eq!(s.agent_pos, Pos::new(4, 3));
    assert_eq!(s.lives, 2);
    assert!(r.events.contains(&MazeEvent::MonsterHit));
    assert_eq!(r.reward_delta, -50 + 30 - 1000);
    // The boxed monster's only move is into the freed corridor cell.
    assert_eq!(s.monsters[0], Pos::new(4, 4));
}

#[test]
fn sword_kills_monster_without_life_loss() {
    let mut rows = OPEN_EASY;
    rows[3] = ".....#...";
    rows[4] = "......#..";
    rows[5] = ".....#...";
    let cfg = config(Level::Medium, &rows, Pos::new(4, 4), &[Pos::new(4, 5), Pos::new(8, 8)]);
    let mut s = MazeState::init(&cfg, 7).unwrap();
    s.has_sword = true;
    let r = act(&mut s, 9);
    assert!(r.events.contains(&MazeEvent::MonsterKilled));
    assert_eq!(s.kills, 1);
    assert_eq!(s.lives, 3);
    assert_eq!(s.agent_pos, Pos::new(4, 5));
    assert_eq!(s.monsters.len(), 1);
}

#[test]
fn pickaxe_breaks_walls() {
    let mut rows = OPEN_EASY;
    rows[4] = ".....#...";
    let mut s = MazeState::init(&config(Level::Easy, &rows, Pos::new(4, 4), &[]), 7).unwrap();
    s.pickaxe_uses = 3;
    let r = act(&mut s, 9);
    assert!(r.events.contains(&MazeEvent::BarrierBroken));
    assert_eq!(s.pickaxe_uses, 2);
    assert_eq!(s.barriers_destroyed, 1);
    assert_eq!(s.grid[Pos::new(4, 5)], Cell::Empty);
    assert_eq!(s.agent_pos, Pos::new(4, 5));
    assert_eq!(s.lives, 3);
}

fn hard_state() -> MazeState {
    // Monsters boxed into corners so they cannot interfere.
    let rows = hard_rows();
    let cfg = config(Level::Hard, &rows, Pos::new(7, 4), &[Pos::new(0, 8), Pos::new(8, 0)]);
    MazeState::init(&cfg, 7).unwrap()
}

#[test]
fn hard_goal_requires_key() {
    let mut s = hard_state();
    let r = act(&mut s, 3);
    assert_eq!(r.events, vec![MazeEvent::GoalBlockedNoKey]);
    assert_eq!(r.reward_delta, -50);
    assert_eq!(s.agent_pos, Pos::new(7, 4));
    assert_eq!(s.status, MazeStatus::Running);

    s.has_key = true;
    let r = act(&mut s, 3);
    assert_eq!(r.terminal, MazeStatus::Success);
}

#[test]
fn items_are_picked_up() {
    let mut s = hard_state();
    s.agent_pos = Pos::new(2, 1);
    act(&mut s, 6);
    assert!(s.has_sword);
    act(&mut s, 3);
    assert!(s.has_magnet);
    act(&mut s, 3);
    assert!(s.has_key);
    s.agent_pos = Pos::new(1, 6);
    let r = act(&mut s, 9);
    assert!(r.events.contains(&MazeEvent::ItemPicked(Item::Pickaxe)));
    assert_eq!(s.pickaxe_uses, 3);
}

#[test]
fn magnet_pulls_coins_in_five_by_five_window() {
    let mut s = hard_state();
    s.has_magnet = true;
    s.agent_pos = Pos::new(2, 4);
    // Moving up to (1,4): window rows 0..=3, cols 2..=6 holds coins (0,2),(0,3),(0,4).
    let r = act(&mut s, 0);
    assert!(r.events.contains(&MazeEvent::MagnetPull(3)));
    assert_eq!(s.coins_collected, 3);
    assert_eq!(s.coins_on_grid(), 2);
    let magnet_points: i64 = r.events.iter().filter(|e| matches!(e, MazeEvent::MagnetPull(_))).map(|e| e.points()).sum();
    assert_eq!(magnet_points, 1500);
}

#[test]
fn boxed_spawn_dies_on_first_turn() {
    let mut rows = OPEN_EASY;
    rows[0] = "..#..CCCG";
    rows[1] = ".#C......";
    rows[2] = "#.C......";
    let mut cfg = config(Level::Medium, &rows, Pos::new(0, 0), &[Pos::new(0, 1), Pos::new(1, 0)]);
    cfg.initial_lives = 1;
    let mut s = MazeState::init(&cfg, 3).unwrap();
    let r = act(&mut s, 0);
    assert_eq!(r.terminal, MazeStatus::DeadLivesZero);
    let m = s.metrics_snapshot().unwrap();
    assert!(!m.success);
    assert_eq!(m.rem_hp, 0);
}

#[test]
fn steps_exhaust() {
    let mut cfg = config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]);
    cfg.max_steps = 2;
    let mut s = MazeState::init(&cfg, 1).unwrap();
    assert_eq!(act(&mut s, 9).terminal, MazeStatus::Running);
    assert_eq!(act(&mut s, 6).terminal, MazeStatus::DeadStepsExhausted);
    assert!(s.apply_invalid().is_err());
}

#[test]
fn metrics_require_terminal() {
    let s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]), 7).unwrap();
    assert_eq!(s.metrics_snapshot().unwrap_err(), MazeError::NotTerminal);
}

#[test]
fn metrics_saturated_ratios() {
    let mut s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(1, 8), &[]), 7).unwrap();
    s.explored = Mask::full();
    s.coins_collected = 5;
    act(&mut s, 0);
    let m = s.metrics_snapshot().unwrap();
    assert!(m.success);
    assert_eq!(m.gold, 100.0);
    assert_eq!(m.explor, 100.0);
}

#[test]
fn metrics_explor_of_62_cells() {
    let mut s = MazeState::init(&config(Level::Easy, &OPEN_EASY, Pos::new(8, 0), &[]), 7).unwrap();
    s.explored = Mask::default();
    for p in MazeGrid::positions().take(62) {
        s.explored.set(p);
    }
    s.finalize_steps_exhausted();
    let m = s.metrics_snapshot().unwrap();
    assert_eq!((m.explor * 100.0).round() / 100.0, 76.54);
}

#[test]
fn explor_non_wall_basis() {
    let mut rows = OPEN_EASY;
    rows[4] = "#########";
    let mut s = MazeState::init(&config(Level::Easy, &rows, Pos::new(8, 0), &[]), 7).unwrap();
    s.finalize_steps_exhausted();
    let m = s.metrics_snapshot_with(ExplorBasis::NonWall).unwrap();
    assert!((m.explor - 100.0 * 4.0 / 72.0).abs() < 1e-9);
}

#[test]
fn same_seed_same_trajectory() {
    let rows = OPEN_EASY;
    let cfg = config(Level::Medium, &rows, Pos::new(8, 0), &[Pos::new(4, 4), Pos::new(2, 6)]);
    let run = |seed| {
        let mut s = MazeState::init(&cfg, seed).unwrap();
        let mut digests = Vec::new();
        for id in [9, 0, 0, 10, 1, 5, 9, 9, 0, 2] {
            if s.is_terminal() {
                break;
            }
            act(&mut s, id);
            digests.push(s.digest());
        }
        digests
    };
    assert_eq!(run(5), run(5));
}
