use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gridbench_core::harness::{run_episode, Flags};
use gridbench_core::levelgen::{gen_match2, gen_maze, verify_solvable};
use gridbench_core::match2::{MatchBoard, MatchState};
use gridbench_core::maze::{MazeAction, MazeState};
use gridbench_core::{AgentFactory, Game, Instance, Level};
use gridbench_core::agent::ScriptedKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn match2(c: &mut Criterion) {
    let board = MatchBoard::random(&mut ChaCha8Rng::seed_from_u64(1));
    c.bench_function("find_groups", |b| b.iter(|| black_box(&board).find_groups()));

    let cfg = gen_match2(Level::Medium, 3);
    c.bench_function("match2_greedy_step", |b| {
        b.iter_batched(
            || MatchState::init(&cfg, 3).unwrap(),
            |mut s| {
                let a = s.legal_actions()[0];
                s.apply_action(a).unwrap()
            },
            BatchSize::SmallInput,
        )
    });
}

fn maze(c: &mut Criterion) {
    let cfg = gen_maze(Level::Hard, 5).unwrap();
    c.bench_function("maze_step", |b| {
        b.iter_batched(
            || MazeState::init(&cfg, 5).unwrap(),
            |mut s| s.apply_action(MazeAction::from_id(10).unwrap()),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("gen_maze_hard", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            gen_maze(Level::Hard, seed).unwrap()
        })
    });
    c.bench_function("verify_solvable", |b| b.iter(|| verify_solvable(black_box(&cfg))));
}

fn episodes(c: &mut Criterion) {
    let maze = Instance::generate(Game::Maze, Level::Hard, 9).unwrap();
    let m2 = Instance::generate(Game::Match2, Level::Hard, 9).unwrap();
    c.bench_function("episode_maze_frontier", |b| {
        b.iter(|| run_episode(&maze, ScriptedKind::Frontier.make(&[]).as_mut(), Flags::default()).unwrap())
    });
    c.bench_function("episode_match2_greedy", |b| {
        b.iter(|| run_episode(&m2, ScriptedKind::Greedy.make(&[]).as_mut(), Flags::default()).unwrap())
    });
}

criterion_group!(benches, match2, maze, episodes);
criterion_main!(benches);
