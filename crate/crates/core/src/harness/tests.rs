use std::sync::Arc;

use super::*;
use crate::agent::mock::ScriptedBackend;
use crate::agent::{Agent, AgentError, Decision, LlmAgent, ScriptedKind, Turn};
use crate::levelgen::{gen_match2, gen_maze, generate_suite, Instance};
use crate::match2::{MatchAction, MatchEpisodeMetrics, MatchState};
use crate::maze::{MazeAction, MazeEpisodeMetrics, MazeState};
use crate::{Game, Level, Pos};

fn bfs() -> Box<dyn Agent> {
    ScriptedKind::Bfs.make(&[])
}

use crate::agent::AgentFactory;

fn maze_instance(level: Level, seed: u64) -> Instance {
    Instance::Maze(gen_maze(level, seed).unwrap())
}

fn match2_instance(level: Level, seed: u64) -> Instance {
    Instance::Match2(gen_match2(level, seed))
}

#[test]
fn log_round_trips_through_jsonl() {
    let log = run_episode(&maze_instance(Level::Medium, 5), bfs().as_mut(), Flags::default()).unwrap();
    let text = log.to_jsonl();
    assert!(text.lines().next().unwrap().starts_with(r#"{"type":"header""#));
    assert!(text.lines().last().unwrap().starts_with(r#"{"type":"terminal""#));
    assert_eq!(EpisodeLog::from_jsonl(&text).unwrap(), log);
    assert!(EpisodeLog::from_jsonl(&text.lines().skip(1).collect::<Vec<_>>().join("\n")).is_err());
}

#[test]
fn runs_are_byte_identical_and_replay() {
    for seed in 0..5 {
        for inst in [maze_instance(Level::Hard, seed), match2_instance(Level::Hard, seed)] {
            let a = run_episode(&inst, ScriptedKind::Frontier.make(&[]).as_mut(), Flags::default()).unwrap();
            let b = run_episode(&inst, ScriptedKind::Frontier.make(&[]).as_mut(), Flags::default()).unwrap();
            assert_eq!(a.to_jsonl(), b.to_jsonl());
            assert_eq!(replay_check(&a), Ok(()));
        }
    }
}

#[test]
fn edited_reward_is_detected_at_that_step() {
    let mut log = run_episode(&maze_instance(Level::Easy, 8), bfs().as_mut(), Flags::default()).unwrap();
    assert!(log.steps.len() > 4);
    log.steps[3].reward_delta += 10;
    let d = replay_check(&log).unwrap_err();
    assert_eq!((d.step, d.field), (4, "reward_delta"));
    assert!(!replay_verify(&log));
}

#[test]
fn edited_terminal_metrics_are_detected() {
    let mut log = run_episode(&match2_instance(Level::Easy, 8), bfs().as_mut(), Flags::default()).unwrap();
    if let Some(EpisodeMetrics::Match2(m)) = log.terminal.metrics.as_mut() {
        m.api_eff = 50.0;
    }
    assert_eq!(replay_check(&log).unwrap_err().field, "metrics");
}

#[test]
fn version_skew_diverges_at_first_monster_move() {
    // An engine whose monster RNG differs: same instance, different dynamics seed.
    let inst = maze_instance(Level::Medium, 21);
    let mut ep = Episode::start_with_seed(&inst, "bfs", Flags::default(), inst.seed() ^ 0xdead_beef).unwrap();
    let mut agent = bfs();
    let mut reference = MazeState::init(
        match &inst {
            Instance::Maze(c) => c,
            _ => unreachable!(),
        },
        inst.seed(),
    )
    .unwrap();
    let mut first_diff = None;
    while !ep.is_terminal() {
        let GameState::Maze(s) = ep.state() else { unreachable!() };
        let Decision::Act(a) = agent.decide_maze(s, &Flags::default()).unwrap().decision else {
            unreachable!()
        };
        let step = ep.apply(LoggedAction::Maze(a), vec![], 0).unwrap().clone();
        if !reference.is_terminal() {
            reference.apply_action(a).unwrap();
            if first_diff.is_none() && reference.monsters != ep_monsters(&ep) {
                first_diff = Some(step.index);
            }
        }
    }
    let mut log = ep.finish(None);
    log.header.dynamics_seed = inst.seed();
    let d = replay_check(&log).unwrap_err();
    assert_eq!(Some(d.step), first_diff);
    assert_eq!(d.field, "digest");
}

fn ep_monsters(ep: &Episode) -> Vec<Pos> {
    match ep.state() {
        GameState::Maze(s) => s.monsters.clone(),
        _ => vec![],
    }
}

#[test]
fn no_props_rejects_prop_actions() {
    let inst = match2_instance(Level::Easy, 3);
    let flags = Flags {
        no_props: true,
        ..Flags::default()
    };
    let mut ep = Episode::start(&inst, "t", flags).unwrap();
    let GameState::Match2(s) = ep.state() else { unreachable!() };
    assert!(s.legal_actions().iter().all(|a| a.prop().is_none()));
    for a in [MatchAction::Row(0), MatchAction::Col(1), MatchAction::Bomb(Pos::new(2, 2)), MatchAction::Hammer(Pos::new(0, 0))] {
        let step = ep.apply(LoggedAction::Match2(a), vec![], 0).unwrap();
        assert_eq!(step.error.as_deref(), Some("OutOfProp"));
    }
    let GameState::Match2(s) = ep.state() else { unreachable!() };
    assert_eq!(s.steps_remaining, s.max_steps);
    assert_eq!((s.api_calls, s.valid_calls), (4, 0));
}

#[test]
fn parse_failures_count_as_invalid_calls() {
    let backend = Arc::new(ScriptedBackend::new(["??", r#"{"action": {"type": "hammer", "pos": [0, 0]}}"#, r#"{"action": null}"#]));
    let mut agent = LlmAgent::new(backend, vec![]);
    let log = run_episode(&match2_instance(Level::Easy, 4), &mut agent, Flags::default()).unwrap();
    let Some(EpisodeMetrics::Match2(m)) = log.metrics() else { panic!() };
    // Calls: one parse failure, one hammer, one forfeit.
    assert!((m.api_eff - 100.0 / 3.0).abs() < 1e-9);
    assert_eq!(m.steps_used, 1);
    assert!(replay_verify(&log));
}

#[test]
fn backend_exhaustion_aborts() {
    let backend = Arc::new(ScriptedBackend::new(["Action: 9", "Action: 3"]));
    let mut agent = LlmAgent::new(backend, vec![]);
    let log = run_episode(&maze_instance(Level::Easy, 4), &mut agent, Flags::default()).unwrap();
    assert!(log.is_aborted());
    assert_eq!(log.steps.len(), 2);
    assert_eq!(log.terminal.status, "aborted");
    assert!(log.metrics().is_none());
    assert!(replay_verify(&log));
}

struct Stubborn;

impl Agent for Stubborn {
    fn id(&self) -> String {
        "stubborn".into()
    }

    fn decide_maze(&mut self, _: &MazeState, _: &Flags) -> Result<Turn<MazeAction>, AgentError> {
        unreachable!()
    }

    fn decide_match2(&mut self, _: &MatchState, _: &Flags) -> Result<Turn<MatchAction>, AgentError> {
        Ok(Turn {
            decision: Decision::Act(MatchAction::Row(99)),
            exchanges: vec![],
            parse_failures: 0,
        })
    }
}

#[test]
fn rejected_actions_hit_the_call_cap() {
    let inst = match2_instance(Level::Easy, 4);
    let log = run_episode(&inst, &mut Stubborn, Flags::default()).unwrap();
    let Instance::Match2(cfg) = &inst else { unreachable!() };
    assert!(log.terminal.capped);
    assert_eq!(log.steps.len() as u32, cfg.max_steps * MATCH2_CALL_CAP_FACTOR);
    assert_eq!(log.terminal.status, "failure");
    assert!(replay_verify(&log));
}

fn maze_log(agent: &str, level: Level, m: MazeEpisodeMetrics) -> EpisodeLog {
    let inst = maze_instance(level, 1);
    let mut ep = Episode::start(&inst, agent, Flags::default()).unwrap();
    ep.expire();
    let mut log = ep.finish(None);
    log.terminal.metrics = Some(EpisodeMetrics::Maze(m));
    log
}

fn mm(success: bool, score: i64, steps: u32, explor: f64) -> MazeEpisodeMetrics {
    MazeEpisodeMetrics {
        success,
        score,
        steps,
        explor,
        gold: 0.0,
        rem_hp: 3,
        kills: 0,
        barr: 0,
    }
}

#[test]
fn aggregate_fixture() {
    let logs = vec![
        maze_log("m", Level::Easy, mm(true, 100, 10, 100.0)),
        maze_log("m", Level::Easy, mm(false, 200, 20, 50.0)),
        maze_log("m", Level::Medium, mm(false, 300, 30, 0.0)),
    ];
    let r = aggregate(&logs).unwrap();
    let all = r.row("m", None).unwrap();
    assert_eq!(all.samples, 3);
    assert_eq!(all.metrics.a_score(), 200.0);
    assert_eq!(format!("{:.2}", all.metrics.suc_rate()), "33.33");
    assert!(r.row("m", Some(Level::Hard)).is_none());
    let easy = r.row("m", Some(Level::Easy)).unwrap();
    assert_eq!(easy.metrics.values()[3], 75.0);
    // All-levels equals the sample-weighted mean of level rows.
    let weighted: f64 = r
        .rows
        .iter()
        .filter(|row| row.level.is_some())
        .map(|row| row.metrics.a_score() * row.samples as f64)
        .sum::<f64>()
        / 3.0;
    assert_eq!(weighted, all.metrics.a_score());
}

#[test]
fn aggregate_is_permutation_invariant() {
    let mut logs = vec![
        maze_log("m", Level::Easy, mm(true, 100, 10, 100.0)),
        maze_log("m", Level::Hard, mm(false, -200, 20, 50.0)),
        maze_log("n", Level::Medium, mm(false, 300, 30, 10.0)),
    ];
    let a = aggregate(&logs).unwrap();
    logs.reverse();
    assert_eq!(aggregate(&logs).unwrap(), a);
}

#[test]
fn aggregate_rejects_mixed_games_and_skips_aborted() {
    let mut logs = vec![maze_log("m", Level::Easy, mm(true, 100, 10, 100.0))];
    let mut aborted = maze_log("m", Level::Easy, mm(false, -9999, 99, 0.0));
    aborted.terminal.aborted = Some("backend".into());
    logs.push(aborted);
    let r = aggregate(&logs).unwrap();
    assert_eq!(r.aborted, 1);
    assert_eq!(r.row("m", None).unwrap().samples, 1);
    assert_eq!(r.row("m", None).unwrap().metrics.a_score(), 100.0);

    let m2 = run_episode(&match2_instance(Level::Easy, 1), bfs().as_mut(), Flags::default()).unwrap();
    logs.push(m2);
    assert!(matches!(aggregate(&logs), Err(HarnessError::MixedGames)));
}

#[test]
fn report_columns_match_tables() {
    let logs = vec![maze_log("m", Level::Easy, mm(true, 100, 10, 100.0))];
    let r = aggregate(&logs).unwrap();
    let csv = r.to_csv();
    assert!(csv.starts_with("Model,Samp.,Suc.Rate,A.Score,A.steps,A.Explor.,A.Gold,Rem.HP,A.kills,A.Barr.\n"));
    let m2 = run_episode(&match2_instance(Level::Easy, 1), bfs().as_mut(), Flags::default()).unwrap();
    let r2 = aggregate(&[m2]).unwrap();
    assert!(r2.to_csv().starts_with("Model,Sample,Suc.Rate,A.score,R/M.S,Score/Step,Clear/Step,API Eff\n"));
    assert_eq!(r2.to_table_json()["columns"].as_array().unwrap().len(), 8);
    let _: MatchEpisodeMetrics = match r2.rows[0].metrics {
        RowMetrics::Match2 { .. } => MatchEpisodeMetrics {
            success: false,
            score: 0,
            rms: 0.0,
            score_per_step: 0.0,
            clear_per_step: 0.0,
            api_eff: 0.0,
            steps_used: 0,
            tiles_cleared: 0,
        },
        _ => panic!("wrong row kind"),
    };
}

#[test]
fn suite_writes_logs_reports_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let instances = generate_suite(Game::Maze, &Level::ALL, 2, 5).unwrap();
    let agents: Vec<&dyn AgentFactory> = vec![&ScriptedKind::Bfs, &ScriptedKind::Frontier];
    let out = run_suite(&instances, &agents, Flags::default(), 4, dir.path()).unwrap();
    assert_eq!(out.logs.len(), 12);
    assert_eq!(std::fs::read_dir(dir.path().join("logs")).unwrap().count(), 12);
    assert_eq!(out.report.all_levels().count(), 2);
    let hist: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("steps_histogram.json")).unwrap()).unwrap();
    let total: u64 = hist["counts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 12);
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();

    let dir2 = tempfile::tempdir().unwrap();
    run_suite(&instances, &agents, Flags::default(), 1, dir2.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir2.path().join("report.csv")).unwrap(), report);
    let reread = read_log_dir(&dir.path().join("logs")).unwrap();
    assert_eq!(reread.len(), 12);
    assert!(reread.iter().all(replay_verify));
}
