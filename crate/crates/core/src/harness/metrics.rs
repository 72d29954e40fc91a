use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::log::{EpisodeLog, EpisodeMetrics};
use super::HarnessError;
use crate::{Game, Level};

pub const MAZE_COLUMNS: [&str; 10] = [
    "Model", "Samp.", "Suc.Rate", "A.Score", "A.steps", "A.Explor.", "A.Gold", "Rem.HP", "A.kills", "A.Barr.",
];

pub const MATCH2_COLUMNS: [&str; 8] = [
    "Model", "Sample", "Suc.Rate", "A.score", "R/M.S", "Score/Step", "Clear/Step", "API Eff",
];

pub fn columns(game: Game) -> &'static [&'static str] {
    match game {
        Game::Maze => &MAZE_COLUMNS,
        Game::Match2 => &MATCH2_COLUMNS,
    }
}

/// Means over one bucket of episodes. Percentages are on a 0–100 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowMetrics {
    Maze {
        suc_rate: f64,
        a_score: f64,
        a_steps: f64,
        a_explor: f64,
        a_gold: f64,
        rem_hp: f64,
        a_kills: f64,
        a_barr: f64,
    },
    Match2 {
        suc_rate: f64,
        a_score: f64,
        rms: f64,
        score_per_step: f64,
        clear_per_step: f64,
        api_eff: f64,
    },
}

impl RowMetrics {
    pub fn suc_rate(&self) -> f64 {
        match self {
            RowMetrics::Maze { suc_rate, .. } | RowMetrics::Match2 { suc_rate, .. } => *suc_rate,
        }
    }

    pub fn a_score(&self) -> f64 {
        match self {
            RowMetrics::Maze { a_score, .. } | RowMetrics::Match2 { a_score, .. } => *a_score,
        }
    }

    /// Values in table-column order, after `Model` and the sample count.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            RowMetrics::Maze {
                suc_rate,
                a_score,
                a_steps,
                a_explor,
                a_gold,
                rem_hp,
                a_kills,
                a_barr,
            } => vec![suc_rate, a_score, a_steps, a_explor, a_gold, rem_hp, a_kills, a_barr],
            RowMetrics::Match2 {
                suc_rate,
                a_score,
                rms,
                score_per_step,
                clear_per_step,
                api_eff,
            } => vec![suc_rate, a_score, rms, score_per_step, clear_per_step, api_eff],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    /// `None` for the all-levels row.
    pub level: Option<Level>,
    pub samples: usize,
    pub metrics: RowMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub game: Game,
    pub rows: Vec<ReportRow>,
    /// Aborted episodes, excluded from every mean.
    pub aborted: usize,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn bucket_metrics(game: Game, ms: &[&EpisodeMetrics]) -> RowMetrics {
    let suc_rate = 100.0 * mean(ms.iter().map(|m| f64::from(u8::from(m.success()))));
    let a_score = mean(ms.iter().map(|m| m.score() as f64));
    match game {
        Game::Maze => {
            let maze: Vec<_> = ms
                .iter()
                .filter_map(|m| match m {
                    EpisodeMetrics::Maze(m) => Some(m),
                    _ => None,
                })
                .collect();
            RowMetrics::Maze {
                suc_rate,
                a_score,
                a_steps: mean(maze.iter().map(|m| f64::from(m.steps))),
                a_explor: mean(maze.iter().map(|m| m.explor)),
                a_gold: mean(maze.iter().map(|m| m.gold)),
                rem_hp: mean(maze.iter().map(|m| f64::from(m.rem_hp))),
                a_kills: mean(maze.iter().map(|m| f64::from(m.kills))),
                a_barr: mean(maze.iter().map(|m| f64::from(m.barr))),
            }
        }
        Game::Match2 => {
            let m2: Vec<_> = ms
                .iter()
                .filter_map(|m| match m {
                    EpisodeMetrics::Match2(m) => Some(m),
                    _ => None,
                })
                .collect();
            RowMetrics::Match2 {
                suc_rate,
                a_score,
                rms: mean(m2.iter().map(|m| m.rms)),
                score_per_step: mean(m2.iter().map(|m| m.score_per_step)),
                clear_per_step: mean(m2.iter().map(|m| m.clear_per_step)),
                api_eff: mean(m2.iter().map(|m| m.api_eff)),
            }
        }
    }
}

/// Per-(model, level) means plus one all-levels row per model. Empty buckets
/// produce no row.
pub fn aggregate(logs: &[EpisodeLog]) -> Result<MetricsReport, HarnessError> {
    let Some(first) = logs.first() else {
        return Err(HarnessError::EmptyLogs);
    };
    let game = first.header.game;
    if logs.iter().any(|l| l.header.game != game) {
        return Err(HarnessError::MixedGames);
    }
    let mut by_model: BTreeMap<&str, BTreeMap<Level, Vec<&EpisodeMetrics>>> = BTreeMap::new();
    let mut aborted = 0;
    for log in logs {
        match log.metrics() {
            Some(m) if !log.is_aborted() => by_model
                .entry(log.header.agent.as_str())
                .or_default()
                .entry(log.header.level)
                .or_default()
                .push(m),
            _ => aborted += 1,
        }
    }
    let mut rows = Vec::new();
    for (model, levels) in by_model {
        let mut pooled = Vec::new();
        for (level, ms) in levels {
            rows.push(ReportRow {
                model: model.to_string(),
                level: Some(level),
                samples: ms.len(),
                metrics: bucket_metrics(game, &ms),
            });
            pooled.extend(ms);
        }
        rows.push(ReportRow {
            model: model.to_string(),
            level: None,
            samples: pooled.len(),
            metrics: bucket_metrics(game, &pooled),
        });
    }
    Ok(MetricsReport { game, rows, aborted })
}

impl MetricsReport {
    pub fn columns(&self) -> &'static [&'static str] {
        columns(self.game)
    }

    /// Table cells with two decimals; the level is appended to the model name.
    pub fn cells(&self, row: &ReportRow) -> Vec<String> {
        let level = row.level.map_or("all".to_string(), |l| l.to_string());
        let mut out = vec![format!("{} ({level})", row.model), row.samples.to_string()];
        out.extend(row.metrics.values().iter().map(|v| format!("{v:.2}")));
        out
    }

    pub fn all_levels(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.level.is_none())
    }

    pub fn row(&self, model: &str, level: Option<Level>) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.model == model && r.level == level)
    }

    pub fn to_csv(&self) -> String {
        let quote = |s: &str| {
            if s.contains([',', '"']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        let mut out = self.columns().iter().map(|c| quote(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&self.cells(row).iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// `{"game", "columns", "rows": [[...]], "aborted"}` with column names as
    /// printed in the tables.
    pub fn to_table_json(&self) -> serde_json::Value {
        serde_json::json!({
            "game": self.game,
            "columns": self.columns(),
            "rows": self.rows.iter().map(|r| self.cells(r)).collect::<Vec<_>>(),
            "aborted": self.aborted,
        })
    }

    /// Fixed-width text table.
    pub fn to_text(&self) -> String {
        let cols = self.columns();
        let body: Vec<Vec<String>> = self.rows.iter().map(|r| self.cells(r)).collect();
        let widths: Vec<usize> = (0..cols.len())
            .map(|i| body.iter().map(|r| r[i].len()).chain([cols[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: Vec<String>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(cols.iter().map(|c| c.to_string()).collect());
        for r in body {
            out.push('\n');
            out.push_str(&line(r));
        }
        out
    }
}

/// Count of episodes per steps value (bin width 1).
pub fn steps_histogram(logs: &[EpisodeLog]) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for m in logs.iter().filter(|l| !l.is_aborted()).filter_map(EpisodeLog::metrics) {
        *h.entry(m.steps()).or_insert(0) += 1;
    }
    h
}
