use serde::{Deserialize, Serialize};

use crate::harness::EpisodeLog;

pub const DEFAULT_HIGHLIGHTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighlightKind {
    Beginning,
    Key,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    /// 1-based step index in the log.
    pub step: u32,
    pub kind: HighlightKind,
    pub reasoning: String,
    pub reward_delta: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlights {
    pub steps: Vec<Highlight>,
}

impl Highlights {
    pub fn indices(&self) -> Vec<u32> {
        self.steps.iter().map(|h| h.step).collect()
    }
}

/// Picks the first two steps, the last step and the largest |reward delta|
/// steps, at most `k` in total, in log order.
pub fn select_highlights(log: &EpisodeLog, k: usize) -> Highlights {
    let n = log.steps.len();
    if n == 0 || k == 0 {
        return Highlights::default();
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for i in [0, n - 1, 1] {
        if i < n && chosen.len() < k && !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    let mut rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
    rest.sort_by_key(|&i| (std::cmp::Reverse(log.steps[i].reward_delta.unsigned_abs()), i));
    chosen.extend(rest.into_iter().take(k.saturating_sub(chosen.len())));
    chosen.sort_unstable();

    let steps = chosen
        .into_iter()
        .map(|i| {
            let s = &log.steps[i];
            let kind = if i == n - 1 {
                HighlightKind::End
            } else if i < 2 {
                HighlightKind::Beginning
            } else {
                HighlightKind::Key
            };
            Highlight {
                step: i as u32 + 1,
                kind,
                reasoning: s.reasoning(),
                reward_delta: s.reward_delta,
            }
        })
        .collect();
    Highlights { steps }
}
