use std::fmt::Write;

use super::{select_highlights, Experience, ExperienceSource, ExpVerError, HighlightKind, Highlights};
use crate::agent::ChatBackend;
use crate::harness::{EpisodeLog, EpisodeMetrics};

/// Extra attempts after the first unparseable summary.
pub const SUMMARY_RETRIES: u32 = 2;

const ANALYST_SYSTEM: &str = "You are an expert game analyst. Review agent play sessions and report concrete strengths and weaknesses.";

/// Reasoning excerpts longer than this are cut.
const EXCERPT_CHARS: usize = 600;

const TASKS: &str = "\
## Analysis Tasks:

1. List the strengths demonstrated in this session. Provide as many as you can identify.

2. List the weaknesses or areas for improvement from this session. Provide as many as you can identify.

Please format your response as follows:

Strengths:
- [Strength 1]
- [Strength 2]
- [Strength 3]
...

Weaknesses:
- [Weakness 1]
- [Weakness 2]
- [Weakness 3]
...";

fn excerpt(text: &str) -> String {
    let text = text.trim();
    match text.char_indices().nth(EXCERPT_CHARS) {
        Some((cut, _)) => format!("{}...", &text[..cut]),
        None => text.to_string(),
    }
}

pub fn analysis_prompt(metrics: &EpisodeMetrics, highlights: &Highlights) -> String {
    let mut out = String::from(
        "# Game Session Analysis\n\nPlease analyze the following game session and provide insights about the agent's performance.\n\n## Game Metrics:\n",
    );
    for (k, v) in metrics.bullets() {
        let _ = writeln!(out, "- {k}: {v}");
    }
    out.push_str("\n## Session Highlights:\n");
    for h in &highlights.steps {
        let label = match h.kind {
            HighlightKind::Beginning => "Beginning",
            HighlightKind::Key => "Key Moment",
            HighlightKind::End => "End",
        };
        let _ = write!(
            out,
            "\nStep {} ({label}):\nAgent's reasoning: {}\n",
            h.step,
            excerpt(&h.reasoning)
        );
    }
    out.push('\n');
    out.push_str(TASKS);
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Strengths,
    Weaknesses,
}

fn header(line: &str) -> Option<(Section, &str)> {
    let t = line.trim_start_matches(['#', '*', ' ']);
    let lower = t.to_ascii_lowercase();
    let (section, word) = if lower.starts_with("strengths") {
        (Section::Strengths, "strengths")
    } else if lower.starts_with("weaknesses") {
        (Section::Weaknesses, "weaknesses")
    } else {
        return None;
    };
    let rest = t[word.len()..].trim_start_matches(['*', ' ']);
    let rest = rest.strip_prefix(':')?;
    Some((section, rest.trim_matches(['*', ' '])))
}

fn bullet(line: &str) -> Option<&str> {
    let t = line.trim();
    let body = if let Some(r) = t.strip_prefix(['-', '*', '•']) {
        r
    } else {
        let digits = t.len() - t.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 {
            return None;
        }
        t[digits..].strip_prefix(['.', ')'])?
    };
    let body = body.trim().trim_matches('*').trim();
    (!body.is_empty()).then_some(body)
}

/// Parses the `Strengths:` / `Weaknesses:` lists. Both headers must be
/// present and at least one bullet found.
pub fn parse_experience(text: &str) -> Option<(Vec<String>, Vec<String>)> {
    let mut strengths = Vec::new();
    let mut weaknesses = Vec::new();
    let (mut saw_s, mut saw_w) = (false, false);
    let mut section = Section::None;
    for line in text.lines() {
        if let Some((s, inline)) = header(line) {
            section = s;
            match s {
                Section::Strengths => saw_s = true,
                Section::Weaknesses => saw_w = true,
                Section::None => {}
            }
            if !inline.is_empty() {
                let target = if s == Section::Strengths { &mut strengths } else { &mut weaknesses };
                target.push(inline.to_string());
            }
            continue;
        }
        let Some(b) = bullet(line) else { continue };
        match section {
            Section::Strengths => strengths.push(b.to_string()),
            Section::Weaknesses => weaknesses.push(b.to_string()),
            Section::None => {}
        }
    }
    (saw_s && saw_w && strengths.len() + weaknesses.len() > 0).then_some((strengths, weaknesses))
}

/// Asks the backend to abstract a finished episode into an experience.
pub fn summarize(
    log: &EpisodeLog,
    episode_id: &str,
    backend: &dyn ChatBackend,
    k: usize,
    retries: u32,
) -> Result<Experience, ExpVerError> {
    if let Some(reason) = &log.terminal.aborted {
        return Err(ExpVerError::Aborted(reason.clone()));
    }
    let metrics = log.metrics().ok_or(ExpVerError::EmptyLog)?.clone();
    if log.steps.is_empty() {
        return Err(ExpVerError::EmptyLog);
    }
    let prompt = analysis_prompt(&metrics, &select_highlights(log, k));
    let attempts = retries + 1;
    for attempt in 1..=attempts {
        let user = if attempt == 1 { prompt.clone() } else { crate::agent::prompt::reask(&prompt) };
        let reply = backend.complete(ANALYST_SYSTEM, &user)?;
        if let Some((strengths, weaknesses)) = parse_experience(&reply.response) {
            return Ok(Experience {
                strengths,
                weaknesses,
                source: ExperienceSource {
                    game: log.header.game,
                    level: log.header.level,
                    seed: log.header.seed,
                    episode_id: episode_id.to_string(),
                },
                metrics,
            });
        }
        tracing::debug!(attempt, "summary missing strengths/weaknesses lists");
    }
    Err(ExpVerError::SummaryParseFailure { attempts })
}
