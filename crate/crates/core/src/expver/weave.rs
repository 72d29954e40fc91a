use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ExpVerError, Truth, TruthRepository};
use crate::agent::ChatBackend;

const ORGANIZER_SYSTEM: &str = "You maintain a knowledge base of verified game strategy entries.";

const REQUIREMENTS: &str = "\
## Organization Requirements:
1. Identify and remove completely duplicate knowledge entries
2. For knowledge entries that are highly similar in meaning but different in expression, merge them into a more comprehensive entry
3. When merging, preserve the specificity and core meaning of the original knowledge, don't lose key details
4. Merged entries should be concise but not at the expense of important information
5. If two knowledge points only have minimal similarities, keep them as separate entries
6. Knowledge entries without clear similarities should remain unchanged

## Please return the organized knowledge base in the following format:
[Organized knowledge entry 1]
[Organized knowledge entry 2] ...

Note: This is a progressive knowledge organization process, you do not need to force a reduction in the number of entries. Only merge or remove entries when there is genuine high similarity or duplication.";

/// Minimum share of an entry's words a merged line must contain to inherit
/// its provenance.
const INHERIT_OVERLAP: f64 = 0.5;

pub fn organize_prompt(entries: &[Truth]) -> String {
    let mut out = String::from(
        "# Game Truth Knowledge Organization Task\n\nPlease review and organize the following game truth knowledge entries. This is a progressive knowledge organization process to identify and remove duplicates while considering merging highly similar entries.\n\n## Current Knowledge Entries:\n",
    );
    for (i, t) in entries.iter().enumerate() {
        let _ = writeln!(out, "{}. {} (Source: {})", i + 1, t.text, t.provenance.join(", "));
    }
    out.push('\n');
    out.push_str(REQUIREMENTS);
    out
}

/// One line of organizer output, with any sources it echoed back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrganizedEntry {
    pub text: String,
    pub sources: Vec<String>,
}

fn strip_marker(line: &str) -> &str {
    let t = line.trim();
    if let Some(r) = t.strip_prefix(['-', '*', '•']) {
        return r.trim();
    }
    let digits = t.len() - t.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        if let Some(r) = t[digits..].strip_prefix(['.', ')']) {
            return r.trim();
        }
    }
    t
}

fn split_sources(text: &str) -> (&str, Vec<String>) {
    if let Some(open) = text.rfind("(Source:") {
        if let Some(inner) = text[open..].strip_prefix("(Source:").and_then(|r| r.trim_end().strip_suffix(')')) {
            let sources = inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            return (text[..open].trim_end(), sources);
        }
    }
    (text, Vec::new())
}

/// Entry lines from an organizer reply. Headings and blank lines are skipped.
pub fn parse_organized(text: &str) -> Vec<OrganizedEntry> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("```"))
        .filter_map(|l| {
            let (mut text, sources) = split_sources(strip_marker(l));
            if let Some(inner) = text.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                text = inner;
            }
            let text = text.trim();
            (!text.is_empty()).then(|| OrganizedEntry {
                text: text.to_string(),
                sources,
            })
        })
        .collect()
}

fn words(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.len() > 2)
        .map(str::to_lowercase)
        .collect()
}

fn overlap(line: &BTreeSet<String>, entry: &BTreeSet<String>) -> f64 {
    if entry.is_empty() {
        return 0.0;
    }
    line.intersection(entry).count() as f64 / entry.len() as f64
}

fn union(into: &mut Vec<String>, from: &[String]) {
    for p in from {
        if !into.contains(p) {
            into.push(p.clone());
        }
    }
}

/// Maps organizer output back onto source entries. Exact copies keep the
/// original entry; rewritten lines inherit provenance from every entry they
/// substantially cover, or echoed sources when those are known ids.
fn resolve(organized: Vec<OrganizedEntry>, pool: &[Truth], incoming: &[Truth], revision: u32) -> Vec<Truth> {
    let known: BTreeSet<&str> = pool.iter().flat_map(|t| t.provenance.iter().map(String::as_str)).collect();
    let pool_words: Vec<BTreeSet<String>> = pool.iter().map(|t| words(&t.text)).collect();
    let mut out: Vec<Truth> = Vec::new();
    for entry in organized {
        if out.iter().any(|t| t.text == entry.text) {
            continue;
        }
        let exact: Vec<&Truth> = pool.iter().filter(|t| t.text == entry.text).collect();
        if let Some(first) = exact.first() {
            let mut t = (*first).clone();
            for other in &exact[1..] {
                union(&mut t.provenance, &other.provenance);
            }
            out.push(t);
            continue;
        }
        let mut provenance = Vec::new();
        let w = words(&entry.text);
        let scores: Vec<f64> = pool_words.iter().map(|pw| overlap(&w, pw)).collect();
        for (t, &s) in pool.iter().zip(&scores) {
            if s >= INHERIT_OVERLAP {
                union(&mut provenance, &t.provenance);
            }
        }
        if entry.sources.iter().all(|s| known.contains(s.as_str())) {
            union(&mut provenance, &entry.sources);
        }
        if provenance.is_empty() {
            let best = scores
                .iter()
                .enumerate()
                .filter(|(_, &s)| s > 0.0)
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i);
            match best {
                Some(i) => union(&mut provenance, &pool[i].provenance),
                None => incoming.iter().for_each(|t| union(&mut provenance, &t.provenance)),
            }
        }
        out.push(Truth {
            text: entry.text,
            provenance,
            verified: true,
            revision,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaintainOutcome {
    pub before: usize,
    pub after: usize,
    /// Why the organized list was discarded in favour of a plain append.
    pub fallback: Option<String>,
}

/// Appends `incoming` unchanged as a new version.
pub fn append_verbatim(repo: &mut TruthRepository, incoming: Vec<Truth>) -> MaintainOutcome {
    let before = repo.len();
    let mut truths = repo.truths.clone();
    truths.extend(incoming);
    repo.commit(truths);
    MaintainOutcome {
        before,
        after: repo.len(),
        fallback: None,
    }
}

/// Merges `incoming` into the repository through the organizer prompt.
/// Empty or drastically shrunken results fall back to a plain append.
pub fn maintain(
    repo: &mut TruthRepository,
    incoming: Vec<Truth>,
    backend: &dyn ChatBackend,
    revision: u32,
) -> Result<MaintainOutcome, ExpVerError> {
    let before = repo.len();
    let pool: Vec<Truth> = repo.truths.iter().chain(&incoming).cloned().collect();
    if pool.is_empty() {
        repo.commit(Vec::new());
        return Ok(MaintainOutcome {
            before,
            after: 0,
            fallback: None,
        });
    }
    let reply = backend.complete(ORGANIZER_SYSTEM, &organize_prompt(&pool))?;
    let organized = resolve(parse_organized(&reply.response), &pool, &incoming, revision);

    let reason = if organized.is_empty() {
        Some("organizer returned no entries".to_string())
    } else if organized.len() * 2 < pool.len() {
        Some(format!("organizer shrank {} entries to {}", pool.len(), organized.len()))
    } else {
        None
    };
    if let Some(reason) = reason {
        tracing::warn!(%reason, "truth maintenance rejected, appending verbatim");
        let mut out = append_verbatim(repo, incoming);
        out.fallback = Some(reason);
        return Ok(out);
    }
    repo.commit(organized);
    Ok(MaintainOutcome {
        before,
        after: repo.len(),
        fallback: None,
    })
}
