use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;

use crate::match2::MatchAction;
use crate::maze::MazeAction;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFailure {
    #[error("no `Action: <n>` in response")]
    NoMazeAction,
    #[error("action id {0} out of range 0..11")]
    OutOfRange(u64),
    #[error("no JSON object with an \"action\" key")]
    NoJsonAction,
    #[error("action object does not match schema: {0}")]
    Schema(String),
}

/// Parsed match-2 response: an action, or an explicit `null`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Match2Reply {
    Act(MatchAction),
    NoAction,
}

fn maze_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)action\s*:\s*\**\s*(\d+)").expect("valid regex"))
}

/// The last `Action: <n>` in the text, tolerating markdown bold.
pub fn parse_maze_action(text: &str) -> Result<MazeAction, ParseFailure> {
    let caps = maze_re().captures_iter(text).last().ok_or(ParseFailure::NoMazeAction)?;
    let digits = &caps[1];
    let id: u64 = digits.parse().map_err(|_| ParseFailure::OutOfRange(u64::MAX))?;
    u32::try_from(id)
        .ok()
        .and_then(|id| MazeAction::from_id(id).ok())
        .ok_or(ParseFailure::OutOfRange(id))
}

pub fn format_maze_action(action: MazeAction) -> String {
    format!("Action: {}", action.id())
}

/// The last JSON object in the text that has an `"action"` key. Prose and
/// code fences around it are ignored.
pub fn parse_match2_action(text: &str) -> Result<Match2Reply, ParseFailure> {
    let obj = last_action_object(text).ok_or(ParseFailure::NoJsonAction)?;
    match obj.get("action") {
        Some(Value::Null) => Ok(Match2Reply::NoAction),
        Some(v) => serde_json::from_value::<MatchAction>(v.clone())
            .map(Match2Reply::Act)
            .map_err(|e| ParseFailure::Schema(e.to_string())),
        None => Err(ParseFailure::NoJsonAction),
    }
}

fn last_action_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    let starts: Vec<usize> = text.match_indices('{').map(|(i, _)| i).collect();
    starts.into_iter().rev().find_map(|i| {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) if map.contains_key("action") => Some(map),
            _ => None,
        }
    })
}

pub fn format_match2_action(reply: Match2Reply) -> String {
    match reply {
        Match2Reply::Act(a) => a.to_response_json(),
        Match2Reply::NoAction => r#"{"action": null}"#.to_string(),
    }
}
