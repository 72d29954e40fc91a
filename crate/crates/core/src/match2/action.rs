use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prop {
    Row,
    Col,
    Bomb,
    Hammer,
}

impl Prop {
    pub const ALL: [Prop; 4] = [Prop::Row, Prop::Col, Prop::Bomb, Prop::Hammer];

    /// Points deducted from the score when the prop is used.
    pub fn cost(self) -> i64 {
        match self {
            Prop::Row | Prop::Col => 32,
            Prop::Bomb => 12,
            Prop::Hammer => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Prop::Row => "row",
            Prop::Col => "col",
            Prop::Bomb => "bomb",
            Prop::Hammer => "hammer",
        }
    }
}

/// A match-2 move. Wire form: `{"type": "eliminate", "pos": [i, j]}` or
/// `{"type": "row", "index": k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchAction {
    Eliminate(Pos),
    Row(usize),
    Col(usize),
    Bomb(Pos),
    Hammer(Pos),
}

impl MatchAction {
    pub fn prop(self) -> Option<Prop> {
        match self {
            MatchAction::Eliminate(_) => None,
            MatchAction::Row(_) => Some(Prop::Row),
            MatchAction::Col(_) => Some(Prop::Col),
            MatchAction::Bomb(_) => Some(Prop::Bomb),
            MatchAction::Hammer(_) => Some(Prop::Hammer),
        }
    }

    pub fn type_name(self) -> &'static str {
        self.prop().map_or("eliminate", Prop::name)
    }

    pub fn in_range(self, size: usize) -> bool {
        match self {
            MatchAction::Eliminate(p) | MatchAction::Bomb(p) | MatchAction::Hammer(p) => {
                p.row < size && p.col < size
            }
            MatchAction::Row(i) | MatchAction::Col(i) => i < size,
        }
    }

    pub fn to_json(self) -> serde_json::Value {
        serde_json::to_value(self).expect("action serializes")
    }

    /// The full response object, `{"action": {...}}`.
    pub fn to_response_json(self) -> String {
        let inner = serde_json::to_string(&self).expect("action serializes");
        format!("{{\"action\": {inner}}}")
    }
}

impl fmt::Display for MatchAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchAction::Eliminate(p) | MatchAction::Bomb(p) | MatchAction::Hammer(p) => {
                write!(f, "{} at {p}", self.type_name())
            }
            MatchAction::Row(i) | MatchAction::Col(i) => write!(f, "{} {i}", self.type_name()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<usize>,
}

impl Serialize for MatchAction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (pos, index) = match *self {
            MatchAction::Eliminate(p) | MatchAction::Bomb(p) | MatchAction::Hammer(p) => (Some(p.into()), None),
            MatchAction::Row(i) | MatchAction::Col(i) => (None, Some(i)),
        };
        Wire {
            kind: self.type_name().to_string(),
            pos,
            index,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatchAction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let pos = || w.pos.map(Pos::from).ok_or_else(|| D::Error::missing_field("pos"));
        let index = || w.index.ok_or_else(|| D::Error::missing_field("index"));
        Ok(match w.kind.to_ascii_lowercase().as_str() {
            "eliminate" => MatchAction::Eliminate(pos()?),
            "bomb" => MatchAction::Bomb(pos()?),
            "hammer" => MatchAction::Hammer(pos()?),
            "row" => MatchAction::Row(index()?),
            "col" | "column" => MatchAction::Col(index()?),
            other => return Err(D::Error::custom(format!("unknown action type `{other}`"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let a = MatchAction::Eliminate(Pos::new(4, 3));
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"type":"eliminate","pos":[4,3]}"#);
        assert_eq!(a.to_response_json(), r#"{"action": {"type":"eliminate","pos":[4,3]}}"#);
        assert_eq!(MatchAction::Row(2).to_json(), serde_json::json!({"type": "row", "index": 2}));
        let back: MatchAction = serde_json::from_str(r#"{"type": "bomb", "pos": [2, 2]}"#).unwrap();
        assert_eq!(back, MatchAction::Bomb(Pos::new(2, 2)));
    }

    #[test]
    fn missing_fields_fail() {
        assert!(serde_json::from_str::<MatchAction>(r#"{"type": "row"}"#).is_err());
        assert!(serde_json::from_str::<MatchAction>(r#"{"type": "hammer", "index": 1}"#).is_err());
        assert!(serde_json::from_str::<MatchAction>(r#"{"type": "swap", "pos": [1,1]}"#).is_err());
    }

    #[test]
    fn costs() {
        let costs: Vec<i64> = Prop::ALL.iter().map(|p| p.cost()).collect();
        assert_eq!(costs, vec![32, 32, 12, 4]);
    }
}
