use std::fmt;

use serde::{Deserialize, Serialize};

use super::MazeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
        }
    }

    fn index(self) -> u8 {
        match self {
            Direction::Up => 0,
            Direction::Down => 1,
            Direction::Left => 2,
            Direction::Right => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Up => "UP",
            Direction::Down => "DOWN",
            Direction::Left => "LEFT",
            Direction::Right => "RIGHT",
        }
    }
}

/// One of the twelve maze moves: `id = direction·3 + (steps − 1)` with the
/// direction order Up, Down, Left, Right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct MazeAction(u8);

impl MazeAction {
    pub const COUNT: u32 = 12;

    pub fn new(direction: Direction, steps: u8) -> Result<Self, MazeError> {
        if !(1..=3).contains(&steps) {
            return Err(MazeError::MalformedAction(u32::from(steps)));
        }
        Ok(MazeAction(direction.index() * 3 + steps - 1))
    }

    pub fn from_id(id: u32) -> Result<Self, MazeError> {
        if id < Self::COUNT {
            Ok(MazeAction(id as u8))
        } else {
            Err(MazeError::MalformedAction(id))
        }
    }

    pub fn id(self) -> u32 {
        u32::from(self.0)
    }

    pub fn direction(self) -> Direction {
        Direction::ALL[usize::from(self.0 / 3)]
    }

    pub fn steps(self) -> u8 {
        self.0 % 3 + 1
    }

    pub fn all() -> impl Iterator<Item = MazeAction> {
        (0..Self::COUNT).map(|id| MazeAction(id as u8))
    }
}

impl TryFrom<u32> for MazeAction {
    type Error = MazeError;

    fn try_from(id: u32) -> Result<Self, Self::Error> {
        MazeAction::from_id(id)
    }
}

impl From<MazeAction> for u32 {
    fn from(a: MazeAction) -> u32 {
        a.id()
    }
}

impl fmt::Display for MazeAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let steps = self.steps();
        let unit = if steps == 1 { "step" } else { "steps" };
        write!(f, "Move {} {steps} {unit}", self.direction().label())
    }
}
