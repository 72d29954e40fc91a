use std::collections::VecDeque;
use std::fmt;
use std::ops::{Index, IndexMut};

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Pos;

pub const SIZE: usize = 8;
pub const TILE_COUNT: usize = SIZE * SIZE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    A,
    B,
    C,
    D,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::A, Color::B, Color::C, Color::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Color::A => 'A',
            Color::B => 'B',
            Color::C => 'C',
            Color::D => 'D',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        match c {
            'A' => Some(Color::A),
            'B' => Some(Color::B),
            'C' => Some(Color::C),
            'D' => Some(Color::D),
            _ => None,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Color {
        Color::ALL[rng.gen_range(0..Color::ALL.len())]
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A cell is either a colored tile or empty (`None`).
pub type Tile = Option<Color>;

/// 8×8 board, row 0 on top. Serialized as eight lines of space-separated
/// letters, `.` for an empty cell.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MatchBoard {
    cells: [[Tile; SIZE]; SIZE],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    pub color: Color,
    /// Row-major sorted.
    pub cells: Vec<Pos>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl MatchBoard {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn filled(color: Color) -> Self {
        MatchBoard {
            cells: [[Some(color); SIZE]; SIZE],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut b = MatchBoard::empty();
        for p in Self::positions() {
            b[p] = Some(Color::random(rng));
        }
        b
    }

    pub fn positions() -> impl Iterator<Item = Pos> {
        (0..SIZE).flat_map(|r| (0..SIZE).map(move |c| Pos::new(r, c)))
    }

    /// Parses eight lines of eight letters (`A`–`D`, `.` or `null` for empty).
    pub fn parse(text: &str) -> Result<Self, String> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if rows.len() != SIZE {
            return Err(format!("expected {SIZE} rows, got {}", rows.len()));
        }
        let mut b = MatchBoard::empty();
        for (r, line) in rows.iter().enumerate() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != SIZE {
                return Err(format!("row {r}: expected {SIZE} cells, got {}", tokens.len()));
            }
            for (c, tok) in tokens.iter().enumerate() {
                b.cells[r][c] = match *tok {
                    "." | "null" => None,
                    t if t.len() == 1 => Some(
                        Color::from_letter(t.chars().next().unwrap_or(' '))
                            .ok_or_else(|| format!("row {r}: unknown tile `{t}`"))?,
                    ),
                    t => return Err(format!("row {r}: unknown tile `{t}`")),
                };
            }
        }
        Ok(b)
    }

    pub fn render(&self) -> String {
        self.cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| t.map_or('.', Color::letter).to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn empty_count(&self) -> usize {
        self.cells.iter().flatten().filter(|t| t.is_none()).count()
    }

    /// Per-color tile census.
    pub fn census(&self) -> [u32; 4] {
        let mut out = [0; 4];
        for c in self.cells.iter().flatten().flatten() {
            out[c.index()] += 1;
        }
        out
    }

    /// All maximal 4-connected same-color components of size ≥ 2, ordered by
    /// their first cell in row-major order.
    pub fn find_groups(&self) -> Vec<Group> {
        let mut seen = [[false; SIZE]; SIZE];
        let mut groups = Vec::new();
        for start in Self::positions() {
            if seen[start.row][start.col] {
                continue;
            }
            let Some(color) = self[start] else { continue };
            let cells = self.flood(start, color, &mut seen);
            if cells.len() >= 2 {
                groups.push(Group { color, cells });
            }
        }
        groups
    }

    /// The component containing `p`, of any size. Empty for an empty cell.
    pub fn group_at(&self, p: Pos) -> Option<Group> {
        let color = self[p]?;
        let mut seen = [[false; SIZE]; SIZE];
        Some(Group {
            color,
            cells: self.flood(p, color, &mut seen),
        })
    }

    fn flood(&self, start: Pos, color: Color, seen: &mut [[bool; SIZE]; SIZE]) -> Vec<Pos> {
        let mut cells = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start.row][start.col] = true;
        while let Some(p) = queue.pop_front() {
            cells.push(p);
            for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                if let Some(n) = p.offset(dr, dc, SIZE) {
                    if !seen[n.row][n.col] && self[n] == Some(color) {
                        seen[n.row][n.col] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        cells.sort();
        cells
    }

    /// Drops tiles straight down within each column, preserving order.
    /// Returns the number of empty cells left at the top.
    pub fn apply_gravity(&mut self) -> usize {
        let mut empties = 0;
        for c in 0..SIZE {
            let stack: Vec<Color> = (0..SIZE).filter_map(|r| self.cells[r][c]).collect();
            let gap = SIZE - stack.len();
            for r in 0..SIZE {
                self.cells[r][c] = if r < gap { None } else { Some(stack[r - gap]) };
            }
            empties += gap;
        }
        empties
    }

    /// Gravity followed by refill. Fresh tiles are drawn uniformly, column by
    /// column from left to right, top-down within a column.
    pub fn gravity_and_refill<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let empties = self.apply_gravity();
        for c in 0..SIZE {
            for r in 0..SIZE {
                if self.cells[r][c].is_some() {
                    break;
                }
                self.cells[r][c] = Some(Color::random(rng));
            }
        }
        empties
    }

    /// True when no empty cell has a tile above it in the same column.
    pub fn is_settled(&self) -> bool {
        (0..SIZE).all(|c| {
            let mut seen_tile = false;
            (0..SIZE).all(|r| match self.cells[r][c] {
                Some(_) => {
                    seen_tile = true;
                    true
                }
                None => !seen_tile,
            })
        })
    }
}

impl Index<Pos> for MatchBoard {
    type Output = Tile;

    fn index(&self, p: Pos) -> &Tile {
        &self.cells[p.row][p.col]
    }
}

impl IndexMut<Pos> for MatchBoard {
    fn index_mut(&mut self, p: Pos) -> &mut Tile {
        &mut self.cells[p.row][p.col]
    }
}

impl fmt::Debug for MatchBoard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatchBoard(\n{}\n)", self.render())
    }
}

impl fmt::Display for MatchBoard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for MatchBoard {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<String> = self.render().lines().map(str::to_owned).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatchBoard {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        MatchBoard::parse(&rows.join("\n")).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_board_is_one_group() {
        let groups = MatchBoard::filled(Color::A).find_groups();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].len(), 64);
    }

    #[test]
    fn checkerboard_has_no_groups() {
        let mut b = MatchBoard::empty();
        for p in MatchBoard::positions() {
            b[p] = Some(if (p.row + p.col) % 2 == 0 { Color::A } else { Color::B });
        }
        assert!(b.find_groups().is_empty());
    }

    #[test]
    fn full_board_is_a_gravity_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = MatchBoard::random(&mut rng);
        let mut after = b.clone();
        let refilled = after.gravity_and_refill(&mut rng);
        assert_eq!(refilled, 0);
        assert_eq!(after, b);
    }

    #[test]
    fn column_order_is_preserved() {
        let mut b = MatchBoard::filled(Color::C);
        // Column 0 top-down: A, empty, B, then C below.
        b[Pos::new(0, 0)] = Some(Color::A);
        b[Pos::new(1, 0)] = None;
        b[Pos::new(2, 0)] = Some(Color::B);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        b.gravity_and_refill(&mut rng);
        assert_eq!(b[Pos::new(1, 0)], Some(Color::A));
        assert_eq!(b[Pos::new(2, 0)], Some(Color::B));
        assert!(b[Pos::new(0, 0)].is_some());
        assert_eq!(b.empty_count(), 0);
    }

    #[test]
    fn empty_board_refill_is_reproducible() {
        let fill = |seed| {
            let mut b = MatchBoard::empty();
            b.gravity_and_refill(&mut ChaCha8Rng::seed_from_u64(seed));
            b
        };
        let a = fill(42);
        assert_eq!(a.empty_count(), 0);
        assert_eq!(a, fill(42));
        assert_ne!(a, fill(43));
    }

    #[test]
    fn render_parse_round_trip() {
        let b = MatchBoard::random(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(MatchBoard::parse(&b.render()).unwrap(), b);
        assert!(MatchBoard::parse("A B").is_err());
    }

    #[test]
    fn settled_detection() {
        let mut b = MatchBoard::filled(Color::A);
        assert!(b.is_settled());
        b[Pos::new(7, 3)] = None;
        assert!(!b.is_settled());
        b.apply_gravity();
        assert!(b.is_settled());
        assert_eq!(b[Pos::new(0, 3)], None);
    }
}
