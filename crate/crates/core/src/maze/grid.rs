use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Pos;

pub const SIZE: usize = 9;
pub const CELL_COUNT: usize = SIZE * SIZE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Item {
    Pickaxe,
    Sword,
    Magnet,
    Key,
}

impl Item {
    pub const ALL: [Item; 4] = [Item::Pickaxe, Item::Sword, Item::Magnet, Item::Key];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Cell {
    #[default]
    Empty,
    Wall,
    Coin,
    Goal,
    Item(Item),
}

impl Cell {
    /// Map symbol: `T` pickaxe (shovel), `W` sword, `N` magnet, `K` key.
    pub fn symbol(self) -> char {
        match self {
            Cell::Empty => '.',
            Cell::Wall => '#',
            Cell::Coin => 'C',
            Cell::Goal => 'G',
            Cell::Item(Item::Pickaxe) => 'T',
            Cell::Item(Item::Sword) => 'W',
            Cell::Item(Item::Magnet) => 'N',
            Cell::Item(Item::Key) => 'K',
        }
    }

    pub fn from_symbol(c: char) -> Option<Cell> {
        Some(match c {
            '.' => Cell::Empty,
            '#' => Cell::Wall,
            'C' => Cell::Coin,
            'G' => Cell::Goal,
            'T' => Cell::Item(Item::Pickaxe),
            'W' => Cell::Item(Item::Sword),
            'N' => Cell::Item(Item::Magnet),
            'K' => Cell::Item(Item::Key),
            _ => return None,
        })
    }
}

/// Ground-truth 9×9 layout. Serialized as nine strings of map symbols.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MazeGrid {
    cells: [[Cell; SIZE]; SIZE],
}

impl MazeGrid {
    pub fn open() -> Self {
        Self::default()
    }

    /// Parses nine rows of nine symbols; whitespace inside a row is ignored.
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, String> {
        if rows.len() != SIZE {
            return Err(format!("expected {SIZE} rows, got {}", rows.len()));
        }
        let mut grid = MazeGrid::default();
        for (r, row) in rows.iter().enumerate() {
            let symbols: Vec<char> = row.as_ref().chars().filter(|c| !c.is_whitespace()).collect();
            if symbols.len() != SIZE {
                return Err(format!("row {r}: expected {SIZE} cells, got {}", symbols.len()));
            }
            for (c, ch) in symbols.into_iter().enumerate() {
                grid.cells[r][c] =
                    Cell::from_symbol(ch).ok_or_else(|| format!("row {r}: unknown symbol `{ch}`"))?;
            }
        }
        Ok(grid)
    }

    pub fn rows(&self) -> Vec<String> {
        self.cells
            .iter()
            .map(|row| row.iter().map(|c| c.symbol()).collect())
            .collect()
    }

    pub fn positions() -> impl Iterator<Item = Pos> {
        (0..SIZE).flat_map(|r| (0..SIZE).map(move |c| Pos::new(r, c)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pos, Cell)> + '_ {
        Self::positions().map(move |p| (p, self[p]))
    }

    pub fn count(&self, cell: Cell) -> usize {
        self.iter().filter(|&(_, c)| c == cell).count()
    }

    pub fn find(&self, cell: Cell) -> Option<Pos> {
        self.iter().find(|&(_, c)| c == cell).map(|(p, _)| p)
    }
}

impl Index<Pos> for MazeGrid {
    type Output = Cell;

    fn index(&self, p: Pos) -> &Cell {
        &self.cells[p.row][p.col]
    }
}

impl IndexMut<Pos> for MazeGrid {
    fn index_mut(&mut self, p: Pos) -> &mut Cell {
        &mut self.cells[p.row][p.col]
    }
}

impl fmt::Debug for MazeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for MazeGrid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MazeGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        MazeGrid::parse_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Boolean 9×9 mask (explored cells).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Mask(pub [[bool; SIZE]; SIZE]);

impl Mask {
    pub fn get(&self, p: Pos) -> bool {
        self.0[p.row][p.col]
    }

    pub fn set(&mut self, p: Pos) -> bool {
        let was = self.0[p.row][p.col];
        self.0[p.row][p.col] = true;
        !was
    }

    pub fn count(&self) -> usize {
        self.0.iter().flatten().filter(|b| **b).count()
    }

    pub fn full() -> Self {
        Mask([[true; SIZE]; SIZE])
    }
}
