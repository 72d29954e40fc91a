use std::fmt::Write;

use super::{Cell, MazeState, SIZE};
use crate::Pos;

pub const FULL_VISION_NOTE: &str = "NOTE: You have full vision of the entire map. You can see all obstacles, coins, monsters, and items without the need to explore.";

/// Glyph shown to the agent for one cell.
pub(crate) fn glyph(state: &MazeState, p: Pos, full_vision: bool) -> char {
    if p == state.agent_pos {
        return 'A';
    }
    let cell = state.grid[p];
    if cell == Cell::Goal {
        return 'G';
    }
    if !full_vision && !state.explored.get(p) {
        return '?';
    }
    if state.monsters.contains(&p) {
        return 'M';
    }
    cell.symbol()
}

/// One string per row, `?` for fog.
pub(crate) fn glyph_rows(state: &MazeState, full_vision: bool) -> Vec<String> {
    (0..SIZE)
        .map(|r| (0..SIZE).map(|c| glyph(state, Pos::new(r, c), full_vision)).collect())
        .collect()
}

pub(crate) fn observe(state: &MazeState, full_vision: bool) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..SIZE).map(|c| c.to_string()).collect();
    let _ = writeln!(out, "   {}", header.join(" "));
    let _ = writeln!(out, "  {}", "-".repeat(2 * SIZE + 3));
    for r in 0..SIZE {
        let row: Vec<String> = (0..SIZE)
            .map(|c| glyph(state, Pos::new(r, c), full_vision).to_string())
            .collect();
        let _ = writeln!(out, " {r} | {}", row.join(" "));
    }
    let _ = write!(
        out,
        "\nCurrent position (row,col): ({},{})",
        state.agent_pos.row, state.agent_pos.col
    );
    if full_vision {
        let _ = write!(out, "\n\n{FULL_VISION_NOTE}");
    }
    out
}
