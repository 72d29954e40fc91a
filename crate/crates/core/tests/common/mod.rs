//! Independent reference implementations used by the property and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use gridbench_core::match2::{Color, Group, MatchAction, MatchBoard, SIZE};
use gridbench_core::maze::{Cell, MazeConfig};
use gridbench_core::Pos;

/// `5n + 3·max(0, n−2)`, spelled out.
pub fn literal_score(n: usize) -> i64 {
    let n = n as i64;
    let bonus = if n > 2 { n - 2 } else { 0 };
    n * 5 + bonus * 3
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of size >= 2, built by unioning every same-colour adjacent
/// pair. Sorted like `find_groups`.
pub fn oracle_groups(board: &MatchBoard) -> Vec<Group> {
    let idx = |p: Pos| p.row * SIZE + p.col;
    let mut uf = UnionFind::new(SIZE * SIZE);
    for p in MatchBoard::positions() {
        let Some(c) = board[p] else { continue };
        for q in [p.offset(0, 1, SIZE), p.offset(1, 0, SIZE)].into_iter().flatten() {
            if board[q] == Some(c) {
                uf.union(idx(p), idx(q));
            }
        }
    }
    let mut comps: std::collections::BTreeMap<usize, Vec<Pos>> = Default::default();
    for p in MatchBoard::positions() {
        if board[p].is_some() {
            comps.entry(uf.find(idx(p))).or_default().push(p);
        }
    }
    let mut groups: Vec<Group> = comps
        .into_values()
        .filter(|cells| cells.len() >= 2)
        .map(|mut cells| {
            cells.sort();
            Group {
                color: board[cells[0]].unwrap(),
                cells,
            }
        })
        .collect();
    groups.sort_by_key(|g| g.cells[0]);
    groups
}

/// Cells an action clears, computed from the action's definition.
pub fn oracle_cleared(board: &MatchBoard, action: MatchAction) -> BTreeSet<Pos> {
    let occupied = |p: &Pos| board[*p].is_some();
    match action {
        MatchAction::Eliminate(p) => {
            let color = board[p].unwrap();
            let mut seen = BTreeSet::from([p]);
            let mut queue = VecDeque::from([p]);
            while let Some(c) = queue.pop_front() {
                for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    if let Some(n) = c.offset(dr, dc, SIZE) {
                        if board[n] == Some(color) && seen.insert(n) {
                            queue.push_back(n);
                        }
                    }
                }
            }
            seen
        }
        MatchAction::Row(r) => (0..SIZE).map(|c| Pos::new(r, c)).filter(occupied).collect(),
        MatchAction::Col(c) => (0..SIZE).map(|r| Pos::new(r, c)).filter(occupied).collect(),
        MatchAction::Bomb(p) => (-1..=1)
            .flat_map(|dr| (-1..=1).map(move |dc| (dr, dc)))
            .filter_map(|(dr, dc)| p.offset(dr, dc, SIZE))
            .filter(occupied)
            .collect(),
        MatchAction::Hammer(p) => [p].into_iter().filter(occupied).collect(),
    }
}

/// Column contents top-down with the given cells removed.
pub fn survivors(board: &MatchBoard, col: usize, cleared: &BTreeSet<Pos>) -> Vec<Color> {
    (0..SIZE)
        .map(|r| Pos::new(r, col))
        .filter(|p| !cleared.contains(p))
        .filter_map(|p| board[p])
        .collect()
}

/// Unit-step shortest path from start to goal avoiding walls.
pub fn shortest_path(cfg: &MazeConfig) -> Option<u32> {
    let goal = cfg.grid.find(Cell::Goal)?;
    let n = gridbench_core::maze::SIZE;
    let mut dist = vec![vec![u32::MAX; n]; n];
    dist[cfg.start.row][cfg.start.col] = 0;
    let mut queue = VecDeque::from([cfg.start]);
    while let Some(p) = queue.pop_front() {
        if p == goal {
            return Some(dist[p.row][p.col]);
        }
        for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            if let Some(q) = p.offset(dr, dc, n) {
                if cfg.grid[q] != Cell::Wall && dist[q.row][q.col] == u32::MAX {
                    dist[q.row][q.col] = dist[p.row][p.col] + 1;
                    queue.push_back(q);
                }
            }
        }
    }
    None
}
