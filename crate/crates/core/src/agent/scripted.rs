//! Rule-based agents used as reference baselines and in tests.

use std::collections::VecDeque;

use super::{Agent, AgentError, Decision, Turn};
use crate::harness::Flags;
use crate::match2::{MatchAction, MatchState};
use crate::maze::{Cell, Direction, Item, MazeAction, MazeGrid, MazeState, SIZE};
use crate::{Level, Pos};

/// How a planner treats cells it has not seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unknown {
    Passable,
    Blocked,
}

/// What the agent is allowed to see of the maze.
struct View<'a> {
    state: &'a MazeState,
    full: bool,
}

impl View<'_> {
    fn cell(&self, p: Pos) -> Option<Cell> {
        if self.full {
            Some(self.state.grid[p])
        } else {
            self.state.known_cell(p)
        }
    }

    fn monsters(&self) -> Vec<Pos> {
        if self.full {
            self.state.monsters.clone()
        } else {
            self.state.visible_monsters()
        }
    }

    fn find(&self, cell: Cell) -> Option<Pos> {
        MazeGrid::positions().find(|&p| self.cell(p) == Some(cell))
    }
}

/// Unit-step breadth-first search from the agent to the nearest cell
/// satisfying `is_target`. Returns the first direction of a shortest path.
fn first_step(
    view: &View<'_>,
    unknown: Unknown,
    avoid: &[Pos],
    is_target: impl Fn(Pos) -> bool,
) -> Option<Direction> {
    let start = view.state.agent_pos;
    let mut first: [[Option<Direction>; SIZE]; SIZE] = [[None; SIZE]; SIZE];
    let mut seen = [[false; SIZE]; SIZE];
    seen[start.row][start.col] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for dir in Direction::ALL {
            let (dr, dc) = dir.delta();
            let Some(n) = p.offset(dr, dc, SIZE) else { continue };
            if seen[n.row][n.col] || avoid.contains(&n) {
                continue;
            }
            seen[n.row][n.col] = true;
            let via = if p == start { Some(dir) } else { first[p.row][p.col] };
            if is_target(n) {
                return via;
            }
            let passable = match view.cell(n) {
                None => unknown == Unknown::Passable,
                Some(Cell::Wall) | Some(Cell::Goal) => false,
                Some(_) => true,
            };
            if passable {
                first[n.row][n.col] = via;
                queue.push_back(n);
            }
        }
    }
    None
}

/// Cells occupied by visible monsters and their 4-neighbours.
fn danger(view: &View<'_>) -> Vec<Pos> {
    let mut out = Vec::new();
    for m in view.monsters() {
        out.push(m);
        for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            if let Some(n) = m.offset(dr, dc, SIZE) {
                out.push(n);
            }
        }
    }
    out
}

fn unit(dir: Direction) -> MazeAction {
    MazeAction::new(dir, 1).expect("unit step is valid")
}

/// Where the agent wants to go right now: the key on Hard until held, then
/// the goal.
fn objective(view: &View<'_>) -> Option<Pos> {
    let s = view.state;
    if s.level == Level::Hard && !s.has_key {
        view.find(Cell::Item(Item::Key))
    } else {
        s.goal_pos()
    }
}

/// Plans toward `target`, first around monsters, then ignoring them.
fn plan_to(view: &View<'_>, unknown: Unknown, target: Pos) -> Option<Direction> {
    let danger = danger(view);
    let avoid: Vec<Pos> = danger.into_iter().filter(|&p| p != target).collect();
    first_step(view, unknown, &avoid, |p| p == target)
        .or_else(|| first_step(view, unknown, &view.monsters(), |p| p == target))
}

/// Moves toward the nearest known passable cell that borders fog.
fn explore(view: &View<'_>) -> Option<Direction> {
    let is_frontier = |p: Pos| {
        matches!(view.cell(p), Some(c) if c != Cell::Wall && c != Cell::Goal)
            && [(-1, 0), (1, 0), (0, -1), (0, 1)]
                .iter()
                .any(|&(dr, dc)| p.offset(dr, dc, SIZE).is_some_and(|n| view.cell(n).is_none()))
    };
    first_step(view, Unknown::Blocked, &danger(view), is_frontier)
        .or_else(|| first_step(view, Unknown::Blocked, &view.monsters(), is_frontier))
}

/// Any direction that stays on the board and off known walls.
fn fallback(view: &View<'_>) -> Direction {
    let p = view.state.agent_pos;
    Direction::ALL
        .into_iter()
        .find(|d| {
            let (dr, dc) = d.delta();
            p.offset(dr, dc, SIZE).is_some_and(|n| view.cell(n) != Some(Cell::Wall))
        })
        .unwrap_or(Direction::Up)
}

/// Shortest-path agent. With full vision it plans on the true map; under fog
/// it plans optimistically, treating unseen cells as open, and replans every
/// step. Moves one cell per action.
#[derive(Debug, Default, Clone)]
pub struct BfsAgent;

impl BfsAgent {
    pub fn choose(&self, state: &MazeState, flags: &Flags) -> MazeAction {
        let view = View {
            state,
            full: flags.full_vision,
        };
        let dir = match objective(&view) {
            Some(t) => plan_to(&view, Unknown::Passable, t),
            None => explore(&view),
        };
        unit(dir.unwrap_or_else(|| fallback(&view)))
    }
}

/// Explores fog frontiers until a path through seen cells to the objective
/// exists, then follows it. Never steps into an unseen cell.
#[derive(Debug, Default, Clone)]
pub struct FrontierAgent;

impl FrontierAgent {
    pub fn choose(&self, state: &MazeState, flags: &Flags) -> MazeAction {
        let view = View {
            state,
            full: flags.full_vision,
        };
        let dir = objective(&view)
            .and_then(|t| plan_to(&view, Unknown::Blocked, t))
            .or_else(|| explore(&view));
        unit(dir.unwrap_or_else(|| fallback(&view)))
    }
}

/// Eliminates the largest group each step (earliest in row-major order on
/// ties); returns `null` when no group exists.
#[derive(Debug, Default, Clone)]
pub struct GreedyMatchAgent;

impl GreedyMatchAgent {
    pub fn choose(&self, state: &MatchState) -> Option<MatchAction> {
        let groups = state.board.find_groups();
        let mut best: Option<&crate::match2::Group> = None;
        for g in &groups {
            if best.is_none_or(|b| g.len() > b.len()) {
                best = Some(g);
            }
        }
        best.map(|g| MatchAction::Eliminate(g.cells[0]))
    }
}

fn scripted_turn<A>(decision: Decision<A>) -> Result<Turn<A>, AgentError> {
    Ok(Turn {
        decision,
        exchanges: Vec::new(),
        parse_failures: 0,
    })
}

impl Agent for BfsAgent {
    fn id(&self) -> String {
        "bfs".into()
    }

    fn decide_maze(&mut self, state: &MazeState, flags: &Flags) -> Result<Turn<MazeAction>, AgentError> {
        scripted_turn(Decision::Act(self.choose(state, flags)))
    }

    fn decide_match2(&mut self, state: &MatchState, _flags: &Flags) -> Result<Turn<MatchAction>, AgentError> {
        scripted_turn(GreedyMatchAgent.choose(state).map_or(Decision::NoAction, Decision::Act))
    }
}

impl Agent for FrontierAgent {
    fn id(&self) -> String {
        "frontier".into()
    }

    fn decide_maze(&mut self, state: &MazeState, flags: &Flags) -> Result<Turn<MazeAction>, AgentError> {
        scripted_turn(Decision::Act(self.choose(state, flags)))
    }

    fn decide_match2(&mut self, state: &MatchState, _flags: &Flags) -> Result<Turn<MatchAction>, AgentError> {
        scripted_turn(GreedyMatchAgent.choose(state).map_or(Decision::NoAction, Decision::Act))
    }
}

impl Agent for GreedyMatchAgent {
    fn id(&self) -> String {
        "greedy".into()
    }

    fn decide_maze(&mut self, state: &MazeState, flags: &Flags) -> Result<Turn<MazeAction>, AgentError> {
        scripted_turn(Decision::Act(FrontierAgent.choose(state, flags)))
    }

    fn decide_match2(&mut self, state: &MatchState, _flags: &Flags) -> Result<Turn<MatchAction>, AgentError> {
        scripted_turn(self.choose(state).map_or(Decision::NoAction, Decision::Act))
    }
}
