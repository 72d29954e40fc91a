use std::fmt::Write;

use crate::harness::Flags;
use crate::match2::MatchState;
use crate::maze::MazeState;
use crate::Level;

pub const KNOWLEDGE_HEADER: &str = "Training Knowledge (use these insights to make better decisions):";
pub const FORMAT_REMINDER: &str = "Respond in the required format.";

const MAZE_INTRO: &str = "\
You are an intelligent agent solving a maze problem.
Your task is to navigate through the maze efficiently while collecting rewards and avoiding dangers.

Core Game Elements:
- A: Your current position
- G: Goal (always visible)
- C: Coin (+500 points)
- #: Wall (costs life if hit)
- ?: Unexplored area
- .: Empty space

Your Priorities (in order):
1. Stay alive (avoid walls/monsters)
2. Reach the goal
3. Collect coins when safe
4. Explore efficiently
5. Minimize steps

You will receive the current game state and must choose an action (0-11) based on careful analysis of the situation.
Always explain your reasoning before making a decision.";

const LEVEL_1: &str = "\
Level 1 Characteristics:
- 9x9 grid size
- No monsters
- 5 coins to collect
- Focus on basic navigation and coin collection";

const LEVEL_2: &str = "\
Level 2 Characteristics:
- 9x9 grid size
- Contains monsters (M) that move randomly
- 5 coins to collect
- Requires careful planning to avoid monsters";

const LEVEL_3: &str = "\
Level 3 Characteristics:
- 9x9 grid size
- Contains monsters and special items
- Items available:
  * T: Shovel (break walls, 3 uses)
  * W: Sword (defeat monsters)
  * N: Magnet (attract nearby coins)
  * K: Key (required for goal)
- Most complex navigation";

const MOVEMENT: &str = "\
Movement System:
- Actions 0-2: Move UP (row-1) [1/2/3 steps]
- Actions 3-5: Move DOWN (row+1) [1/2/3 steps]
- Actions 6-8: Move LEFT (col-1) [1/2/3 steps]
- Actions 9-11: Move RIGHT (col+1) [1/2/3 steps]";

const SCORING: &str = "\
Scoring System:
- New cell explored: +10 points
- Coin collected: +500 points
- Step taken: -50 points
- Life lost: -1000 points
- Goal reached: +2000 points";

const ANALYZE: &str = "\
Please analyze the current situation and choose your next action:
1. Analyze visible area and potential risks
2. Consider exploration value and rewards
3. Choose action number (0-11)";

const MONSTER_RULE: &str = "- You cannot touch monsters (M), or you'll lose a life and return to start";

const LEVEL_3_RULES: &str = "\
Special rules for Level 3:
- You must collect the key (K) before you can enter the goal
- With a shovel (T), you can break through walls without losing lives (3 uses)
- With a sword (W), you can defeat monsters without losing lives
- With a magnet (N), you can collect coins in a 5x5 area around you";

const GOAL_LINE: &str =
    "The ultimate goal is to explore the map, collect coins, reach the goal, while maintaining a high score";

const RESPONSE_FORMAT: &str = "\
Response format:
1. First analyze the current situation, including explored areas, coin positions, and potential risks
2. Consider possible movement options and their consequences, especially focusing on exploration value
3. Finally, provide your choice using the format \"Action: X\" where X is a number between 0-11

For example:
After analysis, you should write \"Action: 9\" to indicate moving right by 1 step";

const MATCH2_HEAD: &str = "\
You are an AI assistant for an 8x8 match game (gridSize = 8). The board is an 8x8 grid with colors A, B, C, D, or null (empty). Rules:
- Eliminate ≥2 connected same-color tiles (horizontal/vertical), score = tiles * 5 + 3 * max(0, tiles - 2).";

const MATCH2_PROPS: &str = "\
- Props (each usable once): row (clear row, 32 points), col (clear column, 32 points), bomb (clear 3x3 area, 12 points), hammer (clear 1 tile, 4 points).";

const MATCH2_BODY: &str = "\
- Each action costs 1 step. Goal: Clear the level by meeting color elimination targets (A, B, C, D) within limited steps while maximizing score and minimizing steps used.
- Primary objective: Ensure level completion by achieving all color targets.
- Secondary objectives: Maximize total score by prioritizing larger tile eliminations and efficient prop usage; minimize steps to preserve remaining steps.
- After elimination, new random tiles (A, B, C, D) fall from the top to fill empty spaces.
- Input: Board (8x8, A/B/C/D/null), score, steps remaining, inventory (row/col/bomb/hammer), color targets, current color counts.";

const MATCH2_OUTPUT: &str = "\
- Output: Best action in JSON: {\"action\": {\"type\": \"eliminate\"|\"row\"|\"col\"|\"bomb\"|\"hammer\", \"pos\": [i,j] (for eliminate/bomb/hammer, 0≤i,j<8), \"index\": k (for row/col, 0≤k<8)}}.";

const MATCH2_OUTPUT_NO_PROPS: &str = "\
- Output: Best action in JSON: {\"action\": {\"type\": \"eliminate\", \"pos\": [i,j] (0≤i,j<8)}}.";

const MATCH2_NULL: &str = "- If no valid action, return {\"action\": null}.";

/// The numbered knowledge list, or an empty string when there is none.
pub fn knowledge_section(truths: &[String]) -> String {
    if truths.is_empty() {
        return String::new();
    }
    let mut out = String::from(KNOWLEDGE_HEADER);
    for (i, t) in truths.iter().enumerate() {
        let _ = write!(out, "\n{}. {}", i + 1, t);
    }
    out
}

/// Prepends the knowledge section to a prompt. Identity for no truths.
pub fn with_knowledge(base: &str, truths: &[String]) -> String {
    if truths.is_empty() {
        base.to_string()
    } else {
        format!("{}\n\n{base}", knowledge_section(truths))
    }
}

pub fn maze_system_prompt(level: Level) -> String {
    let block = match level {
        Level::Easy => LEVEL_1,
        Level::Medium => LEVEL_2,
        Level::Hard => LEVEL_3,
    };
    format!("{MAZE_INTRO}\n\n{block}")
}

fn action_list() -> String {
    let mut out = String::from("Available Actions:");
    for a in crate::maze::MazeAction::all() {
        let steps = a.steps();
        let noun = if steps == 1 { "step" } else { "steps" };
        let _ = write!(out, "\n- {}: Move {} {steps} {noun}", a.id(), a.direction().label());
    }
    out
}

fn item_status(state: &MazeState) -> String {
    let equipped = |b: bool| if b { "Equipped" } else { "Not equipped" };
    let shovel = if state.pickaxe_uses > 0 {
        format!("Equipped (Uses remaining: {})", state.pickaxe_uses)
    } else {
        "Not equipped".to_string()
    };
    format!(
        "Current items status:\n- Shovel: {shovel}\n- Sword: {}\n- Magnet: {}\n- Key: {}",
        equipped(state.has_sword),
        equipped(state.has_magnet),
        if state.has_key { "Collected" } else { "Not collected (required to finish)" },
    )
}

/// The maze user prompt without the knowledge section.
pub fn maze_base_prompt(state: &MazeState, flags: &Flags) -> String {
    let p = state.agent_pos;
    let mut parts = vec![
        format!("Current Game State:\n{}", state.observe(flags.full_vision)),
        format!(
            "Game Status:\n- Score: {}\n- Lives: {}\n- Current Position (row,col): ({},{})",
            state.score, state.lives, p.row, p.col
        ),
        MOVEMENT.to_string(),
        action_list(),
    ];
    if state.level == Level::Hard {
        parts.push(item_status(state));
    }
    parts.push(SCORING.to_string());
    parts.push(ANALYZE.to_string());
    if state.level != Level::Easy {
        parts.push(MONSTER_RULE.to_string());
    }
    if state.level == Level::Hard {
        parts.push(LEVEL_3_RULES.to_string());
    }
    parts.push(GOAL_LINE.to_string());
    parts.push(RESPONSE_FORMAT.to_string());
    parts.join("\n\n")
}

pub fn build_maze_prompt(state: &MazeState, truths: &[String], flags: &Flags) -> (String, String) {
    (
        maze_system_prompt(state.level),
        with_knowledge(&maze_base_prompt(state, flags), truths),
    )
}

pub fn match2_system_prompt(no_props: bool) -> String {
    if no_props {
        let body = MATCH2_BODY
            .replace(" and efficient prop usage", "")
            .replace(" inventory (row/col/bomb/hammer),", "");
        format!("{MATCH2_HEAD}\n{body}\n{MATCH2_OUTPUT_NO_PROPS}\n{MATCH2_NULL}")
    } else {
        format!("{MATCH2_HEAD}\n{MATCH2_PROPS}\n{MATCH2_BODY}\n{MATCH2_OUTPUT}\n{MATCH2_NULL}")
    }
}

/// Board plus the status block. `Current counts` are cumulative eliminations.
pub fn match2_base_prompt(state: &MatchState, flags: &Flags) -> String {
    let inventory = if flags.no_props {
        crate::match2::Inventory::NONE
    } else {
        state.inventory
    };
    format!(
        "{}\nScore: {}, Steps remaining: {}\nInventory: {}\nColor targets: {}\nCurrent counts: {}",
        state.board.render(),
        state.score,
        state.steps_remaining,
        inventory,
        state.targets.render(),
        state.eliminated.render(),
    )
}

pub fn build_match2_prompt(state: &MatchState, truths: &[String], flags: &Flags) -> (String, String) {
    (
        match2_system_prompt(flags.no_props),
        with_knowledge(&match2_base_prompt(state, flags), truths),
    )
}

/// Appends the format reminder used when re-asking after a parse failure.
pub fn reask(user: &str) -> String {
    format!("{user}\n\n{FORMAT_REMINDER}")
}
