//! The game-state machine.
//!
//! One [`GameState::step`] runs the phases in a fixed order: player moves,
//! autonomous movers, rule scan, transformations, rule scan, destructive
//! interactions, outcome. Every state is a plain value; stepping returns a
//! new one.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{parse_ascii_map, serialize_ascii_map, Board, Direction, Level, LevelError, Position, Property};
use crate::rules::{apply_transformations, classify_objects, scan_rules, PropertyIndex, PropertyTable, RuleSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("cannot step a state whose outcome is already {0}")]
    SteppedTerminalState(Outcome),
    #[error(transparent)]
    Level(#[from] LevelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Wait,
}

impl Action {
    /// Expansion order used by every search agent.
    pub const ALL: [Action; 5] = [Action::Up, Action::Down, Action::Left, Action::Right, Action::Wait];

    pub fn direction(self) -> Option<Direction> {
        match self {
            Action::Up => Some(Direction::Up),
            Action::Down => Some(Direction::Down),
            Action::Left => Some(Direction::Left),
            Action::Right => Some(Direction::Right),
            Action::Wait => None,
        }
    }

    pub fn code(self) -> char {
        match self {
            Action::Up => 'U',
            Action::Down => 'D',
            Action::Left => 'L',
            Action::Right => 'R',
            Action::Wait => 'W',
        }
    }

    pub fn from_code(ch: char) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.code() == ch)
    }
}

/// Parses a `U/D/L/R/W` solution string. Returns the first bad character on
/// failure.
pub fn parse_actions(text: &str) -> Result<Vec<Action>, char> {
    text.chars().map(|c| Action::from_code(c).ok_or(c)).collect()
}

pub fn format_actions(actions: &[Action]) -> String {
    actions.iter().map(|a| a.code()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ongoing,
    Win,
    Lose,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        self != Outcome::Ongoing
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Ongoing => "ongoing",
            Outcome::Win => "win",
            Outcome::Lose => "lose",
        })
    }
}

/// Result of [`push_chain`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushResult {
    pub moved: bool,
    pub board: Board,
}

/// Sprite indices per cell, kept in sync while sprites move within a tick.
struct Occupancy {
    width: usize,
    height: usize,
    cells: Vec<Vec<usize>>,
}

impl Occupancy {
    fn build(board: &Board) -> Self {
        let mut cells = vec![Vec::new(); board.width * board.height];
        for (i, s) in board.sprites.iter().enumerate() {
            cells[board.cell_index(s.pos)].push(i);
        }
        Occupancy {
            width: board.width,
            height: board.height,
            cells,
        }
    }

    fn at(&self, pos: Position) -> &[usize] {
        &self.cells[pos.y * self.width + pos.x]
    }

    fn relocate(&mut self, id: usize, from: Position, to: Position) {
        let src = &mut self.cells[from.y * self.width + from.x];
        if let Some(i) = src.iter().position(|&s| s == id) {
            src.remove(i);
        }
        self.cells[to.y * self.width + to.x].push(id);
    }
}

/// The run of pushable cells in front of `origin`, or `None` when the run
/// cannot advance (board edge or a STOP object in the way).
fn push_run(
    board: &Board,
    occ: &Occupancy,
    table: &PropertyTable,
    origin: Position,
    dir: Direction,
) -> Option<Vec<Position>> {
    let mut run = Vec::new();
    let mut cur = origin;
    loop {
        let next = cur.step(dir, occ.width, occ.height)?;
        let cell = occ.at(next);
        if cell.iter().any(|&i| table.blocks(board.sprites[i].kind)) {
            return None;
        }
        if !cell.iter().any(|&i| table.is_pushable(board.sprites[i].kind)) {
            return Some(run);
        }
        run.push(next);
        cur = next;
    }
}

fn shift_run(board: &mut Board, occ: &mut Occupancy, table: &PropertyTable, run: &[Position], dir: Direction) {
    let moving: Vec<usize> = run
        .iter()
        .flat_map(|&p| occ.at(p).iter().copied())
        .filter(|&i| table.is_pushable(board.sprites[i].kind))
        .collect();
    for id in moving {
        let from = board.sprites[id].pos;
        let to = from
            .step(dir, board.width, board.height)
            .expect("run was checked in bounds");
        board.sprites[id].pos = to;
        occ.relocate(id, from, to);
    }
}

/// Moves sprite `id` one cell, pushing whatever is in front of it.
fn try_move(board: &mut Board, occ: &mut Occupancy, table: &PropertyTable, id: usize, dir: Direction) -> bool {
    let origin = board.sprites[id].pos;
    let Some(run) = push_run(board, occ, table, origin, dir) else {
        return false;
    };
    shift_run(board, occ, table, &run, dir);
    let to = origin
        .step(dir, board.width, board.height)
        .expect("push_run checked the first cell");
    board.sprites[id].pos = to;
    occ.relocate(id, origin, to);
    true
}

/// Pushes the run of pushable sprites (PUSH objects and all words) that
/// starts next to `origin`. The sprite at `origin` itself does not move.
pub fn push_chain(board: &Board, rules: &RuleSet, origin: Position, dir: Direction) -> PushResult {
    let table = rules.property_table();
    let occ = Occupancy::build(board);
    match push_run(board, &occ, &table, origin, dir) {
        None => PushResult {
            moved: false,
            board: board.clone(),
        },
        Some(run) => {
            let mut out = board.clone();
            let mut occ = occ;
            shift_run(&mut out, &mut occ, &table, &run, dir);
            PushResult {
                moved: true,
                board: out,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub state: GameState,
    pub outcome: Outcome,
    pub steps_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    level: Arc<Level>,
    board: Board,
    rules: RuleSet,
    index: PropertyIndex,
    outcome: Outcome,
    tick: u64,
}

impl GameState {
    /// Builds the starting state of a level. The outcome always starts
    /// `Ongoing`: win and lose are decided by the first step.
    pub fn init(level: &Level) -> Result<GameState, EngineError> {
        Self::init_shared(Arc::new(level.clone()))
    }

    pub fn init_shared(level: Arc<Level>) -> Result<GameState, EngineError> {
        let board = parse_ascii_map(&level.ascii)?;
        Ok(Self::from_board(level, board))
    }

    fn from_board(level: Arc<Level>, board: Board) -> GameState {
        let rules = scan_rules(&board);
        let index = classify_objects(&board, &rules);
        GameState {
            level,
            board,
            rules,
            index,
            outcome: Outcome::Ongoing,
            tick: 0,
        }
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn index(&self) -> &PropertyIndex {
        &self.index
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Replaces the board with `ascii`, keeping the original level for
    /// [`GameState::reset`].
    pub fn set_state(&self, ascii: &str) -> Result<GameState, EngineError> {
        let board = parse_ascii_map(ascii)?;
        Ok(Self::from_board(Arc::clone(&self.level), board))
    }

    pub fn reset(&self) -> GameState {
        let board = parse_ascii_map(&self.level.ascii).expect("level parsed at init");
        Self::from_board(Arc::clone(&self.level), board)
    }

    pub fn step(&self, action: Action) -> Result<GameState, EngineError> {
        if self.outcome.is_terminal() {
            return Err(EngineError::SteppedTerminalState(self.outcome));
        }
        let table = self.rules.property_table();
        let mut board = self.board.clone();
        let mut occ = Occupancy::build(&board);

        // player: farthest along the move direction first, then row-major
        if let Some(dir) = action.direction() {
            let mut players: Vec<usize> = self.index.you().to_vec();
            players.sort_by_key(|&i| {
                let p = board.sprites[i].pos;
                let (x, y) = (p.x as isize, p.y as isize);
                let lead = match dir {
                    Direction::Right => -x,
                    Direction::Left => x,
                    Direction::Down => -y,
                    Direction::Up => y,
                };
                (lead, p.y, p.x, i)
            });
            for id in players {
                try_move(&mut board, &mut occ, &table, id, dir);
            }
        }

        // movers, row-major
        let mut movers: Vec<usize> = self.index.get(Property::Move).to_vec();
        movers.sort_by_key(|&i| (board.sprites[i].pos.y, board.sprites[i].pos.x, i));
        for id in movers {
            let facing = board.sprites[id].facing;
            if !try_move(&mut board, &mut occ, &table, id, facing) {
                board.sprites[id].facing = facing.reverse();
                try_move(&mut board, &mut occ, &table, id, facing.reverse());
            }
        }

        let rules = scan_rules(&board);
        let mut board = apply_transformations(&board, &rules);
        let rules = scan_rules(&board);
        let table = rules.property_table();

        resolve_interactions(&mut board, &table);

        let index = classify_objects(&board, &rules);
        let outcome = decide_outcome(&board, &rules, &index);
        Ok(GameState {
            level: Arc::clone(&self.level),
            board,
            rules,
            index,
            outcome,
            tick: self.tick + 1,
        })
    }

    /// Applies `actions` in order, stopping at the first terminal outcome.
    pub fn simulate(&self, actions: &[Action]) -> Simulation {
        let mut state = self.clone();
        let mut steps_used = 0;
        for &action in actions {
            match state.step(action) {
                Ok(next) => {
                    state = next;
                    steps_used += 1;
                }
                Err(_) => break,
            }
        }
        Simulation {
            outcome: state.outcome,
            state,
            steps_used,
        }
    }

    /// Order-independent digest of the sprite multiset and outcome. The
    /// tick is not included.
    pub fn state_hash(&self) -> u64 {
        let sprites = self
            .board
            .sprites
            .iter()
            .map(|s| {
                let packed = (s.kind.code() as u64) << 40
                    | (s.pos.x as u64 & 0xffff) << 24
                    | (s.pos.y as u64 & 0xffff) << 8
                    | s.facing as u64;
                splitmix64(packed)
            })
            .fold(0u64, u64::wrapping_add);
        let header = (self.board.width as u64) << 32 | (self.board.height as u64) << 8 | self.outcome as u64;
        splitmix64(sprites ^ splitmix64(header))
    }

    /// ASCII map followed by one rule per line.
    pub fn dump(&self) -> String {
        let mut out = serialize_ascii_map(&self.board);
        for rule in &self.rules {
            out.push('\n');
            out.push_str(&rule.to_string());
        }
        out
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SINK, KILL and HOT/MELT, resolved simultaneously per cell. Words are
/// never destroyed.
fn resolve_interactions(board: &mut Board, table: &PropertyTable) {
    let occ = Occupancy::build(board);
    let mut doomed = vec![false; board.sprites.len()];
    for cell in &occ.cells {
        if cell.len() < 2 {
            continue;
        }
        let objects: Vec<usize> = cell
            .iter()
            .copied()
            .filter(|&i| !board.sprites[i].kind.is_word())
            .collect();
        if objects.len() < 2 {
            continue;
        }
        let has = |i: usize, p: Property| table.of_kind(board.sprites[i].kind).contains(p);
        let other_has = |me: usize, p: Property| objects.iter().any(|&o| o != me && has(o, p));
        if objects.iter().any(|&i| has(i, Property::Sink)) {
            for &i in &objects {
                doomed[i] = true;
            }
            continue;
        }
        for &i in &objects {
            if (has(i, Property::You) && other_has(i, Property::Kill))
                || (has(i, Property::Melt) && other_has(i, Property::Hot))
            {
                doomed[i] = true;
            }
        }
    }
    if doomed.iter().any(|&d| d) {
        let mut i = 0;
        board.sprites.retain(|_| {
            let keep = !doomed[i];
            i += 1;
            keep
        });
    }
}

fn decide_outcome(board: &Board, rules: &RuleSet, index: &PropertyIndex) -> Outcome {
    let you: HashSet<Position> = index.you().iter().map(|&i| board.sprites[i].pos).collect();
    if index.win().iter().any(|&i| you.contains(&board.sprites[i].pos)) {
        Outcome::Win
    } else if you.is_empty() || !rules.has_property_rule(Property::You) {
        Outcome::Lose
    } else {
        Outcome::Ongoing
    }
}
