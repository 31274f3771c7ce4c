//! Solver agents: breadth-first, depth-first, best-first, a seeded random
//! sequence agent, and externally supplied agents behind the same contract.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::engine::{format_actions, parse_actions, Action, EngineError, GameState, Outcome};
use crate::level::Level;

/// Number of actions the random agent draws.
pub const RANDOM_SEQUENCE_LEN: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("invalid budget: {0} must be positive")]
    InvalidBudget(&'static str),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("preprocessing failed: {0}")]
    Preprocess(String),
    #[error("agent contract violation: {0}")]
    AgentContractViolation(String),
}

/// Caps on one solve attempt. Whichever cap is reached first ends the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_millis: u64,
    pub max_solution_length: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 100_000,
            max_millis: 60_000,
            max_solution_length: 200,
        }
    }
}

impl Budget {
    pub fn new(max_nodes: u64, max_millis: u64, max_solution_length: usize) -> Result<Self, AgentError> {
        let budget = Budget {
            max_nodes,
            max_millis,
            max_solution_length,
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.max_nodes == 0 {
            return Err(AgentError::InvalidBudget("max_nodes"));
        }
        if self.max_millis == 0 {
            return Err(AgentError::InvalidBudget("max_millis"));
        }
        if self.max_solution_length == 0 {
            return Err(AgentError::InvalidBudget("max_solution_length"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Solved,
    NodeCap,
    TimeCap,
    Exhausted,
}

mod action_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(actions: &[Action], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_actions(actions))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Action>, D::Error> {
        let text = String::deserialize(d)?;
        parse_actions(&text).map_err(|c| serde::de::Error::custom(format!("invalid action {c:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solved: bool,
    #[serde(with = "action_string")]
    pub actions: Vec<Action>,
    pub nodes_expanded: u64,
    pub elapsed_millis: u64,
    pub terminated_by: Termination,
}

impl SolveResult {
    fn finish(solved: bool, actions: Vec<Action>, nodes: u64, elapsed: u64, by: Termination) -> Self {
        SolveResult {
            solved,
            actions,
            nodes_expanded: nodes,
            elapsed_millis: elapsed,
            terminated_by: by,
        }
    }
}

pub type InitFn = Box<dyn Fn() -> Result<(), String> + Send + Sync>;
pub type SolveFn = Box<dyn Fn(&GameState, &Budget) -> Result<Vec<Action>, String> + Send + Sync>;

/// An agent supplied from outside the crate. It must provide a `solve`
/// entry point; `init` is optional and runs during preprocessing.
#[derive(Default)]
pub struct ExternalAgent {
    init: Option<InitFn>,
    solve: Option<SolveFn>,
}

impl fmt::Debug for ExternalAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalAgent")
            .field("init", &self.init.is_some())
            .field("solve", &self.solve.is_some())
            .finish()
    }
}

impl ExternalAgent {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_init(mut self, f: impl Fn() -> Result<(), String> + Send + Sync + 'static) -> Self {
        self.init = Some(Box::new(f));
        self
    }

    pub fn with_solve(
        mut self,
        f: impl Fn(&GameState, &Budget) -> Result<Vec<Action>, String> + Send + Sync + 'static,
    ) -> Self {
        self.solve = Some(Box::new(f));
        self
    }

    /// Blank agent that gives up immediately.
    pub fn template() -> Self {
        Self::new().with_solve(|_, _| Ok(Vec::new()))
    }

    /// Agent without a `solve` entry point; it never passes preprocessing.
    pub fn missing_solve() -> Self {
        Self::new().with_init(|| Ok(()))
    }

    /// Checks the required entry points and runs `init`.
    pub fn preprocess(&self) -> Result<(), AgentError> {
        if self.solve.is_none() {
            return Err(AgentError::Preprocess("missing required function `solve`".into()));
        }
        if let Some(init) = &self.init {
            match catch_unwind(AssertUnwindSafe(init)) {
                Ok(Ok(())) => {}
                Ok(Err(e)) => return Err(AgentError::Preprocess(format!("init failed: {e}"))),
                Err(_) => return Err(AgentError::Preprocess("init panicked".into())),
            }
        }
        Ok(())
    }

    fn run(&self, state: &GameState, budget: &Budget) -> Result<SolveResult, AgentError> {
        self.preprocess()?;
        let solve = self.solve.as_ref().expect("checked by preprocess");
        let actions = match catch_unwind(AssertUnwindSafe(|| solve(state, budget))) {
            Ok(Ok(actions)) => actions,
            Ok(Err(e)) => return Err(AgentError::AgentContractViolation(format!("solve failed: {e}"))),
            Err(_) => return Err(AgentError::AgentContractViolation("solve panicked".into())),
        };
        if actions.len() > budget.max_solution_length {
            return Err(AgentError::AgentContractViolation(format!(
                "{} actions exceed the limit of {}",
                actions.len(),
                budget.max_solution_length
            )));
        }
        let sim = state.simulate(&actions);
        if sim.steps_used < actions.len() {
            return Err(AgentError::AgentContractViolation(format!(
                "actions continue past a terminal state at step {}",
                sim.steps_used
            )));
        }
        let solved = sim.outcome == Outcome::Win;
        let by = if solved {
            Termination::Solved
        } else {
            Termination::Exhausted
        };
        Ok(SolveResult::finish(solved, actions, 0, 0, by))
    }
}

#[derive(Debug, Clone)]
pub enum AgentKind {
    Bfs,
    Dfs,
    BestFirst,
    Random { seed: u64 },
    External(Arc<ExternalAgent>),
}

#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub name: String,
    pub kind: AgentKind,
}

impl AgentSpec {
    pub fn new(name: impl Into<String>, kind: AgentKind) -> Self {
        AgentSpec {
            name: name.into(),
            kind,
        }
    }

    /// The four baseline agents, in leaderboard seeding order.
    pub fn baselines(seed: u64) -> Vec<AgentSpec> {
        vec![
            AgentSpec::new("default", AgentKind::BestFirst),
            AgentSpec::new("bfs", AgentKind::Bfs),
            AgentSpec::new("dfs", AgentKind::Dfs),
            AgentSpec::new("random", AgentKind::Random { seed }),
        ]
    }

    /// Runs the preprocessing check. Built-in agents always pass.
    pub fn preprocess(&self) -> Result<(), AgentError> {
        match &self.kind {
            AgentKind::External(ext) => ext.preprocess(),
            _ => Ok(()),
        }
    }
}

/// Solves one level. `elapsed_millis` covers the whole call, including
/// state construction.
pub fn solve(agent: &AgentSpec, level: &Level, budget: &Budget, clock: &dyn Clock) -> Result<SolveResult, AgentError> {
    budget.validate()?;
    let start = clock.now_millis();
    let state = GameState::init(level)?;
    let mut result = match &agent.kind {
        AgentKind::Bfs => bfs_solve(&state, budget, clock),
        AgentKind::Dfs => dfs_solve(&state, budget, clock),
        AgentKind::BestFirst => best_first_solve(&state, budget, clock),
        AgentKind::Random { seed } => random_solve(&state, budget, *seed),
        AgentKind::External(ext) => ext.run(&state, budget)?,
    };
    result.elapsed_millis = clock.now_millis().saturating_sub(start);
    Ok(result)
}

/// Parent-pointer arena for reconstructing action paths.
#[derive(Default)]
struct PathArena {
    nodes: Vec<(u32, Action)>,
}

const ROOT: u32 = u32::MAX;

impl PathArena {
    fn push(&mut self, parent: u32, action: Action) -> u32 {
        self.nodes.push((parent, action));
        (self.nodes.len() - 1) as u32
    }

    fn path(&self, mut node: u32) -> Vec<Action> {
        let mut out = Vec::new();
        while node != ROOT {
            let (parent, action) = self.nodes[node as usize];
            out.push(action);
            node = parent;
        }
        out.reverse();
        out
    }
}

struct Meter<'a> {
    budget: &'a Budget,
    clock: &'a dyn Clock,
    start: u64,
    nodes: u64,
}

impl<'a> Meter<'a> {
    fn new(budget: &'a Budget, clock: &'a dyn Clock) -> Self {
        Meter {
            budget,
            clock,
            start: clock.now_millis(),
            nodes: 0,
        }
    }

    fn elapsed(&self) -> u64 {
        self.clock.now_millis().saturating_sub(self.start)
    }

    fn exceeded(&self) -> Option<Termination> {
        if self.nodes >= self.budget.max_nodes {
            Some(Termination::NodeCap)
        } else if self.elapsed() >= self.budget.max_millis {
            Some(Termination::TimeCap)
        } else {
            None
        }
    }

    fn done(&self, solved: bool, actions: Vec<Action>, by: Termination) -> SolveResult {
        SolveResult::finish(solved, actions, self.nodes, self.elapsed(), by)
    }
}

fn trivial(state: &GameState, meter: &Meter) -> Option<SolveResult> {
    match state.outcome() {
        Outcome::Win => Some(meter.done(true, Vec::new(), Termination::Solved)),
        Outcome::Lose => Some(meter.done(false, Vec::new(), Termination::Exhausted)),
        Outcome::Ongoing => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pruning {
    /// Skip states whose hash was already generated.
    Duplicates,
    /// Expand every generated state (tree search).
    None,
}

pub fn bfs_solve(state: &GameState, budget: &Budget, clock: &dyn Clock) -> SolveResult {
    bfs_solve_with(state, budget, clock, Pruning::Duplicates)
}

/// Breadth-first search. The goal test runs at generation, so the first
/// win found is a shortest one.
pub fn bfs_solve_with(state: &GameState, budget: &Budget, clock: &dyn Clock, pruning: Pruning) -> SolveResult {
    let mut meter = Meter::new(budget, clock);
    if let Some(done) = trivial(state, &meter) {
        return done;
    }
    let mut arena = PathArena::default();
    let mut seen = HashSet::new();
    seen.insert(state.state_hash());
    let mut queue = VecDeque::new();
    queue.push_back((ROOT, state.clone(), 0usize));

    while let Some((node, current, depth)) = queue.pop_front() {
        if let Some(cap) = meter.exceeded() {
            return meter.done(false, Vec::new(), cap);
        }
        meter.nodes += 1;
        for action in Action::ALL {
            let child = current.step(action).expect("queued states are ongoing");
            match child.outcome() {
                Outcome::Win => {
                    let id = arena.push(node, action);
                    return meter.done(true, arena.path(id), Termination::Solved);
                }
                Outcome::Lose => continue,
                Outcome::Ongoing => {}
            }
            if depth + 1 >= budget.max_solution_length {
                continue;
            }
            if pruning == Pruning::Duplicates && !seen.insert(child.state_hash()) {
                continue;
            }
            let id = arena.push(node, action);
            queue.push_back((id, child, depth + 1));
        }
    }
    meter.done(false, Vec::new(), Termination::Exhausted)
}

/// Depth-first search with duplicate pruning, limited to
/// `max_solution_length`. Returns the first win found, not necessarily the
/// shortest.
pub fn dfs_solve(state: &GameState, budget: &Budget, clock: &dyn Clock) -> SolveResult {
    let mut meter = Meter::new(budget, clock);
    if let Some(done) = trivial(state, &meter) {
        return done;
    }
    let mut arena = PathArena::default();
    let mut seen = HashSet::new();
    seen.insert(state.state_hash());
    let mut stack = vec![(ROOT, state.clone(), 0usize)];

    while let Some((node, current, depth)) = stack.pop() {
        if let Some(cap) = meter.exceeded() {
            return meter.done(false, Vec::new(), cap);
        }
        meter.nodes += 1;
        let mut children = Vec::with_capacity(Action::ALL.len());
        for action in Action::ALL {
            let child = current.step(action).expect("stacked states are ongoing");
            match child.outcome() {
                Outcome::Win => {
                    let id = arena.push(node, action);
                    return meter.done(true, arena.path(id), Termination::Solved);
                }
                Outcome::Lose => continue,
                Outcome::Ongoing => {}
            }
            if depth + 1 < budget.max_solution_length && seen.insert(child.state_hash()) {
                children.push((action, child));
            }
        }
        // reversed so the first action in expansion order is explored first
        for (action, child) in children.into_iter().rev() {
            let id = arena.push(node, action);
            stack.push((id, child, depth + 1));
        }
    }
    meter.done(false, Vec::new(), Termination::Exhausted)
}

/// Distance estimate for best-first search.
///
/// With WIN objects present: the smallest Manhattan distance from a YOU
/// object to a WIN object. Otherwise the distance from a YOU object to the
/// nearest word plus `width + height`, so every state without a WIN object
/// ranks behind every state with one. A won state scores 0 and a lost state
/// (or one with no YOU object) scores `u32::MAX`.
pub fn heuristic(state: &GameState) -> u32 {
    match state.outcome() {
        Outcome::Win => return 0,
        Outcome::Lose => return u32::MAX,
        Outcome::Ongoing => {}
    }
    let board = state.board();
    let index = state.index();
    let you: Vec<_> = index.you().iter().map(|&i| board.sprites[i].pos).collect();
    if you.is_empty() {
        return u32::MAX;
    }
    let nearest = |targets: &mut dyn Iterator<Item = crate::level::Position>| {
        targets.flat_map(|t| you.iter().map(move |&y| y.manhattan(t))).min()
    };
    let mut wins = index.win().iter().map(|&i| board.sprites[i].pos);
    if let Some(d) = nearest(&mut wins) {
        return d as u32;
    }
    let offset = board.width + board.height;
    let mut words = board.sprites.iter().filter(|s| s.kind.is_word()).map(|s| s.pos);
    match nearest(&mut words) {
        Some(d) => (d + offset) as u32,
        None => (2 * offset) as u32,
    }
}

/// Best-first search ordered by ascending [`heuristic`], ties broken by
/// insertion order.
pub fn best_first_solve(state: &GameState, budget: &Budget, clock: &dyn Clock) -> SolveResult {
    let mut meter = Meter::new(budget, clock);
    if let Some(done) = trivial(state, &meter) {
        return done;
    }
    let mut arena = PathArena::default();
    let mut seen = HashSet::new();
    seen.insert(state.state_hash());
    let mut states: Vec<Option<(GameState, usize)>> = vec![Some((state.clone(), 0))];
    let mut nodes_of: Vec<u32> = vec![ROOT];
    let mut open = BinaryHeap::new();
    open.push(Reverse((heuristic(state), 0usize)));

    while let Some(Reverse((_, slot))) = open.pop() {
        if let Some(cap) = meter.exceeded() {
            return meter.done(false, Vec::new(), cap);
        }
        let (current, depth) = states[slot].take().expect("each slot is popped once");
        let node = nodes_of[slot];
        meter.nodes += 1;
        for action in Action::ALL {
            let child = current.step(action).expect("open states are ongoing");
            match child.outcome() {
                Outcome::Win => {
                    let id = arena.push(node, action);
                    return meter.done(true, arena.path(id), Termination::Solved);
                }
                Outcome::Lose => continue,
                Outcome::Ongoing => {}
            }
            if depth + 1 >= budget.max_solution_length || !seen.insert(child.state_hash()) {
                continue;
            }
            let id = arena.push(node, action);
            let h = heuristic(&child);
            let seq = states.len();
            states.push(Some((child, depth + 1)));
            nodes_of.push(id);
            open.push(Reverse((h, seq)));
        }
    }
    meter.done(false, Vec::new(), Termination::Exhausted)
}

/// The fixed-length random sequence for `seed`.
pub fn random_sequence(seed: u64) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..RANDOM_SEQUENCE_LEN)
        .map(|_| Action::ALL[rng.random_range(0..Action::ALL.len())])
        .collect()
}

/// Plays a seeded random sequence of 50 actions. The returned actions stop
/// at the first terminal state (or at `max_solution_length`).
pub fn random_solve(state: &GameState, budget: &Budget, rng_seed: u64) -> SolveResult {
    let mut actions = random_sequence(rng_seed);
    actions.truncate(budget.max_solution_length);
    let sim = state.simulate(&actions);
    actions.truncate(sim.steps_used);
    let solved = sim.outcome == Outcome::Win;
    let by = if solved {
        Termination::Solved
    } else {
        Termination::Exhausted
    };
    SolveResult::finish(solved, actions, sim.steps_used as u64, 0, by)
}
