//! Simulation engine, search agents and evaluation harness for a
//! Sokoban-like puzzle game whose rules are spelled out by word blocks on
//! the board.
//!
//! A level is an ASCII map ([`level`]). Word lines such as `BABA IS YOU`
//! are read into a [`rules::RuleSet`] on every tick, and the
//! [`engine::GameState`] machine applies one of five actions at a time. The
//! [`agents`] module solves levels by search and [`evaluator`] scores and
//! ranks agents over level sets.

pub mod agents;
pub mod clock;
pub mod engine;
pub mod evaluator;
pub mod level;
pub mod rules;

pub use agents::{solve, AgentError, AgentKind, AgentSpec, Budget, ExternalAgent, SolveResult, Termination};
pub use clock::{Clock, FakeClock, SystemClock};
pub use engine::{Action, EngineError, GameState, Outcome};
pub use evaluator::{evaluate_agent, rank_agents, AgentReport, EvalContext, Leaderboard, LevelResult};
pub use level::{load_level_set, parse_ascii_map, serialize_ascii_map, Board, Level, LevelError, LevelSet};
pub use rules::{Rule, RuleSet};
