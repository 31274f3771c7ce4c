//! Scoring, per-agent reports and the leaderboard ordering.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{solve, AgentSpec, Budget};
use crate::clock::Clock;
use crate::engine::{format_actions, parse_actions};
use crate::level::LevelSet;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("score is undefined for {0}")]
    Domain(String),
    #[error("report does not match the schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Competition metric for one solved level: inverse solve time in seconds,
/// divided by the solution length. Higher is better.
pub fn level_score(elapsed_millis: u64, length: usize) -> Result<f64, EvalError> {
    if elapsed_millis == 0 {
        return Err(EvalError::Domain("zero elapsed time".into()));
    }
    if length == 0 {
        return Err(EvalError::Domain("an empty solution".into()));
    }
    let seconds = elapsed_millis as f64 / 1000.0;
    Ok((1.0 / seconds) / length as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub id: String,
    pub solved: bool,
    pub solution: String,
    pub length: usize,
    pub elapsed_millis: u64,
    pub nodes_expanded: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent: String,
    pub levelset: String,
    pub submitted_at: DateTime<Utc>,
    pub error: Option<String>,
    pub results: Vec<LevelResult>,
    pub solve_rate: f64,
    pub avg_score: f64,
}

fn aggregate(results: &[LevelResult]) -> (f64, f64) {
    if results.is_empty() {
        return (0.0, 0.0);
    }
    let solved: Vec<f64> = results.iter().filter(|r| r.solved).map(|r| r.score).collect();
    let rate = solved.len() as f64 / results.len() as f64;
    let avg = if solved.is_empty() {
        0.0
    } else {
        solved.iter().sum::<f64>() / solved.len() as f64
    };
    (rate, avg)
}

impl AgentReport {
    pub fn new(
        agent: impl Into<String>,
        levelset: impl Into<String>,
        submitted_at: DateTime<Utc>,
        error: Option<String>,
        results: Vec<LevelResult>,
    ) -> Self {
        let (solve_rate, avg_score) = aggregate(&results);
        AgentReport {
            agent: agent.into(),
            levelset: levelset.into(),
            submitted_at,
            error,
            results,
            solve_rate,
            avg_score,
        }
    }

    pub fn solved_count(&self) -> usize {
        self.results.iter().filter(|r| r.solved).count()
    }

    pub fn avg_nodes(&self) -> f64 {
        if self.results.is_empty() {
            return 0.0;
        }
        self.results.iter().map(|r| r.nodes_expanded as f64).sum::<f64>() / self.results.len() as f64
    }

    pub fn result(&self, level_id: &str) -> Option<&LevelResult> {
        self.results.iter().find(|r| r.id == level_id)
    }

    fn validate(&self) -> Result<(), EvalError> {
        let bad = |msg: String| Err(EvalError::Schema(msg));
        for r in &self.results {
            if parse_actions(&r.solution).is_err() {
                return bad(format!("level {:?}: solution contains an invalid action", r.id));
            }
            if r.solution.chars().count() != r.length {
                return bad(format!("level {:?}: length does not match the solution", r.id));
            }
            if !r.score.is_finite() || r.score < 0.0 {
                return bad(format!("level {:?}: score must be a non-negative number", r.id));
            }
            if r.solved && (r.length == 0 || r.score <= 0.0) {
                return bad(format!(
                    "level {:?}: solved levels need a positive length and score",
                    r.id
                ));
            }
            if !r.solved && r.score != 0.0 {
                return bad(format!("level {:?}: unsolved levels score zero", r.id));
            }
        }
        let (rate, avg) = aggregate(&self.results);
        if (rate - self.solve_rate).abs() > 1e-9 || (avg - self.avg_score).abs() > 1e-9 * avg.abs().max(1.0) {
            return bad("solve_rate or avg_score disagrees with the results".into());
        }
        Ok(())
    }
}

/// Inputs of one evaluation run besides the agent and the levels.
pub struct EvalContext<'a> {
    pub budget: Budget,
    pub clock: &'a dyn Clock,
    pub submitted_at: DateTime<Utc>,
}

/// Runs `agent` over every level in file order. A preprocessing failure is
/// recorded in the report and no level is attempted.
pub fn evaluate_agent(agent: &AgentSpec, levelset: &LevelSet, ctx: &EvalContext<'_>) -> AgentReport {
    if let Err(e) = agent.preprocess() {
        return AgentReport::new(
            &agent.name,
            &levelset.name,
            ctx.submitted_at,
            Some(e.to_string()),
            Vec::new(),
        );
    }
    let results = levelset
        .levels
        .iter()
        .map(|level| match solve(agent, level, &ctx.budget, ctx.clock) {
            Ok(res) => {
                let length = res.actions.len();
                let solved = res.solved && length > 0;
                // sub-millisecond solves are scored as one millisecond
                let score = if solved {
                    level_score(res.elapsed_millis.max(1), length).expect("inputs are positive")
                } else {
                    0.0
                };
                LevelResult {
                    id: level.id.clone(),
                    solved,
                    solution: format_actions(&res.actions),
                    length,
                    elapsed_millis: res.elapsed_millis,
                    nodes_expanded: res.nodes_expanded,
                    score,
                }
            }
            Err(_) => LevelResult {
                id: level.id.clone(),
                solved: false,
                solution: String::new(),
                length: 0,
                elapsed_millis: 0,
                nodes_expanded: 0,
                score: 0.0,
            },
        })
        .collect();
    AgentReport::new(&agent.name, &levelset.name, ctx.submitted_at, None, results)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Leaderboard {
    pub entries: Vec<AgentReport>,
}

fn rank_order(a: &AgentReport, b: &AgentReport) -> Ordering {
    a.error
        .is_some()
        .cmp(&b.error.is_some())
        .then_with(|| b.solved_count().cmp(&a.solved_count()))
        .then_with(|| b.avg_score.total_cmp(&a.avg_score))
        .then_with(|| a.submitted_at.cmp(&b.submitted_at))
}

/// Orders reports: error-free first, then more solved levels, then higher
/// average score, then earlier submission. Full ties keep input order.
pub fn rank_agents(mut reports: Vec<AgentReport>) -> Leaderboard {
    reports.sort_by(rank_order);
    Leaderboard { entries: reports }
}

impl Leaderboard {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>4}  {:<16} {:>8} {:>12} {:>12}",
            "rank", "agent", "solved%", "avg_score", "avg nodes"
        );
        for (i, r) in self.entries.iter().enumerate() {
            let agent = match &r.error {
                Some(_) => format!("{} (error)", r.agent),
                None => r.agent.clone(),
            };
            let _ = writeln!(
                out,
                "{:>4}  {:<16} {:>7.2}% {:>12.3} {:>12.1}",
                i + 1,
                agent,
                r.solve_rate * 100.0,
                r.avg_score,
                r.avg_nodes()
            );
        }
        out
    }
}

pub fn report_to_json(report: &AgentReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    text
}

pub fn report_from_json(text: &str) -> Result<AgentReport, EvalError> {
    let report: AgentReport = serde_json::from_str(text).map_err(|e| EvalError::Schema(e.to_string()))?;
    report.validate()?;
    Ok(report)
}

pub fn write_report(report: &AgentReport, path: &Path) -> Result<(), EvalError> {
    fs::write(path, report_to_json(report))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<AgentReport, EvalError> {
    report_from_json(&fs::read_to_string(path)?)
}

/// File name used for a stored report.
pub fn report_file_name(agent: &str, levelset: &str) -> String {
    format!("{agent}__{levelset}.json")
}
