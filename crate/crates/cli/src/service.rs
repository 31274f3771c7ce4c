//! Evaluation and play-frame logic shared by the CLI and the HTTP server.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use chrono::{DateTime, Utc};
use keke_core::evaluator::{report_file_name, write_report};
use keke_core::{
    evaluate_agent, AgentReport, Budget, Clock, EvalContext, FakeClock, GameState, LevelSet, Outcome, SystemClock,
};
use serde::{Deserialize, Serialize};

use crate::store::agent_by_name;

/// Budget overrides and run options accepted by every entry point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    #[serde(default)]
    pub max_nodes: Option<u64>,
    #[serde(default)]
    pub max_millis: Option<u64>,
    #[serde(default)]
    pub max_len: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Freeze the clock and the submission time so output is reproducible.
    #[serde(default)]
    pub deterministic: bool,
}

impl RunOptions {
    pub fn budget(&self) -> Result<Budget> {
        let d = Budget::default();
        let budget = Budget::new(
            self.max_nodes.unwrap_or(d.max_nodes),
            self.max_millis.unwrap_or(d.max_millis),
            self.max_len.unwrap_or(d.max_solution_length),
        )?;
        Ok(budget)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn clock(&self) -> Box<dyn Clock> {
        if self.deterministic {
            Box::new(FakeClock::frozen())
        } else {
            Box::new(SystemClock::new())
        }
    }

    pub fn submitted_at(&self) -> DateTime<Utc> {
        if self.deterministic {
            DateTime::UNIX_EPOCH
        } else {
            Utc::now()
        }
    }
}

/// Evaluates one registered agent on a level set.
pub fn evaluate(agent_name: &str, levelset: &LevelSet, opts: &RunOptions) -> Result<AgentReport> {
    let agent = agent_by_name(agent_name, opts.seed()).ok_or_else(|| anyhow!("unknown agent {agent_name:?}"))?;
    let clock = opts.clock();
    let ctx = EvalContext {
        budget: opts.budget()?,
        clock: clock.as_ref(),
        submitted_at: opts.submitted_at(),
    };
    Ok(evaluate_agent(&agent, levelset, &ctx))
}

pub fn store_report(dir: &Path, report: &AgentReport) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating report directory {}", dir.display()))?;
    let path = dir.join(report_file_name(&report.agent, &report.levelset));
    write_report(report, &path).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// One rendered state, as served to the UI and printed by `play`/`replay`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub ascii: String,
    pub rules: Vec<String>,
    pub outcome: Outcome,
    pub tick: u64,
}

impl Frame {
    pub fn of(state: &GameState) -> Self {
        Frame {
            ascii: keke_core::serialize_ascii_map(state.board()),
            rules: state.rules().render(),
            outcome: state.outcome(),
            tick: state.tick(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("tick {}  [{}]\n{}\n", self.tick, self.outcome, self.ascii);
        if self.rules.is_empty() {
            out.push_str("(no rules)\n");
        }
        for rule in &self.rules {
            out.push_str(rule);
            out.push('\n');
        }
        out
    }
}
