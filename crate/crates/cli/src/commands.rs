//! Subcommands of the `keke` binary. Each returns a process exit code.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use keke_core::engine::parse_actions;
use keke_core::evaluator::{read_report, report_file_name};
use keke_core::{rank_agents, solve, Action, GameState, Level, Outcome};

use crate::service::{evaluate, store_report, Frame, RunOptions};
use crate::store::{agent_by_name, LevelStore, AGENT_NAMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSOLVED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "keke", version, about = "Rule-parsing puzzle engine, solvers and evaluator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one level and print the result as JSON.
    Solve(SolveArgs),
    /// Evaluate one or all agents on a level set and print the leaderboard.
    Evaluate(EvaluateArgs),
    /// Play a level in the terminal (wasd or arrows, space waits, q quits).
    Play(PlayArgs),
    /// Step through a stored or given solution frame by frame.
    Replay(ReplayArgs),
    /// Serve the REST API and the web UI.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub max_nodes: Option<u64>,
    #[arg(long)]
    pub max_millis: Option<u64>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Zero timing fields so output is reproducible.
    #[arg(long)]
    pub deterministic: bool,
}

impl BudgetArgs {
    pub fn options(&self) -> RunOptions {
        RunOptions {
            max_nodes: self.max_nodes,
            max_millis: self.max_millis,
            max_len: self.max_len,
            seed: self.seed,
            deterministic: self.deterministic,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub agent: String,
    /// Level-set name or path to a level-set JSON file.
    #[arg(long, default_value = "demo")]
    pub levelset: String,
    #[arg(long)]
    pub level: String,
    /// Also write the JSON result to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Agent name, or `all` for every registered agent.
    #[arg(long, default_value = "all")]
    pub agent: String,
    #[arg(long, default_value = "demo")]
    pub levelset: String,
    /// Report directory.
    #[arg(long, default_value = "reports")]
    pub out: PathBuf,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlayArgs {
    #[arg(long, default_value = "demo")]
    pub levelset: String,
    #[arg(long)]
    pub level: String,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long, default_value = "demo")]
    pub levelset: String,
    #[arg(long)]
    pub level: String,
    /// Replay this agent's stored report; without it the level's reference
    /// solution is used.
    #[arg(long)]
    pub agent: Option<String>,
    /// Report directory.
    #[arg(long, default_value = "reports")]
    pub out: PathBuf,
    /// Explicit action string (U/D/L/R/W), overriding any report.
    #[arg(long)]
    pub solution: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Report directory.
    #[arg(long, default_value = "reports")]
    pub out: PathBuf,
}

/// Runs a parsed command. `serve` blocks until the server stops.
pub fn run(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let store = match LevelStore::from_env() {
        Ok(store) => store,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_ERROR;
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args, &store, out),
        Command::Evaluate(args) => cmd_evaluate(args, &store, out),
        Command::Play(args) => cmd_play(args, &store, input, out),
        Command::Replay(args) => cmd_replay(args, &store, out),
        Command::Serve(args) => crate::server::run_blocking(args, store),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn find_level(store: &LevelStore, levelset: &str, id: &str) -> Result<Level> {
    let set = store.resolve(levelset)?;
    set.get(id)
        .cloned()
        .ok_or_else(|| anyhow!("level {id:?} not found in level set {:?}", set.name))
}

pub fn cmd_solve(args: &SolveArgs, store: &LevelStore, out: &mut dyn Write) -> Result<i32> {
    let opts = args.budget.options();
    let agent = agent_by_name(&args.agent, opts.seed()).ok_or_else(|| anyhow!("unknown agent {:?}", args.agent))?;
    let level = find_level(store, &args.levelset, &args.level)?;
    let budget = opts.budget()?;
    let clock = opts.clock();
    let result = solve(&agent, &level, &budget, clock.as_ref())?;
    let json = serde_json::to_string_pretty(&result)?;
    if let Some(path) = &args.out {
        std::fs::write(path, format!("{json}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    writeln!(out, "{json}")?;
    Ok(if result.solved { EXIT_OK } else { EXIT_UNSOLVED })
}

pub fn cmd_evaluate(args: &EvaluateArgs, store: &LevelStore, out: &mut dyn Write) -> Result<i32> {
    let opts = args.budget.options();
    let names: Vec<&str> = if args.agent == "all" {
        AGENT_NAMES.to_vec()
    } else {
        vec![args.agent.as_str()]
    };
    for name in &names {
        if agent_by_name(name, 0).is_none() {
            bail!("unknown agent {name:?}");
        }
    }
    opts.budget()?;
    let set = store.resolve(&args.levelset)?;
    let mut reports = Vec::with_capacity(names.len());
    for name in names {
        let report = evaluate(name, &set, &opts)?;
        store_report(&args.out, &report)?;
        reports.push(report);
    }
    let board = rank_agents(reports);
    write!(out, "{}", board.render_table())?;
    Ok(EXIT_OK)
}

enum Key {
    Act(Action),
    Quit,
}

/// Decodes one line of keyboard input: wasd, arrow escape sequences,
/// space for wait and q to quit. Anything else is ignored.
fn decode_keys(line: &str) -> Vec<Key> {
    let mut keys = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        let key = match c {
            'w' | 'W' => Key::Act(Action::Up),
            's' | 'S' => Key::Act(Action::Down),
            'a' | 'A' => Key::Act(Action::Left),
            'd' | 'D' => Key::Act(Action::Right),
            ' ' | '.' => Key::Act(Action::Wait),
            'q' | 'Q' => Key::Quit,
            '\u{1b}' => {
                if chars.next_if_eq(&'[').is_none() {
                    continue;
                }
                match chars.next() {
                    Some('A') => Key::Act(Action::Up),
                    Some('B') => Key::Act(Action::Down),
                    Some('C') => Key::Act(Action::Right),
                    Some('D') => Key::Act(Action::Left),
                    _ => continue,
                }
            }
            _ => continue,
        };
        keys.push(key);
    }
    keys
}

fn banner(out: &mut dyn Write, outcome: Outcome) -> Result<()> {
    match outcome {
        Outcome::Win => writeln!(out, "*** WIN ***")?,
        Outcome::Lose => writeln!(out, "*** LOSE ***")?,
        Outcome::Ongoing => {}
    }
    Ok(())
}

/// Exit code 0 on a win or quit, 2 on a loss.
pub fn cmd_play(args: &PlayArgs, store: &LevelStore, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32> {
    let level = find_level(store, &args.levelset, &args.level)?;
    let mut state = GameState::init(&level)?;
    write!(out, "{}", Frame::of(&state).render())?;
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(EXIT_OK);
        }
        for key in decode_keys(&line) {
            let action = match key {
                Key::Quit => return Ok(EXIT_OK),
                Key::Act(a) => a,
            };
            state = state.step(action)?;
            write!(out, "{}", Frame::of(&state).render())?;
            if state.outcome().is_terminal() {
                banner(out, state.outcome())?;
                return Ok(if state.outcome() == Outcome::Win {
                    EXIT_OK
                } else {
                    EXIT_UNSOLVED
                });
            }
        }
    }
}

/// Prints one frame per state: the start plus one per action applied.
pub fn cmd_replay(args: &ReplayArgs, store: &LevelStore, out: &mut dyn Write) -> Result<i32> {
    let set = store.resolve(&args.levelset)?;
    let level = find_level(store, &args.levelset, &args.level)?;
    let solution = match (&args.solution, &args.agent) {
        (Some(s), _) => s.clone(),
        (None, Some(agent)) => {
            let path = args.out.join(report_file_name(agent, &set.name));
            let report = read_report(&path).with_context(|| format!("reading {}", path.display()))?;
            report
                .result(&level.id)
                .map(|r| r.solution.clone())
                .ok_or_else(|| anyhow!("report {} has no result for level {:?}", path.display(), level.id))?
        }
        (None, None) => level.solution.clone(),
    };
    let actions = parse_actions(&solution).map_err(|c| anyhow!("invalid action {c:?} in solution"))?;
    let mut state = GameState::init(&level)?;
    let total = actions.len();
    writeln!(out, "frame 0/{total}")?;
    write!(out, "{}", Frame::of(&state).render())?;
    for (i, &action) in actions.iter().enumerate() {
        if state.outcome().is_terminal() {
            break;
        }
        state = state.step(action)?;
        writeln!(out, "frame {}/{total} ({})", i + 1, action.code())?;
        write!(out, "{}", Frame::of(&state).render())?;
    }
    banner(out, state.outcome())?;
    Ok(if state.outcome() == Outcome::Win {
        EXIT_OK
    } else {
        EXIT_UNSOLVED
    })
}
