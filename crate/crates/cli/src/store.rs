//! Level-set lookup and the agent registry.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use keke_core::{load_level_set, AgentKind, AgentSpec, LevelSet};

/// Overrides the bundled level sets with every `*.json` file in a directory.
pub const LEVELSET_DIR_ENV: &str = "KEKE_LEVELSET_DIR";

const BUNDLED: &[&str] = &[include_str!("../../../levels/demo.json")];

#[derive(Debug, Clone)]
pub struct LevelStore {
    sets: Vec<LevelSet>,
}

impl LevelStore {
    pub fn bundled() -> Self {
        let sets = BUNDLED
            .iter()
            .map(|text| load_level_set(text).expect("bundled level sets are valid"))
            .collect();
        LevelStore { sets }
    }

    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading level-set directory {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let sets = paths.iter().map(|p| load_file(p)).collect::<Result<_>>()?;
        Ok(LevelStore { sets })
    }

    /// Bundled sets, or the directory named by `KEKE_LEVELSET_DIR`.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(LEVELSET_DIR_ENV) {
            Some(dir) => Self::from_dir(Path::new(&dir)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.sets.iter().map(|s| s.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&LevelSet> {
        self.sets.iter().find(|s| s.name == name)
    }

    /// Accepts either a set name or a path to a level-set file.
    pub fn resolve(&self, name_or_path: &str) -> Result<LevelSet> {
        if let Some(set) = self.get(name_or_path) {
            return Ok(set.clone());
        }
        let path = Path::new(name_or_path);
        if path.is_file() {
            return load_file(path);
        }
        Err(anyhow!("unknown level set {name_or_path:?}"))
    }
}

fn load_file(path: &Path) -> Result<LevelSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_level_set(&text).with_context(|| format!("loading {}", path.display()))
}

/// Registered agents, in the order `all` evaluates them.
pub const AGENT_NAMES: [&str; 4] = ["default", "bfs", "dfs", "random"];

pub fn agent_by_name(name: &str, seed: u64) -> Option<AgentSpec> {
    let kind = match name {
        "default" | "best-first" => AgentKind::BestFirst,
        "bfs" => AgentKind::Bfs,
        "dfs" => AgentKind::Dfs,
        "random" => AgentKind::Random { seed },
        _ => return None,
    };
    let canonical = if name == "best-first" { "default" } else { name };
    Some(AgentSpec::new(canonical, kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_demo_set() {
        let store = LevelStore::bundled();
        assert_eq!(store.names(), ["demo"]);
        assert!(store.get("demo").unwrap().get("one-move").is_some());
        assert!(store.resolve("nope").is_err());
    }

    #[test]
    fn registry() {
        for name in AGENT_NAMES {
            assert_eq!(agent_by_name(name, 0).unwrap().name, name);
        }
        assert_eq!(agent_by_name("best-first", 0).unwrap().name, "default");
        assert!(agent_by_name("mcts", 0).is_none());
    }
}
