//! A dataset directory: `config.json` holding the calendar and
//! `events.jsonl` holding the event store log.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use obs_core::store::EventStore;
use obs_core::DatasetConfig;

pub const CONFIG_FILE: &str = "config.json";
pub const STORE_FILE: &str = "events.jsonl";

pub struct Dataset {
    pub config: DatasetConfig,
    pub store: EventStore,
}

pub fn read_config(dir: &Path) -> Result<DatasetConfig> {
    let path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let config: DatasetConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    config
        .validate()
        .with_context(|| format!("invalid {}", path.display()))?;
    Ok(config)
}

pub fn write_config(dir: &Path, config: &DatasetConfig) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut text = serde_json::to_string_pretty(config)?;
    text.push('\n');
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn open(dir: &Path) -> Result<Dataset> {
    let config = read_config(dir)?;
    let path = dir.join(STORE_FILE);
    let store = EventStore::open(&path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Dataset { config, store })
}

/// Starts an empty dataset, replacing any store already in `dir`.
pub fn create(dir: &Path, config: &DatasetConfig) -> Result<Dataset> {
    write_config(dir, config)?;
    let path = dir.join(STORE_FILE);
    if path.exists() {
        fs::remove_file(&path).with_context(|| format!("removing {}", path.display()))?;
    }
    open(dir)
}
