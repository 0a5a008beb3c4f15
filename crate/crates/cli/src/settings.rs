//! Config file loading. A config is a TOML table with optional top-level
//! `seed`, `workers`, `out_dir`, `format` and one table per subcommand whose
//! keys mirror that subcommand's flags. Flags given on the command line win.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::commands::{AcceptanceArgs, ChainArgs, ExtendArgs, KnappArgs, NormArgs, NormalFormArgs, OdeArgs, SurfaceArgs};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }

    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    surface: Option<toml::Value>,
    norm: Option<toml::Value>,
    extend: Option<toml::Value>,
    chain: Option<toml::Value>,
    knapp: Option<toml::Value>,
    ode: Option<toml::Value>,
    normalform: Option<toml::Value>,
    acceptance: Option<toml::Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        // every section must match its schema, even when another subcommand runs
        check::<SurfaceArgs>("surface", &cfg.surface)?;
        check::<NormArgs>("norm", &cfg.norm)?;
        check::<ExtendArgs>("extend", &cfg.extend)?;
        check::<ChainArgs>("chain", &cfg.chain)?;
        check::<KnappArgs>("knapp", &cfg.knapp)?;
        check::<OdeArgs>("ode", &cfg.ode)?;
        check::<NormalFormArgs>("normalform", &cfg.normalform)?;
        check::<AcceptanceArgs>("acceptance", &cfg.acceptance)?;
        Ok(cfg)
    }

    pub fn section(&self, name: &str) -> Option<&toml::Value> {
        match name {
            "surface" => self.surface.as_ref(),
            "norm" => self.norm.as_ref(),
            "extend" => self.extend.as_ref(),
            "chain" => self.chain.as_ref(),
            "knapp" => self.knapp.as_ref(),
            "ode" => self.ode.as_ref(),
            "normalform" => self.normalform.as_ref(),
            "acceptance" => self.acceptance.as_ref(),
            _ => None,
        }
    }
}

fn check<T: DeserializeOwned>(name: &str, v: &Option<toml::Value>) -> Result<(), CliError> {
    if let Some(v) = v {
        let json = serde_json::to_value(v).map_err(|e| CliError::Schema(format!("[{name}]: {e}")))?;
        serde_json::from_value::<T>(json).map_err(|e| CliError::Schema(format!("[{name}]: {e}")))?;
    }
    Ok(())
}

/// Overlays the flags that were given onto the config section.
pub fn merge<T: Serialize + DeserializeOwned>(name: &str, cli: &T, file: Option<&toml::Value>) -> Result<T, CliError> {
    let mut base = match file {
        Some(v) => serde_json::to_value(v).map_err(|e| CliError::Schema(format!("[{name}]: {e}")))?,
        None => Value::Object(Default::default()),
    };
    let Value::Object(over) = serde_json::to_value(cli).expect("args serialise") else {
        unreachable!("args are structs")
    };
    let Value::Object(map) = &mut base else {
        return Err(CliError::Schema(format!("[{name}] must be a table")));
    };
    for (k, v) in over {
        if !v.is_null() {
            map.insert(k, v);
        }
    }
    serde_json::from_value(base).map_err(|e| CliError::Schema(format!("[{name}]: {e}")))
}

/// sha256 of the canonical JSON of everything that determines the output.
pub fn config_hash(resolved: &Value) -> String {
    let text = serde_json::to_string(resolved).expect("value serialises");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
