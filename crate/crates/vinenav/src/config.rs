//! Run configuration files (TOML). Every field is optional and falls back
//! to its default; unknown fields are rejected.

use std::path::{Path, PathBuf};

use toml::de::{DeTable, DeValue};
use vinenav_core::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Syntax errors, unknown fields and type mismatches.
    #[error("{0}")]
    Parse(String),
    /// A well-formed value that violates an invariant.
    #[error("{location}{source}")]
    Invalid {
        location: String,
        source: vinenav_core::Error,
    },
}

/// Parses a configuration document and validates it.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate().map_err(|source| {
        let location = match &source {
            vinenav_core::Error::InvalidConfig { field, .. } => field_line(text, field)
                .map(|line| format!("line {line}: "))
                .unwrap_or_default(),
            _ => String::new(),
        };
        ConfigError::Invalid { location, source }
    })?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// One-based line of the value at the dotted `field` path, if the document
/// sets it.
pub fn field_line(text: &str, field: &str) -> Option<usize> {
    let root = DeTable::parse(text).ok()?;
    let mut table = root.get_ref();
    let mut parts = field.split('.').peekable();
    while let Some(part) = parts.next() {
        let (_, value) = table.iter().find(|(k, _)| k.get_ref() == part)?;
        if parts.peek().is_none() {
            let offset = value.span().start;
            return Some(text[..offset].matches('\n').count() + 1);
        }
        match value.get_ref() {
            DeValue::Table(t) => table = t,
            _ => return None,
        }
    }
    None
}

/// The configuration with every default filled in, as TOML.
pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run config serializes to TOML")
}
