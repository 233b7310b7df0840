//! Flag resolution: command-line flag, then config file, then default.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// A flat TOML document whose keys mirror long flag names. A table named
/// after the subcommand overrides top-level keys for that subcommand.
#[derive(Debug, Default)]
pub struct Layer {
    top: toml::Table,
    section: toml::Table,
    used: RefCell<BTreeSet<String>>,
}

fn scalar(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        toml::Value::Array(items) => items.iter().map(scalar).collect::<Option<Vec<_>>>().map(|s| s.join(",")),
        _ => None,
    }
}

impl Layer {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text, command).map_err(|e| CliError::usage(format!("config file {}: {e}", path.display())))
    }

    pub fn parse(text: &str, command: &str) -> Result<Self, String> {
        let mut top: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        let section = match top.remove(command) {
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(format!("'{command}' must be a table")),
            None => toml::Table::new(),
        };
        // Tables for other subcommands are not ours to check.
        top.retain(|_, v| !v.is_table());
        Ok(Self {
            top,
            section,
            used: RefCell::default(),
        })
    }

    fn raw(&self, key: &str) -> Result<Option<String>, CliError> {
        let Some(v) = self.section.get(key).or_else(|| self.top.get(key)) else {
            return Ok(None);
        };
        self.used.borrow_mut().insert(key.to_string());
        scalar(v)
            .map(Some)
            .ok_or_else(|| CliError::usage(format!("config key '{key}' must be a string, number, boolean or array")))
    }

    /// The flag if given, else the file value, else `None`.
    pub fn opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(Some(v));
        }
        match self.raw(key)? {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::usage(format!("config key '{key}': {e}"))),
        }
    }

    pub fn get<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    /// Boolean switches: set by the flag or by the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.opt::<bool>(None, key)?.unwrap_or(false))
    }

    /// Keys present in the file (top level or this command's table) that no
    /// flag asked for.
    pub fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.top
            .keys()
            .chain(self.section.keys())
            .filter(|k| !used.contains(*k))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}
