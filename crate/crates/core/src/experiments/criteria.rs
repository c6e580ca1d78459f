//! Versioned study parameters and acceptance thresholds.
//!
//! The table for each study lists its default `seeds`, the names of the
//! `criteria` it must report, and every tunable parameter. Thresholds are
//! ordinary parameters, so a relaxed run has to say so in its overrides.

use std::sync::OnceLock;

use crate::error::{HdfeError, Result};
use crate::experiments::ExperimentName;

pub const CRITERIA_VERSION: u32 = 1;

/// The embedded criteria file.
pub const CRITERIA_TOML: &str = include_str!("criteria.toml");

#[derive(Debug, Clone)]
pub struct Criteria {
    pub version: u32,
    studies: toml::Table,
}

impl Criteria {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| HdfeError::Config(e.message().to_string()))?;
        let version = table
            .remove("version")
            .and_then(|v| v.as_integer())
            .ok_or_else(|| HdfeError::Config("criteria file lacks an integer `version`".into()))?;
        Ok(Criteria {
            version: version as u32,
            studies: table,
        })
    }

    pub fn study(&self, name: ExperimentName) -> Result<&toml::Table> {
        self.studies
            .get(name.as_str())
            .and_then(|v| v.as_table())
            .ok_or_else(|| HdfeError::Spec(format!("no criteria table for `{name}`")))
    }

    pub fn default_seeds(&self, name: ExperimentName) -> Vec<u64> {
        self.list(name, "seeds")
            .iter()
            .filter_map(|v| v.as_integer())
            .map(|v| v as u64)
            .collect()
    }

    /// Names of the criteria the study must report.
    pub fn declared(&self, name: ExperimentName) -> Vec<String> {
        self.list(name, "criteria")
            .iter()
            .filter_map(|v| v.as_str())
            .map(String::from)
            .collect()
    }

    fn list(&self, name: ExperimentName, key: &str) -> Vec<toml::Value> {
        self.study(name)
            .ok()
            .and_then(|t| t.get(key))
            .and_then(|v| v.as_array())
            .cloned()
            .unwrap_or_default()
    }
}

pub fn criteria() -> &'static Criteria {
    static CELL: OnceLock<Criteria> = OnceLock::new();
    CELL.get_or_init(|| Criteria::parse(CRITERIA_TOML).expect("embedded criteria file parses"))
}
