//! The one report schema shared by every command.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::{Command, Format, RunConfig};

pub const TOOL: &str = "alglab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A residual (or count of violations) against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub module: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

impl CheckRow {
    /// `pass` iff `value <= tolerance`; NaN never passes.
    pub fn new(name: impl Into<String>, module: &str, value: f64, tolerance: f64, grid: Option<String>) -> CheckRow {
        CheckRow { name: name.into(), module: module.into(), value, tolerance, pass: value <= tolerance, grid }
    }

    /// A yes/no condition as a violation count against tolerance 0.
    pub fn condition(name: impl Into<String>, module: &str, holds: bool, grid: Option<String>) -> CheckRow {
        CheckRow::new(name, module, if holds { 0.0 } else { 1.0 }, 0.0, grid)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRow>,
    pub verdict: Map<String, Value>,
    pub pass: bool,
    /// the CSV side table, emitted instead of JSON under `--format csv`
    #[serde(skip)]
    pub table: Option<String>,
}

impl VerdictReport {
    pub fn new(checks: Vec<CheckRow>, verdict: Map<String, Value>) -> VerdictReport {
        VerdictReport {
            tool: TOOL,
            version: VERSION,
            command: String::new(),
            config: RunConfig::default(),
            pass: false,
            checks,
            verdict,
            table: None,
        }
    }

    pub fn with_table(mut self, table: String) -> VerdictReport {
        self.table = Some(table);
        self
    }

    pub(crate) fn finish(&mut self, cmd: Command, cfg: &RunConfig) {
        self.command = cmd.name().into();
        self.config = cfg.clone();
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    pub fn check(&self, name: &str) -> Option<&CheckRow> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// JSON report, or the side table (falling back to the check rows) as CSV.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serialises") + "\n",
            Format::Csv => match &self.table {
                Some(t) => t.clone(),
                None => self.checks_csv(),
            },
        }
    }

    pub fn checks_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "module", "value", "tolerance", "pass", "grid"]).expect("in-memory csv");
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                c.module.clone(),
                c.value.to_string(),
                c.tolerance.to_string(),
                c.pass.to_string(),
                c.grid.clone().unwrap_or_default(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}
