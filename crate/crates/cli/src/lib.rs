//! Configuration, dispatch and report emission for the `alglab` binary.

pub mod commands;
pub mod fixtures;
pub mod report;
pub mod sheet_csv;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, ValueEnum};
use serde::{Deserialize, Serialize};

pub use report::{CheckRow, VerdictReport};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("json: {0}")]
    Json(String),
    #[error("csv line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("unknown fixture '{0}' (known: {known})", known = fixtures::NAMES.join(", "))]
    UnknownFixture(String),
    #[error("{0}")]
    Invalid(String),
}

impl InputError {
    pub fn invalid(msg: impl Into<String>) -> InputError {
        InputError::Invalid(msg.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckAlgebroid,
    CheckJacobi,
    Poissonize,
    PathEquiv,
    ScanMonodromy,
    Groupoid,
    ContactCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckAlgebroid => "check-algebroid",
            Command::CheckJacobi => "check-jacobi",
            Command::Poissonize => "poissonize",
            Command::PathEquiv => "path-equiv",
            Command::ScanMonodromy => "scan-monodromy",
            Command::Groupoid => "groupoid",
            Command::ContactCheck => "contact-check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GroupoidCheck {
    Axioms,
    Weinstein,
    Pentagon,
    All,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// `N[,K]`: t-intervals, then eps-intervals (defaulting to `N`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub n: usize,
    pub k: Option<usize>,
}

impl Grid {
    pub fn k_or_n(&self) -> usize {
        self.k.unwrap_or(self.n)
    }
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Grid, String> {
        let mut it = s.split(',');
        let n = it.next().unwrap_or("").trim().parse().map_err(|_| format!("bad grid '{}'", s))?;
        let k = match it.next() {
            Some(k) => Some(k.trim().parse().map_err(|_| format!("bad grid '{}'", s))?),
            None => None,
        };
        if it.next().is_some() {
            return Err(format!("bad grid '{}': expected N or N,K", s));
        }
        Ok(Grid { n, k })
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> Result<Grid, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            Some(k) => write!(f, "{},{}", self.n, k),
            None => write!(f, "{}", self.n),
        }
    }
}

/// `lo,hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> Result<Range, String> {
        let v: Vec<&str> = s.split(',').collect();
        if v.len() != 2 {
            return Err(format!("bad range '{}': expected lo,hi", s));
        }
        let p = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad range '{}'", s));
        Ok(Range { lo: p(v[0])?, hi: p(v[1])? })
    }
}

/// Every knob of a run. All fields are optional so that a `--config` file
/// and the command line can be layered; flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    pub command: Option<Command>,
    /// built-in fixture
    #[arg(long)]
    pub fixture: Option<String>,
    /// structure file (algebroid, Jacobi, contact, groupoid or model JSON)
    #[arg(long, visible_alias = "spec")]
    pub input: Option<PathBuf>,
    /// homotopy sheet CSV
    #[arg(long)]
    pub sheet: Option<PathBuf>,
    /// groupoid check selection
    #[arg(long, value_enum)]
    pub check: Option<GroupoidCheck>,
    /// a(r) for the sphere family
    #[arg(long)]
    pub a: Option<String>,
    /// radius range lo,hi
    #[arg(long)]
    pub range: Option<Range>,
    /// integrability threshold
    #[arg(long)]
    pub threshold: Option<f64>,
    /// tolerance of the primary check
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub grid: Option<Grid>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// initial value of the homogeneity coordinate
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunConfig {
    /// Fields set in `self` win over `base`.
    pub fn layered_over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            fixture: self.fixture.or(base.fixture),
            input: self.input.or(base.input),
            sheet: self.sheet.or(base.sheet),
            check: self.check.or(base.check),
            a: self.a.or(base.a),
            range: self.range.or(base.range),
            threshold: self.threshold.or(base.threshold),
            tol: self.tol.or(base.tol),
            grid: self.grid.or(base.grid),
            samples: self.samples.or(base.samples),
            seed: self.seed.or(base.seed),
            s0: self.s0.or(base.s0),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

#[derive(Debug, Parser)]
#[command(name = "alglab", version, about = "Numerical checks for Lie algebroids, Jacobi structures and finite groupoids")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON file with defaults for any flag (and the command)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunConfig,
}

pub fn read_file(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError::Io { path: path.display().to_string(), msg: e.to_string() })
}

/// Resolves the command line against an optional config file.
pub fn resolve(cli: Cli) -> Result<RunConfig, InputError> {
    let base = match &cli.config {
        Some(p) => {
            let text = read_file(p)?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| InputError::Json(format!("{}: {}", p.display(), e)))?
        }
        None => RunConfig::default(),
    };
    let cfg = RunConfig { command: cli.command, ..cli.run }.layered_over(base);
    if cfg.command.is_none() {
        return Err(InputError::invalid("no command given"));
    }
    Ok(cfg)
}

/// Runs the configured command.
pub fn run(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let cmd = cfg.command.ok_or_else(|| InputError::invalid("no command given"))?;
    let mut rep = match cmd {
        Command::CheckAlgebroid => commands::check_algebroid(cfg)?,
        Command::CheckJacobi => commands::check_jacobi(cfg)?,
        Command::Poissonize => commands::poissonize(cfg)?,
        Command::PathEquiv => commands::path_equiv(cfg)?,
        Command::ScanMonodromy => commands::scan_monodromy(cfg)?,
        Command::Groupoid => commands::groupoid(cfg)?,
        Command::ContactCheck => commands::contact_check(cfg)?,
    };
    rep.finish(cmd, cfg);
    Ok(rep)
}

/// 0 when every check passes, 1 otherwise. Input errors map to 2.
pub fn exit_code(rep: &VerdictReport) -> i32 {
    if rep.pass {
        0
    } else {
        1
    }
}

/// Writes the rendered report to `--out`, or returns it for stdout.
pub fn emit(rep: &VerdictReport, cfg: &RunConfig) -> Result<Option<String>, InputError> {
    let text = rep.render(cfg.format());
    match &cfg.out {
        Some(p) => {
            std::fs::write(p, &text).map_err(|e| InputError::Io { path: p.display().to_string(), msg: e.to_string() })?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses_one_or_two_values() {
        assert_eq!("201".parse::<Grid>().unwrap(), Grid { n: 201, k: None });
        assert_eq!("64,32".parse::<Grid>().unwrap(), Grid { n: 64, k: Some(32) });
        assert!("1,2,3".parse::<Grid>().is_err());
        assert!("x".parse::<Grid>().is_err());
    }

    #[test]
    fn flags_override_the_config_file() {
        let file = RunConfig { seed: Some(3), tol: Some(1e-4), ..Default::default() };
        let flags = RunConfig { seed: Some(9), ..Default::default() };
        let c = flags.layered_over(file);
        assert_eq!((c.seed, c.tol), (Some(9), Some(1e-4)));
    }

    #[test]
    fn command_line_parses() {
        let cli = Cli::try_parse_from(["alglab", "groupoid", "--spec", "z.json", "--check", "pentagon", "--grid", "8,4"]).unwrap();
        let c = resolve(cli).unwrap();
        assert_eq!(c.command, Some(Command::Groupoid));
        assert_eq!(c.input, Some(PathBuf::from("z.json")));
        assert_eq!(c.check, Some(GroupoidCheck::Pentagon));
        assert_eq!(c.grid, Some(Grid { n: 8, k: Some(4) }));
    }

    #[test]
    fn missing_command_is_an_input_error() {
        let cli = Cli::try_parse_from(["alglab", "--seed", "1"]).unwrap();
        assert!(matches!(resolve(cli), Err(InputError::Invalid(_))));
    }
}
