//! Batch driver: one verification suite per command, with a JSON report.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod suites;

pub const SCHEMA_VERSION: u32 = 1;

/// Exit codes of the binary.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FILE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Suite(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownCommand(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::File { .. } | CliError::Parse { .. } => EXIT_FILE,
            CliError::Suite(_) => EXIT_FAIL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FormIdentities,
    Normalization,
    Pw,
    Mickelsson,
    Deligne,
    McClass,
    Cs,
    Transition,
    Lemma6,
    Branes,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::FormIdentities,
        Command::Normalization,
        Command::Pw,
        Command::Mickelsson,
        Command::Deligne,
        Command::McClass,
        Command::Cs,
        Command::Transition,
        Command::Lemma6,
        Command::Branes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::FormIdentities => "form-identities",
            Command::Normalization => "normalization",
            Command::Pw => "pw",
            Command::Mickelsson => "mickelsson",
            Command::Deligne => "deligne",
            Command::McClass => "mc-class",
            Command::Cs => "cs",
            Command::Transition => "transition",
            Command::Lemma6 => "lemma6",
            Command::Branes => "branes",
        }
    }

    /// Exact suites produce bit-identical reports for identical configs.
    pub fn is_exact(self) -> bool {
        matches!(self, Command::Deligne | Command::McClass)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| CliError::UnknownCommand(s.to_string()))
    }
}

/// Everything a suite reads. Unset fields take per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    /// Group of the smooth suites; only "SU2" is supported by every suite.
    pub group: Option<String>,
    pub level: Option<i64>,
    pub seed: Option<u64>,
    /// Mesh resolution parameter of the built-in meshes.
    pub resolution: Option<usize>,
    /// A mesh file, used by `normalization` in place of the built-in S³.
    pub mesh: Option<PathBuf>,
    /// Built-in model id ("z12" or "band") or a model file, for the exact suites.
    pub model: Option<String>,
    /// Random samples, points or trials per check.
    pub samples: Option<usize>,
    /// Multiplies every numeric tolerance.
    pub tolerance_scale: Option<f64>,
    /// Gauss–Legendre points per direction for the collapsed-product rules.
    pub quadrature_order: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    /// Fields set in `other` win.
    pub fn merged(self, other: RunConfig) -> RunConfig {
        RunConfig {
            command: other.command.or(self.command),
            group: other.group.or(self.group),
            level: other.level.or(self.level),
            seed: other.seed.or(self.seed),
            resolution: other.resolution.or(self.resolution),
            mesh: other.mesh.or(self.mesh),
            model: other.model.or(self.model),
            samples: other.samples.or(self.samples),
            tolerance_scale: other.tolerance_scale.or(self.tolerance_scale),
            quadrature_order: other.quadrature_order.or(self.quadrature_order),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(7)
    }

    pub fn tolerance_scale(&self) -> f64 {
        self.tolerance_scale.unwrap_or(1.0)
    }

    fn validate(&self) -> Result<Command, CliError> {
        let command = self.command.ok_or_else(|| CliError::Config("no command".into()))?;
        if let Some(g) = &self.group {
            if g != "SU2" {
                return Err(CliError::Config(format!("group {g:?}; the suites run on SU2")));
            }
        }
        if self.tolerance_scale.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
            return Err(CliError::Config("tolerance scale must be positive".into()));
        }
        if self.resolution == Some(0) || self.samples == Some(0) || self.quadrature_order == Some(0) {
            return Err(CliError::Config("resolution, samples and quadrature order must be positive".into()));
        }
        if self.level == Some(0) {
            return Err(CliError::Config("level must be non-zero".into()));
        }
        Ok(command)
    }
}

/// One pass/fail line of a report. Exact checks carry rationals as strings
/// in `value` with `tolerance` absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn numeric(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), pass: value.is_finite() && value < tolerance, value: value.into(), tolerance: Some(tolerance), note: None }
    }

    pub fn exact(name: impl Into<String>, pass: bool, value: impl Into<serde_json::Value>) -> Check {
        Check { name: name.into(), pass, value: value.into(), tolerance: None, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Command,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Wall-clock seconds per check, in check order; kept apart from the
    /// reproducible fields.
    pub runtimes: Vec<f64>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the configured suite.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let command = config.validate()?;
    let mut timed = Vec::new();
    let start = Instant::now();
    suites::run(command, config, &mut |check: Check| {
        timed.push((check, start.elapsed().as_secs_f64()));
    })?;
    let mut last = 0.0;
    let mut runtimes = Vec::with_capacity(timed.len());
    let mut checks = Vec::with_capacity(timed.len());
    for (c, t) in timed {
        runtimes.push(t - last);
        last = t;
        checks.push(c);
    }
    let passed = !checks.is_empty() && checks.iter().all(|c| c.pass);
    Ok(Report { schema_version: SCHEMA_VERSION, command, config: config.clone(), passed, checks, runtimes })
}

/// Caps the global rayon pool at GERBECALC_THREADS when set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("GERBECALC_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("GERBECALC_THREADS={v:?}")))?;
        if n == 0 {
            return Err(CliError::Config("GERBECALC_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(j, format!("\"{}\"", c.name()));
        }
        assert!(matches!("bogus".parse::<Command>(), Err(CliError::UnknownCommand(_))));
    }

    #[test]
    fn flags_override_the_file() {
        let file = RunConfig { command: Some(Command::Pw), level: Some(3), seed: Some(1), ..Default::default() };
        let flags = RunConfig { seed: Some(9), ..Default::default() };
        let m = file.merged(flags);
        assert_eq!((m.command, m.level, m.seed), (Some(Command::Pw), Some(3), Some(9)));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"comand": "pw"}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"command": "mc-class", "seed": 3}"#).unwrap();
        assert_eq!(c.command, Some(Command::McClass));
    }

    #[test]
    fn deligne_report_is_reproducible() {
        let cfg = RunConfig { command: Some(Command::Deligne), samples: Some(5), ..Default::default() };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert!(a.passed, "{}", a.to_json());
        assert_eq!(a.checks, b.checks);
        assert_eq!(a.exit_code(), EXIT_PASS);
    }

    #[test]
    fn invalid_configs_exit_with_usage_code() {
        let cfg = RunConfig { command: Some(Command::Cs), group: Some("SO3".into()), ..Default::default() };
        assert_eq!(run(&cfg).unwrap_err().exit_code(), EXIT_USAGE);
        let cfg = RunConfig { command: Some(Command::Deligne), model: Some("/nonexistent/model.json".into()), ..Default::default() };
        assert_eq!(run(&cfg).unwrap_err().exit_code(), EXIT_FILE);
    }
}
