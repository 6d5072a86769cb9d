//! Batch runner behind the `turbox` binary.
//!
//! A [`RunConfig`] names a command, a model (family with overrides, or an inline
//! [`ModelDoc`]), an optional study for `sweep`/`optimize`, and where to write the result.
//! [`run`] returns the artifact text and writes it to `output` in one atomic rename.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::family::{Constraint, Family, Params};
use crate::fcs::{cumulants_exact, cumulants_numeric, lambda_curve, ExactCumulants, FcsResult};
use crate::model::{ModelDoc, ModelSpec};
use crate::optimize::{minimize_q, sweep, Bound, GridAxis, SearchOptions, StudySpec};
use crate::steady::steady_report;
use crate::tur::evaluate;
use crate::validate::{derive_photon_counts, validate_model};

pub const ORACLE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Steady,
    Tur,
    Oracle,
    Sweep,
    Optimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidModel(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ModelSource {
    Family { family: Family, params: Params },
    Inline(ModelDoc),
}

impl ModelSource {
    pub fn build(&self) -> Result<ModelSpec, Error> {
        match self {
            Self::Family { family, params } => family.build(params),
            Self::Inline(doc) => ModelSpec::try_from(doc.clone()),
        }
    }
}

/// Contents of a `--config` file. Every field is optional; command-line values win.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub model: Option<ModelDoc>,
    #[serde(default)]
    pub study: Option<StudySpec>,
    #[serde(default)]
    pub reservoir: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<ModelSource>,
    pub study: Option<StudySpec>,
    pub output: Option<PathBuf>,
    /// Defaults to CSV for `sweep` and `oracle`, JSON otherwise.
    pub format: Option<Format>,
    pub seed: u64,
    /// Counted reservoir for `oracle`; defaults to the first with a nonzero photon count.
    pub reservoir: Option<String>,
    pub chi_max: f64,
    pub chi_points: usize,
    pub starts: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            model: None,
            study: None,
            output: None,
            format: None,
            seed: 0,
            reservoir: None,
            chi_max: 0.5,
            chi_points: 21,
            starts: SearchOptions::default().starts,
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Sweep | Command::Oracle => Format::Csv,
            _ => Format::Json,
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Model(Error),
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }

    fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// 1 for I/O failures, 2 for configuration, model and solver errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) | Self::Model(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io(_) => "io",
            Self::Config(_) => "config",
            Self::Model(Error::CarnotLimit(_)) => "carnot-limit",
            Self::Model(Error::SingularGauge) => "singular-gauge",
            Self::Model(Error::InvalidModel(_)) => "invalid-model",
            Self::Model(Error::AllStartsFailed) => "all-starts-failed",
            Self::Model(_) => "solver",
        }
    }

    /// Machine-readable form for stderr.
    pub fn report(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() })
            .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(m) | Self::Config(m) => f.write_str(m),
            Self::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Model(e)
    }
}

/// Result of a successful run. `exit_code` is 2 when `validate` rejects the model.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub artifact: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub numeric: FcsResult,
    pub exact: ExactCumulants,
    pub curve: Vec<(f64, f64)>,
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| CliError::config(e.to_string()))
}

fn single_model(cfg: &RunConfig) -> Result<ModelSpec, CliError> {
    if let Some(src) = &cfg.model {
        return Ok(src.build()?);
    }
    if let Some(study) = &cfg.study {
        return Ok(study.family.build(&study.fixed)?);
    }
    Err(CliError::config("no model given: pass --model or a config with `model` or `study`"))
}

fn study(cfg: &RunConfig) -> Result<StudySpec, CliError> {
    match (&cfg.study, &cfg.model) {
        (Some(s), _) => Ok(s.clone()),
        (None, Some(ModelSource::Family { family, params })) => Ok(StudySpec {
            family: *family,
            fixed: params.clone(),
            free: Vec::new(),
            grid: Vec::new(),
            seed: cfg.seed,
            constraints: Vec::new(),
        }),
        (None, Some(ModelSource::Inline(_))) => Err(CliError::config("sweep and optimize need a model family")),
        (None, None) => Err(CliError::config("no model family given")),
    }
}

fn only_json(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.format() {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::config(format!("{:?} output is JSON only", cfg.command).to_lowercase())),
    }
}

fn oracle(cfg: &RunConfig) -> Result<String, CliError> {
    let m = single_model(cfg)?;
    let label = match &cfg.reservoir {
        Some(l) => l.clone(),
        None => {
            let counts = derive_photon_counts(&m)?;
            let i = counts.iter().position(|&n| n != 0).unwrap_or(0);
            m.reservoirs[i].label.clone()
        }
    };
    if cfg.chi_points < 2 {
        return Err(CliError::config("--chi-points must be at least 2"));
    }
    let n = cfg.chi_points;
    let chis: Vec<f64> =
        (0..n).map(|k| -cfg.chi_max + 2.0 * cfg.chi_max * k as f64 / (n - 1) as f64).collect();
    let curve = lambda_curve(&m, &label, &chis)?;
    match cfg.format() {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["chi", "lambda"]).expect("in-memory write");
            for (chi, lambda) in &curve {
                w.write_record([format!("{chi:.17e}"), format!("{lambda:.17e}")]).expect("in-memory write");
            }
            let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
            let mut out = String::new();
            let _ = writeln!(out, "# turbox oracle v{ORACLE_FORMAT_VERSION} reservoir={label}");
            Ok(out + &body)
        }
        Format::Json => {
            let numeric = cumulants_numeric(&m, &label)?;
            let exact = cumulants_exact(&m, &label)?;
            json(&OracleReport { numeric, exact, curve })
        }
    }
}

fn optimize(cfg: &RunConfig) -> Result<String, CliError> {
    only_json(cfg)?;
    let s = study(cfg)?;
    if s.free.is_empty() {
        return Err(CliError::config("optimize needs at least one free parameter"));
    }
    let opts = SearchOptions { starts: cfg.starts, seed: cfg.seed, ..SearchOptions::default() };
    json(&minimize_q(s.family, &s.fixed, &s.free, &s.constraints, &opts)?)
}

fn sweep_cmd(cfg: &RunConfig) -> Result<String, CliError> {
    let s = study(cfg)?;
    if s.grid.is_empty() {
        return Err(CliError::config("sweep needs at least one grid axis"));
    }
    let table = sweep(s.family, &s.fixed, &s.grid);
    match cfg.format() {
        Format::Csv => Ok(table.to_csv()),
        Format::Json => json(&table),
    }
}

/// Produce the artifact without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ok = |artifact| Outcome { artifact, exit_code: 0 };
    match cfg.command {
        Command::Validate => {
            only_json(cfg)?;
            let rep = validate_model(&single_model(cfg)?);
            Ok(Outcome { exit_code: if rep.valid { 0 } else { 2 }, artifact: json(&rep)? })
        }
        Command::Steady => {
            only_json(cfg)?;
            Ok(ok(json(&steady_report(&single_model(cfg)?)?)?))
        }
        Command::Tur => {
            only_json(cfg)?;
            Ok(ok(json(&evaluate(&single_model(cfg)?)?)?))
        }
        Command::Oracle => oracle(cfg).map(ok),
        Command::Sweep => sweep_cmd(cfg).map(ok),
        Command::Optimize => optimize(cfg).map(ok),
    }
}

/// Write `contents` next to `path` and rename it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Execute and write the artifact to `output`, or return it for stdout when unset.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let outcome = execute(cfg)?;
    if let Some(path) = &cfg.output {
        write_atomic(path, &outcome.artifact)?;
    }
    Ok(outcome)
}

/// Parse `NAME=START:STOP:N` into an evenly spaced axis.
pub fn parse_grid(spec: &str) -> Result<GridAxis, CliError> {
    let bad = || CliError::config(format!("grid `{spec}` is not NAME=START:STOP:N"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    let values = match n {
        0 => return Err(bad()),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    };
    Ok(GridAxis { name: name.to_string(), values })
}

/// Parse `NAME=MIN:MAX` into a search bound.
pub fn parse_bound(spec: &str) -> Result<Bound, CliError> {
    let bad = || CliError::config(format!("bound `{spec}` is not NAME=MIN:MAX"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let (a, b) = range.split_once(':').ok_or_else(bad)?;
    Ok(Bound { name: name.to_string(), min: a.parse().map_err(|_| bad())?, max: b.parse().map_err(|_| bad())? })
}

pub fn parse_constraint(s: &str) -> Result<Constraint, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::config(format!("unknown constraint `{s}`")))
}

/// Caps the global rayon pool at `TURBOX_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("TURBOX_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::config(format!("TURBOX_THREADS=`{v}` is not a count")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::config(e.to_string()))
}
