//! Run configuration: a single JSON-serializable struct that every flag maps
//! onto, so figure-reproduction recipes can be committed as config files and
//! overridden from the command line.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Errors are split by who caused them: a bad invocation exits 2, a failure
/// while doing the work exits 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Runtime(msg) => write!(f, "error: {msg}"),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl EtaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(CliError::Usage("eta grid count must be at least 1".into()));
        }
        let pts: Vec<f64> = if self.count == 1 {
            vec![self.start]
        } else {
            (0..self.count)
                .map(|i| {
                    self.start
                        + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
                })
                .collect()
        };
        for &eta in &pts {
            check_interior(eta)?;
        }
        Ok(pts)
    }
}

fn check_interior(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(CliError::Usage(format!(
            "eta must lie strictly inside (0, 1), got {eta}"
        )));
    }
    Ok(())
}

/// Every field optional; a value comes from the config file unless the same
/// flag was given on the command line, which wins.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub eta: Option<f64>,
    pub eta_grid: Option<EtaGrid>,
    pub probe: Option<String>,
    pub objective: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub n_budget: Option<usize>,
    pub check: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Overlays `flags` on top of `self`; any field set in `flags` wins.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            n: flags.n.or(self.n),
            eta: flags.eta.or(self.eta),
            eta_grid: flags.eta_grid.or(self.eta_grid),
            probe: flags.probe.or(self.probe),
            objective: flags.objective.or(self.objective),
            seed: flags.seed.or(self.seed),
            out: flags.out.or(self.out),
            format: flags.format.or(self.format),
            n_budget: flags.n_budget.or(self.n_budget),
            check: flags.check.or(self.check),
        }
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| CliError::Usage("--n is required".into()))
    }

    /// A single eta or the expanded grid; exactly one source must be set.
    pub fn etas(&self) -> Result<Vec<f64>> {
        match (self.eta, &self.eta_grid) {
            (Some(_), Some(_)) => Err(CliError::Usage(
                "--eta and --eta-grid are mutually exclusive".into(),
            )),
            (Some(eta), None) => {
                check_interior(eta)?;
                Ok(vec![eta])
            }
            (None, Some(grid)) => grid.points(),
            (None, None) => Err(CliError::Usage(
                "one of --eta or --eta-grid is required".into(),
            )),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn format(&self) -> Result<OutputFormat> {
        match self.format.as_deref() {
            None | Some("csv") => Ok(OutputFormat::Csv),
            Some("json") => Ok(OutputFormat::Json),
            Some(other) => Err(CliError::Usage(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }

    pub fn objective(&self) -> Result<lossphase::Objective> {
        match self.objective.as_deref() {
            None | Some("joint") => Ok(lossphase::Objective::JointDelta),
            Some("phase") => Ok(lossphase::Objective::PhaseOnly),
            Some(other) => Err(CliError::Usage(format!(
                "unknown objective {other:?}; expected joint or phase"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeSelector {
    Noon,
    HollandBurnett,
    Fock,
    Uniform,
    File(PathBuf),
    Optimize,
}

impl ProbeSelector {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "noon" => Ok(ProbeSelector::Noon),
            "hb" => Ok(ProbeSelector::HollandBurnett),
            "fock" => Ok(ProbeSelector::Fock),
            "uniform" => Ok(ProbeSelector::Uniform),
            "optimize" => Ok(ProbeSelector::Optimize),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(ProbeSelector::File(PathBuf::from(path))),
                _ => Err(CliError::Usage(format!(
                    "unknown probe {other:?}; expected noon, hb, fock, uniform, file:PATH, or optimize"
                ))),
            },
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProbeSelector::Noon => "noon",
            ProbeSelector::HollandBurnett => "hb",
            ProbeSelector::Fock => "fock",
            ProbeSelector::Uniform => "uniform",
            ProbeSelector::File(_) => "file",
            ProbeSelector::Optimize => "optimize",
        }
    }
}
