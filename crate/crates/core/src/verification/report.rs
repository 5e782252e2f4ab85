use serde::{Deserialize, Serialize};

use super::checks::CheckKind;
use super::ExperimentSpec;
use crate::error::{Error, Result};

/// Version of the report layout written to JSON and CSV.
pub const SCHEMA_VERSION: u32 = 1;

/// Least-squares slope of `log(defect)` against `log(x)`.
///
/// Cells with a non-positive defect are at the rounding floor and are left
/// out; at least three remaining cells are needed.
pub fn fit_rate(cells: &[(f64, f64)]) -> FittedRate {
    let used: Vec<(f64, f64)> =
        cells.iter().filter(|(x, d)| *x > 0.0 && *d > 0.0).map(|(x, d)| (x.ln(), d.ln())).collect();
    if used.len() < 3 {
        return if used.len() < cells.len() { FittedRate::Floor } else { FittedRate::Insufficient };
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = used.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = used.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return FittedRate::Insufficient;
    }
    FittedRate::Slope { slope: sxy / sxx, cells: used.len() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FittedRate {
    Slope { slope: f64, cells: usize },
    /// Too many cells at the rounding floor.
    Floor,
    /// Fewer than three cells in the sweep.
    Insufficient,
}

impl FittedRate {
    pub fn slope(&self) -> Option<f64> {
        match self {
            FittedRate::Slope { slope, .. } => Some(*slope),
            _ => None,
        }
    }

    /// Slope with the sign flipped, for sweeps over resolution where
    /// convergence means a negative slope.
    pub fn negated(self) -> Self {
        match self {
            FittedRate::Slope { slope, cells } => FittedRate::Slope { slope: -slope, cells },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// A negative control whose defect stays above tolerance.
    FailAsExpected,
    /// A negative control that unexpectedly met the tolerance.
    UnexpectedPass,
    /// The finest cell could not be evaluated.
    Error,
}

impl Verdict {
    /// Whether this verdict is what the spec asks for.
    pub fn is_success(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::FailAsExpected)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::FailAsExpected => "FAIL-AS-EXPECTED",
            Verdict::UnexpectedPass => "UNEXPECTED-PASS",
            Verdict::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n: usize,
    pub h: f64,
    /// Defect per trial; empty when the cell failed.
    pub trials: Vec<f64>,
    pub max_defect: Option<f64>,
    pub mean_defect: Option<f64>,
    pub at_floor: bool,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: CheckKind,
    pub tolerance: f64,
    pub control: bool,
    pub cells: Vec<CellReport>,
    /// Convergence order in `N` at the smallest `h` (positive means converging).
    pub rate_n: FittedRate,
    /// Convergence order in `h` at the largest `N`.
    pub rate_h: FittedRate,
    /// Defects along the refinement path never increase, floor cells exempt.
    pub monotone: Option<bool>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    /// The cell with the largest `N` and smallest `h`.
    pub fn finest(&self) -> Option<&CellReport> {
        self.cells.iter().max_by(|a, b| a.n.cmp(&b.n).then(b.h.total_cmp(&a.h)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub checks: Vec<CheckReport>,
}

impl VerificationReport {
    pub fn check(&self, kind: CheckKind) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check == kind)
    }

    /// Every check passed, or failed as an expected control.
    pub fn all_successful(&self) -> bool {
        self.checks.iter().all(|c| c.verdict.is_success())
    }

    /// Some cell of some check could not be evaluated.
    pub fn any_cell_aborted(&self) -> bool {
        self.checks.iter().any(|c| c.cells.iter().any(|cell| cell.error.is_some()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with every wall-time field zeroed; byte-identical across runs of
    /// the same spec.
    pub fn to_json_without_timings(&self) -> Result<String> {
        let mut copy = self.clone();
        for c in &mut copy.checks {
            for cell in &mut c.cells {
                cell.wall_time_ms = 0.0;
            }
        }
        copy.to_json()
    }

    /// One row per check × cell × trial.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record([
            "schema_version",
            "check",
            "control",
            "n",
            "h",
            "trial",
            "defect",
            "at_floor",
            "wall_time_ms",
            "error",
        ])
        .map_err(csv_err)?;
        for c in &self.checks {
            for cell in &c.cells {
                let mut row = |trial: String, defect: String| {
                    w.write_record([
                        SCHEMA_VERSION.to_string(),
                        c.check.name().to_string(),
                        c.control.to_string(),
                        cell.n.to_string(),
                        format!("{:e}", cell.h),
                        trial,
                        defect,
                        cell.at_floor.to_string(),
                        format!("{:.3}", cell.wall_time_ms),
                        cell.error.clone().unwrap_or_default(),
                    ])
                };
                if cell.trials.is_empty() {
                    row(String::new(), String::new()).map_err(csv_err)?;
                }
                for (t, d) in cell.trials.iter().enumerate() {
                    row(t.to_string(), format!("{d:e}")).map_err(csv_err)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}
