//! Convergence sweeps over grid resolution `N` and flow step `h`, with
//! pass/fail verdicts against the per-check tolerances.

mod checks;
mod report;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{random_normal_field, CheckKind, AXIOM_TRIALS};
pub use report::{fit_rate, CellReport, CheckReport, FittedRate, Verdict, VerificationReport, SCHEMA_VERSION};

use crate::ambient::{AmbientConfig, AmbientSpace};
use crate::error::{Error, Result};
use crate::immersion::presets::{ImmersionPreset, Perturbation};
use crate::immersion::{ParamGrid, Stencil};
use crate::knot::{KnotPoint, KnotSpace, DEFAULT_STEP};

pub const DEFAULT_N: usize = 128;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_FIELD_MODES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_true")]
    pub richardson: bool,
    /// Largest Fourier mode of the random normal fields.
    #[serde(default = "default_modes")]
    pub field_modes: usize,
}

fn default_n() -> Vec<usize> {
    vec![DEFAULT_N]
}

fn default_h() -> Vec<f64> {
    vec![DEFAULT_STEP]
}

fn default_trials() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_modes() -> usize {
    DEFAULT_FIELD_MODES
}

fn default_sign() -> f64 {
    1.0
}

fn default_order() -> usize {
    Stencil::default().order()
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            n: default_n(),
            h: default_h(),
            seed: DEFAULT_SEED,
            trials: 1,
            richardson: true,
            field_modes: DEFAULT_FIELD_MODES,
        }
    }
}

/// A convergence experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub ambient: AmbientConfig,
    pub immersion: ImmersionPreset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub sweep: Sweep,
    pub checks: Vec<CheckKind>,
    /// `-1` flips the frame-contraction orientation of `J` and `ω²`.
    #[serde(default = "default_sign")]
    pub orientation_sign: f64,
    #[serde(default = "default_order")]
    pub stencil_order: usize,
}

fn default_name() -> String {
    "experiment".into()
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn stencil(&self) -> Result<Stencil> {
        Stencil::from_order(self.stencil_order)
            .ok_or_else(|| Error::Config(format!("stencil_order: {} is not one of 2, 4, 6, 8", self.stencil_order)))
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if s.n.is_empty() {
            return Err(Error::Config("sweep.n: at least one resolution is required".into()));
        }
        if s.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep.n: values must be strictly increasing".into()));
        }
        if s.h.is_empty() {
            return Err(Error::Config("sweep.h: at least one step is required".into()));
        }
        if s.h.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Config("sweep.h: steps must be positive".into()));
        }
        if s.h.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Config("sweep.h: values must be strictly decreasing".into()));
        }
        if s.trials == 0 {
            return Err(Error::Config("sweep.trials: must be at least 1".into()));
        }
        if self.checks.is_empty() {
            return Err(Error::Config("checks: at least one check is required".into()));
        }
        if self.checks.iter().collect::<BTreeSet<_>>().len() != self.checks.len() {
            return Err(Error::Config("checks: duplicate entries".into()));
        }
        if self.orientation_sign.abs() != 1.0 {
            return Err(Error::Config("orientation_sign: must be 1 or -1".into()));
        }
        let stencil = self.stencil()?;
        let ambient = self.ambient.build().map_err(|e| Error::Config(format!("ambient: {e}")))?;
        let d = ambient.fold() - 1;
        if let Some(pd) = self.immersion.intrinsic_dim() {
            if pd != d {
                return Err(Error::Config(format!(
                    "immersion: preset has dimension {pd}, but the {}-fold VCP needs dimension {d}",
                    ambient.fold()
                )));
            }
        }
        if d > 0 {
            for &n in &s.n {
                ParamGrid::with_stencil(vec![n], stencil).map_err(|e| Error::Config(format!("sweep.n: {e}")))?;
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, f64)> {
        self.sweep.n.iter().flat_map(|&n| self.sweep.h.iter().map(move |&h| (n, h))).collect()
    }

    fn knot_point(&self, ambient: &AmbientSpace, n: usize) -> Result<Arc<KnotPoint>> {
        let imm = self.immersion.build(ambient, n, self.perturbation.as_ref())?;
        let grid = ParamGrid::with_stencil(imm.grid().sizes().to_vec(), self.stencil()?)?;
        let imm = crate::immersion::DiscreteImmersion::new(grid, imm.dim(), imm.points().to_vec(), imm.topology().clone())?;
        KnotSpace::new(ambient.clone()).point(imm)
    }
}

struct TrialOutcome {
    defects: Vec<(Result<f64>, f64)>,
}

/// Runs every requested check on every sweep cell and trial.
///
/// Cells run in parallel; results are assembled in sweep order, so the
/// report does not depend on scheduling. Failures are recorded per cell.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<VerificationReport> {
    spec.validate()?;
    let ambient = spec.ambient.build()?;
    let cells = spec.cells();
    let points: Vec<Result<Arc<KnotPoint>>> =
        spec.sweep.n.par_iter().map(|&n| spec.knot_point(&ambient, n)).collect();
    let n_index = |n: usize| spec.sweep.n.iter().position(|&x| x == n).expect("cell from sweep");
    let trials = spec.sweep.trials;
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();

    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(c, trial)| {
            let (n, h) = cells[c];
            let point = &points[n_index(n)];
            let space = KnotSpace::new(ambient.clone())
                .with_orientation_sign(spec.orientation_sign)
                .with_step(h)
                .map(|s| s.with_richardson(spec.sweep.richardson));
            let defects = spec
                .checks
                .iter()
                .map(|&check| {
                    let start = Instant::now();
                    let value = match (point, &space) {
                        (Ok(p), Ok(space)) => {
                            checks::evaluate(check, space, p, spec.sweep.seed, trial, spec.sweep.field_modes)
                        }
                        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                    };
                    (value, start.elapsed().as_secs_f64() * 1e3)
                })
                .collect();
            TrialOutcome { defects }
        })
        .collect();

    let control_field = !ambient.field().is_parallel();
    let reports = spec
        .checks
        .iter()
        .enumerate()
        .map(|(k, &check)| {
            let cell_reports = cells
                .iter()
                .enumerate()
                .map(|(c, &(n, h))| {
                    let mut values = Vec::with_capacity(trials);
                    let mut error = None;
                    let mut wall = 0.0;
                    for t in 0..trials {
                        let (value, ms) = &outcomes[c * trials + t].defects[k];
                        wall += ms;
                        match value {
                            Ok(v) => values.push(*v),
                            Err(e) => error = error.or_else(|| Some(e.to_string())),
                        }
                    }
                    if error.is_some() {
                        values.clear();
                    }
                    let max = values.iter().copied().reduce(f64::max);
                    let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
                    CellReport {
                        n,
                        h,
                        at_floor: max.is_some_and(|m| m < check.floor(h)),
                        trials: values,
                        max_defect: max,
                        mean_defect: mean,
                        wall_time_ms: wall,
                        error,
                    }
                })
                .collect();
            judge(spec, check, control_field && check.needs_parallel(), cell_reports)
        })
        .collect();
    Ok(VerificationReport { schema_version: SCHEMA_VERSION, spec: spec.clone(), checks: reports })
}

fn judge(spec: &ExperimentSpec, check: CheckKind, control: bool, cells: Vec<CellReport>) -> CheckReport {
    let tolerance = check.tolerance();
    let (ns, hs) = (&spec.sweep.n, &spec.sweep.h);
    let (n_max, h_min) = (*ns.last().unwrap(), *hs.last().unwrap());
    let cell = |n: usize, h: f64| cells.iter().find(|c| c.n == n && c.h == h);
    let fit_value = |c: &CellReport| if c.at_floor { 0.0 } else { c.max_defect.unwrap_or(0.0) };

    let mut notes = Vec::new();
    let rate_n = if ns.len() >= 3 {
        fit_rate(&ns.iter().filter_map(|&n| cell(n, h_min)).map(|c| (c.n as f64, fit_value(c))).collect::<Vec<_>>())
            .negated()
    } else {
        FittedRate::Insufficient
    };
    let rate_h = if hs.len() >= 3 {
        fit_rate(&hs.iter().filter_map(|&h| cell(n_max, h)).map(|c| (c.h, fit_value(c))).collect::<Vec<_>>())
    } else {
        FittedRate::Insufficient
    };
    if ns.len() < 3 && hs.len() < 3 {
        notes.push("insufficient cells for rate fit".to_string());
    }

    let path: Vec<&CellReport> = if ns.len() == hs.len() && ns.len() >= 2 {
        ns.iter().zip(hs).filter_map(|(&n, &h)| cell(n, h)).collect()
    } else if ns.len() >= 2 {
        ns.iter().filter_map(|&n| cell(n, h_min)).collect()
    } else {
        hs.iter().filter_map(|&h| cell(n_max, h)).collect()
    };
    let monotone = (path.len() >= 2 && path.iter().all(|c| c.max_defect.is_some())).then(|| {
        path.windows(2).all(|w| w[1].at_floor || w[1].max_defect.unwrap() <= w[0].max_defect.unwrap())
    });

    let finest = cell(n_max, h_min);
    let verdict = match finest.and_then(|c| c.max_defect) {
        None => Verdict::Error,
        Some(d) if control => {
            if d > tolerance {
                Verdict::FailAsExpected
            } else {
                Verdict::UnexpectedPass
            }
        }
        Some(d) => {
            if d <= tolerance && monotone != Some(false) {
                Verdict::Pass
            } else {
                if d <= tolerance {
                    notes.push("defect grows under refinement".to_string());
                }
                Verdict::Fail
            }
        }
    };
    CheckReport { check, tolerance, control, cells, rate_n, rate_h, monotone, verdict, notes }
}
