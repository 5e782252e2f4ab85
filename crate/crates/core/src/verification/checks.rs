use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersion::presets::band_limited_field;
use crate::knot::{ConnectionKind, KnotPoint, KnotSpace, KnotTangent, KnotVectorFieldScheme};
use crate::vcp::verify_vcp_axioms;

/// Random tuples drawn by the `axioms` check.
pub const AXIOM_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckKind {
    #[serde(rename = "axioms")]
    Axioms,
    #[serde(rename = "J2")]
    J2,
    #[serde(rename = "compat")]
    Compat,
    #[serde(rename = "sympl")]
    Sympl,
    #[serde(rename = "lemma_normal")]
    LemmaNormal,
    #[serde(rename = "torsion_perp")]
    TorsionPerp,
    #[serde(rename = "torsion_lc")]
    TorsionLc,
    #[serde(rename = "metric_lc")]
    MetricLc,
    #[serde(rename = "nablaJ_perp")]
    NablaJPerp,
    #[serde(rename = "nablaJ_lc")]
    NablaJLc,
    #[serde(rename = "nijenhuis")]
    Nijenhuis,
    #[serde(rename = "domega")]
    DOmega,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::Axioms,
        CheckKind::J2,
        CheckKind::Compat,
        CheckKind::Sympl,
        CheckKind::LemmaNormal,
        CheckKind::TorsionPerp,
        CheckKind::TorsionLc,
        CheckKind::MetricLc,
        CheckKind::NablaJPerp,
        CheckKind::NablaJLc,
        CheckKind::Nijenhuis,
        CheckKind::DOmega,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Axioms => "axioms",
            CheckKind::J2 => "J2",
            CheckKind::Compat => "compat",
            CheckKind::Sympl => "sympl",
            CheckKind::LemmaNormal => "lemma_normal",
            CheckKind::TorsionPerp => "torsion_perp",
            CheckKind::TorsionLc => "torsion_lc",
            CheckKind::MetricLc => "metric_lc",
            CheckKind::NablaJPerp => "nablaJ_perp",
            CheckKind::NablaJLc => "nablaJ_lc",
            CheckKind::Nijenhuis => "nijenhuis",
            CheckKind::DOmega => "domega",
        }
    }

    /// Largest admissible defect.
    pub fn tolerance(self) -> f64 {
        match self {
            CheckKind::Axioms => 1e-12,
            CheckKind::J2 | CheckKind::Compat | CheckKind::Sympl => 1e-10,
            CheckKind::DOmega => 1e-5,
            _ => 1e-6,
        }
    }

    /// Whether the check differentiates along flows with step `h`.
    pub fn uses_step(self) -> bool {
        !matches!(self, CheckKind::Axioms | CheckKind::J2 | CheckKind::Compat | CheckKind::Sympl)
    }

    /// Checks whose identity relies on the VCP being parallel; on a
    /// non-parallel ambient they become negative controls.
    pub fn needs_parallel(self) -> bool {
        matches!(self, CheckKind::Nijenhuis | CheckKind::NablaJPerp | CheckKind::NablaJLc | CheckKind::DOmega)
    }

    /// Magnitude below which a defect is indistinguishable from rounding:
    /// `10² ε` times the cancellation factor of the check (`1/h` for
    /// flow differences).
    pub fn floor(self, h: f64) -> f64 {
        let scale = if self.uses_step() { 1.0 / h } else { 1.0 };
        1e2 * f64::EPSILON * scale
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("checks: unknown check `{s}`")))
    }
}

/// L2-normalized normal field from a seeded band-limited ambient field.
pub fn random_normal_field(space: &KnotSpace, at: &Arc<KnotPoint>, seed: u64, max_mode: usize) -> Result<KnotTangent> {
    let raw = band_limited_field(at.immersion().grid(), at.dim(), seed, max_mode);
    let t = KnotTangent::project(at, &raw)?;
    let norm = space.l2_inner(&t, &t)?.sqrt();
    if !(norm > 0.0) {
        return Err(Error::Config("random normal field vanished".into()));
    }
    Ok(t.scaled(1.0 / norm))
}

/// Seeds of the three fields used in trial `trial`.
pub(crate) fn trial_seeds(seed: u64, trial: usize) -> [u64; 3] {
    let base = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(3 * trial as u64);
    [base, base + 1, base + 2]
}

/// Defect of one check for one trial at one knot point.
pub(crate) fn evaluate(
    check: CheckKind,
    space: &KnotSpace,
    at: &Arc<KnotPoint>,
    seed: u64,
    trial: usize,
    max_mode: usize,
) -> Result<f64> {
    if check == CheckKind::Axioms {
        let vcp = space.ambient().field().base();
        return Ok(verify_vcp_axioms(vcp, AXIOM_TRIALS, seed.wrapping_add(trial as u64)).max_violation());
    }
    let [s1, s2, s3] = trial_seeds(seed, trial);
    let u = random_normal_field(space, at, s1, max_mode)?;
    let v = random_normal_field(space, at, s2, max_mode)?;
    let constant = |t: &KnotTangent| KnotVectorFieldScheme::constant(t.clone());
    let defect = match check {
        CheckKind::Axioms => unreachable!(),
        CheckKind::J2 => {
            let jju = space.apply_j(&space.apply_j(&u)?)?;
            jju.combine(1.0, &u, 1.0)?.max_abs()
        }
        CheckKind::Compat => {
            let (ju, jv) = (space.apply_j(&u)?, space.apply_j(&v)?);
            (space.l2_inner(&ju, &jv)? - space.l2_inner(&u, &v)?).abs()
        }
        CheckKind::Sympl => {
            let w = space.omega2(&u, &v)?;
            let via_j = space.l2_inner(&space.apply_j(&u)?, &v)?;
            (w - via_j).abs().max((w + space.omega2(&v, &u)?).abs())
        }
        CheckKind::LemmaNormal => {
            let y = KnotVectorFieldScheme::exponential(v);
            space.covariant_derivative(ConnectionKind::Perp, &u, &y)?.max_abs()
        }
        CheckKind::TorsionPerp => space.torsion(ConnectionKind::Perp, &constant(&u), &constant(&v))?.max_abs(),
        CheckKind::TorsionLc => space.torsion(ConnectionKind::LeviCivita, &constant(&u), &constant(&v))?.max_abs(),
        CheckKind::MetricLc => {
            let w = random_normal_field(space, at, s3, max_mode)?;
            space.metric_compatibility_defect(ConnectionKind::LeviCivita, &u, &constant(&v), &constant(&w))?.abs()
        }
        CheckKind::NablaJPerp => space.nabla_j_defect(ConnectionKind::Perp, &u, &constant(&v))?.max_abs(),
        CheckKind::NablaJLc => space.nabla_j_defect(ConnectionKind::LeviCivita, &u, &constant(&v))?.max_abs(),
        CheckKind::Nijenhuis => space.nijenhuis(&u, &v)?.max_abs(),
        CheckKind::DOmega => {
            let w = random_normal_field(space, at, s3, max_mode)?;
            space.d_omega2_defect(&constant(&u), &constant(&v), &constant(&w))?.abs()
        }
    };
    Ok(defect)
}
