//! Standard parametrizations and seeded band-limited perturbations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DiscreteImmersion, ParamGrid};
use crate::ambient::{AmbientSpace, Topology};
use crate::error::{Error, Result};

/// `S = point`, mapped to `p`.
pub fn point(p: &[f64]) -> Result<DiscreteImmersion> {
    DiscreteImmersion::new(ParamGrid::point(), p.len(), p.to_vec(), Topology::Euclidean)
}

/// `θ ↦ r (cos θ, sin θ, 0, ..)` in R^m.
pub fn circle(m: usize, radius: f64, n: usize) -> Result<DiscreteImmersion> {
    if m < 2 {
        return Err(Error::Unsupported("a planar circle needs m >= 2".into()));
    }
    let grid = ParamGrid::new(vec![n])?;
    let mut pts = vec![0.0; n * m];
    for i in 0..n {
        let t = grid.params(i)[0];
        pts[i * m] = radius * t.cos();
        pts[i * m + 1] = radius * t.sin();
    }
    DiscreteImmersion::validated(grid, m, pts, Topology::Euclidean)
}

/// Trefoil `(sin t + 2 sin 2t, cos t − 2 cos 2t, −sin 3t)` in the first three
/// coordinates; for `m > 3` the remaining coordinates get small tilts
/// `0.3 sin(j t + 0.7 j)` so the loop is not contained in a 3-space.
pub fn trefoil(m: usize, n: usize) -> Result<DiscreteImmersion> {
    if m < 3 {
        return Err(Error::Unsupported("the trefoil needs m >= 3".into()));
    }
    let grid = ParamGrid::new(vec![n])?;
    let mut pts = vec![0.0; n * m];
    for i in 0..n {
        let t = grid.params(i)[0];
        let p = &mut pts[i * m..(i + 1) * m];
        p[0] = t.sin() + 2.0 * (2.0 * t).sin();
        p[1] = t.cos() - 2.0 * (2.0 * t).cos();
        p[2] = -(3.0 * t).sin();
        for (j, x) in p.iter_mut().enumerate().skip(3) {
            let j = (j - 2) as f64;
            *x = 0.3 * (j * t + 0.7 * j).sin();
        }
    }
    DiscreteImmersion::validated(grid, m, pts, Topology::Euclidean)
}

/// `(θ, φ) ↦ s (cos θ, sin θ, cos φ, sin φ, 0, ..)` in R^m, `m >= 4`.
pub fn clifford_torus(m: usize, scale: f64, n1: usize, n2: usize) -> Result<DiscreteImmersion> {
    if m < 4 {
        return Err(Error::Unsupported("the flat torus needs m >= 4".into()));
    }
    let grid = ParamGrid::new(vec![n1, n2])?;
    let mut pts = vec![0.0; grid.len() * m];
    for i in 0..grid.len() {
        let th = grid.params(i);
        let p = &mut pts[i * m..(i + 1) * m];
        p[0] = scale * th[0].cos();
        p[1] = scale * th[0].sin();
        p[2] = scale * th[1].cos();
        p[3] = scale * th[1].sin();
    }
    DiscreteImmersion::validated(grid, m, pts, Topology::Euclidean)
}

/// A closed geodesic of a flat torus winding once along coordinate `dir`,
/// offset by `offset`. Stored in lifted coordinates.
pub fn winding_loop(space: &AmbientSpace, dir: usize, n: usize, offset: &[f64]) -> Result<DiscreteImmersion> {
    let Topology::Torus { periods } = space.topology() else {
        return Err(Error::Unsupported("winding loops need a torus ambient".into()));
    };
    let m = space.dim();
    if dir >= m || offset.len() != m {
        return Err(Error::DimensionMismatch { name: "offset".into(), expected: m, found: offset.len() });
    }
    let grid = ParamGrid::new(vec![n])?;
    let mut pts = vec![0.0; n * m];
    for i in 0..n {
        let p = &mut pts[i * m..(i + 1) * m];
        p.copy_from_slice(offset);
        p[dir] += periods[dir] * i as f64 / n as f64;
    }
    DiscreteImmersion::validated(grid, m, pts, space.topology().clone())
}

#[cfg(test)]
pub(crate) fn torus_space_for_tests(m: usize) -> AmbientSpace {
    use crate::ambient::VcpField;
    use std::f64::consts::PI;
    AmbientSpace::new(
        Topology::Torus { periods: (0..m).map(|i| 2.0 * PI + i as f64).collect() },
        VcpField::Parallel(crate::vcp::LinearVcp::volume_form(m).unwrap()),
    )
    .unwrap()
}

/// Seeded band-limited vector field on `grid`:
/// `Σ_k (a_k cos⟨k,θ⟩ + b_k sin⟨k,θ⟩) / (1 + |k|²)` per component, with
/// `|k_a| <= max_mode`. Coefficients are drawn in a fixed order that does not
/// depend on the grid sizes, so the same seed gives the same continuous field
/// at every resolution; modes above `N_a / 4` are dropped.
pub fn band_limited_field(grid: &ParamGrid, m: usize, seed: u64, max_mode: usize) -> Vec<f64> {
    let d = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = max_mode as i64;
    let modes: Vec<Vec<i64>> = match d {
        0 => vec![vec![]],
        1 => (-k..=k).map(|a| vec![a]).collect(),
        _ => (-k..=k).flat_map(|a| (-k..=k).map(move |b| vec![a, b])).collect(),
    };
    // Draw every coefficient first so the sequence is fixed, then evaluate
    // each mode's phases once for all components.
    let coeffs: Vec<Vec<(f64, f64)>> = (0..m)
        .map(|_| modes.iter().map(|_| (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect())
        .collect();
    let mut out = vec![0.0; grid.len() * m];
    let params: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.params(i)).collect();
    let mut trig = vec![(0.0, 0.0); grid.len()];
    for (j, mode) in modes.iter().enumerate() {
        let kept = mode.iter().zip(grid.sizes()).all(|(&q, &n)| 4 * q.unsigned_abs() as usize <= n);
        if !kept {
            continue;
        }
        let weight = 1.0 / (1.0 + mode.iter().map(|q| (q * q) as f64).sum::<f64>());
        for (t, th) in trig.iter_mut().zip(&params) {
            let phase: f64 = mode.iter().zip(th).map(|(&q, t)| q as f64 * t).sum();
            *t = (phase.cos(), phase.sin());
        }
        for (comp, c) in coeffs.iter().enumerate() {
            let (a, b) = c[j];
            for (i, &(cos, sin)) in trig.iter().enumerate() {
                out[i * m + comp] += weight * (a * cos + b * sin);
            }
        }
    }
    out
}

/// Adds `amplitude` times a seeded band-limited field to the immersion.
pub fn perturbed(imm: &DiscreteImmersion, seed: u64, amplitude: f64, max_mode: usize) -> Result<DiscreteImmersion> {
    let field = band_limited_field(imm.grid(), imm.dim(), seed, max_mode);
    let pts = imm.points().iter().zip(&field).map(|(p, f)| p + amplitude * f).collect();
    DiscreteImmersion::validated(imm.grid().clone(), imm.dim(), pts, imm.topology().clone())
}

/// Preset selection as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImmersionPreset {
    Circle {
        #[serde(default = "one")]
        radius: f64,
    },
    Trefoil,
    CliffordTorus {
        #[serde(default = "one")]
        scale: f64,
    },
    Point {
        #[serde(default)]
        position: Option<Vec<f64>>,
    },
    WindingLoop {
        #[serde(default)]
        direction: usize,
        #[serde(default)]
        offset: Option<Vec<f64>>,
    },
    File {
        path: String,
    },
}

fn one() -> f64 {
    1.0
}

/// Seeded perturbation applied on top of a preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub seed: u64,
    pub amplitude: f64,
    #[serde(default = "default_modes")]
    pub max_mode: usize,
}

fn default_modes() -> usize {
    3
}

impl ImmersionPreset {
    /// Intrinsic dimension of `S` for this preset, if fixed by the preset.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            ImmersionPreset::Circle { .. } | ImmersionPreset::Trefoil | ImmersionPreset::WindingLoop { .. } => Some(1),
            ImmersionPreset::CliffordTorus { .. } => Some(2),
            ImmersionPreset::Point { .. } => Some(0),
            ImmersionPreset::File { .. } => None,
        }
    }

    /// Samples the preset with `n` points per grid direction.
    pub fn build(&self, space: &AmbientSpace, n: usize, perturbation: Option<&Perturbation>) -> Result<DiscreteImmersion> {
        let m = space.dim();
        if !matches!(space.topology(), Topology::Euclidean)
            && !matches!(self, ImmersionPreset::WindingLoop { .. } | ImmersionPreset::File { .. })
        {
            return Err(Error::Unsupported("on a torus only winding loops and file immersions are available".into()));
        }
        let base = match self {
            ImmersionPreset::Circle { radius } => circle(m, *radius, n)?,
            ImmersionPreset::Trefoil => trefoil(m, n)?,
            ImmersionPreset::CliffordTorus { scale } => clifford_torus(m, *scale, n, n)?,
            ImmersionPreset::Point { position } => match position {
                Some(p) if p.len() != m => {
                    return Err(Error::DimensionMismatch { name: "position".into(), expected: m, found: p.len() })
                }
                Some(p) => point(p)?,
                None => point(&vec![0.0; m])?,
            },
            ImmersionPreset::WindingLoop { direction, offset } => {
                let offset = offset.clone().unwrap_or_else(|| vec![0.0; m]);
                winding_loop(space, *direction, n, &offset)?
            }
            ImmersionPreset::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                let file: super::ImmersionFile = serde_json::from_str(&text)?;
                file.into_immersion(space)?
            }
        };
        match perturbation {
            Some(p) if p.amplitude != 0.0 => perturbed(&base, p.seed, p.amplitude, p.max_mode),
            _ => Ok(base),
        }
    }
}
