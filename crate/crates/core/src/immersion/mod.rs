//! Closed (r-1)-manifolds `S` sampled on periodic parameter grids and
//! immersed in a flat ambient space.
//!
//! `S` is a point (`d = 0`), a circle (`d = 1`) or a 2-torus (`d = 2`), each
//! parametrized by `[0, 2π)^d` with `N_i` samples per direction. Samples are
//! stored row-major with the last grid direction fastest; every per-sample
//! quantity is a flat `Vec<f64>` of `n_samples * m` entries.
//!
//! Parameter derivatives use the periodic central stencil carried by the
//! grid. Reductions over the grid go through a permutation-invariant sum so
//! that cyclic reparametrizations leave every integral bit-identical.

mod stencil;
pub mod presets;

use serde::{Deserialize, Serialize};

pub use stencil::Stencil;

use crate::ambient::{AmbientSpace, Topology};
use crate::error::{Error, Result};
use crate::linalg::{dot, permutation_invariant_sum};

/// Smallest admissible singular value of the parameter Jacobian.
pub const IMMERSION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamGrid {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    stencil: Stencil,
}

impl ParamGrid {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        Self::with_stencil(sizes, Stencil::default())
    }

    pub fn with_stencil(sizes: Vec<usize>, stencil: Stencil) -> Result<Self> {
        if sizes.len() > 2 {
            return Err(Error::InvalidGrid(format!("grid dimension {} > 2 is not supported", sizes.len())));
        }
        let min = (2 * stencil.reach()).max(5);
        if let Some(&n) = sizes.iter().find(|&&n| n < min) {
            return Err(Error::InvalidGrid(format!("{n} samples is below the stencil width {min}")));
        }
        let mut strides = vec![1; sizes.len()];
        for k in (0..sizes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * sizes[k + 1];
        }
        Ok(Self { sizes, strides, stencil })
    }

    /// The grid of a point: no directions, one sample.
    pub fn point() -> Self {
        Self { sizes: vec![], strides: vec![], stencil: Stencil::default() }
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, dir: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.sizes[dir] as f64
    }

    /// Quadrature weight of one sample (product of spacings; 1 for a point).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Grid coordinates of sample `idx`.
    pub fn coords(&self, idx: usize) -> Vec<usize> {
        self.sizes.iter().zip(&self.strides).map(|(&n, &s)| (idx / s) % n).collect()
    }

    /// Parameter values `(θ_1, .., θ_d)` of sample `idx`.
    pub fn params(&self, idx: usize) -> Vec<f64> {
        self.coords(idx).iter().enumerate().map(|(a, &c)| c as f64 * self.spacing(a)).collect()
    }

    /// Index of the sample `offset` steps from `idx` along `dir`, wrapping.
    #[inline]
    pub fn neighbor(&self, idx: usize, dir: usize, offset: isize) -> usize {
        let n = self.sizes[dir] as isize;
        let s = self.strides[dir];
        let c = ((idx / s) % n as usize) as isize;
        let c2 = (c + offset).rem_euclid(n);
        (idx as isize + (c2 - c) * s as isize) as usize
    }

    /// Index after a cyclic shift of every coordinate.
    pub fn shifted(&self, idx: usize, shift: &[isize]) -> usize {
        let mut out = idx;
        for (dir, &k) in shift.iter().enumerate() {
            out = self.neighbor(out, dir, k);
        }
        out
    }

    /// Derivative along `dir` of a plain vector-valued grid function.
    pub fn derivative(&self, values: &[f64], m: usize, dir: usize) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        let inv = 1.0 / self.spacing(dir);
        let coeffs = self.stencil.first();
        for idx in 0..self.len() {
            let o = &mut out[idx * m..(idx + 1) * m];
            for (k, &c) in coeffs.iter().enumerate() {
                let p = self.neighbor(idx, dir, k as isize + 1);
                let q = self.neighbor(idx, dir, -(k as isize) - 1);
                for i in 0..m {
                    o[i] += c * (values[p * m + i] - values[q * m + i]);
                }
            }
            o.iter_mut().for_each(|x| *x *= inv);
        }
        out
    }

    /// `Σ_s f(s) · cell_volume`, independent of sample order.
    pub fn integrate(&self, mut values: Vec<f64>) -> f64 {
        permutation_invariant_sum(&mut values) * self.cell_volume()
    }
}

/// Sampled immersion `ι: S → M`, stored in lifted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteImmersion {
    grid: ParamGrid,
    m: usize,
    topology: Topology,
    points: Vec<f64>,
}

impl DiscreteImmersion {
    pub fn new(grid: ParamGrid, m: usize, points: Vec<f64>, topology: Topology) -> Result<Self> {
        if points.len() != grid.len() * m {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates for {} samples in R^{m}",
                points.len(),
                grid.len()
            )));
        }
        if let Topology::Torus { periods } = &topology {
            if periods.len() != m {
                return Err(Error::DimensionMismatch { name: "periods".into(), expected: m, found: periods.len() });
            }
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite coordinate".into()));
        }
        Ok(Self { grid, m, topology, points })
    }

    /// Builds and checks the immersion condition at every sample.
    pub fn validated(grid: ParamGrid, m: usize, points: Vec<f64>, topology: Topology) -> Result<Self> {
        let imm = Self::new(grid, m, points, topology)?;
        tangent_frame(&imm)?;
        Ok(imm)
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        &self.points[idx * self.m..(idx + 1) * self.m]
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same grid and topology, new coordinates.
    pub fn with_points(&self, points: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), self.m, points, self.topology.clone())
    }

    #[inline]
    fn disp(&self, from: usize, to: usize, out: &mut [f64]) {
        let (a, b) = (self.point(from), self.point(to));
        match &self.topology {
            Topology::Euclidean => {
                for i in 0..self.m {
                    out[i] = b[i] - a[i];
                }
            }
            Topology::Torus { periods } => {
                for i in 0..self.m {
                    let d = b[i] - a[i];
                    out[i] = d - periods[i] * (d / periods[i]).round();
                }
            }
        }
    }

    /// First parameter derivatives, layout `[sample][dir][component]`.
    pub fn jacobian(&self) -> Vec<f64> {
        let (d, m) = (self.grid.dim(), self.m);
        let coeffs = self.grid.stencil().first();
        let mut out = vec![0.0; self.len() * d * m];
        let mut fwd = vec![0.0; m];
        let mut bwd = vec![0.0; m];
        for idx in 0..self.len() {
            for a in 0..d {
                let inv = 1.0 / self.grid.spacing(a);
                let o = &mut out[(idx * d + a) * m..(idx * d + a + 1) * m];
                for (k, &c) in coeffs.iter().enumerate() {
                    self.disp(idx, self.grid.neighbor(idx, a, k as isize + 1), &mut fwd);
                    self.disp(idx, self.grid.neighbor(idx, a, -(k as isize) - 1), &mut bwd);
                    for i in 0..m {
                        o[i] += c * (fwd[i] - bwd[i]);
                    }
                }
                o.iter_mut().for_each(|x| *x *= inv);
            }
        }
        out
    }

    /// Second parameter derivatives `∂_a ∂_b ι` for `a <= b`, layout
    /// `[sample][pair][component]` with pairs ordered (0,0), (0,1), (1,1).
    pub fn hessian(&self) -> Vec<f64> {
        let (d, m) = (self.grid.dim(), self.m);
        let npairs = d * (d + 1) / 2;
        let mut out = vec![0.0; self.len() * npairs * m];
        let coeffs = self.grid.stencil().second();
        let mut fwd = vec![0.0; m];
        let mut bwd = vec![0.0; m];
        let pair_index = |a: usize, b: usize| if a == b { if a == 0 { 0 } else { npairs - 1 } } else { 1 };
        for idx in 0..self.len() {
            for a in 0..d {
                let inv = 1.0 / (self.grid.spacing(a) * self.grid.spacing(a));
                let p = pair_index(a, a);
                let o = &mut out[(idx * npairs + p) * m..(idx * npairs + p + 1) * m];
                for (k, &c) in coeffs.iter().enumerate() {
                    self.disp(idx, self.grid.neighbor(idx, a, k as isize + 1), &mut fwd);
                    self.disp(idx, self.grid.neighbor(idx, a, -(k as isize) - 1), &mut bwd);
                    for i in 0..m {
                        o[i] += c * (fwd[i] + bwd[i]);
                    }
                }
                o.iter_mut().for_each(|x| *x *= inv);
            }
        }
        if d == 2 {
            // Mixed derivative: first-derivative stencil applied twice.
            let jac = self.jacobian();
            let d0: Vec<f64> = (0..self.len()).flat_map(|i| jac[(i * 2) * m..(i * 2 + 1) * m].to_vec()).collect();
            let mixed = self.grid.derivative(&d0, m, 1);
            for idx in 0..self.len() {
                out[(idx * 3 + 1) * m..(idx * 3 + 2) * m].copy_from_slice(&mixed[idx * m..(idx + 1) * m]);
            }
        }
        out
    }
}

/// Oriented orthonormal frames of `ι_*T_sS` plus the raw Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    d: usize,
    m: usize,
    frames: Vec<f64>,
    raw: Vec<f64>,
}

impl TangentFrame {
    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        if self.d == 0 {
            1
        } else {
            self.frames.len() / (self.d * self.m)
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frame vector `a` at sample `idx`.
    #[inline]
    pub fn vector(&self, idx: usize, a: usize) -> &[f64] {
        let o = (idx * self.d + a) * self.m;
        &self.frames[o..o + self.m]
    }

    /// Un-normalized parameter derivative `∂_a ι` at sample `idx`.
    #[inline]
    pub fn raw(&self, idx: usize, a: usize) -> &[f64] {
        let o = (idx * self.d + a) * self.m;
        &self.raw[o..o + self.m]
    }

    /// Frame vectors at `idx`, in orientation order.
    pub fn vectors(&self, idx: usize) -> Vec<&[f64]> {
        (0..self.d).map(|a| self.vector(idx, a)).collect()
    }

    /// Removes the tangential part of `v` in place.
    #[inline]
    pub fn project_in_place(&self, idx: usize, v: &mut [f64]) {
        for a in 0..self.d {
            let f = self.vector(idx, a);
            let c = dot(f, v);
            for (vi, fi) in v.iter_mut().zip(f) {
                *vi -= c * fi;
            }
        }
    }

    /// Largest tangential component of a field, `max |⟨v(s), f_a(s)⟩|`.
    pub fn tangential_residual(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for idx in 0..self.len() {
            let v = &values[idx * self.m..(idx + 1) * self.m];
            for a in 0..self.d {
                worst = worst.max(dot(v, self.vector(idx, a)).abs());
            }
        }
        worst
    }
}

/// A section of the normal bundle, one ambient vector per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalField {
    m: usize,
    values: Vec<f64>,
}

impl NormalField {
    /// Wraps values that are already normal; no projection is applied.
    pub fn from_normal_values(m: usize, values: Vec<f64>) -> Self {
        Self { m, values }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, values: vec![0.0; m * n] }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sample(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.m..(idx + 1) * self.m]
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(&self.values)
    }
}

fn gram(raw: &[&[f64]]) -> Vec<f64> {
    let d = raw.len();
    let mut g = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            g[a * d + b] = dot(raw[a], raw[b]);
        }
    }
    g
}

fn smallest_singular_value(g: &[f64], d: usize) -> f64 {
    match d {
        0 => f64::INFINITY,
        1 => g[0].sqrt(),
        _ => {
            let (a, b, c) = (g[0], g[1], g[3]);
            let tr = 0.5 * (a + c);
            let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            (tr - disc).max(0.0).sqrt()
        }
    }
}

/// Oriented orthonormal tangent frames by modified Gram-Schmidt on the
/// stencil Jacobian.
pub fn tangent_frame(imm: &DiscreteImmersion) -> Result<TangentFrame> {
    let (d, m) = (imm.grid().dim(), imm.dim());
    if d == 0 {
        return Ok(TangentFrame { d, m, frames: vec![], raw: vec![] });
    }
    let raw = imm.jacobian();
    let mut frames = raw.clone();
    for idx in 0..imm.len() {
        let cols: Vec<&[f64]> = (0..d).map(|a| &raw[(idx * d + a) * m..(idx * d + a + 1) * m]).collect();
        let sigma = smallest_singular_value(&gram(&cols), d);
        if !(sigma > IMMERSION_TOLERANCE) {
            return Err(Error::NotImmersed { sample: idx, sigma });
        }
        let block = &mut frames[idx * d * m..(idx + 1) * d * m];
        for a in 0..d {
            let (done, rest) = block.split_at_mut(a * m);
            let v = &mut rest[..m];
            for b in 0..a {
                let q = &done[b * m..(b + 1) * m];
                let c = dot(q, v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
            let n = dot(v, v).sqrt();
            v.iter_mut().for_each(|x| *x /= n);
        }
    }
    Ok(TangentFrame { d, m, frames, raw })
}

/// Per-sample `v ↦ v − Σ ⟨v, f_a⟩ f_a`.
pub fn normal_project(frame: &TangentFrame, ambient_field: &[f64]) -> Result<NormalField> {
    let (m, n) = (frame.dim(), frame.len());
    if ambient_field.len() != m * n {
        return Err(Error::ShapeMismatch(format!(
            "field has {} entries, frame expects {} samples in R^{m}",
            ambient_field.len(),
            n
        )));
    }
    let mut values = ambient_field.to_vec();
    for idx in 0..n {
        frame.project_in_place(idx, &mut values[idx * m..(idx + 1) * m]);
    }
    Ok(NormalField { m, values })
}

/// `√det(G)` per sample from a frame's raw Jacobian; `[1.0]` for a point.
pub fn volume_from_frame(frame: &TangentFrame) -> Vec<f64> {
    let d = frame.rank();
    if d == 0 {
        return vec![1.0];
    }
    (0..frame.len())
        .map(|idx| {
            let cols: Vec<&[f64]> = (0..d).map(|a| frame.raw(idx, a)).collect();
            crate::linalg::det(&gram(&cols), d).sqrt()
        })
        .collect()
}

/// Density of the induced volume form `vol_{ι*g}` with respect to the
/// parameter measure.
pub fn induced_volume(imm: &DiscreteImmersion) -> Result<Vec<f64>> {
    Ok(volume_from_frame(&tangent_frame(imm)?))
}

/// `H = (1/d) Π(g^{ab} ∂_a ∂_b ι)`.
pub fn mean_curvature(imm: &DiscreteImmersion) -> Result<NormalField> {
    let frame = tangent_frame(imm)?;
    mean_curvature_with_frame(imm, &frame)
}

pub(crate) fn mean_curvature_with_frame(imm: &DiscreteImmersion, frame: &TangentFrame) -> Result<NormalField> {
    let (d, m) = (imm.grid().dim(), imm.dim());
    if d == 0 {
        return Err(Error::PointImmersion);
    }
    let hess = imm.hessian();
    let npairs = d * (d + 1) / 2;
    let mut values = vec![0.0; imm.len() * m];
    for idx in 0..imm.len() {
        let cols: Vec<&[f64]> = (0..d).map(|a| frame.raw(idx, a)).collect();
        let g = gram(&cols);
        let h = |p: usize| &hess[(idx * npairs + p) * m..(idx * npairs + p + 1) * m];
        let out = &mut values[idx * m..(idx + 1) * m];
        if d == 1 {
            let w = 1.0 / g[0];
            for i in 0..m {
                out[i] = w * h(0)[i];
            }
        } else {
            let det = g[0] * g[3] - g[1] * g[2];
            let (i00, i01, i11) = (g[3] / det, -g[1] / det, g[0] / det);
            let (h00, h01, h11) = (h(0), h(1), h(2));
            for i in 0..m {
                out[i] = 0.5 * (i00 * h00[i] + 2.0 * i01 * h01[i] + i11 * h11[i]);
            }
        }
        frame.project_in_place(idx, out);
    }
    Ok(NormalField { m, values })
}

/// `W = −(dim S) H`, the L2-gradient of the volume functional; zero for a point.
pub fn gradient_field_w(imm: &DiscreteImmersion) -> Result<NormalField> {
    let d = imm.grid().dim();
    if d == 0 {
        return Ok(NormalField::zeros(imm.dim(), 1));
    }
    let mut h = mean_curvature(imm)?;
    h.values.iter_mut().for_each(|x| *x *= -(d as f64));
    Ok(h)
}

pub(crate) fn gradient_with_frame(imm: &DiscreteImmersion, frame: &TangentFrame) -> Result<NormalField> {
    let d = imm.grid().dim();
    if d == 0 {
        return Ok(NormalField::zeros(imm.dim(), 1));
    }
    let mut h = mean_curvature_with_frame(imm, frame)?;
    h.values.iter_mut().for_each(|x| *x *= -(d as f64));
    Ok(h)
}

/// Cyclic index shift per direction: sample `i` of the result is sample
/// `i + shift` of the input.
pub fn reparametrize(imm: &DiscreteImmersion, shift: &[isize]) -> Result<DiscreteImmersion> {
    let points = shift_samples(imm.grid(), imm.points(), imm.dim(), shift)?;
    imm.with_points(points)
}

/// Applies the same cyclic shift as [`reparametrize`] to any per-sample field.
pub fn shift_samples(grid: &ParamGrid, values: &[f64], m: usize, shift: &[isize]) -> Result<Vec<f64>> {
    if shift.len() != grid.dim() {
        return Err(Error::ShapeMismatch(format!("{} shifts for a {}-dimensional grid", shift.len(), grid.dim())));
    }
    if values.len() != grid.len() * m {
        return Err(Error::ShapeMismatch("field does not match the grid".into()));
    }
    let mut out = vec![0.0; values.len()];
    for idx in 0..grid.len() {
        let src = grid.shifted(idx, shift);
        out[idx * m..(idx + 1) * m].copy_from_slice(&values[src * m..(src + 1) * m]);
    }
    Ok(out)
}

/// On-disk form of a custom immersion:
/// `{"grid":{"sizes":[64]}, "points":[[x,y,z],...]}` in row-major grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionFile {
    pub grid: GridSpec,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sizes: Vec<usize>,
}

impl ImmersionFile {
    pub fn into_immersion(self, space: &AmbientSpace) -> Result<DiscreteImmersion> {
        let grid = ParamGrid::new(self.grid.sizes)?;
        let m = space.dim();
        if self.points.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} points for a grid of {} samples",
                self.points.len(),
                grid.len()
            )));
        }
        let mut flat = Vec::with_capacity(grid.len() * m);
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != m {
                return Err(Error::DimensionMismatch { name: format!("points[{i}]"), expected: m, found: p.len() });
            }
            flat.extend_from_slice(p);
        }
        DiscreteImmersion::validated(grid, m, flat, space.topology().clone())
    }

    pub fn from_immersion(imm: &DiscreteImmersion) -> Self {
        Self {
            grid: GridSpec { sizes: imm.grid().sizes().to_vec() },
            points: imm.points().chunks(imm.dim()).map(<[f64]>::to_vec).collect(),
        }
    }
}
