//! Weak L2 geometry of the discretized knot space.
//!
//! A point of the knot space is an immersion together with its tangent
//! frames and volume density ([`KnotPoint`]); a tangent vector is a normal
//! field at such a point ([`KnotTangent`]). Vector fields on the knot space
//! are modelled by [`VectorField`]: anything that yields a normal field at
//! nearby immersions. Brackets and covariant derivatives are central
//! differences in the flow parameter, with optional Richardson extrapolation.

mod fields;
mod tensors;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use fields::{ExtensionRule, KnotVectorFieldScheme, VectorField};

use crate::ambient::AmbientSpace;
use crate::error::{Error, Result};
use crate::immersion::{self, DiscreteImmersion, NormalField, TangentFrame};
use crate::linalg::{dot, max_abs};

/// Default flow step for brackets and covariant derivatives.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Tangential component tolerated in a field declared normal, relative to
/// `max(1, |u|_∞)`.
pub const NORMAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    Perp,
    LeviCivita,
}

/// An immersion with the data every knot-space operation needs at it.
#[derive(Debug)]
pub struct KnotPoint {
    imm: DiscreteImmersion,
    frame: TangentFrame,
    volume: Vec<f64>,
    gradient: OnceLock<NormalField>,
}

impl KnotPoint {
    pub fn new(imm: DiscreteImmersion) -> Result<Self> {
        let frame = immersion::tangent_frame(&imm)?;
        let volume = immersion::volume_from_frame(&frame);
        Ok(Self { imm, frame, volume, gradient: OnceLock::new() })
    }

    pub fn immersion(&self) -> &DiscreteImmersion {
        &self.imm
    }

    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    pub fn volume(&self) -> &[f64] {
        &self.volume
    }

    pub fn len(&self) -> usize {
        self.imm.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.imm.dim()
    }

    /// `W = −(dim S) H`, computed on first use.
    pub fn gradient_w(&self) -> &NormalField {
        self.gradient.get_or_init(|| {
            immersion::gradient_with_frame(&self.imm, &self.frame)
                .expect("frame exists, so the mean curvature is defined")
        })
    }

    /// `∫_S f vol`.
    pub fn integrate(&self, pointwise: impl Fn(usize) -> f64) -> f64 {
        let vals = (0..self.len()).map(|i| pointwise(i) * self.volume[i]).collect();
        self.imm.grid().integrate(vals)
    }

    /// Total volume of the immersed manifold.
    pub fn total_volume(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || self.imm == other.imm
    }
}

/// A normal field at a knot point.
#[derive(Debug, Clone)]
pub struct KnotTangent {
    base: Arc<KnotPoint>,
    values: Vec<f64>,
}

impl KnotTangent {
    /// Normal projection of an arbitrary ambient field.
    pub fn project(base: &Arc<KnotPoint>, ambient: &[f64]) -> Result<Self> {
        let values = immersion::normal_project(&base.frame, ambient)?.into_values();
        Ok(Self { base: base.clone(), values })
    }

    /// Wraps values that must already be normal.
    pub fn from_normal(base: &Arc<KnotPoint>, values: Vec<f64>) -> Result<Self> {
        if values.len() != base.len() * base.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for {} samples in R^{}",
                values.len(),
                base.len(),
                base.dim()
            )));
        }
        let t = Self { base: base.clone(), values };
        t.check_normal()?;
        Ok(t)
    }

    pub fn zero(base: &Arc<KnotPoint>) -> Self {
        Self { base: base.clone(), values: vec![0.0; base.len() * base.dim()] }
    }

    pub(crate) fn raw(base: &Arc<KnotPoint>, values: Vec<f64>) -> Self {
        Self { base: base.clone(), values }
    }

    fn check_normal(&self) -> Result<()> {
        let tol = NORMAL_TOLERANCE * max_abs(&self.values).max(1.0);
        let residual = self.base.frame.tangential_residual(&self.values);
        if residual > tol {
            return Err(Error::NotNormal { component: residual, tolerance: tol });
        }
        Ok(())
    }

    pub fn base(&self) -> &Arc<KnotPoint> {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sample(&self, idx: usize) -> &[f64] {
        let m = self.base.dim();
        &self.values[idx * m..(idx + 1) * m]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    fn check_base(&self, other: &Self) -> Result<()> {
        if self.base.same_as(&other.base) {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_base(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { base: self.base.clone(), values })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { base: self.base.clone(), values: self.values.iter().map(|x| a * x).collect() }
    }

    /// Pointwise inner product `g(u, v)` as a function on `S`.
    pub fn pointwise_inner(&self, other: &Self) -> Result<Vec<f64>> {
        self.check_base(other)?;
        let m = self.base.dim();
        Ok(self.values.chunks(m).zip(other.values.chunks(m)).map(|(a, b)| dot(a, b)).collect())
    }
}

/// The discretized knot space of an ambient manifold, with the numerical
/// conventions of every operation on it.
#[derive(Debug, Clone)]
pub struct KnotSpace {
    ambient: AmbientSpace,
    sign: f64,
    step: f64,
    richardson: bool,
}

impl KnotSpace {
    pub fn new(ambient: AmbientSpace) -> Self {
        Self { ambient, sign: 1.0, step: DEFAULT_STEP, richardson: false }
    }

    /// Flips the orientation convention for contracting the tangent frame
    /// into `χ` and `φ_χ` (`-1` contracts with the opposite orientation).
    pub fn with_orientation_sign(mut self, sign: f64) -> Self {
        self.sign = if sign < 0.0 { -1.0 } else { 1.0 };
        self
    }

    pub fn with_step(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidStep(h));
        }
        self.step = h;
        Ok(self)
    }

    pub fn with_richardson(mut self, on: bool) -> Self {
        self.richardson = on;
        self
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn richardson(&self) -> bool {
        self.richardson
    }

    pub fn orientation_sign(&self) -> f64 {
        self.sign
    }

    /// The knot point of an immersion in this space.
    pub fn point(&self, imm: DiscreteImmersion) -> Result<Arc<KnotPoint>> {
        if imm.dim() != self.ambient.dim() {
            return Err(Error::DimensionMismatch { name: "immersion".into(), expected: self.ambient.dim(), found: imm.dim() });
        }
        if imm.topology() != self.ambient.topology() {
            return Err(Error::Config("immersion topology differs from the ambient space".into()));
        }
        let d = imm.grid().dim();
        if d + 1 != self.ambient.fold() {
            return Err(Error::ArityMismatch { expected: self.ambient.fold() - 1, found: d });
        }
        Ok(Arc::new(KnotPoint::new(imm)?))
    }

    /// `⟨u, v⟩ = ∫_S g(u, v) vol`.
    pub fn l2_inner(&self, u: &KnotTangent, v: &KnotTangent) -> Result<f64> {
        let g = u.pointwise_inner(v)?;
        Ok(u.base.integrate(|i| g[i]))
    }

    /// `(J u)_s = χ_{ι(s)}(f_1, .., f_d, u_s)`, times the orientation sign.
    pub fn apply_j(&self, u: &KnotTangent) -> Result<KnotTangent> {
        u.check_normal()?;
        Ok(KnotTangent::raw(&u.base, self.j_values(&u.base, &u.values)))
    }

    /// Pointwise `J` at `at` applied to arbitrary values; no normality check.
    pub(crate) fn j_values(&self, at: &KnotPoint, values: &[f64]) -> Vec<f64> {
        let (m, d) = (at.dim(), at.frame.rank());
        let mut out = vec![0.0; values.len()];
        let mut args: Vec<&[f64]> = Vec::with_capacity(d + 1);
        for idx in 0..at.len() {
            args.clear();
            args.extend(at.frame.vectors(idx));
            args.push(&values[idx * m..(idx + 1) * m]);
            let o = &mut out[idx * m..(idx + 1) * m];
            self.ambient.chi_at_into(at.imm.point(idx), &args, o);
            if self.sign < 0.0 {
                o.iter_mut().for_each(|x| *x = -*x);
            }
        }
        out
    }

    /// `ω²(u, v) = ∫_S φ_χ(f_1, .., f_d, u, v) vol`.
    pub fn omega2(&self, u: &KnotTangent, v: &KnotTangent) -> Result<f64> {
        u.check_base(v)?;
        let at = &u.base;
        let m = at.dim();
        let mut chi = vec![0.0; m];
        let mut phi = vec![0.0; at.len()];
        for (idx, slot) in phi.iter_mut().enumerate() {
            let mut args: Vec<&[f64]> = at.frame.vectors(idx);
            args.push(u.sample(idx));
            self.ambient.chi_at_into(at.imm.point(idx), &args, &mut chi);
            *slot = self.sign * dot(&chi, v.sample(idx));
        }
        Ok(at.integrate(|i| phi[i]))
    }

    /// `s ↦ Exp_{ι(s)}(t u(s))`, in lifted coordinates.
    pub fn flow(&self, imm: &DiscreteImmersion, u: &[f64], t: f64) -> Result<DiscreteImmersion> {
        if u.len() != imm.points().len() {
            return Err(Error::ShapeMismatch("flow direction does not match the immersion".into()));
        }
        let m = imm.dim();
        let mut pts = vec![0.0; u.len()];
        for idx in 0..imm.len() {
            let r = idx * m..(idx + 1) * m;
            let dir: Vec<f64> = u[r.clone()].iter().map(|x| t * x).collect();
            self.ambient.exp_lifted(imm.point(idx), &dir, &mut pts[r]);
        }
        imm.with_points(pts)
    }

    /// Knot point reached by flowing `base` along `u` for time `t`.
    pub fn flow_point(&self, u: &KnotTangent, t: f64) -> Result<Arc<KnotPoint>> {
        self.point(self.flow(u.base.immersion(), &u.values, t)?)
    }

    /// Central difference of `f` along the flow of `u`, Richardson-combined
    /// when enabled: `(4 D(h/2) − D(h)) / 3`.
    pub(crate) fn directional<T, F>(&self, u: &KnotTangent, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&Arc<KnotPoint>) -> Result<T>,
        T: AsRef<[f64]>,
    {
        let central = |h: f64| -> Result<Vec<f64>> {
            let plus = f(&self.flow_point(u, h)?)?;
            let minus = f(&self.flow_point(u, -h)?)?;
            Ok(plus.as_ref().iter().zip(minus.as_ref()).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        };
        let h = self.step;
        if self.richardson {
            let coarse = central(h)?;
            let fine = central(0.5 * h)?;
            Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
        } else {
            central(h)
        }
    }

    /// Derivative of a scalar function on the knot space along `u`.
    pub fn directional_scalar<F>(&self, u: &KnotTangent, f: F) -> Result<f64>
    where
        F: Fn(&Arc<KnotPoint>) -> Result<f64>,
    {
        Ok(self.directional(u, |p| f(p).map(|x| [x]))?[0])
    }

    /// Tensor `𝔅(u, v) = g(u,v) W − g(u,W) v − g(v,W) u`, assembled pointwise.
    pub fn b_tensor(&self, u: &KnotTangent, v: &KnotTangent) -> Result<KnotTangent> {
        u.check_base(v)?;
        let at = &u.base;
        let m = at.dim();
        let w = at.gradient_w();
        let mut out = vec![0.0; u.values.len()];
        for idx in 0..at.len() {
            let (us, vs, ws) = (u.sample(idx), v.sample(idx), w.sample(idx));
            let (uv, uw, vw) = (dot(us, vs), dot(us, ws), dot(vs, ws));
            let o = &mut out[idx * m..(idx + 1) * m];
            for i in 0..m {
                o[i] = uv * ws[i] - (uw * vs[i] + vw * us[i]);
            }
        }
        Ok(KnotTangent::raw(at, out))
    }

    /// `∫_S g(u, W) g(v, w) vol`, the volume-variation term separating the
    /// two connections.
    pub fn volume_variation(&self, u: &KnotTangent, v: &KnotTangent, w: &KnotTangent) -> Result<f64> {
        u.check_base(v)?;
        u.check_base(w)?;
        let grad = u.base.gradient_w();
        Ok(u.base.integrate(|i| dot(u.sample(i), grad.sample(i)) * dot(v.sample(i), w.sample(i))))
    }
}

#[cfg(test)]
mod tests;
