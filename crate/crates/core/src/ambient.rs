//! Flat ambient manifolds carrying a VCP field.
//!
//! Points are coordinate vectors in R^m. On a flat torus the coordinates are
//! defined modulo the periods; immersions keep lifted (unreduced)
//! coordinates and all differences go through [`AmbientSpace::displacement`],
//! which picks the minimal image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vcp::{LinearVcp, VcpKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    Euclidean,
    Torus { periods: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum VcpField {
    /// Constant coefficients in flat coordinates.
    Parallel(LinearVcp),
    /// `χ_p = R(p) χ R(p)ᵀ` with `R(p)` the rotation by angle
    /// `twist_rate * p_1` in the `(e2, e3)` plane.
    NonParallel { base: LinearVcp, twist_rate: f64 },
}

impl VcpField {
    pub fn base(&self) -> &LinearVcp {
        match self {
            VcpField::Parallel(v) => v,
            VcpField::NonParallel { base, .. } => base,
        }
    }

    pub fn is_parallel(&self) -> bool {
        matches!(self, VcpField::Parallel(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSpace {
    m: usize,
    topology: Topology,
    field: VcpField,
}

impl AmbientSpace {
    pub fn new(topology: Topology, field: VcpField) -> Result<Self> {
        let m = field.base().dim();
        if let Topology::Torus { periods } = &topology {
            if periods.len() != m {
                return Err(Error::DimensionMismatch {
                    name: "periods".into(),
                    expected: m,
                    found: periods.len(),
                });
            }
            if periods.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
                return Err(Error::Config("torus periods must be positive".into()));
            }
            if !field.is_parallel() {
                return Err(Error::Unsupported(
                    "the twisted control field is only defined on Euclidean space".into(),
                ));
            }
        }
        if let VcpField::NonParallel { twist_rate, .. } = &field {
            if m < 3 {
                return Err(Error::Unsupported("twisted field needs m >= 3".into()));
            }
            if !twist_rate.is_finite() {
                return Err(Error::Config("twist rate must be finite".into()));
            }
        }
        Ok(Self { m, topology, field })
    }

    pub fn euclidean(vcp: LinearVcp) -> Self {
        Self { m: vcp.dim(), topology: Topology::Euclidean, field: VcpField::Parallel(vcp) }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn field(&self) -> &VcpField {
        &self.field
    }

    pub fn fold(&self) -> usize {
        self.field.base().fold()
    }

    fn check_dim(&self, name: &str, v: &[f64]) -> Result<()> {
        if v.len() != self.m {
            return Err(Error::DimensionMismatch { name: name.into(), expected: self.m, found: v.len() });
        }
        Ok(())
    }

    /// Reduces coordinates into `[0, period)` on a torus; identity otherwise.
    pub fn reduce(&self, p: &mut [f64]) {
        if let Topology::Torus { periods } = &self.topology {
            for (x, &l) in p.iter_mut().zip(periods) {
                *x = x.rem_euclid(l);
                if *x >= l {
                    *x = 0.0;
                }
            }
        }
    }

    /// Flat exponential map: translation, reduced modulo the periods.
    pub fn exp_map(&self, p: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim("p", p)?;
        self.check_dim("v", v)?;
        let mut out: Vec<f64> = p.iter().zip(v).map(|(a, b)| a + b).collect();
        self.reduce(&mut out);
        Ok(out)
    }

    /// Exponential map on lifted coordinates (no reduction).
    #[inline]
    pub fn exp_lifted(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..self.m {
            out[i] = p[i] + v[i];
        }
    }

    /// Differential of `Exp_p` at `w` applied to `u`, written into `out`.
    /// The metric is flat, so this is the identity.
    #[inline]
    pub fn exp_differential_into(&self, _p: &[f64], _w: &[f64], u: &[f64], out: &mut [f64]) {
        out[..self.m].copy_from_slice(&u[..self.m]);
    }

    /// Minimal-image vector from `from` to `to`.
    #[inline]
    pub fn displacement_into(&self, from: &[f64], to: &[f64], out: &mut [f64]) {
        match &self.topology {
            Topology::Euclidean => {
                for i in 0..self.m {
                    out[i] = to[i] - from[i];
                }
            }
            Topology::Torus { periods } => {
                for i in 0..self.m {
                    let l = periods[i];
                    let d = to[i] - from[i];
                    out[i] = d - l * (d / l).round();
                }
            }
        }
    }

    pub fn displacement(&self, from: &[f64], to: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.displacement_into(from, to, &mut out);
        out
    }

    /// Unwraps a sampled torus curve so that consecutive samples differ by
    /// their minimal image.
    pub fn unwrap_path(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            match out.last() {
                None => out.push(p.clone()),
                Some(prev) => {
                    let d = self.displacement(prev, p);
                    out.push(prev.iter().zip(&d).map(|(a, b)| a + b).collect());
                }
            }
        }
        out
    }

    /// Rotation `R(p)` of the twisted field, row-major; `None` when parallel.
    pub fn twist_rotation(&self, p: &[f64]) -> Option<Vec<f64>> {
        match &self.field {
            VcpField::Parallel(_) => None,
            VcpField::NonParallel { twist_rate, .. } => {
                let m = self.m;
                let theta = twist_rate * p[0];
                let (s, c) = theta.sin_cos();
                let mut q = vec![0.0; m * m];
                for i in 0..m {
                    q[i * m + i] = 1.0;
                }
                q[m + 1] = c;
                q[m + 2] = -s;
                q[2 * m + 1] = s;
                q[2 * m + 2] = c;
                Some(q)
            }
        }
    }

    /// The linear VCP at `p`.
    pub fn vcp_at(&self, p: &[f64]) -> LinearVcp {
        match (&self.field, self.twist_rotation(p)) {
            (VcpField::NonParallel { base, .. }, Some(q)) => base.conjugated(&q),
            (field, _) => field.base().clone(),
        }
    }

    /// `χ_p(args)` written into `out` without building a [`LinearVcp`].
    pub fn chi_at_into(&self, p: &[f64], args: &[&[f64]], out: &mut [f64]) {
        match &self.field {
            VcpField::Parallel(v) => v.eval_into(args, out),
            VcpField::NonParallel { base, twist_rate } => {
                let theta = twist_rate * p[0];
                let (s, c) = theta.sin_cos();
                // Rᵀ on each argument: rotate the (1,2) components by -theta.
                let rotated: Vec<Vec<f64>> = args
                    .iter()
                    .map(|a| {
                        let mut v = a.to_vec();
                        v[1] = c * a[1] + s * a[2];
                        v[2] = -s * a[1] + c * a[2];
                        v
                    })
                    .collect();
                let refs: Vec<&[f64]> = rotated.iter().map(Vec::as_slice).collect();
                base.eval_into(&refs, out);
                let (y, z) = (out[1], out[2]);
                out[1] = c * y - s * z;
                out[2] = s * y + c * z;
            }
        }
    }

    /// Covariant derivative of a vector field along a path, by central
    /// differences. In flat coordinates this is the componentwise derivative
    /// of the field; the path only fixes where the field is sampled.
    pub fn ambient_derivative<P, F>(&self, path: P, field_along_path: F, t: f64, h: f64) -> Result<Vec<f64>>
    where
        P: Fn(f64) -> Vec<f64>,
        F: Fn(f64) -> Vec<f64>,
    {
        if !(h > 0.0) {
            return Err(Error::InvalidStep(h));
        }
        for s in [t - h, t + h] {
            self.check_dim("path", &path(s))?;
        }
        let plus = field_along_path(t + h);
        let minus = field_along_path(t - h);
        self.check_dim("field_along_path", &plus)?;
        self.check_dim("field_along_path", &minus)?;
        Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    }
}

/// JSON description of an ambient space:
/// `{"m":7, "topology":"euclidean", "vcp":{"kind":"g2","parallel":true}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientConfig {
    pub m: usize,
    #[serde(default = "default_topology")]
    pub topology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<f64>>,
    pub vcp: VcpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VcpConfig {
    pub kind: String,
    #[serde(default = "default_true")]
    pub parallel: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_rate: Option<f64>,
}

fn default_topology() -> String {
    "euclidean".into()
}

fn default_true() -> bool {
    true
}

/// Twist rate of the documented non-parallel control.
pub const DEFAULT_TWIST_RATE: f64 = 0.5;

impl AmbientConfig {
    pub fn build(&self) -> Result<AmbientSpace> {
        let kind = match self.vcp.kind.to_ascii_lowercase().as_str() {
            "kaehler" | "kahler" => VcpKind::parse(&format!("kaehler{}", self.m))?,
            "volume" | "volume_form" => VcpKind::parse(&format!("volume{}", self.m))?,
            other => VcpKind::parse(other)?,
        };
        if kind.dim() != self.m {
            return Err(Error::Config(format!(
                "vcp.kind `{}` lives on R^{}, but m = {}",
                self.vcp.kind,
                kind.dim(),
                self.m
            )));
        }
        let vcp = LinearVcp::new(kind)?;
        let field = if self.vcp.parallel {
            if self.vcp.twist_rate.is_some_and(|t| t != 0.0) {
                return Err(Error::Config("vcp.twist_rate requires parallel = false".into()));
            }
            VcpField::Parallel(vcp)
        } else {
            VcpField::NonParallel { base: vcp, twist_rate: self.vcp.twist_rate.unwrap_or(DEFAULT_TWIST_RATE) }
        };
        let topology = match self.topology.to_ascii_lowercase().as_str() {
            "euclidean" => Topology::Euclidean,
            "torus" => Topology::Torus {
                periods: self.periods.clone().unwrap_or_else(|| vec![2.0 * std::f64::consts::PI; self.m]),
            },
            other => return Err(Error::Config(format!("topology: unknown value `{other}`"))),
        };
        AmbientSpace::new(topology, field)
    }
}
