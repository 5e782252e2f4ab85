//! Linear r-fold vector cross products on R^m.
//!
//! Four families exist for a positive definite inner product:
//!
//! | kind            | m     | r     | VCP-form                |
//! |-----------------|-------|-------|-------------------------|
//! | `Kaehler(n)`    | 2n    | 1     | standard Kähler form    |
//! | `VolumeForm(m)` | m     | m - 1 | volume form             |
//! | `G2`            | 7     | 2     | associative 3-form      |
//! | `Spin7`         | 8     | 3     | Cayley 4-form           |
//!
//! A structure is stored through its values on increasing basis tuples
//! `χ(e_{i1}, ..., e_{ir})`, `i1 < ... < ir`, with exact ±1 coefficients.
//! Evaluation expands each argument tuple into `r x r` minors, so the map
//! is multilinear and alternating by construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, dot, gram_det, mat_t_vec, mat_vec, norm};
use crate::octonion;

/// Tolerance for orthonormality of plane frames.
pub const FRAME_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VcpKind {
    Kaehler { n: usize },
    VolumeForm { m: usize },
    G2,
    Spin7,
}

impl VcpKind {
    pub fn dim(&self) -> usize {
        match *self {
            VcpKind::Kaehler { n } => 2 * n,
            VcpKind::VolumeForm { m } => m,
            VcpKind::G2 => 7,
            VcpKind::Spin7 => 8,
        }
    }

    pub fn fold(&self) -> usize {
        match *self {
            VcpKind::Kaehler { .. } => 1,
            VcpKind::VolumeForm { m } => m - 1,
            VcpKind::G2 => 2,
            VcpKind::Spin7 => 3,
        }
    }

    /// Parses the short names used on the command line and in configs:
    /// `g2`, `spin7`, `kaehler<m>`/`kahler<m>`, `volume<m>`.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        let num = |prefix: &str| -> Option<usize> { lower.strip_prefix(prefix)?.parse().ok() };
        if lower == "g2" {
            Ok(VcpKind::G2)
        } else if lower == "spin7" {
            Ok(VcpKind::Spin7)
        } else if let Some(m) = num("kaehler").or_else(|| num("kahler")) {
            if m == 0 || m % 2 != 0 {
                return Err(Error::Unsupported(format!("Kähler structure needs even m, got {m}")));
            }
            Ok(VcpKind::Kaehler { n: m / 2 })
        } else if let Some(m) = num("volume") {
            Ok(VcpKind::VolumeForm { m })
        } else {
            Err(Error::Unsupported(format!("unknown VCP kind `{name}`")))
        }
    }

    pub fn name(&self) -> String {
        match *self {
            VcpKind::Kaehler { n } => format!("kaehler{}", 2 * n),
            VcpKind::VolumeForm { m } => format!("volume{m}"),
            VcpKind::G2 => "g2".into(),
            VcpKind::Spin7 => "spin7".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Block {
    lower: Vec<usize>,
    outs: Vec<(usize, f64)>,
}

/// One structure coefficient `χ^output_{lower}` with strictly increasing
/// `lower`; the remaining coefficients follow by antisymmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub output: usize,
    pub lower: Vec<usize>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearVcp {
    m: usize,
    r: usize,
    kind: VcpKind,
    blocks: Vec<Block>,
    /// Orthogonal conjugation `χ_Q(v..) = Q χ(Qᵀv, ..)`, row-major.
    rotation: Option<Vec<f64>>,
}

fn combinations(m: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, r, &mut Vec::with_capacity(r), &mut out);
    out
}

impl LinearVcp {
    pub fn new(kind: VcpKind) -> Result<Self> {
        match kind {
            VcpKind::Kaehler { n } => Self::kaehler(n),
            VcpKind::VolumeForm { m } => Self::volume_form(m),
            VcpKind::G2 => Ok(Self::g2()),
            VcpKind::Spin7 => Ok(Self::spin7()),
        }
    }

    /// Standard complex structure `J0 e_{2i-1} = e_{2i}` on R^{2n}.
    pub fn kaehler(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Unsupported("Kähler structure on R^0".into()));
        }
        let mut blocks = Vec::with_capacity(2 * n);
        for i in 0..n {
            blocks.push(Block { lower: vec![2 * i], outs: vec![(2 * i + 1, 1.0)] });
            blocks.push(Block { lower: vec![2 * i + 1], outs: vec![(2 * i, -1.0)] });
        }
        Ok(Self { m: 2 * n, r: 1, kind: VcpKind::Kaehler { n }, blocks, rotation: None })
    }

    /// `χ(v_1, .., v_{m-1}) = ⋆(v_1 ∧ .. ∧ v_{m-1})`, expanded in signed
    /// cofactors: `χ(v..)_k = det[v_1 .. v_{m-1} e_k]`.
    pub fn volume_form(m: usize) -> Result<Self> {
        if !(2..=8).contains(&m) {
            return Err(Error::Unsupported(format!("volume-form VCP needs 2 <= m <= 8, got {m}")));
        }
        let blocks = (0..m)
            .rev()
            .map(|k| {
                let lower: Vec<usize> = (0..m).filter(|&i| i != k).collect();
                let sign = if (m - 1 - k) % 2 == 0 { 1.0 } else { -1.0 };
                Block { lower, outs: vec![(k, sign)] }
            })
            .collect();
        Ok(Self { m, r: m - 1, kind: VcpKind::VolumeForm { m }, blocks, rotation: None })
    }

    /// Cross product of imaginary octonions on R^7.
    pub fn g2() -> Self {
        let blocks = combinations(7, 2)
            .into_iter()
            .map(|lower| {
                let mut a = [0.0; 7];
                let mut b = [0.0; 7];
                a[lower[0]] = 1.0;
                b[lower[1]] = 1.0;
                let c = octonion::cross7(&a, &b);
                let outs = sparse(&c);
                Block { lower, outs }
            })
            .collect();
        Self { m: 7, r: 2, kind: VcpKind::G2, blocks, rotation: None }
    }

    /// Triple cross product `½(x(ȳz) − z(ȳx))` on the octonions R^8.
    pub fn spin7() -> Self {
        let blocks = combinations(8, 3)
            .into_iter()
            .map(|lower| {
                let mut e = [[0.0; 8]; 3];
                for (slot, &i) in lower.iter().enumerate() {
                    e[slot][i] = 1.0;
                }
                let c = octonion::triple8(&e[0], &e[1], &e[2]);
                let outs = sparse(&c);
                Block { lower, outs }
            })
            .filter(|b| !b.outs.is_empty())
            .collect();
        Self { m: 8, r: 3, kind: VcpKind::Spin7, blocks, rotation: None }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn fold(&self) -> usize {
        self.r
    }

    pub fn kind(&self) -> VcpKind {
        self.kind
    }

    pub fn is_rotated(&self) -> bool {
        self.rotation.is_some()
    }

    /// The structure conjugated by the orthogonal matrix `q` (row-major),
    /// composed with any conjugation already present.
    pub fn conjugated(&self, q: &[f64]) -> Self {
        let m = self.m;
        assert_eq!(q.len(), m * m);
        let rotation = match &self.rotation {
            None => q.to_vec(),
            Some(p) => {
                let mut qp = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..m {
                        qp[i * m + j] = (0..m).map(|k| q[i * m + k] * p[k * m + j]).sum();
                    }
                }
                qp
            }
        };
        Self { rotation: Some(rotation), ..self.clone() }
    }

    /// Copy with one structure coefficient sign-flipped. The result is no
    /// longer a VCP; used to check that the axiom checker notices.
    pub fn corrupted(&self) -> Self {
        let mut out = self.clone();
        if let Some((_, c)) = out.blocks.first_mut().and_then(|b| b.outs.first_mut()) {
            *c = -*c;
        }
        out
    }

    fn check_args(&self, args: &[&[f64]], expected: usize) -> Result<()> {
        if args.len() != expected {
            return Err(Error::ArityMismatch { expected, found: args.len() });
        }
        for (i, a) in args.iter().enumerate() {
            if a.len() != self.m {
                return Err(Error::DimensionMismatch {
                    name: format!("args[{i}]"),
                    expected: self.m,
                    found: a.len(),
                });
            }
        }
        Ok(())
    }

    /// `χ(v_1, .., v_r)`.
    pub fn evaluate_chi(&self, args: &[&[f64]]) -> Result<Vec<f64>> {
        self.check_args(args, self.r)?;
        let mut out = vec![0.0; self.m];
        self.eval_into(args, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into `out`; `args` must hold `r` vectors of length `m`.
    pub fn eval_into(&self, args: &[&[f64]], out: &mut [f64]) {
        match &self.rotation {
            None => self.eval_plain(args, out),
            Some(q) => {
                let m = self.m;
                let rotated: Vec<Vec<f64>> = args
                    .iter()
                    .map(|a| {
                        let mut v = vec![0.0; m];
                        mat_t_vec(q, a, &mut v);
                        v
                    })
                    .collect();
                let refs: Vec<&[f64]> = rotated.iter().map(Vec::as_slice).collect();
                let mut tmp = vec![0.0; m];
                self.eval_plain(&refs, &mut tmp);
                mat_vec(q, &tmp, out);
            }
        }
    }

    fn eval_plain(&self, args: &[&[f64]], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let r = self.r;
        let mut minor = [0.0; 64];
        for block in &self.blocks {
            for (a, &row) in block.lower.iter().enumerate() {
                for (b, arg) in args.iter().enumerate() {
                    minor[a * r + b] = arg[row];
                }
            }
            let d = det(&minor[..r * r], r);
            if d != 0.0 {
                for &(k, c) in &block.outs {
                    out[k] += c * d;
                }
            }
        }
    }

    /// `φ_χ(v_1, .., v_{r+1}) = ⟨χ(v_1, .., v_r), v_{r+1}⟩`.
    pub fn vcp_form(&self, args: &[&[f64]]) -> Result<f64> {
        self.check_args(args, self.r + 1)?;
        let mut out = vec![0.0; self.m];
        self.eval_into(&args[..self.r], &mut out);
        Ok(dot(&out, args[self.r]))
    }

    /// `χ^output_{lower}` for an arbitrary (not necessarily sorted) index tuple.
    pub fn coefficient(&self, output: usize, lower: &[usize]) -> f64 {
        let basis: Vec<Vec<f64>> = lower
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; self.m];
                e[i] = 1.0;
                e
            })
            .collect();
        let refs: Vec<&[f64]> = basis.iter().map(Vec::as_slice).collect();
        let mut out = vec![0.0; self.m];
        self.eval_into(&refs, &mut out);
        out[output]
    }

    /// Nonzero coefficients on increasing index tuples.
    pub fn entries(&self) -> Vec<TensorEntry> {
        let mut out = Vec::new();
        for lower in combinations(self.m, self.r) {
            for k in 0..self.m {
                let c = self.coefficient(k, &lower);
                if c.abs() > 1e-15 {
                    out.push(TensorEntry { output: k, lower: lower.clone(), coefficient: c });
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.name(),
            "m": self.m,
            "r": self.r,
            "entries": self.entries(),
        })
    }
}

fn sparse(v: &[f64]) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, &c)| (i, c))
        .collect()
}

/// An oriented plane given by an orthonormal frame (possibly empty).
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPlane {
    frame: Vec<Vec<f64>>,
}

impl OrientedPlane {
    /// Accepts `frame` when its Gram matrix is the identity within
    /// [`FRAME_TOLERANCE`].
    pub fn new(frame: Vec<Vec<f64>>) -> Result<Self> {
        let dev = frame_deviation(&frame);
        if dev > FRAME_TOLERANCE {
            return Err(Error::NotOrthonormal { deviation: dev, tolerance: FRAME_TOLERANCE });
        }
        Ok(Self { frame })
    }

    /// Modified Gram-Schmidt, keeping the orientation of `vectors`.
    pub fn orthonormalized(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let mut frame = vectors;
        gram_schmidt(&mut frame)?;
        Ok(Self { frame })
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }
}

fn frame_deviation(frame: &[Vec<f64>]) -> f64 {
    let mut dev = 0.0_f64;
    for i in 0..frame.len() {
        for j in 0..frame.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((dot(&frame[i], &frame[j]) - target).abs());
        }
    }
    dev
}

/// In-place modified Gram-Schmidt. Fails when a vector is (numerically)
/// in the span of its predecessors.
pub fn gram_schmidt(vectors: &mut [Vec<f64>]) -> Result<()> {
    for i in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(i);
        let v = &mut rest[0];
        let scale = norm(v);
        for q in done.iter() {
            let c = dot(q, v);
            for (vk, qk) in v.iter_mut().zip(q) {
                *vk -= c * qk;
            }
        }
        let n = norm(v);
        if !(n > 1e-12 * scale.max(1e-300)) {
            return Err(Error::NotOrthonormal { deviation: 1.0, tolerance: FRAME_TOLERANCE });
        }
        v.iter_mut().for_each(|x| *x /= n);
    }
    Ok(())
}

/// `J(χ, v)ξ = χ(f_1, .., f_{r-1}, ξ)` for `ξ` orthogonal to the oriented
/// plane `v = span(f_1, .., f_{r-1})`. Reversing the orientation of the
/// plane flips the sign of the result.
pub fn induced_complex_structure(
    vcp: &LinearVcp,
    plane: &OrientedPlane,
    xi: &[f64],
) -> Result<Vec<f64>> {
    if plane.rank() + 1 != vcp.fold() {
        return Err(Error::ShapeMismatch(format!(
            "plane of rank {} does not fit a {}-fold VCP",
            plane.rank(),
            vcp.fold()
        )));
    }
    if xi.len() != vcp.dim() {
        return Err(Error::DimensionMismatch { name: "xi".into(), expected: vcp.dim(), found: xi.len() });
    }
    for f in plane.frame() {
        if f.len() != vcp.dim() {
            return Err(Error::DimensionMismatch {
                name: "frame".into(),
                expected: vcp.dim(),
                found: f.len(),
            });
        }
    }
    let dev = frame_deviation(plane.frame());
    if dev > FRAME_TOLERANCE {
        return Err(Error::NotOrthonormal { deviation: dev, tolerance: FRAME_TOLERANCE });
    }
    let scale = norm(xi).max(1.0);
    for f in plane.frame() {
        let c = dot(f, xi).abs();
        if c > FRAME_TOLERANCE * scale {
            return Err(Error::NotNormal { component: c, tolerance: FRAME_TOLERANCE });
        }
    }
    let mut args: Vec<&[f64]> = plane.frame().iter().map(Vec::as_slice).collect();
    args.push(xi);
    vcp.evaluate_chi(&args)
}

/// Worst normalized violations of the VCP axioms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    /// `max |⟨χ(v..), v_i⟩| / (|v_i| Π|v_j|)`
    pub orthogonality: f64,
    /// `max |‖χ(v..)‖² − ‖v_1 ∧ .. ∧ v_r‖²| / Π|v_j|²`
    pub norm: f64,
    pub basis_tuples: usize,
    pub random_tuples: usize,
}

impl AxiomReport {
    pub fn max_violation(&self) -> f64 {
        self.orthogonality.max(self.norm)
    }
}

/// Checks both axioms on every basis tuple (all ordered tuples when there
/// are at most 4096 of them, increasing tuples otherwise) and on `trials`
/// Gaussian tuples drawn from a ChaCha8 stream seeded with `seed`.
pub fn verify_vcp_axioms(vcp: &LinearVcp, trials: usize, seed: u64) -> AxiomReport {
    let m = vcp.dim();
    let r = vcp.fold();
    let mut report = AxiomReport { orthogonality: 0.0, norm: 0.0, basis_tuples: 0, random_tuples: 0 };
    let mut out = vec![0.0; m];

    let mut check = |args: &[Vec<f64>], report: &mut AxiomReport| {
        let refs: Vec<&[f64]> = args.iter().map(Vec::as_slice).collect();
        vcp.eval_into(&refs, &mut out);
        let prod: f64 = refs.iter().map(|v| norm(v)).product();
        if prod == 0.0 {
            return;
        }
        for v in &refs {
            let o = dot(&out, v).abs() / (prod * norm(v));
            report.orthogonality = report.orthogonality.max(o);
        }
        let n = (dot(&out, &out) - gram_det(&refs)).abs() / (prod * prod);
        report.norm = report.norm.max(n);
    };

    let unit = |i: usize| {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        e
    };
    let total = (m as u64).checked_pow(r as u32).unwrap_or(u64::MAX);
    if total <= 4096 {
        for code in 0..total {
            let mut c = code;
            let args: Vec<Vec<f64>> = (0..r)
                .map(|_| {
                    let i = (c % m as u64) as usize;
                    c /= m as u64;
                    unit(i)
                })
                .collect();
            check(&args, &mut report);
            report.basis_tuples += 1;
        }
    } else {
        for lower in combinations(m, r) {
            let args: Vec<Vec<f64>> = lower.iter().map(|&i| unit(i)).collect();
            check(&args, &mut report);
            report.basis_tuples += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let args: Vec<Vec<f64>> = (0..r)
            .map(|_| (0..m).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        check(&args, &mut report);
        report.random_tuples += 1;
    }
    report
}
