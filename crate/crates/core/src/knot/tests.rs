use std::f64::consts::PI;

use super::*;
use crate::ambient::{Topology, VcpField};
use crate::immersion::presets;
use crate::vcp::LinearVcp;
use crate::verification::random_normal_field;

fn r3() -> KnotSpace {
    KnotSpace::new(AmbientSpace::euclidean(LinearVcp::volume_form(3).unwrap()))
}

fn g2() -> KnotSpace {
    KnotSpace::new(AmbientSpace::euclidean(LinearVcp::g2())).with_richardson(true)
}

fn constant_field(p: &Arc<KnotPoint>, v: &[f64]) -> Vec<f64> {
    (0..p.len()).flat_map(|_| v.to_vec()).collect()
}

fn radial(p: &Arc<KnotPoint>) -> Vec<f64> {
    let m = p.dim();
    (0..p.len())
        .flat_map(|i| {
            let th = p.immersion().grid().params(i)[0];
            let mut v = vec![0.0; m];
            v[0] = th.cos();
            v[1] = th.sin();
            v
        })
        .collect()
}

fn circle_point(space: &KnotSpace, r: f64, n: usize) -> Arc<KnotPoint> {
    space.point(presets::circle(space.ambient().dim(), r, n).unwrap()).unwrap()
}

#[test]
fn l2_inner_examples() {
    // The volume density carries the stencil error of |ι'|: about 1e-11 at
    // N = 64 and below 1e-13 at N = 128.
    let s = r3();
    for (n, tol) in [(64, 1e-10), (128, 1e-12)] {
        let p = circle_point(&s, 1.0, n);
        let e3 = KnotTangent::from_normal(&p, constant_field(&p, &[0.0, 0.0, 1.0])).unwrap();
        assert!((s.l2_inner(&e3, &e3).unwrap() - 2.0 * PI).abs() < tol);
        assert_eq!(s.l2_inner(&KnotTangent::zero(&p), &e3).unwrap(), 0.0);
        let p2 = circle_point(&s, 2.0, n);
        let e3 = KnotTangent::from_normal(&p2, constant_field(&p2, &[0.0, 0.0, 1.0])).unwrap();
        assert!((s.l2_inner(&e3, &e3).unwrap() - 4.0 * PI).abs() < 2.0 * tol);
    }
}

#[test]
fn base_mismatch_is_reported() {
    let s = r3();
    let (p, q) = (circle_point(&s, 1.0, 32), circle_point(&s, 2.0, 32));
    let (a, b) = (KnotTangent::zero(&p), KnotTangent::zero(&q));
    assert_eq!(s.l2_inner(&a, &b), Err(Error::BaseMismatch));
    assert_eq!(s.omega2(&a, &b), Err(Error::BaseMismatch));
}

#[test]
fn j_on_the_planar_circle_in_r3() {
    let s = r3();
    let p = circle_point(&s, 1.0, 64);
    let u = KnotTangent::project(&p, &constant_field(&p, &[0.0, 0.0, 1.0])).unwrap();
    let ju = s.apply_j(&u).unwrap();
    // tangent e2 at θ = 0, so χ(e2, e3) = e1
    assert!((ju.sample(0)[0] - 1.0).abs() < 1e-10 && ju.sample(0)[1].abs() < 1e-10);
    // the opposite orientation convention flips the sign
    let flipped = s.clone().with_orientation_sign(-1.0).apply_j(&u).unwrap();
    assert!((flipped.sample(0)[0] + 1.0).abs() < 1e-10);
    // ω²(e3, radial) = ∫ ⟨J e3, radial⟩ = 2π
    let v = KnotTangent::project(&p, &radial(&p)).unwrap();
    let w = s.omega2(&u, &v).unwrap();
    assert!((w - 2.0 * PI).abs() < 1e-9, "{w}");
    assert!((w - s.l2_inner(&ju, &v).unwrap()).abs() < 1e-12);
}

#[test]
fn j_squares_to_minus_one_and_is_orthogonal() {
    for (s, imm) in [
        (r3(), presets::perturbed(&presets::trefoil(3, 64).unwrap(), 2, 0.1, 3).unwrap()),
        (g2(), presets::perturbed(&presets::trefoil(7, 64).unwrap(), 2, 0.1, 3).unwrap()),
    ] {
        let p = s.point(imm).unwrap();
        let u = random_normal_field(&s, &p, 4, 4).unwrap();
        let ju = s.apply_j(&u).unwrap();
        let jju = s.apply_j(&ju).unwrap();
        assert!(jju.combine(1.0, &u, 1.0).unwrap().max_abs() <= 1e-10);
        for g in ju.pointwise_inner(&u).unwrap() {
            assert!(g.abs() < 1e-12);
        }
        assert!(s.omega2(&u, &u).unwrap().abs() < 1e-14);
        assert!(p.frame().tangential_residual(ju.values()) < 1e-12);
    }
}

#[test]
fn apply_j_rejects_tangential_input() {
    let s = r3();
    let p = circle_point(&s, 1.0, 32);
    let tangent: Vec<f64> = (0..p.len()).flat_map(|i| p.frame().vector(i, 0).to_vec()).collect();
    assert!(matches!(KnotTangent::from_normal(&p, tangent.clone()), Err(Error::NotNormal { .. })));
    assert!(matches!(s.apply_j(&KnotTangent::raw(&p, tangent)), Err(Error::NotNormal { .. })));
}

#[test]
fn flow_moves_circles_radially() {
    let s = r3();
    let p = circle_point(&s, 1.0, 64);
    let u = KnotTangent::project(&p, &radial(&p)).unwrap();
    assert_eq!(&s.flow(p.immersion(), u.values(), 0.0).unwrap(), p.immersion());
    let moved = s.flow(p.immersion(), u.values(), 0.5).unwrap();
    let expected = presets::circle(3, 1.5, 64).unwrap();
    let err = moved.points().iter().zip(expected.points()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12);
}

#[test]
fn flows_compose() {
    let s = r3();
    let p = s.point(presets::perturbed(&presets::trefoil(3, 64).unwrap(), 1, 0.1, 3).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 7, 3).unwrap();
    let x = KnotVectorFieldScheme::constant(u.clone());
    let once = s.flow_point(&u, 1e-3).unwrap();
    let u1 = x.value_at(&s, &once).unwrap();
    let twice = s.flow(once.immersion(), u1.values(), 1e-3).unwrap();
    let direct = s.flow(p.immersion(), u.values(), 2e-3).unwrap();
    let err = twice.points().iter().zip(direct.points()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // second-order agreement: the extension turns by O(t) after one step
    assert!(err < 1e-5, "{err}");
}

#[test]
fn field_values_at_base_and_translates() {
    let s = r3();
    let p = s.point(presets::trefoil(3, 32).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 1, 3).unwrap();
    for x in [KnotVectorFieldScheme::constant(u.clone()), KnotVectorFieldScheme::exponential(u.clone())] {
        assert_eq!(x.value_at(&s, &p).unwrap().values(), u.values());
    }
    let shift: Vec<f64> = constant_field(&p, &[0.3, -0.2, 0.1]);
    let moved = s.point(s.flow(p.immersion(), &shift, 1.0).unwrap()).unwrap();
    let c = KnotVectorFieldScheme::constant(u.clone()).value_at(&s, &moved).unwrap();
    // translation leaves the frames unchanged up to rounding
    let diff = c.combine(1.0, &KnotTangent::raw(&moved, u.values().to_vec()), -1.0).unwrap();
    assert!(diff.max_abs() < 1e-12);
    let e = KnotVectorFieldScheme::exponential(u).value_at(&s, &moved).unwrap();
    assert!(e.combine(1.0, &c, -1.0).unwrap().max_abs() < 1e-10);
}

#[test]
fn brackets_of_coordinate_fields_vanish() {
    let s = g2();
    let p = s.point(presets::perturbed(&presets::trefoil(7, 64).unwrap(), 3, 0.1, 3).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 1, 4).unwrap();
    let v = random_normal_field(&s, &p, 2, 4).unwrap();
    let (x, y) = (KnotVectorFieldScheme::exponential(u.clone()), KnotVectorFieldScheme::exponential(v));
    assert!(s.lie_bracket(&x, &y).unwrap().max_abs() < 1e-8);
    assert!(s.lie_bracket(&x, &x).unwrap().max_abs() < 1e-12);
    let (jx, jy) = (x.with_j(), y.with_j());
    let ab = s.lie_bracket(&jx, &y).unwrap();
    let ba = s.lie_bracket(&y, &jx).unwrap();
    assert!(ab.values().iter().zip(ba.values()).all(|(a, b)| *a == -*b));
    assert!(s.lie_bracket(&jx, &jy).unwrap().max_abs() > 1e-3);
}

#[test]
fn point_knot_space_is_the_ambient() {
    let s = KnotSpace::new(AmbientSpace::euclidean(LinearVcp::kaehler(2).unwrap()));
    let p = s.point(presets::point(&[0.1, 0.2, 0.3, 0.4]).unwrap()).unwrap();
    assert_eq!(p.gradient_w().values(), &[0.0; 4]);
    let u = KnotTangent::from_normal(&p, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
    let v = KnotTangent::from_normal(&p, vec![0.0, 1.0, 2.0, -1.0]).unwrap();
    let y = KnotVectorFieldScheme::constant(v.clone());
    let perp = s.covariant_derivative(ConnectionKind::Perp, &u, &y).unwrap();
    let lc = s.covariant_derivative(ConnectionKind::LeviCivita, &u, &y).unwrap();
    assert_eq!(perp.values(), lc.values());
    assert!(perp.max_abs() < 1e-12);
    for kind in [ConnectionKind::Perp, ConnectionKind::LeviCivita] {
        assert!(s.nabla_j_defect(kind, &u, &y).unwrap().max_abs() <= 1e-10);
    }
    assert!(s.nijenhuis(&u, &v).unwrap().max_abs() <= 1e-10);
    let ju = s.apply_j(&u).unwrap();
    assert!((s.omega2(&u, &v).unwrap() - dot(ju.values(), v.values())).abs() < 1e-14);
}

#[test]
fn b_tensor_is_symmetric() {
    let s = g2();
    let p = s.point(presets::perturbed(&presets::trefoil(7, 64).unwrap(), 3, 0.1, 3).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 1, 4).unwrap();
    let v = random_normal_field(&s, &p, 2, 4).unwrap();
    assert_eq!(s.b_tensor(&u, &v).unwrap().values(), s.b_tensor(&v, &u).unwrap().values());
}

#[test]
fn perp_metric_defect_on_the_circle_is_the_volume_variation() {
    // u = b = c = radial on the unit circle: ⟨b, c⟩ = 2π(1 + t) along the
    // flow and W = radial, so both sides equal 2π.
    let s = r3().with_richardson(true);
    let p = circle_point(&s, 1.0, 128);
    let u = KnotTangent::project(&p, &radial(&p)).unwrap();
    let b = KnotVectorFieldScheme::constant(u.clone());
    let defect = s.metric_compatibility_defect(ConnectionKind::Perp, &u, &b, &b).unwrap();
    let oracle = s.volume_variation(&u, &u, &u).unwrap();
    assert!((defect - 2.0 * PI).abs() < 1e-6, "{defect}");
    assert!((defect - oracle).abs() < 1e-6);
    let lc = s.metric_compatibility_defect(ConnectionKind::LeviCivita, &u, &b, &b).unwrap();
    assert!(lc.abs() < 1e-6, "{lc}");
    let zero = KnotTangent::zero(&p);
    assert_eq!(s.metric_compatibility_defect(ConnectionKind::LeviCivita, &zero, &b, &b).unwrap(), 0.0);
}

#[test]
fn structural_zeros() {
    let s = g2();
    let p = s.point(presets::trefoil(7, 32).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 1, 3).unwrap();
    let v = random_normal_field(&s, &p, 2, 3).unwrap();
    let (x, y) = (KnotVectorFieldScheme::constant(u.clone()), KnotVectorFieldScheme::constant(v));
    assert_eq!(s.nijenhuis(&u, &u).unwrap().max_abs(), 0.0);
    assert_eq!(s.torsion(ConnectionKind::Perp, &x, &x).unwrap().max_abs(), 0.0);
    assert_eq!(s.torsion(ConnectionKind::LeviCivita, &x, &x).unwrap().max_abs(), 0.0);
    assert!(s.d_omega2_defect(&x, &y, &x).unwrap().abs() < 1e-10);
}

#[test]
fn normal_lemma_defect_is_second_order_in_h() {
    let s = r3();
    let p = s.point(presets::perturbed(&presets::trefoil(3, 64).unwrap(), 3, 0.1, 3).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 1, 3).unwrap();
    let y = KnotVectorFieldScheme::exponential(random_normal_field(&s, &p, 2, 3).unwrap());
    let defect = |h: f64| {
        let s = s.clone().with_step(h).unwrap();
        s.covariant_derivative(ConnectionKind::Perp, &u, &y).unwrap().max_abs()
    };
    let (a, b, c) = (defect(0.02), defect(0.01), defect(0.005));
    for ratio in [a / b, b / c] {
        assert!((3.5..=4.5).contains(&ratio), "{a:e} {b:e} {c:e}");
    }
}

/// `N_J(X, Y)` with `X = Π u + (quadratic in the displacement)`: a different
/// extension of the same tangent vector.
struct Bent {
    base: Arc<KnotPoint>,
    seed: KnotTangent,
    j: bool,
}

impl VectorField for Bent {
    fn base(&self) -> &Arc<KnotPoint> {
        &self.base
    }

    fn seed(&self, space: &KnotSpace) -> Result<KnotTangent> {
        self.value_at(space, &self.base)
    }

    fn value_at(&self, space: &KnotSpace, at: &Arc<KnotPoint>) -> Result<KnotTangent> {
        let m = at.dim();
        let mut v = self.seed.values().to_vec();
        for i in 0..at.len() {
            let w = space.ambient().displacement(self.base.immersion().point(i), at.immersion().point(i));
            let q = dot(&w, &w);
            for k in 0..m {
                v[i * m + k] += 3.0 * w[(k + 1) % m] + 5.0 * q;
            }
        }
        let x = KnotTangent::project(at, &v)?;
        if self.j {
            space.apply_j(&x)
        } else {
            Ok(x)
        }
    }
}

#[test]
fn nijenhuis_does_not_depend_on_the_extension() {
    let s = g2();
    let p = s.point(presets::perturbed(&presets::trefoil(7, 128).unwrap(), 3, 0.1, 3).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 1, 4).unwrap();
    let v = random_normal_field(&s, &p, 2, 4).unwrap();
    let reference = s.nijenhuis(&u, &v).unwrap();
    let x = Bent { base: p.clone(), seed: u.clone(), j: false };
    let y = Bent { base: p.clone(), seed: v.clone(), j: false };
    let bent = s.nijenhuis_fields(&x, &y).unwrap();
    assert!(bent.combine(1.0, &reference, -1.0).unwrap().max_abs() < 2e-6);
    let (ex, ey) = (KnotVectorFieldScheme::exponential(u), KnotVectorFieldScheme::exponential(v));
    let exp = s.nijenhuis_fields(&ex, &ey).unwrap();
    assert!(exp.combine(1.0, &reference, -1.0).unwrap().max_abs() < 2e-6);
    // A non-constant extension of a J-composed field is not J of anything
    // simpler, so `Bent { j: true }` is only used to check it runs.
    let jx = Bent { base: p.clone(), seed: random_normal_field(&s, &p, 5, 3).unwrap(), j: true };
    assert!(s.lie_bracket(&jx, &y).is_ok());
}

/// For loops with constant extensions, differentiating the bracket formula
/// by hand gives, with `T` the unit tangent, `P(a, b) = Π χ(a, b)` and
/// `τZ = Π(∂_s Z) / |ι'|`:
///
/// `N_J(u, v) / 2 = P(τJu, v) − P(τJv, u) − J P(τu, v) − J P(u, τv)`.
fn nijenhuis_oracle(space: &KnotSpace, p: &Arc<KnotPoint>, u: &[f64], v: &[f64]) -> Vec<f64> {
    let m = p.dim();
    let grid = p.immersion().grid();
    let chi = |a: &[f64], b: &[f64]| {
        let mut out = vec![0.0; m];
        space.ambient().field().base().eval_into(&[a, b], &mut out);
        out
    };
    let project = |idx: usize, mut w: Vec<f64>| {
        p.frame().project_in_place(idx, &mut w);
        w
    };
    let tau = |z: &[f64]| {
        let dz = grid.derivative(z, m, 0);
        (0..p.len())
            .flat_map(|i| {
                let w = project(i, dz[i * m..(i + 1) * m].to_vec());
                w.into_iter().map(move |x| x / p.volume()[i]).collect::<Vec<_>>()
            })
            .collect::<Vec<f64>>()
    };
    let j = |z: &[f64]| -> Vec<f64> {
        (0..p.len()).flat_map(|i| chi(p.frame().vector(i, 0), &z[i * m..(i + 1) * m])).collect()
    };
    let (ju, jv) = (j(u), j(v));
    let (tu, tv, tju, tjv) = (tau(u), tau(v), tau(&ju), tau(&jv));
    let mut out = vec![0.0; u.len()];
    for i in 0..p.len() {
        let r = i * m..(i + 1) * m;
        let a = project(i, chi(&tju[r.clone()], &v[r.clone()]));
        let b = project(i, chi(&tjv[r.clone()], &u[r.clone()]));
        let c = project(i, chi(&tu[r.clone()], &v[r.clone()]));
        let d = project(i, chi(&u[r.clone()], &tv[r.clone()]));
        let cd: Vec<f64> = c.iter().zip(&d).map(|(x, y)| x + y).collect();
        let jcd = chi(p.frame().vector(i, 0), &cd);
        for k in 0..m {
            out[i * m + k] = 2.0 * (a[k] - b[k] - jcd[k]);
        }
    }
    out
}

#[test]
fn nijenhuis_matches_the_loop_formula() {
    for (s, imm) in [
        (g2(), presets::perturbed(&presets::trefoil(7, 128).unwrap(), 3, 0.1, 3).unwrap()),
        (g2(), presets::circle(7, 1.0, 128).unwrap()),
        (r3().with_richardson(true), presets::perturbed(&presets::trefoil(3, 128).unwrap(), 3, 0.1, 3).unwrap()),
    ] {
        let p = s.point(imm).unwrap();
        let u = random_normal_field(&s, &p, 11, 4).unwrap();
        let v = random_normal_field(&s, &p, 12, 4).unwrap();
        let numeric = s.nijenhuis(&u, &v).unwrap();
        let oracle = nijenhuis_oracle(&s, &p, u.values(), v.values());
        let err = numeric.values().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "max |numeric − oracle| = {err:e}, |N| = {:e}", numeric.max_abs());
    }
}

#[test]
fn twisted_field_changes_j_along_flows() {
    let twisted =
        AmbientSpace::new(Topology::Euclidean, VcpField::NonParallel { base: LinearVcp::g2(), twist_rate: 0.5 }).unwrap();
    let s = KnotSpace::new(twisted).with_richardson(true);
    let p = s.point(presets::circle(7, 1.0, 64).unwrap()).unwrap();
    let u = random_normal_field(&s, &p, 1, 3).unwrap();
    let v = random_normal_field(&s, &p, 2, 3).unwrap();
    let w = random_normal_field(&s, &p, 3, 3).unwrap();
    let c = |t: &KnotTangent| KnotVectorFieldScheme::constant(t.clone());
    assert!(s.d_omega2_defect(&c(&u), &c(&v), &c(&w)).unwrap().abs() > 1e-4);
}
