//! Octonion multiplication on R^8 with basis `1, e1, ..., e7`.
//!
//! The imaginary units multiply along the seven lines of the Fano plane
//!
//! ```text
//! (1,2,3) (1,4,5) (1,7,6) (2,4,6) (2,5,7) (3,4,7) (3,6,5)
//! ```
//!
//! each read cyclically: for a line `(a,b,c)` we have `ea*eb = ec`,
//! `eb*ec = ea`, `ec*ea = eb`, and the reversed products carry a minus sign.
//! Every `ei*ei = -1`. The G2 cross product on R^7 and the Spin(7) triple
//! product on R^8 are both derived from this table.

pub const FANO_LINES: [[usize; 3]; 7] = [
    [1, 2, 3],
    [1, 4, 5],
    [1, 7, 6],
    [2, 4, 6],
    [2, 5, 7],
    [3, 4, 7],
    [3, 6, 5],
];

/// `(index, sign)` of the product `e_a * e_b`.
pub const fn basis_product(a: usize, b: usize) -> (usize, f64) {
    if a == 0 {
        return (b, 1.0);
    }
    if b == 0 {
        return (a, 1.0);
    }
    if a == b {
        return (0, -1.0);
    }
    let mut l = 0;
    while l < FANO_LINES.len() {
        let [x, y, z] = FANO_LINES[l];
        // Cyclic rotations of the line give +, anything else is reversed.
        if (a == x && b == y) || (a == y && b == z) || (a == z && b == x) {
            let c = if a == x { z } else if a == y { x } else { y };
            return (c, 1.0);
        }
        if (b == x && a == y) || (b == y && a == z) || (b == z && a == x) {
            let c = if b == x { z } else if b == y { x } else { y };
            return (c, -1.0);
        }
        l += 1;
    }
    panic!("basis indices do not share a Fano line");
}

pub type Octonion = [f64; 8];

pub fn mul(x: &Octonion, y: &Octonion) -> Octonion {
    let mut out = [0.0; 8];
    for a in 0..8 {
        if x[a] == 0.0 {
            continue;
        }
        for b in 0..8 {
            if y[b] == 0.0 {
                continue;
            }
            let (c, s) = basis_product(a, b);
            out[c] += s * x[a] * y[b];
        }
    }
    out
}

pub fn conj(x: &Octonion) -> Octonion {
    let mut out = *x;
    for v in out.iter_mut().skip(1) {
        *v = -*v;
    }
    out
}

/// Embeds `v` in R^7 as the imaginary octonion `sum v[i] e_{i+1}`.
pub fn imaginary(v: &[f64]) -> Octonion {
    let mut out = [0.0; 8];
    out[1..].copy_from_slice(&v[..7]);
    out
}

/// G2 cross product `x × y = Im(x y)` on imaginary octonions.
pub fn cross7(x: &[f64], y: &[f64]) -> [f64; 7] {
    let p = mul(&imaginary(x), &imaginary(y));
    let mut out = [0.0; 7];
    out.copy_from_slice(&p[1..]);
    out
}

/// Spin(7) triple product `½(x(ȳz) − z(ȳx))`.
pub fn triple8(x: &Octonion, y: &Octonion, z: &Octonion) -> Octonion {
    let yb = conj(y);
    let a = mul(x, &mul(&yb, z));
    let b = mul(z, &mul(&yb, x));
    let mut out = [0.0; 8];
    for i in 0..8 {
        out[i] = 0.5 * (a[i] - b[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(i: usize) -> Octonion {
        let mut e = [0.0; 8];
        e[i] = 1.0;
        e
    }

    #[test]
    fn table_follows_fano_lines() {
        assert_eq!(basis_product(1, 2), (3, 1.0));
        assert_eq!(basis_product(2, 1), (3, -1.0));
        assert_eq!(basis_product(7, 1), (6, -1.0) );
        assert_eq!(basis_product(1, 7), (6, 1.0));
        assert_eq!(basis_product(6, 5), (3, 1.0));
        assert_eq!(basis_product(4, 4), (0, -1.0));
    }

    #[test]
    fn basis_units_anticommute() {
        for a in 1..8 {
            for b in 1..8 {
                if a != b {
                    let (c1, s1) = basis_product(a, b);
                    let (c2, s2) = basis_product(b, a);
                    assert_eq!(c1, c2);
                    assert_eq!(s1, -s2);
                }
            }
        }
    }

    #[test]
    fn algebra_is_alternative_on_basis() {
        // (xx)y = x(xy) and (yx)x = y(xx) for all pairs of (sums of) units
        // characterise the octonions among the Cayley-Dickson candidates.
        for a in 0..8 {
            for b in 0..8 {
                for c in 0..8 {
                    let x = {
                        let mut v = unit(a);
                        v[b] += 1.0;
                        v
                    };
                    let y = unit(c);
                    let l = mul(&mul(&x, &x), &y);
                    let r = mul(&x, &mul(&x, &y));
                    for i in 0..8 {
                        assert!((l[i] - r[i]).abs() < 1e-12, "left alt fails {a} {b} {c}");
                    }
                    let l = mul(&mul(&y, &x), &x);
                    let r = mul(&y, &mul(&x, &x));
                    for i in 0..8 {
                        assert!((l[i] - r[i]).abs() < 1e-12, "right alt fails {a} {b} {c}");
                    }
                }
            }
        }
    }
}
