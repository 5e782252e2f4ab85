//! Dense helpers for short vectors (m <= 8) stored as slices.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Sum that does not depend on the order of `values`: sort, then
/// Neumaier-compensated accumulation.
pub fn permutation_invariant_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values.iter() {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Determinant of a row-major `n x n` matrix. Closed forms up to 3x3,
/// partial-pivot elimination above.
pub fn det(a: &[f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {
            let mut m = a.to_vec();
            let mut d = 1.0;
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
                    .unwrap();
                if m[pivot * n + col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    for k in 0..n {
                        m.swap(pivot * n + k, col * n + k);
                    }
                    d = -d;
                }
                let p = m[col * n + col];
                d *= p;
                for row in col + 1..n {
                    let f = m[row * n + col] / p;
                    if f != 0.0 {
                        for k in col..n {
                            m[row * n + k] -= f * m[col * n + k];
                        }
                    }
                }
            }
            d
        }
    }
}

/// Gram determinant of the given vectors, i.e. the squared norm of their wedge.
pub fn gram_det(vectors: &[&[f64]]) -> f64 {
    let r = vectors.len();
    let mut g = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            g[i * r + j] = dot(vectors[i], vectors[j]);
        }
    }
    det(&g, r)
}

/// Row-major `m x m` matrix times vector.
pub fn mat_vec(q: &[f64], v: &[f64], out: &mut [f64]) {
    let m = v.len();
    for i in 0..m {
        out[i] = dot(&q[i * m..(i + 1) * m], v);
    }
}

/// Transpose of a row-major `m x m` matrix times vector.
pub fn mat_t_vec(q: &[f64], v: &[f64], out: &mut [f64]) {
    let m = v.len();
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in 0..m {
        let vi = v[i];
        if vi != 0.0 {
            for j in 0..m {
                out[j] += q[i * m + j] * vi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_matches_permutation_expansion() {
        // 4x4 via elimination against a hand-expanded value.
        let a = [
            2.0, 1.0, 0.0, 3.0, //
            1.0, -1.0, 2.0, 0.0, //
            0.0, 4.0, 1.0, 1.0, //
            3.0, 0.0, 1.0, 2.0,
        ];
        let expected = brute_det(&a, 4);
        assert!((det(&a, 4) - expected).abs() < 1e-12);
        let b = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0];
        assert!((det(&b, 3) - brute_det(&b, 3)).abs() < 1e-12);
    }

    fn brute_det(a: &[f64], n: usize) -> f64 {
        if n == 1 {
            return a[0];
        }
        let mut total = 0.0;
        for c in 0..n {
            let mut minor = Vec::with_capacity((n - 1) * (n - 1));
            for r in 1..n {
                for k in 0..n {
                    if k != c {
                        minor.push(a[r * n + k]);
                    }
                }
            }
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * a[c] * brute_det(&minor, n - 1);
        }
        total
    }

    #[test]
    fn invariant_sum_ignores_order() {
        let mut a = vec![1e16, 1.0, -1e16, 3.5, 1e-3, 7.25];
        let mut b = a.clone();
        b.reverse();
        b.rotate_left(2);
        assert_eq!(
            permutation_invariant_sum(&mut a).to_bits(),
            permutation_invariant_sum(&mut b).to_bits()
        );
    }
}
