//! Real symmetric tridiagonal eigensolver: implicit QL for the eigenvalues,
//! inverse iteration for the eigenvectors. Both stages are O(n^2) in total.

const EPS: f64 = f64::EPSILON;

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`), sorted ascending.
pub(crate) fn eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n, "off-diagonal length mismatch");
    if n == 0 {
        return Vec::new();
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let scale = one_norm(diag, off).max(f64::MIN_POSITIVE);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= EPS * dd || e[m].abs() <= 0.5 * EPS * EPS * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 200, "QL iteration failed to converge");

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
    d
}

/// Number of eigenvalues strictly below `x`, by the Sturm sequence of the
/// LDL^T pivots.
pub(crate) fn count_below(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0.. {
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        if i + 1 == diag.len() {
            break;
        }
        q = diag[i + 1] - x - off[i] * off[i] / q;
    }
    count
}

/// Eigenvalues in the half-open interval `[lo, hi)`, ascending, by bisection
/// down to relative width `rel_tol` (machine precision at most).
pub(crate) fn eigenvalues_in(diag: &[f64], off: &[f64], lo: f64, hi: f64, rel_tol: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 0 || hi <= lo {
        return Vec::new();
    }
    let norm = one_norm(diag, off).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE * off.iter().fold(1.0f64, |a, e| a.max(e * e));
    let below_lo = count_below(diag, off, lo, pivmin);
    let below_hi = count_below(diag, off, hi, pivmin);
    (below_lo..below_hi)
        .map(|k| {
            // k-th eigenvalue (0-based) lies in [a, b)
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let width = rel_tol.max(2.0 * EPS) * mid.abs().max(EPS * norm);
                if b - a <= width || mid <= a || mid >= b {
                    break;
                }
                if count_below(diag, off, mid, pivmin) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// `v^T T v` for a unit vector `v`.
pub(crate) fn rayleigh_quotient(diag: &[f64], off: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..diag.len() {
        acc += diag[i] * v[i] * v[i];
        if i + 1 < diag.len() {
            acc += 2.0 * off[i] * v[i] * v[i + 1];
        }
    }
    acc
}

pub(crate) fn one_norm(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { off[i].abs() } else { 0.0 };
            diag[i].abs() + left + right
        })
        .fold(0.0, f64::max)
}

/// LU factorization with partial pivoting of `T - shift I`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for x in d.iter_mut() {
            if *x == 0.0 {
                *x = tiny;
            }
        }
        ShiftedLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

struct XorShift(u64);

impl XorShift {
    fn next_unit(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

/// Unit eigenvectors for the given ascending `eigenvalues`, one `Vec` per
/// eigenvalue. Vectors whose eigenvalues sit closer than `1e-7 ||T||` are
/// re-orthogonalized against each other.
pub(crate) fn eigenvectors(diag: &[f64], off: &[f64], eigenvalues: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let norm = match one_norm(diag, off) {
        x if x > 0.0 => x,
        _ => 1.0,
    };
    let tiny = EPS * norm;
    let cluster_gap = 1e-7 * norm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
    let mut cluster_start = 0;

    for (k, &lambda) in eigenvalues.iter().enumerate() {
        if k > 0 && lambda - eigenvalues[k - 1] > cluster_gap {
            cluster_start = k;
        }
        // separate the shifts of numerically coincident eigenvalues
        let shift = if k > cluster_start {
            lambda + (k - cluster_start) as f64 * 10.0 * EPS * lambda.abs().max(tiny)
        } else {
            lambda
        };
        let lu = ShiftedLu::new(diag, off, shift, tiny);
        let seed = (k as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut rng = XorShift(0x9E37_79B9_7F4A_7C15 ^ seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.next_unit()).collect();
        normalize(&mut v);
        for _ in 0..3 {
            lu.solve_in_place(&mut v);
            for prev in &vectors[cluster_start..k] {
                let dot: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= dot * p);
            }
            normalize(&mut v);
        }
        vectors.push(v);
    }
    vectors
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if j == i + 1 {
                off[i]
            } else if i == j + 1 {
                off[j]
            } else {
                0.0
            }
        })
    }

    fn check(diag: &[f64], off: &[f64]) {
        let lam = eigenvalues(diag, off);
        let mut reference: Vec<f64> = nalgebra::SymmetricEigen::new(dense(diag, off))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = one_norm(diag, off).max(1.0);
        for (a, b) in lam.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12 * scale, "{a} vs {b}");
        }
        let vecs = eigenvectors(diag, off, &lam);
        let t = dense(diag, off);
        for (l, v) in lam.iter().zip(&vecs) {
            let x = nalgebra::DVector::from_column_slice(v);
            let resid = (&t * &x - &x * *l).norm();
            assert!(resid < 1e-11 * scale, "residual {resid}");
        }
        for i in 0..vecs.len() {
            for j in 0..i {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-10, "overlap {dot} between {i} and {j}");
            }
        }
    }

    #[test]
    fn matches_dense_solver_on_zero_diagonal_chain() {
        for n in [1usize, 2, 3, 7, 40] {
            let off: Vec<f64> = (0..n.saturating_sub(1))
                .map(|m| ((m + 1) as f64).sqrt() * (n - m) as f64)
                .collect();
            check(&vec![0.0; n], &off);
        }
    }

    #[test]
    fn matches_dense_solver_on_general_matrix() {
        let diag = [1.0, -2.0, 0.5, 3.0, 0.0, -1.0];
        let off = [0.3, 1.5, -0.7, 2.0, 0.01];
        check(&diag, &off);
    }

    #[test]
    fn bisection_agrees_with_ql() {
        let n = 60;
        let off: Vec<f64> = (0..n - 1).map(|m| (m as f64 + 1.0) * (n - m) as f64).collect();
        let diag = vec![0.0; n];
        let all = eigenvalues(&diag, &off);
        let part = eigenvalues_in(&diag, &off, -100.0, 900.0, 0.0);
        let expected: Vec<f64> = all.iter().copied().filter(|l| *l >= -100.0 && *l < 900.0).collect();
        assert_eq!(part.len(), expected.len());
        for (a, b) in part.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-11 * one_norm(&diag, &off), "{a} vs {b}");
        }
    }

    #[test]
    fn handles_decoupled_and_degenerate_blocks() {
        // two identical blocks: exact degeneracies
        let diag = [1.0, 2.0, 1.0, 2.0];
        let off = [0.5, 0.0, 0.5];
        check(&diag, &off);
    }
}
