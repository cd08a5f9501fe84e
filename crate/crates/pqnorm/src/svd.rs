//! One-sided Jacobi singular value decomposition for small dense complex
//! matrices.  Levels stay tiny here, so the scheme favors robustness over
//! speed: cyclic sweeps of exact 2x2 Hermitian eigen-rotations applied to the
//! column Gram matrix until every off-diagonal pairing is negligible.

use num_complex::Complex64 as C64;

use crate::matrix::{inner, vec_norm2, CMatrix};

const SWEEP_LIMIT: usize = 60;
const OFF_TOL: f64 = 1e-15;
const RANK_TOL: f64 = 1e-14;

/// Full decomposition of a square matrix: a = sum_k s_k u_k v_k^*, with the
/// singular values non-increasing and u/v extended to complete orthonormal
/// systems of the level.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Left singular vectors (columns), length = level.
    pub u: Vec<Vec<C64>>,
    /// Non-increasing, nonnegative.
    pub s: Vec<f64>,
    /// Right singular vectors (columns), length = level.
    pub v: Vec<Vec<C64>>,
}

impl Svd {
    pub fn left_unitary(&self) -> CMatrix {
        columns_to_matrix(&self.u)
    }

    /// T with a = S diag(s) T; this is v^*.
    pub fn right_factor(&self) -> CMatrix {
        columns_to_matrix(&self.v).adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let d = self.u.len();
        CMatrix::from_fn(d, |i, j| {
            (0..self.s.len())
                .map(|k| self.s[k] * self.u[k][i] * self.v[k][j].conj())
                .sum()
        })
    }

    pub fn rank(&self, tol: f64) -> usize {
        let smax = self.s.first().cloned().unwrap_or(0.0);
        self.s.iter().filter(|&&s| s > tol * smax.max(1e-300)).count()
    }
}

fn columns_to_matrix(cols: &[Vec<C64>]) -> CMatrix {
    let d = cols.len();
    CMatrix::from_fn(d, |i, j| cols[j][i])
}

/// 2x2 Hermitian eigen-rotation.  Returns the columns (w_plus, w_minus) of the
/// unitary J with J^* G J = diag(l_plus, l_minus) for G = [[alpha, g], [g^*, beta]].
fn hermitian_rotation(alpha: f64, beta: f64, g: C64) -> ((C64, C64), (C64, C64)) {
    let gn = g.norm();
    let half = 0.5 * (beta - alpha);
    let r = half.hypot(gn);
    // l_plus - alpha, computed stably on both branches of half.
    let lpa = if half >= 0.0 { half + r } else { gn * gn / (r - half) };
    let w1 = g;
    let w2 = C64::new(lpa, 0.0);
    let norm = (w1.norm_sqr() + w2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return ((C64::new(1.0, 0.0), C64::new(0.0, 0.0)), (C64::new(0.0, 0.0), C64::new(1.0, 0.0)));
    }
    let (w1, w2) = (w1 / norm, w2 / norm);
    ((w1, w2), (-w2.conj(), w1.conj()))
}

struct JacobiState {
    cols: Vec<Vec<C64>>,
    v: Option<Vec<Vec<C64>>>,
}

impl JacobiState {
    fn new(m: usize, n: usize, data: &[C64], track_v: bool) -> JacobiState {
        let cols: Vec<Vec<C64>> = (0..n).map(|j| (0..m).map(|i| data[i * n + j]).collect()).collect();
        let v = track_v.then(|| {
            (0..n)
                .map(|j| {
                    let mut e = vec![C64::default(); n];
                    e[j] = C64::new(1.0, 0.0);
                    e
                })
                .collect()
        });
        JacobiState { cols, v }
    }

    fn sweep(&mut self) -> f64 {
        let n = self.cols.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = self.cols[i].iter().map(|z| z.norm_sqr()).sum::<f64>();
                let beta = self.cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>();
                if alpha == 0.0 && beta == 0.0 {
                    continue;
                }
                // g = (B^* B)[i, j]
                let g: C64 = self.cols[i].iter().zip(&self.cols[j]).map(|(a, b)| a.conj() * b).sum();
                let scale = (alpha * beta).sqrt();
                if scale == 0.0 {
                    continue;
                }
                let rel = g.norm() / scale;
                worst = worst.max(rel);
                if rel <= OFF_TOL {
                    continue;
                }
                let ((p1, p2), (q1, q2)) = hermitian_rotation(alpha, beta, g);
                rotate_pair(&mut self.cols, i, j, p1, p2, q1, q2);
                if let Some(v) = &mut self.v {
                    rotate_pair(v, i, j, p1, p2, q1, q2);
                }
            }
        }
        worst
    }

    fn run(&mut self) {
        for _ in 0..SWEEP_LIMIT {
            if self.sweep() <= OFF_TOL {
                break;
            }
        }
    }
}

fn rotate_pair(cols: &mut [Vec<C64>], i: usize, j: usize, p1: C64, p2: C64, q1: C64, q2: C64) {
    let m = cols[i].len();
    for r in 0..m {
        let a = cols[i][r];
        let b = cols[j][r];
        cols[i][r] = p1 * a + p2 * b;
        cols[j][r] = q1 * a + q2 * b;
    }
}

/// Singular values (non-increasing) of an m x n matrix given row-major.
pub fn singular_values(m: usize, n: usize, data: &[C64]) -> Vec<f64> {
    assert_eq!(data.len(), m * n);
    if m < n {
        let adj: Vec<C64> = (0..n * m)
            .map(|idx| {
                let (i, j) = (idx / m, idx % m);
                data[j * n + i].conj()
            })
            .collect();
        return singular_values(n, m, &adj);
    }
    let mut st = JacobiState::new(m, n, data, false);
    st.run();
    let mut s: Vec<f64> = st.cols.iter().map(|c| vec_norm2(c)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Economy SVD of an m x n row-major matrix: data = sum_k s_k u_k v_k^*,
/// with k = min(m, n) columns (orthonormal where s_k > 0).
pub struct SvdRect {
    pub u: Vec<Vec<C64>>,
    pub s: Vec<f64>,
    pub v: Vec<Vec<C64>>,
}

pub fn svd_rect(m: usize, n: usize, data: &[C64]) -> SvdRect {
    assert_eq!(data.len(), m * n);
    if m < n {
        let adj: Vec<C64> = (0..n * m)
            .map(|idx| {
                let (i, j) = (idx / m, idx % m);
                data[j * n + i].conj()
            })
            .collect();
        let sw = svd_rect(n, m, &adj);
        return SvdRect { u: sw.v, s: sw.s, v: sw.u };
    }
    let mut st = JacobiState::new(m, n, data, true);
    st.run();
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = st.cols.iter().map(|c| vec_norm2(c)).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let smax = order.first().map(|&k| norms[k]).unwrap_or(0.0);
    let v_cols = st.v.take().unwrap();

    let mut u = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for &k in &order {
        let sk = norms[k];
        s.push(sk);
        if sk > smax * RANK_TOL && sk > 0.0 {
            u.push(st.cols[k].iter().map(|z| z / sk).collect());
        } else {
            u.push(vec![C64::default(); m]);
        }
        v.push(v_cols[k].clone());
    }
    // Orthonormal fill-in for null left columns so that u is a usable frame.
    complete_columns(&mut u, m);
    SvdRect { u, s, v }
}

/// Replace zero columns with deterministic orthonormal completions.
fn complete_columns(cols: &mut [Vec<C64>], m: usize) {
    let mut basis: Vec<Vec<C64>> = cols.iter().filter(|c| vec_norm2(c) > 0.5).cloned().collect();
    for col in cols.iter_mut() {
        if vec_norm2(col) > 0.5 {
            continue;
        }
        let mut filled = false;
        for t in 0..m {
            let mut cand = vec![C64::default(); m];
            cand[t] = C64::new(1.0, 0.0);
            for q in &basis {
                let proj = inner(&cand, q);
                for i in 0..m {
                    cand[i] -= proj * q[i];
                }
            }
            let nn = vec_norm2(&cand);
            if nn > 0.3 {
                for z in &mut cand {
                    *z /= nn;
                }
                *col = cand.clone();
                basis.push(cand);
                filled = true;
                break;
            }
        }
        if !filled {
            // More columns than the dimension can host; leave zero.
        }
    }
}

/// Full SVD of a square matrix with completed unitaries.
pub fn svd_square(a: &CMatrix) -> Svd {
    let d = a.dim();
    let rect = svd_rect(d, d, a.data());
    let mut v = rect.v;
    complete_columns(&mut v, d);
    Svd { u: rect.u, s: rect.s, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, gaussian_vector, random_unitary, CMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn reconstruction_error(a: &CMatrix) -> f64 {
        let svd = svd_square(a);
        svd.reconstruct().sub(a).max_abs()
    }

    #[test]
    fn diagonal_matrix() {
        let a = CMatrix::diag(&[c(3.0, 0.0), c(1.0, 0.0)]);
        let svd = svd_square(&a);
        assert!((svd.s[0] - 3.0).abs() < 1e-14);
        assert!((svd.s[1] - 1.0).abs() < 1e-14);
        assert!(reconstruction_error(&a) < 1e-12);
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 4);
        for s in u.singular_values() {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn random_square_reconstructs() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for d in [1usize, 2, 3, 5, 8] {
            for _ in 0..6 {
                let a = CMatrix::random_gaussian(&mut rng, d);
                let svd = svd_square(&a);
                assert!(svd.reconstruct().sub(&a).max_abs() <= 1e-10, "d={d}");
                assert!(svd.left_unitary().is_unitary(1e-10));
                assert!(svd.right_factor().is_unitary(1e-10));
                for w in svd.s.windows(2) {
                    assert!(w[0] >= w[1] - 1e-14);
                }
                // S diag(s) T = a form
                let s_mat = svd.left_unitary();
                let t_mat = svd.right_factor();
                let diag = CMatrix::diag(&svd.s.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
                assert!(s_mat.mul(&diag).mul(&t_mat).sub(&a).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_matrix_all_zero_values() {
        let a = CMatrix::zeros(3);
        let svd = svd_square(&a);
        assert!(svd.s.iter().all(|&s| s == 0.0));
        assert!(svd.left_unitary().is_unitary(1e-12));
        assert!(svd.right_factor().is_unitary(1e-12));
    }

    #[test]
    fn rank_deficient_reconstructs() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let x = gaussian_vector(&mut rng, 4);
        let y = gaussian_vector(&mut rng, 4);
        let a = CMatrix::rank_one(&x, &y).unwrap();
        let svd = svd_square(&a);
        assert!(svd.reconstruct().sub(&a).max_abs() < 1e-10);
        assert_eq!(svd.rank(1e-10), 1);
        assert!(svd.left_unitary().is_unitary(1e-10));
    }

    #[test]
    fn rectangular_tall_and_wide() {
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let data: Vec<_> = (0..12).map(|_| crate::matrix::gaussian_c64(&mut rng)).collect();
        for (m, n) in [(4usize, 3usize), (3, 4)] {
            let rect = svd_rect(m, n, &data);
            // reconstruct
            let mut max_err: f64 = 0.0;
            for i in 0..m {
                for j in 0..n {
                    let mut z = C64::default();
                    for k in 0..rect.s.len() {
                        z += rect.s[k] * rect.u[k][i] * rect.v[k][j].conj();
                    }
                    max_err = max_err.max((z - data[i * n + j]).norm());
                }
            }
            assert!(max_err < 1e-10, "({m},{n}) err {max_err}");
        }
    }

    #[test]
    fn singular_values_match_square_path() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let a = CMatrix::random_gaussian(&mut rng, 5);
        let s1 = a.singular_values();
        let s2 = svd_square(&a).s;
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
