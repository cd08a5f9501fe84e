//! Dense complex matrices of a declared level.
//!
//! A `CMatrix` of level `d` models a finite-rank operator supported in the
//! first `d` basis vectors of the ambient separable Hilbert space.  Binary
//! operations on mismatched levels first embed both operands into the larger
//! level, so the algebra behaves like the increasing union of matrix algebras.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svd::{self, Svd};

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Exponent in [1, inf] for Schatten and l_p norms.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INF: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Exponent> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Exponent(p));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }

    /// Hölder conjugate: 1 <-> inf, p <-> p/(p-1).
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INF
        } else if self.is_inf() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_inf() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Exponent, D::Error> {
        struct V;
        impl<'de> de::Visitor<'de> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::new(v).map_err(|_| E::custom(format!("exponent {v} outside [1, inf]")))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                match v {
                    "inf" | "Inf" | "INF" | "infinity" => Ok(Exponent::INF),
                    _ => v
                        .parse::<f64>()
                        .map_err(E::custom)
                        .and_then(|x| self.visit_f64(x)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// l_p norm of a slice of nonnegative values, overflow-safe for large p.
pub fn lp_norm(vals: &[f64], p: Exponent) -> f64 {
    let max = vals.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    if p.is_inf() {
        return max;
    }
    let pv = p.value();
    if pv == 1.0 {
        return vals.iter().sum();
    }
    let sum: f64 = vals.iter().map(|v| (v / max).powf(pv)).sum();
    max * sum.powf(1.0 / pv)
}

/// l_p norm of the moduli of a complex vector.
pub fn lp_norm_c(vals: &[C64], p: Exponent) -> f64 {
    let mods: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
    lp_norm(&mods, p)
}

pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense complex matrix of level `d` (row-major d x d storage).
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(de::Error::custom("matrix entries must form a square array"));
        }
        Ok(CMatrix {
            dim,
            data: rows
                .into_iter()
                .flatten()
                .map(|[re, im]| c(re, im))
                .collect(),
        })
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl CMatrix {
    pub fn zeros(dim: usize) -> CMatrix {
        assert!(dim >= 1, "level must be positive");
        CMatrix {
            dim,
            data: vec![C64::default(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> CMatrix {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<CMatrix> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix entries must be d x d".into()));
        }
        Ok(CMatrix {
            dim,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    pub fn diag(vals: &[C64]) -> CMatrix {
        let mut m = CMatrix::zeros(vals.len().max(1));
        for (i, v) in vals.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Matrix unit E_{ij}.
    pub fn unit(dim: usize, i: usize, j: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim);
        m[(i, j)] = c(1.0, 0.0);
        m
    }

    /// Rank-one operator taking zeta to <zeta, eta> xi.
    pub fn rank_one(xi: &[C64], eta: &[C64]) -> Result<CMatrix> {
        if xi.len() != eta.len() || xi.is_empty() {
            return Err(Error::Dimension(format!(
                "rank_one vectors of lengths {} and {}",
                xi.len(),
                eta.len()
            )));
        }
        Ok(CMatrix::from_fn(xi.len(), |i, j| xi[i] * eta[j].conj()))
    }

    pub fn random_gaussian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
        CMatrix::from_fn(dim, |_, _| gaussian_c64(rng))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.norm() <= tol)
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = align(self, other);
        CMatrix {
            dim: a.dim,
            data: a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = align(self, other);
        CMatrix {
            dim: a.dim,
            data: a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = align(self, other);
        let d = a.dim;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = a[(i, k)];
                if aik == C64::default() {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += aik * b[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "apply: level {} vs vector length {}",
                self.dim,
                x.len()
            )));
        }
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * x[j]).sum())
            .collect())
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Zero-padded copy at a level d' >= d; preserves all Schatten norms.
    pub fn embed(&self, dim: usize) -> Result<CMatrix> {
        if dim < self.dim {
            return Err(Error::Dimension(format!(
                "embed: target level {} below {}",
                dim, self.dim
            )));
        }
        if dim == self.dim {
            return Ok(self.clone());
        }
        let mut out = CMatrix::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(i, j)];
            }
        }
        Ok(out)
    }

    /// Diamond product: Kronecker product under the lexicographic index
    /// pairing (i1, i2) -> i1*d2 + i2.
    pub fn diamond(&self, other: &CMatrix) -> CMatrix {
        let (d1, d2) = (self.dim, other.dim);
        let mut out = CMatrix::zeros(d1 * d2);
        for i1 in 0..d1 {
            for j1 in 0..d1 {
                let a = self[(i1, j1)];
                if a == C64::default() {
                    continue;
                }
                for i2 in 0..d2 {
                    for j2 in 0..d2 {
                        out[(i1 * d2 + i2, j1 * d2 + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    pub fn singular_values(&self) -> Vec<f64> {
        svd::singular_values(self.dim, self.dim, &self.data)
    }

    pub fn svd(&self) -> Svd {
        svd::svd_square(self)
    }

    /// Schatten p-norm: l_p norm of the singular values (max for p = inf).
    pub fn schatten_norm(&self, p: Exponent) -> f64 {
        lp_norm(&self.singular_values(), p)
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        self.schatten_norm(Exponent::INF)
    }

    /// Trace-class norm (sum of singular values).
    pub fn trace_norm(&self) -> f64 {
        self.schatten_norm(Exponent::ONE)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().mul(self).sub(&CMatrix::identity(self.dim)).max_abs() <= tol
    }

    /// Gauss-Jordan inverse with partial pivoting; None when singular.
    pub fn inverse(&self) -> Option<CMatrix> {
        let d = self.dim;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(d);
        for col in 0..d {
            let mut pivot = col;
            for r in col + 1..d {
                if a[(r, col)].norm() > a[(pivot, col)].norm() {
                    pivot = r;
                }
            }
            if a[(pivot, col)].norm() < 1e-12 {
                return None;
            }
            if pivot != col {
                for j in 0..d {
                    let (x, y) = (a[(col, j)], a[(pivot, j)]);
                    a[(col, j)] = y;
                    a[(pivot, j)] = x;
                    let (x, y) = (inv[(col, j)], inv[(pivot, j)]);
                    inv[(col, j)] = y;
                    inv[(pivot, j)] = x;
                }
            }
            let scale = a[(col, col)];
            for j in 0..d {
                a[(col, j)] /= scale;
                inv[(col, j)] /= scale;
            }
            for r in 0..d {
                if r != col {
                    let factor = a[(r, col)];
                    if factor.norm() > 0.0 {
                        for j in 0..d {
                            let acj = a[(col, j)];
                            let icj = inv[(col, j)];
                            a[(r, j)] -= factor * acj;
                            inv[(r, j)] -= factor * icj;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    /// Norming matrix b for the Schatten p pairing: ||b||_{p'} = 1 and
    /// Re tr(b^* a) = ||a||_p.  Returns the zero matrix for a = 0.
    pub fn schatten_norming(&self, p: Exponent) -> CMatrix {
        let svd = self.svd();
        let smax = svd.s.first().cloned().unwrap_or(0.0);
        if smax <= 0.0 {
            return CMatrix::zeros(self.dim);
        }
        let norm_p = lp_norm(&svd.s, p);
        let weights: Vec<f64> = if p.is_inf() {
            let mut w = vec![0.0; svd.s.len()];
            w[0] = 1.0;
            w
        } else if p.value() == 1.0 {
            svd.s.iter().map(|&s| if s > smax * 1e-14 { 1.0 } else { 0.0 }).collect()
        } else {
            svd.s
                .iter()
                .map(|&s| (s / norm_p).powf(p.value() - 1.0))
                .collect()
        };
        // b = sum_k w_k u_k v_k^*
        let d = self.dim;
        let mut b = CMatrix::zeros(d);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    b[(i, j)] += w * svd.u[k][i] * svd.v[k][j].conj();
                }
            }
        }
        b
    }
}

/// Embed both operands into the larger of the two levels.
pub fn align(a: &CMatrix, b: &CMatrix) -> (CMatrix, CMatrix) {
    let d = a.dim.max(b.dim);
    (a.embed(d).expect("grow"), b.embed(d).expect("grow"))
}

pub fn align_many(mats: &[CMatrix]) -> Vec<CMatrix> {
    let d = mats.iter().map(|m| m.dim).max().unwrap_or(1);
    mats.iter().map(|m| m.embed(d).expect("grow")).collect()
}

/// Permutation matrix taking e_{i1*d2+i2} to e_{i2*d1+i1}.  For d1 = d2 it is
/// the self-adjoint involution with flip(a diamond b)flip = b diamond a.
pub fn flip_unitary(d1: usize, d2: usize) -> CMatrix {
    let n = d1 * d2;
    let mut m = CMatrix::zeros(n);
    for i1 in 0..d1 {
        for i2 in 0..d2 {
            m[(i2 * d1 + i1, i1 * d2 + i2)] = c(1.0, 0.0);
        }
    }
    m
}

fn check_projections(projections: &[CMatrix], tol: f64) -> Result<()> {
    for (k, p) in projections.iter().enumerate() {
        if p.mul(p).sub(p).max_abs() > tol || p.adjoint().sub(p).max_abs() > tol {
            return Err(Error::Input(format!("input {k} is not an orthogonal projection")));
        }
        if (p.trace().re - 1.0).abs() > tol {
            return Err(Error::Input(format!("projection {k} is not rank one")));
        }
        for (l, q) in projections.iter().enumerate().skip(k + 1) {
            if p.mul(q).max_abs() > tol {
                return Err(Error::Input(format!("projections {k} and {l} are not orthogonal")));
            }
        }
    }
    Ok(())
}

/// Averaged roots-of-unity pinching (1/n) sum_m W'_m a W_m with
/// W_m = sum_k zeta^{mk} P_k; equals sum_k P_k a P_k.
pub fn pinch_roots_of_unity(a: &CMatrix, projections: &[CMatrix], n: usize) -> Result<CMatrix> {
    if projections.len() != n || n == 0 {
        return Err(Error::Input(format!(
            "need n = {} projections, got {}",
            n,
            projections.len()
        )));
    }
    let mut mats = align_many(projections);
    let dim = mats.iter().map(|m| m.dim()).max().unwrap().max(a.dim());
    mats = mats.into_iter().map(|m| m.embed(dim).unwrap()).collect();
    check_projections(&mats, 1e-8)?;
    let a = a.embed(dim)?;

    let zeta = |k: i64| {
        let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
        c(ang.cos(), ang.sin())
    };
    let mut acc = CMatrix::zeros(dim);
    for m in 1..=n as i64 {
        let mut w = CMatrix::zeros(dim);
        let mut w_prime = CMatrix::zeros(dim);
        for (k, p) in mats.iter().enumerate() {
            let kk = (k + 1) as i64;
            w = w.add(&p.scale(zeta(m * kk)));
            w_prime = w_prime.add(&p.scale(zeta(-m * kk)));
        }
        acc = acc.add(&w_prime.mul(&a).mul(&w));
    }
    Ok(acc.scale(c(1.0 / n as f64, 0.0)))
}

/// Direct pinching sum_k P_k a P_k (oracle counterpart of the averaged form).
pub fn pinch_direct(a: &CMatrix, projections: &[CMatrix]) -> CMatrix {
    let mut mats = align_many(projections);
    let dim = mats.iter().map(|m| m.dim()).max().unwrap_or(1).max(a.dim());
    mats = mats.into_iter().map(|m| m.embed(dim).unwrap()).collect();
    let a = a.embed(dim).unwrap();
    let mut acc = CMatrix::zeros(dim);
    for p in &mats {
        acc = acc.add(&p.mul(&a).mul(p));
    }
    acc
}

pub fn gaussian_c64<R: Rng>(rng: &mut R) -> C64 {
    // Box-Muller; two uniforms per normal pair.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let ang = 2.0 * std::f64::consts::PI * u2;
    c(r * ang.cos() / std::f64::consts::SQRT_2, r * ang.sin() / std::f64::consts::SQRT_2)
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| gaussian_c64(rng)).collect()
}

/// Deterministic family of pairwise orthogonal rank-one projections obtained
/// by rotating the standard basis with a seeded unitary.
pub fn random_orthogonal_projections<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Vec<CMatrix> {
    assert!(count <= dim);
    let u = random_unitary(rng, dim);
    (0..count)
        .map(|k| {
            let col: Vec<C64> = (0..dim).map(|i| u[(i, k)]).collect();
            CMatrix::rank_one(&col, &col).unwrap()
        })
        .collect()
}

/// Haar-ish random unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = gaussian_vector(rng, dim);
        for q in &cols {
            let proj = inner(&v, q);
            for i in 0..dim {
                v[i] -= proj * q[i];
            }
        }
        let n = vec_norm2(&v);
        if n > 1e-8 {
            for z in &mut v {
                *z /= n;
            }
            cols.push(v);
        }
    }
    CMatrix::from_fn(dim, |i, j| cols[j][i])
}
