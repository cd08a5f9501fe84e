//! Elements of amplifications K ⊗ E and the maps acting on them.
//!
//! An `AmpElem` is a finite list of (matrix, base-vector) terms over an
//! ambient `PQSpace`.  Terms are kept unreduced; `compress` merges terms
//! with equal vectors and drops numerically-zero coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{vec_norm2, CMatrix, C64};
use crate::spaces::{PQSpace, Quantization};
use crate::svd;

const ZERO_COEFF_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmpTerm {
    #[serde(rename = "matrix")]
    pub coeff: CMatrix,
    #[serde(rename = "vector", with = "crate::io::c64_vec")]
    pub vec: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmpElem {
    pub space: PQSpace,
    pub terms: Vec<AmpTerm>,
}

impl AmpElem {
    pub fn new(space: PQSpace, terms: Vec<(CMatrix, Vec<C64>)>) -> Result<AmpElem> {
        let dim = space.dim();
        for (_, v) in &terms {
            if v.len() != dim {
                return Err(Error::Dimension(format!(
                    "term vector of length {} in a space of dimension {}",
                    v.len(),
                    dim
                )));
            }
        }
        Ok(AmpElem {
            space,
            terms: terms
                .into_iter()
                .map(|(coeff, vec)| AmpTerm { coeff, vec })
                .collect(),
        })
    }

    pub fn zero(space: PQSpace) -> AmpElem {
        AmpElem { space, terms: Vec::new() }
    }

    /// Elementary tensor a ⊗ x.
    pub fn elementary(space: PQSpace, coeff: CMatrix, vec: Vec<C64>) -> Result<AmpElem> {
        AmpElem::new(space, vec![(coeff, vec)])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| {
            t.coeff.is_zero(ZERO_COEFF_TOL) || t.vec.iter().all(|z| z.norm() <= ZERO_COEFF_TOL)
        })
    }

    /// Common level of the coefficients (1 for the zero element).
    pub fn level(&self) -> usize {
        self.terms.iter().map(|t| t.coeff.dim()).max().unwrap_or(1)
    }

    pub fn base_dim(&self) -> usize {
        self.space.dim()
    }

    /// Copy with all coefficients embedded at the given level.
    pub fn at_level(&self, level: usize) -> Result<AmpElem> {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.embed(level)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> AmpElem {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.scale(s);
        }
        out
    }

    pub fn add(&self, other: &AmpElem) -> Result<AmpElem> {
        if self.space != other.space {
            return Err(Error::Dimension("adding elements of different ambients".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(AmpElem { space: self.space.clone(), terms })
    }

    pub fn sub(&self, other: &AmpElem) -> Result<AmpElem> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Merge terms with (numerically) equal vectors, drop zero coefficients.
    pub fn compress(&self) -> AmpElem {
        let level = self.level();
        let mut merged: Vec<AmpTerm> = Vec::new();
        for t in &self.terms {
            let coeff = t.coeff.embed(level).expect("grow");
            let vnorm = vec_norm2(&t.vec);
            if coeff.is_zero(ZERO_COEFF_TOL) || vnorm <= ZERO_COEFF_TOL {
                continue;
            }
            let mut absorbed = false;
            for m in &mut merged {
                let diff: f64 = m
                    .vec
                    .iter()
                    .zip(&t.vec)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if diff <= ZERO_COEFF_TOL * (1.0 + vnorm) {
                    m.coeff = m.coeff.add(&coeff);
                    absorbed = true;
                    break;
                }
            }
            if !absorbed {
                merged.push(AmpTerm { coeff, vec: t.vec.clone() });
            }
        }
        merged.retain(|t| !t.coeff.is_zero(ZERO_COEFF_TOL));
        AmpElem { space: self.space.clone(), terms: merged }
    }

    /// Full coefficient array grouped by base coordinates: for each base
    /// index t, the matrix `sum_k x_k[t] c_k` at the common level.
    pub fn basis_components(&self) -> Vec<CMatrix> {
        let level = self.level();
        let dim = self.base_dim();
        let mut out = vec![CMatrix::zeros(level); dim];
        for t in &self.terms {
            let c = t.coeff.embed(level).expect("grow");
            for (idx, z) in t.vec.iter().enumerate() {
                if z.norm() > 0.0 {
                    out[idx] = out[idx].add(&c.scale(*z));
                }
            }
        }
        out
    }

    /// Rebuild from basis components (one term per base vector).
    pub fn from_basis_components(space: PQSpace, comps: Vec<CMatrix>) -> Result<AmpElem> {
        let dim = space.dim();
        if comps.len() != dim {
            return Err(Error::Dimension("component count != base dimension".into()));
        }
        let mut terms = Vec::new();
        for (t, c) in comps.into_iter().enumerate() {
            if c.is_zero(ZERO_COEFF_TOL) {
                continue;
            }
            let mut e = vec![C64::default(); dim];
            e[t] = C64::new(1.0, 0.0);
            terms.push((c, e));
        }
        AmpElem::new(space, terms)
    }

    /// Largest entry-wise deviation of the coefficient arrays.
    pub fn max_component_diff(&self, other: &AmpElem) -> f64 {
        let level = self.level().max(other.level());
        let a = self.at_level(level).unwrap().basis_components();
        let b = other.at_level(level).unwrap().basis_components();
        a.iter()
            .zip(&b)
            .map(|(x, y)| x.sub(y).max_abs())
            .fold(0.0, f64::max)
    }

    /// Scale of the coefficient data, for relative comparisons.
    pub fn component_scale(&self) -> f64 {
        self.basis_components()
            .iter()
            .map(|m| m.max_abs())
            .fold(0.0, f64::max)
    }

    /// Detect an elementary tensor: returns (a, x) with the element equal to
    /// a ⊗ x when the stacked coefficient array has numerical rank one.
    pub fn as_elementary(&self) -> Option<(CMatrix, Vec<C64>)> {
        let compressed = self.compress();
        if compressed.terms.is_empty() {
            return None;
        }
        if compressed.terms.len() == 1 {
            let t = &compressed.terms[0];
            return Some((t.coeff.clone(), t.vec.clone()));
        }
        let level = compressed.level();
        let dim = compressed.base_dim();
        let comps = compressed.basis_components();
        // (level^2) x dim matrix of vectorized components.
        let rows = level * level;
        let mut data = vec![C64::default(); rows * dim];
        for (t, m) in comps.iter().enumerate() {
            for r in 0..rows {
                data[r * dim + t] = m.data()[r];
            }
        }
        let rect = svd::svd_rect(rows, dim, &data);
        let smax = rect.s.first().cloned().unwrap_or(0.0);
        if smax == 0.0 {
            return None;
        }
        if rect.s.len() > 1 && rect.s[1] > 1e-12 * smax {
            return None;
        }
        let coeff = CMatrix::from_fn(level, |i, j| rect.u[0][i * level + j] * smax);
        let vec: Vec<C64> = rect.v[0].iter().map(|z| z.conj()).collect();
        Some((coeff, vec))
    }

    /// Minimal orthogonal projection P with P·u·P = u, from the singular
    /// spans of the stacked coefficients and their adjoints.
    pub fn support_projection(&self) -> CMatrix {
        let level = self.level();
        let comps: Vec<CMatrix> = self
            .basis_components()
            .into_iter()
            .filter(|m| !m.is_zero(0.0))
            .collect();
        if comps.is_empty() {
            return CMatrix::zeros(level);
        }
        // Stack columns of every component and of its adjoint: level x (2*k*level).
        let cols = 2 * comps.len() * level;
        let mut data = vec![C64::default(); level * cols];
        for (k, m) in comps.iter().enumerate() {
            let adj = m.adjoint();
            for j in 0..level {
                for i in 0..level {
                    data[i * cols + (2 * k) * level + j] = m[(i, j)];
                    data[i * cols + (2 * k + 1) * level + j] = adj[(i, j)];
                }
            }
        }
        let rect = svd::svd_rect(level, cols, &data);
        let smax = rect.s.first().cloned().unwrap_or(0.0);
        let mut p = CMatrix::zeros(level);
        for (k, &s) in rect.s.iter().enumerate() {
            if s > 1e-10 * smax.max(1e-300) {
                for i in 0..level {
                    for j in 0..level {
                        p[(i, j)] += rect.u[k][i] * rect.u[k][j].conj();
                    }
                }
            }
        }
        p
    }
}

/// Bimodule action a·u·b: term-wise coefficient multiplication.
pub fn module_action(a: &CMatrix, u: &AmpElem, b: &CMatrix) -> AmpElem {
    let level = u.level().max(a.dim()).max(b.dim());
    let a = a.embed(level).expect("grow");
    let b = b.embed(level).expect("grow");
    let terms = u
        .terms
        .iter()
        .map(|t| AmpTerm {
            coeff: a.mul(&t.coeff.embed(level).expect("grow")).mul(&b),
            vec: t.vec.clone(),
        })
        .collect();
    AmpElem { space: u.space.clone(), terms }
}

/// Diamond product of amplified elements into a supplied tensor ambient:
/// (a x) ⋄ (b y) = (a ⋄ b)(x ⊗ y), extended bilinearly.
pub fn amp_diamond(u: &AmpElem, v: &AmpElem, ambient: &PQSpace) -> Result<AmpElem> {
    let (nu, nv) = (u.base_dim(), v.base_dim());
    match &ambient.quant {
        Quantization::PopTensor { left, right } => {
            if left.dim() != nu || right.dim() != nv {
                return Err(Error::Dimension("diamond ambient factor dimensions mismatch".into()));
            }
        }
        Quantization::PrTensor { left, right } => {
            if left.dim() != nu || right.dim() != nv {
                return Err(Error::Dimension("diamond ambient factor dimensions mismatch".into()));
            }
        }
        Quantization::Schatten { .. } if ambient.dim() == nu * nv => {}
        _ => {
            if ambient.dim() != nu * nv {
                return Err(Error::Dimension(
                    "diamond needs a tensor ambient over the factor bases".into(),
                ));
            }
        }
    }
    let mut terms = Vec::with_capacity(u.terms.len() * v.terms.len());
    for tu in &u.terms {
        for tv in &v.terms {
            let coeff = tu.coeff.diamond(&tv.coeff);
            let mut vec = vec![C64::default(); nu * nv];
            for (s, xs) in tu.vec.iter().enumerate() {
                for (t, yt) in tv.vec.iter().enumerate() {
                    vec[s * nv + t] = xs * yt;
                }
            }
            terms.push((coeff, vec));
        }
    }
    AmpElem::new(ambient.clone(), terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// a ⋄ u (left) or u ⋄ a (right): coefficients replaced term-wise,
/// ambient unchanged.
pub fn scalar_diamond(a: &CMatrix, u: &AmpElem, side: Side) -> AmpElem {
    let terms = u
        .terms
        .iter()
        .map(|t| AmpTerm {
            coeff: match side {
                Side::Left => a.diamond(&t.coeff),
                Side::Right => t.coeff.diamond(a),
            },
            vec: t.vec.clone(),
        })
        .collect();
    AmpElem { space: u.space.clone(), terms }
}

/// Action of a linear operator on base vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpAction {
    Identity,
    /// Dense codomain_dim x domain_dim matrix, row-major.
    Matrix {
        #[serde(with = "crate::io::c64_vec")]
        entries: Vec<C64>,
    },
    /// Functional: codomain has dimension one.
    Functional {
        #[serde(with = "crate::io::c64_vec")]
        coeffs: Vec<C64>,
    },
    Scale {
        #[serde(with = "crate::io::c64_scalar")]
        factor: C64,
    },
}

/// A linear operator between proto-quantum spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDesc {
    pub domain: PQSpace,
    pub codomain: PQSpace,
    pub action: OpAction,
}

impl OperatorDesc {
    pub fn identity(space: PQSpace) -> OperatorDesc {
        OperatorDesc { domain: space.clone(), codomain: space, action: OpAction::Identity }
    }

    /// The identity coefficient map viewed between two quantizations of the
    /// same coordinate space.
    pub fn requantize(domain: PQSpace, codomain: PQSpace) -> Result<OperatorDesc> {
        if domain.dim() != codomain.dim() {
            return Err(Error::Dimension("requantize needs equal base dimensions".into()));
        }
        Ok(OperatorDesc { domain, codomain, action: OpAction::Identity })
    }

    pub fn functional(domain: PQSpace, codomain: PQSpace, row: Vec<C64>) -> Result<OperatorDesc> {
        if codomain.dim() != 1 {
            return Err(Error::Dimension("functional codomain must have dimension one".into()));
        }
        if row.len() != domain.dim() {
            return Err(Error::Dimension("functional row length != domain dimension".into()));
        }
        Ok(OperatorDesc { domain, codomain, action: OpAction::Functional { coeffs: row } })
    }

    pub fn matrix(domain: PQSpace, codomain: PQSpace, entries: Vec<C64>) -> Result<OperatorDesc> {
        if entries.len() != domain.dim() * codomain.dim() {
            return Err(Error::Dimension("operator matrix shape mismatch".into()));
        }
        Ok(OperatorDesc { domain, codomain, action: OpAction::Matrix { entries } })
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.codomain.validate()?;
        match &self.action {
            OpAction::Identity | OpAction::Scale { .. } => {
                if self.domain.dim() != self.codomain.dim() {
                    return Err(Error::Descriptor(
                        "identity/scale action needs equal dimensions".into(),
                    ));
                }
            }
            OpAction::Matrix { entries: m } => {
                if m.len() != self.domain.dim() * self.codomain.dim() {
                    return Err(Error::Descriptor("operator matrix shape mismatch".into()));
                }
            }
            OpAction::Functional { coeffs: row } => {
                if self.codomain.dim() != 1 || row.len() != self.domain.dim() {
                    return Err(Error::Descriptor("functional shape mismatch".into()));
                }
            }
        }
        Ok(())
    }

    pub fn apply_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.domain.dim() {
            return Err(Error::Dimension("operator applied to wrong dimension".into()));
        }
        Ok(match &self.action {
            OpAction::Identity => x.to_vec(),
            OpAction::Scale { factor } => x.iter().map(|z| z * factor).collect(),
            OpAction::Matrix { entries: m } => {
                let (ng, ne) = (self.codomain.dim(), self.domain.dim());
                (0..ng)
                    .map(|g| (0..ne).map(|e| m[g * ne + e] * x[e]).sum())
                    .collect()
            }
            OpAction::Functional { coeffs: row } => {
                vec![row.iter().zip(x).map(|(a, b)| a * b).sum()]
            }
        })
    }

    /// Amplification: term-wise (c, x) -> (c, φx).
    pub fn amplify(&self, u: &AmpElem) -> Result<AmpElem> {
        if u.space != self.domain {
            return Err(Error::Dimension("element outside the operator domain".into()));
        }
        let terms = u
            .terms
            .iter()
            .map(|t| Ok((t.coeff.clone(), self.apply_vec(&t.vec)?)))
            .collect::<Result<Vec<_>>>()?;
        AmpElem::new(self.codomain.clone(), terms)
    }

    pub fn is_zero(&self) -> bool {
        match &self.action {
            OpAction::Identity => false,
            OpAction::Scale { factor } => factor.norm() == 0.0,
            OpAction::Matrix { entries } => entries.iter().all(|z| z.norm() == 0.0),
            OpAction::Functional { coeffs } => coeffs.iter().all(|z| z.norm() == 0.0),
        }
    }
}

/// A bilinear operator E x F -> G given by its coefficient tensor
/// (codomain-major: `coeffs[g][e][f]` flattened as `g*nE*nF + e*nF + f`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BioperatorDesc {
    pub left: PQSpace,
    pub right: PQSpace,
    pub codomain: PQSpace,
    #[serde(with = "crate::io::c64_vec")]
    pub coeffs: Vec<C64>,
}

impl BioperatorDesc {
    pub fn new(left: PQSpace, right: PQSpace, codomain: PQSpace, coeffs: Vec<C64>) -> Result<BioperatorDesc> {
        if coeffs.len() != left.dim() * right.dim() * codomain.dim() {
            return Err(Error::Dimension("bioperator tensor shape mismatch".into()));
        }
        Ok(BioperatorDesc { left, right, codomain, coeffs })
    }

    /// (x, y) -> f(x) g(y) into a one-dimensional codomain.
    pub fn product_functional(
        left: PQSpace,
        right: PQSpace,
        codomain: PQSpace,
        f: Vec<C64>,
        g: Vec<C64>,
    ) -> Result<BioperatorDesc> {
        if codomain.dim() != 1 || f.len() != left.dim() || g.len() != right.dim() {
            return Err(Error::Dimension("product functional shape mismatch".into()));
        }
        let (ne, nf) = (left.dim(), right.dim());
        let mut coeffs = vec![C64::default(); ne * nf];
        for e in 0..ne {
            for t in 0..nf {
                coeffs[e * nf + t] = f[e] * g[t];
            }
        }
        BioperatorDesc::new(left, right, codomain, coeffs)
    }

    /// The canonical bioperator (x, y) -> x ⊗ y into a tensor ambient.
    pub fn canonical(left: PQSpace, right: PQSpace, codomain: PQSpace) -> Result<BioperatorDesc> {
        let (ne, nf) = (left.dim(), right.dim());
        if codomain.dim() != ne * nf {
            return Err(Error::Dimension("canonical bioperator needs a tensor codomain".into()));
        }
        let mut coeffs = vec![C64::default(); ne * nf * ne * nf];
        for e in 0..ne {
            for f in 0..nf {
                let g = e * nf + f;
                coeffs[g * ne * nf + e * nf + f] = C64::new(1.0, 0.0);
            }
        }
        BioperatorDesc::new(left, right, codomain, coeffs)
    }

    pub fn apply(&self, x: &[C64], y: &[C64]) -> Result<Vec<C64>> {
        let (ne, nf, ng) = (self.left.dim(), self.right.dim(), self.codomain.dim());
        if x.len() != ne || y.len() != nf {
            return Err(Error::Dimension("bioperator applied to wrong dimensions".into()));
        }
        Ok((0..ng)
            .map(|g| {
                let mut acc = C64::default();
                for e in 0..ne {
                    if x[e].norm() == 0.0 {
                        continue;
                    }
                    for f in 0..nf {
                        acc += self.coeffs[g * ne * nf + e * nf + f] * x[e] * y[f];
                    }
                }
                acc
            })
            .collect())
    }

    /// Amplification: (a x, b y) -> (a ⋄ b) ρ(x, y), extended bilinearly.
    pub fn amplify(&self, u: &AmpElem, v: &AmpElem) -> Result<AmpElem> {
        if u.space != self.left || v.space != self.right {
            return Err(Error::Dimension("elements outside the bioperator domains".into()));
        }
        let mut terms = Vec::with_capacity(u.terms.len() * v.terms.len());
        for tu in &u.terms {
            for tv in &v.terms {
                terms.push((tu.coeff.diamond(&tv.coeff), self.apply(&tu.vec, &tv.vec)?));
            }
        }
        AmpElem::new(self.codomain.clone(), terms)
    }

    /// Linearization R: E ⊗ F -> G with R(x ⊗ y) = ρ(x, y).
    pub fn linearize(&self, domain: PQSpace) -> Result<OperatorDesc> {
        let (ne, nf, ng) = (self.left.dim(), self.right.dim(), self.codomain.dim());
        if domain.dim() != ne * nf {
            return Err(Error::Dimension("linearize needs a tensor domain".into()));
        }
        // Same tensor reshaped: G x (E*F).
        let mut entries = vec![C64::default(); ng * ne * nf];
        for g in 0..ng {
            for e in 0..ne {
                for f in 0..nf {
                    entries[g * ne * nf + e * nf + f] = self.coeffs[g * ne * nf + e * nf + f];
                }
            }
        }
        OperatorDesc::matrix(domain, self.codomain.clone(), entries)
    }

    /// Curry into F -> CB(E, G): y -> ρ(·, y).
    pub fn curry(&self) -> OperatorDesc {
        let (ne, nf, ng) = (self.left.dim(), self.right.dim(), self.codomain.dim());
        let cb = PQSpace::cb_space(self.left.clone(), self.codomain.clone());
        // Entries of the map F -> (E* ⊗ G): row index (e, g), column f.
        let mut entries = vec![C64::default(); ne * ng * nf];
        for e in 0..ne {
            for g in 0..ng {
                for f in 0..nf {
                    entries[(e * ng + g) * nf + f] = self.coeffs[g * ne * nf + e * nf + f];
                }
            }
        }
        OperatorDesc { domain: self.right.clone(), codomain: cb, action: OpAction::Matrix { entries } }
    }
}

/// Inverse of `BioperatorDesc::curry`.
pub fn uncurry(op: &OperatorDesc) -> Result<BioperatorDesc> {
    let (domain, codomain) = match &op.codomain.quant {
        Quantization::CbSpace { domain, codomain } => (domain.clone(), codomain.clone()),
        _ => return Err(Error::Dimension("uncurry needs a CB-space codomain".into())),
    };
    let (ne, nf, ng) = (domain.dim(), op.domain.dim(), codomain.dim());
    let entries = match &op.action {
        OpAction::Matrix { entries } => entries.clone(),
        _ => return Err(Error::Dimension("uncurry needs a dense action".into())),
    };
    let mut coeffs = vec![C64::default(); ng * ne * nf];
    for e in 0..ne {
        for g in 0..ng {
            for f in 0..nf {
                coeffs[g * ne * nf + e * nf + f] = entries[(e * ng + g) * nf + f];
            }
        }
    }
    BioperatorDesc::new(*domain, op.domain.clone(), *codomain, coeffs)
}

/// Interpret an element of K[CB(E, G)] as operator-valued terms: pairs
/// (b_k, φ_k) with φ_k acting E -> G.
pub fn cb_element_operators(phi: &AmpElem) -> Result<Vec<(CMatrix, OperatorDesc)>> {
    let (domain, codomain) = match &phi.space.quant {
        Quantization::CbSpace { domain, codomain } => (domain.clone(), codomain.clone()),
        _ => return Err(Error::Dimension("element is not in a CB space".into())),
    };
    let (ne, ng) = (domain.dim(), codomain.dim());
    phi.terms
        .iter()
        .map(|t| {
            // Base coordinates of CB(E, G) are (e, g) pairs; the operator
            // matrix is the transposed reshape.
            let mut entries = vec![C64::default(); ng * ne];
            for e in 0..ne {
                for g in 0..ng {
                    entries[g * ne + e] = t.vec[e * ng + g];
                }
            }
            Ok((
                t.coeff.clone(),
                OperatorDesc::matrix((*domain).clone(), (*codomain).clone(), entries)?,
            ))
        })
        .collect()
}

/// Encode an operator as a vector in the CB(E, G) coordinate convention.
pub fn operator_as_cb_vector(op: &OperatorDesc) -> Result<Vec<C64>> {
    let (ne, ng) = (op.domain.dim(), op.codomain.dim());
    let mut out = vec![C64::default(); ne * ng];
    for e in 0..ne {
        let mut basis = vec![C64::default(); ne];
        basis[e] = C64::new(1.0, 0.0);
        let img = op.apply_vec(&basis)?;
        for g in 0..ng {
            out[e * ng + g] = img[g];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, gaussian_vector, CMatrix, Exponent};
    use crate::spaces::BaseSpace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn random_elem(r: &mut ChaCha20Rng, space: &PQSpace, terms: usize, level: usize) -> AmpElem {
        let list = (0..terms)
            .map(|_| {
                (
                    CMatrix::random_gaussian(r, level),
                    gaussian_vector(r, space.dim()),
                )
            })
            .collect();
        AmpElem::new(space.clone(), list).unwrap()
    }

    #[test]
    fn module_action_identity_and_single_term() {
        let mut r = rng(1);
        let space = PQSpace::max(BaseSpace::l2(3));
        let u = random_elem(&mut r, &space, 2, 2);
        let id = CMatrix::identity(2);
        assert!(module_action(&id, &u, &id).max_component_diff(&u) < 1e-14);

        let a = CMatrix::random_gaussian(&mut r, 2);
        let b = CMatrix::random_gaussian(&mut r, 2);
        let cmat = CMatrix::random_gaussian(&mut r, 2);
        let x = gaussian_vector(&mut r, 3);
        let single = AmpElem::elementary(space.clone(), cmat.clone(), x.clone()).unwrap();
        let acted = module_action(&a, &single, &b);
        let expect = AmpElem::elementary(space, a.mul(&cmat).mul(&b), x).unwrap();
        assert!(acted.max_component_diff(&expect) < 1e-12);
    }

    #[test]
    fn diamond_definition_and_bimodule_compatibility() {
        let mut r = rng(2);
        let e = PQSpace::scalar_schatten(Exponent::TWO);
        let f = PQSpace::max(BaseSpace::l2(2));
        let ambient = PQSpace::pop_tensor(e.clone(), f.clone());

        let u = random_elem(&mut r, &e, 2, 2);
        let v = random_elem(&mut r, &f, 2, 2);
        let w = amp_diamond(&u, &v, &ambient).unwrap();

        // (a⋄b)·(u⋄v)·(c⋄d) = (a·u·c) ⋄ (b·v·d), coefficientwise.
        let (a, b) = (CMatrix::random_gaussian(&mut r, 2), CMatrix::random_gaussian(&mut r, 2));
        let (cm, d) = (CMatrix::random_gaussian(&mut r, 2), CMatrix::random_gaussian(&mut r, 2));
        let lhs = module_action(&a.diamond(&b), &w, &cm.diamond(&d));
        let rhs = amp_diamond(
            &module_action(&a, &u, &cm),
            &module_action(&b, &v, &d),
            &ambient,
        )
        .unwrap();
        assert!(lhs.max_component_diff(&rhs) < 1e-12 * (1.0 + lhs.component_scale()));
    }

    #[test]
    fn scalar_diamond_shapes() {
        let mut r = rng(3);
        let space = PQSpace::max(BaseSpace::l2(2));
        let u = random_elem(&mut r, &space, 2, 2);
        let a = CMatrix::random_gaussian(&mut r, 2);
        let left = scalar_diamond(&a, &u, Side::Left);
        assert_eq!(left.level(), 4);
        assert_eq!(left.space, u.space);
        let right = scalar_diamond(&a, &u, Side::Right);
        assert_eq!(right.level(), 4);
    }

    #[test]
    fn amplified_operator_is_bimodule_morphism() {
        let mut r = rng(4);
        let dom = PQSpace::max(BaseSpace::l2(3));
        let cod = PQSpace::max(BaseSpace::l2(2));
        let entries = gaussian_vector(&mut r, 6);
        let op = OperatorDesc::matrix(dom.clone(), cod, entries).unwrap();
        let u = random_elem(&mut r, &dom, 2, 2);
        let (a, b) = (CMatrix::random_gaussian(&mut r, 2), CMatrix::random_gaussian(&mut r, 2));
        let lhs = op.amplify(&module_action(&a, &u, &b)).unwrap();
        let rhs = module_action(&a, &op.amplify(&u).unwrap(), &b);
        assert!(lhs.max_component_diff(&rhs) < 1e-12 * (1.0 + lhs.component_scale()));

        let id = OperatorDesc::identity(dom);
        assert!(id.amplify(&u).unwrap().max_component_diff(&u) == 0.0);
    }

    #[test]
    fn functional_amplification_unfolds() {
        let mut r = rng(5);
        let dom = PQSpace::max(BaseSpace::l2(2));
        let cod = PQSpace::scalar_schatten(Exponent::INF);
        let row = gaussian_vector(&mut r, 2);
        let f = OperatorDesc::functional(dom.clone(), cod, row.clone()).unwrap();
        let u = random_elem(&mut r, &dom, 3, 2);
        let img = f.amplify(&u).unwrap();
        // f_inf(sum c_k x_k) = sum f(x_k) c_k as a single matrix.
        let mut expect = CMatrix::zeros(2);
        for t in &u.terms {
            let fx: C64 = row.iter().zip(&t.vec).map(|(a, b)| a * b).sum();
            expect = expect.add(&t.coeff.scale(fx));
        }
        assert!(img.basis_components()[0].sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn bioperator_matches_linearized_diamond() {
        let mut r = rng(6);
        let e = PQSpace::max(BaseSpace::l2(2));
        let f = PQSpace::max(BaseSpace::l2(2));
        let g = PQSpace::max(BaseSpace::l2(3));
        let coeffs = gaussian_vector(&mut r, 2 * 2 * 3);
        let rho = BioperatorDesc::new(e.clone(), f.clone(), g, coeffs).unwrap();

        let u = random_elem(&mut r, &e, 2, 2);
        let v = random_elem(&mut r, &f, 2, 2);

        // R_inf(u ⋄ v) = rho_inf(u, v), expansion oracle.
        let ambient = PQSpace::pop_tensor(e, f);
        let w = amp_diamond(&u, &v, &ambient).unwrap();
        let lin = rho.linearize(ambient).unwrap();
        let lhs = lin.amplify(&w).unwrap();
        let rhs = rho.amplify(&u, &v).unwrap();
        assert!(lhs.max_component_diff(&rhs) < 1e-12 * (1.0 + rhs.component_scale()));
    }

    #[test]
    fn product_functional_amplification_factorizes() {
        let mut r = rng(7);
        let e = PQSpace::max(BaseSpace::l2(2));
        let f = PQSpace::max(BaseSpace::l2(2));
        let cod = PQSpace::scalar_schatten(Exponent::INF);
        let fv = gaussian_vector(&mut r, 2);
        let gv = gaussian_vector(&mut r, 2);
        let rho = BioperatorDesc::product_functional(e.clone(), f.clone(), cod.clone(), fv.clone(), gv.clone())
            .unwrap();
        let u = random_elem(&mut r, &e, 2, 2);
        let v = random_elem(&mut r, &f, 2, 2);
        let img = rho.amplify(&u, &v).unwrap();

        let fop = OperatorDesc::functional(e, cod.clone(), fv).unwrap();
        let gop = OperatorDesc::functional(f, cod.clone(), gv).unwrap();
        let fu = fop.amplify(&u).unwrap().basis_components().remove(0);
        let gv_img = gop.amplify(&v).unwrap().basis_components().remove(0);
        let expect = fu.diamond(&gv_img);
        assert!(img.basis_components()[0].sub(&expect).max_abs() < 1e-11);
    }

    #[test]
    fn curry_uncurry_round_trip() {
        let mut r = rng(8);
        let e = PQSpace::scalar_schatten(Exponent::TWO);
        let f = PQSpace::max(BaseSpace::l2(2));
        let g = PQSpace::scalar_schatten(Exponent::INF);
        let coeffs = gaussian_vector(&mut r, 2);
        let rho = BioperatorDesc::new(e, f, g, coeffs).unwrap();
        let back = uncurry(&rho.curry()).unwrap();
        assert_eq!(rho, back);
    }

    #[test]
    fn support_projection_reconstructs() {
        let mut r = rng(9);
        let space = PQSpace::max(BaseSpace::l2(2));
        let u = random_elem(&mut r, &space, 2, 3);
        let p = u.support_projection();
        assert!(p.mul(&p).sub(&p).max_abs() < 1e-9);
        let pup = module_action(&p, &u, &p);
        assert!(pup.max_component_diff(&u) < 1e-10 * (1.0 + u.component_scale()));
    }

    #[test]
    fn support_projection_detects_orthogonality() {
        let space = PQSpace::max(BaseSpace::l2(2));
        let p1 = CMatrix::unit(2, 0, 0);
        let p2 = CMatrix::unit(2, 1, 1);
        let u = AmpElem::elementary(space.clone(), p1, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let v = AmpElem::elementary(space, p2, vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let (su, sv) = (u.support_projection(), v.support_projection());
        assert!(su.mul(&sv).max_abs() < 1e-12);
        assert!(su.sub(&CMatrix::unit(2, 0, 0)).max_abs() < 1e-10);
    }

    #[test]
    fn elementary_detection() {
        let mut r = rng(10);
        let space = PQSpace::max(BaseSpace::l2(3));
        let a = CMatrix::random_gaussian(&mut r, 2);
        let x = gaussian_vector(&mut r, 3);
        // a ⊗ x written as three spread-out terms.
        let split = AmpElem::new(
            space,
            (0..3)
                .map(|t| {
                    let mut e = vec![C64::default(); 3];
                    e[t] = x[t];
                    (a.clone(), e)
                })
                .collect(),
        )
        .unwrap();
        let (coeff, vec) = split.as_elementary().expect("rank one");
        let expect = AmpElem::elementary(split.space.clone(), a, x).unwrap();
        let got = AmpElem::elementary(split.space.clone(), coeff, vec).unwrap();
        assert!(got.max_component_diff(&expect) < 1e-10);
    }

    #[test]
    fn compress_merges_and_drops() {
        let space = PQSpace::max(BaseSpace::l2(2));
        let x = vec![c(1.0, 0.0), c(2.0, 0.0)];
        let u = AmpElem::new(
            space,
            vec![
                (CMatrix::identity(2), x.clone()),
                (CMatrix::identity(2).scale(c(2.0, 0.0)), x.clone()),
                (CMatrix::zeros(2), vec![c(5.0, 0.0), c(0.0, 0.0)]),
            ],
        )
        .unwrap();
        let cu = u.compress();
        assert_eq!(cu.terms.len(), 1);
        assert!(cu.terms[0].coeff.sub(&CMatrix::identity(2).scale(c(3.0, 0.0))).max_abs() < 1e-14);
    }
}
