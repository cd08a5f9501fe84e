//! Descriptors for base normed spaces and the catalogue of quantizations.
//!
//! A `BaseSpace` is a finite-dimensional normed space with closed-form norm
//! and duality machinery where the kind admits one (l_p, weighted l_1) and
//! interval estimates otherwise (algebraic tensors, duals).  A `PQSpace`
//! pairs a base with a quantization rule describing the norm its
//! amplification carries; norm evaluation of amplified elements lives in
//! `engines`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{lp_norm, lp_norm_c, Exponent, C64};
use crate::svd;

/// Finite atomic measure space: integrals are weighted sums over the atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasureSpace {
    pub atom_weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(atom_weights: Vec<f64>) -> Result<MeasureSpace> {
        let m = MeasureSpace { atom_weights };
        m.validate()?;
        Ok(m)
    }

    pub fn counting(n: usize) -> MeasureSpace {
        MeasureSpace { atom_weights: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.atom_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_weights.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.atom_weights.is_empty() {
            return Err(Error::Descriptor("measure space needs at least one atom".into()));
        }
        if self.atom_weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Descriptor("atom weights must be strictly positive".into()));
        }
        Ok(())
    }
}

/// Descriptor of a finite-dimensional normed space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseSpace {
    /// l_p^n.
    Lp { dim: usize, p: Exponent },
    /// Weighted l_1 over a finite measure: ||x|| = sum_t w_t |x_t|.
    WeightedL1 { weights: Vec<f64> },
    /// Algebraic tensor of two bases with the projective norm.
    Tensor { left: Box<BaseSpace>, right: Box<BaseSpace> },
    /// Dual space with the dual norm.
    Dual { inner: Box<BaseSpace> },
}

/// Sound two-sided estimate of a norm value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn exact(v: f64) -> Interval {
        Interval { lower: v, upper: v }
    }

    pub fn new(lower: f64, upper: f64) -> Interval {
        Interval { lower, upper }
    }

    pub fn scale(self, s: f64) -> Interval {
        Interval { lower: self.lower * s, upper: self.upper * s }
    }

    pub fn is_exact(&self, tol: f64) -> bool {
        self.upper - self.lower <= tol * (1.0 + self.upper.abs())
    }
}

impl BaseSpace {
    pub fn lp(dim: usize, p: Exponent) -> BaseSpace {
        BaseSpace::Lp { dim, p }
    }

    pub fn l1(dim: usize) -> BaseSpace {
        BaseSpace::Lp { dim, p: Exponent::ONE }
    }

    pub fn l2(dim: usize) -> BaseSpace {
        BaseSpace::Lp { dim, p: Exponent::TWO }
    }

    pub fn scalar() -> BaseSpace {
        BaseSpace::Lp { dim: 1, p: Exponent::TWO }
    }

    pub fn weighted_l1(weights: Vec<f64>) -> BaseSpace {
        BaseSpace::WeightedL1 { weights }
    }

    pub fn tensor(left: BaseSpace, right: BaseSpace) -> BaseSpace {
        BaseSpace::Tensor { left: Box::new(left), right: Box::new(right) }
    }

    pub fn dual(inner: BaseSpace) -> BaseSpace {
        BaseSpace::Dual { inner: Box::new(inner) }
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseSpace::Lp { dim, .. } => *dim,
            BaseSpace::WeightedL1 { weights } => weights.len(),
            BaseSpace::Tensor { left, right } => left.dim().saturating_mul(right.dim()),
            BaseSpace::Dual { inner } => inner.dim(),
        }
    }

    /// Dimensions stay at desk scale; descriptors beyond this are rejected.
    pub const DIM_LIMIT: usize = 1 << 20;

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 || self.dim() > BaseSpace::DIM_LIMIT {
            return Err(Error::Descriptor(format!(
                "space dimension {} outside 1..={}",
                self.dim(),
                BaseSpace::DIM_LIMIT
            )));
        }
        match self {
            BaseSpace::Lp { dim, .. } => {
                if *dim == 0 {
                    return Err(Error::Descriptor("lp space of dimension zero".into()));
                }
            }
            BaseSpace::WeightedL1 { weights } => {
                if weights.is_empty() {
                    return Err(Error::Descriptor("weighted_l1 needs at least one atom".into()));
                }
                if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
                    return Err(Error::Descriptor("weighted_l1 weights must be positive".into()));
                }
            }
            BaseSpace::Tensor { left, right } => {
                left.validate()?;
                right.validate()?;
            }
            BaseSpace::Dual { inner } => inner.validate()?,
        }
        Ok(())
    }

    /// Atom weights when this space carries an l_1-type norm (plain l_1,
    /// weighted l_1 or tensor products of those), in lexicographic order.
    pub fn l1_weights(&self) -> Option<Vec<f64>> {
        match self {
            // any one-dimensional l_p space carries the same norm as l_1^1
            BaseSpace::Lp { dim: 1, .. } => Some(vec![1.0]),
            BaseSpace::Lp { dim, p } if p.value() == 1.0 => Some(vec![1.0; *dim]),
            BaseSpace::WeightedL1 { weights } => Some(weights.clone()),
            BaseSpace::Tensor { left, right } => {
                let (lw, rw) = (left.l1_weights()?, right.l1_weights()?);
                let mut out = Vec::with_capacity(lw.len() * rw.len());
                for a in &lw {
                    for b in &rw {
                        out.push(a * b);
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    fn check_dim(&self, x: &[C64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector of length {} in space of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Sound interval around the norm; exact for l_p / weighted l_1 kinds.
    pub fn norm_interval(&self, x: &[C64]) -> Result<Interval> {
        self.check_dim(x)?;
        Ok(match self {
            BaseSpace::Lp { p, .. } => Interval::exact(lp_norm_c(x, *p)),
            BaseSpace::WeightedL1 { weights } => Interval::exact(
                x.iter().zip(weights).map(|(z, w)| z.norm() * w).sum(),
            ),
            BaseSpace::Tensor { left, right } => tensor_norm_interval(left, right, x)?,
            BaseSpace::Dual { inner } => inner.dual_norm_interval(x)?,
        })
    }

    /// Upper endpoint of `norm_interval` (the sound default scalar norm).
    pub fn norm(&self, x: &[C64]) -> Result<f64> {
        Ok(self.norm_interval(x)?.upper)
    }

    /// Sound interval around the dual norm sup{|f(x)| : ||x|| <= 1} with the
    /// algebraic pairing f(x) = sum f_i x_i.
    pub fn dual_norm_interval(&self, f: &[C64]) -> Result<Interval> {
        self.check_dim(f)?;
        Ok(match self {
            BaseSpace::Lp { p, .. } => Interval::exact(lp_norm_c(f, p.conjugate())),
            BaseSpace::WeightedL1 { weights } => Interval::exact(
                f.iter().zip(weights).map(|(z, w)| z.norm() / w).fold(0.0, f64::max),
            ),
            BaseSpace::Tensor { left, right } => {
                // Injective norm: product-vector witnesses from the SVD give
                // the lower end, l_2 covering constants the upper end.
                let (nl, nr) = (left.dim(), right.dim());
                let rect = svd::svd_rect(nl, nr, f);
                let mut best = 0.0_f64;
                for k in 0..rect.s.len().min(3) {
                    if rect.s[k] == 0.0 {
                        continue;
                    }
                    let xl: Vec<C64> = rect.u[k].iter().map(|z| z.conj()).collect();
                    let xr = rect.v[k].clone();
                    let vl = left.norming_direction(&xl)?;
                    let vr = right.norming_direction(&xr)?;
                    let mut pairing = C64::default();
                    for i in 0..nl {
                        for j in 0..nr {
                            pairing += f[i * nr + j] * vl[i] * vr[j];
                        }
                    }
                    best = best.max(pairing.norm());
                }
                let upper = svd_top(&rect.s) * left.l2_cover() * right.l2_cover();
                Interval::new(best, upper.max(best))
            }
            BaseSpace::Dual { inner } => inner.norm_interval(f)?,
        })
    }

    pub fn dual_norm_upper(&self, f: &[C64]) -> Result<f64> {
        Ok(self.dual_norm_interval(f)?.upper)
    }

    /// sup{||x||_2 : ||x|| <= 1}; used for crude but sound dual bounds.
    fn l2_cover(&self) -> f64 {
        match self {
            BaseSpace::Lp { dim, p } => {
                if p.value() <= 2.0 {
                    1.0
                } else if p.is_inf() {
                    (*dim as f64).sqrt()
                } else {
                    (*dim as f64).powf(0.5 - 1.0 / p.value())
                }
            }
            BaseSpace::WeightedL1 { weights } => {
                weights.iter().cloned().fold(f64::INFINITY, f64::min).recip()
            }
            BaseSpace::Tensor { left, right } => left.l2_cover() * right.l2_cover(),
            BaseSpace::Dual { inner } => match &**inner {
                BaseSpace::Lp { dim, p } => {
                    BaseSpace::Lp { dim: *dim, p: p.conjugate() }.l2_cover()
                }
                BaseSpace::WeightedL1 { weights } => {
                    weights.iter().map(|w| w * w).sum::<f64>().sqrt()
                }
                other => other.l2_cover() * (other.dim() as f64),
            },
        }
    }

    /// Functional f with dual norm <= 1; when the kind admits a closed form,
    /// f(x) equals ||x|| exactly.
    pub fn norming_functional(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(x)?;
        Ok(match self {
            BaseSpace::Lp { p, .. } => holder_extremal(x, p.conjugate()),
            BaseSpace::WeightedL1 { weights } => x
                .iter()
                .zip(weights)
                .map(|(z, w)| phase_conj(*z) * w)
                .collect(),
            BaseSpace::Tensor { left, right } => {
                // Product functional from the dominant product component.
                let (nl, nr) = (left.dim(), right.dim());
                let rect = svd::svd_rect(nl, nr, x);
                if rect.s.is_empty() || rect.s[0] == 0.0 {
                    return Ok(vec![C64::default(); x.len()]);
                }
                let xl: Vec<C64> = rect.u[0].clone();
                let xr: Vec<C64> = rect.v[0].iter().map(|z| z.conj()).collect();
                let fl = left.norming_functional(&xl)?;
                let fr = right.norming_functional(&xr)?;
                let mut out = vec![C64::default(); nl * nr];
                for i in 0..nl {
                    for j in 0..nr {
                        out[i * nr + j] = fl[i] * fr[j];
                    }
                }
                out
            }
            BaseSpace::Dual { inner } => inner.norming_direction(x)?,
        })
    }

    /// Vector v with ||v|| <= 1 and f(v) = ||f||_dual for closed-form kinds.
    pub fn norming_direction(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(f)?;
        Ok(match self {
            BaseSpace::Lp { p, .. } => holder_extremal(f, *p),
            BaseSpace::WeightedL1 { weights } => {
                let mut best = 0usize;
                let mut best_val = -1.0;
                for (t, z) in f.iter().enumerate() {
                    let v = z.norm() / weights[t];
                    if v > best_val {
                        best_val = v;
                        best = t;
                    }
                }
                let mut out = vec![C64::default(); f.len()];
                if best_val > 0.0 {
                    out[best] = phase_conj(f[best]) / weights[best];
                }
                out
            }
            BaseSpace::Tensor { left, right } => {
                let (nl, nr) = (left.dim(), right.dim());
                let rect = svd::svd_rect(nl, nr, f);
                if rect.s.is_empty() || rect.s[0] == 0.0 {
                    return Ok(vec![C64::default(); f.len()]);
                }
                let fl: Vec<C64> = rect.u[0].clone();
                let fr: Vec<C64> = rect.v[0].iter().map(|z| z.conj()).collect();
                let vl = left.norming_direction(&fl)?;
                let vr = right.norming_direction(&fr)?;
                let mut out = vec![C64::default(); nl * nr];
                for i in 0..nl {
                    for j in 0..nr {
                        out[i * nr + j] = vl[i] * vr[j];
                    }
                }
                out
            }
            BaseSpace::Dual { inner } => inner.norming_functional(f)?,
        })
    }
}

fn svd_top(s: &[f64]) -> f64 {
    s.first().cloned().unwrap_or(0.0)
}

/// conj(sign(z)), zero for z = 0.
pub fn phase_conj(z: C64) -> C64 {
    let n = z.norm();
    if n == 0.0 {
        C64::default()
    } else {
        (z / n).conj()
    }
}

/// Hölder-extremal partner: v with ||v||_q <= 1 maximizing Re sum f_i v_i;
/// the maximum equals ||f||_{q'}.
pub fn holder_extremal(f: &[C64], q: Exponent) -> Vec<C64> {
    let n = f.len();
    if f.iter().all(|z| z.norm() == 0.0) {
        return vec![C64::default(); n];
    }
    if q.is_inf() {
        return f.iter().map(|z| phase_conj(*z)).collect();
    }
    if q.value() == 1.0 {
        let mut best = 0usize;
        for (i, z) in f.iter().enumerate() {
            if z.norm() > f[best].norm() {
                best = i;
            }
        }
        let mut out = vec![C64::default(); n];
        out[best] = phase_conj(f[best]);
        return out;
    }
    let qp = q.conjugate().value();
    let mags: Vec<f64> = f.iter().map(|z| z.norm().powf(qp - 1.0)).collect();
    let scale = lp_norm(&mags, q);
    f.iter()
        .zip(&mags)
        .map(|(z, m)| phase_conj(*z) * (m / scale))
        .collect()
}

/// Classical projective norm interval on left (x) right.  Exact when either
/// factor is l_1-type; otherwise candidate decompositions above and product
/// functionals below.
fn tensor_norm_interval(left: &BaseSpace, right: &BaseSpace, x: &[C64]) -> Result<Interval> {
    let (nl, nr) = (left.dim(), right.dim());
    if let Some(w) = left.l1_weights() {
        // l_1(E) identity: group by left basis vectors.
        let mut acc = Interval::exact(0.0);
        for s in 0..nl {
            let row = &x[s * nr..(s + 1) * nr];
            let iv = right.norm_interval(row)?;
            acc.lower += w[s] * iv.lower;
            acc.upper += w[s] * iv.upper;
        }
        return Ok(acc);
    }
    if let Some(w) = right.l1_weights() {
        let mut acc = Interval::exact(0.0);
        for t in 0..nr {
            let col: Vec<C64> = (0..nl).map(|s| x[s * nr + t]).collect();
            let iv = left.norm_interval(&col)?;
            acc.lower += w[t] * iv.lower;
            acc.upper += w[t] * iv.upper;
        }
        return Ok(acc);
    }

    // Upper: best of the SVD product decomposition and the two groupings.
    let rect = svd::svd_rect(nl, nr, x);
    let mut svd_cost = 0.0;
    for k in 0..rect.s.len() {
        if rect.s[k] == 0.0 {
            continue;
        }
        let xr: Vec<C64> = rect.v[k].iter().map(|z| z.conj()).collect();
        svd_cost += rect.s[k] * left.norm(&rect.u[k])? * right.norm(&xr)?;
    }
    let mut row_cost = 0.0;
    for s in 0..nl {
        let mut e = vec![C64::default(); nl];
        e[s] = C64::new(1.0, 0.0);
        row_cost += left.norm(&e)? * right.norm(&x[s * nr..(s + 1) * nr])?;
    }
    let mut col_cost = 0.0;
    for t in 0..nr {
        let mut e = vec![C64::default(); nr];
        e[t] = C64::new(1.0, 0.0);
        let col: Vec<C64> = (0..nl).map(|s| x[s * nr + t]).collect();
        col_cost += right.norm(&e)? * left.norm(&col)?;
    }
    let upper = svd_cost.min(row_cost).min(col_cost);

    // Lower: product functionals built from the dominant SVD components.
    let mut lower = 0.0_f64;
    for k in 0..rect.s.len().min(3) {
        if rect.s[k] == 0.0 {
            continue;
        }
        let xr: Vec<C64> = rect.v[k].iter().map(|z| z.conj()).collect();
        let fl = left.norming_functional(&rect.u[k])?;
        let fr = right.norming_functional(&xr)?;
        let mut pairing = C64::default();
        for i in 0..nl {
            for j in 0..nr {
                pairing += x[i * nr + j] * fl[i] * fr[j];
            }
        }
        let fl_ub = left.dual_norm_upper(&fl)?.max(1e-300);
        let fr_ub = right.dual_norm_upper(&fr)?.max(1e-300);
        lower = lower.max(pairing.norm() / (fl_ub * fr_ub));
    }
    Ok(Interval::new(lower.min(upper), upper))
}

/// Quantization rule attached to a base space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantization {
    /// ^(p)E: amplification normed as K_p tensor_pr E.  p = 1 is the maximal
    /// quantization E_max.
    Schatten { p: Exponent },
    /// Minimal quantization: sup over unit functionals of the operator norm
    /// of the scalar amplification.
    Min,
    /// Vector-valued L_p over a finite atomic measure.
    Lp {
        #[serde(rename = "atoms")]
        measure: MeasureSpace,
        p: Exponent,
        inner: Box<PQSpace>,
    },
    /// Classical projective tensor E tensor_pr F with a quantized right factor.
    PrTensor { left: BaseSpace, right: Box<PQSpace> },
    /// Proto-operator-projective tensor product of two quantized factors.
    PopTensor { left: Box<PQSpace>, right: Box<PQSpace> },
    /// CB(E, G) with the evaluation-bioperator quantization.
    CbSpace { domain: Box<PQSpace>, codomain: Box<PQSpace> },
}

/// A base space together with a quantization rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PQSpace {
    pub base: BaseSpace,
    #[serde(rename = "quantization")]
    pub quant: Quantization,
}

impl PQSpace {
    pub fn schatten(p: Exponent, base: BaseSpace) -> PQSpace {
        PQSpace { base, quant: Quantization::Schatten { p } }
    }

    /// Maximal quantization, represented as ^(1)E.
    pub fn max(base: BaseSpace) -> PQSpace {
        PQSpace::schatten(Exponent::ONE, base)
    }

    pub fn min(base: BaseSpace) -> PQSpace {
        PQSpace { base, quant: Quantization::Min }
    }

    /// ^(p)C: the scalar proto-quantization whose amplification is K_p.
    pub fn scalar_schatten(p: Exponent) -> PQSpace {
        PQSpace::schatten(p, BaseSpace::scalar())
    }

    pub fn lp(measure: MeasureSpace, p: Exponent, inner: PQSpace) -> PQSpace {
        let base = lp_base(&measure, p, &inner.base);
        PQSpace {
            base,
            quant: Quantization::Lp { measure, p, inner: Box::new(inner) },
        }
    }

    /// l_1^n as L_1 over n unit atoms with scalar max-quantized fibers.
    pub fn l1_sequence(n: usize) -> PQSpace {
        PQSpace::lp(
            MeasureSpace::counting(n),
            Exponent::ONE,
            PQSpace::scalar_schatten(Exponent::INF),
        )
    }

    pub fn pr_tensor(left: BaseSpace, right: PQSpace) -> PQSpace {
        let base = BaseSpace::tensor(left.clone(), right.base.clone());
        PQSpace { base, quant: Quantization::PrTensor { left, right: Box::new(right) } }
    }

    pub fn pop_tensor(left: PQSpace, right: PQSpace) -> PQSpace {
        let base = BaseSpace::tensor(left.base.clone(), right.base.clone());
        PQSpace {
            base,
            quant: Quantization::PopTensor { left: Box::new(left), right: Box::new(right) },
        }
    }

    pub fn cb_space(domain: PQSpace, codomain: PQSpace) -> PQSpace {
        let base = BaseSpace::tensor(
            BaseSpace::dual(domain.base.clone()),
            codomain.base.clone(),
        );
        PQSpace {
            base,
            quant: Quantization::CbSpace { domain: Box::new(domain), codomain: Box::new(codomain) },
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        match &self.quant {
            Quantization::Schatten { .. } | Quantization::Min => {}
            Quantization::Lp { measure, inner, .. } => {
                measure.validate()?;
                inner.validate()?;
                if measure.len().saturating_mul(inner.dim()) != self.dim() {
                    return Err(Error::Descriptor(format!(
                        "L_p base dimension {} != atoms {} x fiber {}",
                        self.dim(),
                        measure.len(),
                        inner.dim()
                    )));
                }
            }
            Quantization::PrTensor { left, right } => {
                left.validate()?;
                right.validate()?;
                let expect = BaseSpace::tensor(left.clone(), right.base.clone());
                if self.base != expect {
                    return Err(Error::Descriptor(
                        "pr_tensor base must be the tensor of the factor bases".into(),
                    ));
                }
            }
            Quantization::PopTensor { left, right } => {
                left.validate()?;
                right.validate()?;
                let expect = BaseSpace::tensor(left.base.clone(), right.base.clone());
                if self.base != expect {
                    return Err(Error::Descriptor(
                        "pop_tensor base must be the tensor of the factor bases".into(),
                    ));
                }
            }
            Quantization::CbSpace { domain, codomain } => {
                domain.validate()?;
                codomain.validate()?;
                if domain.dim().saturating_mul(codomain.dim()) != self.dim() {
                    return Err(Error::Descriptor(
                        "cb_space base dimension must be dim(domain) * dim(codomain)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Largest p for which this space is certifiably p-convex
    /// (orthogonal-support sums are dominated by the l_p aggregate).
    pub fn convexity_exponent(&self) -> Exponent {
        match &self.quant {
            Quantization::Schatten { p } => {
                if self.base.dim() == 1 {
                    *p
                } else {
                    Exponent::ONE
                }
            }
            Quantization::Min => Exponent::INF,
            Quantization::Lp { p, inner, .. } => {
                if inner.convexity_exponent().value() >= p.value() {
                    *p
                } else {
                    Exponent::ONE
                }
            }
            _ => Exponent::ONE,
        }
    }

    /// The exponent for which the space is a certified L^p space (exact
    /// l_p additivity on orthogonal supports), when known.
    pub fn lp_exact_exponent(&self) -> Option<Exponent> {
        match &self.quant {
            Quantization::Schatten { p } => {
                if self.base.dim() == 1 {
                    Some(*p)
                } else if p.value() == 1.0 {
                    // The maximal quantization of any normed space is L^1.
                    Some(Exponent::ONE)
                } else {
                    None
                }
            }
            Quantization::Min => Some(Exponent::INF),
            Quantization::Lp { p, inner, .. } => {
                let ie = inner.lp_exact_exponent()?;
                (ie == *p).then_some(*p)
            }
            _ => None,
        }
    }
}

/// Base descriptor for L_p(X, F): weighted l_1 when representable, plain l_p
/// over uniform unit atoms, and a tensor placeholder otherwise (the norm is
/// always evaluated through the quantization, never through this
/// descriptor).
fn lp_base(measure: &MeasureSpace, p: Exponent, inner_base: &BaseSpace) -> BaseSpace {
    let n = measure.len();
    if p.value() == 1.0 {
        if let Some(iw) = inner_base.l1_weights() {
            let mut weights = Vec::with_capacity(n * iw.len());
            for w in &measure.atom_weights {
                for v in &iw {
                    weights.push(w * v);
                }
            }
            return BaseSpace::weighted_l1(weights);
        }
    }
    if inner_base.dim() == 1 && measure.atom_weights.iter().all(|&w| w == 1.0) {
        return BaseSpace::lp(n, p);
    }
    BaseSpace::tensor(
        if p.value() == 1.0 {
            BaseSpace::weighted_l1(measure.atom_weights.clone())
        } else {
            BaseSpace::lp(n, p)
        },
        inner_base.clone(),
    )
}
