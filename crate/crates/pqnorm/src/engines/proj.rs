//! Engines for the decomposition-infimum norms of ^(p)E and E ⊗_pr (K F),
//! the sup-type minimal quantization, and weighted L_p aggregation.

use rand::Rng;

use crate::amp::AmpElem;
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Exponent, C64};
use crate::spaces::{BaseSpace, Interval, MeasureSpace, PQSpace};
use crate::svd;

use super::cert::{
    LowerWitness, Method, NormCertificate, PrDecompTerm, UpperWitness, WitnessTerms,
};
use super::search::{ascent_vector, phase_magnitude_grid, stream_rng, Best, Cheapest};
use super::underlying::weighted_lp;
use super::EngineOpts;

// Stream ids keep the ChaCha draws of different searches independent.
const STREAM_PROJ_UPPER: u64 = 0x10;
const STREAM_PROJ_LOWER: u64 = 0x11;
const STREAM_MIN_LOWER: u64 = 0x12;
const STREAM_PR_UPPER: u64 = 0x13;
const STREAM_PR_LOWER: u64 = 0x14;

/// sum_t f_t A_t for the basis components of an element.
pub fn functional_image(comps: &[CMatrix], f: &[C64]) -> CMatrix {
    let level = comps.iter().map(|m| m.dim()).max().unwrap_or(1);
    let mut acc = CMatrix::zeros(level);
    for (t, a) in comps.iter().enumerate() {
        if f[t].norm() > 0.0 {
            acc = acc.add(&a.scale(f[t]));
        }
    }
    acc
}

/// sum_{s,t} f_s g_t A_{st} over the cells of a tensor-base element.
pub fn pair_image(cells: &[CMatrix], nl: usize, nr: usize, f: &[C64], g: &[C64]) -> CMatrix {
    let level = cells.iter().map(|m| m.dim()).max().unwrap_or(1);
    let mut acc = CMatrix::zeros(level);
    for s in 0..nl {
        if f[s].norm() == 0.0 {
            continue;
        }
        for t in 0..nr {
            let w = f[s] * g[t];
            if w.norm() > 0.0 {
                acc = acc.add(&cells[s * nr + t].scale(w));
            }
        }
    }
    acc
}

/// Cost of a decomposition sum a_k ⊗ x_k in K_p ⊗_pr E.
pub fn proj_decomp_cost(terms: &[(CMatrix, Vec<C64>)], p: Exponent, base: &BaseSpace) -> Result<f64> {
    let mut cost = 0.0;
    for (a, x) in terms {
        cost += a.schatten_norm(p) * base.norm(x)?;
    }
    Ok(cost)
}

/// Entry-wise residual between an element and a decomposition term list.
pub fn decomposition_residual(u: &AmpElem, terms: &[(CMatrix, Vec<C64>)]) -> Result<f64> {
    let cand = AmpElem::new(u.space.clone(), terms.to_vec())?;
    Ok(u.max_component_diff(&cand))
}

/// Certificate for the norm of K_p ⊗_pr E (the ^(p)E quantization).
pub fn schatten_certificate(u: &AmpElem, p: Exponent, opts: &EngineOpts) -> Result<NormCertificate> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok(NormCertificate::zero(opts.seed, opts.budget));
    }
    let base = &cu.space.base;
    let comps = cu.basis_components();

    // l_1-type bases: K_p ⊗_pr l_1(w) = l_1(w; K_p), exact.
    if let Some(weights) = base.l1_weights() {
        let value: f64 = comps
            .iter()
            .zip(&weights)
            .map(|(a, w)| w * a.schatten_norm(p))
            .sum();
        return Ok(NormCertificate::exact(value, "schatten_l1_atoms", opts.seed, opts.budget));
    }

    // Elementary tensors: cross-norm, exact up to the base-norm interval.
    if let Some((a, x)) = cu.as_elementary() {
        let ap = a.schatten_norm(p);
        let iv = base.norm_interval(&x)?;
        let method = if iv.is_exact(1e-12) { Method::ClosedForm } else { Method::Search };
        return Ok(NormCertificate {
            lower: ap * iv.lower,
            upper: ap * iv.upper,
            method,
            seed: opts.seed,
            budget: opts.budget,
            upper_witness: UpperWitness::Exact { route: "schatten_elementary".into() },
            lower_witness: LowerWitness::Exact { route: "schatten_elementary".into() },
        });
    }

    let (upper, upper_witness) = proj_upper(&cu, p, opts)?;
    let (lower, lower_witness) = proj_lower(&cu, p, opts)?;
    let lower = lower.min(upper);
    Ok(NormCertificate {
        lower,
        upper,
        method: Method::Search,
        seed: opts.seed,
        budget: opts.budget,
        upper_witness,
        lower_witness,
    })
}

/// Decomposition-search upper bound for the projective norm in K_p ⊗ E.
pub fn proj_upper(u: &AmpElem, p: Exponent, opts: &EngineOpts) -> Result<(f64, UpperWitness)> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok((0.0, UpperWitness::Exact { route: "zero".into() }));
    }
    let base = &cu.space.base;
    let mut best: Cheapest<Vec<(CMatrix, Vec<C64>)>> = Cheapest::new();

    // Seed 1: group by basis vectors.
    let dim = cu.base_dim();
    let comps = cu.basis_components();
    let mut grouped = Vec::new();
    for (t, a) in comps.iter().enumerate() {
        if a.is_zero(0.0) {
            continue;
        }
        let mut e = vec![C64::default(); dim];
        e[t] = C64::new(1.0, 0.0);
        grouped.push((a.clone(), e));
    }
    best.offer(proj_decomp_cost(&grouped, p, base)?, grouped.clone());

    // Seed 2: the input terms as given.
    let input: Vec<(CMatrix, Vec<C64>)> =
        cu.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect();
    best.offer(proj_decomp_cost(&input, p, base)?, input);

    // Seed 3: SVD of the stacked coefficient array.
    let level = cu.level();
    let rows = level * level;
    let mut stacked = vec![C64::default(); rows * dim];
    for (t, m) in comps.iter().enumerate() {
        for r in 0..rows {
            stacked[r * dim + t] = m.data()[r];
        }
    }
    let rect = svd::svd_rect(rows, dim, &stacked);
    let mut svd_terms = Vec::new();
    for k in 0..rect.s.len() {
        if rect.s[k] <= 1e-14 * rect.s[0] {
            continue;
        }
        let mat = CMatrix::from_fn(level, |i, j| rect.u[k][i * level + j] * rect.s[k]);
        let vec: Vec<C64> = rect.v[k].iter().map(|z| z.conj()).collect();
        svd_terms.push((mat, vec));
    }
    if !svd_terms.is_empty() {
        best.offer(proj_decomp_cost(&svd_terms, p, base)?, svd_terms);
    }

    // Local search: random 2x2 gauge mixes between term pairs.
    let mut rng = stream_rng(opts.seed, STREAM_PROJ_UPPER);
    let mut current = best.payload.clone().unwrap();
    let mut current_cost = best.value;
    for _ in 0..opts.budget {
        if current.len() < 2 {
            break;
        }
        let i = rng.gen_range(0..current.len());
        let mut j = rng.gen_range(0..current.len());
        if i == j {
            j = (j + 1) % current.len();
        }
        let g = random_gauge2(&mut rng, 0.6);
        if let Some(cand) = apply_gauge2(&current, i, j, &g) {
            let cost = proj_decomp_cost(&cand, p, base)?;
            if cost < current_cost - 1e-15 {
                current = cand;
                current_cost = cost;
            }
        }
    }
    if decomposition_residual(&cu, &current)? <= 1e-9 * (1.0 + cu.component_scale()) {
        best.offer(current_cost, current);
    }

    let terms = best.payload.unwrap();
    Ok((
        best.value,
        UpperWitness::ProjDecomposition { p, terms: WitnessTerms::from_terms(&terms) },
    ))
}

/// 2x2 complex gauge with determinant bounded away from zero.
fn random_gauge2(rng: &mut rand_chacha::ChaCha20Rng, spread: f64) -> [C64; 4] {
    loop {
        let mut g = [
            C64::new(1.0, 0.0),
            C64::default(),
            C64::default(),
            C64::new(1.0, 0.0),
        ];
        for z in &mut g {
            *z += crate::matrix::gaussian_c64(rng) * spread;
        }
        let det = g[0] * g[3] - g[1] * g[2];
        if det.norm() > 0.15 {
            return g;
        }
    }
}

/// Replace terms i, j by their g-mix, compensating the vectors with the
/// inverse-transpose so the represented element is unchanged.
fn apply_gauge2(
    terms: &[(CMatrix, Vec<C64>)],
    i: usize,
    j: usize,
    g: &[C64; 4],
) -> Option<Vec<(CMatrix, Vec<C64>)>> {
    let det = g[0] * g[3] - g[1] * g[2];
    if det.norm() < 1e-6 {
        return None;
    }
    // inverse: [d, -b; -c, a] / det, and we need its transpose on vectors.
    let inv = [g[3] / det, -g[1] / det, -g[2] / det, g[0] / det];
    let mut out = terms.to_vec();
    let (mi, xi) = terms[i].clone();
    let (mj, xj) = terms[j].clone();
    let (mi, mj2) = crate::matrix::align(&mi, &mj);
    // columns of M transform by g
    out[i].0 = mi.scale(g[0]).add(&mj2.scale(g[2]));
    out[j].0 = mi.scale(g[1]).add(&mj2.scale(g[3]));
    // vectors transform by inv^T
    out[i].1 = xi.iter().zip(&xj).map(|(a, b)| a * inv[0] + b * inv[1]).collect();
    out[j].1 = xi.iter().zip(&xj).map(|(a, b)| a * inv[2] + b * inv[3]).collect();
    Some(out)
}

/// Value of a Schatten-pair functional on an element, normalized to be a
/// sound lower bound.
pub fn schatten_pair_value(
    comps: &[CMatrix],
    b: &CMatrix,
    f: &[C64],
    p: Exponent,
    base: &BaseSpace,
) -> Result<f64> {
    let bq = b.schatten_norm(p.conjugate()).max(1e-300);
    let fq = base.dual_norm_upper(f)?.max(1e-300);
    let level = comps.iter().map(|m| m.dim()).max().unwrap_or(1);
    let b = b.embed(level)?;
    let mut pairing = C64::default();
    for (t, a) in comps.iter().enumerate() {
        if f[t].norm() > 0.0 {
            pairing += b.adjoint().mul(a).trace() * f[t];
        }
    }
    Ok(pairing.norm() / (bq * fq))
}

/// Value of the per-atom Schatten-dual family on an l_1-type base.
pub fn schatten_family_value(
    comps: &[CMatrix],
    mats: &[CMatrix],
    p: Exponent,
    weights: &[f64],
) -> f64 {
    // Enforce the constraint ||b_t||_{p'} <= w_t by rescaling if violated.
    let mut violation: f64 = 1.0;
    for (b, w) in mats.iter().zip(weights) {
        violation = violation.max(b.schatten_norm(p.conjugate()) / w);
    }
    let mut value = 0.0;
    for (t, a) in comps.iter().enumerate() {
        if t < mats.len() {
            let level = a.dim().max(mats[t].dim());
            value += mats[t]
                .embed(level)
                .unwrap()
                .adjoint()
                .mul(&a.embed(level).unwrap())
                .trace()
                .re;
        }
    }
    value / violation
}

/// Functional-search lower bound for the projective norm in K_p ⊗ E.
pub fn proj_lower(u: &AmpElem, p: Exponent, opts: &EngineOpts) -> Result<(f64, LowerWitness)> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok((0.0, LowerWitness::Zero));
    }
    let base = &cu.space.base;
    let comps = cu.basis_components();

    // l_1-type base: per-atom Schatten-dual family attains the norm.
    if let Some(weights) = base.l1_weights() {
        let mats: Vec<CMatrix> = comps
            .iter()
            .zip(&weights)
            .map(|(a, w)| a.schatten_norming(p).scale(C64::new(*w, 0.0)))
            .collect();
        let value = schatten_family_value(&comps, &mats, p, &weights);
        return Ok((value, LowerWitness::SchattenFamily { mats }));
    }

    let mut best: Best<(CMatrix, Vec<C64>)> = Best::new();

    // Structured candidates: norm the terms and the dominant SVD component.
    let mut candidates: Vec<(CMatrix, Vec<C64>)> = Vec::new();
    for t in &cu.terms {
        candidates.push((t.coeff.schatten_norming(p), base.norming_functional(&t.vec)?));
    }
    if let Some((a, x)) = cu.as_elementary() {
        candidates.push((a.schatten_norming(p), base.norming_functional(&x)?));
    }
    for (t, a) in comps.iter().enumerate() {
        let mut e = vec![C64::default(); cu.base_dim()];
        e[t] = C64::new(1.0, 0.0);
        candidates.push((a.schatten_norming(p), base.norming_functional(&e)?));
    }
    for (b, f) in candidates {
        let v = schatten_pair_value(&comps, &b, &f, p, base)?;
        best.offer(v, (b, f));
    }

    // Joint ascent on (b, f).
    let mut rng = stream_rng(opts.seed, STREAM_PROJ_LOWER);
    if let Some((b0, f0)) = best.payload.clone() {
        let level = cu.level();
        let pack = |b: &CMatrix, f: &[C64]| -> Vec<C64> {
            let mut v: Vec<C64> = b.data().to_vec();
            v.extend_from_slice(f);
            v
        };
        let unpack = |v: &[C64]| -> (CMatrix, Vec<C64>) {
            let b = CMatrix::from_fn(level, |i, j| v[i * level + j]);
            (b, v[level * level..].to_vec())
        };
        let start = pack(&b0.embed(level).unwrap(), &f0);
        let comps_ref = &comps;
        let (endv, endval) = ascent_vector(
            start,
            best.value,
            &mut rng,
            opts.budget,
            |v| Some(v),
            |v| {
                let (b, f) = unpack(v);
                schatten_pair_value(comps_ref, &b, &f, p, base).unwrap_or(0.0)
            },
        );
        let (b, f) = unpack(&endv);
        best.offer(endval, (b, f));
    }

    match best.payload {
        Some((b, f)) => Ok((best.value, LowerWitness::SchattenPair { b, f })),
        None => Ok((0.0, LowerWitness::Zero)),
    }
}

/// Sup-search lower bound for the minimal quantization, with its witness.
pub fn min_lower(u: &AmpElem, opts: &EngineOpts) -> Result<(f64, LowerWitness)> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok((0.0, LowerWitness::Zero));
    }
    let base = &cu.space.base;
    let comps = cu.basis_components();
    let n = cu.base_dim();

    let normalize = |g: Vec<C64>| -> Option<Vec<C64>> {
        let d = base.dual_norm_upper(&g).ok()?;
        if d <= 1e-300 {
            return None;
        }
        Some(g.iter().map(|z| z / d).collect())
    };
    let eval = |f: &[C64]| functional_image(&comps, f).op_norm();

    let mut best: Best<Vec<C64>> = Best::new();
    // Structured candidates.
    for t in &cu.terms {
        let f = base.norming_functional(&t.vec)?;
        best.offer(eval(&f), f);
    }
    for t in 0..n {
        let mut e = vec![C64::default(); n];
        e[t] = C64::new(1.0, 0.0);
        if let Some(f) = normalize(e) {
            best.offer(eval(&f), f);
        }
    }
    // Grid oracle at low dimension.
    if n <= 3 {
        for g in phase_magnitude_grid(n) {
            if let Some(f) = normalize(g) {
                best.offer(eval(&f), f);
            }
        }
    }
    // Random multistart + ascent.
    let mut rng = stream_rng(opts.seed, STREAM_MIN_LOWER);
    for _ in 0..(opts.budget / 8).max(4) {
        let g = crate::matrix::gaussian_vector(&mut rng, n);
        if let Some(f) = normalize(g) {
            best.offer(eval(&f), f);
        }
    }
    if let Some(f0) = best.payload.clone() {
        let (f, val) = ascent_vector(f0, best.value, &mut rng, opts.budget, normalize, |f| eval(f));
        best.offer(val, f);
    }

    match best.payload {
        Some(f) => Ok((best.value, LowerWitness::Functional { f })),
        None => Ok((0.0, LowerWitness::Zero)),
    }
}

/// Certificate for the minimal quantization.
pub fn min_certificate(u: &AmpElem, opts: &EngineOpts) -> Result<NormCertificate> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok(NormCertificate::zero(opts.seed, opts.budget));
    }
    let base = &cu.space.base;
    if cu.base_dim() == 1 {
        let value = cu.basis_components()[0].op_norm() * base.norm(&[C64::new(1.0, 0.0)])?;
        return Ok(NormCertificate::exact(value, "min_dim1", opts.seed, opts.budget));
    }
    if let Some((a, x)) = cu.as_elementary() {
        let iv = base.norm_interval(&x)?;
        let ai = a.op_norm();
        return Ok(NormCertificate {
            lower: ai * iv.lower,
            upper: ai * iv.upper,
            method: if iv.is_exact(1e-12) { Method::ClosedForm } else { Method::Search },
            seed: opts.seed,
            budget: opts.budget,
            upper_witness: UpperWitness::Exact { route: "min_elementary".into() },
            lower_witness: LowerWitness::Exact { route: "min_elementary".into() },
        });
    }

    let (lower, lower_witness) = min_lower(&cu, opts)?;
    // Sound upper: the minimal norm is dominated by every quantization of
    // the same base, in particular by the ^(inf) projective norm.
    let (upper, upper_witness) = proj_upper(&cu, Exponent::INF, opts)?;
    let lower = lower.min(upper);
    let method = if upper - lower <= opts.tol * (1.0 + upper) {
        Method::Search
    } else {
        Method::SupSearch
    };
    Ok(NormCertificate {
        lower,
        upper,
        method,
        seed: opts.seed,
        budget: opts.budget,
        upper_witness,
        lower_witness,
    })
}

/// Split an L_p element into its per-atom sub-elements.
pub fn lp_split(u: &AmpElem, measure: &MeasureSpace, inner: &PQSpace) -> Result<Vec<AmpElem>> {
    let nf = inner.dim();
    let mut out = Vec::with_capacity(measure.len());
    for t in 0..measure.len() {
        let terms: Vec<(CMatrix, Vec<C64>)> = u
            .terms
            .iter()
            .map(|term| (term.coeff.clone(), term.vec[t * nf..(t + 1) * nf].to_vec()))
            .collect();
        out.push(AmpElem::new(inner.clone(), terms)?.compress());
    }
    Ok(out)
}

/// Interval aggregation of per-atom certificates for L_p quantization.
pub fn aggregate_lp(parts: &[NormCertificate], measure: &MeasureSpace, p: Exponent) -> (f64, f64) {
    let lows: Vec<f64> = parts.iter().map(|c| c.lower).collect();
    let highs: Vec<f64> = parts.iter().map(|c| c.upper).collect();
    (
        weighted_lp(&lows, &measure.atom_weights, p),
        weighted_lp(&highs, &measure.atom_weights, p),
    )
}

/// Certificate for the L_p(X, F) quantization via the per-atom regrouping.
pub fn lp_certificate(
    u: &AmpElem,
    measure: &MeasureSpace,
    p: Exponent,
    inner: &PQSpace,
    opts: &EngineOpts,
) -> Result<NormCertificate> {
    let cells = lp_split(u, measure, inner)?;
    let parts: Vec<NormCertificate> = cells
        .iter()
        .map(|cell| super::pq_norm(cell, opts))
        .collect::<Result<_>>()?;
    let (lower, upper) = aggregate_lp(&parts, measure, p);
    let all_exact = parts.iter().all(|c| c.gap() <= 1e-12 * (1.0 + c.upper.abs()));
    Ok(NormCertificate {
        lower,
        upper,
        method: if all_exact { Method::ClosedForm } else { Method::Aggregate },
        seed: opts.seed,
        budget: opts.budget,
        upper_witness: UpperWitness::Aggregate { parts: parts.clone() },
        lower_witness: LowerWitness::Aggregate { parts },
    })
}

/// Cells W_s in K F of a pr_tensor element under the flip isomorphism.
pub fn pr_cells(u: &AmpElem, left_dim: usize, right: &PQSpace) -> Result<Vec<AmpElem>> {
    let nr = right.dim();
    let mut out = Vec::with_capacity(left_dim);
    for s in 0..left_dim {
        let terms: Vec<(CMatrix, Vec<C64>)> = u
            .terms
            .iter()
            .map(|term| (term.coeff.clone(), term.vec[s * nr..(s + 1) * nr].to_vec()))
            .collect();
        out.push(AmpElem::new(right.clone(), terms)?.compress());
    }
    Ok(out)
}

pub fn pr_decomp_cost(
    terms: &[(Vec<C64>, AmpElem)],
    left: &BaseSpace,
    opts: &EngineOpts,
) -> Result<f64> {
    let mut cost = 0.0;
    for (x, w) in terms {
        let wn = super::pq_norm(w, opts)?.upper;
        cost += left.norm(x)? * wn;
    }
    Ok(cost)
}

/// Certificate for the E ⊗_pr (quantized F) norm.
pub fn pr_certificate(
    u: &AmpElem,
    left: &BaseSpace,
    right: &PQSpace,
    opts: &EngineOpts,
) -> Result<NormCertificate> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok(NormCertificate::zero(opts.seed, opts.budget));
    }
    let nl = left.dim();
    let cells = pr_cells(&cu, nl, right)?;

    // l_1-type left factor: exact aggregation.
    if let Some(weights) = left.l1_weights() {
        let parts: Vec<NormCertificate> = cells
            .iter()
            .map(|cell| super::pq_norm(cell, opts))
            .collect::<Result<_>>()?;
        let lower: f64 = parts.iter().zip(&weights).map(|(c, w)| w * c.lower).sum();
        let upper: f64 = parts.iter().zip(&weights).map(|(c, w)| w * c.upper).sum();
        let all_exact = parts.iter().all(|c| c.gap() <= 1e-12 * (1.0 + c.upper.abs()));
        return Ok(NormCertificate {
            lower,
            upper,
            method: if all_exact { Method::ClosedForm } else { Method::Aggregate },
            seed: opts.seed,
            budget: opts.budget,
            upper_witness: UpperWitness::Aggregate { parts: parts.clone() },
            lower_witness: LowerWitness::Aggregate { parts },
        })
    }

    // General left factor: decomposition search above, product functionals
    // below.
    let mut best: Cheapest<Vec<(Vec<C64>, AmpElem)>> = Cheapest::new();

    // Seed: per-atom grouping.
    let mut grouped = Vec::new();
    for (s, cell) in cells.iter().enumerate() {
        if cell.is_zero() {
            continue;
        }
        let mut e = vec![C64::default(); nl];
        e[s] = C64::new(1.0, 0.0);
        grouped.push((e, cell.clone()));
    }
    best.offer(pr_decomp_cost(&grouped, left, opts)?, grouped);

    // Seed: SVD across the left index.
    let level = cu.level();
    let nr = right.dim();
    let block = level * level * nr;
    let mut stacked = vec![C64::default(); nl * block];
    for (s, cell) in cells.iter().enumerate() {
        for (t, m) in cell.basis_components().into_iter().enumerate() {
            let m = m.embed(level)?;
            for r in 0..level * level {
                stacked[s * block + t * level * level + r] = m.data()[r];
            }
        }
    }
    let rect = svd::svd_rect(nl, block, &stacked);
    let mut svd_terms: Vec<(Vec<C64>, AmpElem)> = Vec::new();
    for k in 0..rect.s.len() {
        if rect.s[k] <= 1e-14 * rect.s[0] {
            continue;
        }
        let x: Vec<C64> = rect.u[k].clone();
        // W_k has components sigma_k * conj(v_k) reshaped.
        let mut comps = Vec::with_capacity(nr);
        for t in 0..nr {
            comps.push(CMatrix::from_fn(level, |i, j| {
                rect.v[k][t * level * level + i * level + j].conj() * rect.s[k]
            }));
        }
        svd_terms.push((x, AmpElem::from_basis_components(right.clone(), comps)?));
    }
    if !svd_terms.is_empty() {
        best.offer(pr_decomp_cost(&svd_terms, left, opts)?, svd_terms);
    }

    // Light gauge search between pairs of terms.
    let mut rng = stream_rng(opts.seed, STREAM_PR_UPPER);
    let mut current = best.payload.clone().unwrap();
    let mut current_cost = best.value;
    for _ in 0..opts.budget / 4 {
        if current.len() < 2 {
            break;
        }
        let i = rng.gen_range(0..current.len());
        let mut j = rng.gen_range(0..current.len());
        if i == j {
            j = (j + 1) % current.len();
        }
        let g = random_gauge2(&mut rng, 0.5);
        let det = g[0] * g[3] - g[1] * g[2];
        let inv = [g[3] / det, -g[1] / det, -g[2] / det, g[0] / det];
        let mut cand = current.clone();
        let (xi, wi) = current[i].clone();
        let (xj, wj) = current[j].clone();
        cand[i].0 = xi.iter().zip(&xj).map(|(a, b)| a * g[0] + b * g[2]).collect();
        cand[j].0 = xi.iter().zip(&xj).map(|(a, b)| a * g[1] + b * g[3]).collect();
        cand[i].1 = wi.scale(inv[0]).add(&wj.scale(inv[1]))?;
        cand[j].1 = wi.scale(inv[2]).add(&wj.scale(inv[3]))?;
        let cost = pr_decomp_cost(&cand, left, opts)?;
        if cost < current_cost - 1e-15 {
            current = cand;
            current_cost = cost;
        }
    }
    best.offer(current_cost, current);

    let upper = best.value;
    let upper_terms = best.payload.unwrap();

    // Lower: product functionals (f on E) x (g on the underlying F).
    let full_cells = cu.basis_components();
    let mut lower_best: Best<(Vec<C64>, Vec<C64>)> = Best::new();
    let eval_pair = |f: &[C64], g: &[C64]| -> f64 {
        let img = pair_image(&full_cells, nl, nr, f, g);
        let fd = left.dual_norm_upper(f).unwrap_or(f64::INFINITY).max(1e-300);
        let gd = super::underlying::underlying_dual_upper(g, right, opts)
            .unwrap_or(f64::INFINITY)
            .max(1e-300);
        if !(fd.is_finite() && gd.is_finite()) {
            return 0.0;
        }
        img.op_norm() / (fd * gd)
    };
    // Structured candidates from the dominant product splits of each term.
    for term in &cu.terms {
        let mat = &term.vec;
        let trect = svd::svd_rect(nl, nr, mat);
        if trect.s.is_empty() || trect.s[0] == 0.0 {
            continue;
        }
        let f = left.norming_functional(&trect.u[0])?;
        let yr: Vec<C64> = trect.v[0].iter().map(|z| z.conj()).collect();
        if let Some(g) = super::underlying::underlying_norming_functional(&yr, right, opts)? {
            lower_best.offer(eval_pair(&f, &g), (f, g));
        }
    }
    // Alternating ascent.
    let mut rng = stream_rng(opts.seed, STREAM_PR_LOWER);
    if let Some((f0, g0)) = lower_best.payload.clone() {
        let mut f = f0;
        let mut g = g0;
        let mut val = lower_best.value;
        for _ in 0..2 {
            let gc = g.clone();
            let (nf, nv) = ascent_vector(
                f.clone(),
                val,
                &mut rng,
                opts.budget / 4,
                |v| Some(v),
                |v| eval_pair(v, &gc),
            );
            f = nf;
            val = nv;
            let fc = f.clone();
            let (ng, nv2) = ascent_vector(
                g.clone(),
                val,
                &mut rng,
                opts.budget / 4,
                |v| Some(v),
                |v| eval_pair(&fc, v),
            );
            g = ng;
            val = nv2;
        }
        lower_best.offer(val, (f, g));
    }

    let (lower, lower_witness) = match lower_best.payload {
        Some((f, g)) => (lower_best.value.min(upper), LowerWitness::FunctionalPair { f, g }),
        None => (0.0, LowerWitness::Zero),
    };
    Ok(NormCertificate {
        lower,
        upper,
        method: Method::Search,
        seed: opts.seed,
        budget: opts.budget,
        upper_witness: UpperWitness::PrDecomposition {
            terms: upper_terms
                .iter()
                .map(|(x, w)| PrDecompTerm {
                    left: x.clone(),
                    right: WitnessTerms::from_terms(
                        &w.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect::<Vec<_>>(),
                    ),
                })
                .collect(),
        },
        lower_witness,
    })
}

/// Re-evaluate a pr-decomposition witness cost and verify reconstruction.
pub fn pr_witness_cost(
    u: &AmpElem,
    terms: &[PrDecompTerm],
    left: &BaseSpace,
    right: &PQSpace,
    opts: &EngineOpts,
) -> Result<f64> {
    let decomp: Vec<(Vec<C64>, AmpElem)> = terms
        .iter()
        .map(|t| Ok((t.left.clone(), AmpElem::new(right.clone(), t.right.to_terms())?)))
        .collect::<Result<_>>()?;
    // Reconstruction: sum_i x_i ⊗ W_i must equal the flipped element.
    let nl = left.dim();
    let nr = right.dim();
    let mut rebuilt_terms: Vec<(CMatrix, Vec<C64>)> = Vec::new();
    for (x, w) in &decomp {
        for t in &w.terms {
            let mut vec = vec![C64::default(); nl * nr];
            for s in 0..nl {
                for r in 0..nr {
                    vec[s * nr + r] = x[s] * t.vec[r];
                }
            }
            rebuilt_terms.push((t.coeff.clone(), vec));
        }
    }
    let rebuilt = AmpElem::new(u.space.clone(), rebuilt_terms)?;
    let resid = u.max_component_diff(&rebuilt);
    if resid > 1e-8 * (1.0 + u.component_scale()) {
        return Err(Error::Input(format!("pr witness does not reconstruct: residual {resid}")));
    }
    pr_decomp_cost(&decomp, left, opts)
}

/// Closed-form evaluation shared by certificate construction and witness
/// re-evaluation for the exact routes.
pub fn closed_route_interval(u: &AmpElem, route: &str, opts: &EngineOpts) -> Result<Interval> {
    let cu = u.compress();
    match route {
        "zero" => Ok(Interval::exact(0.0)),
        "schatten_l1_atoms" => {
            let p = match &cu.space.quant {
                crate::spaces::Quantization::Schatten { p } => *p,
                _ => return Err(Error::Input("route/quantization mismatch".into())),
            };
            let weights = cu
                .space
                .base
                .l1_weights()
                .ok_or_else(|| Error::Input("route needs an l1-type base".into()))?;
            let value = cu
                .basis_components()
                .iter()
                .zip(&weights)
                .map(|(a, w)| w * a.schatten_norm(p))
                .sum();
            Ok(Interval::exact(value))
        }
        "schatten_elementary" => {
            let p = match &cu.space.quant {
                crate::spaces::Quantization::Schatten { p } => *p,
                _ => return Err(Error::Input("route/quantization mismatch".into())),
            };
            let (a, x) = cu
                .as_elementary()
                .ok_or_else(|| Error::Input("element is not elementary".into()))?;
            let iv = cu.space.base.norm_interval(&x)?;
            Ok(iv.scale(a.schatten_norm(p)))
        }
        "min_dim1" => {
            let value =
                cu.basis_components()[0].op_norm() * cu.space.base.norm(&[C64::new(1.0, 0.0)])?;
            Ok(Interval::exact(value))
        }
        "min_elementary" => {
            let (a, x) = cu
                .as_elementary()
                .ok_or_else(|| Error::Input("element is not elementary".into()))?;
            let iv = cu.space.base.norm_interval(&x)?;
            Ok(iv.scale(a.op_norm()))
        }
        "cb_scalar" => super::cb::cb_scalar_closed_interval(&cu, opts),
        other => Err(Error::Input(format!("unknown closed route {other}"))),
    }
}
