//! Sup-type estimates: completely bounded norms of operators and
//! bioperators, and the evaluation-bioperator norm on CB(E, G) spaces.
//!
//! These norms are suprema of amplified norms over unit balls of amplified
//! elements, so the engines produce certified lower bounds (every candidate
//! is a witness) with a per-level profile.  Exact upper bounds exist only on
//! the closed-form scalar pattern.

use rand::Rng;

use crate::amp::{cb_element_operators, AmpElem, BioperatorDesc, OperatorDesc};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64};
use crate::spaces::{Interval, PQSpace, Quantization};

use super::cert::{LowerWitness, Method, NormCertificate, UpperWitness, WitnessTerms};
use super::search::{stream_rng, Best};
use super::underlying::underlying_norming_direction;
use super::EngineOpts;

const STREAM_CB_CANDIDATES: u64 = 0x40;
const STREAM_CB_CLIMB: u64 = 0x41;
const STREAM_CBB_CANDIDATES: u64 = 0x42;

/// A certified sup-type lower bound with its witness and level profile.
#[derive(Clone, Debug)]
pub struct CbEstimate {
    /// Certified lower bound for the norm being estimated.
    pub lower: f64,
    /// Best value seen using levels <= d, for d = 1..=level_cap
    /// (cumulative, hence non-decreasing).
    pub profile: Vec<(usize, f64)>,
    /// Witness element (normalized to certificate-upper norm <= 1).
    pub witness: Option<AmpElem>,
}

/// Deterministic stream of unit-normalized candidate elements of a space.
fn unit_candidates(
    space: &PQSpace,
    hints: &[Vec<C64>],
    level_cap: usize,
    opts: &EngineOpts,
    stream: u64,
) -> Result<Vec<AmpElem>> {
    let n = space.dim();
    let mut raw: Vec<AmpElem> = Vec::new();

    let mut vector_pool: Vec<Vec<C64>> = Vec::new();
    for h in hints {
        if h.len() == n && h.iter().any(|z| z.norm() > 0.0) {
            vector_pool.push(h.clone());
        }
    }
    for t in 0..n {
        let mut e = vec![C64::default(); n];
        e[t] = C64::new(1.0, 0.0);
        vector_pool.push(e);
    }

    // Level-1 elementary candidates.
    for x in &vector_pool {
        raw.push(AmpElem::elementary(space.clone(), CMatrix::identity(1), x.clone())?);
    }
    // Diagonal spike families: sums of matrix units against a fixed vector.
    for d in 2..=level_cap {
        for x in vector_pool.iter().take(3) {
            let mut terms = Vec::new();
            for k in 0..d {
                terms.push((CMatrix::unit(d, k, k), x.clone()));
            }
            raw.push(AmpElem::new(space.clone(), terms)?);
        }
    }
    // Random candidates at each level.
    let mut rng = stream_rng(opts.seed, stream);
    let random_per_level = (opts.budget as usize / (4 * level_cap.max(1))).clamp(2, 24);
    for d in 1..=level_cap {
        for _ in 0..random_per_level {
            let k_terms = 1 + (rng.gen::<u32>() % 2) as usize;
            let mut terms = Vec::new();
            for _ in 0..k_terms {
                terms.push((
                    CMatrix::random_gaussian(&mut rng, d),
                    crate::matrix::gaussian_vector(&mut rng, n),
                ));
            }
            raw.push(AmpElem::new(space.clone(), terms)?);
        }
    }

    // Normalize by the certificate upper endpoint.
    let mut out = Vec::with_capacity(raw.len());
    for cand in raw {
        let ub = super::pq_norm(&cand, opts)?.upper;
        if ub.is_finite() && ub > 1e-12 {
            out.push(cand.scale(C64::new(1.0 / ub, 0.0)));
        }
    }
    Ok(out)
}

fn profile_update(profile: &mut [(usize, f64)], level: usize, value: f64) {
    for (d, best) in profile.iter_mut() {
        if *d >= level && value > *best {
            *best = value;
        }
    }
}

/// Certified lower bound on the image norm of a unit element: the lower
/// endpoint of the image certificate divided by the upper endpoint of the
/// element certificate.
fn ratio_value(image: &AmpElem, unit: &AmpElem, opts: &EngineOpts) -> Result<f64> {
    let img = super::pq_norm(image, opts)?;
    let un = super::pq_norm(unit, opts)?;
    if !un.upper.is_finite() || un.upper <= 1e-12 {
        return Ok(0.0);
    }
    Ok(img.lower / un.upper)
}

/// Certified lower bound on ||φ||_cb = sup ||φ_inf(u)|| over unit u at
/// levels <= level_cap, with the per-level profile.
pub fn cb_norm_estimate(op: &OperatorDesc, level_cap: usize, opts: &EngineOpts) -> Result<CbEstimate> {
    if op.is_zero() {
        return Ok(CbEstimate {
            lower: 0.0,
            profile: (1..=level_cap).map(|d| (d, 0.0)).collect(),
            witness: None,
        });
    }
    let mut hints: Vec<Vec<C64>> = Vec::new();
    match &op.action {
        crate::amp::OpAction::Functional { coeffs } => {
            if let Some(x) = underlying_norming_direction(coeffs, &op.domain, opts)? {
                hints.push(x);
            }
        }
        crate::amp::OpAction::Matrix { entries } => {
            let (ng, ne) = (op.codomain.dim(), op.domain.dim());
            let rect = crate::svd::svd_rect(ng, ne, entries);
            for k in 0..rect.s.len().min(2) {
                if rect.s[k] > 0.0 {
                    hints.push(rect.v[k].clone());
                }
            }
        }
        _ => {}
    }

    let mut best: Best<AmpElem> = Best::new();
    let mut profile: Vec<(usize, f64)> = (1..=level_cap).map(|d| (d, 0.0)).collect();
    for cand in unit_candidates(&op.domain, &hints, level_cap, opts, STREAM_CB_CANDIDATES)? {
        let image = op.amplify(&cand)?;
        let value = ratio_value(&image, &cand, opts)?;
        profile_update(&mut profile, cand.level(), value);
        best.offer(value, cand);
    }

    // Coefficient hill-climb on the best candidate.
    let mut rng = stream_rng(opts.seed, STREAM_CB_CLIMB);
    if let Some(start) = best.payload.clone() {
        let mut current = start;
        let mut current_val = best.value;
        for _ in 0..opts.budget / 8 {
            let mut cand = current.clone();
            for t in &mut cand.terms {
                let d = t.coeff.dim();
                let noise = CMatrix::random_gaussian(&mut rng, d).scale(C64::new(0.15, 0.0));
                t.coeff = t.coeff.add(&noise);
            }
            let ub = super::pq_norm(&cand, opts)?.upper;
            if !ub.is_finite() || ub <= 1e-12 {
                continue;
            }
            let cand = cand.scale(C64::new(1.0 / ub, 0.0));
            let image = op.amplify(&cand)?;
            let value = ratio_value(&image, &cand, opts)?;
            if value > current_val {
                profile_update(&mut profile, cand.level(), value);
                current = cand;
                current_val = value;
            }
        }
        best.offer(current_val, current);
    }

    Ok(CbEstimate { lower: best.value, profile, witness: best.payload })
}

/// Certified lower bound on the cb norm of a bioperator over unit pairs.
pub fn cb_bilinear_estimate(
    rho: &BioperatorDesc,
    level_cap: usize,
    opts: &EngineOpts,
) -> Result<(CbEstimate, Option<(AmpElem, AmpElem)>)> {
    let (ne, nf, ng) = (rho.left.dim(), rho.right.dim(), rho.codomain.dim());
    // Hints from the dominant product structure of the coefficient tensor.
    let mut left_hints = Vec::new();
    let mut right_hints = Vec::new();
    {
        let mut flat_left = vec![C64::default(); ne * (nf * ng)];
        let mut flat_right = vec![C64::default(); nf * (ne * ng)];
        for g in 0..ng {
            for e in 0..ne {
                for f in 0..nf {
                    let z = rho.coeffs[g * ne * nf + e * nf + f];
                    flat_left[e * (nf * ng) + (g * nf + f)] = z;
                    flat_right[f * (ne * ng) + (g * ne + e)] = z;
                }
            }
        }
        let rl = crate::svd::svd_rect(ne, nf * ng, &flat_left);
        if !rl.s.is_empty() && rl.s[0] > 0.0 {
            let fvec: Vec<C64> = rl.u[0].clone();
            if let Some(x) = underlying_norming_direction(&fvec, &rho.left, opts)? {
                left_hints.push(x);
            }
        }
        let rr = crate::svd::svd_rect(nf, ne * ng, &flat_right);
        if !rr.s.is_empty() && rr.s[0] > 0.0 {
            let gvec: Vec<C64> = rr.u[0].clone();
            if let Some(y) = underlying_norming_direction(&gvec, &rho.right, opts)? {
                right_hints.push(y);
            }
        }
    }

    let us = unit_candidates(&rho.left, &left_hints, level_cap, opts, STREAM_CBB_CANDIDATES)?;
    let vs = unit_candidates(&rho.right, &right_hints, level_cap, opts, STREAM_CBB_CANDIDATES + 1)?;

    let mut best: Best<(AmpElem, AmpElem)> = Best::new();
    let mut profile: Vec<(usize, f64)> = (1..=level_cap).map(|d| (d, 0.0)).collect();
    let cap = (opts.budget as usize).clamp(16, 400);
    let mut count = 0usize;
    'outer: for u in &us {
        for v in &vs {
            if count >= cap {
                break 'outer;
            }
            count += 1;
            let image = rho.amplify(u, v)?;
            let un = super::pq_norm(u, opts)?.upper;
            let vn = super::pq_norm(v, opts)?.upper;
            if !(un.is_finite() && vn.is_finite()) || un <= 1e-12 || vn <= 1e-12 {
                continue;
            }
            let value = super::pq_norm(&image, opts)?.lower / (un * vn);
            profile_update(&mut profile, u.level().max(v.level()), value);
            best.offer(value, (u.clone(), v.clone()));
        }
    }

    let witness = best.payload.clone();
    Ok((
        CbEstimate {
            lower: best.value,
            profile,
            witness: witness.as_ref().map(|(u, _)| u.clone()),
        },
        witness,
    ))
}

/// The evaluation image E_inf(u, Φ) in K G for Φ in K[CB(E, G)].
pub fn evaluation_image(u: &AmpElem, phi: &AmpElem) -> Result<AmpElem> {
    let (_, codomain) = match &phi.space.quant {
        Quantization::CbSpace { domain, codomain } => (domain.clone(), codomain.clone()),
        _ => return Err(Error::Dimension("evaluation needs a CB-space element".into())),
    };
    let ops = cb_element_operators(phi)?;
    let mut terms = Vec::new();
    for tu in &u.terms {
        for (b, op) in &ops {
            terms.push((tu.coeff.diamond(b), op.apply_vec(&tu.vec)?));
        }
    }
    AmpElem::new((*codomain).clone(), terms)
}

/// Sup-search lower bound for the CB-space norm (7.1-style evaluation norm).
pub fn cbspace_norm(phi: &AmpElem, level_cap: usize, opts: &EngineOpts) -> Result<CbEstimate> {
    let (domain, _) = match &phi.space.quant {
        Quantization::CbSpace { domain, codomain } => (domain.clone(), codomain.clone()),
        _ => return Err(Error::Dimension("element is not in a CB space".into())),
    };
    if phi.is_zero() {
        return Ok(CbEstimate {
            lower: 0.0,
            profile: (1..=level_cap).map(|d| (d, 0.0)).collect(),
            witness: None,
        });
    }
    // Hints: norming directions of the per-term operators.
    let mut hints: Vec<Vec<C64>> = Vec::new();
    for (_, op) in cb_element_operators(phi)? {
        if let crate::amp::OpAction::Matrix { entries } = &op.action {
            let (ng, ne) = (op.codomain.dim(), op.domain.dim());
            let rect = crate::svd::svd_rect(ng, ne, entries);
            if !rect.s.is_empty() && rect.s[0] > 0.0 {
                hints.push(rect.v[0].clone());
            }
        }
    }

    let mut best: Best<AmpElem> = Best::new();
    let mut profile: Vec<(usize, f64)> = (1..=level_cap).map(|d| (d, 0.0)).collect();
    for cand in unit_candidates(&domain, &hints, level_cap, opts, STREAM_CB_CANDIDATES)? {
        let image = evaluation_image(&cand, phi)?;
        let value = ratio_value(&image, &cand, opts)?;
        profile_update(&mut profile, cand.level(), value);
        best.offer(value, cand);
    }
    Ok(CbEstimate { lower: best.value, profile, witness: best.payload })
}

/// Closed form for K[CB(^(p)C, ^(q)C)] with p <= q: the norm of Φ = B·id is
/// ||B||_q.
pub fn cb_scalar_closed_interval(phi: &AmpElem, _opts: &EngineOpts) -> Result<Interval> {
    match scalar_cb_exponents(&phi.space) {
        Some((_, q)) => {
            let b = phi.basis_components().into_iter().next().unwrap_or(CMatrix::zeros(1));
            Ok(Interval::exact(b.schatten_norm(q)))
        }
        None => Err(Error::Input("element is not in a scalar CB space".into())),
    }
}

/// Some((p, q)) when the space is CB(^(p)C, ^(q)C) with p <= q.
pub fn scalar_cb_exponents(space: &PQSpace) -> Option<(crate::matrix::Exponent, crate::matrix::Exponent)> {
    if let Quantization::CbSpace { domain, codomain } = &space.quant {
        if domain.dim() == 1 && codomain.dim() == 1 {
            if let (Quantization::Schatten { p }, Quantization::Schatten { p: q }) =
                (&domain.quant, &codomain.quant)
            {
                if p.value() <= q.value() {
                    return Some((*p, *q));
                }
            }
        }
    }
    None
}

/// Certificate for elements of a CB-space quantization.
pub fn cb_certificate(phi: &AmpElem, opts: &EngineOpts) -> Result<NormCertificate> {
    let cp = phi.compress();
    if cp.is_zero() {
        return Ok(NormCertificate::zero(opts.seed, opts.budget));
    }
    if scalar_cb_exponents(&cp.space).is_some() {
        let iv = cb_scalar_closed_interval(&cp, opts)?;
        return Ok(NormCertificate::exact(iv.upper, "cb_scalar", opts.seed, opts.budget));
    }
    let est = cbspace_norm(&cp, opts.level_cap, opts)?;
    let witness = est
        .witness
        .as_ref()
        .map(|u| {
            WitnessTerms::from_terms(
                &u.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect::<Vec<_>>(),
            )
        })
        .unwrap_or(WitnessTerms(Vec::new()));
    Ok(NormCertificate {
        lower: est.lower,
        upper: f64::INFINITY,
        method: Method::SupSearch,
        seed: opts.seed,
        budget: opts.budget,
        upper_witness: UpperWitness::Unbounded,
        lower_witness: LowerWitness::WitnessElement { terms: witness },
    })
}

/// Re-evaluate a CB-space witness element.
pub fn cb_witness_value(phi: &AmpElem, terms: &WitnessTerms, opts: &EngineOpts) -> Result<f64> {
    let (domain, _) = match &phi.space.quant {
        Quantization::CbSpace { domain, codomain } => (domain.clone(), codomain.clone()),
        _ => return Err(Error::Dimension("element is not in a CB space".into())),
    };
    if terms.0.is_empty() {
        return Ok(0.0);
    }
    let u = AmpElem::new((*domain).clone(), terms.to_terms())?;
    let image = evaluation_image(&u, phi)?;
    ratio_value(&image, &u, opts)
}
