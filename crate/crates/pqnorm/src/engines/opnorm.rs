//! The operator-projective cross norm restricted to single-diamond
//! representations a · (u ⋄ v) · b, evaluated on the same tensor-ambient
//! elements as the pop norm.  Outside quantum spaces it exceeds the pop norm
//! and fails the triangle inequality, which the witness family here
//! exhibits.

use rand::Rng;

use crate::amp::AmpElem;
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64};
use crate::spaces::PQSpace;

use super::cert::{PopTermData, UpperWitness};
use super::pop::{pop_factors, rep_cost, rep_reconstruct, witness_to_rep, RepTerm, Representation};
use super::search::{stream_rng, Cheapest};
use super::EngineOpts;

const STREAM_OP_UPPER: u64 = 0x30;

/// The canonical single-diamond representation built from the rank
/// decompositions of the basis cells: one projection slot per (cell, rank)
/// pair on each side, with the cell singular vectors stored in the outer
/// factors.
pub fn canonical_single_diamond(u: &AmpElem) -> Result<Option<Representation>> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok(None);
    }
    let (left, right) = pop_factors(&cu.space)?;
    let (nl, nr) = (left.dim(), right.dim());
    let level = cu.level();
    let cells = cu.basis_components();

    let svds: Vec<_> = cells.iter().map(|c| c.svd()).collect();
    let rank = |s: usize, t: usize| -> usize { svds[s * nr + t].rank(1e-12) };

    let mut mu = vec![0usize; nl];
    let mut mv = vec![0usize; nr];
    for s in 0..nl {
        for t in 0..nr {
            mu[s] = mu[s].max(rank(s, t));
            mv[t] = mv[t].max(rank(s, t));
        }
    }
    let lu: usize = mu.iter().sum::<usize>().max(1);
    let lv: usize = mv.iter().sum::<usize>().max(1);
    let offset_u: Vec<usize> = mu
        .iter()
        .scan(0usize, |acc, &m| {
            let out = *acc;
            *acc += m;
            Some(out)
        })
        .collect();
    let offset_v: Vec<usize> = mv
        .iter()
        .scan(0usize, |acc, &m| {
            let out = *acc;
            *acc += m;
            Some(out)
        })
        .collect();

    // u = sum_s (sum_rho E_{slot,slot}) e_s, likewise v.
    let mut u_terms = Vec::new();
    for s in 0..nl {
        if mu[s] == 0 {
            continue;
        }
        let mut proj = CMatrix::zeros(lu);
        for rho in 0..mu[s] {
            let idx = offset_u[s] + rho;
            proj[(idx, idx)] = C64::new(1.0, 0.0);
        }
        let mut es = vec![C64::default(); nl];
        es[s] = C64::new(1.0, 0.0);
        u_terms.push((proj, es));
    }
    let mut v_terms = Vec::new();
    for t in 0..nr {
        if mv[t] == 0 {
            continue;
        }
        let mut proj = CMatrix::zeros(lv);
        for rho in 0..mv[t] {
            let idx = offset_v[t] + rho;
            proj[(idx, idx)] = C64::new(1.0, 0.0);
        }
        let mut et = vec![C64::default(); nr];
        et[t] = C64::new(1.0, 0.0);
        v_terms.push((proj, et));
    }
    if u_terms.is_empty() || v_terms.is_empty() {
        return Ok(None);
    }

    let big = (lu * lv).max(level);
    let mut a = CMatrix::zeros(big);
    let mut b = CMatrix::zeros(big);
    for s in 0..nl {
        for t in 0..nr {
            let svd = &svds[s * nr + t];
            for rho in 0..rank(s, t) {
                let col = (offset_u[s] + rho) * lv + (offset_v[t] + rho);
                let root = svd.s[rho].sqrt();
                for i in 0..level {
                    a[(i, col)] = svd.u[rho][i] * root;
                    b[(col, i)] = svd.v[rho][i].conj() * root;
                }
            }
        }
    }

    Ok(Some(vec![RepTerm {
        a,
        u: AmpElem::new(left, u_terms)?,
        v: AmpElem::new(right, v_terms)?,
        b,
    }]))
}

/// Best verified single-diamond representation cost (>= the true op norm).
pub fn op_upper(u: &AmpElem, opts: &EngineOpts) -> Result<(f64, UpperWitness)> {
    let cu = u.compress();
    if cu.is_zero() {
        return Ok((0.0, UpperWitness::Exact { route: "zero".into() }));
    }
    let (left, right) = pop_factors(&cu.space)?;
    let ambient = &cu.space;
    let scale = 1.0 + cu.component_scale();

    let mut best: Cheapest<Representation> = Cheapest::new();
    let offer = |rep: Representation, best: &mut Cheapest<Representation>| -> Result<()> {
        if rep.len() != 1 {
            return Ok(());
        }
        let rebuilt = rep_reconstruct(&rep, ambient)?;
        if cu.max_component_diff(&rebuilt) > 1e-9 * scale {
            return Ok(());
        }
        let cost = rep_cost(&rep, opts)?;
        best.offer(cost, rep);
        Ok(())
    };

    if let Some(rep) = canonical_single_diamond(&cu)? {
        offer(rep, &mut best)?;
    }
    // Elementary element with a rank-one coefficient is already a single
    // diamond.
    if let Some((c, z)) = cu.as_elementary() {
        let csvd = c.svd();
        let (nl, nr) = (left.dim(), right.dim());
        let zrect = crate::svd::svd_rect(nl, nr, &z);
        let crank = csvd.rank(1e-12);
        let zrank = zrect.s.iter().filter(|&&s| s > 1e-12 * zrect.s[0].max(1e-300)).count();
        if crank == 1 && zrank == 1 {
            let root = csvd.s[0].sqrt();
            let level = c.dim();
            let mut e0 = vec![C64::default(); level];
            e0[0] = C64::new(1.0, 0.0);
            let xi: Vec<C64> = csvd.u[0].iter().map(|w| w * root).collect();
            let eta: Vec<C64> = csvd.v[0].iter().map(|w| w * root).collect();
            let x: Vec<C64> = zrect.u[0].iter().map(|w| w * zrect.s[0]).collect();
            let y: Vec<C64> = zrect.v[0].iter().map(|w| w.conj()).collect();
            offer(
                vec![RepTerm {
                    a: CMatrix::rank_one(&xi, &e0)?,
                    u: AmpElem::elementary(left.clone(), CMatrix::identity(1), x)?,
                    v: AmpElem::elementary(right.clone(), CMatrix::identity(1), y)?,
                    b: CMatrix::rank_one(&e0, &eta)?,
                }],
                &mut best,
            )?;
        }
    }
    // Exact diamond factorizations are single-diamond representations.
    for rep in super::pop::rep_kron_detect(&cu, &left, &right)? {
        offer(rep, &mut best)?;
    }

    // Gauge polish.
    let mut rng = stream_rng(opts.seed, STREAM_OP_UPPER);
    if let Some(start) = best.payload.clone() {
        let mut current = start;
        let mut current_cost = best.value;
        for _ in 0..opts.budget / 8 {
            let term = &current[0];
            let (lu, lv) = (term.u.level(), term.v.level());
            let g1 = near_identity(&mut rng, lu, 0.2);
            let g2 = near_identity(&mut rng, lv, 0.2);
            let h1 = near_identity(&mut rng, lu, 0.2);
            let h2 = near_identity(&mut rng, lv, 0.2);
            let (Some(g1i), Some(g2i), Some(h1i), Some(h2i)) =
                (g1.inverse(), g2.inverse(), h1.inverse(), h2.inverse())
            else {
                continue;
            };
            let big = lu * lv;
            let a = term.a.embed(term.a.dim().max(big))?;
            let b = term.b.embed(term.b.dim().max(big))?;
            let cand = vec![RepTerm {
                a: a.mul(&g1.diamond(&g2).embed(a.dim())?),
                u: crate::amp::module_action(&g1i, &term.u, &h1i),
                v: crate::amp::module_action(&g2i, &term.v, &h2i),
                b: h1.diamond(&h2).embed(b.dim())?.mul(&b),
            }];
            let rebuilt = rep_reconstruct(&cand, ambient)?;
            if cu.max_component_diff(&rebuilt) > 1e-9 * scale {
                continue;
            }
            let cost = rep_cost(&cand, opts)?;
            if cost < current_cost - 1e-14 {
                current = cand;
                current_cost = cost;
            }
        }
        best.offer(current_cost, current);
    }

    let rep = best
        .payload
        .ok_or_else(|| Error::Input("no single-diamond representation found".into()))?;
    Ok((
        best.value,
        UpperWitness::SingleDiamond {
            term: Box::new(PopTermData {
                a: rep[0].a.clone(),
                u: super::cert::WitnessTerms::from_terms(
                    &rep[0].u.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect::<Vec<_>>(),
                ),
                v: super::cert::WitnessTerms::from_terms(
                    &rep[0].v.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect::<Vec<_>>(),
                ),
                b: rep[0].b.clone(),
            }),
        },
    ))
}

fn near_identity(rng: &mut rand_chacha::ChaCha20Rng, dim: usize, spread: f64) -> CMatrix {
    let mut m = CMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] += crate::matrix::gaussian_c64(rng) * spread;
        }
    }
    m
}

/// Re-evaluate a single-diamond witness.
pub fn single_diamond_cost(u: &AmpElem, term: &PopTermData, opts: &EngineOpts) -> Result<f64> {
    let (left, right) = pop_factors(&u.space)?;
    let rep = witness_to_rep(std::slice::from_ref(term), &left, &right)?;
    let rebuilt = rep_reconstruct(&rep, &u.space)?;
    let resid = u.max_component_diff(&rebuilt);
    if resid > 1e-8 * (1.0 + u.component_scale()) {
        return Err(Error::Input(format!(
            "single-diamond witness does not reconstruct: residual {resid}"
        )));
    }
    rep_cost(&rep, opts)
}

/// A random valid single-diamond representation of `u`, produced by gauging
/// a reference representation, together with its cost.  Returns None when
/// the random gauge degenerates.
pub fn random_single_diamond_cost(
    u: &AmpElem,
    reference: &Representation,
    rng: &mut rand_chacha::ChaCha20Rng,
    opts: &EngineOpts,
) -> Result<Option<f64>> {
    let term = &reference[0];
    let (lu, lv) = (term.u.level(), term.v.level());
    let spread = 0.8;
    let g1 = near_identity(rng, lu, spread);
    let g2 = near_identity(rng, lv, spread);
    let h1 = near_identity(rng, lu, spread);
    let h2 = near_identity(rng, lv, spread);
    let lambda = 0.2 + rng.gen::<f64>() * 3.0;
    let (Some(g1i), Some(g2i), Some(h1i), Some(h2i)) =
        (g1.inverse(), g2.inverse(), h1.inverse(), h2.inverse())
    else {
        return Ok(None);
    };
    let big = lu * lv;
    let a = term.a.embed(term.a.dim().max(big))?;
    let b = term.b.embed(term.b.dim().max(big))?;
    let cand = vec![RepTerm {
        a: a.mul(&g1.diamond(&g2).embed(a.dim())?).scale(C64::new(lambda, 0.0)),
        u: crate::amp::module_action(&g1i, &term.u, &h1i),
        v: crate::amp::module_action(&g2i, &term.v, &h2i),
        b: h1.diamond(&h2).embed(b.dim())?.mul(&b).scale(C64::new(1.0 / lambda, 0.0)),
    }];
    let rebuilt = rep_reconstruct(&cand, &u.space)?;
    if u.max_component_diff(&rebuilt) > 1e-7 * (1.0 + u.component_scale()) {
        return Ok(None);
    }
    Ok(Some(rep_cost(&cand, opts)?))
}

/// Reference values carried by the diagonal witness family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VnReference {
    pub pop: f64,
    pub op: f64,
}

/// V_n = sum_k P_k (e_k ⊗ e_k) in the pop square of the L_1 sequence space,
/// with P_k the diagonal matrix units.
pub fn vn_family(n: usize) -> Result<(AmpElem, VnReference)> {
    if n == 0 {
        return Err(Error::Input("the witness family needs n >= 1".into()));
    }
    let ell1 = PQSpace::l1_sequence(n);
    let ambient = PQSpace::pop_tensor(ell1.clone(), ell1);
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let mut z = vec![C64::default(); n * n];
        z[k * n + k] = C64::new(1.0, 0.0);
        terms.push((CMatrix::unit(n, k, k), z));
    }
    Ok((
        AmpElem::new(ambient, terms)?,
        VnReference { pop: n as f64, op: (n * n) as f64 },
    ))
}

/// Difference element V_n - V_m (m < n) at the common level n.
pub fn vn_difference(n: usize, m: usize) -> Result<AmpElem> {
    if m >= n {
        return Err(Error::Input("difference needs m < n".into()));
    }
    let ell1 = PQSpace::l1_sequence(n);
    let ambient = PQSpace::pop_tensor(ell1.clone(), ell1);
    let mut terms = Vec::new();
    for k in m..n {
        let mut z = vec![C64::default(); n * n];
        z[k * n + k] = C64::new(1.0, 0.0);
        terms.push((CMatrix::unit(n, k, k), z));
    }
    AmpElem::new(ambient, terms)
}
