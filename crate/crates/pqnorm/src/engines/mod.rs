//! Norm engines: certificate construction and witness re-evaluation for
//! every quantization in the catalogue.
//!
//! All engines are pure functions of (element, options); randomized searches
//! draw from ChaCha streams keyed by the seed, so certificates replay
//! byte-identically and bounds improve monotonically with the budget.

pub mod cb;
pub mod cert;
pub mod opnorm;
pub mod pop;
pub mod proj;
pub mod search;
pub mod underlying;

pub use cb::{cb_bilinear_estimate, cb_norm_estimate, cbspace_norm, CbEstimate};
pub use cert::{LowerWitness, Method, NormCertificate, UpperWitness};
pub use opnorm::{op_upper, vn_difference, vn_family, VnReference};
pub use pop::{pop_certificate, pop_lower, pop_upper, StructRule};
pub use proj::{lp_certificate, min_certificate, pr_certificate, proj_lower, proj_upper, schatten_certificate};

use crate::amp::AmpElem;
use crate::error::{Error, Result};
use crate::spaces::Quantization;

/// Search options shared by every engine.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineOpts {
    /// Seed for all randomized searches.
    pub seed: u64,
    /// Restart / iteration budget; larger budgets only extend schedules.
    pub budget: u32,
    /// Maximum coefficient level explored by sup-type searches.
    pub level_cap: usize,
    /// Relative acceptance tolerance separating tight and heuristic
    /// certificates.
    pub tol: f64,
}

impl Default for EngineOpts {
    fn default() -> Self {
        EngineOpts { seed: 0, budget: 200, level_cap: 4, tol: 1e-3 }
    }
}

impl EngineOpts {
    pub fn seeded(seed: u64) -> EngineOpts {
        EngineOpts { seed, ..EngineOpts::default() }
    }
}

/// Certificate for the quantized norm of an amplified element.
pub fn pq_norm(u: &AmpElem, opts: &EngineOpts) -> Result<NormCertificate> {
    let cert = match &u.space.quant {
        Quantization::Schatten { p } => proj::schatten_certificate(u, *p, opts)?,
        Quantization::Min => proj::min_certificate(u, opts)?,
        Quantization::Lp { measure, p, inner } => {
            proj::lp_certificate(u, measure, *p, inner, opts)?
        }
        Quantization::PrTensor { left, right } => proj::pr_certificate(u, left, right, opts)?,
        Quantization::PopTensor { .. } => pop::pop_certificate(u, opts)?,
        Quantization::CbSpace { .. } => cb::cb_certificate(u, opts)?,
    };
    debug_assert!(cert.is_sound_shape(), "malformed certificate {cert:?}");
    Ok(cert)
}

/// Recompute both endpoints of a certificate from its witnesses.  The
/// returned values are sound bounds in their own right and must agree with
/// the stored endpoints within the re-evaluation tolerance.
pub fn reevaluate(u: &AmpElem, cert: &NormCertificate, opts: &EngineOpts) -> Result<(f64, f64)> {
    let opts = EngineOpts { seed: cert.seed, budget: cert.budget, ..opts.clone() };
    let upper = reevaluate_upper(u, &cert.upper_witness, &opts)?;
    let lower = reevaluate_lower(u, &cert.lower_witness, &opts)?;
    Ok((lower, upper))
}

fn reevaluate_upper(u: &AmpElem, witness: &UpperWitness, opts: &EngineOpts) -> Result<f64> {
    Ok(match witness {
        UpperWitness::Exact { route } => proj::closed_route_interval(u, route, opts)?.upper,
        UpperWitness::ProjDecomposition { p, terms } => {
            let decomp = terms.to_terms();
            let resid = proj::decomposition_residual(u, &decomp)?;
            if resid > 1e-8 * (1.0 + u.component_scale()) {
                return Err(Error::Input(format!(
                    "projective witness does not reconstruct: residual {resid}"
                )));
            }
            proj::proj_decomp_cost(&decomp, *p, &u.space.base)?
        }
        UpperWitness::PrDecomposition { terms } => match &u.space.quant {
            Quantization::PrTensor { left, right } => {
                proj::pr_witness_cost(u, terms, left, right, opts)?
            }
            _ => return Err(Error::Input("pr witness on a non-pr ambient".into())),
        },
        UpperWitness::PopRepresentation { terms } => pop::rep_witness_cost(u, terms, opts)?,
        UpperWitness::SingleDiamond { term } => opnorm::single_diamond_cost(u, term, opts)?,
        UpperWitness::Aggregate { parts } => aggregate_reevaluate(u, parts, opts)?.1,
        UpperWitness::Structural { rule, inner } => {
            structural_reevaluate(u, rule, inner, opts)?.1
        }
        UpperWitness::Unbounded => f64::INFINITY,
    })
}

fn reevaluate_lower(u: &AmpElem, witness: &LowerWitness, opts: &EngineOpts) -> Result<f64> {
    Ok(match witness {
        LowerWitness::Exact { route } => proj::closed_route_interval(u, route, opts)?.lower,
        LowerWitness::Zero => 0.0,
        LowerWitness::Functional { f } => {
            let cu = u.compress();
            let comps = cu.basis_components();
            let image = proj::functional_image(&comps, f);
            let dual = cu.space.base.dual_norm_upper(f)?.max(1e-300);
            image.op_norm() / dual
        }
        LowerWitness::FunctionalPair { f, g } => pop::pair_witness_value(u, f, g, opts)?,
        LowerWitness::SchattenPair { b, f } => {
            let p = match &u.space.quant {
                Quantization::Schatten { p } => *p,
                _ => return Err(Error::Input("schatten pair on a non-schatten ambient".into())),
            };
            let cu = u.compress();
            proj::schatten_pair_value(&cu.basis_components(), b, f, p, &cu.space.base)?
        }
        LowerWitness::SchattenFamily { mats } => {
            let p = match &u.space.quant {
                Quantization::Schatten { p } => *p,
                _ => return Err(Error::Input("schatten family on a non-schatten ambient".into())),
            };
            let cu = u.compress();
            let weights = cu
                .space
                .base
                .l1_weights()
                .ok_or_else(|| Error::Input("schatten family needs an l1-type base".into()))?;
            proj::schatten_family_value(&cu.basis_components(), mats, p, &weights)
        }
        LowerWitness::WitnessElement { terms } => cb::cb_witness_value(u, terms, opts)?,
        LowerWitness::Aggregate { parts } => aggregate_reevaluate(u, parts, opts)?.0,
        LowerWitness::Structural { rule, inner } => {
            structural_reevaluate(u, rule, inner, opts)?.0
        }
    })
}

/// Split an aggregated element back into its cells and re-evaluate each part
/// certificate against its cell.
fn aggregate_reevaluate(
    u: &AmpElem,
    parts: &[NormCertificate],
    opts: &EngineOpts,
) -> Result<(f64, f64)> {
    match &u.space.quant {
        Quantization::Lp { measure, p, inner } => {
            let cells = proj::lp_split(u, measure, inner)?;
            if cells.len() != parts.len() {
                return Err(Error::Input("aggregate witness arity mismatch".into()));
            }
            let mut lows = Vec::with_capacity(parts.len());
            let mut highs = Vec::with_capacity(parts.len());
            for (cell, part) in cells.iter().zip(parts) {
                let (lo, hi) = reevaluate(cell, part, opts)?;
                lows.push(lo);
                highs.push(hi);
            }
            Ok((
                underlying::weighted_lp(&lows, &measure.atom_weights, *p),
                underlying::weighted_lp(&highs, &measure.atom_weights, *p),
            ))
        }
        Quantization::PrTensor { left, right } => {
            let weights = left
                .l1_weights()
                .ok_or_else(|| Error::Input("pr aggregate needs an l1-type left factor".into()))?;
            let cells = proj::pr_cells(u, left.dim(), right)?;
            if cells.len() != parts.len() {
                return Err(Error::Input("aggregate witness arity mismatch".into()));
            }
            let mut lower = 0.0;
            let mut upper = 0.0;
            for ((cell, part), w) in cells.iter().zip(parts).zip(&weights) {
                let (lo, hi) = reevaluate(cell, part, opts)?;
                lower += w * lo;
                upper += w * hi;
            }
            Ok((lower, upper))
        }
        _ => Err(Error::Input("aggregate witness on a non-aggregating ambient".into())),
    }
}

fn structural_reevaluate(
    u: &AmpElem,
    rule: &str,
    inner: &[NormCertificate],
    opts: &EngineOpts,
) -> Result<(f64, f64)> {
    let rule = StructRule::from_name(rule)
        .ok_or_else(|| Error::Input(format!("unknown structural rule {rule}")))?;
    let parts = rule.transform(u)?;
    if parts.len() != inner.len() {
        return Err(Error::Input("structural witness arity mismatch".into()));
    }
    let mut lower = 0.0;
    let mut upper = 0.0;
    for ((w, part), cert) in parts.iter().zip(inner) {
        let (lo, hi) = reevaluate(part, cert, opts)?;
        lower += w * lo;
        upper += w * hi;
    }
    Ok((lower, upper))
}
