//! Underlying-space norms of quantized spaces.
//!
//! The underlying norm of a PQ-space is the norm of rank-one amplified
//! elements Q·x.  For leaf quantizations it is the base norm; for L_p and
//! tensor quantizations it recurses through the structure; for pop/CB
//! quantizations it falls back to a rank-one engine evaluation.

use crate::amp::AmpElem;
use crate::error::Result;
use crate::matrix::{lp_norm, CMatrix, Exponent, C64};
use crate::spaces::{holder_extremal, Interval, PQSpace, Quantization};

use super::EngineOpts;

/// Sound interval around the underlying norm of x in the given PQ-space.
pub fn underlying_norm_interval(x: &[C64], space: &PQSpace, opts: &EngineOpts) -> Result<Interval> {
    match &space.quant {
        Quantization::Schatten { .. } | Quantization::Min => space.base.norm_interval(x),
        Quantization::Lp { measure, p, inner } => {
            let nf = inner.dim();
            let mut lows = Vec::with_capacity(measure.len());
            let mut highs = Vec::with_capacity(measure.len());
            for t in 0..measure.len() {
                let iv = underlying_norm_interval(&x[t * nf..(t + 1) * nf], inner, opts)?;
                lows.push(iv.lower);
                highs.push(iv.upper);
            }
            Ok(Interval::new(
                weighted_lp(&lows, &measure.atom_weights, *p),
                weighted_lp(&highs, &measure.atom_weights, *p),
            ))
        }
        Quantization::PrTensor { left, right } => {
            // Classical projective norm with a recursive right-factor norm.
            let (nl, nr) = (left.dim(), right.dim());
            if let Some(w) = left.l1_weights() {
                let mut acc = Interval::exact(0.0);
                for s in 0..nl {
                    let iv = underlying_norm_interval(&x[s * nr..(s + 1) * nr], right, opts)?;
                    acc.lower += w[s] * iv.lower;
                    acc.upper += w[s] * iv.upper;
                }
                return Ok(acc);
            }
            // Upper: SVD product split and row grouping; lower: product
            // functionals where the factors certify their duals.
            let rect = crate::svd::svd_rect(nl, nr, x);
            let mut svd_cost = 0.0;
            for k in 0..rect.s.len() {
                if rect.s[k] == 0.0 {
                    continue;
                }
                let xr: Vec<C64> = rect.v[k].iter().map(|z| z.conj()).collect();
                svd_cost += rect.s[k]
                    * left.norm(&rect.u[k])?
                    * underlying_norm_interval(&xr, right, opts)?.upper;
            }
            let mut row_cost = 0.0;
            for s in 0..nl {
                let mut e = vec![C64::default(); nl];
                e[s] = C64::new(1.0, 0.0);
                row_cost += left.norm(&e)?
                    * underlying_norm_interval(&x[s * nr..(s + 1) * nr], right, opts)?.upper;
            }
            let upper = svd_cost.min(row_cost);
            let mut lower = 0.0_f64;
            if let (Some(fl), Some(fr)) = (
                rect.s.first().filter(|&&s| s > 0.0).map(|_| left.norming_functional(&rect.u[0])),
                rect.s.first().filter(|&&s| s > 0.0).map(|_| {
                    let xr: Vec<C64> = rect.v[0].iter().map(|z| z.conj()).collect();
                    underlying_norming_functional(&xr, right, opts)
                }),
            ) {
                let fl = fl?;
                if let Some(fr) = fr? {
                    let mut pairing = C64::default();
                    for i in 0..nl {
                        for j in 0..nr {
                            pairing += x[i * nr + j] * fl[i] * fr[j];
                        }
                    }
                    lower = pairing.norm();
                }
            }
            Ok(Interval::new(lower.min(upper), upper))
        }
        Quantization::PopTensor { .. } | Quantization::CbSpace { .. } => {
            // Rank-one amplified element: underlying norm by definition.
            let elem = AmpElem::elementary(space.clone(), CMatrix::identity(1), x.to_vec())?;
            let cert = super::pq_norm(&elem, opts)?;
            Ok(Interval::new(cert.lower, cert.upper))
        }
    }
}

pub fn weighted_lp(vals: &[f64], weights: &[f64], p: Exponent) -> f64 {
    if p.is_inf() {
        return vals.iter().cloned().fold(0.0, f64::max);
    }
    let pv = p.value();
    let scaled: Vec<f64> = vals
        .iter()
        .zip(weights)
        .map(|(v, w)| v * w.powf(1.0 / pv))
        .collect();
    lp_norm(&scaled, p)
}

/// Upper bound on the underlying dual norm, when one can be certified.
pub fn underlying_dual_upper(f: &[C64], space: &PQSpace, opts: &EngineOpts) -> Option<f64> {
    match &space.quant {
        Quantization::Schatten { .. } | Quantization::Min => {
            space.base.dual_norm_interval(f).ok().map(|iv| iv.upper).filter(|u| u.is_finite())
        }
        Quantization::Lp { measure, p, inner } => {
            let nf = inner.dim();
            let q = p.conjugate();
            let mut parts = Vec::with_capacity(measure.len());
            for t in 0..measure.len() {
                parts.push(underlying_dual_upper(&f[t * nf..(t + 1) * nf], inner, opts)?);
            }
            // Dual of the weighted l_p sum: (sum_t mu_t (d_t / mu_t)^q)^(1/q).
            Some(if p.is_inf() {
                parts.iter().sum()
            } else if q.is_inf() {
                parts
                    .iter()
                    .zip(&measure.atom_weights)
                    .map(|(d, w)| d / w)
                    .fold(0.0, f64::max)
            } else {
                let qv = q.value();
                let scaled: Vec<f64> = parts
                    .iter()
                    .zip(&measure.atom_weights)
                    .map(|(d, w)| (d / w) * w.powf(1.0 / qv))
                    .collect();
                lp_norm(&scaled, q)
            })
        }
        _ => None,
    }
}

/// Functional with certified underlying dual norm <= 1 attaining (or
/// approaching) the underlying norm of x; None when the space admits no
/// certified construction.
pub fn underlying_norming_functional(
    x: &[C64],
    space: &PQSpace,
    opts: &EngineOpts,
) -> Result<Option<Vec<C64>>> {
    Ok(match &space.quant {
        Quantization::Schatten { .. } | Quantization::Min => {
            Some(space.base.norming_functional(x)?)
        }
        Quantization::Lp { measure, p, inner } => {
            let nf = inner.dim();
            let mut per_atom = Vec::with_capacity(measure.len());
            let mut norms = Vec::with_capacity(measure.len());
            for t in 0..measure.len() {
                let slice = &x[t * nf..(t + 1) * nf];
                let g = match underlying_norming_functional(slice, inner, opts)? {
                    Some(g) => g,
                    None => return Ok(None),
                };
                norms.push(underlying_norm_interval(slice, inner, opts)?.lower);
                per_atom.push(g);
            }
            let total = weighted_lp(&norms, &measure.atom_weights, *p);
            if total == 0.0 {
                return Ok(Some(vec![C64::default(); x.len()]));
            }
            let mut out = vec![C64::default(); x.len()];
            if p.is_inf() {
                // spike at the largest atom
                let (tbest, _) = norms
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap();
                for j in 0..nf {
                    out[tbest * nf + j] = per_atom[tbest][j];
                }
            } else {
                let pv = p.value();
                for t in 0..measure.len() {
                    let scale = measure.atom_weights[t] * (norms[t] / total).powf(pv - 1.0);
                    for j in 0..nf {
                        out[t * nf + j] = per_atom[t][j] * scale;
                    }
                }
            }
            Some(out)
        }
        Quantization::PrTensor { left, right } => {
            // Product functional from the dominant product component.
            let (nl, nr) = (left.dim(), right.dim());
            let rect = crate::svd::svd_rect(nl, nr, x);
            if rect.s.is_empty() || rect.s[0] == 0.0 {
                return Ok(Some(vec![C64::default(); x.len()]));
            }
            let fl = left.norming_functional(&rect.u[0])?;
            let xr: Vec<C64> = rect.v[0].iter().map(|z| z.conj()).collect();
            let fr = match underlying_norming_functional(&xr, right, opts)? {
                Some(fr) => fr,
                None => return Ok(None),
            };
            let mut out = vec![C64::default(); nl * nr];
            for i in 0..nl {
                for j in 0..nr {
                    out[i * nr + j] = fl[i] * fr[j];
                }
            }
            Some(out)
        }
        _ => None,
    })
}

/// Vector with underlying norm <= 1 maximizing |f(x)| for closed-form kinds.
pub fn underlying_norming_direction(
    f: &[C64],
    space: &PQSpace,
    opts: &EngineOpts,
) -> Result<Option<Vec<C64>>> {
    Ok(match &space.quant {
        Quantization::Schatten { .. } | Quantization::Min => {
            Some(space.base.norming_direction(f)?)
        }
        Quantization::Lp { measure, p, inner } => {
            let nf = inner.dim();
            let mut per_atom = Vec::with_capacity(measure.len());
            let mut duals = Vec::with_capacity(measure.len());
            for t in 0..measure.len() {
                let slice = &f[t * nf..(t + 1) * nf];
                let v = match underlying_norming_direction(slice, inner, opts)? {
                    Some(v) => v,
                    None => return Ok(None),
                };
                let d = match underlying_dual_upper(slice, inner, opts) {
                    Some(d) => d,
                    None => return Ok(None),
                };
                per_atom.push(v);
                duals.push(d);
            }
            let mut out = vec![C64::default(); f.len()];
            if p.is_inf() {
                // dual is the weighted sum; spread mass over all atoms
                for t in 0..measure.len() {
                    for j in 0..nf {
                        out[t * nf + j] = per_atom[t][j];
                    }
                }
            } else if p.value() == 1.0 {
                let (tbest, _) = duals
                    .iter()
                    .zip(&measure.atom_weights)
                    .map(|(d, w)| d / w)
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                for j in 0..nf {
                    out[tbest * nf + j] = per_atom[tbest][j] / measure.atom_weights[tbest];
                }
            } else {
                // Hölder weights on the per-atom dual values in the
                // mu^{1/p}-rescaled coordinates where the norm is plain l_p.
                let ratios: Vec<f64> = duals
                    .iter()
                    .zip(&measure.atom_weights)
                    .map(|(d, w)| d / w.powf(1.0 / p.value()))
                    .collect();
                let amps = holder_extremal(
                    &ratios.iter().map(|&r| C64::new(r, 0.0)).collect::<Vec<_>>(),
                    *p,
                );
                for t in 0..measure.len() {
                    // amplitude divided by mu^{1/p} so the weighted norm is one
                    let scale = amps[t].re / measure.atom_weights[t].powf(1.0 / p.value());
                    for j in 0..nf {
                        out[t * nf + j] = per_atom[t][j] * scale;
                    }
                }
            }
            Some(out)
        }
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;
    use crate::spaces::MeasureSpace;

    #[test]
    fn lp_underlying_norm_aggregates() {
        // L_1 over atoms {1, 0.5} with scalar max fibers: weighted l_1.
        let space = PQSpace::lp(
            MeasureSpace::new(vec![1.0, 0.5]).unwrap(),
            Exponent::ONE,
            PQSpace::scalar_schatten(Exponent::INF),
        );
        let opts = EngineOpts::default();
        let x = vec![c(2.0, 0.0), c(4.0, 0.0)];
        let iv = underlying_norm_interval(&x, &space, &opts).unwrap();
        assert!((iv.lower - 4.0).abs() < 1e-12 && (iv.upper - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lp_norming_functional_is_unit_and_attaining() {
        let space = PQSpace::lp(
            MeasureSpace::new(vec![1.0, 0.5, 2.0]).unwrap(),
            Exponent::TWO,
            PQSpace::scalar_schatten(Exponent::TWO),
        );
        let opts = EngineOpts::default();
        let x = vec![c(1.0, 1.0), c(-2.0, 0.0), c(0.5, 0.0)];
        let norm = underlying_norm_interval(&x, &space, &opts).unwrap().upper;
        let f = underlying_norming_functional(&x, &space, &opts).unwrap().unwrap();
        let pairing: C64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((pairing.re - norm).abs() < 1e-9 * (1.0 + norm));
        let dual = underlying_dual_upper(&f, &space, &opts).unwrap();
        assert!(dual <= 1.0 + 1e-9, "dual {dual}");
    }

    #[test]
    fn lp_norming_direction_attains_dual() {
        for p in [Exponent::ONE, Exponent::TWO, Exponent::INF] {
            let space = PQSpace::lp(
                MeasureSpace::new(vec![1.0, 0.5]).unwrap(),
                p,
                PQSpace::scalar_schatten(Exponent::INF),
            );
            let opts = EngineOpts::default();
            let f = vec![c(1.0, 0.0), c(-3.0, 0.5)];
            let dual = underlying_dual_upper(&f, &space, &opts).unwrap();
            let v = underlying_norming_direction(&f, &space, &opts).unwrap().unwrap();
            let vnorm = underlying_norm_interval(&v, &space, &opts).unwrap().upper;
            assert!(vnorm <= 1.0 + 1e-9, "p={p:?} vnorm {vnorm}");
            let pairing: C64 = f.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!(
                (pairing.norm() - dual).abs() <= 1e-9 * (1.0 + dual),
                "p={p:?} pairing {} dual {dual}",
                pairing.norm()
            );
        }
    }
}
