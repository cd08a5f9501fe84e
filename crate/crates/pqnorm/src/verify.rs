//! Property-suite runner: every structural identity of the quantized norms
//! is bound to a named, seeded, parameterized numerical check that reports a
//! margin against its tolerance.  Reports are deterministic per seed and
//! order-stable by check name.

use serde::{Deserialize, Serialize};

use crate::amp::{
    amp_diamond, module_action, scalar_diamond, uncurry, AmpElem, BioperatorDesc, OperatorDesc,
    Side,
};
use crate::engines::{
    self, cb_bilinear_estimate, cb_norm_estimate, cbspace_norm, op_upper, pop_lower, pop_upper,
    pq_norm, vn_difference, vn_family, EngineOpts,
};
use crate::error::{Error, Result};
use crate::matrix::{
    c, gaussian_vector, pinch_direct, pinch_roots_of_unity, random_orthogonal_projections,
    CMatrix, Exponent, C64,
};
use crate::spaces::{BaseSpace, MeasureSpace, PQSpace};

use rand_chacha::ChaCha20Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    pub fn sizes(self) -> Sizes {
        match self {
            Profile::Quick => Sizes { d: 2, n: 2 },
            Profile::Full => Sizes { d: 4, n: 4 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    /// Maximum coefficient level used by the check.
    pub d: usize,
    /// Maximum base dimension / family size used by the check.
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The margin is inside tolerance but a certificate gap exceeded it, so
    /// the check could not actually confirm the identity.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Closed-form numerics; tolerance is fixed.
    Exact,
    /// Depends on optimizer-found bounds; tolerance may be overridden.
    Optimizer,
}

pub struct CheckContext {
    pub seed: u64,
    pub sizes: Sizes,
    pub opts: EngineOpts,
    pub stream: u64,
}

impl CheckContext {
    pub fn rng(&self) -> ChaCha20Rng {
        crate::engines::search::stream_rng(self.seed, self.stream)
    }
}

pub struct CheckOutcome {
    /// Worst violation over all sampled instances; <= tolerance passes.
    pub margin: f64,
    /// Per-instance margins, in sampling order.
    pub samples: Vec<f64>,
    /// True when a deciding certificate gap exceeded the tolerance.
    pub gap_exceeded: bool,
}

impl CheckOutcome {
    fn from_samples(samples: Vec<f64>) -> CheckOutcome {
        let margin = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        CheckOutcome { margin, samples, gap_exceeded: false }
    }

    fn with_gap(mut self, gap_exceeded: bool) -> CheckOutcome {
        self.gap_exceeded = gap_exceeded;
        self
    }
}

type Runner = fn(&CheckContext) -> Result<CheckOutcome>;

pub struct CheckSpec {
    pub name: &'static str,
    pub anchor: &'static str,
    pub kind: CheckKind,
    pub tolerance: f64,
    runner: Runner,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub anchor: String,
    pub seed: u64,
    pub sizes: Sizes,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub profile: Profile,
    pub seed: u64,
    pub check_count: usize,
    pub all_pass: bool,
    pub checks: Vec<CheckReport>,
}

fn base_opts(seed: u64) -> EngineOpts {
    EngineOpts { seed, budget: 160, level_cap: 3, tol: 1e-3 }
}

/// Leading tag of a check name: the first segments of the form
/// word_digit_digit (e.g. "prop_4_6"), or the whole name.
fn name_tag(name: &str) -> String {
    let parts: Vec<&str> = name.split('_').collect();
    if parts.len() >= 3 && parts[1].chars().all(|c| c.is_ascii_digit()) {
        let mut end = 2;
        if parts.len() > 2 && parts[2].chars().all(|c| c.is_ascii_digit()) {
            end = 3;
        }
        parts[..end].join("_")
    } else {
        name.to_string()
    }
}

/// Run one registered check.  Names resolve exactly or through their
/// proposition tag (so "prop_4_6" finds "prop_4_6_diamond_multiplicativity").
pub fn run_check(
    name: &str,
    seed: u64,
    sizes: Sizes,
    tol_override: Option<f64>,
) -> Result<CheckReport> {
    let specs = registry();
    let lookup = specs
        .iter()
        .enumerate()
        .find(|(_, s)| s.name == name)
        .or_else(|| {
            let tag = name_tag(name);
            let mut matches = specs.iter().enumerate().filter(|(_, s)| name_tag(s.name) == tag);
            match (matches.next(), matches.next()) {
                (Some(hit), None) => Some(hit),
                _ => None,
            }
        });
    let (idx, spec) = lookup.ok_or_else(|| Error::UnknownCheck(name.to_string()))?;
    let ctx = CheckContext {
        seed,
        sizes,
        opts: base_opts(seed),
        stream: 0x1000 + (idx as u64) * 0x10,
    };
    let outcome = (spec.runner)(&ctx)?;
    let tolerance = match (spec.kind, tol_override) {
        (CheckKind::Optimizer, Some(t)) => t,
        _ => spec.tolerance,
    };
    let verdict = if outcome.margin > tolerance {
        Verdict::Fail
    } else if outcome.gap_exceeded {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(CheckReport {
        check: spec.name.to_string(),
        anchor: spec.anchor.to_string(),
        seed,
        sizes,
        margin: outcome.margin,
        tolerance,
        verdict,
        samples: outcome.samples,
    })
}

/// Run the whole registry; quick profiles use minimal sizes.
pub fn run_all(seed: u64, profile: Profile, tol_override: Option<f64>) -> Result<SuiteReport> {
    let sizes = profile.sizes();
    let mut checks: Vec<CheckReport> = registry()
        .iter()
        .map(|spec| run_check(spec.name, seed, sizes, tol_override))
        .collect::<Result<_>>()?;
    checks.sort_by(|a, b| a.check.cmp(&b.check));
    let all_pass = checks.iter().all(|c| c.verdict == Verdict::Pass);
    Ok(SuiteReport { profile, seed, check_count: checks.len(), all_pass, checks })
}

// ---------------------------------------------------------------------------
// instance generators
// ---------------------------------------------------------------------------

fn random_elem(rng: &mut ChaCha20Rng, space: &PQSpace, terms: usize, level: usize) -> AmpElem {
    let list = (0..terms)
        .map(|_| (CMatrix::random_gaussian(rng, level), gaussian_vector(rng, space.dim())))
        .collect();
    AmpElem::new(space.clone(), list).unwrap()
}

/// Orthogonal-support pair: coefficients compressed into complementary
/// diagonal blocks of a common level.
fn orthogonal_support_pair(
    rng: &mut ChaCha20Rng,
    space: &PQSpace,
    block: usize,
) -> (AmpElem, AmpElem) {
    let level = 2 * block;
    let mut p = CMatrix::zeros(level);
    let mut q = CMatrix::zeros(level);
    for i in 0..block {
        p[(i, i)] = c(1.0, 0.0);
        q[(block + i, block + i)] = c(1.0, 0.0);
    }
    let u = random_elem(rng, space, 2, level);
    let v = random_elem(rng, space, 2, level);
    (module_action(&p, &u, &p), module_action(&q, &v, &q))
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / (1.0 + scale.abs())
}

// ---------------------------------------------------------------------------
// check runners
// ---------------------------------------------------------------------------

fn check_def_2_1_contractivity(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let spaces = [
        PQSpace::l1_sequence(ctx.sizes.n),
        PQSpace::schatten(Exponent::TWO, BaseSpace::l1(ctx.sizes.n)),
        PQSpace::scalar_schatten(Exponent::new(1.5).unwrap()),
    ];
    let mut samples = Vec::new();
    for space in &spaces {
        for _ in 0..4 {
            let u = random_elem(&mut rng, space, 2, ctx.sizes.d);
            let a = CMatrix::random_gaussian(&mut rng, ctx.sizes.d);
            let b = CMatrix::random_gaussian(&mut rng, ctx.sizes.d);
            let lhs = pq_norm(&module_action(&a, &u, &b), &ctx.opts)?.upper;
            let rhs = a.op_norm() * pq_norm(&u, &ctx.opts)?.upper * b.op_norm();
            samples.push(rel(lhs - rhs, rhs));
        }
    }
    // zero element: trivially contractive
    let z = AmpElem::zero(spaces[0].clone());
    let az = module_action(&CMatrix::identity(2), &z, &CMatrix::identity(2));
    samples.push(pq_norm(&az, &ctx.opts)?.upper);
    Ok(CheckOutcome::from_samples(samples))
}

fn check_ex_2_7_max_is_l1(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let space = PQSpace::max(BaseSpace::l1(ctx.sizes.n.max(2)));
    let mut samples = Vec::new();
    for _ in 0..8 {
        let (u, v) = orthogonal_support_pair(&mut rng, &space, ctx.sizes.d.max(2) / 2 + 1);
        let sum = pq_norm(&u.add(&v)?, &ctx.opts)?;
        let nu = pq_norm(&u, &ctx.opts)?;
        let nv = pq_norm(&v, &ctx.opts)?;
        let expect = nu.upper + nv.upper;
        samples.push((sum.point() - expect).abs() / (1.0 + expect));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_2_6_cross_norm(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let mut samples = Vec::new();
    for pv in [1.0, 2.0, f64::INFINITY] {
        let p = Exponent::new(pv).unwrap();
        // upper estimate on a general base
        let space = PQSpace::schatten(p, BaseSpace::l2(ctx.sizes.n));
        let a = CMatrix::random_gaussian(&mut rng, ctx.sizes.d);
        let x = gaussian_vector(&mut rng, ctx.sizes.n);
        let elem = AmpElem::elementary(space.clone(), a.clone(), x.clone())?;
        let cert = pq_norm(&elem, &ctx.opts)?;
        let bound = a.schatten_norm(p) * space.base.norm(&x)?;
        samples.push(rel(cert.upper - bound, bound));
        // L^p equality on the scalar space
        let scalar = PQSpace::scalar_schatten(p);
        let b = CMatrix::random_gaussian(&mut rng, ctx.sizes.d);
        let cert =
            pq_norm(&AmpElem::elementary(scalar, b.clone(), vec![c(1.0, 0.0)])?, &ctx.opts)?;
        samples.push(rel((cert.point() - b.schatten_norm(p)).abs(), b.schatten_norm(p)));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_3_2_functional_cb(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut samples = Vec::new();
    for (pv, qv) in [(1.0, 2.0), (2.0, 2.0), (2.0, f64::INFINITY), (1.0, f64::INFINITY)] {
        let op = OperatorDesc::requantize(
            PQSpace::scalar_schatten(Exponent::new(pv).unwrap()),
            PQSpace::scalar_schatten(Exponent::new(qv).unwrap()),
        )?;
        let est = cb_norm_estimate(&op, ctx.sizes.d.min(4), &ctx.opts)?;
        samples.push((est.lower - 1.0).abs());
    }
    // a bounded functional on a max-quantized space reaches its norm
    let mut rng = ctx.rng();
    let dom = PQSpace::max(BaseSpace::l2(ctx.sizes.n));
    let row = gaussian_vector(&mut rng, ctx.sizes.n);
    let f = OperatorDesc::functional(
        dom.clone(),
        PQSpace::scalar_schatten(Exponent::INF),
        row.clone(),
    )?;
    let est = cb_norm_estimate(&f, ctx.sizes.d.min(3), &ctx.opts)?;
    let expect = dom.base.dual_norm_interval(&row)?.upper;
    samples.push((est.lower - expect).abs() / (1.0 + expect));
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_3_3_growth(ctx: &CheckContext) -> Result<CheckOutcome> {
    let op = OperatorDesc::requantize(
        PQSpace::scalar_schatten(Exponent::TWO),
        PQSpace::scalar_schatten(Exponent::ONE),
    )?;
    let cap = ctx.sizes.d.min(4);
    let est = cb_norm_estimate(&op, cap, &ctx.opts)?;
    let samples = est.profile.iter().map(|(d, v)| (*d as f64).sqrt() - v).collect();
    Ok(CheckOutcome::from_samples(samples))
}

fn check_pinching_identity(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let mut samples = Vec::new();
    let d = ctx.sizes.d.max(2).min(4);
    for count in 2..=ctx.sizes.n.min(d) {
        for _ in 0..8 {
            let a = CMatrix::random_gaussian(&mut rng, d);
            let projs = random_orthogonal_projections(&mut rng, d, count);
            let averaged = pinch_roots_of_unity(&a, &projs, count)?;
            let direct = pinch_direct(&a, &projs);
            samples.push(averaged.sub(&direct).op_norm());
        }
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_f_times_g(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let e = PQSpace::max(BaseSpace::l2(ctx.sizes.n));
    let f_space = PQSpace::max(BaseSpace::l1(ctx.sizes.n));
    let cod = PQSpace::scalar_schatten(Exponent::INF);
    let fv = gaussian_vector(&mut rng, ctx.sizes.n);
    let gv = gaussian_vector(&mut rng, ctx.sizes.n);
    let rho = BioperatorDesc::product_functional(
        e.clone(),
        f_space.clone(),
        cod,
        fv.clone(),
        gv.clone(),
    )?;
    let expect =
        e.base.dual_norm_interval(&fv)?.upper * f_space.base.dual_norm_interval(&gv)?.upper;
    let (est, _) = cb_bilinear_estimate(&rho, ctx.sizes.d.min(2), &ctx.opts)?;
    Ok(CheckOutcome::from_samples(vec![(est.lower - expect).abs() / (1.0 + expect)]))
}

fn check_prop_4_3_i(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let space = PQSpace::l1_sequence(ctx.sizes.n);
    let mut samples = Vec::new();
    for _ in 0..5 {
        let u = random_elem(&mut rng, &space, 2, ctx.sizes.d);
        let a = CMatrix::random_gaussian(&mut rng, ctx.sizes.d);
        let left = pq_norm(&scalar_diamond(&a, &u, Side::Left), &ctx.opts)?.point();
        let right = pq_norm(&scalar_diamond(&a, &u, Side::Right), &ctx.opts)?.point();
        samples.push(rel((left - right).abs(), left));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_4_3_ii(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let space = PQSpace::l1_sequence(ctx.sizes.n);
    let mut samples = Vec::new();
    for _ in 0..5 {
        let u = random_elem(&mut rng, &space, 2, ctx.sizes.d);
        let xi = gaussian_vector(&mut rng, ctx.sizes.d);
        let eta = gaussian_vector(&mut rng, ctx.sizes.d);
        let q = CMatrix::rank_one(&xi, &eta)?;
        let qn = q.op_norm();
        let lhs = pq_norm(&scalar_diamond(&q, &u, Side::Left), &ctx.opts)?.point();
        let rhs = qn * pq_norm(&u, &ctx.opts)?.point();
        samples.push(rel((lhs - rhs).abs(), rhs));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_4_3_iii(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let mut samples = Vec::new();
    for pv in [1.0, 2.0, f64::INFINITY] {
        let p = Exponent::new(pv).unwrap();
        // an L^p ambient: the scalar ^(p)C space
        let space = PQSpace::scalar_schatten(p);
        for _ in 0..3 {
            let u = random_elem(&mut rng, &space, 1, ctx.sizes.d);
            let a = CMatrix::random_gaussian(&mut rng, ctx.sizes.d);
            let lhs = pq_norm(&scalar_diamond(&a, &u, Side::Left), &ctx.opts)?.upper;
            let bound = a.schatten_norm(p) * pq_norm(&u, &ctx.opts)?.upper;
            samples.push(rel(lhs - bound, bound));
        }
    }
    // the universal trace-norm bound on a general ambient
    let space = PQSpace::l1_sequence(ctx.sizes.n);
    let u = random_elem(&mut rng, &space, 2, ctx.sizes.d);
    let a = CMatrix::random_gaussian(&mut rng, ctx.sizes.d);
    let lhs = pq_norm(&scalar_diamond(&a, &u, Side::Left), &ctx.opts)?.upper;
    let bound = a.trace_norm() * pq_norm(&u, &ctx.opts)?.upper;
    samples.push(rel(lhs - bound, bound));
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_4_4(ctx: &CheckContext) -> Result<CheckOutcome> {
    // rho: L_p(X, ^(p)C) x F -> L_p(X, F) with F = ^(p)C, (z, y) -> z(.) y.
    let p = Exponent::TWO;
    let atoms = MeasureSpace::new(vec![1.0, 0.5]).unwrap();
    let fiber = PQSpace::scalar_schatten(p);
    let left = PQSpace::lp(atoms.clone(), p, fiber.clone());
    let right = fiber.clone();
    let cod = PQSpace::lp(atoms, p, fiber);
    let n = left.dim();
    let mut coeffs = vec![C64::default(); n * n];
    for t in 0..n {
        coeffs[t * n + t] = c(1.0, 0.0);
    }
    let rho = BioperatorDesc::new(left, right, cod, coeffs)?;
    let (est, _) = cb_bilinear_estimate(&rho, ctx.sizes.d.min(2), &ctx.opts)?;
    Ok(CheckOutcome::from_samples(vec![est.lower - 1.0]))
}

fn check_prop_4_5(ctx: &CheckContext) -> Result<CheckOutcome> {
    // canonical ϑ: ^(p)E x F -> E ⊗_pr F with F p-convex.
    let p = Exponent::TWO;
    let q = Exponent::INF;
    let e = PQSpace::schatten(p, BaseSpace::l2(2));
    let f = PQSpace::scalar_schatten(q);
    let cod = PQSpace::pr_tensor(BaseSpace::l2(2), f.clone());
    let theta = BioperatorDesc::canonical(e, f, cod)?;
    let (est, _) = cb_bilinear_estimate(&theta, ctx.sizes.d.min(2), &ctx.opts)?;
    Ok(CheckOutcome::from_samples(vec![est.lower - 1.0]))
}

fn check_prop_4_6(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let mut samples = Vec::new();
    let d = ctx.sizes.d.max(2).min(3);
    for pv in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
        let p = Exponent::new(pv).unwrap();
        for _ in 0..6 {
            let a = CMatrix::random_gaussian(&mut rng, d);
            let b = CMatrix::random_gaussian(&mut rng, d);
            let lhs = a.diamond(&b).schatten_norm(p);
            let rhs = a.schatten_norm(p) * b.schatten_norm(p);
            samples.push((lhs - rhs).abs() / rhs.max(1e-300));
        }
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_4_7(ctx: &CheckContext) -> Result<CheckOutcome> {
    // ϑ: ^(p)E x ^(q)F -> ^(r)(E ⊗ F), r = max{p, q}.
    let p = Exponent::ONE;
    let q = Exponent::TWO;
    let r = Exponent::TWO;
    let e = PQSpace::schatten(p, BaseSpace::l1(2));
    let f = PQSpace::schatten(q, BaseSpace::l1(2));
    let cod = PQSpace::schatten(r, BaseSpace::tensor(BaseSpace::l1(2), BaseSpace::l1(2)));
    let theta = BioperatorDesc::canonical(e, f, cod)?;
    let (est, _) = cb_bilinear_estimate(&theta, ctx.sizes.d.min(2), &ctx.opts)?;
    Ok(CheckOutcome::from_samples(vec![est.lower - 1.0]))
}

fn check_eq_5_5(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let e = PQSpace::l1_sequence(2);
    let f = PQSpace::scalar_schatten(Exponent::TWO);
    let ambient = PQSpace::pop_tensor(e.clone(), f.clone());
    let mut samples = Vec::new();
    for _ in 0..6 {
        let u = random_elem(&mut rng, &e, 1, ctx.sizes.d.min(2));
        let v = random_elem(&mut rng, &f, 1, ctx.sizes.d.min(2));
        let w = amp_diamond(&u, &v, &ambient)?;
        let (ub, _) = pop_upper(&w, &ctx.opts)?;
        let bound = pq_norm(&u, &ctx.opts)?.upper * pq_norm(&v, &ctx.opts)?.upper;
        samples.push(rel(ub - bound, bound));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_eq_5_6(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let e = PQSpace::max(BaseSpace::l2(ctx.sizes.n));
    let f = PQSpace::max(BaseSpace::l2(ctx.sizes.n));
    let ambient = PQSpace::pop_tensor(e.clone(), f.clone());
    let mut samples = Vec::new();
    for _ in 0..6 {
        let x = gaussian_vector(&mut rng, ctx.sizes.n);
        let y = gaussian_vector(&mut rng, ctx.sizes.n);
        let mut z = vec![C64::default(); ctx.sizes.n * ctx.sizes.n];
        for s in 0..ctx.sizes.n {
            for t in 0..ctx.sizes.n {
                z[s * ctx.sizes.n + t] = x[s] * y[t];
            }
        }
        let elem = AmpElem::elementary(ambient.clone(), CMatrix::identity(1), z)?;
        let cert = pq_norm(&elem, &ctx.opts)?;
        let bound = e.base.norm(&x)? * f.base.norm(&y)?;
        samples.push(rel(cert.upper - bound, bound));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_thm_6_1(ctx: &CheckContext) -> Result<CheckOutcome> {
    // ^(p)E ⊗_pop F = E ⊗_pr F for p-convex F; E has an l_1 base so the
    // pr value is exact.
    let mut rng = ctx.rng();
    let p = Exponent::TWO;
    let e = PQSpace::schatten(p, BaseSpace::l1(2));
    let f = PQSpace::scalar_schatten(Exponent::INF);
    let ambient = PQSpace::pop_tensor(e.clone(), f.clone());
    let pr_space = PQSpace::pr_tensor(BaseSpace::l1(2), f);
    let mut samples = Vec::new();
    let mut gap = false;
    for _ in 0..4 {
        let elem = random_elem(&mut rng, &ambient, 2, ctx.sizes.d.min(2));
        let pop = pq_norm(&elem, &ctx.opts)?;
        let pr_elem = AmpElem::new(
            pr_space.clone(),
            elem.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect(),
        )?;
        let pr = pq_norm(&pr_elem, &ctx.opts)?;
        let scale = 1.0 + pr.point().abs();
        samples.push((pop.upper - pr.upper).max(pr.lower - pop.lower) / scale);
        gap |= pop.gap() > 1e-3 * scale || pr.gap() > 1e-3 * scale;
    }
    Ok(CheckOutcome::from_samples(samples).with_gap(gap))
}

fn check_cor_6_2(ctx: &CheckContext) -> Result<CheckOutcome> {
    // ^(p)C ⊗_pop F = F via λ ⊗ x -> λ x.
    let mut rng = ctx.rng();
    let p = Exponent::ONE;
    let e = PQSpace::scalar_schatten(p);
    let f = PQSpace::scalar_schatten(Exponent::TWO);
    let ambient = PQSpace::pop_tensor(e, f.clone());
    let mut samples = Vec::new();
    for _ in 0..4 {
        let elem = random_elem(&mut rng, &ambient, 2, ctx.sizes.d.min(2));
        let pop = pq_norm(&elem, &ctx.opts)?;
        let image = AmpElem::new(
            f.clone(),
            elem.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect(),
        )?;
        let expect = pq_norm(&image, &ctx.opts)?.point();
        let scale = 1.0 + expect;
        samples.push((pop.lower - expect).max(expect - pop.upper) / scale);
        samples.push(pop.gap() / scale);
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_cor_6_3(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let d = ctx.sizes.d.max(2).min(3);
    let a = CMatrix::random_gaussian(&mut rng, d);
    let mut samples = Vec::new();
    for (pv, qv) in [(1.0, 2.0), (2.0, f64::INFINITY), (1.0, f64::INFINITY), (2.0, 2.0)] {
        let space = PQSpace::pop_tensor(
            PQSpace::scalar_schatten(Exponent::new(pv).unwrap()),
            PQSpace::scalar_schatten(Exponent::new(qv).unwrap()),
        );
        let elem = AmpElem::elementary(space, a.clone(), vec![c(1.0, 0.0)])?;
        let expect = a.schatten_norm(Exponent::new(pv.max(qv)).unwrap());
        let (ub, _) = pop_upper(&elem, &ctx.opts)?;
        let (lb, _) = pop_lower(&elem, &ctx.opts)?;
        samples.push(rel(ub - expect, expect));
        samples.push(rel(expect - lb, expect));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_thm_6_5(ctx: &CheckContext) -> Result<CheckOutcome> {
    // ^(p)E ⊗_pop ^(p)F = ^(p)(E ⊗_pr F) with l_1 bases: exact both sides.
    let mut rng = ctx.rng();
    let p = Exponent::TWO;
    let e = PQSpace::schatten(p, BaseSpace::l1(2));
    let f = PQSpace::schatten(p, BaseSpace::l1(2));
    let ambient = PQSpace::pop_tensor(e, f);
    let merged = PQSpace::schatten(p, BaseSpace::tensor(BaseSpace::l1(2), BaseSpace::l1(2)));
    let mut samples = Vec::new();
    for _ in 0..4 {
        let elem = random_elem(&mut rng, &ambient, 2, ctx.sizes.d.min(2));
        let pop = pq_norm(&elem, &ctx.opts)?;
        let image = AmpElem::new(
            merged.clone(),
            elem.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect(),
        )?;
        let expect = pq_norm(&image, &ctx.opts)?.point();
        let scale = 1.0 + expect;
        samples.push((pop.lower - expect).max(expect - pop.upper) / scale);
        samples.push(pop.gap() / scale);
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_cor_6_6(ctx: &CheckContext) -> Result<CheckOutcome> {
    // E_max ⊗_pop F_max = (E ⊗_pr F)_max over l_1 squares.
    let mut rng = ctx.rng();
    let e = PQSpace::max(BaseSpace::l1(2));
    let ambient = PQSpace::pop_tensor(e.clone(), e.clone());
    let merged = PQSpace::max(BaseSpace::tensor(BaseSpace::l1(2), BaseSpace::l1(2)));
    let mut samples = Vec::new();
    for _ in 0..4 {
        let elem = random_elem(&mut rng, &ambient, 2, ctx.sizes.d.min(2));
        let pop = pq_norm(&elem, &ctx.opts)?;
        let image = AmpElem::new(
            merged.clone(),
            elem.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect(),
        )?;
        let expect = pq_norm(&image, &ctx.opts)?.point();
        let scale = 1.0 + expect;
        samples.push((pop.lower - expect).max(expect - pop.upper) / scale);
        samples.push(pop.gap() / scale);
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_6_7(ctx: &CheckContext) -> Result<CheckOutcome> {
    // rho: L_p(X, E) x L_p(Y, F) -> L_p(X x Y, E ⊗_pop F) is completely
    // contractive; E = F = ^(inf)C.
    let p = Exponent::TWO;
    let fiber = PQSpace::scalar_schatten(Exponent::INF);
    let mx = MeasureSpace::new(vec![1.0, 0.5]).unwrap();
    let my = MeasureSpace::new(vec![2.0]).unwrap();
    let left = PQSpace::lp(mx.clone(), p, fiber.clone());
    let right = PQSpace::lp(my.clone(), p, fiber.clone());
    let mut kron_weights = Vec::new();
    for a in &mx.atom_weights {
        for b in &my.atom_weights {
            kron_weights.push(a * b);
        }
    }
    let inner_pop = PQSpace::pop_tensor(fiber.clone(), fiber);
    let cod = PQSpace::lp(MeasureSpace::new(kron_weights).unwrap(), p, inner_pop);
    let (nx, ny) = (left.dim(), right.dim());
    let ng = cod.dim();
    let mut coeffs = vec![C64::default(); ng * nx * ny];
    for s in 0..nx {
        for t in 0..ny {
            let g = s * ny + t;
            coeffs[g * nx * ny + s * ny + t] = c(1.0, 0.0);
        }
    }
    let rho = BioperatorDesc::new(left, right, cod, coeffs)?;
    let (est, _) = cb_bilinear_estimate(&rho, ctx.sizes.d.min(2), &ctx.opts)?;
    Ok(CheckOutcome::from_samples(vec![est.lower - 1.0]))
}

fn check_thm_6_8(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let measure = MeasureSpace::new(vec![1.0, 0.5]).unwrap();
    let fiber = PQSpace::scalar_schatten(Exponent::INF);
    let e = PQSpace::lp(measure.clone(), Exponent::ONE, fiber);
    let ambient = PQSpace::pop_tensor(e.clone(), e.clone());
    let mut samples = Vec::new();
    for _ in 0..4 {
        let elem = random_elem(&mut rng, &ambient, 2, ctx.sizes.d.min(2));
        let cells = elem.basis_components();
        let mut exact = 0.0;
        for s in 0..2 {
            for t in 0..2 {
                exact +=
                    measure.atom_weights[s] * measure.atom_weights[t] * cells[s * 2 + t].op_norm();
            }
        }
        let cert = pq_norm(&elem, &ctx.opts)?;
        let scale = exact.max(1e-300);
        samples.push((cert.lower - exact).max(exact - cert.upper) / scale);
        samples.push(cert.gap() / scale);
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_cor_6_10(ctx: &CheckContext) -> Result<CheckOutcome> {
    // L_1(X, ^(p)C) ⊗_pop F = L_1(X, F) with F = ^(p)C.
    let mut rng = ctx.rng();
    let p = Exponent::TWO;
    let measure = MeasureSpace::new(vec![1.0, 0.5]).unwrap();
    let fiber = PQSpace::scalar_schatten(p);
    let e = PQSpace::lp(measure.clone(), Exponent::ONE, fiber.clone());
    let ambient = PQSpace::pop_tensor(e, fiber.clone());
    let image_space = PQSpace::lp(measure.clone(), Exponent::ONE, fiber);
    let mut samples = Vec::new();
    for _ in 0..4 {
        let elem = random_elem(&mut rng, &ambient, 2, ctx.sizes.d.min(2));
        let cert = pq_norm(&elem, &ctx.opts)?;
        // exact image value: the base coordinates already match L_1(X, F)
        let image = AmpElem::new(
            image_space.clone(),
            elem.terms.iter().map(|t| (t.coeff.clone(), t.vec.clone())).collect(),
        )?;
        let expect = pq_norm(&image, &ctx.opts)?.point();
        let scale = expect.max(1e-300);
        samples.push((cert.lower - expect).max(expect - cert.upper) / scale);
        samples.push(cert.gap() / scale);
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_prop_7_1(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let dom = PQSpace::max(BaseSpace::l2(2));
    let cod = PQSpace::scalar_schatten(Exponent::INF);
    let row = gaussian_vector(&mut rng, 2);
    let phi_op = OperatorDesc::functional(dom.clone(), cod.clone(), row)?;
    let cb = PQSpace::cb_space(dom, cod);
    let vecphi = crate::amp::operator_as_cb_vector(&phi_op)?;
    let elem = AmpElem::elementary(cb, CMatrix::unit(2, 0, 0), vecphi)?;
    let direct = cb_norm_estimate(&phi_op, ctx.sizes.d.min(3), &ctx.opts)?.lower;
    let via_space = cbspace_norm(&elem, ctx.sizes.d.min(3), &ctx.opts)?.lower;
    Ok(CheckOutcome::from_samples(vec![(direct - via_space).abs() / (1.0 + direct)]))
}

fn check_prop_7_2(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let dom = PQSpace::scalar_schatten(Exponent::ONE);
    let cod = PQSpace::scalar_schatten(Exponent::TWO);
    let cb = PQSpace::cb_space(dom, cod);
    let mut samples = Vec::new();
    for _ in 0..3 {
        let b = CMatrix::random_gaussian(&mut rng, 2);
        let phi = AmpElem::elementary(cb.clone(), b.clone(), vec![c(1.0, 0.0)])?;
        let expect = b.schatten_norm(Exponent::TWO);
        let exact = pq_norm(&phi, &ctx.opts)?;
        samples.push(rel((exact.point() - expect).abs(), expect));
        let est = cbspace_norm(&phi, ctx.sizes.d.min(3), &ctx.opts)?;
        samples.push((est.lower - expect).abs() / (1.0 + expect));
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_thm_7_3(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let e = PQSpace::max(BaseSpace::l2(2));
    let f_space = PQSpace::max(BaseSpace::l2(2));
    let cod = PQSpace::scalar_schatten(Exponent::INF);
    let fv = gaussian_vector(&mut rng, 2);
    let gv = gaussian_vector(&mut rng, 2);
    let rho = BioperatorDesc::product_functional(e, f_space, cod, fv, gv)?;
    let (bi, _) = cb_bilinear_estimate(&rho, ctx.sizes.d.min(2), &ctx.opts)?;
    let curried = rho.curry();
    let cur = cb_norm_estimate(&curried, ctx.sizes.d.min(2), &ctx.opts)?;
    let round = uncurry(&curried)?;
    let exact_round = if round == rho { 0.0 } else { 1.0 };
    Ok(CheckOutcome::from_samples(vec![
        (bi.lower - cur.lower).abs() / (1.0 + bi.lower),
        exact_round,
    ]))
}

fn check_thm_7_4(ctx: &CheckContext) -> Result<CheckOutcome> {
    // The linearization of a cb bioperator on E ⊗_pop F keeps the estimate;
    // canonical ϑ linearizes to the identity (estimate <= 1).
    let e = PQSpace::scalar_schatten(Exponent::TWO);
    let f = PQSpace::scalar_schatten(Exponent::INF);
    let ambient = PQSpace::pop_tensor(e.clone(), f.clone());
    let theta = BioperatorDesc::canonical(e, f, ambient.clone())?;
    let lin = theta.linearize(ambient)?;
    let est = cb_norm_estimate(&lin, ctx.sizes.d.min(2), &ctx.opts)?;
    let (bi, _) = cb_bilinear_estimate(&theta, ctx.sizes.d.min(2), &ctx.opts)?;
    Ok(CheckOutcome::from_samples(vec![
        est.lower - 1.0,
        (bi.lower - est.lower).abs() / (1.0 + est.lower),
    ]))
}

fn check_prop_8_1(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut samples = Vec::new();
    let nmax = ctx.sizes.n.clamp(1, 3);
    for n in 1..=nmax {
        let (vn, refs) = vn_family(n)?;
        let (pop_ub, _) = pop_upper(&vn, &ctx.opts)?;
        let (pop_lb, _) = pop_lower(&vn, &ctx.opts)?;
        let (op_ub, op_wit) = op_upper(&vn, &ctx.opts)?;
        samples.push(pop_ub - refs.pop);
        samples.push(refs.pop - pop_lb);
        samples.push((op_ub - refs.op).abs() / refs.op);
        // random single-diamond representations never beat the reference
        if let engines::UpperWitness::SingleDiamond { term } = &op_wit {
            let (left, right) = engines::pop::pop_factors(&vn.space)?;
            let reference =
                engines::pop::witness_to_rep(std::slice::from_ref(term), &left, &right)?;
            let mut rng = ctx.rng();
            let tries = if ctx.sizes.d >= 4 { 120 } else { 40 };
            let mut worst: f64 = f64::NEG_INFINITY;
            for _ in 0..tries {
                if let Some(cost) = engines::opnorm::random_single_diamond_cost(
                    &vn,
                    &reference,
                    &mut rng,
                    &ctx.opts,
                )? {
                    worst = worst.max(refs.op - cost);
                }
            }
            if worst.is_finite() {
                samples.push(worst.max(0.0) / refs.op);
            }
        }
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_sec_8_triangle(ctx: &CheckContext) -> Result<CheckOutcome> {
    let (v3, _) = vn_family(3)?;
    let w = vn_difference(3, 1)?;
    let ell1 = PQSpace::l1_sequence(3);
    let ambient = PQSpace::pop_tensor(ell1.clone(), ell1);
    let mut z = vec![C64::default(); 9];
    z[0] = c(1.0, 0.0);
    let v1 = AmpElem::elementary(ambient, CMatrix::unit(3, 0, 0), z)?;
    let a = op_upper(&v1, &ctx.opts)?.0;
    let b = op_upper(&w, &ctx.opts)?.0;
    let c_ub = op_upper(&v3, &ctx.opts)?.0;
    // the witnesses must reproduce 1, 4, 9 and exhibit 1 + 4 < 9
    let samples = vec![
        (a - 1.0).abs(),
        (b - 4.0).abs(),
        (c_ub - 9.0).abs(),
        if a + b < c_ub { 0.0 } else { 1.0 },
    ];
    Ok(CheckOutcome::from_samples(samples))
}

fn check_inner_product_pairing(ctx: &CheckContext) -> Result<CheckOutcome> {
    // <x, y> as a bioperator H x H^cc -> ^(inf)C: completely contractive
    // under max quantization; the min-quantized profile may grow but must
    // be non-decreasing.
    let n = ctx.sizes.n.clamp(2, 3);
    let base = BaseSpace::l2(n);
    let cod = PQSpace::scalar_schatten(Exponent::INF);
    let mut coeffs = vec![C64::default(); n * n];
    for i in 0..n {
        coeffs[i * n + i] = c(1.0, 0.0);
    }
    let max_rho = BioperatorDesc::new(
        PQSpace::max(base.clone()),
        PQSpace::max(base.clone()),
        cod.clone(),
        coeffs.clone(),
    )?;
    let (max_est, _) = cb_bilinear_estimate(&max_rho, ctx.sizes.d.min(3), &ctx.opts)?;
    let mut samples = vec![max_est.lower - 1.0];
    let min_rho =
        BioperatorDesc::new(PQSpace::min(base.clone()), PQSpace::min(base), cod, coeffs)?;
    let (min_est, _) = cb_bilinear_estimate(&min_rho, ctx.sizes.d.min(3), &ctx.opts)?;
    for w in min_est.profile.windows(2) {
        samples.push(w[0].1 - w[1].1);
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_min_is_minimal(ctx: &CheckContext) -> Result<CheckOutcome> {
    let mut rng = ctx.rng();
    let base = BaseSpace::l2(ctx.sizes.n);
    let mut samples = Vec::new();
    for _ in 0..4 {
        let terms: Vec<(CMatrix, Vec<C64>)> = (0..2)
            .map(|_| {
                (
                    CMatrix::random_gaussian(&mut rng, ctx.sizes.d),
                    gaussian_vector(&mut rng, ctx.sizes.n),
                )
            })
            .collect();
        let min_elem = AmpElem::new(PQSpace::min(base.clone()), terms.clone())?;
        let min_lb = pq_norm(&min_elem, &ctx.opts)?.lower;
        for p in [Exponent::ONE, Exponent::TWO, Exponent::INF] {
            let sch = AmpElem::new(PQSpace::schatten(p, base.clone()), terms.clone())?;
            let ub = pq_norm(&sch, &ctx.opts)?.upper;
            samples.push(rel(min_lb - ub, ub));
        }
    }
    Ok(CheckOutcome::from_samples(samples))
}

fn check_rem_6_4_pop_square(ctx: &CheckContext) -> Result<CheckOutcome> {
    // The pop square of the L^2 space l_2(^(2)C) is not 2-convex: the
    // orthogonal-support element P(e1 (x) e1) + Q(e2 (x) e2) has pop norm 2
    // while the l_2 aggregate is sqrt(2).  Only the upper bound is searched;
    // the exact value is reference data.
    let fiber = PQSpace::scalar_schatten(Exponent::TWO);
    let ell2 = PQSpace::lp(MeasureSpace::counting(2), Exponent::TWO, fiber);
    let ambient = PQSpace::pop_tensor(ell2.clone(), ell2);
    let mut z1 = vec![C64::default(); 4];
    z1[0] = c(1.0, 0.0);
    let mut z2 = vec![C64::default(); 4];
    z2[3] = c(1.0, 0.0);
    let elem = AmpElem::new(
        ambient,
        vec![(CMatrix::unit(2, 0, 0), z1), (CMatrix::unit(2, 1, 1), z2)],
    )?;
    let (ub, _) = pop_upper(&elem, &ctx.opts)?;
    let aggregate = 2.0_f64.sqrt();
    // report the observed L^2-axiom violation (positive when ub > sqrt(2))
    let _observed_excess = ub - aggregate;
    Ok(CheckOutcome::from_samples(vec![ub - 2.0]))
}

/// The registered checks: the executable map from structural identities to
/// numerical verdicts.
pub fn registry() -> Vec<CheckSpec> {
    let mut specs = vec![
        CheckSpec {
            name: "def_2_1_contractivity",
            anchor: "def 2.1: ||a.u.b|| <= ||a|| ||u|| ||b|| for the bimodule actions",
            kind: CheckKind::Exact,
            tolerance: 1e-9,
            runner: check_def_2_1_contractivity,
        },
        CheckSpec {
            name: "ex_2_7_max_is_l1",
            anchor: "ex 2.7: the maximal quantization is an L^1 space on orthogonal supports",
            kind: CheckKind::Exact,
            tolerance: 1e-3,
            runner: check_ex_2_7_max_is_l1,
        },
        CheckSpec {
            name: "prop_2_6_cross_norm",
            anchor: "prop 2.6: ||a x|| <= ||a||_p ||x|| with equality on L^p spaces",
            kind: CheckKind::Exact,
            tolerance: 1e-9,
            runner: check_prop_2_6_cross_norm,
        },
        CheckSpec {
            name: "prop_3_2_functional_cb",
            anchor: "prop 3.2: ||f||_cb = ||f|| for functionals into ^(q)C, q >= p",
            kind: CheckKind::Optimizer,
            tolerance: 5e-3,
            runner: check_prop_3_2_functional_cb,
        },
        CheckSpec {
            name: "prop_3_3_growth",
            anchor: "prop 3.3: no nonzero cb maps p-convex -> q-concave for p > q; witness growth m^{1/q-1/p}",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_prop_3_3_growth,
        },
        CheckSpec {
            name: "pinching_identity",
            anchor: "prop 3.2 proof: (1/n) sum_m W'_m a W_m = sum_k P_k a P_k",
            kind: CheckKind::Exact,
            tolerance: 1e-10,
            runner: check_pinching_identity,
        },
        CheckSpec {
            name: "f_times_g_cb_norm",
            anchor: "sec 3: ||f x g||_cb = ||f|| ||g|| via (f x g)_inf = f_inf ⋄ g_inf",
            kind: CheckKind::Optimizer,
            tolerance: 5e-3,
            runner: check_f_times_g,
        },
        CheckSpec {
            name: "prop_4_3_i_diamond_symmetry",
            anchor: "prop 4.3(i): ||a ⋄ u|| = ||u ⋄ a||",
            kind: CheckKind::Exact,
            tolerance: 1e-9,
            runner: check_prop_4_3_i,
        },
        CheckSpec {
            name: "prop_4_3_ii_rank_one_isometry",
            anchor: "prop 4.3(ii): ||Q ⋄ u|| = ||Q|| ||u|| for rank-one Q",
            kind: CheckKind::Exact,
            tolerance: 1e-9,
            runner: check_prop_4_3_ii,
        },
        CheckSpec {
            name: "prop_4_3_iii_schatten_bound",
            anchor: "prop 4.3(iii): ||a ⋄ u|| <= ||a||_p ||u|| on p-convex spaces",
            kind: CheckKind::Exact,
            tolerance: 1e-9,
            runner: check_prop_4_3_iii,
        },
        CheckSpec {
            name: "prop_4_4_lp_scalar_action",
            anchor: "prop 4.4: (z, y) -> z(.)y from L_p(X, ^(p)C) x F into L_p(X, F) is completely contractive",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_prop_4_4,
        },
        CheckSpec {
            name: "prop_4_5_canonical_bioperator",
            anchor: "prop 4.5: ϑ: ^(p)E x F -> E ⊗_pr F is completely contractive for p-convex F",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_prop_4_5,
        },
        CheckSpec {
            name: "prop_4_6_diamond_multiplicativity",
            anchor: "prop 4.6: ||a ⋄ b||_p = ||a||_p ||b||_p",
            kind: CheckKind::Exact,
            tolerance: 1e-9,
            runner: check_prop_4_6,
        },
        CheckSpec {
            name: "prop_4_7_mixed_exponents",
            anchor: "prop 4.7: ϑ: ^(p)E x ^(q)F -> ^(r)(E ⊗_pr F), r = max{p, q}, is completely contractive",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_prop_4_7,
        },
        CheckSpec {
            name: "eq_5_5_diamond_estimate",
            anchor: "eq 5.5: ||u ⋄ v||_pop <= ||u|| ||v||",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_eq_5_5,
        },
        CheckSpec {
            name: "eq_5_6_elementary_estimate",
            anchor: "eq 5.6: ||x ⊗ y|| <= ||x|| ||y|| in the pop underlying space",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_eq_5_6,
        },
        CheckSpec {
            name: "thm_6_1_pr_flip",
            anchor: "thm 6.1: ^(p)E ⊗_pop F = E ⊗_pr F for p-convex F",
            kind: CheckKind::Optimizer,
            tolerance: 1e-3,
            runner: check_thm_6_1,
        },
        CheckSpec {
            name: "cor_6_2_scalar_collapse",
            anchor: "cor 6.2: ^(p)C ⊗_pop F = F via λ ⊗ x -> λ x",
            kind: CheckKind::Optimizer,
            tolerance: 1e-3,
            runner: check_cor_6_2,
        },
        CheckSpec {
            name: "cor_6_3_scalar_pair",
            anchor: "cor 6.3: ^(p)C ⊗_pop ^(q)C = ^(r)C, r = max{p, q}",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_cor_6_3,
        },
        CheckSpec {
            name: "thm_6_5_schatten_merge",
            anchor: "thm 6.5: ^(p)E ⊗_pop ^(p)F = ^(p)(E ⊗_pr F)",
            kind: CheckKind::Optimizer,
            tolerance: 1e-3,
            runner: check_thm_6_5,
        },
        CheckSpec {
            name: "cor_6_6_max_merge",
            anchor: "cor 6.6: E_max ⊗_pop F_max = (E ⊗_pr F)_max",
            kind: CheckKind::Optimizer,
            tolerance: 1e-3,
            runner: check_cor_6_6,
        },
        CheckSpec {
            name: "prop_6_7_lp_product",
            anchor: "prop 6.7: (x̄, ȳ) -> x̄(s) ⊗ ȳ(t) into L_p(X x Y, E ⊗_pop F) is completely contractive",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_prop_6_7,
        },
        CheckSpec {
            name: "thm_6_8_l1_cells",
            anchor: "thm 6.8: L_1(X, E) ⊗_pop L_1(Y, F) = L_1(X x Y, E ⊗_pop F)",
            kind: CheckKind::Optimizer,
            tolerance: 1e-3,
            runner: check_thm_6_8,
        },
        CheckSpec {
            name: "cor_6_10_grothendieck",
            anchor: "cor 6.10: L_1(X, ^(p)C) ⊗_pop F = L_1(X, F) for p-convex F",
            kind: CheckKind::Optimizer,
            tolerance: 1e-3,
            runner: check_cor_6_10,
        },
        CheckSpec {
            name: "prop_7_1_cb_quantization",
            anchor: "prop 7.1: the evaluation norm on K[CB(E, G)] has underlying space CB(E, G)",
            kind: CheckKind::Optimizer,
            tolerance: 5e-3,
            runner: check_prop_7_1,
        },
        CheckSpec {
            name: "prop_7_2_scalar_cb_space",
            anchor: "prop 7.2: CB(^(p)C, ^(q)C) = ^(q)C for p <= q",
            kind: CheckKind::Optimizer,
            tolerance: 5e-3,
            runner: check_prop_7_2,
        },
        CheckSpec {
            name: "thm_7_3_adjoint_associativity",
            anchor: "thm 7.3: CB(E x F, G) = CB(F, CB(E, G)) isometrically via currying",
            kind: CheckKind::Optimizer,
            tolerance: 5e-3,
            runner: check_thm_7_3,
        },
        CheckSpec {
            name: "thm_7_4_linearization",
            anchor: "thm 7.4: CB(E ⊗_pop F, G) = CB(F, CB(E, G)); linearization keeps the estimate",
            kind: CheckKind::Optimizer,
            tolerance: 5e-3,
            runner: check_thm_7_4,
        },
        CheckSpec {
            name: "rem_6_4_pop_square_upper",
            anchor: "rem 6.4: ||P e1 + Q e2||_pop <= 2 in the pop square of l_2(^(2)C) (exact value 2 is reference data)",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_rem_6_4_pop_square,
        },
        CheckSpec {
            name: "prop_8_1_pop_op_gap",
            anchor: "prop 8.1: ||V_n||_pop = n while ||V_n||_op = n^2",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_prop_8_1,
        },
        CheckSpec {
            name: "sec_8_triangle_failure",
            anchor: "sec 8: ||V + W||_op = n^2 > m^2 + (n-m)^2, so ||.||_op fails the triangle inequality",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_sec_8_triangle,
        },
        CheckSpec {
            name: "sec_3_inner_product_pairing",
            anchor: "sec 3: the inner-product pairing is completely contractive under max quantization",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_inner_product_pairing,
        },
        CheckSpec {
            name: "ex_2_5_min_is_minimal",
            anchor: "ex 2.5: the minimal quantization is dominated by every ^(p) quantization",
            kind: CheckKind::Optimizer,
            tolerance: 1e-6,
            runner: check_min_is_minimal,
        },
    ];
    specs.sort_by(|a, b| a.name.cmp(b.name));
    specs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_sorted_and_large_enough() {
        let specs = registry();
        assert!(specs.len() >= 25, "registry census: {}", specs.len());
        for w in specs.windows(2) {
            assert!(w[0].name < w[1].name);
        }
    }

    #[test]
    fn unknown_check_is_an_error() {
        assert!(matches!(
            run_check("no_such_check", 0, Sizes { d: 2, n: 2 }, None),
            Err(Error::UnknownCheck(_))
        ));
    }

    #[test]
    fn tag_lookup_resolves_short_names() {
        let a = run_check("prop_4_6", 1, Sizes { d: 3, n: 3 }, None).unwrap();
        assert_eq!(a.check, "prop_4_6_diamond_multiplicativity");
        assert_eq!(a.verdict, Verdict::Pass);
        assert!(a.margin < 1e-9);
        let b = run_check("prop_8_1_gap", 1, Sizes { d: 2, n: 3 }, None).unwrap();
        assert_eq!(b.check, "prop_8_1_pop_op_gap");
        assert_eq!(b.verdict, Verdict::Pass);
    }

    #[test]
    fn quick_profile_runs_and_is_deterministic() {
        let a = run_all(0, Profile::Quick, None).unwrap();
        assert!(
            a.all_pass,
            "failing checks: {:?}",
            a.checks
                .iter()
                .filter(|c| c.verdict != Verdict::Pass)
                .map(|c| (&c.check, c.margin))
                .collect::<Vec<_>>()
        );
        let b = run_all(0, Profile::Quick, None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn tolerance_override_trips_optimizer_checks() {
        let report = run_all(0, Profile::Quick, Some(1e-15)).unwrap();
        assert!(!report.all_pass);
        // exact checks are unaffected by the override
        for check in &report.checks {
            if check.check == "prop_4_6_diamond_multiplicativity" {
                assert_eq!(check.verdict, Verdict::Pass);
            }
        }
    }
}
