//! Norm certificates: sound `[lower, upper]` intervals with re-checkable
//! witness data.  Upper witnesses are decompositions or representations whose
//! cost reproduces the bound; lower witnesses are functionals (or functional
//! families) whose pairing reproduces it; structural witnesses defer to the
//! certificate of an isometric image.

use serde::{Deserialize, Serialize};

use crate::matrix::{CMatrix, Exponent, C64};

/// Raw term list of an amplified element, without its ambient descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessTerms(pub Vec<WitnessTerm>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessTerm {
    pub matrix: CMatrix,
    #[serde(with = "crate::io::c64_vec")]
    pub vector: Vec<C64>,
}

impl WitnessTerms {
    pub fn from_terms(terms: &[(CMatrix, Vec<C64>)]) -> WitnessTerms {
        WitnessTerms(
            terms
                .iter()
                .map(|(m, v)| WitnessTerm { matrix: m.clone(), vector: v.clone() })
                .collect(),
        )
    }

    pub fn to_terms(&self) -> Vec<(CMatrix, Vec<C64>)> {
        self.0.iter().map(|t| (t.matrix.clone(), t.vector.clone())).collect()
    }
}

/// One term a_k · (u_k ⋄ v_k) · b_k of a representation of a tensor-ambient
/// element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopTermData {
    pub a: CMatrix,
    pub u: WitnessTerms,
    pub v: WitnessTerms,
    pub b: CMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrDecompTerm {
    #[serde(with = "crate::io::c64_vec")]
    pub left: Vec<C64>,
    pub right: WitnessTerms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpperWitness {
    /// Closed-form route; re-evaluation reruns the named evaluator.
    Exact { route: String },
    /// Decomposition sum a_k ⊗ x_k with cost sum ||a_k||_p ||x_k||.
    ProjDecomposition { p: Exponent, terms: WitnessTerms },
    /// Decomposition sum x_i ⊗ W_i of the flipped element in E ⊗ (K F).
    PrDecomposition { terms: Vec<PrDecompTerm> },
    /// Representation sum a_k · (u_k ⋄ v_k) · b_k with product cost.
    PopRepresentation { terms: Vec<PopTermData> },
    /// Single-diamond representation a · (u ⋄ v) · b.
    SingleDiamond { term: Box<PopTermData> },
    /// Weighted l_p aggregation of per-atom certificates.
    Aggregate { parts: Vec<NormCertificate> },
    /// Upper endpoint taken from an isometric image certificate.
    Structural { rule: String, inner: Vec<NormCertificate> },
    /// No sound upper bound is available (sup-type norm without a matching
    /// closed form); the bound is +inf.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerWitness {
    Exact { route: String },
    /// Scalar functional f on the base; value ||f_inf(u)||_inf / ||f||*.
    Functional {
        #[serde(with = "crate::io::c64_vec")]
        f: Vec<C64>,
    },
    /// Product functional f ⊗ g on a tensor base.
    FunctionalPair {
        #[serde(with = "crate::io::c64_vec")]
        f: Vec<C64>,
        #[serde(with = "crate::io::c64_vec")]
        g: Vec<C64>,
    },
    /// Schatten-dual pairing (b, f): |sum_k tr(b^* c_k) f(x_k)|.
    SchattenPair {
        b: CMatrix,
        #[serde(with = "crate::io::c64_vec")]
        f: Vec<C64>,
    },
    /// Per-atom Schatten-dual family for l_1-type bases.
    SchattenFamily { mats: Vec<CMatrix> },
    /// Unit element of the domain witnessing a sup-type lower bound.
    WitnessElement { terms: WitnessTerms },
    Aggregate { parts: Vec<NormCertificate> },
    Structural { rule: String, inner: Vec<NormCertificate> },
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Both endpoints from the same closed form; lower == upper.
    ClosedForm,
    /// Endpoints from an isometric structural reduction.
    Structural,
    /// Upper from decomposition search, lower from functional search.
    Search,
    /// Interval aggregation over sub-certificates.
    Aggregate,
    /// Sup-type search: the lower bound is certified, the upper bound is
    /// heuristic or absent.
    SupSearch,
}

/// Interval [lower, upper] around a norm value with witness data and method
/// provenance.  Soundness contract: lower <= true norm <= upper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub lower: f64,
    #[serde(with = "crate::io::f64_or_inf")]
    pub upper: f64,
    pub method: Method,
    pub seed: u64,
    pub budget: u32,
    pub upper_witness: UpperWitness,
    pub lower_witness: LowerWitness,
}

impl NormCertificate {
    pub fn exact(value: f64, route: &str, seed: u64, budget: u32) -> NormCertificate {
        NormCertificate {
            lower: value,
            upper: value,
            method: Method::ClosedForm,
            seed,
            budget,
            upper_witness: UpperWitness::Exact { route: route.to_string() },
            lower_witness: LowerWitness::Exact { route: route.to_string() },
        }
    }

    pub fn zero(seed: u64, budget: u32) -> NormCertificate {
        NormCertificate {
            lower: 0.0,
            upper: 0.0,
            method: Method::ClosedForm,
            seed,
            budget,
            upper_witness: UpperWitness::Exact { route: "zero".into() },
            lower_witness: LowerWitness::Zero,
        }
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_sound_shape(&self) -> bool {
        self.lower.is_finite() && self.lower >= -1e-12 && self.lower <= self.upper + 1e-12
    }

    /// Midpoint for reporting; the lower endpoint when the interval is
    /// one-sided.
    pub fn point(&self) -> f64 {
        if self.upper.is_finite() {
            0.5 * (self.lower + self.upper)
        } else {
            self.lower
        }
    }
}
