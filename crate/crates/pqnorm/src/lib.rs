//! Finite-dimensional proto-quantum (matricially normed) spaces.
//!
//! The crate models elements of amplifications `K ⊗ E` as lists of
//! (matrix, vector) terms, evaluates the catalogue of quantized norms
//! (Schatten-projective, minimal, vector-valued L_p, classical-projective,
//! proto-operator-projective and CB-space norms) and produces sound
//! `[lower, upper]` certificates with re-checkable witnesses.  A property
//! suite binds the structural identities of these norms to seeded numerical
//! checks.

pub mod amp;
pub mod engines;
pub mod error;
pub mod io;
pub mod matrix;
pub mod spaces;
pub mod svd;
pub mod verify;

pub use amp::{AmpElem, AmpTerm, BioperatorDesc, OpAction, OperatorDesc};
pub use engines::{pq_norm, EngineOpts, NormCertificate};
pub use error::{Error, Result};
pub use matrix::{CMatrix, Exponent, C64};
pub use spaces::{BaseSpace, MeasureSpace, PQSpace, Quantization};
