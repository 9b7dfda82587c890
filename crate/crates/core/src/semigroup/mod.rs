//! Invariant states, KMS duality, the decoherence-free algebras and the
//! ergodic classification of a discrete quantum dynamical semigroup.

mod algebras;
mod classify;
mod dual;
mod invariant;
mod lindblad;
mod reduction;
mod spectrum;

pub use algebras::{
    algebra_g, algebra_g0, algebra_g_iterative, conditional_expectation, multiplicative_domain,
};
pub use classify::{
    classify, classify_restricted, correlation_witness, mixing_residual, Classification,
};
pub use dual::{kms_dual, kms_relation_residual, kms_residual};
pub use invariant::{invariant_states, InvariantStates};
pub use lindblad::{lindblad_channel, lindblad_exponential, stationary_states};
pub use reduction::{
    correlation, predual_distance, reduced_semigroup, subharmonic_limit, SubharmonicLimit,
};
pub use spectrum::SpectralData;

pub(crate) use dual::half_powers;

use crate::channel::CPMap;

/// Superoperator of `tau`; named for symmetry with the other analyses.
pub fn superop_of(map: &CPMap) -> crate::operator::Superoperator {
    map.superop()
}
