//! Analysis of quantum dynamical semigroups on finite-dimensional matrix
//! algebras: ergodicity, mixing, Kolmogorov dilations and purity of
//! translation-invariant states on spin chains.

pub mod channel;
pub mod dilation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod random;
pub mod semigroup;
pub mod spinchain;
pub mod sweep;
pub mod tol;

pub use channel::{channels, pauli, CPMap, LindbladGenerator};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector, C64};
pub use operator::{
    algebra_closure, center_of, support_projection, CheckRecord, DensityState, OperatorSubspace,
    Projection, Superoperator,
};
pub use semigroup::*;
pub use tol::Tolerances;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
