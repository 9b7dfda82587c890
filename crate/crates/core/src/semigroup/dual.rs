use crate::channel::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::operator::{DensityState, OperatorSubspace};
use crate::tol::Tolerances;

/// `rho^{1/2}` and `rho^{-1/2}` of a faithful state.
pub(crate) fn half_powers(state: &DensityState) -> (Matrix, Matrix) {
    let eig = linalg::eigh(state.rho());
    (eig.map(f64::sqrt), eig.map(|l| 1.0 / l.sqrt()))
}

/// `log rho` of a faithful state.
pub(crate) fn log_density(state: &DensityState) -> Matrix {
    linalg::herm_fn(state.rho(), f64::ln)
}

pub(crate) fn require_faithful_invariant(
    map: &CPMap,
    state: &DensityState,
    tol: &Tolerances,
) -> Result<()> {
    if state.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: state.dim(),
        });
    }
    if !state.is_faithful(tol) {
        return Err(Error::NotFaithful {
            min_eigenvalue: state.min_eigenvalue(),
        });
    }
    let residual = map.invariance_residual(state);
    if residual > tol.invariance {
        return Err(Error::NotInvariant {
            residual,
            tolerance: tol.invariance,
        });
    }
    Ok(())
}

/// KMS-adjoint map with Kraus family `m_i = rho^{-1/2} l_i^* rho^{1/2}`.
///
/// With `sigma_{1/2}(x) = rho^{-1/2} x rho^{1/2}` and
/// `sigma_{-1/2}(y) = rho^{1/2} y rho^{-1/2}` the dual satisfies
/// `phi(sigma_{1/2}(x) tau(y)) = phi(dual(x) sigma_{-1/2}(y))`.
pub fn kms_dual(map: &CPMap, state: &DensityState, tol: &Tolerances) -> Result<CPMap> {
    require_faithful_invariant(map, state, tol)?;
    let (sqrt, inv_sqrt) = half_powers(state);
    let kraus = map
        .kraus()
        .iter()
        .map(|l| &inv_sqrt * l.adjoint() * &sqrt)
        .collect();
    // unitality of the dual is equivalent to invariance of the state
    CPMap::with_tolerances(
        kraus,
        &Tolerances {
            unital: tol.verify,
            ..*tol
        },
    )
}

/// Largest violation of the adjoint relation over pairs of basis elements.
pub fn kms_relation_residual(
    map: &CPMap,
    dual: &CPMap,
    state: &DensityState,
    basis: &[Matrix],
) -> f64 {
    let (sqrt, inv_sqrt) = half_powers(state);
    let lhs_x: Vec<Matrix> = basis.iter().map(|x| &inv_sqrt * x * &sqrt).collect();
    let rhs_x: Vec<Matrix> = basis.iter().map(|x| dual.apply_unchecked(x)).collect();
    let lhs_y: Vec<Matrix> = basis.iter().map(|y| map.apply_unchecked(y)).collect();
    let rhs_y: Vec<Matrix> = basis.iter().map(|y| &sqrt * y * &inv_sqrt).collect();
    let mut worst: f64 = 0.0;
    for (ax, bx) in lhs_x.iter().zip(&rhs_x) {
        for (ay, by) in lhs_y.iter().zip(&rhs_y) {
            let lhs = state.expect(&(ax * ay));
            let rhs = state.expect(&(bx * by));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Adjoint-relation residual on the matrix-unit basis.
pub fn kms_residual(map: &CPMap, dual: &CPMap, state: &DensityState) -> f64 {
    let basis = OperatorSubspace::full(map.dim());
    kms_relation_residual(map, dual, state, basis.basis())
}
