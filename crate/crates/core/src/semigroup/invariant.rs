use crate::channel::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, gram_schmidt_push, identity, Matrix, Vector, C64};
use crate::operator::{vectorize, DensityState};
use crate::tol::Tolerances;

/// Basis of invariant density matrices of a map.
#[derive(Debug, Clone)]
pub struct InvariantStates {
    /// Linearly independent invariant states spanning the fixed space of
    /// the predual.
    pub states: Vec<DensityState>,
    /// Dimension of the eigenvalue-1 eigenspace of the predual.
    pub fixed_dim: usize,
    /// Whether some invariant state is faithful.
    pub faithful_exists: bool,
    mean: DensityState,
}

impl InvariantStates {
    /// Uniform average of the basis states; faithful whenever any invariant
    /// state is.
    pub fn mean(&self) -> &DensityState {
        &self.mean
    }

    pub fn is_unique(&self) -> bool {
        self.fixed_dim == 1
    }
}

/// Invariant states of `tau`, i.e. densities fixed by `rho -> sum l^* rho l`.
pub fn invariant_states(map: &CPMap, tol: &Tolerances) -> Result<InvariantStates> {
    let pred = map.predual_superop();
    fixed_states(pred.matrix(), map.dim(), c64(1.0, 0.0), tol)
}

/// Densities in the kernel of `pred - target`, for a predual whose kernel is
/// spanned by positive elements (trace-preserving positive maps and their
/// generators).
pub(crate) fn fixed_states(
    pred: &Matrix,
    n: usize,
    target: C64,
    tol: &Tolerances,
) -> Result<InvariantStates> {
    let n2 = n * n;
    let shifted = pred - identity(n2) * target;
    let kernel = linalg::null_space(&shifted, tol.kernel);
    let fixed_dim = kernel.ncols();
    if fixed_dim == 0 {
        return Err(Error::EigenFailure);
    }

    // Hermitian basis of the kernel: Hermitian and anti-Hermitian parts of
    // every kernel vector. Inner products of Hermitian matrices are real, so
    // Gram-Schmidt keeps them Hermitian.
    let mut herm: Vec<Vector> = Vec::new();
    for col in kernel.column_iter() {
        let v = Matrix::from_iterator(n, n, col.iter().copied());
        let h = linalg::hermitian_part(&v);
        let k = (&v - v.adjoint()) * c64(0.0, -0.5);
        for m in [h, k] {
            if herm.len() < fixed_dim {
                gram_schmidt_push(&mut herm, &vectorize(&linalg::hermitian_part(&m)), 1e-6);
            }
        }
    }

    // Jordan decomposition: positive and negative parts of invariant
    // Hermitian elements are again invariant.
    let mut states: Vec<DensityState> = Vec::new();
    let mut span: Vec<Vector> = Vec::new();
    for h in &herm {
        let h = Matrix::from_iterator(n, n, h.iter().copied());
        let eig = linalg::eigh(&h);
        let scale = eig.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let pos = eig.map(|l| if l > tol.psd * scale { l } else { 0.0 });
        let neg = eig.map(|l| if l < -tol.psd * scale { -l } else { 0.0 });
        for part in [pos, neg] {
            let tr = linalg::trace(&part).re;
            if tr <= 1e-8 * scale {
                continue;
            }
            let Ok(st) = DensityState::from_approximate(&part.unscale(tr)) else {
                continue;
            };
            let shifted_res = (pred * vectorize(st.rho()) - vectorize(st.rho()) * target).norm();
            if shifted_res > 1e-6 {
                continue;
            }
            if span.len() < fixed_dim && gram_schmidt_push(&mut span, &vectorize(st.rho()), 1e-6) {
                states.push(st);
            }
        }
    }
    if states.is_empty() {
        return Err(Error::EigenFailure);
    }
    let sum: Matrix = states.iter().map(|s| s.rho().clone()).sum();
    let mean = DensityState::from_approximate(&sum.unscale(states.len() as f64))?;
    let faithful_exists = mean.is_faithful(tol);
    Ok(InvariantStates {
        states,
        fixed_dim,
        faithful_exists,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channels;
    use crate::linalg::{matrix_unit, real};
    use crate::random;

    #[test]
    fn unitary_channel_fixes_maximally_mixed() {
        let mut r = random::rng(3);
        let map = channels::unitary(random::unitary(&mut r, 3)).unwrap();
        let inv = invariant_states(&map, &Tolerances::default()).unwrap();
        assert!(inv.faithful_exists);
        let mm = DensityState::maximally_mixed(3);
        assert!(map.invariance_residual(&mm) < 1e-12);
        assert!(map.invariance_residual(inv.mean()) < 1e-10);
    }

    #[test]
    fn amplitude_damping_has_ground_state() {
        let inv =
            invariant_states(&channels::amplitude_damping(0.3), &Tolerances::default()).unwrap();
        assert_eq!(inv.states.len(), 1);
        assert!(!inv.faithful_exists);
        assert!((inv.states[0].rho() - matrix_unit(2, 0, 0)).norm() < 1e-10);
    }

    #[test]
    fn dephase_flip_has_unique_mixed_state() {
        let inv = invariant_states(&channels::dephase_flip(), &Tolerances::default()).unwrap();
        assert!(inv.is_unique());
        assert!(inv.faithful_exists);
        assert!((inv.states[0].rho() - identity(2) * real(0.5)).norm() < 1e-10);
    }

    #[test]
    fn dephasing_has_full_diagonal_family() {
        let inv = invariant_states(&channels::dephasing(3), &Tolerances::default()).unwrap();
        assert_eq!(inv.fixed_dim, 3);
        assert_eq!(inv.states.len(), 3);
        assert!(inv.faithful_exists);
        for s in &inv.states {
            assert!(channels::dephasing(3).invariance_residual(s) < 1e-10);
        }
    }
}
