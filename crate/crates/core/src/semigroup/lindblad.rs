use crate::channel::{CPMap, LindbladGenerator};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, identity};
use crate::operator::Superoperator;
use crate::tol::Tolerances;

use super::invariant::{fixed_states, InvariantStates};

/// `exp(t L)` as a superoperator, checked to be unital and completely positive.
pub fn lindblad_exponential(
    gen: &LindbladGenerator,
    t: f64,
    tol: &Tolerances,
) -> Result<Superoperator> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    let n = gen.dim();
    let m = (gen.superop().into_matrix() * c64(t, 0.0)).exp();
    if !linalg::is_finite(&m) {
        return Err(Error::NonFinite);
    }
    let s = Superoperator::new(n, m)?;
    let id = identity(n);
    let residual = (s.apply(&id) - &id).norm();
    if residual > tol.verify {
        return Err(Error::NotUnital {
            residual,
            tolerance: tol.verify,
        });
    }
    let min_eigenvalue = linalg::min_eigenvalue(&linalg::hermitian_part(&s.choi()));
    if min_eigenvalue < -tol.verify {
        return Err(Error::NotCompletelyPositive { min_eigenvalue });
    }
    Ok(s)
}

/// `exp(t L)` in Kraus form.
pub fn lindblad_channel(gen: &LindbladGenerator, t: f64, tol: &Tolerances) -> Result<CPMap> {
    let s = lindblad_exponential(gen, t, tol)?;
    CPMap::from_superop(
        &s,
        &Tolerances {
            unital: tol.verify,
            ..*tol
        },
    )
}

/// Densities annihilated by the predual generator.
pub fn stationary_states(gen: &LindbladGenerator, tol: &Tolerances) -> Result<InvariantStates> {
    let pred = gen.superop().hs_adjoint();
    fixed_states(pred.matrix(), gen.dim(), c64(0.0, 0.0), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channels, pauli};
    use crate::linalg::{matrix_unit, Matrix};
    use crate::operator::DensityState;

    #[test]
    fn time_zero_is_identity() {
        let gen = LindbladGenerator::new(pauli::x(), vec![pauli::lowering()]).unwrap();
        let s = lindblad_exponential(&gen, 0.0, &Tolerances::default()).unwrap();
        assert!((s.matrix() - identity(4)).norm() < 1e-14);
    }

    #[test]
    fn decay_to_ground_state() {
        let tol = Tolerances::default();
        let gen = LindbladGenerator::new(Matrix::zeros(2, 2), vec![pauli::lowering()]).unwrap();
        let s = lindblad_exponential(&gen, 40.0, &tol).unwrap();
        let pred = s.hs_adjoint();
        let rho = DensityState::maximally_mixed(2);
        let limit = pred.apply(rho.rho());
        assert!((limit - matrix_unit(2, 0, 0)).norm() < 1e-8);
        let st = stationary_states(&gen, &tol).unwrap();
        assert!(st.is_unique());
        assert!((st.states[0].rho() - matrix_unit(2, 0, 0)).norm() < 1e-10);
    }

    #[test]
    fn hamiltonian_flow_is_unitary_conjugation() {
        let tol = Tolerances::default();
        let gen = LindbladGenerator::new(pauli::z(), vec![]).unwrap();
        for t in [std::f64::consts::PI, std::f64::consts::FRAC_PI_4] {
            let s = lindblad_exponential(&gen, t, &tol).unwrap();
            // Heisenberg flow x -> e^{iHt} x e^{-iHt}
            let u = (pauli::z() * c64(0.0, t)).exp();
            let conj = channels::unitary(u).unwrap().superop();
            assert!((s.matrix() - conj.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn negative_time_is_rejected() {
        let gen = LindbladGenerator::new(pauli::z(), vec![]).unwrap();
        assert!(lindblad_exponential(&gen, -1.0, &Tolerances::default()).is_err());
    }
}
