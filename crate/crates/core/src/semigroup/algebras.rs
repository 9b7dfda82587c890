use crate::channel::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, kron, Matrix, Vector};
use crate::operator::{vectorize, DensityState, OperatorSubspace, Superoperator};
use crate::tol::Tolerances;

use super::dual::{kms_dual, log_density, require_faithful_invariant};
use super::spectrum::{eigenspace, SpectralData};

/// Two-sided multiplicative domain `{x : tau(x^*x) = tau(x)^* tau(x), tau(xx^*) = tau(x) tau(x)^*}`.
///
/// With the Stinespring isometry `W = sum_i l_i^* (x) e_i`, `tau(x) = W^*(x (x) I)W`
/// and the defect `tau(x^*x) - tau(x)^*tau(x)` equals `|(1 - WW^*)(x (x) I)W|^2`,
/// so both conditions are linear kernels.
pub fn multiplicative_domain(map: &CPMap, tol: &Tolerances) -> OperatorSubspace {
    let n = map.dim();
    let m = map.kraus().len();
    let mut w = Matrix::zeros(n * m, n);
    for (i, l) in map.kraus().iter().enumerate() {
        let mut e = Matrix::zeros(m, 1);
        e[(i, 0)] = linalg::real(1.0);
        w += kron(&l.adjoint(), &e);
    }
    let comp = identity(n * m) - &w * w.adjoint();
    let id_m = identity(m);
    let rows = n * m * n;
    let mut right = Matrix::zeros(rows, n * n);
    let mut left = Matrix::zeros(rows, n * n);
    for b in 0..n {
        for a in 0..n {
            let e_ab = linalg::matrix_unit(n, a, b);
            let col = vectorize(&(&comp * kron(&e_ab, &id_m) * &w));
            right.set_column(a + n * b, &col);
            // x^* condition: coefficient c_ab of x enters x^* conjugated at E_ba
            let col_t = vectorize(&(&comp * kron(&e_ab.transpose(), &id_m) * &w));
            left.set_column(a + n * b, &col_t.conjugate());
        }
    }
    let mut stacked = Matrix::zeros(2 * rows, n * n);
    stacked.view_mut((0, 0), (rows, n * n)).copy_from(&right);
    stacked.view_mut((rows, 0), (rows, n * n)).copy_from(&left);
    let kernel = linalg::null_space(&stacked, tol.kernel);
    OperatorSubspace::from_orthonormal_columns(n, &kernel)
}

/// Largest scaled residual of `[log rho, b]` outside the subspace.
pub(crate) fn modular_residual(sub: &OperatorSubspace, log_rho: &Matrix) -> f64 {
    let scale = linalg::op_norm(log_rho).max(1.0);
    sub.basis()
        .iter()
        .map(|b| sub.residual(&(log_rho * b - b * log_rho)) / scale)
        .fold(0.0, f64::max)
}

fn verify(check: &str, residual: f64, tolerance: f64) -> Result<()> {
    if residual <= tolerance && residual.is_finite() {
        Ok(())
    } else {
        Err(Error::Verification {
            check: check.to_string(),
            residual,
            tolerance,
        })
    }
}

/// Span of the peripheral eigenvectors of `tau`.
pub(crate) fn peripheral_span(
    map: &CPMap,
    spectral: &SpectralData,
    tol: &Tolerances,
) -> OperatorSubspace {
    let n = map.dim();
    let s = map.superop();
    let mut vecs: Vec<Vector> = Vec::new();
    for &lambda in &spectral.clusters {
        let space = eigenspace(s.matrix(), lambda, tol);
        for c in space.column_iter() {
            linalg::gram_schmidt_push(&mut vecs, &c.into_owned(), 1e-8);
        }
    }
    let cols = linalg::columns_to_matrix(n * n, &vecs);
    OperatorSubspace::from_orthonormal_columns(n, &cols)
}

/// The algebra on which `tau` acts as a modular-covariant automorphism,
/// computed as the peripheral eigenspace and then verified.
pub fn algebra_g(map: &CPMap, state: &DensityState, tol: &Tolerances) -> Result<OperatorSubspace> {
    require_faithful_invariant(map, state, tol)?;
    let spectral = SpectralData::from_matrix(map.superop().matrix(), tol)?;
    let g = peripheral_span(map, &spectral, tol);
    verify_g(map, state, &g, tol)?;
    Ok(g)
}

fn verify_g(
    map: &CPMap,
    state: &DensityState,
    g: &OperatorSubspace,
    tol: &Tolerances,
) -> Result<()> {
    verify("g_star_algebra", g.closure_residual(), tol.verify)?;
    verify(
        "g_contains_identity",
        g.residual(&identity(map.dim())),
        tol.verify,
    )?;
    let dual = kms_dual(map, state, tol)?;
    let log_rho = log_density(state);
    let scale = linalg::op_norm(&log_rho).max(1.0);
    let mut back: f64 = 0.0;
    let mut mult: f64 = 0.0;
    let mut modular: f64 = 0.0;
    for b in g.basis() {
        let tb = map.apply_unchecked(b);
        back = back.max((dual.apply_unchecked(&tb) - b).norm());
        let prod = map.apply_unchecked(&(b.adjoint() * b)) - tb.adjoint() * &tb;
        mult = mult.max(prod.norm());
        let ad = &log_rho * b - b * &log_rho;
        let lhs = map.apply_unchecked(&ad);
        let rhs = &log_rho * &tb - &tb * &log_rho;
        modular = modular.max((lhs - rhs).norm() / scale);
    }
    verify("g_dual_inverse", back, tol.verify)?;
    verify("g_multiplicative", mult, tol.verify)?;
    verify("g_modular_covariant", modular, tol.verify)?;
    Ok(())
}

/// `G_N = ker(dual^N tau^N - id)`, the decreasing sequence whose limit is `G`.
/// Reaches `G` after at most `n^2` steps.
pub fn algebra_g_iterative(
    map: &CPMap,
    state: &DensityState,
    steps: u64,
    tol: &Tolerances,
) -> Result<OperatorSubspace> {
    let dual = kms_dual(map, state, tol)?;
    let n = map.dim();
    let t = map.superop().power(steps);
    let d = dual.superop().power(steps);
    let prod = d.compose(&t);
    let shifted = prod.matrix() - identity(n * n);
    let kernel = linalg::null_space(&shifted, tol.kernel);
    Ok(OperatorSubspace::from_orthonormal_columns(n, &kernel))
}

/// Image of a subspace under `tau`.
fn image(map: &CPMap, sub: &OperatorSubspace, tol: &Tolerances) -> OperatorSubspace {
    let imgs: Vec<Matrix> = sub.basis().iter().map(|b| map.apply_unchecked(b)).collect();
    OperatorSubspace::span(map.dim(), &imgs, tol.kernel)
}

/// `G_0 = intersection over n of tau^n(G)`.
pub fn algebra_g0(map: &CPMap, state: &DensityState, tol: &Tolerances) -> Result<OperatorSubspace> {
    let g = algebra_g(map, state, tol)?;
    let n = map.dim();
    let patience = n * n;
    let mut acc = g.clone();
    let mut current = g;
    let mut stable = 0;
    while stable < patience {
        current = image(map, &current, tol);
        let next = acc.intersect(&current, tol.kernel);
        if next.dim() == acc.dim() {
            stable += 1;
        } else {
            stable = 0;
        }
        acc = next;
    }

    // tau maps G_0 onto itself and the dual inverts it there
    let dual = kms_dual(map, state, tol)?;
    let img = image(map, &acc, tol);
    let onto = if img.dim() == acc.dim() {
        acc.basis()
            .iter()
            .map(|b| img.residual(b))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    verify("g0_invariant", onto, tol.verify)?;
    let mut inv: f64 = 0.0;
    for b in acc.basis() {
        inv = inv.max((dual.apply_unchecked(&map.apply_unchecked(b)) - b).norm());
        inv = inv.max((map.apply_unchecked(&dual.apply_unchecked(b)) - b).norm());
    }
    verify("g0_automorphism", inv, tol.verify)?;
    Ok(acc)
}

/// Orthogonal projection onto `alg` in the GNS inner product `tr(rho a^* b)`.
pub fn conditional_expectation(
    alg: &OperatorSubspace,
    state: &DensityState,
    tol: &Tolerances,
) -> Result<Superoperator> {
    let n = alg.ambient_dim();
    if state.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.dim(),
        });
    }
    if !state.is_faithful(tol) {
        return Err(Error::NotFaithful {
            min_eigenvalue: state.min_eigenvalue(),
        });
    }
    let residual = alg.closure_residual();
    if residual > tol.closure {
        return Err(Error::NotAnAlgebra { residual });
    }
    let residual = modular_residual(alg, &log_density(state));
    if residual > tol.verify {
        return Err(Error::NotModularInvariant { residual });
    }

    // <a, x>_rho = vec(a)^* (rho^T (x) I) vec(x)
    let weight = kron(&state.rho().transpose(), &identity(n));
    let b = alg.basis_matrix();
    let gram = b.adjoint() * &weight * &b;
    let gram_inv = gram.try_inverse().ok_or(Error::EigenFailure)?;
    let e = &b * gram_inv * b.adjoint() * &weight;
    let e = Superoperator::new(n, e)?;

    let id = identity(n);
    verify(
        "expectation_unital",
        (e.apply(&id) - &id).norm(),
        tol.verify,
    )?;
    let e2 = e.compose(&e);
    verify(
        "expectation_idempotent",
        (e2.matrix() - e.matrix()).norm(),
        tol.verify,
    )?;
    let mut preserve: f64 = 0.0;
    let mut positive: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let x = linalg::matrix_unit(n, i, j);
            preserve = preserve.max((state.expect(&e.apply(&x)) - state.expect(&x)).norm());
            // positivity on x^*x for x = E_ij + E_jj
            let y = &x + linalg::matrix_unit(n, j, j);
            let p = e.apply(&(y.adjoint() * &y));
            positive = positive.max(-linalg::min_eigenvalue(&linalg::hermitian_part(&p)));
        }
    }
    verify("expectation_state_preserving", preserve, tol.verify)?;
    verify("expectation_positive", positive, tol.verify)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channels, pauli};
    use crate::linalg::{c64, real};
    use crate::random;

    fn diag_algebra(n: usize) -> OperatorSubspace {
        let gens: Vec<Matrix> = (0..n).map(|i| linalg::matrix_unit(n, i, i)).collect();
        OperatorSubspace::span(n, &gens, 1e-12)
    }

    #[test]
    fn multiplicative_domain_examples() {
        let tol = Tolerances::default();
        let mut r = random::rng(1);
        let aut = channels::unitary(random::unitary(&mut r, 3)).unwrap();
        assert_eq!(multiplicative_domain(&aut, &tol).dim(), 9);
        assert_eq!(
            multiplicative_domain(&channels::depolarizing(0.4), &tol).dim(),
            1
        );
        let md = multiplicative_domain(&channels::dephase_flip(), &tol);
        assert_eq!(md.dim(), 2);
        assert!(md.is_subspace_of(&diag_algebra(2), 1e-10));
        assert!(md.is_algebra(1e-10));
    }

    #[test]
    fn g_examples() {
        let tol = Tolerances::default();
        let mm = DensityState::maximally_mixed(2);
        let g = algebra_g(&channels::depolarizing(0.4), &mm, &tol).unwrap();
        assert_eq!(g.dim(), 1);

        let theta = std::f64::consts::PI * 2f64.sqrt();
        let u = Matrix::from_diagonal(&Vector::from_vec(vec![
            real(1.0),
            c64(theta.cos(), theta.sin()),
        ]));
        let g = algebra_g(&channels::unitary(u).unwrap(), &mm, &tol).unwrap();
        assert_eq!(g.dim(), 4);

        let g = algebra_g(&channels::dephase_flip(), &mm, &tol).unwrap();
        assert_eq!(g.dim(), 2);
        assert!(g.contains(&pauli::z(), 1e-10));
        assert!(g.contains(&identity(2), 1e-10));
    }

    #[test]
    fn g0_examples() {
        let tol = Tolerances::default();
        let mm = DensityState::maximally_mixed(2);
        let mut r = random::rng(2);
        let aut = channels::unitary(random::unitary(&mut r, 2)).unwrap();
        assert_eq!(algebra_g0(&aut, &mm, &tol).unwrap().dim(), 4);
        assert_eq!(
            algebra_g0(&channels::depolarizing(0.3), &mm, &tol)
                .unwrap()
                .dim(),
            1
        );
        let df = channels::dephase_flip();
        let g0 = algebra_g0(&df, &mm, &tol).unwrap();
        assert_eq!(g0.dim(), 2);
        assert!((df.apply(&pauli::z()).unwrap() + pauli::z()).norm() < 1e-12);
    }

    #[test]
    fn iterative_g_matches_peripheral_span() {
        let tol = Tolerances::default();
        let mm = DensityState::maximally_mixed(2);
        let df = channels::dephase_flip();
        let g = algebra_g(&df, &mm, &tol).unwrap();
        let gi = algebra_g_iterative(&df, &mm, 4, &tol).unwrap();
        assert_eq!(g.dim(), gi.dim());
        assert!(gi.is_subspace_of(&g, 1e-8));
    }

    #[test]
    fn expectation_examples() {
        let tol = Tolerances::default();
        let mut r = random::rng(4);
        let st = random::state(&mut r, 3);
        let full = conditional_expectation(&OperatorSubspace::full(3), &st, &tol).unwrap();
        assert!((full.matrix() - identity(9)).norm() < 1e-10);

        let scalars = conditional_expectation(&OperatorSubspace::scalars(3), &st, &tol).unwrap();
        let x = random::ginibre(&mut r, 3, 3);
        assert!((scalars.apply(&x) - identity(3) * st.expect(&x)).norm() < 1e-10);

        let rho = Matrix::from_diagonal(&Vector::from_vec(vec![real(0.7), real(0.3)]));
        let st = DensityState::new(rho).unwrap();
        let e = conditional_expectation(&diag_algebra(2), &st, &tol).unwrap();
        let x = random::ginibre(&mut r, 2, 2);
        let expected = Matrix::from_diagonal(&x.diagonal());
        assert!((e.apply(&x) - expected).norm() < 1e-10);
    }

    #[test]
    fn expectation_rejects_non_modular_algebra() {
        let tol = Tolerances::default();
        let rho = Matrix::from_diagonal(&Vector::from_vec(vec![real(0.7), real(0.3)]));
        let st = DensityState::new(rho).unwrap();
        // the x-diagonal algebra is not invariant under ad(log rho)
        let alg = OperatorSubspace::span(2, &[identity(2), pauli::x()], 1e-12);
        assert!(matches!(
            conditional_expectation(&alg, &st, &tol),
            Err(Error::NotModularInvariant { .. })
        ));
    }
}
