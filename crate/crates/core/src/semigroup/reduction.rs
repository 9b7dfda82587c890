use serde::Serialize;

use crate::channel::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, Matrix, C64};
use crate::operator::{DensityState, Projection};
use crate::tol::Tolerances;

/// Corner map `x -> p tau(p x p) p` on `range(p)`, with Kraus family
/// `Q^* l_i Q` for an orthonormal basis `Q` of the range.
pub fn reduced_semigroup(map: &CPMap, p: &Projection, tol: &Tolerances) -> Result<CPMap> {
    if p.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: p.dim(),
        });
    }
    let gain = map.apply_unchecked(p.matrix()) - p.matrix();
    let min_eigenvalue = linalg::min_eigenvalue(&linalg::hermitian_part(&gain));
    if min_eigenvalue < -tol.verify {
        return Err(Error::NotSubharmonic { min_eigenvalue });
    }
    let q = p.range();
    let mut kraus: Vec<Matrix> = map
        .kraus()
        .iter()
        .map(|l| q.adjoint() * l * q)
        .filter(|k| k.norm() > 1e-14)
        .collect();
    if kraus.is_empty() {
        kraus.push(Matrix::zeros(q.ncols(), q.ncols()));
    }
    CPMap::with_tolerances(
        kraus,
        &Tolerances {
            unital: tol.verify,
            ..*tol
        },
    )
}

/// Monotone limit of `tau^n(p)` for a sub-harmonic projection.
#[derive(Debug, Clone, Serialize)]
pub struct SubharmonicLimit {
    #[serde(serialize_with = "crate::io::ser_matrix")]
    pub limit: Matrix,
    /// `||limit - I|| <= tol`.
    pub reaches_identity: bool,
    /// Number of applications of `tau` in the last iterate.
    pub steps: u64,
}

/// Iterates `tau^{2^k}(p)` by repeated squaring of the superoperator until
/// successive iterates differ by at most `tol / 100` or the exponent reaches
/// `n_max`.
pub fn subharmonic_limit(
    map: &CPMap,
    p: &Projection,
    n_max: u64,
    tol: f64,
) -> Result<SubharmonicLimit> {
    let n = map.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let mut power = map.superop();
    let mut y = p.matrix().clone();
    let mut steps: u64 = 0;
    let stop = tol * 1e-2;
    loop {
        let next = power.apply(&y);
        // tau^m(p) increases in m, so every later iterate dominates
        let diff = linalg::hermitian_part(&(&next - &y));
        let min_eigenvalue = linalg::min_eigenvalue(&diff);
        if min_eigenvalue < -tol.max(1e-10) {
            return Err(Error::NotSubharmonic { min_eigenvalue });
        }
        let delta = diff.norm();
        steps = if steps == 0 { 1 } else { steps * 2 };
        y = next;
        if delta <= stop || steps >= n_max.max(1) {
            break;
        }
        power = power.compose(&power);
    }
    let reaches_identity = (&y - identity(n)).norm() <= tol;
    Ok(SubharmonicLimit {
        limit: y,
        reaches_identity,
        steps,
    })
}

/// `||(tau_*)^n(rho_phi) - rho_phi0||_1`.
pub fn predual_distance(
    map: &CPMap,
    phi: &DensityState,
    phi0: &DensityState,
    n: u64,
) -> Result<f64> {
    for d in [phi.dim(), phi0.dim()] {
        if d != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                found: d,
            });
        }
    }
    let evolved = map.predual_superop().power(n).apply(phi.rho());
    Ok(linalg::trace_norm(&(evolved - phi0.rho())))
}

/// `tr(rho tau^n(x) tau^n(y))`.
pub fn correlation(
    map: &CPMap,
    state: &DensityState,
    x: &Matrix,
    y: &Matrix,
    n: usize,
) -> Result<C64> {
    let d = map.dim();
    for m in [x, y] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
    }
    let tx = map.apply_n(x, n);
    let ty = map.apply_n(y, n);
    Ok(state.expect(&(tx * ty)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channels, pauli};
    use crate::linalg::{matrix_unit, real};

    #[test]
    fn trivial_reductions() {
        let tol = Tolerances::default();
        let map = channels::depolarizing(0.3);
        let same = reduced_semigroup(&map, &Projection::identity(2), &tol).unwrap();
        assert!((same.superop().matrix() - map.superop().matrix()).norm() < 1e-12);

        let ad = channels::amplitude_damping(0.4);
        let p = Projection::new(matrix_unit(2, 0, 0), 1e-12).unwrap();
        let corner = reduced_semigroup(&ad, &p, &tol).unwrap();
        assert_eq!(corner.dim(), 1);
        assert!(
            (corner
                .apply(&Matrix::from_element(1, 1, real(2.0)))
                .unwrap()[(0, 0)]
                - real(2.0))
            .norm()
                < 1e-12
        );
    }

    #[test]
    fn block_compression() {
        let tol = Tolerances::default();
        let a = channels::depolarizing(0.5);
        let b = channels::dephase_flip();
        let sum = channels::direct_sum(&a, &b);
        let p = Projection::new(
            Matrix::from_diagonal(&crate::linalg::Vector::from_vec(vec![
                real(1.0),
                real(1.0),
                real(0.0),
                real(0.0),
            ])),
            1e-12,
        )
        .unwrap();
        let corner = reduced_semigroup(&sum, &p, &tol).unwrap();
        assert!(corner.unitality_residual() < 1e-12);
        assert!((corner.superop().matrix() - a.superop().matrix()).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_subharmonic() {
        let tol = Tolerances::default();
        let ad = channels::amplitude_damping(0.4);
        let p = Projection::new(matrix_unit(2, 1, 1), 1e-12).unwrap();
        assert!(matches!(
            reduced_semigroup(&ad, &p, &tol),
            Err(Error::NotSubharmonic { .. })
        ));
    }

    #[test]
    fn subharmonic_limits() {
        let ad = channels::amplitude_damping(0.3);
        let id = subharmonic_limit(&ad, &Projection::identity(2), 100, 1e-9).unwrap();
        assert!(id.reaches_identity);
        let p = Projection::new(matrix_unit(2, 0, 0), 1e-12).unwrap();
        let lim = subharmonic_limit(&ad, &p, 1 << 20, 1e-9).unwrap();
        assert!(lim.reaches_identity);

        let sum = channels::direct_sum(&channels::depolarizing(0.5), &channels::depolarizing(0.2));
        let block = Matrix::from_diagonal(&crate::linalg::Vector::from_vec(vec![
            real(1.0),
            real(1.0),
            real(0.0),
            real(0.0),
        ]));
        let p = Projection::new(block.clone(), 1e-12).unwrap();
        let lim = subharmonic_limit(&sum, &p, 1 << 10, 1e-9).unwrap();
        assert!(!lim.reaches_identity);
        assert!((lim.limit - block).norm() < 1e-12);
    }

    #[test]
    fn distances_and_correlations() {
        let mm = DensityState::maximally_mixed(2);
        let up = DensityState::new(matrix_unit(2, 0, 0)).unwrap();
        let dep = channels::depolarizing(0.75);
        assert!(predual_distance(&dep, &mm, &mm, 5).unwrap() < 1e-15);
        assert!((predual_distance(&dep, &up, &mm, 1).unwrap() - 0.25).abs() < 1e-12);
        let df = channels::dephase_flip();
        for n in 1..=2 {
            assert!((predual_distance(&df, &up, &mm, n).unwrap() - 1.0).abs() < 1e-12);
        }

        let id = identity(2);
        assert!((correlation(&dep, &mm, &id, &id, 0).unwrap() - real(1.0)).norm() < 1e-15);
        let z = pauli::z();
        for n in 1..4 {
            let c = correlation(&dep, &mm, &z, &z, n).unwrap();
            assert!((c - real(0.0625f64.powi(n as i32))).norm() < 1e-14);
            let c = correlation(&df, &mm, &z, &z, n).unwrap();
            assert!((c - real(1.0)).norm() < 1e-14);
        }
    }
}
