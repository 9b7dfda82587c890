use serde::Serialize;

use crate::channel::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, Matrix, C64};
use crate::operator::{center_of, support_projection, DensityState, OperatorSubspace};
use crate::tol::Tolerances;

use super::algebras::{algebra_g, peripheral_span};
use super::invariant::invariant_states;
use super::reduction::reduced_semigroup;
use super::spectrum::{eigenspace, SpectralData};

/// Ergodic-theoretic verdict for a map with an invariant state.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub ergodic: bool,
    pub strong_mixing: bool,
    pub kolmogorov: bool,
    #[serde(serialize_with = "crate::io::ser_complex_slice")]
    pub peripheral_eigenvalues: Vec<C64>,
    #[serde(rename = "gap")]
    pub spectral_gap: f64,
    pub fixed_algebra_dim: usize,
    #[serde(rename = "G_dim")]
    pub g_dim: usize,
    pub faithful_state: bool,
    /// Largest centred correlation `|phi(tau^N x0 tau^N y0)|` over matrix units.
    pub correlation_witness: f64,
    pub correlation_steps: u64,
    /// The map moves central projections of `G` (block-permuting dynamics).
    pub permutes_center_blocks: bool,
    /// Verdict for the compression to the support of a non-faithful state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<Box<Classification>>,
}

/// Number of steps after which non-peripheral modes are below `1e-10`.
pub(crate) fn decay_horizon(second_modulus: f64) -> u64 {
    if second_modulus <= 1e-300 {
        return 1;
    }
    // the small offset keeps exact ratios such as 10.000000000000002 at 10
    let steps = ((1e-10f64).ln() / second_modulus.ln() - 1e-9).ceil();
    if steps.is_finite() {
        steps.clamp(1.0, (1u64 << 40) as f64) as u64
    } else {
        1u64 << 40
    }
}

/// `max |phi(tau^N(x0) tau^N(y0))|` over matrix units `x, y`, with
/// `x0 = x - phi(x) I`. Centring first avoids cancellation in
/// `phi(tau^N x tau^N y) - phi(x) phi(y)`.
pub fn correlation_witness(map: &CPMap, state: &DensityState, steps: u64) -> f64 {
    let n = map.dim();
    let s = map.superop().power(steps);
    let id = identity(n);
    let centred: Vec<Matrix> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| {
            let x = linalg::matrix_unit(n, i, j);
            let x0 = &x - &id * state.expect(&x);
            let z = s.apply(&x0);
            &z - &id * state.expect(&z)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for a in &centred {
        for b in &centred {
            worst = worst.max(state.expect(&(a * b)).norm());
        }
    }
    worst
}

/// Classify `tau` against an invariant state; with `None` the mean of the
/// invariant states is used.
pub fn classify(
    map: &CPMap,
    state: Option<&DensityState>,
    tol: &Tolerances,
) -> Result<Classification> {
    let owned;
    let state = match state {
        Some(s) => s,
        None => {
            owned = invariant_states(map, tol)?.mean().clone();
            &owned
        }
    };
    if state.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: state.dim(),
        });
    }
    let residual = map.invariance_residual(state);
    if residual > tol.invariance {
        return Err(Error::NotInvariant {
            residual,
            tolerance: tol.invariance,
        });
    }

    let s = map.superop();
    let spectral = SpectralData::from_matrix(s.matrix(), tol)?;
    let fixed_algebra_dim = eigenspace(s.matrix(), C64::new(1.0, 0.0), tol).ncols();
    let ergodic = fixed_algebra_dim == 1;
    let strong_mixing = ergodic && spectral.trivial_periphery();
    let steps = decay_horizon(spectral.second_modulus);
    let witness = correlation_witness(map, state, steps);
    let kolmogorov = witness <= tol.correlation;
    let faithful = state.is_faithful(tol);

    let mut out = Classification {
        ergodic,
        strong_mixing,
        kolmogorov,
        peripheral_eigenvalues: spectral.peripheral.clone(),
        spectral_gap: spectral.gap(),
        fixed_algebra_dim,
        g_dim: 0,
        faithful_state: faithful,
        correlation_witness: witness,
        correlation_steps: steps,
        permutes_center_blocks: false,
        reduced: None,
    };

    if faithful {
        if kolmogorov != strong_mixing {
            return Err(Error::VerdictMismatch {
                spectral: strong_mixing,
                witness,
            });
        }
        let g = algebra_g(map, state, tol)?;
        out.g_dim = g.dim();
        let center = center_of(&g, tol)?;
        out.permutes_center_blocks = center
            .basis()
            .iter()
            .any(|z| (map.apply_unchecked(z) - z).norm() > tol.verify);
    } else {
        out.g_dim = peripheral_span(map, &spectral, tol).dim();
        let p = support_projection(state, tol.faithful);
        let reduced_map = reduced_semigroup(map, &p, tol)?;
        let q = p.range();
        let reduced_rho = q.adjoint() * state.rho() * q;
        let reduced_state = DensityState::from_approximate(&reduced_rho)?;
        out.reduced = Some(Box::new(classify(&reduced_map, Some(&reduced_state), tol)?));
    }
    Ok(out)
}

/// Ergodicity and mixing of `tau` restricted to an invariant subspace.
pub fn classify_restricted(
    map: &CPMap,
    sub: &OperatorSubspace,
    tol: &Tolerances,
) -> Result<(bool, bool)> {
    let s = map.superop();
    let b = sub.basis_matrix();
    let sb = s.matrix() * &b;
    let leak = (&sb - &b * (b.adjoint() * &sb)).norm();
    if leak > tol.verify {
        return Err(Error::Verification {
            check: "restriction_invariant".into(),
            residual: leak,
            tolerance: tol.verify,
        });
    }
    let r = b.adjoint() * sb;
    let fixed = eigenspace(&r, C64::new(1.0, 0.0), tol).ncols();
    let ergodic = fixed == 1;
    let mixing = ergodic && SpectralData::from_matrix(&r, tol)?.trivial_periphery();
    Ok((ergodic, mixing))
}

/// `max ||tau^k(x) - phi(x) I||` over matrix units, by direct iteration.
pub fn mixing_residual(map: &CPMap, state: &DensityState, k: usize) -> f64 {
    let n = map.dim();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let x = linalg::matrix_unit(n, i, j);
            let target = identity(n) * state.expect(&x);
            worst = worst.max((map.apply_n(&x, k) - target).norm());
        }
    }
    worst
}
