//! Unital completely positive maps in Kraus form and Lindblad generators.
//!
//! Convention: Heisenberg picture, `tau(x) = sum_i l_i x l_i^*` with
//! `sum_i l_i l_i^* = I`. The predual (Schrödinger) action on densities is
//! `rho -> sum_i l_i^* rho l_i`.

use crate::error::{Error, Result};
use crate::linalg::{self, identity, Matrix};
use crate::operator::{kraus_from_choi, vectorize, DensityState, Superoperator};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct CPMap {
    dim: usize,
    kraus: Vec<Matrix>,
}

fn check_square(m: &Matrix, n: usize) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

impl CPMap {
    pub fn new(kraus: Vec<Matrix>) -> Result<Self> {
        Self::with_tolerances(kraus, &Tolerances::default())
    }

    pub fn with_tolerances(kraus: Vec<Matrix>, tol: &Tolerances) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let dim = first.nrows();
        for l in &kraus {
            check_square(l, dim)?;
        }
        let map = Self { dim, kraus };
        let residual = map.unitality_residual();
        if residual > tol.unital {
            return Err(Error::NotUnital {
                residual,
                tolerance: tol.unital,
            });
        }
        Ok(map)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            dim: n,
            kraus: vec![identity(n)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn kraus_rank(&self) -> usize {
        self.kraus.len()
    }

    /// `|sum_i l_i l_i^* - I|` in operator norm.
    pub fn unitality_residual(&self) -> f64 {
        let s: Matrix = self.kraus.iter().map(|l| l * l.adjoint()).sum();
        linalg::op_norm(&(s - identity(self.dim)))
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        check_square(x, self.dim)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for l in &self.kraus {
            out += l * x * l.adjoint();
        }
        out
    }

    /// Predual action `rho -> sum_i l_i^* rho l_i`.
    pub fn apply_predual(&self, rho: &Matrix) -> Result<Matrix> {
        check_square(rho, self.dim)?;
        Ok(self.apply_predual_unchecked(rho))
    }

    pub(crate) fn apply_predual_unchecked(&self, rho: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for l in &self.kraus {
            out += l.adjoint() * rho * l;
        }
        out
    }

    /// `tau^k(x)` by repeated Kraus application.
    pub fn apply_n(&self, x: &Matrix, k: usize) -> Matrix {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.apply_unchecked(&y);
        }
        y
    }

    pub fn superop(&self) -> Superoperator {
        let adj: Vec<Matrix> = self.kraus.iter().map(|l| l.adjoint()).collect();
        Superoperator::from_sandwiches(self.dim, self.kraus.iter().zip(adj.iter()))
    }

    pub fn predual_superop(&self) -> Superoperator {
        self.superop().hs_adjoint()
    }

    /// Choi matrix `sum_i vec(l_i) vec(l_i)^*`.
    pub fn choi(&self) -> Matrix {
        let n2 = self.dim * self.dim;
        let mut c = Matrix::zeros(n2, n2);
        for l in &self.kraus {
            let v = vectorize(l);
            c += &v * v.adjoint();
        }
        c
    }

    /// `self ∘ other`, with Kraus family `{l_i k_j}`.
    pub fn compose(&self, other: &CPMap) -> Result<CPMap> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for l in &self.kraus {
            for k in &other.kraus {
                kraus.push(l * k);
            }
        }
        Ok(CPMap {
            dim: self.dim,
            kraus,
        })
    }

    /// Equivalent Kraus family of minimal length (Choi eigen-decomposition).
    pub fn minimal_kraus(&self, tol: &Tolerances) -> Result<CPMap> {
        let kraus = kraus_from_choi(&self.choi(), self.dim, tol)?;
        CPMap::with_tolerances(
            kraus,
            &Tolerances {
                unital: tol.unital.max(1e-9),
                ..*tol
            },
        )
    }

    /// Residual of predual invariance `|tau_*(rho) - rho|`.
    pub fn invariance_residual(&self, state: &DensityState) -> f64 {
        (self.apply_predual_unchecked(state.rho()) - state.rho()).norm()
    }

    /// Build from a superoperator, extracting Kraus operators from its Choi
    /// matrix.
    pub fn from_superop(s: &Superoperator, tol: &Tolerances) -> Result<CPMap> {
        let kraus = s.kraus(tol)?;
        CPMap::with_tolerances(kraus, tol)
    }

    pub(crate) fn from_kraus_unchecked(dim: usize, kraus: Vec<Matrix>) -> Self {
        Self { dim, kraus }
    }
}

/// Generator `L(x) = i[H,x] + sum_k (L_k^* x L_k - 1/2 {L_k^* L_k, x})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: Matrix,
    jumps: Vec<Matrix>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: Matrix, jumps: Vec<Matrix>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        check_square(&hamiltonian, dim)?;
        let residual = linalg::hermiticity_residual(&hamiltonian);
        if residual > Tolerances::default().herm {
            return Err(Error::NotHermitian { residual });
        }
        for j in &jumps {
            check_square(j, dim)?;
        }
        Ok(Self {
            dim,
            hamiltonian: linalg::hermitian_part(&hamiltonian),
            jumps,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &Matrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Matrix] {
        &self.jumps
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let i = linalg::c64(0.0, 1.0);
        let h = &self.hamiltonian;
        let mut out = (h * x - x * h) * i;
        for l in &self.jumps {
            let ll = l.adjoint() * l;
            out += l.adjoint() * x * l - (&ll * x + x * &ll).scale(0.5);
        }
        out
    }

    /// Superoperator of the generator (Heisenberg action).
    pub fn superop(&self) -> Superoperator {
        let n = self.dim;
        let id = identity(n);
        let i = linalg::c64(0.0, 1.0);
        let h = &self.hamiltonian;
        let mut m = (linalg::kron(&id, h) - linalg::kron(&h.transpose(), &id)) * i;
        for l in &self.jumps {
            let ll = l.adjoint() * l;
            m += linalg::kron(&l.transpose(), &l.adjoint());
            m -= (linalg::kron(&id, &ll) + linalg::kron(&ll.transpose(), &id)).scale(0.5);
        }
        Superoperator::new(n, m).expect("dimensions consistent")
    }

    /// `|L(I)|`; zero for a well-formed generator.
    pub fn unitality_residual(&self) -> f64 {
        self.apply(&identity(self.dim)).norm()
    }
}

/// Pauli matrices.
pub mod pauli {
    use crate::linalg::{c64, real, Matrix};

    pub fn x() -> Matrix {
        Matrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)])
    }

    pub fn y() -> Matrix {
        Matrix::from_row_slice(2, 2, &[real(0.0), c64(0.0, -1.0), c64(0.0, 1.0), real(0.0)])
    }

    pub fn z() -> Matrix {
        Matrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(-1.0)])
    }

    /// Lowering operator `|0><1|`.
    pub fn lowering() -> Matrix {
        Matrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(0.0), real(0.0)])
    }
}

/// Standard channels used throughout tests, examples and the CLI corpus.
pub mod channels {
    use super::{pauli, CPMap};
    use crate::error::Result;
    use crate::linalg::{identity, matrix_unit, real, Matrix};
    use crate::tol::Tolerances;

    /// Conjugation `x -> u x u^*`.
    pub fn unitary(u: Matrix) -> Result<CPMap> {
        CPMap::new(vec![u])
    }

    /// Qubit depolarizing map `x -> (1-p) x + p tr(x)/2 I`, `0 <= p <= 4/3`.
    pub fn depolarizing(p: f64) -> CPMap {
        let a = (1.0 - 0.75 * p).max(0.0).sqrt();
        let b = (p / 4.0).sqrt();
        let mut kraus = vec![identity(2) * real(a)];
        for s in [pauli::x(), pauli::y(), pauli::z()] {
            kraus.push(s * real(b));
        }
        CPMap::from_kraus_unchecked(2, kraus)
    }

    /// Diagonal measurement followed by a bit flip: `x -> x_11 E_22 + x_22 E_11`.
    pub fn dephase_flip() -> CPMap {
        CPMap::from_kraus_unchecked(
            2,
            vec![
                pauli::x() * matrix_unit(2, 0, 0),
                pauli::x() * matrix_unit(2, 1, 1),
            ],
        )
    }

    /// Amplitude damping whose predual relaxes to `|0><0|`.
    pub fn amplitude_damping(gamma: f64) -> CPMap {
        let k0 = Matrix::from_row_slice(
            2,
            2,
            &[real(1.0), real(0.0), real(0.0), real((1.0 - gamma).sqrt())],
        );
        let k1 =
            Matrix::from_row_slice(2, 2, &[real(0.0), real(0.0), real(gamma.sqrt()), real(0.0)]);
        CPMap::from_kraus_unchecked(2, vec![k0, k1])
    }

    /// Diagonal dephasing `x -> sum_i E_ii x E_ii` on `M_n`.
    pub fn dephasing(n: usize) -> CPMap {
        CPMap::from_kraus_unchecked(n, (0..n).map(|i| matrix_unit(n, i, i)).collect())
    }

    /// Block-diagonal direct sum: each Kraus operator of `a` padded with the
    /// matching one of `b` (shorter family padded with zeros).
    pub fn direct_sum(a: &CPMap, b: &CPMap) -> CPMap {
        let (na, nb) = (a.dim(), b.dim());
        let m = a.kraus_rank().max(b.kraus_rank());
        let mut kraus = Vec::with_capacity(m);
        for i in 0..m {
            let mut k = Matrix::zeros(na + nb, na + nb);
            if let Some(l) = a.kraus().get(i) {
                k.view_mut((0, 0), (na, na)).copy_from(l);
            }
            if let Some(l) = b.kraus().get(i) {
                k.view_mut((na, na), (nb, nb)).copy_from(l);
            }
            kraus.push(k);
        }
        CPMap::from_kraus_unchecked(na + nb, kraus)
    }

    /// Three-level map: levels {0,1} are swapped each step, level 2 decays
    /// into 0 with probability `gamma`. The invariant state lives on {0,1}.
    pub fn flip_with_leak(gamma: f64) -> CPMap {
        // Schrödinger-picture operators K; Heisenberg Kraus are K^*.
        let ks = [
            matrix_unit(3, 1, 0),
            matrix_unit(3, 0, 1),
            matrix_unit(3, 0, 2) * real(gamma.sqrt()),
            matrix_unit(3, 2, 2) * real((1.0 - gamma).sqrt()),
        ];
        CPMap::from_kraus_unchecked(3, ks.iter().map(|k| k.adjoint()).collect())
    }

    /// Validate a hand-built map with default tolerances.
    pub fn validated(map: CPMap) -> Result<CPMap> {
        CPMap::with_tolerances(map.kraus().to_vec(), &Tolerances::default())
    }
}
