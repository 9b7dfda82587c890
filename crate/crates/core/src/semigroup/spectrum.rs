use crate::error::Result;
use crate::linalg::{self, identity, Matrix, C64};
use crate::tol::Tolerances;

/// Eigen-data of a superoperator relevant for classification.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// All eigenvalues, with multiplicity.
    pub eigenvalues: Vec<C64>,
    /// Unimodular eigenvalues with algebraic multiplicity, sorted by argument.
    pub peripheral: Vec<C64>,
    /// Distinct unimodular eigenvalues, sorted by argument.
    pub clusters: Vec<C64>,
    /// Largest modulus among non-peripheral eigenvalues (0 if none).
    pub second_modulus: f64,
}

impl SpectralData {
    pub fn from_matrix(s: &Matrix, tol: &Tolerances) -> Result<Self> {
        let eigenvalues = linalg::eigenvalues(s)?;
        let cut = 1.0 - tol.peripheral;
        let mut peripheral: Vec<C64> = eigenvalues
            .iter()
            .copied()
            .filter(|l| l.norm() >= cut)
            .collect();
        peripheral.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        // group numerically split copies of a degenerate eigenvalue
        let mut sums: Vec<(C64, usize)> = Vec::new();
        for &l in &peripheral {
            match sums
                .iter()
                .position(|(s, k)| (s / *k as f64 - l).norm() < 1e-6)
            {
                Some(i) => {
                    sums[i].0 += l;
                    sums[i].1 += 1;
                }
                None => sums.push((l, 1)),
            }
        }
        let clusters: Vec<C64> = sums.iter().map(|(s, k)| s / *k as f64).collect();
        let second_modulus = eigenvalues
            .iter()
            .map(|l| l.norm())
            .filter(|&m| m < cut)
            .fold(0.0, f64::max);
        Ok(SpectralData {
            eigenvalues,
            peripheral,
            clusters,
            second_modulus,
        })
    }

    /// `1 - second_modulus`, or 1 when the spectrum is entirely peripheral.
    pub fn gap(&self) -> f64 {
        1.0 - self.second_modulus
    }

    /// Peripheral spectrum is exactly `{1}` with multiplicity one.
    pub fn trivial_periphery(&self) -> bool {
        self.peripheral.len() == 1 && (self.peripheral[0] - C64::new(1.0, 0.0)).norm() < 1e-6
    }
}

/// Kernel of `s - lambda`, as orthonormal columns.
pub(crate) fn eigenspace(s: &Matrix, lambda: C64, tol: &Tolerances) -> Matrix {
    let shifted = s - identity(s.nrows()) * lambda;
    linalg::null_space(&shifted, tol.kernel)
}
