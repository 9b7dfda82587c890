use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by all analyses.
///
/// Defaults are tuned for double precision at dimensions up to 64.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity of density matrices and projections.
    pub herm: f64,
    /// Trace normalisation of density matrices.
    pub trace: f64,
    /// Smallest admissible eigenvalue of a PSD matrix is `-psd`.
    pub psd: f64,
    /// A state is faithful when its smallest eigenvalue exceeds this.
    pub faithful: f64,
    /// Residual allowed when testing closure of a subspace under products.
    pub closure: f64,
    /// Eigenvalues with modulus at least `1 - peripheral` are peripheral.
    pub peripheral: f64,
    /// Relative singular-value cut-off for null spaces and ranks.
    pub kernel: f64,
    /// Unitality of Kraus families, `|sum l l^* - I|`.
    pub unital: f64,
    /// Invariance of a state, `|tau_*(rho) - rho|`.
    pub invariance: f64,
    /// Generic verification residual (dual relation, G checks, ...).
    pub verify: f64,
    /// Correlation witness below which two-point functions factorize.
    pub correlation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            trace: 1e-10,
            psd: 1e-10,
            faithful: 1e-9,
            closure: 1e-9,
            peripheral: 1e-8,
            kernel: 1e-8,
            unital: 1e-10,
            invariance: 1e-9,
            verify: 1e-8,
            correlation: 1e-12,
        }
    }
}
