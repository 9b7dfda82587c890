//! Translation-invariant spin-chain states from Popescu data: `d` operators
//! `l_i` on a bond space `C^k` with `sum_i l_i l_i^* = I`, together with an
//! invariant state `rho` of `eta(x) = sum_i l_i x l_i^*`.
//!
//! The state on `m` sites sends `|I><J|` to `C(I, J) = tr(rho l_I l_J^*)`,
//! with `l_I = l_{i_1} ... l_{i_m}` and site 1 the leftmost tensor factor.

use serde::Serialize;

use crate::channel::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, Matrix, C64};
use crate::operator::{algebra_closure, center_of, support_projection, vectorize, DensityState};
use crate::semigroup::{classify, invariant_states};
use crate::tol::Tolerances;

/// Default bound on `d^m` for marginals.
pub const DEFAULT_MARGINAL_CAP: usize = 729;
/// Default bound on word lengths in tables.
pub const DEFAULT_MAX_WORD_LEN: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct PopescuTensor {
    k: usize,
    ops: Vec<Matrix>,
}

impl PopescuTensor {
    /// Checks shapes only; use [`validate`](Self::validate) for the
    /// row-isometry relation.
    pub fn new(ops: Vec<Matrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyKraus)?;
        let k = first.nrows();
        for op in &ops {
            if op.nrows() != op.ncols() {
                return Err(Error::NotSquare {
                    rows: op.nrows(),
                    cols: op.ncols(),
                });
            }
            if op.nrows() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: op.nrows(),
                });
            }
            if !linalg::is_finite(op) {
                return Err(Error::NonFinite);
            }
        }
        Ok(PopescuTensor { k, ops })
    }

    pub fn d(&self) -> usize {
        self.ops.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ops(&self) -> &[Matrix] {
        &self.ops
    }

    /// `||sum_i l_i l_i^* - I||` in operator norm.
    pub fn row_isometry_residual(&self) -> f64 {
        let s: Matrix = self.ops.iter().map(|l| l * l.adjoint()).sum();
        linalg::op_norm(&(s - identity(self.k)))
    }

    /// Residual of the row-isometry relation, or an error above `tol`.
    pub fn validate(&self, tol: f64) -> Result<f64> {
        let residual = self.row_isometry_residual();
        if residual > tol {
            return Err(Error::NotRowIsometry { residual });
        }
        Ok(residual)
    }

    /// `l_I`; the empty word gives the identity.
    pub fn word_op(&self, w: &Word) -> Matrix {
        w.letters()
            .iter()
            .fold(identity(self.k), |acc, &i| acc * &self.ops[i])
    }
}

/// Finite word over `{0, .., d-1}`; printed 1-based in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>, d: usize) -> Result<Self> {
        if let Some(&letter) = letters.iter().find(|&&l| l >= d) {
            return Err(Error::LetterOutOfRange { letter, d });
        }
        Ok(Word(letters))
    }

    /// Word with the given 1-based letters.
    pub fn from_one_based(letters: &[usize], d: usize) -> Result<Self> {
        if let Some(&letter) = letters.iter().find(|&&l| l == 0 || l > d) {
            return Err(Error::LetterOutOfRange { letter, d });
        }
        Ok(Word(letters.iter().map(|l| l - 1).collect()))
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|l| l + 1).collect()
    }

    /// `self` followed by `letter`.
    pub fn push(&self, letter: usize) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// All words of length exactly `len`, in lexicographic order (site 1 slowest).
    pub fn all(d: usize, len: usize) -> Vec<Word> {
        let total = d.pow(len as u32);
        (0..total)
            .map(|mut idx| {
                let mut letters = vec![0; len];
                for slot in letters.iter_mut().rev() {
                    *slot = idx % d;
                    idx /= d;
                }
                Word(letters)
            })
            .collect()
    }
}

/// `eta(x) = sum_i l_i x l_i^*`.
pub fn eta_map(tensor: &PopescuTensor, tol: &Tolerances) -> Result<CPMap> {
    tensor.validate(tol.verify)?;
    CPMap::with_tolerances(
        tensor.ops.clone(),
        &Tolerances {
            unital: tol.verify,
            ..*tol
        },
    )
}

/// `C(I, J) = tr(rho l_I l_J^*)`.
pub fn word_function(tensor: &PopescuTensor, state: &DensityState, i: &Word, j: &Word) -> C64 {
    let li = tensor.word_op(i);
    let lj = tensor.word_op(j);
    state.expect(&(li * lj.adjoint()))
}

fn check_state(tensor: &PopescuTensor, state: &DensityState, tol: &Tolerances) -> Result<()> {
    if state.dim() != tensor.k {
        return Err(Error::DimensionMismatch {
            expected: tensor.k,
            found: state.dim(),
        });
    }
    let eta = eta_map(tensor, tol)?;
    let residual = eta.invariance_residual(state);
    if residual > tol.invariance {
        return Err(Error::NotInvariant {
            residual,
            tolerance: tol.invariance,
        });
    }
    Ok(())
}

fn marginal_unchecked(tensor: &PopescuTensor, state: &DensityState, m: usize) -> Matrix {
    let words = Word::all(tensor.d(), m);
    let left: Vec<_> = words
        .iter()
        .map(|w| vectorize(&tensor.word_op(w)))
        .collect();
    let right: Vec<_> = words
        .iter()
        .map(|w| vectorize(&(state.rho() * tensor.word_op(w))))
        .collect();
    let k2 = tensor.k * tensor.k;
    let l = linalg::columns_to_matrix(k2, &left);
    let r = linalg::columns_to_matrix(k2, &right);
    // entry (I, J) = tr(l_I^* rho l_J) = C(J, I)
    linalg::hermitian_part(&(l.adjoint() * r))
}

/// Partial trace over the last site of a `d^{m+1}` density.
pub fn trace_last_site(rho: &Matrix, d: usize) -> Matrix {
    let outer = rho.nrows() / d;
    Matrix::from_fn(outer, outer, |a, b| {
        (0..d).map(|i| rho[(a * d + i, b * d + i)]).sum()
    })
}

/// Partial trace over the first site.
pub fn trace_first_site(rho: &Matrix, d: usize) -> Matrix {
    let inner = rho.nrows() / d;
    Matrix::from_fn(inner, inner, |a, b| {
        (0..d).map(|i| rho[(i * inner + a, i * inner + b)]).sum()
    })
}

/// Largest deviation between the `m`-site marginal and either partial trace
/// of the `(m+1)`-site marginal.
pub fn marginal_consistency(tensor: &PopescuTensor, state: &DensityState, m: usize) -> f64 {
    let small = marginal_unchecked(tensor, state, m);
    let big = marginal_unchecked(tensor, state, m + 1);
    let last = linalg::op_norm(&(trace_last_site(&big, tensor.d()) - &small));
    let first = linalg::op_norm(&(trace_first_site(&big, tensor.d()) - &small));
    last.max(first)
}

/// Density of the `m`-site restriction, verified positive, normalised and
/// consistent with the `(m+1)`-site restriction.
pub fn marginal_density(
    tensor: &PopescuTensor,
    state: &DensityState,
    m: usize,
    cap: usize,
    tol: &Tolerances,
) -> Result<DensityState> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "marginal needs at least one site".into(),
        ));
    }
    let requested = tensor.d().checked_pow(m as u32 + 1).unwrap_or(usize::MAX);
    if requested > cap.saturating_mul(tensor.d()) {
        return Err(Error::CapExceeded {
            requested: requested / tensor.d(),
            cap,
        });
    }
    check_state(tensor, state, tol)?;
    let rho = marginal_unchecked(tensor, state, m);
    let consistency = marginal_consistency(tensor, state, m);
    if consistency > tol.verify {
        return Err(Error::Verification {
            check: "marginal_consistency".into(),
            residual: consistency,
            tolerance: tol.verify,
        });
    }
    DensityState::with_tolerances(
        rho,
        &Tolerances {
            psd: tol.verify,
            trace: tol.verify,
            ..*tol
        },
    )
}

/// One entry of a word table.
#[derive(Debug, Clone, Serialize)]
pub struct WordEntry {
    #[serde(rename = "I")]
    pub i: Vec<usize>,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    #[serde(serialize_with = "crate::io::ser_complex")]
    pub value: C64,
}

/// All words of length `0..=max_len`, shortest first.
pub fn words_up_to(d: usize, max_len: usize) -> Vec<Word> {
    (0..=max_len).flat_map(|len| Word::all(d, len)).collect()
}

/// `C(I, J)` for all words with `|I|, |J| <= max_len`.
pub fn word_table(tensor: &PopescuTensor, state: &DensityState, max_len: usize) -> Vec<WordEntry> {
    let words = words_up_to(tensor.d(), max_len);
    let ops: Vec<Matrix> = words.iter().map(|w| tensor.word_op(w)).collect();
    let rho_ops: Vec<Matrix> = ops.iter().map(|l| state.rho() * l).collect();
    let mut out = Vec::with_capacity(words.len() * words.len());
    for (wi, ri) in words.iter().zip(&rho_ops) {
        for (wj, lj) in words.iter().zip(&ops) {
            out.push(WordEntry {
                i: wi.one_based(),
                j: wj.one_based(),
                value: linalg::trace(&(ri * lj.adjoint())),
            });
        }
    }
    out
}

/// `max |sum_i C(Ii, Ji) - C(I, J)|` over words of length `< max_len`.
pub fn compatibility_residual(tensor: &PopescuTensor, state: &DensityState, max_len: usize) -> f64 {
    let words = words_up_to(tensor.d(), max_len.saturating_sub(1));
    let mut worst: f64 = 0.0;
    for wi in &words {
        for wj in &words {
            let lhs: C64 = (0..tensor.d())
                .map(|a| word_function(tensor, state, &wi.push(a), &wj.push(a)))
                .sum();
            worst = worst.max((lhs - word_function(tensor, state, wi, wj)).norm());
        }
    }
    worst
}

/// Result of [`support_reduce`].
#[derive(Debug, Clone)]
pub struct Reduction {
    pub tensor: PopescuTensor,
    pub state: DensityState,
    pub reduced: bool,
}

/// Compress the tensor to the support of its invariant state. Faithful
/// (mean) invariant state: unchanged. Nested supports: the largest one.
/// Non-comparable supports: [`Error::AmbiguousReduction`].
pub fn support_reduce(tensor: &PopescuTensor, tol: &Tolerances) -> Result<Reduction> {
    let eta = eta_map(tensor, tol)?;
    let inv = invariant_states(&eta, tol)?;
    if inv.faithful_exists {
        return Ok(Reduction {
            tensor: tensor.clone(),
            state: inv.mean().clone(),
            reduced: false,
        });
    }
    let supports: Vec<_> = inv
        .states
        .iter()
        .map(|s| support_projection(s, tol.faithful))
        .collect();
    let (largest, _) = supports
        .iter()
        .enumerate()
        .max_by_key(|(_, p)| p.rank())
        .expect("at least one invariant state");
    let big = &supports[largest];
    let id = identity(tensor.k);
    for p in &supports {
        let outside = (&id - big.matrix()) * p.matrix();
        if outside.norm() > tol.verify.sqrt() {
            return Err(Error::AmbiguousReduction);
        }
    }
    let q = big.range();
    let ops: Vec<Matrix> = tensor.ops.iter().map(|l| q.adjoint() * l * q).collect();
    let reduced = PopescuTensor::new(ops)?;
    reduced.validate(tol.verify)?;
    let rho = q.adjoint() * inv.states[largest].rho() * q;
    Ok(Reduction {
        tensor: reduced,
        state: DensityState::from_approximate(&rho)?,
        reduced: true,
    })
}

/// `(factor, ergodic)`: trivial centre of the algebra generated by the `l_i`,
/// and trivial fixed-point space of `eta`.
pub fn extremality_check(tensor: &PopescuTensor, tol: &Tolerances) -> Result<(bool, bool)> {
    let alg = algebra_closure(tensor.k, &tensor.ops, tol.closure);
    let factor = center_of(&alg, tol)?.dim() == 1;
    let eta = eta_map(tensor, tol)?;
    let s = eta.superop();
    let shifted = s.matrix() - identity(tensor.k * tensor.k);
    let ergodic = linalg::null_space(&shifted, tol.kernel).ncols() == 1;
    Ok((factor, ergodic))
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub pure: bool,
    pub extremal: bool,
    pub factor: bool,
    pub ergodic: bool,
    #[serde(serialize_with = "crate::io::ser_complex_slice")]
    pub peripheral_eigenvalues: Vec<C64>,
    pub gap: f64,
    pub support_reduced: bool,
    pub bond_dim: usize,
    pub reduced_bond_dim: usize,
    /// Dimension of the fixed-point space of `eta` on the reduced bond space.
    pub fixed_algebra_dim: usize,
    pub correlation_witness: f64,
    /// Invariant states with non-comparable supports; the verdict is then
    /// not-pure with `fixed_algebra_dim` as witness.
    pub ambiguous_support: bool,
}

/// Purity of the chain state: strong mixing of `eta` on the support of its
/// invariant state, cross-checked against correlation factorisation.
pub fn purity_check(tensor: &PopescuTensor, tol: &Tolerances) -> Result<ChainReport> {
    let reduction = match support_reduce(tensor, tol) {
        Ok(r) => r,
        Err(Error::AmbiguousReduction) => {
            let eta = eta_map(tensor, tol)?;
            let c = classify(&eta, None, tol)?;
            let (factor, ergodic) = extremality_check(tensor, tol)?;
            return Ok(ChainReport {
                pure: false,
                extremal: factor && ergodic,
                factor,
                ergodic,
                peripheral_eigenvalues: c.peripheral_eigenvalues,
                gap: c.spectral_gap,
                support_reduced: false,
                bond_dim: tensor.k,
                reduced_bond_dim: tensor.k,
                fixed_algebra_dim: c.fixed_algebra_dim,
                correlation_witness: c.correlation_witness,
                ambiguous_support: true,
            });
        }
        Err(e) => return Err(e),
    };
    let eta = eta_map(&reduction.tensor, tol)?;
    let c = classify(&eta, Some(&reduction.state), tol)?;
    let (factor, ergodic) = extremality_check(&reduction.tensor, tol)?;
    Ok(ChainReport {
        pure: c.strong_mixing,
        extremal: factor && ergodic,
        factor,
        ergodic,
        peripheral_eigenvalues: c.peripheral_eigenvalues,
        gap: c.spectral_gap,
        support_reduced: reduction.reduced,
        bond_dim: tensor.k,
        reduced_bond_dim: reduction.tensor.k,
        fixed_algebra_dim: c.fixed_algebra_dim,
        correlation_witness: c.correlation_witness,
        ambiguous_support: false,
    })
}

/// `l_i' = sum_j conj(g_ij) l_j` for a unitary `g`.
pub fn gauge_transform(
    tensor: &PopescuTensor,
    g: &Matrix,
    tol: &Tolerances,
) -> Result<PopescuTensor> {
    let d = tensor.d();
    if g.nrows() != d || g.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: g.nrows(),
        });
    }
    let residual = linalg::op_norm(&(g.adjoint() * g - identity(d)));
    if residual > tol.verify {
        return Err(Error::NotUnitary { residual });
    }
    let ops = (0..d)
        .map(|i| {
            (0..d).fold(Matrix::zeros(tensor.k, tensor.k), |acc, j| {
                acc + &tensor.ops[j] * g[(i, j)].conj()
            })
        })
        .collect();
    PopescuTensor::new(ops)
}
