//! Operator primitives: vectorisation, superoperators, density states,
//! projections and finite-dimensional *-subalgebras.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, columns_to_matrix, eigh, gram_schmidt_push, identity, Matrix, Vector, C64,
};
use crate::tol::Tolerances;

/// Column-stacking vectorisation: entry `(i, j)` lands at index `i + n*j`.
pub fn vectorize(x: &Matrix) -> Vector {
    Vector::from_column_slice(x.as_slice())
}

/// Inverse of [`vectorize`] for an `n x n` matrix.
pub fn devectorize(v: &Vector, n: usize) -> Result<Matrix> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: v.len(),
        });
    }
    Ok(Matrix::from_column_slice(n, n, v.as_slice()))
}

fn unvec(v: impl Iterator<Item = C64>, n: usize) -> Matrix {
    Matrix::from_iterator(n, n, v)
}

/// Linear map on `M_n` represented as an `n^2 x n^2` matrix acting on
/// column-stacked matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: Matrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: Matrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    /// Superoperator of `x -> sum_i a_i x b_i`, i.e. `sum_i b_i^T (x) a_i`.
    pub fn from_sandwiches<'a>(
        dim: usize,
        terms: impl IntoIterator<Item = (&'a Matrix, &'a Matrix)>,
    ) -> Self {
        let mut matrix = Matrix::zeros(dim * dim, dim * dim);
        for (a, b) in terms {
            matrix += linalg::kron(&b.transpose(), a);
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let v = &self.matrix * vectorize(x);
        unvec(v.iter().copied(), self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Hilbert-Schmidt adjoint, i.e. the predual of a Heisenberg map.
    pub fn hs_adjoint(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn power(&self, k: u64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: linalg::matrix_power(&self.matrix, k),
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        linalg::eigenvalues(&self.matrix)
    }

    /// Choi matrix `sum_{ab} E_ab (x) Phi(E_ab)`.
    pub fn choi(&self) -> Matrix {
        let n = self.dim;
        // C[c + n a, d + n b] = S[c + n d, a + n b]
        Matrix::from_fn(n * n, n * n, |r, s| {
            let (c, a) = (r % n, r / n);
            let (d, b) = (s % n, s / n);
            self.matrix[(c + n * d, a + n * b)]
        })
    }

    /// Kraus family from the Choi matrix; errors if the map is not CP.
    pub fn kraus(&self, tol: &Tolerances) -> Result<Vec<Matrix>> {
        kraus_from_choi(&self.choi(), self.dim, tol)
    }
}

pub(crate) fn kraus_from_choi(choi: &Matrix, n: usize, tol: &Tolerances) -> Result<Vec<Matrix>> {
    let eig = eigh(choi);
    let scale = eig.max().abs().max(1.0);
    if eig.min() < -tol.psd * scale * (n as f64) {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.min(),
        });
    }
    let cut = 1e-10 * scale;
    let mut out = Vec::new();
    for k in (0..eig.values.len()).rev() {
        let lam = eig.values[k];
        if lam > cut {
            let col = eig.vectors.column(k);
            out.push(unvec(col.iter().map(|z| z * lam.sqrt()), n));
        }
    }
    if out.is_empty() {
        out.push(Matrix::zeros(n, n));
    }
    Ok(out)
}

/// Positive trace-one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    rho: Matrix,
    min_eigenvalue: f64,
}

impl DensityState {
    pub fn new(rho: Matrix) -> Result<Self> {
        Self::with_tolerances(rho, &Tolerances::default())
    }

    pub fn with_tolerances(rho: Matrix, tol: &Tolerances) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::NotSquare {
                rows: rho.nrows(),
                cols: rho.ncols(),
            });
        }
        if !linalg::is_finite(&rho) {
            return Err(Error::NonFinite);
        }
        let herm = linalg::hermiticity_residual(&rho);
        if herm > tol.herm {
            return Err(Error::InvalidState {
                reason: format!("not Hermitian (residual {herm:e})"),
            });
        }
        let rho = linalg::hermitian_part(&rho);
        let tr = linalg::trace(&rho).re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::InvalidState {
                reason: format!("trace {tr} differs from 1"),
            });
        }
        let min_eigenvalue = eigh(&rho).min();
        if min_eigenvalue < -tol.psd {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {min_eigenvalue:e}"),
            });
        }
        Ok(Self {
            rho,
            min_eigenvalue,
        })
    }

    /// Maximally mixed state `I/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            rho: identity(n).unscale(n as f64),
            min_eigenvalue: 1.0 / n as f64,
        }
    }

    /// Pure state `|psi><psi|` for a (not necessarily normalised) vector.
    pub fn pure(psi: &Vector) -> Result<Self> {
        let nrm = psi.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        let v = psi.unscale(nrm);
        Self::new(&v * v.adjoint())
    }

    /// Hermitise, clip negative eigenvalues and renormalise.
    pub(crate) fn from_approximate(m: &Matrix) -> Result<Self> {
        let clipped = linalg::herm_fn(m, |l| l.max(0.0));
        let tr = linalg::trace(&clipped).re;
        if tr <= 0.0 {
            return Err(Error::InvalidState {
                reason: "no positive mass".into(),
            });
        }
        Self::new(clipped.unscale(tr))
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &Matrix {
        &self.rho
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_faithful(&self, tol: &Tolerances) -> bool {
        self.min_eigenvalue > tol.faithful
    }

    /// `phi(x) = tr(rho x)`.
    pub fn expect(&self, x: &Matrix) -> C64 {
        // tr(rho x) = sum_ij rho_ij x_ji = <rho^*, x>_HS with rho Hermitian
        self.rho.dotc(x)
    }
}

/// Orthogonal projection `p = p^* = p^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    p: Matrix,
    range: Matrix,
}

impl Projection {
    pub fn new(p: Matrix, tol: f64) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::NotSquare {
                rows: p.nrows(),
                cols: p.ncols(),
            });
        }
        let residual = linalg::hermiticity_residual(&p).max((&p * &p - &p).norm());
        if residual > tol {
            return Err(Error::NotProjection { residual });
        }
        let eig = eigh(&p);
        let idx: Vec<usize> = (0..eig.values.len())
            .filter(|&k| eig.values[k] > 0.5)
            .collect();
        let mut range = Matrix::zeros(p.nrows(), idx.len());
        for (j, &k) in idx.iter().enumerate() {
            range.set_column(j, &eig.vectors.column(k));
        }
        let p = &range * range.adjoint();
        Ok(Self { p, range })
    }

    /// Projection onto the span of the orthonormal columns of `range`.
    pub fn from_range(range: Matrix) -> Self {
        let p = &range * range.adjoint();
        Self { p, range }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_range(identity(n))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    /// Orthonormal basis of the range, as columns.
    pub fn range(&self) -> &Matrix {
        &self.range
    }

    pub fn rank(&self) -> usize {
        self.range.ncols()
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }
}

/// Support projection of a state: spectral projection onto eigenvalues
/// larger than `tol`.
pub fn support_projection(state: &DensityState, tol: f64) -> Projection {
    let eig = eigh(state.rho());
    let idx: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > tol)
        .collect();
    let mut range = Matrix::zeros(state.dim(), idx.len());
    for (j, &k) in idx.iter().enumerate() {
        range.set_column(j, &eig.vectors.column(k));
    }
    Projection::from_range(range)
}

/// Subspace of `M_n` with a Hilbert-Schmidt orthonormal basis.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<Matrix>,
}

impl OperatorSubspace {
    /// Span of arbitrary matrices, orthonormalised.
    pub fn span(ambient_dim: usize, generators: &[Matrix], rel_tol: f64) -> Self {
        let mut vecs: Vec<Vector> = Vec::new();
        let thr = rel_tol * generators.iter().map(|g| g.norm()).fold(1.0, f64::max);
        for g in generators {
            gram_schmidt_push(&mut vecs, &vectorize(g), thr);
        }
        Self::from_vectors(ambient_dim, &vecs)
    }

    /// Subspace spanned by the orthonormal columns of `cols` (vectorised matrices).
    pub fn from_orthonormal_columns(ambient_dim: usize, cols: &Matrix) -> Self {
        let basis = cols
            .column_iter()
            .map(|c| unvec(c.iter().copied(), ambient_dim))
            .collect();
        Self { ambient_dim, basis }
    }

    fn from_vectors(ambient_dim: usize, vecs: &[Vector]) -> Self {
        let basis = vecs
            .iter()
            .map(|v| unvec(v.iter().copied(), ambient_dim))
            .collect();
        Self { ambient_dim, basis }
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .flat_map(|j| (0..n).map(move |i| linalg::matrix_unit(n, i, j)))
            .collect();
        Self {
            ambient_dim: n,
            basis,
        }
    }

    pub fn scalars(n: usize) -> Self {
        Self {
            ambient_dim: n,
            basis: vec![identity(n).unscale((n as f64).sqrt())],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    /// Basis as columns of an `n^2 x dim` matrix.
    pub fn basis_matrix(&self) -> Matrix {
        let n2 = self.ambient_dim * self.ambient_dim;
        let cols: Vec<Vector> = self.basis.iter().map(vectorize).collect();
        columns_to_matrix(n2, &cols)
    }

    /// Hilbert-Schmidt orthogonal projection onto the subspace.
    pub fn project(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += b * linalg::hs_inner(b, x);
        }
        out
    }

    /// Norm of the component of `x` orthogonal to the subspace.
    pub fn residual(&self, x: &Matrix) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &Matrix, tol: f64) -> bool {
        self.residual(x) <= tol * x.norm().max(1.0)
    }

    /// Largest residual of `a b` and `a^*` over basis pairs; zero for a
    /// *-algebra.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            worst = worst.max(self.residual(&a.adjoint()));
            for b in &self.basis {
                worst = worst.max(self.residual(&(a * b)));
            }
        }
        worst
    }

    /// Whether the subspace is a unital *-algebra within `tol`.
    pub fn is_algebra(&self, tol: f64) -> bool {
        self.closure_residual() <= tol && self.contains(&identity(self.ambient_dim), tol)
    }

    /// Intersection with another subspace of the same ambient algebra.
    pub fn intersect(&self, other: &OperatorSubspace, rel_tol: f64) -> OperatorSubspace {
        let a = self.basis_matrix();
        if a.ncols() == 0 {
            return self.clone();
        }
        let b = other.basis_matrix();
        let n2 = a.nrows();
        let comp = identity(n2) - &b * b.adjoint();
        let coeffs = linalg::null_space(&(comp * &a), rel_tol);
        let cols = &a * coeffs;
        OperatorSubspace::from_orthonormal_columns(
            self.ambient_dim,
            &linalg::range_basis(&cols, rel_tol),
        )
    }

    /// Whether every basis element of `self` lies in `other`.
    pub fn is_subspace_of(&self, other: &OperatorSubspace, tol: f64) -> bool {
        self.basis.iter().all(|b| other.residual(b) <= tol)
    }
}

/// Smallest unital *-algebra containing the generators.
pub fn algebra_closure(n: usize, generators: &[Matrix], tol: f64) -> OperatorSubspace {
    let scale = generators.iter().map(|g| g.norm()).fold(1.0, f64::max);
    let mut seeds = vec![identity(n)];
    for g in generators {
        if g.nrows() != n || g.ncols() != n {
            continue;
        }
        seeds.push(g.clone());
        seeds.push(g.adjoint());
    }
    let mut vecs: Vec<Vector> = Vec::new();
    for s in &seeds {
        gram_schmidt_push(&mut vecs, &vectorize(s), tol * scale);
    }
    loop {
        let before = vecs.len();
        let mats: Vec<Matrix> = vecs.iter().map(|v| unvec(v.iter().copied(), n)).collect();
        for a in &mats {
            gram_schmidt_push(&mut vecs, &vectorize(&a.adjoint()), tol);
            for b in &mats {
                if vecs.len() == n * n {
                    break;
                }
                gram_schmidt_push(&mut vecs, &vectorize(&(a * b)), tol);
            }
        }
        if vecs.len() == before || vecs.len() == n * n {
            break;
        }
    }
    OperatorSubspace::from_vectors(n, &vecs)
}

/// Centre of a *-algebra: elements commuting with every basis element.
pub fn center_of(alg: &OperatorSubspace, tol: &Tolerances) -> Result<OperatorSubspace> {
    let residual = alg.closure_residual();
    if residual > tol.closure {
        return Err(Error::NotAnAlgebra { residual });
    }
    let n = alg.ambient_dim();
    let r = alg.dim();
    if r == 0 {
        return Ok(alg.clone());
    }
    let n2 = n * n;
    // column j stacks vec([b_j, b_k]) over k
    let mut stacked = Matrix::zeros(n2 * r, r);
    for (j, bj) in alg.basis().iter().enumerate() {
        for (k, bk) in alg.basis().iter().enumerate() {
            let comm = bj * bk - bk * bj;
            stacked
                .view_mut((k * n2, j), (n2, 1))
                .copy_from(&vectorize(&comm));
        }
    }
    let coeffs = linalg::null_space(&stacked, tol.kernel);
    let cols = alg.basis_matrix() * coeffs;
    Ok(OperatorSubspace::from_orthonormal_columns(n, &cols))
}

/// Report line for a numerical check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, matrix_unit, real};
    use crate::pauli;

    #[test]
    fn vectorize_identity_and_unit() {
        let v = vectorize(&identity(2));
        assert_eq!(v.as_slice(), &[real(1.0), real(0.0), real(0.0), real(1.0)]);
        // E_12 (row 1, column 2, one-based) sits at index 0 + 2*1
        let e12 = vectorize(&matrix_unit(2, 0, 1));
        let mut expected = Vector::zeros(4);
        expected[2] = real(1.0);
        assert_eq!(e12, expected);
    }

    #[test]
    fn vectorize_preserves_norm() {
        let m = Matrix::from_fn(3, 3, |i, j| {
            c64(i as f64 - 0.3 * j as f64, 0.7 * (i * j) as f64 - 1.0)
        });
        let v = vectorize(&m);
        assert!((v.norm() - m.norm()).abs() < 1e-14);
        assert_eq!(devectorize(&v, 3).unwrap(), m);
        assert!(devectorize(&v, 2).is_err());
    }

    #[test]
    fn support_projection_examples() {
        let p = support_projection(&DensityState::maximally_mixed(3), 1e-10);
        assert!((p.matrix() - identity(3)).norm() < 1e-12);

        let pure = DensityState::new(matrix_unit(2, 0, 0)).unwrap();
        let p = support_projection(&pure, 1e-10);
        assert!((p.matrix() - matrix_unit(2, 0, 0)).norm() < 1e-12);

        let rho = Matrix::from_diagonal(&Vector::from_vec(vec![real(0.7), real(0.3), real(0.0)]));
        let st = DensityState::new(rho.clone()).unwrap();
        let p = support_projection(&st, 1e-10);
        let expected =
            Matrix::from_diagonal(&Vector::from_vec(vec![real(1.0), real(1.0), real(0.0)]));
        assert!((p.matrix() - expected).norm() < 1e-12);
        assert!((p.matrix() * &rho * p.matrix() - &rho).norm() < 3e-10);
        assert!((st.expect(p.matrix()) - real(1.0)).norm() < 3e-10);
    }

    #[test]
    fn closure_examples() {
        assert_eq!(algebra_closure(2, &[identity(2)], 1e-9).dim(), 1);
        assert_eq!(algebra_closure(2, &[pauli::z()], 1e-9).dim(), 2);
        assert_eq!(algebra_closure(2, &[pauli::x(), pauli::z()], 1e-9).dim(), 4);
    }

    #[test]
    fn closure_is_idempotent() {
        let alg = algebra_closure(3, &[matrix_unit(3, 0, 1)], 1e-9);
        let again = algebra_closure(3, alg.basis(), 1e-9);
        assert_eq!(alg.dim(), again.dim());
        assert!(alg.is_algebra(1e-9));
    }

    #[test]
    fn centers() {
        let tol = Tolerances::default();
        assert_eq!(
            center_of(&OperatorSubspace::full(2), &tol).unwrap().dim(),
            1
        );
        let diag = algebra_closure(2, &[pauli::z()], 1e-9);
        assert_eq!(center_of(&diag, &tol).unwrap().dim(), 2);

        // M_2 (+) M_2 inside M_4
        let mut gens = Vec::new();
        for blk in 0..2 {
            for (i, j) in [(0, 1), (1, 0), (0, 0)] {
                gens.push(matrix_unit(4, 2 * blk + i, 2 * blk + j));
            }
        }
        let alg = algebra_closure(4, &gens, 1e-9);
        assert_eq!(alg.dim(), 8);
        let center = center_of(&alg, &tol).unwrap();
        assert_eq!(center.dim(), 2);
        let p1 = Matrix::from_diagonal(&Vector::from_vec(vec![
            real(1.0),
            real(1.0),
            real(0.0),
            real(0.0),
        ]));
        assert!(center.residual(&p1) < 1e-10);
        assert!(center.residual(&identity(4)) < 1e-10);
    }

    #[test]
    fn center_rejects_non_algebra() {
        let sub = OperatorSubspace::span(2, &[matrix_unit(2, 0, 1)], 1e-12);
        assert!(matches!(
            center_of(&sub, &Tolerances::default()),
            Err(Error::NotAnAlgebra { .. })
        ));
    }

    #[test]
    fn state_validation() {
        assert!(DensityState::new(matrix_unit(2, 0, 1)).is_err());
        assert!(DensityState::new(identity(2)).is_err());
        let neg = Matrix::from_diagonal(&Vector::from_vec(vec![real(1.5), real(-0.5)]));
        assert!(DensityState::new(neg).is_err());
        let st = DensityState::maximally_mixed(2);
        assert!(st.is_faithful(&Tolerances::default()));
        assert!((st.expect(&pauli::z())).norm() < 1e-15);
    }

    #[test]
    fn projection_validation() {
        assert!(Projection::new(matrix_unit(2, 0, 1), 1e-10).is_err());
        let p = Projection::new(matrix_unit(2, 1, 1), 1e-10).unwrap();
        assert_eq!(p.rank(), 1);
    }
}
