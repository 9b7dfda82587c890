//! Dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Everything here works on `DMatrix<Complex<f64>>`. Vectorisation is
//! column-major (column stacking), which is also nalgebra's storage order.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

/// Matrix unit `E_{ij}` (zero-based).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = real(1.0);
    m
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// Hilbert-Schmidt inner product `tr(a^* b)`.
pub fn hs_inner(a: &Matrix, b: &Matrix) -> C64 {
    a.dotc(b)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone()
        .svd_unordered(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Spectral (operator) norm.
pub fn op_norm(m: &Matrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Trace norm (sum of singular values).
pub fn trace_norm(m: &Matrix) -> f64 {
    singular_values(m).into_iter().sum()
}

pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermiticity_residual(m: &Matrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl HermEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Rebuild `sum_k f(lambda_k) v_k v_k^*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.vectors.nrows();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            out += (v * v.adjoint()).scale(f(lam));
        }
        out
    }
}

/// Hermitian eigensolver; the input is symmetrised before decomposition.
pub fn eigh(m: &Matrix) -> HermEigen {
    let n = m.nrows();
    if n == 0 {
        return HermEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermEigen { values, vectors }
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    eigh(m).min()
}

/// Apply a real function to a Hermitian matrix through its spectrum.
pub fn herm_fn(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    eigh(m).map(f)
}

/// Orthonormal basis (as columns) of the null space of `a`.
///
/// Singular values below `rel_tol * max(1, sigma_max)` count as zero.
pub fn null_space(a: &Matrix, rel_tol: f64) -> Matrix {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Matrix::zeros(0, 0);
    }
    // nalgebra's SVD is thin; pad with zero rows so V is square.
    let padded = if rows < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1.0);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut out = Matrix::zeros(cols, idx.len());
    for (j, &k) in idx.iter().enumerate() {
        let row = v_t.row(k);
        for i in 0..cols {
            out[(i, j)] = row[i].conj();
        }
    }
    out
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn range_basis(a: &Matrix, rel_tol: f64) -> Matrix {
    let (rows, cols) = a.shape();
    if cols == 0 || rows == 0 {
        return Matrix::zeros(rows, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Matrix::zeros(rows, 0);
    }
    let cut = rel_tol * smax.max(1.0);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cut)
        .collect();
    let mut out = Matrix::zeros(rows, idx.len());
    for (j, &k) in idx.iter().enumerate() {
        out.set_column(j, &u.column(k));
    }
    out
}

/// Numerical rank with the same cut-off as [`null_space`].
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    let sv = singular_values(a);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1.0);
    sv.into_iter().filter(|&s| s > cut).count()
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // deflation at machine epsilon can stall on exactly unimodular spectra
    let schur = [f64::EPSILON, 1e-14, 1e-12]
        .iter()
        .find_map(|&eps| nalgebra::linalg::Schur::try_new(m.clone(), eps, 1000 * n.max(10)))
        .ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n {
            let sub = t[(i + 1, i)].norm();
            let scale = t[(i, i)].norm() + t[(i + 1, i + 1)].norm();
            if sub > f64::EPSILON * scale.max(1e-300) * 4.0 {
                let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
                let half_tr = (a + d) * 0.5;
                let det = a * d - b * c;
                let disc = (half_tr * half_tr - det).sqrt();
                out.push(half_tr + disc);
                out.push(half_tr - disc);
                i += 2;
                continue;
            }
        }
        out.push(t[(i, i)]);
        i += 1;
    }
    Ok(out)
}

/// `m^k` by repeated squaring.
pub fn matrix_power(m: &Matrix, mut k: u64) -> Matrix {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Modified Gram-Schmidt with one re-orthogonalisation pass.
///
/// Appends the normalised residual of `v` to `basis` when its norm exceeds
/// `threshold`, returning whether it was added.
pub fn gram_schmidt_push(basis: &mut Vec<Vector>, v: &Vector, threshold: f64) -> bool {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let coef = b.dotc(&r);
            r.axpy(-coef, b, real(1.0));
        }
    }
    let nrm = r.norm();
    if nrm > threshold {
        basis.push(r.unscale(nrm));
        true
    } else {
        false
    }
}

/// Stack column vectors into a matrix.
pub fn columns_to_matrix(rows: usize, cols: &[Vector]) -> Matrix {
    let mut m = Matrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}
