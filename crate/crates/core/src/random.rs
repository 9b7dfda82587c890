//! Seeded random instances for property sweeps.
//!
//! Every instance of a sweep gets its own ChaCha stream, seeded by
//! [`instance_seed`], so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{CPMap, LindbladGenerator};
use crate::linalg::{self, c64, real, Matrix};
use crate::operator::DensityState;

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-instance seed derived from a sweep seed and the instance index.
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary via QR with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let qr = ginibre(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    linalg::hermitian_part(&ginibre(rng, n, n))
}

/// Random unital CP map with `m` Kraus operators: `l_i = S^{-1/2} G_i` with
/// `S = sum_i G_i G_i^*`.
pub fn channel<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> CPMap {
    let gs: Vec<Matrix> = (0..m.max(1)).map(|_| ginibre(rng, n, n)).collect();
    let s: Matrix = gs.iter().map(|g| g * g.adjoint()).sum();
    let inv_sqrt = linalg::herm_fn(&s, |l| 1.0 / l.sqrt());
    let kraus = gs.iter().map(|g| &inv_sqrt * g).collect();
    CPMap::from_kraus_unchecked(n, kraus)
}

/// Random full-rank density matrix (induced measure).
pub fn state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityState {
    let g = ginibre(rng, n, n);
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    DensityState::new(w.unscale(tr)).expect("Wishart matrix is a valid state")
}

/// Random Lindblad generator with a Hamiltonian and `jumps` jump operators.
pub fn lindblad<R: Rng + ?Sized>(rng: &mut R, n: usize, jumps: usize) -> LindbladGenerator {
    let h = hermitian(rng, n);
    let ls = (0..jumps).map(|_| ginibre(rng, n, n) * real(0.7)).collect();
    LindbladGenerator::new(h, ls).expect("random generator is well formed")
}

/// Random orthonormal basis of `M_n` in the Hilbert-Schmidt inner product.
pub fn hs_basis<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Matrix> {
    let q = unitary(rng, n * n);
    q.column_iter()
        .map(|c| Matrix::from_iterator(n, n, c.iter().copied()))
        .collect()
}

/// Random row-isometric family `l_1..l_d` of `k x k` matrices.
pub fn popescu_ops<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Vec<Matrix> {
    channel(rng, k, d).kraus().to_vec()
}

/// Row-isometric family on `C^{k + extra}` whose first `k` coordinates are
/// invariant for the predual and whose last `extra` coordinates decay:
/// `l_i = [[a_i, 0], [b_i, c_i]]` with generic `b_i, c_i`.
pub fn decaying_popescu_ops<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    k: usize,
    extra: usize,
) -> Vec<Matrix> {
    let total = k + extra;
    // rows of [l_1 .. l_d]; the first k rows avoid columns >= k of each block
    let mut rows: Vec<linalg::Vector> = Vec::new();
    while rows.len() < total {
        let a = rows.len();
        let g = ginibre(rng, total * d, 1).column(0).into_owned();
        let mut v = g;
        if a < k {
            for blk in 0..d {
                for b in k..total {
                    v[blk * total + b] = real(0.0);
                }
            }
        }
        linalg::gram_schmidt_push(&mut rows, &v, 1e-8);
    }
    (0..d)
        .map(|blk| Matrix::from_fn(total, total, |a, b| rows[a][blk * total + b].conj()))
        .collect()
}
