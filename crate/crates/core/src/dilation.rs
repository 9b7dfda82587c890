//! Finite-horizon weak Markov dilation of a unital CP map.
//!
//! The base space is `C^{n^2}` holding `vec(xi)` for `xi` in `M_n`, with the
//! Hilbert-Schmidt inner product; the GNS vector is `vec(rho^{1/2})` and
//! `pi(x)` is left multiplication, so `<Omega, pi(x) Omega> = tr(rho x)`.
//! Level `t` is `noise^{(x) t} (x) base` with the oldest noise factor
//! slowest. The one-step isometry `V: vec(xi) -> sum_i e_i (x) vec(l_i^* xi)`
//! satisfies `V^*(I (x) pi(x))V = pi(tau(x))`, and level `t` embeds into
//! level `t+1` by `J_t = I (x) V`.
//!
//! Because every `J_t` has this form, `iota_t = J_{T-1}...J_t = I (x) Z_{T-t}`
//! with `Z_k = (I (x) V)...V`, and the operator-norm residuals of the
//! dilation identities reduce exactly to `n^2 x n^2` computations with the
//! `Z_k`. Compression and cyclicity work on explicit level vectors.

use rand::Rng;
use serde::Serialize;

use crate::channel::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, gram_schmidt_push, identity, kron, Matrix, Vector, C64};
use crate::operator::{support_projection, vectorize, CheckRecord, DensityState, OperatorSubspace};
use crate::random;
use crate::semigroup::reduced_semigroup;
use crate::tol::Tolerances;

/// Default bound on `n^2 m^T`.
pub const DEFAULT_DIM_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy)]
pub struct DilationOptions {
    pub cap: usize,
    /// Replace the Kraus family by a minimal one before building.
    pub minimize_kraus: bool,
}

impl Default for DilationOptions {
    fn default() -> Self {
        DilationOptions {
            cap: DEFAULT_DIM_CAP,
            minimize_kraus: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DilationSpace {
    map: CPMap,
    state: DensityState,
    horizon: usize,
    kraus_adj: Vec<Matrix>,
    /// `Z_k` for `k = 0..=T`, each `n^2 m^k x n^2`.
    z: Vec<Matrix>,
    omega: Vector,
    reduced_to_support: bool,
}

/// Build the tower up to `horizon`. A non-faithful state is first reduced to
/// its support.
pub fn build_dilation(
    map: &CPMap,
    state: &DensityState,
    horizon: usize,
    opts: &DilationOptions,
    tol: &Tolerances,
) -> Result<DilationSpace> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
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
    let (map, state, reduced_to_support) = if state.is_faithful(tol) {
        (map.clone(), state.clone(), false)
    } else {
        let p = support_projection(state, tol.faithful);
        let q = p.range();
        let reduced = reduced_semigroup(map, &p, tol)?;
        let rho = q.adjoint() * state.rho() * q;
        (reduced, DensityState::from_approximate(&rho)?, true)
    };
    let map = if opts.minimize_kraus {
        map.minimal_kraus(tol)?
    } else {
        map
    };

    let n = map.dim();
    let m = map.kraus().len();
    let requested = u32::try_from(horizon)
        .ok()
        .and_then(|t| m.checked_pow(t))
        .and_then(|p| p.checked_mul(n * n))
        .unwrap_or(usize::MAX);
    if requested > opts.cap {
        return Err(Error::CapExceeded {
            requested,
            cap: opts.cap,
        });
    }

    let kraus_adj: Vec<Matrix> = map.kraus().iter().map(|l| l.adjoint()).collect();
    let mut z = vec![identity(n * n)];
    for _ in 0..horizon {
        let prev = z.last().expect("nonempty");
        let next = Matrix::from_columns(
            &prev
                .column_iter()
                .map(|c| step_up(&kraus_adj, n, &c.into_owned()))
                .collect::<Vec<_>>(),
        );
        z.push(next);
    }
    let (sqrt, _) = crate::semigroup::half_powers(&state);
    let omega = vectorize(&sqrt);
    Ok(DilationSpace {
        map,
        state,
        horizon,
        kraus_adj,
        z,
        omega,
        reduced_to_support,
    })
}

/// `(I (x) V) v` for a level vector `v`.
fn step_up(kraus_adj: &[Matrix], n: usize, v: &Vector) -> Vector {
    let n2 = n * n;
    let m = kraus_adj.len();
    let blocks = v.len() / n2;
    let mut out = Vector::zeros(v.len() * m);
    for b in 0..blocks {
        let xi = Matrix::from_column_slice(n, n, &v.as_slice()[b * n2..(b + 1) * n2]);
        for (i, la) in kraus_adj.iter().enumerate() {
            let img = la * &xi;
            let off = (b * m + i) * n2;
            out.as_mut_slice()[off..off + n2].copy_from_slice(img.as_slice());
        }
    }
    out
}

/// `(I (x) V^*) v`.
fn step_down(kraus_adj: &[Matrix], n: usize, v: &Vector) -> Vector {
    let n2 = n * n;
    let m = kraus_adj.len();
    let blocks = v.len() / (n2 * m);
    let mut out = Vector::zeros(blocks * n2);
    for b in 0..blocks {
        let mut acc = Matrix::zeros(n, n);
        for (i, la) in kraus_adj.iter().enumerate() {
            let off = (b * m + i) * n2;
            let xi = Matrix::from_column_slice(n, n, &v.as_slice()[off..off + n2]);
            acc += la.adjoint() * xi;
        }
        out.as_mut_slice()[b * n2..(b + 1) * n2].copy_from_slice(acc.as_slice());
    }
    out
}

/// `(I (x) pi(x)) v`.
fn apply_pi(x: &Matrix, n: usize, v: &Vector) -> Vector {
    let n2 = n * n;
    let mut out = Vector::zeros(v.len());
    for b in 0..v.len() / n2 {
        let xi = Matrix::from_column_slice(n, n, &v.as_slice()[b * n2..(b + 1) * n2]);
        out.as_mut_slice()[b * n2..(b + 1) * n2].copy_from_slice((x * xi).as_slice());
    }
    out
}

/// `Z^* (I_c (x) inner) Z` for `Z` with `c` row blocks of size `inner.nrows()`.
fn block_sandwich(z: &Matrix, inner: &Matrix) -> Matrix {
    let d = inner.nrows();
    let blocks = z.nrows() / d;
    let mut out = Matrix::zeros(z.ncols(), z.ncols());
    for b in 0..blocks {
        let zb = z.rows(b * d, d);
        out += zb.adjoint() * inner * zb;
    }
    out
}

fn sqrt_psd(g: &Matrix) -> Matrix {
    linalg::herm_fn(g, |l| l.max(0.0).sqrt())
}

impl DilationSpace {
    /// Map actually dilated (support-reduced and Kraus-minimised as configured).
    pub fn map(&self) -> &CPMap {
        &self.map
    }

    pub fn state(&self) -> &DensityState {
        &self.state
    }

    pub fn n(&self) -> usize {
        self.map.dim()
    }

    pub fn base_dim(&self) -> usize {
        self.n() * self.n()
    }

    pub fn noise_dim(&self) -> usize {
        self.kraus_adj.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn level_dim(&self, t: usize) -> usize {
        self.z[t].nrows()
    }

    pub fn total_dim(&self) -> usize {
        self.level_dim(self.horizon)
    }

    pub fn reduced_to_support(&self) -> bool {
        self.reduced_to_support
    }

    /// GNS vector in base coordinates.
    pub fn omega(&self) -> &Vector {
        &self.omega
    }

    /// `Z_k`: the embedding of the base into level `k`.
    pub fn z(&self, k: usize) -> &Matrix {
        &self.z[k]
    }

    /// Ranks of `F_t]`, read off as `tr(iota_t^* iota_t)`.
    pub fn ranks(&self) -> Vec<usize> {
        (0..=self.horizon)
            .map(|t| {
                let zk = &self.z[self.horizon - t];
                let tr = zk.norm_squared() * (self.level_dim(t) / self.base_dim()) as f64;
                tr.round() as usize
            })
            .collect()
    }

    /// Level-`from` vector embedded at level `to >= from`.
    pub fn lift(&self, v: &Vector, from: usize, to: usize) -> Vector {
        let mut w = v.clone();
        for _ in from..to {
            w = step_up(&self.kraus_adj, self.n(), &w);
        }
        w
    }

    /// Adjoint of [`lift`](Self::lift).
    pub fn lower(&self, v: &Vector, from: usize, to: usize) -> Vector {
        let mut w = v.clone();
        for _ in to..from {
            w = step_down(&self.kraus_adj, self.n(), &w);
        }
        w
    }

    /// `j_t(x) v` for a total-space vector `v`.
    pub fn apply_j(&self, t: usize, x: &Matrix, v: &Vector) -> Vector {
        let low = self.lower(v, self.horizon, t);
        let acted = apply_pi(x, self.n(), &low);
        self.lift(&acted, t, self.horizon)
    }

    /// Dense `iota_t`; for tests at small sizes.
    pub fn iota_dense(&self, t: usize) -> Matrix {
        let d = self.level_dim(t);
        let cols: Vec<Vector> = (0..d)
            .map(|i| {
                let mut e = Vector::zeros(d);
                e[i] = C64::new(1.0, 0.0);
                self.lift(&e, t, self.horizon)
            })
            .collect();
        Matrix::from_columns(&cols)
    }

    /// `||F_s] j_t(x) F_s] - j_s(tau^{t-s}(x))||` over matrix units and all
    /// `s <= t <= T`. Equals `||Z_k^*(I (x) pi(x))Z_k - pi(tau^k(x))||` with `k = t - s`.
    pub fn markov_residual(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for k in 0..=self.horizon {
            let zk = &self.z[k];
            for j in 0..n {
                for i in 0..n {
                    let x = linalg::matrix_unit(n, i, j);
                    let lhs = block_sandwich(zk, &kron(&identity(n), &x));
                    let rhs = kron(&identity(n), &self.map.apply_n(&x, k));
                    worst = worst.max(linalg::op_norm(&(lhs - rhs)));
                }
            }
        }
        worst
    }

    /// `max_t ||iota_t^* iota_t - I||`.
    pub fn isometry_residual(&self) -> f64 {
        (0..=self.horizon)
            .map(|k| {
                let zk = &self.z[k];
                linalg::op_norm(&(zk.adjoint() * zk - identity(self.base_dim())))
            })
            .fold(0.0, f64::max)
    }

    /// `max_{s <= t} ||F_s] F_t] - F_s]||`. With `G = Z_{T-t}^* Z_{T-t}` and
    /// `E = G - I`, `F_s]F_t] - F_s] = iota_s Y^*(I (x) E) iota_t^*` whose norm
    /// is evaluated through its Gram matrix.
    pub fn filtration_residual(&self) -> f64 {
        let big_t = self.horizon;
        let id = identity(self.base_dim());
        let mut worst: f64 = 0.0;
        for t in 0..=big_t {
            let zt = &self.z[big_t - t];
            let g = zt.adjoint() * zt;
            let e = &g - &id;
            let inner = &e * &g * e.adjoint();
            for s in 0..=t {
                let y = &self.z[t - s];
                let k = block_sandwich(y, &inner);
                let zs = &self.z[big_t - s];
                let a = sqrt_psd(&(zs.adjoint() * zs));
                let mm = &a * k * &a;
                worst = worst.max(linalg::op_norm(&mm).sqrt());
            }
        }
        worst
    }

    /// `||j_t(x) j_t(y) - j_t(xy)||` over matrix units and `t <= T`.
    pub fn multiplicativity_residual(&self) -> f64 {
        let n = self.n();
        let idn = identity(n);
        let mut worst: f64 = 0.0;
        for t in 0..=self.horizon {
            let zt = &self.z[self.horizon - t];
            let g = zt.adjoint() * zt;
            let root = sqrt_psd(&g);
            for a in 0..n * n {
                let x = linalg::matrix_unit(n, a % n, a / n);
                let px = kron(&idn, &x);
                for b in 0..n * n {
                    let y = linalg::matrix_unit(n, b % n, b / n);
                    let py = kron(&idn, &y);
                    let d = &px * &g * &py - kron(&idn, &(&x * &y));
                    worst = worst.max(linalg::op_norm(&(&root * d * &root)));
                }
            }
        }
        worst
    }

    /// `|<Omega, j_t(x) Omega> - phi(x)|` over matrix units and `t <= T`.
    pub fn stationarity_residual(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for t in 0..=self.horizon {
            let w = &self.z[t] * &self.omega;
            for j in 0..n {
                for i in 0..n {
                    let x = linalg::matrix_unit(n, i, j);
                    let val = w.dotc(&apply_pi(&x, n, &w));
                    worst = worst.max((val - self.state.expect(&x)).norm());
                }
            }
        }
        worst
    }

    /// `iota_0^* X iota_0` for a monomial `X` in the `j_t`.
    pub fn compress(&self, x: &Monomial) -> Result<Matrix> {
        if let Some(&(t, _)) = x.factors.iter().find(|(t, _)| *t > self.horizon) {
            return Err(Error::BeyondHorizon {
                shift: 0,
                time: t,
                horizon: self.horizon,
            });
        }
        let n2 = self.base_dim();
        let cols: Vec<Vector> = (0..n2)
            .map(|i| {
                let mut e = Vector::zeros(n2);
                e[i] = C64::new(1.0, 0.0);
                let mut v = self.lift(&e, 0, self.horizon);
                for (t, op) in x.factors.iter().rev() {
                    v = self.apply_j(*t, op, &v);
                }
                self.lower(&v, self.horizon, 0)
            })
            .collect();
        Ok(Matrix::from_columns(&cols))
    }
}

/// Product `j_{t_1}(x_1) ... j_{t_r}(x_r)`; the empty product is the identity.
#[derive(Debug, Clone)]
pub struct Monomial {
    pub factors: Vec<(usize, Matrix)>,
}

impl Monomial {
    pub fn identity() -> Self {
        Monomial {
            factors: Vec::new(),
        }
    }

    pub fn single(t: usize, x: Matrix) -> Self {
        Monomial {
            factors: vec![(t, x)],
        }
    }

    pub fn max_time(&self) -> usize {
        self.factors.iter().map(|(t, _)| *t).max().unwrap_or(0)
    }

    /// `alpha_shift`: every `j_t` becomes `j_{t+shift}`; leaving the window is an error.
    pub fn shift(&self, shift: usize, horizon: usize) -> Result<Monomial> {
        if let Some(&(t, _)) = self.factors.iter().find(|(t, _)| t + shift > horizon) {
            return Err(Error::BeyondHorizon {
                shift,
                time: t,
                horizon,
            });
        }
        Ok(Monomial {
            factors: self
                .factors
                .iter()
                .map(|(t, x)| (t + shift, x.clone()))
                .collect(),
        })
    }
}

/// Largest residual of the Markov identity over all `s <= t <= T`.
pub fn markov_property_check(d: &DilationSpace, tol: f64) -> CheckRecord {
    CheckRecord::new("markov", d.markov_residual(), tol)
}

/// Structural checks: isometry, filtration monotonicity, multiplicativity
/// and stationarity.
pub fn structure_checks(d: &DilationSpace, tol: f64) -> Vec<CheckRecord> {
    vec![
        CheckRecord::new("isometry", d.isometry_residual(), tol),
        CheckRecord::new("filtration_monotone", d.filtration_residual(), tol),
        CheckRecord::new("multiplicative", d.multiplicativity_residual(), tol),
        CheckRecord::new("stationary", d.stationarity_residual(), tol),
    ]
}

/// `||iota_0^* alpha_t(X) iota_0 - pi(tau^t(y))||` with `pi(y) = iota_0^* X iota_0`,
/// also reporting how far `iota_0^* X iota_0` is from the form `pi(y)`.
pub fn compression_residual(d: &DilationSpace, x: &Monomial, shift: usize) -> Result<f64> {
    let n = d.n();
    let shifted = x.shift(shift, d.horizon())?;
    let c = d.compress(x)?;
    let mut y = Matrix::zeros(n, n);
    for k in 0..n {
        y += c.view((k * n, k * n), (n, n));
    }
    let y = y.unscale(n as f64);
    let idn = identity(n);
    let form = linalg::op_norm(&(&c - kron(&idn, &y)));
    let cs = d.compress(&shifted)?;
    let target = kron(&idn, &d.map().apply_n(&y, shift));
    Ok(form.max(linalg::op_norm(&(cs - target))))
}

/// Compression identity on the fixed cases and `samples` random monomials
/// (`r <= 3` factors at times `<= T-1`, admissible shifts).
pub fn compression_check(
    d: &DilationSpace,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckRecord> {
    let n = d.n();
    let big_t = d.horizon();
    let mut worst: f64 = 0.0;
    let mut rng = random::rng(seed);
    let x = linalg::hermitian_part(&random::ginibre(&mut rng, n, n));
    let y = random::ginibre(&mut rng, n, n);
    worst = worst.max(compression_residual(d, &Monomial::identity(), 1)?);
    for t in 1..=big_t {
        worst = worst.max(compression_residual(d, &Monomial::single(0, x.clone()), t)?);
    }
    if big_t >= 2 {
        let m = Monomial {
            factors: vec![(1, x.clone()), (0, y.clone())],
        };
        worst = worst.max(compression_residual(d, &m, 1)?);
    }
    for _ in 0..samples {
        let r = rng.random_range(1..=3usize);
        let factors: Vec<(usize, Matrix)> = (0..r)
            .map(|_| (rng.random_range(0..big_t), random::ginibre(&mut rng, n, n)))
            .collect();
        let m = Monomial { factors };
        let shift = rng.random_range(1..=big_t - m.max_time());
        worst = worst.max(compression_residual(d, &m, shift)?);
    }
    Ok(CheckRecord::new("compression", worst, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cyclicity {
    pub dim: usize,
    pub total_dim: usize,
    pub cyclic: bool,
}

/// Dimension of the span of `j_{t_r}(x_r)...j_{t_1}(x_1) Omega` with
/// `t_1 <= ... <= t_r`, built level by level: `W_t = span{(I (x) pi(x)) J_{t-1} w}`.
/// `basis` defaults to the matrix units; `rel_tol` is relative to the largest
/// candidate norm at each level.
pub fn cyclicity_check(d: &DilationSpace, basis: Option<&[Matrix]>, rel_tol: f64) -> Cyclicity {
    let n = d.n();
    let units;
    let basis = match basis {
        Some(b) => b,
        None => {
            units = OperatorSubspace::full(n);
            units.basis()
        }
    };
    let mut current: Vec<Vector> = Vec::new();
    let mut candidates: Vec<Vector> = basis.iter().map(|x| apply_pi(x, n, &d.omega)).collect();
    for t in 0..=d.horizon() {
        let full = d.level_dim(t);
        if t > 0 {
            let embedded: Vec<Vector> = current.iter().map(|w| d.lift(w, t - 1, t)).collect();
            candidates = embedded
                .iter()
                .flat_map(|w| basis.iter().map(move |x| apply_pi(x, n, w)))
                .collect();
        }
        let scale = candidates.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut span: Vec<Vector> = Vec::new();
        for c in &candidates {
            if span.len() == full {
                break;
            }
            gram_schmidt_push(&mut span, c, rel_tol * scale);
        }
        current = span;
    }
    let dim = current.len();
    Cyclicity {
        dim,
        total_dim: d.total_dim(),
        cyclic: dim == d.total_dim(),
    }
}

/// `c_k = max |phi(tau^k(x) tau^k(y)) - phi(x) phi(y)|` over matrix units,
/// `k = 0..=steps`, evaluated on centred observables.
pub fn kolmogorov_correlation_profile(map: &CPMap, state: &DensityState, steps: usize) -> Vec<f64> {
    let n = map.dim();
    let id = identity(n);
    let mut centred: Vec<Matrix> = (0..n * n)
        .map(|a| {
            let x = linalg::matrix_unit(n, a % n, a / n);
            &x - &id * state.expect(&x)
        })
        .collect();
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            for c in centred.iter_mut() {
                let z = map.apply_unchecked(c);
                *c = &z - &id * state.expect(&z);
            }
        }
        let mut worst: f64 = 0.0;
        for a in &centred {
            for b in &centred {
                worst = worst.max(state.expect(&(a * b)).norm());
            }
        }
        out.push(worst);
    }
    out
}

/// Least-squares slope of `ln values[k]` against `k` for `k` in `from..=to`.
pub fn log_linear_slope(values: &[f64], from: usize, to: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (from..=to.min(values.len().saturating_sub(1)))
        .map(|k| (k as f64, values[k].ln()))
        .collect();
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Report of the `dilate` command.
#[derive(Debug, Clone, Serialize)]
pub struct DilationReport {
    pub total_dim: usize,
    pub base_dim: usize,
    pub noise_dim: usize,
    pub horizon: usize,
    pub ranks: Vec<usize>,
    pub reduced_to_support: bool,
    pub residuals: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclicity: Option<Cyclicity>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DilationCheck {
    Markov,
    Compression,
    Cyclicity,
}

/// Run the selected checks plus the structural ones.
pub fn dilation_report(
    d: &DilationSpace,
    checks: &[DilationCheck],
    seed: u64,
    tol: f64,
) -> Result<DilationReport> {
    let mut residuals = structure_checks(d, tol);
    let mut cyclicity = None;
    for c in checks {
        match c {
            DilationCheck::Markov => residuals.push(markov_property_check(d, tol)),
            DilationCheck::Compression => residuals.push(compression_check(d, 16, seed, tol)?),
            DilationCheck::Cyclicity => cyclicity = Some(cyclicity_check(d, None, 1e-8)),
        }
    }
    let pass = residuals.iter().all(|r| r.pass);
    Ok(DilationReport {
        total_dim: d.total_dim(),
        base_dim: d.base_dim(),
        noise_dim: d.noise_dim(),
        horizon: d.horizon(),
        ranks: d.ranks(),
        reduced_to_support: d.reduced_to_support(),
        residuals,
        cyclicity,
        pass,
    })
}
