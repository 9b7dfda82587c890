//! Reference computations used as oracles. They work from Kraus operators
//! and plain matrix arithmetic only, without the library's superoperator,
//! eigen-solver or subspace machinery.

#![allow(dead_code)]

use qds::random;
use qds::{channels, CPMap, DensityState, Matrix, C64};

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = c(1.0);
    m
}

pub fn eye(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

/// `sum_i l_i x l_i^*`.
pub fn heisenberg(kraus: &[Matrix], x: &Matrix) -> Matrix {
    kraus
        .iter()
        .fold(Matrix::zeros(x.nrows(), x.ncols()), |acc, l| {
            acc + l * x * l.adjoint()
        })
}

/// `sum_i l_i^* rho l_i`.
pub fn schrodinger(kraus: &[Matrix], rho: &Matrix) -> Matrix {
    kraus
        .iter()
        .fold(Matrix::zeros(rho.nrows(), rho.ncols()), |acc, l| {
            acc + l.adjoint() * rho * l
        })
}

pub fn iterate(kraus: &[Matrix], x: &Matrix, n: usize) -> Matrix {
    (0..n).fold(x.clone(), |y, _| heisenberg(kraus, &y))
}

pub fn expect(rho: &Matrix, x: &Matrix) -> C64 {
    (rho * x).trace()
}

/// Iterate-convergence verdict: `max_x ||tau^n(x) - phi(x) I|| <= tol` over
/// matrix units. Returns the verdict and the largest deviation.
pub fn iterate_mixing(map: &CPMap, rho: &Matrix, n: usize, tol: f64) -> (bool, f64) {
    let d = map.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let x = unit(d, i, j);
            let target = eye(d) * expect(rho, &x);
            worst = worst.max((iterate(map.kraus(), &x, n) - target).norm());
        }
    }
    (worst <= tol, worst)
}

/// `(rho^{1/2}, rho^{-1/2})` from a Hermitian eigendecomposition.
pub fn half_powers(rho: &Matrix) -> (Matrix, Matrix) {
    let eig = rho.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let f = |g: fn(f64) -> f64| {
        let diag = Matrix::from_diagonal(&eig.eigenvalues.map(|l| c(g(l))));
        u * diag * u.adjoint()
    };
    (f(f64::sqrt), f(|l| 1.0 / l.sqrt()))
}

/// `max |phi(s_{1/2}(x) tau(y)) - phi(dual(x) s_{-1/2}(y))|` over matrix
/// units, with `s_{1/2}(x) = rho^{-1/2} x rho^{1/2}`.
pub fn kms_relation(map: &CPMap, dual: &CPMap, rho: &Matrix) -> f64 {
    let d = map.dim();
    let (s, si) = half_powers(rho);
    let mut worst: f64 = 0.0;
    for a in 0..d * d {
        let x = unit(d, a % d, a / d);
        let lx = &si * &x * &s;
        let rx = heisenberg(dual.kraus(), &x);
        for b in 0..d * d {
            let y = unit(d, b % d, b / d);
            let lhs = expect(rho, &(&lx * heisenberg(map.kraus(), &y)));
            let rhs = expect(rho, &(&rx * (&s * &y * &si)));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Matrix of `x -> f(x)` on `M_d` in the column-stacking basis.
pub fn matrix_of(d: usize, f: impl Fn(&Matrix) -> Matrix) -> Matrix {
    let mut m = Matrix::zeros(d * d, d * d);
    for a in 0..d * d {
        let y = f(&unit(d, a % d, a / d));
        for b in 0..d * d {
            m[(b, a)] = y[(b % d, b / d)];
        }
    }
    m
}

/// Largest Frobenius distance between two maps over matrix units.
pub fn map_distance(a: &CPMap, b: &CPMap) -> f64 {
    let d = a.dim();
    (matrix_of(d, |x| heisenberg(a.kraus(), x)) - matrix_of(d, |x| heisenberg(b.kraus(), x))).norm()
}

/// Dimension of `ker(dual^N tau^N - id)` by SVD with relative cut-off.
pub fn g_n_dim(map: &CPMap, dual: &CPMap, steps: usize) -> usize {
    let d = map.dim();
    let m = matrix_of(d, |x| {
        iterate(dual.kraus(), &iterate(map.kraus(), x, steps), steps) - x
    });
    let sv = m.singular_values();
    let scale = sv.iter().cloned().fold(1.0, f64::max);
    sv.iter().filter(|&&s| s <= 1e-8 * scale).count()
}

/// Fixed-point dimension of `tau` by SVD.
pub fn fixed_dim(map: &CPMap) -> usize {
    let d = map.dim();
    let m = matrix_of(d, |x| heisenberg(map.kraus(), x) - x);
    let sv = m.singular_values();
    sv.iter().filter(|&&s| s <= 1e-8).count()
}

/// Chain two-point factorisation at distance `gap`:
/// `max |sum_w C(a w b, c w e) - C(a, c) C(b, e)|` over letters, with
/// `C(I, J) = tr(rho l_I l_J^*)`; the sum over gap words is `eta^gap`.
pub fn chain_factorisation(ops: &[Matrix], rho: &Matrix, gap: usize) -> f64 {
    let d = ops.len();
    let word = |a: usize, b: usize| expect(rho, &(&ops[a] * ops[b].adjoint()));
    let mut worst: f64 = 0.0;
    for b in 0..d {
        for e in 0..d {
            let inner = iterate(ops, &(&ops[b] * ops[e].adjoint()), gap);
            for a in 0..d {
                for cc in 0..d {
                    let joint = expect(rho, &(&ops[a] * &inner * ops[cc].adjoint()));
                    worst = worst.max((joint - word(a, cc) * word(b, e)).norm());
                }
            }
        }
    }
    worst
}

/// Block-diagonal Popescu tensor `l_i = diag(a_i, b_i)` from two random unit
/// vectors: the chain state is a mixture of two product states.
pub fn block_tensor(seed: u64, d: usize) -> Vec<Matrix> {
    let mut rng = random::rng(seed);
    let col = |rng: &mut _| {
        let g = random::ginibre(rng, d, 1);
        let norm = g.norm();
        g / c(norm)
    };
    let a = col(&mut rng);
    let b = col(&mut rng);
    (0..d)
        .map(|i| Matrix::from_diagonal(&qds::Vector::from_vec(vec![a[i], b[i]])))
        .collect()
}

/// Fixed corpus of channels with a faithful invariant state.
pub fn faithful_corpus() -> Vec<(String, CPMap)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = Matrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
    let phase = Matrix::from_diagonal(&qds::Vector::from_vec(vec![c(1.0), C64::new(0.0, 1.0)]));
    let mut out = vec![
        ("identity".to_string(), CPMap::identity(2)),
        ("hadamard".to_string(), channels::unitary(hadamard).unwrap()),
        ("phase".to_string(), channels::unitary(phase).unwrap()),
        (
            "random_unitary".to_string(),
            channels::unitary(random::unitary(&mut random::rng(5), 3)).unwrap(),
        ),
    ];
    for p in [0.25, 0.75, 1.0] {
        out.push((format!("depolarizing_{p}"), channels::depolarizing(p)));
    }
    out.push(("dephase_flip".to_string(), channels::dephase_flip()));
    out
}

/// Channels whose invariant states all live on a proper corner.
pub fn leaking_channels() -> Vec<(String, CPMap)> {
    let mut out = vec![
        (
            "amplitude_damping".to_string(),
            channels::amplitude_damping(0.3),
        ),
        ("flip_with_leak".to_string(), channels::flip_with_leak(0.4)),
    ];
    for i in 0..6u64 {
        let mut rng = random::rng(random::instance_seed(99, i));
        let ops = random::decaying_popescu_ops(&mut rng, 2, 2, 1 + (i as usize) % 2);
        out.push((format!("random_leak_{i}"), CPMap::new(ops).unwrap()));
    }
    out
}

/// Random channels, dims 2..=4, one to three Kraus operators.
pub fn random_channels(count: usize, seed: u64) -> Vec<(String, CPMap)> {
    (0..count)
        .map(|i| {
            let mut rng = random::rng(random::instance_seed(seed, i as u64));
            let n = 2 + i % 3;
            let m = 1 + (i / 3) % 3;
            (
                format!("random_{i}_n{n}_m{m}"),
                random::channel(&mut rng, n, m),
            )
        })
        .collect()
}

pub fn mean_invariant(map: &CPMap) -> DensityState {
    qds::invariant_states(map, &qds::Tolerances::default())
        .unwrap()
        .mean()
        .clone()
}
