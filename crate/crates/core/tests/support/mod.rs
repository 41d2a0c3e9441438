//! Seeded matrix zoo and the invariant checks run over it. Shared by the
//! property tests and the acceptance harness.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use ppcg::block::{block_inner, cholesky_qr, orthonormality_loss, project_out};
use ppcg::pencil::{solve_pencil, SmallPencil};
use ppcg::ppcg::{block_update, fallback_steepest_descent, project_directions, SolverState, SubblockInput, UpdateKind};
use ppcg::problems::{
    laplacian_1d, laplacian_3d, laplacian_plus_potential, parse_matrix_market, random_hermitian, two_well_potential,
    write_matrix_market_to, MatrixMarket, SparseHermitian,
};
use ppcg::rayleigh_ritz::{convergence_metrics, rayleigh_ritz, subspace_residual};
use ppcg::{
    davidson_solve, lobpcg_solve, DenseOperator, ppcg_solve, BaselineOptions, BlockVectors, Field, HermitianOperator, IdentityPreconditioner,
    OrthPolicy, Projection, SolveReport, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check<T> = fn(&SparseHermitian<T>, u64) -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn real_zoo(seed: u64) -> Vec<(String, SparseHermitian<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 36;
    let diag: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, rng.random_range(-5.0..10.0))).collect();
    let len = 30 + (seed % 17) as usize;
    let v = two_well_potential(4, 4, 3, 50.0, seed);
    vec![
        ("diagonal".into(), SparseHermitian::from_entries(n, diag).unwrap()),
        (format!("laplacian_1d({len})"), laplacian_1d(len)),
        ("laplacian_3d(4,3,3)".into(), laplacian_3d(4, 3, 3)),
        ("random(40,0.15)".into(), random_hermitian(40, 0.15, seed).unwrap()),
        ("well(4,4,3)".into(), laplacian_plus_potential(4, 4, 3, &v).unwrap()),
    ]
}

pub fn complex_zoo(seed: u64) -> Vec<(String, SparseHermitian<Complex64>)> {
    vec![("complex random(32,0.2)".into(), random_hermitian(32, 0.2, seed).unwrap())]
}

pub fn checks<T: Field>() -> Vec<(&'static str, Check<T>)> {
    vec![
        ("cholesky_qr orthonormal", cholesky_qr_orthonormal::<T>),
        ("project_out idempotent", project_out_idempotent::<T>),
        ("pencil congruence", pencil_congruence::<T>),
        ("pencil vs standard solver", pencil_identity_gram::<T>),
        ("ritz monotone in subspace", ritz_monotone::<T>),
        ("residual orthogonal to basis", residual_orthogonal::<T>),
        ("residual unitary invariance", residual_unitary_invariance::<T>),
        ("ritz vectors diagonalize", ritz_diagonalizes::<T>),
        ("full rank update", full_rank_update::<T>),
        ("subblock optimality", subblock_optimality::<T>),
        ("projection", projection::<T>),
        ("lobpcg equivalence", lobpcg_equivalence::<T>),
        ("orthonormality maintained", orthonormality_maintained::<T>),
        ("determinism", determinism::<T>),
        ("baseline ritz invariants", baseline_ritz_invariants::<T>),
        ("lobpcg ritz sum monotone", lobpcg_sum_monotone::<T>),
        ("operator hermitian", operator_hermitian::<T>),
        ("matrix market round trip", matrix_market_round_trip::<T>),
    ]
}

/// Runs every check on every zoo member; returns the failures.
pub fn run_zoo(seed: u64) -> Vec<String> {
    let mut failures = Vec::new();
    for (name, a) in real_zoo(seed) {
        for (check, f) in checks::<f64>() {
            if let Err(e) = f(&a, seed) {
                failures.push(format!("{check} on {name} (seed {seed}): {e}"));
            }
        }
    }
    for (name, a) in complex_zoo(seed) {
        for (check, f) in checks::<Complex64>() {
            if let Err(e) = f(&a, seed) {
                failures.push(format!("{check} on {name} (seed {seed}): {e}"));
            }
        }
    }
    failures
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn orthonormal<T: Field>(n: usize, m: usize, rng: &mut ChaCha8Rng) -> BlockVectors<T> {
    cholesky_qr(&BlockVectors::random(n, m, rng)).unwrap().0
}

fn op_norm<T: Field>(a: &SparseHermitian<T>) -> f64 {
    let d = a.to_dense();
    (0..d.nrows()).map(|i| d.row(i).iter().map(|v| v.modulus()).sum::<f64>()).fold(0.0, f64::max)
}

fn sorted_eigenvalues<T: Field>(m: &DMatrix<T>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn identity_minus<T: Field>(g: DMatrix<T>) -> f64 {
    let n = g.nrows();
    (g - DMatrix::<T>::identity(n, n)).norm()
}

pub fn cholesky_qr_orthonormal<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 1);
    let m = 5;
    let x = a.apply(&BlockVectors::random(a.n(), m, &mut r)).unwrap();
    let x = &x + &BlockVectors::random(a.n(), m, &mut r);
    let (q, rf) = cholesky_qr(&x).map_err(|e| e.to_string())?;
    let loss = identity_minus(block_inner(&q, &q).unwrap());
    ensure!(loss <= 1e-10 * (m as f64).sqrt(), "|Q*Q - I| = {loss:e}");
    let back = (q.as_matrix() * &rf - x.as_matrix()).norm();
    ensure!(back <= 1e-12 * x.frobenius_norm(), "|QR - X| = {back:e}");
    Ok(())
}

pub fn project_out_idempotent<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 2);
    let x = orthonormal::<T>(a.n(), 4, &mut r);
    let y = a.apply(&BlockVectors::random(a.n(), 3, &mut r)).unwrap();
    let once = project_out(&x, &y).unwrap();
    let twice = project_out(&x, &once).unwrap();
    let scale = y.frobenius_norm();
    let change = (&twice - &once).frobenius_norm();
    ensure!(change <= 1e-12 * scale, "second projection moved by {change:e}");
    let left = block_inner(&x, &once).unwrap().norm();
    ensure!(left <= 1e-12 * scale, "|X* out| = {left:e}");
    Ok(())
}

pub fn pencil_congruence<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 3);
    let d = 6;
    let s = orthonormal::<T>(a.n(), d, &mut r);
    let a_hat = block_inner(&s, &a.apply(&s).unwrap()).unwrap();
    let base = solve_pencil(&SmallPencil::new(a_hat.clone(), DMatrix::identity(d, d)).unwrap(), d).unwrap();
    // G = I + E with |E|_2 <= 1/2 keeps the congruence well conditioned.
    let e = BlockVectors::<T>::random(d, d, &mut r).into_matrix();
    let e = e.clone() * T::from_real(0.5 / e.norm());
    let g = DMatrix::<T>::identity(d, d) + e;
    let ga = g.adjoint() * &a_hat * &g;
    let gb = g.adjoint() * &g;
    let moved = solve_pencil(&SmallPencil::new(ga, gb).unwrap(), d).map_err(|e| e.to_string())?;
    let scale = base.omega.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let diff = max_diff(&base.omega, &moved.omega);
    ensure!(diff <= 1e-12 * scale, "eigenvalues moved by {diff:e} (scale {scale:e})");
    Ok(())
}

pub fn pencil_identity_gram<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 4);
    let d = 10;
    let s = orthonormal::<T>(a.n(), d, &mut r);
    let noise = BlockVectors::<T>::random(d, d, &mut r).into_matrix();
    let a_hat = block_inner(&s, &a.apply(&s).unwrap()).unwrap() + &noise + noise.adjoint();
    let sol = solve_pencil(&SmallPencil::new(a_hat.clone(), DMatrix::identity(d, d)).unwrap(), d).unwrap();
    let oracle = sorted_eigenvalues(&a_hat);
    let scale = oracle.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let diff = max_diff(&sol.omega, &oracle);
    ensure!(diff <= 1e-12 * scale, "differs from the standard solver by {diff:e}");
    Ok(())
}

pub fn ritz_monotone<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 5);
    let s1 = BlockVectors::<T>::random(a.n(), 4, &mut r);
    let s2 = BlockVectors::hstack(&[&s1, &BlockVectors::random(a.n(), 3, &mut r)]).unwrap();
    let small = rayleigh_ritz(a, &s1, 3).map_err(|e| e.to_string())?;
    let big = rayleigh_ritz(a, &s2, 3).map_err(|e| e.to_string())?;
    let slack = 1e-12 * op_norm(a).max(1.0);
    for (j, (b, s)) in big.values.iter().zip(&small.values).enumerate() {
        ensure!(*b <= s + slack, "value {j}: {b} over the larger basis exceeds {s}");
    }
    Ok(())
}

pub fn residual_orthogonal<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 6);
    let x = orthonormal::<T>(a.n(), 4, &mut r);
    let res = subspace_residual(&x, &a.apply(&x).unwrap()).unwrap();
    let left = block_inner(&x, &res).unwrap().norm();
    ensure!(left <= 1e-12 * res.frobenius_norm(), "|X* R| = {left:e}, |R| = {:e}", res.frobenius_norm());
    Ok(())
}

pub fn residual_unitary_invariance<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 7);
    let x = orthonormal::<T>(a.n(), 4, &mut r);
    let u = orthonormal::<T>(4, 4, &mut r).into_matrix();
    let xu = x.combine(&u);
    let m1 = convergence_metrics(&x, &a.apply(&x).unwrap(), None).unwrap();
    let m2 = convergence_metrics(&xu, &a.apply(&xu).unwrap(), None).unwrap();
    let diff = (m1.rel_subspace_residual - m2.rel_subspace_residual).abs();
    ensure!(diff <= 1e-12 * m1.rel_subspace_residual.max(1.0), "metric changed by {diff:e}");
    Ok(())
}

fn diagonalizes<T: Field>(a: &SparseHermitian<T>, v: &BlockVectors<T>, values: &[f64]) -> Result<(), String> {
    let k = v.ncols();
    let loss = orthonormality_loss(v);
    ensure!(loss <= 1e-10 * (k as f64).sqrt(), "vectors lost orthonormality: {loss:e}");
    let mut h = block_inner(v, &a.apply(v).unwrap()).unwrap();
    for i in 0..k {
        h[(i, i)] = T::zero();
    }
    let scale: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    ensure!(h.norm() <= 1e-8 * scale.max(1e-300), "off-diagonal mass {:e}", h.norm());
    Ok(())
}

pub fn ritz_diagonalizes<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 8);
    let s = BlockVectors::<T>::random(a.n(), 6, &mut r);
    let ritz = rayleigh_ritz(a, &s, 4).map_err(|e| e.to_string())?;
    diagonalizes(a, &ritz.vectors, &ritz.values)
}

/// `X_new = X C_X + W C_W + P C_P` with `X* W = X* P = 0` and `C_X` diagonal
/// and nonsingular: `X* X_new = C_X`, so the smallest singular value of
/// `X_new` is at least `min |alpha_j|`.
pub fn full_rank_instance<T: Field>(n: usize, k: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 9);
    let x = orthonormal::<T>(n, k, &mut r);
    let w = project_out(&x, &BlockVectors::random(n, k, &mut r)).unwrap();
    let p = project_out(&x, &BlockVectors::random(n, k, &mut r)).unwrap();
    let alpha: Vec<f64> = (0..k)
        .map(|_| {
            let m: f64 = r.random_range(1e-3..2.0);
            if r.random_bool(0.5) { m } else { -m }
        })
        .collect();
    let cx = DMatrix::<T>::from_diagonal(&nalgebra::DVector::from_iterator(k, alpha.iter().map(|&a| T::from_real(a))));
    let cw = BlockVectors::<T>::random(k, k, &mut r).into_matrix() * T::from_real(5.0);
    let cp = BlockVectors::<T>::random(k, k, &mut r).into_matrix() * T::from_real(5.0);
    let xn = &(&x.combine(&cx) + &w.combine(&cw)) + &p.combine(&cp);
    let sigma = xn.into_matrix().singular_values().min();
    let bound = alpha.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()));
    ensure!(sigma > 0.0 && sigma >= bound * (1.0 - 1e-10), "smallest singular value {sigma:e} below {bound:e}");
    Ok(())
}

pub fn full_rank_update<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    full_rank_instance::<T>(a.n(), 6, seed)
}

pub fn subblock_optimality<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 10);
    let x = orthonormal::<T>(a.n(), 2, &mut r);
    let ax = a.apply(&x).unwrap();
    let w = subspace_residual(&x, &ax).unwrap();
    let p = project_out(&x, &BlockVectors::random(a.n(), 2, &mut r)).unwrap();
    let input = SubblockInput {
        aw: a.apply(&w).unwrap(),
        p: Some((p.clone(), a.apply(&p).unwrap())),
        x: x.clone(),
        ax: ax.clone(),
        w,
    };
    let up = block_update(&input).map_err(|e| e.to_string())?;
    let before: f64 = (0..2).map(|i| block_inner(&x, &ax).unwrap()[(i, i)].real()).sum();
    let after: f64 = up.theta.iter().sum();
    ensure!(after <= before + 1e-12 * op_norm(a), "local minimum {after} above the start {before}");
    Ok(())
}

pub fn projection<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 11);
    let n = a.n();
    let both = orthonormal::<T>(n, 6, &mut r);
    let x = both.columns(2..6);
    let ax = a.apply(&x).unwrap();
    let mut state = SolverState::new(x, ax, BlockVectors::zeros(n, 4), 2);
    state.x_lock = both.columns(0..2);
    state.ax_lock = a.apply(&state.x_lock).unwrap();
    let w = BlockVectors::<T>::random(n, 4, &mut r);
    let p = BlockVectors::<T>::random(n, 4, &mut r);
    let ap = a.apply(&p).unwrap();
    let (w, p) = project_directions(&state, w, Some((p, ap)), Projection::default()).map_err(|e| e.to_string())?;
    let (p, ap) = p.expect("directions kept");
    for (name, v) in [("W", &w), ("P", &p)] {
        let left = block_inner(&both, v).unwrap().norm();
        ensure!(left <= 1e-10 * v.frobenius_norm(), "|[X_lock, X]* {name}| = {left:e}");
    }
    let drift = (&a.apply(&p).unwrap() - &ap).frobenius_norm();
    ensure!(drift <= 1e-10 * ap.frobenius_norm().max(1.0), "AP no longer matches P: {drift:e}");
    Ok(())
}

fn quiet_options(k: usize, seed: u64) -> SolverOptions {
    SolverOptions {
        nbuf: 0,
        sbsize: k,
        rr_period: Some(1),
        tol: 1e-13,
        max_iter: 11,
        seed,
        ..SolverOptions::new(k)
    }
}

pub fn lobpcg_equivalence<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let k = 4;
    let opts = quiet_options(k, seed);
    let base = BaselineOptions {
        nbuf: 0,
        tol: opts.tol,
        max_iter: opts.max_iter,
        seed,
        ..BaselineOptions::new(k)
    };
    let p = ppcg_solve(a, &IdentityPreconditioner, None, &opts).map_err(|e| e.to_string())?;
    let l = lobpcg_solve(a, &IdentityPreconditioner, None, &base).map_err(|e| e.to_string())?;
    compare_ritz_histories(&p, &l, 10, 1e-8)
}

/// Per-iteration Ritz values of two runs agree on the iterations both ran.
pub fn compare_ritz_histories<T: Field>(p: &SolveReport<T>, l: &SolveReport<T>, iters: usize, tol: f64) -> Result<(), String> {
    let rows = iters.min(p.trace.len() - 1).min(l.trace.len() - 1);
    ensure!(rows >= 1, "no iterations to compare");
    for i in 1..=rows {
        let (Some(vp), Some(vl)) = (&p.trace.records[i].ritz_values, &l.trace.records[i].ritz_values) else {
            return Err(format!("iteration {i} has no Ritz values"));
        };
        let diff = max_diff(vp, vl);
        ensure!(vp.len() == vl.len() && diff <= tol, "iteration {i}: Ritz values differ by {diff:e}");
    }
    Ok(())
}

pub fn orthonormality_maintained<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let opts = SolverOptions {
        nbuf: 1,
        sbsize: 2,
        rr_period: Some(3),
        tol: 1e-12,
        max_iter: 15,
        orth_policy: OrthPolicy::EveryIteration,
        seed,
        ..SolverOptions::new(4)
    };
    let report = ppcg_solve(a, &IdentityPreconditioner, None, &opts).map_err(|e| e.to_string())?;
    let bound = 1e-10 * (opts.width() as f64).sqrt();
    for rec in report.trace.iter() {
        let loss = rec.orth_loss.ok_or("PPCG rows carry the orthonormality loss")?;
        ensure!(loss <= bound, "iteration {}: loss {loss:e}", rec.iter);
    }
    let loss = orthonormality_loss(&report.vectors);
    ensure!(loss <= 1e-8 * 2.0, "returned vectors: loss {loss:e}");
    Ok(())
}

pub fn determinism<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let opts = SolverOptions {
        nbuf: 1,
        sbsize: 2,
        tol: 1e-10,
        max_iter: 25,
        seed,
        ..SolverOptions::new(4)
    };
    let strip = |r: SolveReport<T>| {
        let mut t = r.trace;
        t.records.iter_mut().for_each(|rec| rec.wall_ms = 0.0);
        (t, r.values)
    };
    let one = strip(ppcg_solve(a, &IdentityPreconditioner, None, &opts).map_err(|e| e.to_string())?);
    let two = strip(ppcg_solve(a, &IdentityPreconditioner, None, &opts).map_err(|e| e.to_string())?);
    ensure!(one == two, "two identical runs differ");
    Ok(())
}

pub fn baseline_ritz_invariants<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    for max_iter in 1..=5 {
        let opts = BaselineOptions {
            nbuf: 1,
            tol: 1e-13,
            max_iter,
            seed,
            restart_dim_multiple: 2,
            ..BaselineOptions::new(3)
        };
        let d = davidson_solve(a, &IdentityPreconditioner, None, &opts).map_err(|e| e.to_string())?;
        diagonalizes(a, &d.vectors, &d.values).map_err(|e| format!("davidson after {max_iter}: {e}"))?;
        let l = lobpcg_solve(a, &IdentityPreconditioner, None, &opts).map_err(|e| e.to_string())?;
        diagonalizes(a, &l.vectors, &l.values).map_err(|e| format!("lobpcg after {max_iter}: {e}"))?;
    }
    Ok(())
}

pub fn lobpcg_sum_monotone<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let opts = BaselineOptions {
        nbuf: 1,
        tol: 1e-13,
        max_iter: 30,
        seed,
        ..BaselineOptions::new(4)
    };
    let l = lobpcg_solve(a, &IdentityPreconditioner, None, &opts).map_err(|e| e.to_string())?;
    let slack = 1e-12 * op_norm(a).max(1.0);
    let sums: Vec<f64> = l.trace.iter().filter_map(|r| r.ritz_values.as_ref()).map(|v| v.iter().sum()).collect();
    for (i, pair) in sums.windows(2).enumerate() {
        ensure!(pair[1] <= pair[0] + slack, "sum rose from {} to {} after iteration {}", pair[0], pair[1], i + 1);
    }
    Ok(())
}

pub fn operator_hermitian<T: Field>(a: &SparseHermitian<T>, seed: u64) -> Result<(), String> {
    let mut r = rng(seed, 12);
    for _ in 0..4 {
        let x = BlockVectors::<T>::random(a.n(), 1, &mut r);
        let y = BlockVectors::<T>::random(a.n(), 1, &mut r);
        let xay = block_inner(&x, &a.apply(&y).unwrap()).unwrap()[(0, 0)];
        let yax = block_inner(&y, &a.apply(&x).unwrap()).unwrap()[(0, 0)].conjugate();
        let scale = x.frobenius_norm() * y.frobenius_norm() * op_norm(a).max(1.0);
        ensure!((xay - yax).modulus() <= 1e-12 * scale, "<x, Ay> - conj<y, Ax> = {}", (xay - yax).modulus());
    }
    Ok(())
}

pub fn matrix_market_round_trip<T: Field>(a: &SparseHermitian<T>, _seed: u64) -> Result<(), String> {
    let mut bytes = Vec::new();
    write_matrix_market_to(&mut bytes, a).map_err(|e| e.to_string())?;
    let back = parse_matrix_market(&bytes[..]).map_err(|e| e.to_string())?;
    let same = match back {
        MatrixMarket::Real(b) => !T::IS_COMPLEX && bitwise_equal(a, &b),
        MatrixMarket::Complex(b) => T::IS_COMPLEX && bitwise_equal(a, &b),
    };
    ensure!(same, "read back a different matrix");
    Ok(())
}

pub fn bitwise_equal<T: Field, U: Field>(a: &SparseHermitian<T>, b: &SparseHermitian<U>) -> bool {
    let bits = |v: (f64, f64)| (v.0.to_bits(), v.1.to_bits());
    a.n() == b.n()
        && a.row_ptr() == b.row_ptr()
        && a.col_indices() == b.col_indices()
        && a.values().iter().zip(b.values()).all(|(x, y)| bits(x.parts()) == bits(y.parts()))
}

fn pair(n: usize, a: usize, b: usize, sign: f64) -> Vec<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![0.0; n];
    v[a] = s;
    v[b] = sign * s;
    v
}

fn block(cols: &[Vec<f64>]) -> BlockVectors<f64> {
    BlockVectors::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i])
}

/// X lives on eigenvectors 5..8 of diag(1..10) and P on the two lowest, which
/// are decoupled from X and W. The local minimizer is P itself, so C_X = 0.
pub fn engineered() -> (DenseOperator<f64>, SubblockInput<f64>) {
    let n = 10;
    let a = DenseOperator::from_diagonal(&(1..=n).map(|i| i as f64).collect::<Vec<_>>());
    let x = block(&[pair(n, 4, 5, 1.0), pair(n, 6, 7, 1.0)]);
    let ax = a.apply(&x).unwrap();
    let w = subspace_residual(&x, &ax).unwrap();
    let aw = a.apply(&w).unwrap();
    let p = BlockVectors::unit_columns(n, &[0, 1]);
    let ap = a.apply(&p).unwrap();
    let input = SubblockInput {
        x,
        ax,
        w,
        aw,
        p: Some((p, ap)),
    };
    (a, input)
}

/// The engineered instance must fall back to steepest descent and come out
/// with full rank.
pub fn engineered_recovers() -> Result<(), String> {
    let (a, input) = engineered();
    let up = block_update(&input).map_err(|e| e.to_string())?;
    ensure!(up.kind == UpdateKind::SteepestDescent, "update kind {:?}", up.kind);
    let direct = fallback_steepest_descent(&input).map_err(|e| e.to_string())?;
    ensure!(direct.kind == UpdateKind::SteepestDescent, "fallback kind {:?}", direct.kind);
    let sigma = up.x.as_matrix().clone().singular_values().min();
    ensure!(sigma > 1e-8, "smallest singular value {sigma:e}");
    let drift = (&a.apply(&up.x).unwrap() - &up.ax).frobenius_norm();
    ensure!(drift < 1e-12, "AX drift {drift:e}");
    Ok(())
}
