//! Model Hamiltonians with known or easily computed spectra.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;

use super::sparse::SparseHermitian;

/// Tridiagonal `(-1, 2, -1)` with Dirichlet boundaries. Eigenvalues are
/// `2 - 2 cos(j pi / (n + 1))`.
pub fn laplacian_1d(n: usize) -> SparseHermitian<f64> {
    let mut entries = Vec::with_capacity(3 * n);
    for i in 0..n {
        entries.push((i, i, 2.0));
        if i + 1 < n {
            entries.push((i + 1, i, -1.0));
        }
    }
    SparseHermitian::from_triangle(n, entries).expect("indices in range")
}

/// Exact eigenvalues of [`laplacian_1d`], ascending.
pub fn laplacian_1d_eigenvalues(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
        .collect()
}

/// Seven-point stencil on an `nx * ny * nz` grid with Dirichlet boundaries.
/// Grid point `(i, j, k)` has index `i + nx * (j + ny * k)`.
pub fn laplacian_3d(nx: usize, ny: usize, nz: usize) -> SparseHermitian<f64> {
    let n = nx * ny * nz;
    let idx = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let mut entries = Vec::with_capacity(4 * n);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = idx(i, j, k);
                entries.push((p, p, 6.0));
                if i > 0 {
                    entries.push((p, idx(i - 1, j, k), -1.0));
                }
                if j > 0 {
                    entries.push((p, idx(i, j - 1, k), -1.0));
                }
                if k > 0 {
                    entries.push((p, idx(i, j, k - 1), -1.0));
                }
            }
        }
    }
    SparseHermitian::from_triangle(n, entries).expect("indices in range")
}

/// [`laplacian_3d`] plus a diagonal potential.
pub fn laplacian_plus_potential(nx: usize, ny: usize, nz: usize, potential: &[f64]) -> Result<SparseHermitian<f64>> {
    check_dim("potential length", nx * ny * nz, potential.len())?;
    laplacian_3d(nx, ny, nz).add_diagonal(potential)
}

/// Two Gaussian wells of the given depth, mirror images of each other
/// across the `x` midplane, plus seeded noise of relative size `1e-3`.
///
/// The near symmetry splits each bound state into a tightly spaced pair, so
/// the low end of the spectrum is clustered.
pub fn two_well_potential(nx: usize, ny: usize, nz: usize, depth: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coord = |i: usize, m: usize| (i as f64 + 1.0) / (m as f64 + 1.0);
    let width = 0.15;
    let centers = [[0.3, 0.5, 0.5], [0.7, 0.5, 0.5]];
    let mut v = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let r = [coord(i, nx), coord(j, ny), coord(k, nz)];
                let wells: f64 = centers
                    .iter()
                    .map(|c| {
                        let d2: f64 = r.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                        (-d2 / (2.0 * width * width)).exp()
                    })
                    .sum();
                let noise = 1e-3 * depth * (2.0 * rng.random::<f64>() - 1.0);
                v.push(-depth * wells + noise);
            }
        }
    }
    v
}

/// Seeded sparse Hermitian matrix: each position of the lower triangle is
/// kept with probability `density` and filled with a standard normal
/// sample, then mirrored. Diagonal entries are real.
pub fn random_hermitian<T: Field>(n: usize, density: f64, seed: u64) -> Result<SparseHermitian<T>> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(EigenError::InvalidOptions(format!("density {density} outside (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..=i {
            if density < 1.0 && rng.random::<f64>() >= density {
                continue;
            }
            let v = if i == j {
                T::from_real(rng.sample(rand_distr::StandardNormal))
            } else {
                T::sample_normal(&mut rng)
            };
            entries.push((i, j, v));
        }
    }
    SparseHermitian::from_triangle(n, entries)
}
