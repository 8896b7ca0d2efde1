//! Shared helpers for unit tests: seeded random draws and independent oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMat, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cgauss(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cgauss(rng))
}

pub fn random_sequences(rng: &mut impl Rng, channels: usize, len: usize) -> Vec<Vec<C64>> {
    (0..channels).map(|_| (0..len).map(|_| cgauss(rng)).collect()).collect()
}

/// Eigenvalues of a Hermitian matrix via cyclic Jacobi rotations on its real 2n x 2n embedding
/// `[[Re, -Im], [Im, Re]]`; every eigenvalue appears twice there, so every other one is kept.
pub fn jacobi_hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let size = 2 * n;
    let mut a = vec![vec![0.0; size]; size];
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            a[r][c] = z.re;
            a[r + n][c + n] = z.re;
            a[r][c + n] = -z.im;
            a[r + n][c] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..size)
            .flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..size {
            for q in (p + 1)..size {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..size {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..size {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..size).map(|i| a[i][i]).collect();
    diag.sort_by(|x, y| x.total_cmp(y));
    diag.into_iter().step_by(2).collect()
}

/// Rank by Gaussian elimination with partial pivoting; pivots below `tol * max|entry|` count as zero.
pub fn row_reduction_rank(m: &CMat, tol: f64) -> usize {
    let mut a: Vec<Vec<C64>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (piv, best) = (rank..rows)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if best <= tol * scale {
            continue;
        }
        a.swap(rank, piv);
        for r in (rank + 1)..rows {
            let f = a[r][col] / a[rank][col];
            for c in col..cols {
                let v = a[rank][c];
                a[r][c] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}
