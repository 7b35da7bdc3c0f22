//! Shared oracles for the acceptance suite: dense Gaussian elimination,
//! a dense rank count, and randomized problem-data builders.

use medfv::mesh::Vec2;
use medfv::scheme::ProblemData;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Dense row-major copy of a sparse matrix.
pub fn to_dense(a: &medfv::Matrix) -> Vec<Vec<f64>> {
    let n = a.n();
    let mut d = vec![vec![0.0; n]; n];
    for (i, j, v) in a.entries() {
        d[i][j] = v;
    }
    d
}

/// Gaussian elimination with partial pivoting; panics on a (numerically)
/// singular system, which the acceptance inputs never produce.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        assert!(a[piv][col].abs() > 0.0, "singular dense system");
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Rank by forward elimination with partial pivoting and a relative
/// threshold keyed to the largest entry.
pub fn dense_rank(mut a: Vec<Vec<f64>>) -> usize {
    let n = a.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1e-300);
    let tol = 1e-10 * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        let piv = (row..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap());
        let piv = match piv {
            Some(p) if a[p][col].abs() > tol => p,
            _ => continue,
        };
        a.swap(row, piv);
        for r in row + 1..n {
            let f = a[r][col] / a[row][col];
            for k in col..n {
                a[r][k] -= f * a[row][k];
            }
        }
        rank += 1;
        row += 1;
        if row == n {
            break;
        }
    }
    rank
}

/// A randomized admissible problem: bounded diffusion law (constant or
/// rational-in-u), bounded affine velocity, zero source.
pub fn random_problem(rng: &mut ChaCha8Rng) -> ProblemData<f64> {
    let data = if rng.random_bool(0.5) {
        let c: f64 = rng.random_range(0.5..3.0);
        ProblemData::new(
            Arc::new(move |_| c),
            c,
            c,
            random_velocity(rng),
            4.0,
            Arc::new(|_, _| 0.0),
        )
    } else {
        let a: f64 = rng.random_range(0.5..2.0);
        let b: f64 = rng.random_range(0.1..1.0);
        ProblemData::new(
            Arc::new(move |r: f64| a + b / (1.0 + r * r)),
            a,
            a + b,
            random_velocity(rng),
            4.0,
            Arc::new(|_, _| 0.0),
        )
    };
    data.unwrap()
}

fn random_velocity(rng: &mut ChaCha8Rng) -> Arc<dyn Fn(f64, f64) -> Vec2<f64> + Send + Sync> {
    let a1: f64 = rng.random_range(-2.0..2.0);
    let a2: f64 = rng.random_range(-2.0..2.0);
    let b1: f64 = rng.random_range(-2.0..2.0);
    let b2: f64 = rng.random_range(-2.0..2.0);
    Arc::new(move |x, y| Vec2::new(a1 + b1 * y, a2 + b2 * x))
}

/// Random cell values in [-3, 3].
pub fn random_field(rng: &mut ChaCha8Rng, n: usize) -> medfv::Field {
    medfv::Field::new((0..n).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap()
}

/// Prints the single acceptance line for a criterion, then enforces it.
pub fn conclude(index: usize, title: &str, ok: bool, detail: String) {
    println!(
        "acceptance {:>2} {:<26} {} ({detail})",
        index,
        title,
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {index} ({title}) failed: {detail}");
}
