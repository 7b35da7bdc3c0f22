//! Sparse matrices and the linear solvers behind the scheme.
//!
//! Under row-major cell numbering the assembled operators are banded
//! (pentadiagonal with bandwidth nx on an nx×ny grid), so the direct path is
//! a banded LU with partial pivoting. Systems with more than [`DIRECT_LIMIT`]
//! unknowns are solved iteratively with ILU(0)-preconditioned BiCGSTAB to a
//! relative residual of [`KRYLOV_RTOL`], capped at 10·N iterations.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Unknown-count threshold separating the direct path from the iterative one.
pub const DIRECT_LIMIT: usize = 20_000;

/// Relative residual target for the iterative path.
pub const KRYLOV_RTOL: f64 = 1e-12;

/// Compressed-sparse-row matrix. Rows are sorted by column index and hold at
/// most one entry per column (duplicate triplets are summed on construction).
#[derive(Clone, Debug)]
pub struct SparseMatrix<F> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<F>,
}

impl<F: Real> SparseMatrix<F> {
    /// Builds an n×n matrix from (row, col, value) triplets; duplicates are
    /// accumulated in insertion order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, F)]) -> Result<Self> {
        let mut trip: Vec<(usize, usize, F)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) out of range for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "nonfinite matrix entry at ({i}, {j})"
                )));
            }
            trip.push((i, j, v));
        }
        // Stable sort keeps insertion order within a (row, col) group, so the
        // accumulation order (and hence the bits of the sums) is deterministic.
        trip.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx: Vec<usize> = Vec::new();
        let mut values: Vec<F> = Vec::new();
        let mut next_row = 0usize; // first row whose start is not yet recorded
        let mut cur: Option<(usize, usize)> = None; // (row, col) of the last entry
        for (i, j, v) in trip {
            if cur == Some((i, j)) {
                let last = values.last_mut().unwrap();
                *last = *last + v;
                continue;
            }
            while next_row <= i {
                row_ptr.push(col_idx.len());
                next_row += 1;
            }
            col_idx.push(j);
            values.push(v);
            cur = Some((i, j));
        }
        while next_row <= n {
            row_ptr.push(col_idx.len());
            next_row += 1;
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Iterates entries in row-major, column-sorted order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, F)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row_range(i)
                .map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    /// Entry (i, j), zero if absent from the pattern.
    pub fn get(&self, i: usize, j: usize) -> F {
        let r = self.row_range(i);
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => F::zero(),
        }
    }

    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        let mut y = vec![F::zero(); self.n];
        for i in 0..self.n {
            let mut acc = F::zero();
            for k in self.row_range(i) {
                acc = acc + self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// Column sums, accumulated in row-major entry order.
    pub fn column_sums(&self) -> Vec<F> {
        let mut s = vec![F::zero(); self.n];
        for (_, j, v) in self.entries() {
            s[j] = s[j] + v;
        }
        s
    }

    /// Largest entry magnitude (zero for an empty matrix).
    pub fn max_abs(&self) -> F {
        self.values
            .iter()
            .fold(F::zero(), |m, &v| m.max(v.abs()))
    }

    /// Operator ∞-norm: the largest absolute row sum.
    pub fn inf_norm(&self) -> F {
        (0..self.n).fold(F::zero(), |m, i| {
            let row = self
                .row_range(i)
                .fold(F::zero(), |s, k| s + self.values[k].abs());
            m.max(row)
        })
    }

    /// Copy with row `pin` replaced by the `pin`-th identity row. Used to
    /// make the singular scheme operator invertible.
    pub fn with_pinned_row(&self, pin: usize) -> Self {
        assert!(pin < self.n);
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for i in 0..self.n {
            if i == pin {
                col_idx.push(pin);
                values.push(F::one());
            } else {
                for k in self.row_range(i) {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Text dump: one `row col value` line per stored entry, then a final
    /// `checksum <sum-of-absolute-values>` line.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        let mut checksum = F::zero();
        for (i, j, v) in self.entries() {
            writeln!(out, "{} {} {}", i, j, v).unwrap();
            checksum = checksum + v.abs();
        }
        writeln!(out, "checksum {}", checksum).unwrap();
        out
    }
}

/// LU factorization of a banded matrix with partial pivoting.
///
/// Storage is row-major with `2*kl + ku + 1` diagonals per row: `kl`
/// subdiagonals, the diagonal, and `kl + ku` superdiagonals (the extra `kl`
/// superdiagonals absorb pivoting fill).
pub struct BandedLu<F> {
    n: usize,
    kl: usize,
    ku: usize,
    stride: usize,
    band: Vec<F>,
    piv: Vec<usize>,
}

impl<F: Real> BandedLu<F> {
    pub fn factor(a: &SparseMatrix<F>) -> Result<Self> {
        let n = a.n();
        if n == 0 {
            return Err(Error::InvalidArgument("empty system".into()));
        }
        let mut kl = 0usize;
        let mut ku = 0usize;
        for (i, j, _) in a.entries() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let stride = 2 * kl + ku + 1;
        let mut band = vec![F::zero(); n * stride];
        let at = |i: usize, j: usize| -> usize {
            debug_assert!(j + kl >= i && j <= i + kl + ku);
            i * stride + (j + kl - i)
        };
        for (i, j, v) in a.entries() {
            band[at(i, j)] = v;
        }

        let mut piv = vec![0usize; n];
        for k in 0..n {
            let imax = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = band[at(k, k)].abs();
            for i in (k + 1)..=imax {
                let m = band[at(i, k)].abs();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == F::zero() {
                return Err(Error::LinearSolve(format!(
                    "singular banded system (zero pivot at column {k})"
                )));
            }
            piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    band.swap(at(k, j), at(p, j));
                }
            }
            let pivot = band[at(k, k)];
            for i in (k + 1)..=imax {
                let m = band[at(i, k)] / pivot;
                band[at(i, k)] = m;
                if m != F::zero() {
                    for j in (k + 1)..=jmax {
                        let u = band[at(k, j)];
                        band[at(i, j)] = band[at(i, j)] - m * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            stride,
            band,
            piv,
        })
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        assert_eq!(b.len(), self.n, "rhs dimension mismatch");
        let at = |i: usize, j: usize| -> usize { i * self.stride + (j + self.kl - i) };
        let mut x = b.to_vec();
        for k in 0..self.n {
            x.swap(k, self.piv[k]);
            let imax = (k + self.kl).min(self.n - 1);
            let xk = x[k];
            for i in (k + 1)..=imax {
                x[i] = x[i] - self.band[at(i, k)] * xk;
            }
        }
        for k in (0..self.n).rev() {
            let jmax = (k + self.kl + self.ku).min(self.n - 1);
            let mut acc = x[k];
            for j in (k + 1)..=jmax {
                acc = acc - self.band[at(k, j)] * x[j];
            }
            x[k] = acc / self.band[at(k, k)];
        }
        x
    }
}

/// Zero-fill incomplete LU factorization on the matrix's own pattern.
pub struct Ilu0<F> {
    pattern: SparseMatrix<F>,
    diag_pos: Vec<usize>,
}

impl<F: Real> Ilu0<F> {
    pub fn factor(a: &SparseMatrix<F>) -> Result<Self> {
        let mut m = a.clone();
        let n = m.n;
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in m.row_range(i) {
                if m.col_idx[k] == i {
                    diag_pos[i] = k;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(Error::LinearSolve(format!(
                    "ILU(0): structurally zero diagonal in row {i}"
                )));
            }
        }
        for i in 0..n {
            let range = m.row_range(i);
            for kk in range.clone() {
                let k = m.col_idx[kk];
                if k >= i {
                    break;
                }
                let ukk = m.values[diag_pos[k]];
                if ukk == F::zero() {
                    return Err(Error::LinearSolve(format!("ILU(0): zero pivot in row {k}")));
                }
                let lik = m.values[kk] / ukk;
                m.values[kk] = lik;
                // subtract lik * (row k restricted to columns > k within row i's pattern)
                let krange = m.row_range(k);
                for kj in krange {
                    let j = m.col_idx[kj];
                    if j <= k {
                        continue;
                    }
                    let r = range.clone();
                    if let Ok(pos) = m.col_idx[r.clone()].binary_search(&j) {
                        let idx = r.start + pos;
                        m.values[idx] = m.values[idx] - lik * m.values[kj];
                    }
                }
            }
        }
        Ok(Self {
            pattern: m,
            diag_pos,
        })
    }

    /// Applies M⁻¹ (forward unit-lower solve, then backward upper solve).
    pub fn apply(&self, r: &[F]) -> Vec<F> {
        let m = &self.pattern;
        let n = m.n;
        let mut y = r.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for k in m.row_range(i) {
                let j = m.col_idx[k];
                if j >= i {
                    break;
                }
                acc = acc - m.values[k] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in m.row_range(i) {
                let j = m.col_idx[k];
                if j > i {
                    acc = acc - m.values[k] * y[j];
                }
            }
            y[i] = acc / m.values[self.diag_pos[i]];
        }
        y
    }
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm2<F: Real>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Preconditioned BiCGSTAB. Returns the solution and the iteration count.
/// The recursive residual is confirmed against the true residual before the
/// method reports success.
///
/// Convergence is normwise backward error, ‖r‖ ≤ rtol·(‖A‖∞‖x‖ + ‖b‖): a
/// plain ‖r‖ ≤ rtol·‖b‖ target is unattainable in floating point once the
/// solution is much larger than the data, which is the norm for the
/// Neumann-type operators solved here (condition number ~ h⁻²).
pub fn bicgstab<F: Real>(
    a: &SparseMatrix<F>,
    b: &[F],
    precond: &Ilu0<F>,
    rtol: F,
    max_iter: usize,
) -> Result<(Vec<F>, usize)> {
    let n = a.n();
    let bnorm = norm2(b);
    if bnorm == F::zero() {
        return Ok((vec![F::zero(); n], 0));
    }
    let ainf = a.inf_norm();
    let target = |x: &[F]| rtol * (ainf * norm2(x) + bnorm);

    let mut x = vec![F::zero(); n];
    let mut r = b.to_vec();
    let mut rhat = r.clone();
    let mut rho = F::one();
    let mut alpha = F::one();
    let mut omega = F::one();
    let mut v = vec![F::zero(); n];
    let mut p = vec![F::zero(); n];

    // Restart with the current iterate as initial guess: the recursion state
    // is discarded and the next step behaves like a fresh first iteration.
    macro_rules! restart {
        ($res:expr) => {{
            r = $res;
            rhat = r.clone();
            rho = F::one();
            alpha = F::one();
            omega = F::one();
            v = vec![F::zero(); n];
            p = vec![F::zero(); n];
        }};
    }

    for it in 1..=max_iter {
        let rho_new = dot(&rhat, &r);
        if rho_new == F::zero() {
            return Err(Error::LinearSolve("BiCGSTAB breakdown (rho = 0)".into()));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = precond.apply(&p);
        v = a.matvec(&phat);
        let denom = dot(&rhat, &v);
        if denom == F::zero() {
            return Err(Error::LinearSolve("BiCGSTAB breakdown (r̂·v = 0)".into()));
        }
        alpha = rho_new / denom;
        let mut s = r.clone();
        for i in 0..n {
            s[i] = s[i] - alpha * v[i];
        }
        if norm2(&s) <= target(&x) {
            for i in 0..n {
                x[i] = x[i] + alpha * phat[i];
            }
            let true_res = residual(a, &x, b);
            if norm2(&true_res) <= target(&x) {
                return Ok((x, it));
            }
            restart!(true_res);
            continue;
        }
        let shat = precond.apply(&s);
        let t = a.matvec(&shat);
        let tt = dot(&t, &t);
        if tt == F::zero() {
            return Err(Error::LinearSolve("BiCGSTAB breakdown (t = 0)".into()));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] = x[i] + alpha * phat[i] + omega * shat[i];
        }
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        rho = rho_new;
        if norm2(&r) <= target(&x) {
            let true_res = residual(a, &x, b);
            if norm2(&true_res) <= target(&x) {
                return Ok((x, it));
            }
            restart!(true_res);
        }
    }
    Err(Error::LinearSolve(format!(
        "BiCGSTAB did not reach relative residual {:.1e} in {} iterations",
        rtol.as_f64(),
        max_iter
    )))
}

fn residual<F: Real>(a: &SparseMatrix<F>, x: &[F], b: &[F]) -> Vec<F> {
    let ax = a.matvec(x);
    b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect()
}

/// A prepared factorization on the routed path: banded LU up to
/// [`DIRECT_LIMIT`] unknowns, ILU(0) + BiCGSTAB beyond.
pub enum Factorization<F> {
    Direct(BandedLu<F>),
    Iterative(Ilu0<F>),
}

impl<F: Real> Factorization<F> {
    pub fn prepare(a: &SparseMatrix<F>) -> Result<Self> {
        if a.n() <= DIRECT_LIMIT {
            Ok(Self::Direct(BandedLu::factor(a)?))
        } else {
            Ok(Self::Iterative(Ilu0::factor(a)?))
        }
    }

    /// Solves `a x = b`; `a` must be the matrix this factorization was
    /// prepared from. Returns the solution and the Krylov iteration count
    /// (0 on the direct path).
    pub fn solve(&self, a: &SparseMatrix<F>, b: &[F]) -> Result<(Vec<F>, usize)> {
        match self {
            Self::Direct(lu) => Ok((lu.solve(b), 0)),
            Self::Iterative(ilu) => {
                bicgstab(a, b, ilu, F::of(KRYLOV_RTOL), 10 * a.n())
            }
        }
    }
}

/// One-shot routed solve.
pub fn solve_linear<F: Real>(a: &SparseMatrix<F>, b: &[F]) -> Result<(Vec<F>, usize)> {
    Factorization::prepare(a)?.solve(a, b)
}
