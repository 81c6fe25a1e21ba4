//! Tridiagonal linear solves and the symmetric tridiagonal eigenproblem
//! (Sturm-sequence bisection for eigenvalues, inverse iteration for vectors).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum TridiagError {
    /// A pivot vanished in the elimination.
    ZeroPivot { row: usize },
    /// Inverse iteration did not reach the requested residual.
    ConvergenceFailure { index: usize, residual: f64 },
    TooManyEigenpairs { requested: usize, size: usize },
}

impl fmt::Display for TridiagError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TridiagError::ZeroPivot { row } => write!(f, "zero pivot in tridiagonal solve at row {row}"),
            TridiagError::ConvergenceFailure { index, residual } => write!(
                f,
                "eigenpair {index} did not converge (residual {residual:e})"
            ),
            TridiagError::TooManyEigenpairs { requested, size } => {
                write!(f, "requested {requested} eigenpairs of a {size}x{size} matrix")
            }
        }
    }
}

impl core::error::Error for TridiagError {}

/// Solves `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i` in place (Thomas
/// algorithm, no pivoting). `sub[0]` and `sup[n-1]` are ignored. Intended for
/// diagonally dominant systems.
pub fn solve_in_place(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Result<(), TridiagError> {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(TridiagError::ZeroPivot { row: 0 });
    }
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = sup[i - 1] / beta;
        beta = diag[i] - sub[i] * scratch[i];
        if beta == 0.0 {
            return Err(TridiagError::ZeroPivot { row: i });
        }
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    Ok(())
}

/// Symmetric tridiagonal matrix: `diag` has length `n`, `off` length `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Infinity norm; used to scale tolerances.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let qp = if q.abs() < tiny { tiny } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / qp;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` algebraically smallest eigenvalues, ascending, by bisection.
    pub fn smallest_eigenvalues(&self, k: usize) -> Result<Vec<f64>, TridiagError> {
        let n = self.len();
        if k > n {
            return Err(TridiagError::TooManyEigenpairs { requested: k, size: n });
        }
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            // find x with count_below(x) <= j < count_below(hi)
            let mut lo = glo - 1e-12 * scale;
            let mut hi = ghi + 1e-12 * scale;
            if let Some(&prev) = out.last() {
                lo = f64::max(lo, prev - 1e-12 * scale);
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 4.0 * f64::EPSILON * scale {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }

    /// Eigenvector for the eigenvalue estimate `mu` by inverse iteration,
    /// orthogonalized against `deflate` (unit vectors). Euclidean-normalized.
    pub fn inverse_iteration(
        &self,
        mu: f64,
        deflate: &[Vec<f64>],
        index: usize,
    ) -> Result<Vec<f64>, TridiagError> {
        let n = self.len();
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        let shift = mu + 1e3 * f64::EPSILON * scale;
        let lu = PivotedLu::factor(self, shift);
        // deterministic start vector with components in every direction
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * math::sin(1.0 + 0.37 * i as f64))
            .collect();
        orthonormalize(&mut x, deflate);
        let mut residual = f64::INFINITY;
        for iteration in 0..8 {
            lu.solve(&mut x);
            orthonormalize(&mut x, deflate);
            let ax = self.matvec(&x);
            residual = math::sqrt(
                ax.iter()
                    .zip(&x)
                    .map(|(a, v)| (a - mu * v) * (a - mu * v))
                    .sum::<f64>(),
            );
            // one solve leaves other components at the relative shift size
            if iteration >= 1 && residual <= 1e-10 * scale {
                return Ok(x);
            }
        }
        if residual <= 1e-8 * scale {
            Ok(x)
        } else {
            Err(TridiagError::ConvergenceFailure { index, residual })
        }
    }

    /// The `k` smallest eigenpairs with Euclidean-normalized vectors.
    pub fn smallest_eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>, TridiagError> {
        let values = self.smallest_eigenvalues(k)?;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut out = Vec::with_capacity(k);
        for (j, &mu) in values.iter().enumerate() {
            // only vectors of (numerically) coincident eigenvalues need deflation
            let cluster: Vec<Vec<f64>> = values[..j]
                .iter()
                .zip(&vectors)
                .filter(|(m, _)| (mu - **m).abs() <= 1e-8 * (1.0 + mu.abs()))
                .map(|(_, v)| v.clone())
                .collect();
            let v = self.inverse_iteration(mu, &cluster, j)?;
            vectors.push(v.clone());
            out.push((mu, v));
        }
        Ok(out)
    }
}

fn orthonormalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let d: f64 = x.iter().zip(b).map(|(a, c)| a * c).sum();
        for (a, c) in x.iter_mut().zip(b) {
            *a -= d * c;
        }
    }
    let norm = math::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

/// LU factorization of `T - shift I` with partial pivoting; `U` has two
/// super-diagonals.
struct PivotedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    fn factor(t: &SymTridiag, shift: f64) -> Self {
        let n = t.len();
        let tiny = f64::EPSILON * t.norm_inf().max(f64::MIN_POSITIVE);
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        // current row i: (d, e, f) at columns i, i+1, i+2
        let mut d = t.diag[0] - shift;
        let mut e = if n > 1 { t.off[0] } else { 0.0 };
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if d.abs() < tiny { tiny } else { d };
                break;
            }
            let sub = t.off[i];
            let nd = t.diag[i + 1] - shift;
            let ne = if i + 2 < n { t.off[i + 1] } else { 0.0 };
            if sub.abs() > d.abs() {
                // swap rows i and i+1
                swapped[i] = true;
                u0[i] = sub;
                u1[i] = nd;
                u2[i] = ne;
                let m = d / sub;
                l[i] = m;
                d = e - m * nd;
                e = -m * ne;
            } else {
                let piv = if d.abs() < tiny { tiny } else { d };
                u0[i] = piv;
                u1[i] = e;
                u2[i] = 0.0;
                let m = sub / piv;
                l[i] = m;
                d = nd - m * e;
                e = ne;
            }
        }
        PivotedLu {
            u0,
            u1,
            u2,
            l,
            swapped,
        }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.l[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}
