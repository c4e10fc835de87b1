//! Banded linear algebra for the 1D implicit solves.
//!
//! Every system assembled in this crate is a diagonally dominant
//! tridiagonal matrix, optionally with a handful of off-band "corner"
//! entries coming from periodic boundary conditions. The band part is
//! solved with the Thomas algorithm; corners are folded in with a
//! Sherman-Morrison-Woodbury correction.

use crate::error::{Error, Result};

/// Pivots smaller than this in magnitude are treated as breakdown.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// A tridiagonal matrix stored by diagonals.
///
/// Row `i` reads `sub[i-1] * x[i-1] + diag[i] * x[i] + sup[i] * x[i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty tridiagonal system".into()));
        }
        for band in [&sub, &sup] {
            if band.len() != n - 1 {
                return Err(Error::LengthMismatch {
                    expected: n - 1,
                    found: band.len(),
                });
            }
        }
        Ok(Self { sub, diag, sup })
    }

    /// The `n x n` zero matrix.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "tridiagonal system needs at least one row");
        Self {
            sub: vec![0.0; n - 1],
            diag: vec![0.0; n],
            sup: vec![0.0; n - 1],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    /// Adds `value` to entry `(row, col)`; `col` must lie on the band.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        if row == col {
            self.diag[row] += value;
        } else if col + 1 == row {
            self.sub[col] += value;
        } else if row + 1 == col {
            self.sup[row] += value;
        } else {
            panic!("entry ({row}, {col}) is off the tridiagonal band");
        }
    }

    /// Adds the 2x2 block `k * [[1, -1], [-1, 1]]` on rows/cols `i, i+1`.
    pub fn add_edge(&mut self, i: usize, k: f64) {
        self.diag[i] += k;
        self.diag[i + 1] += k;
        self.sup[i] -= k;
        self.sub[i] -= k;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.sub[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.sup[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Adds a point penalty `weight * (u[node] - target)` to row `node`.
    pub fn add_point_penalty(
        &mut self,
        rhs: &mut [f64],
        node: usize,
        weight: f64,
        target: f64,
    ) -> Result<()> {
        let n = self.n();
        if node >= n || node >= rhs.len() {
            return Err(Error::IndexOutOfRange { index: node, len: n });
        }
        if !(weight >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "penalty weight must be non-negative, got {weight}"
            )));
        }
        self.diag[node] += weight;
        rhs[node] += weight * target;
        Ok(())
    }
}

/// Value-style wrapper around [`TridiagonalSystem::add_point_penalty`].
pub fn add_point_penalty(
    mut sys: TridiagonalSystem,
    mut rhs: Vec<f64>,
    node: usize,
    weight: f64,
    target: f64,
) -> Result<(TridiagonalSystem, Vec<f64>)> {
    sys.add_point_penalty(&mut rhs, node, weight, target)?;
    Ok((sys, rhs))
}

/// Thomas algorithm, no pivoting.
pub fn solve_tridiagonal(sys: &TridiagonalSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = sys.n();
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];

    let mut pivot = sys.diag[0];
    if pivot.abs() < PIVOT_FLOOR {
        return Err(Error::ZeroPivot(0));
    }
    if n > 1 {
        c[0] = sys.sup[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        let a = sys.sub[i - 1];
        pivot = sys.diag[i] - a * c[i - 1];
        if pivot.abs() < PIVOT_FLOOR || !pivot.is_finite() {
            return Err(Error::ZeroPivot(i));
        }
        if i + 1 < n {
            c[i] = sys.sup[i] / pivot;
        }
        d[i] = (rhs[i] - a * d[i - 1]) / pivot;
    }

    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// A single entry outside the tridiagonal band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Solves `(T + sum_k value_k e_row e_col^T) x = rhs`.
///
/// Each corner is a rank-one update; the small capacitance system is
/// solved densely with partial pivoting.
pub fn solve_with_corners(
    sys: &TridiagonalSystem,
    corners: &[Corner],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = sys.n();
    for c in corners {
        for idx in [c.row, c.col] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
    }
    let active: Vec<&Corner> = corners.iter().filter(|c| c.value != 0.0).collect();
    let mut x = solve_tridiagonal(sys, rhs)?;
    if active.is_empty() {
        return Ok(x);
    }

    let k = active.len();
    // z[j] = T^{-1} (value_j e_{row_j})
    let mut z = Vec::with_capacity(k);
    for c in &active {
        let mut e = vec![0.0; n];
        e[c.row] = c.value;
        z.push(solve_tridiagonal(sys, &e)?);
    }
    // capacitance = I + V^T Z, with V columns e_{col_i}
    let mut cap = vec![vec![0.0; k]; k];
    for (i, ci) in active.iter().enumerate() {
        for (j, zj) in z.iter().enumerate() {
            cap[i][j] = zj[ci.col] + if i == j { 1.0 } else { 0.0 };
        }
    }
    let vty: Vec<f64> = active.iter().map(|c| x[c.col]).collect();
    let w = dense_solve(cap, vty).ok_or(Error::SingularCorrection)?;
    for (zj, wj) in z.iter().zip(&w) {
        for (xi, zi) in x.iter_mut().zip(zj) {
            *xi -= wj * zi;
        }
    }
    Ok(x)
}

/// Gaussian elimination with partial pivoting for small dense systems.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < PIVOT_FLOOR {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
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
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
