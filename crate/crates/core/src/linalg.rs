//! Small dense helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

pub type SquareMatrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest absolute entry; zero for an empty matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Orthonormal basis of the orthogonal complement of the unit vector `u`,
/// returned as the columns of a `k x (k-1)` matrix.
///
/// Built from the Householder reflection that exchanges `e_0` and `u` (up to
/// sign), so the result is a deterministic function of `u`. When `u = ±e_0`
/// the columns are exactly `e_1, ..., e_{k-1}`.
pub fn orthonormal_complement(u: &DVector<f64>) -> DMatrix<f64> {
    let k = u.len();
    let sign = if u[0] < 0.0 { -1.0 } else { 1.0 };
    let mut w = u.clone();
    w[0] += sign;
    let ww = w.dot(&w);
    let mut out = DMatrix::zeros(k, k - 1);
    for col in 1..k {
        // column `col` of I - 2 w w^T / (w^T w)
        let scale = 2.0 * w[col] / ww;
        for row in 0..k {
            let delta = if row == col { 1.0 } else { 0.0 };
            out[(row, col - 1)] = delta - scale * w[row];
        }
    }
    out
}

/// Solves the square system `m x = rhs` by partial-pivot LU.
///
/// Fails when the smallest pivot falls below `rel_tol` times the largest
/// entry of `m`.
pub fn solve_square(
    m: DMatrix<f64>,
    rhs: &DVector<f64>,
    rel_tol: f64,
    context: &'static str,
) -> Result<DVector<f64>> {
    let n = m.nrows();
    if m.ncols() != n || rhs.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: m.ncols().max(rhs.len()),
        });
    }
    let mut a: Vec<f64> = m.transpose().as_slice().to_vec();
    let mut b: Vec<f64> = rhs.as_slice().to_vec();
    solve_in_place(&mut a, &mut b, rel_tol, context)?;
    Ok(DVector::from_vec(b))
}

/// Gaussian elimination with partial pivoting on a row-major `n x n` slice;
/// the solution overwrites `b`. Same pivot criterion as [`solve_square`].
pub fn solve_in_place(a: &mut [f64], b: &mut [f64], rel_tol: f64, context: &'static str) -> Result<()> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let (mut best, mut best_row) = (0.0_f64, col);
        for row in col..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                best_row = row;
            }
        }
        if !(best > rel_tol * scale) {
            return Err(GeomError::Singular { context, pivot: best });
        }
        if best_row != col {
            for k in 0..n {
                a.swap(col * n + k, best_row * n + k);
            }
            b.swap(col, best_row);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor != 0.0 {
                for k in col + 1..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Pfaffian of a real skew-symmetric matrix by skew-symmetric Gaussian
/// elimination with pivoting (Parlett-Reid style, `O(n^3)`).
///
/// Odd dimensions give zero. The input is not checked for skew-symmetry;
/// only its strictly upper triangle (and the mirrored lower part) is used.
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "pfaffian of a non-square matrix");
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = m.clone();
    let mut pf = 1.0;
    for k in (0..n - 1).step_by(2) {
        // pivot: largest entry in column k below the diagonal
        let mut kp = k + 1;
        for i in k + 2..n {
            if a[(i, k)].abs() > a[(kp, k)].abs() {
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let piv = a[(k, k + 1)];
        if piv == 0.0 {
            return 0.0;
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / piv).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
    }
    pf
}
