use super::{DenseMatrix, NumericsError};

/// Solves `m * x = b` for symmetric positive definite `m` via Cholesky.
///
/// Fails with `NotPositiveDefinite` as soon as a pivot is non-positive,
/// which for a Kirchhoff block means some interior vertex set has no path
/// to the boundary.
pub fn solve_spd(m: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
    if !m.is_square() || m.rows() != b.rows() {
        return Err(NumericsError::DimensionMismatch(format!(
            "solve_spd: {}x{} system with {}x{} right-hand side",
            m.rows(),
            m.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = m.rows();
    let scale = m.max_abs();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        // Relative floor: a pivot lost entirely to cancellation counts as zero.
        if !(d > 1e-14 * scale) {
            return Err(NumericsError::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }

    let mut x = b.clone();
    for c in 0..b.cols() {
        // L y = b
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        // L^T x = y
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}
