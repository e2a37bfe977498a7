use super::{DenseMatrix, NumericsError};

/// Relative pivot threshold for numerical rank: `|R_kk| <= 1e-10 * |R_00|`.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    /// `‖m·x − b‖₂`, evaluated directly on the original system.
    pub residual_norm: f64,
}

/// Least-squares solution of `m·x ≈ b` by Householder QR with column pivoting.
///
/// Fails with `RankDeficient` when the numerical rank is below the column
/// count; `free_columns` holds the (0-based, ascending) columns that the
/// pivoting left beyond the rank.
pub fn lstsq(m: &DenseMatrix, b: &[f64]) -> Result<LeastSquares, NumericsError> {
    let (rows, cols) = (m.rows(), m.cols());
    if b.len() != rows {
        return Err(NumericsError::DimensionMismatch(format!(
            "lstsq: {rows} rows but right-hand side of length {}",
            b.len()
        )));
    }
    let mut a = m.clone();
    let mut qtb = b.to_vec();
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);
    let mut diag = Vec::with_capacity(steps);

    for k in 0..steps {
        // Pivot on the largest remaining column norm (recomputed, no downdating).
        let (p, _) = (k..cols)
            .map(|j| (j, (k..rows).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if p != k {
            for i in 0..rows {
                let t = a[(i, k)];
                a[(i, k)] = a[(i, p)];
                a[(i, p)] = t;
            }
            perm.swap(k, p);
        }

        let norm = (k..rows).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag.push(0.0);
            continue;
        }
        let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            for j in k..cols {
                let s: f64 = v.iter().zip(k..rows).map(|(vi, i)| vi * a[(i, j)]).sum();
                let f = 2.0 * s / vtv;
                for (vi, i) in v.iter().zip(k..rows) {
                    a[(i, j)] -= f * vi;
                }
            }
            let s: f64 = v.iter().zip(k..rows).map(|(vi, i)| vi * qtb[i]).sum();
            let f = 2.0 * s / vtv;
            for (vi, i) in v.iter().zip(k..rows) {
                qtb[i] -= f * vi;
            }
        }
        diag.push(a[(k, k)]);
    }

    let lead = diag.first().map_or(0.0, |d| d.abs());
    let rank = diag
        .iter()
        .position(|d| d.abs() <= RANK_TOL * lead || lead == 0.0)
        .unwrap_or(steps);
    if rank < cols {
        let mut free_columns = perm[rank..].to_vec();
        free_columns.sort_unstable();
        return Err(NumericsError::RankDeficient { rank, free_columns });
    }

    let mut z = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut s = qtb[i];
        for j in i + 1..cols {
            s -= a[(i, j)] * z[j];
        }
        z[i] = s / a[(i, i)];
    }
    let mut x = vec![0.0; cols];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = z[k];
    }
    let residual_norm = m
        .mul_vec(&x)
        .iter()
        .zip(b)
        .map(|(mx, bi)| (mx - bi).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LeastSquares { x, residual_norm })
}
