use super::DenseMatrix;

/// Relative threshold below which a pivot column is treated as exactly zero.
const SINGULAR_TOL: f64 = 1e-13;

/// Determinant by LU factorization with partial pivoting.
///
/// Returns exactly `0.0` when every candidate pivot in some column is below
/// `1e-13 * max_abs(m)`. The 0x0 matrix has determinant 1.
///
/// Panics if `m` is not square.
pub fn lu_det(m: &DenseMatrix) -> f64 {
    assert!(m.is_square(), "lu_det needs a square matrix, got {}x{}", m.rows(), m.cols());
    let n = m.rows();
    if n == 0 {
        return 1.0;
    }
    let tol = SINGULAR_TOL * m.max_abs();
    let mut a = m.clone();
    let mut det = 1.0;

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pmax <= tol {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_laplacian_is_singular() {
        let m = DenseMatrix::from_rows(&[vec![3.0, -3.0], vec![-3.0, 3.0]]).unwrap();
        assert_eq!(lu_det(&m), 0.0);
    }

    #[test]
    fn identity_and_empty() {
        assert_eq!(lu_det(&DenseMatrix::identity(4)), 1.0);
        assert_eq!(lu_det(&DenseMatrix::zeros(0, 0)), 1.0);
    }

    #[test]
    fn row_swap_flips_sign() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(lu_det(&m), -1.0);
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!((lu_det(&m) + 2.0).abs() < 1e-15);
    }
}
