use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Exact rank over the rationals by fraction-free (Bareiss) elimination.
///
/// Rows may be ragged only in the sense of being empty; all non-empty rows
/// must share one length.
pub fn integer_rank(m: &[Vec<i64>]) -> usize {
    let rows = m.len();
    let cols = m.iter().map(Vec::len).max().unwrap_or(0);
    if rows == 0 || cols == 0 {
        return 0;
    }
    assert!(
        m.iter().all(|r| r.len() == cols),
        "integer_rank needs rows of equal length"
    );
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();

    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for i in rank + 1..rows {
            let factor = a[i][col].clone();
            for j in col + 1..cols {
                // Exact division: the Sylvester identity guarantees divisibility.
                let v = (&pivot * &a[i][j] - &factor * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_ranks() {
        assert_eq!(integer_rank(&[]), 0);
        assert_eq!(integer_rank(&[vec![0, 0], vec![0, 0]]), 0);
        let id: Vec<Vec<i64>> = (0..5)
            .map(|i| (0..5).map(|j| i64::from(i == j)).collect())
            .collect();
        assert_eq!(integer_rank(&id), 5);
    }

    #[test]
    fn dependent_rows() {
        let m = vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 2, 1], vec![1, 0, -1]];
        assert_eq!(integer_rank(&m), 2);
    }

    #[test]
    fn pivot_column_skip() {
        let m = vec![vec![0, 1, 1], vec![0, 1, 1], vec![0, 0, 3]];
        assert_eq!(integer_rank(&m), 2);
    }

    #[test]
    fn large_entries_stay_exact() {
        // Near-parallel rows that floating point would call dependent.
        let big = 1 << 52;
        let m = vec![vec![big, big + 1], vec![big + 1, big + 2]];
        assert_eq!(integer_rank(&m), 2);
    }
}
