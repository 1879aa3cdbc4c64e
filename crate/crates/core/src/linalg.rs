//! Tiny dense linear algebra for the fixed-size systems used here.

/// Solves `a · x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is row-major `n × n`, `b` is `n × m` (m right-hand sides). Returns
/// `None` when the matrix is numerically singular.
pub fn solve(a: &mut [f64], b: &mut [f64], n: usize, m: usize) -> Option<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * m);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            for k in 0..m {
                b.swap(col * m + k, pivot * m + k);
            }
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            for k in 0..m {
                b[row * m + k] -= f * b[col * m + k];
            }
        }
    }
    for col in (0..n).rev() {
        let d = a[col * n + col];
        for k in 0..m {
            let mut s = b[col * m + k];
            for j in col + 1..n {
                s -= a[col * n + j] * b[j * m + k];
            }
            b[col * m + k] = s / d;
        }
    }
    Some(())
}
