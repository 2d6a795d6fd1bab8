//! Small dense linear algebra used by the product densities.

/// Determinant of a square row-major matrix by LU factorization with
/// partial pivoting. The input is consumed as scratch space.
pub fn determinant(mut a: Vec<f64>, n: usize) -> f64 {
    assert_eq!(a.len(), n * n, "matrix must be n×n");
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty column");
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            if factor != 0.0 {
                for k in col + 1..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
            }
        }
    }
    det
}
