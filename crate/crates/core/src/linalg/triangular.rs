use super::DenseMatrix;
use crate::error::{Error, Result};

/// Solves `lower · X = rhs` column by column.
pub fn forward_substitution(lower: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    let n = lower.rows();
    assert_eq!(lower.cols(), n, "triangular matrix must be square");
    assert_eq!(rhs.rows(), n, "right-hand side has wrong height");
    if let Some(k) = (0..n).find(|&k| lower[(k, k)] == 0.0) {
        return Err(Error::SingularTriangular(k));
    }
    let mut x = rhs.clone();
    let cols = rhs.cols();
    for i in 0..n {
        let pivot = lower[(i, i)];
        for c in 0..cols {
            let mut acc = x[(i, c)];
            for k in 0..i {
                acc -= lower[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = acc / pivot;
        }
    }
    Ok(x)
}

/// `R⁻¹` for upper-triangular `R`, obtained by forward substitution on
/// `Rᵀ x = e^k` for every `k`.
pub fn upper_inverse(r: &DenseMatrix) -> Result<DenseMatrix> {
    let n = r.rows();
    assert_eq!(r.cols(), n, "triangular matrix must be square");
    let rt = r.transpose();
    if let Some(k) = (0..n).find(|&k| rt[(k, k)] == 0.0) {
        return Err(Error::SingularTriangular(k));
    }
    // x = R^{-T} e^k is row k of R⁻¹; its entries before k vanish.
    let mut inv = DenseMatrix::zeros(n, n);
    let mut x = vec![0.0; n];
    for k in 0..n {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[k] = 1.0 / rt[(k, k)];
        for i in k + 1..n {
            let row = rt.row(i);
            let acc: f64 = row[k..i].iter().zip(&x[k..i]).map(|(a, b)| a * b).sum();
            x[i] = -acc / row[i];
        }
        inv.row_mut(k).copy_from_slice(&x);
    }
    Ok(inv)
}
