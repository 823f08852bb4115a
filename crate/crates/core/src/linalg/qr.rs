use super::{singular_values_upper, DenseMatrix};
use crate::error::{Error, Result};
use crate::MACHINE_EPSILON;

/// Thin QR factors with the positive-diagonal convention.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    /// `m × n` with orthonormal columns.
    pub q: DenseMatrix,
    /// `n × n` upper triangular, strictly positive diagonal.
    pub r: DenseMatrix,
}

/// Called before the reflector for column `j` is built. Column `j` of the
/// workspace then holds `H_{j-1}⋯H_0 w_j` and may be rescaled in full.
pub(crate) trait ColumnHook {
    fn before_column(&mut self, j: usize, work: &mut DenseMatrix) -> Result<()>;
}

impl ColumnHook for () {
    fn before_column(&mut self, _: usize, _: &mut DenseMatrix) -> Result<()> {
        Ok(())
    }
}

/// Householder vectors below the diagonal (implicit leading 1), R strictly
/// above, and the R diagonal kept separately.
struct Reflectors {
    work: DenseMatrix,
    tau: Vec<f64>,
    diag: Vec<f64>,
}

/// Rows per partial sum in the long reductions below. Summing blocks
/// separately keeps rounding growth near `√(m / BLOCK) + √BLOCK` instead of
/// `√m` for tall matrices.
const BLOCK: usize = 512;

fn combine_scaled(acc: (f64, f64), part: (f64, f64)) -> (f64, f64) {
    let ((sa, qa), (sb, qb)) = (acc, part);
    if sb == 0.0 {
        acc
    } else if sa < sb {
        (sb, qb + qa * (sa / sb) * (sa / sb))
    } else {
        (sa, qa + qb * (sb / sa) * (sb / sa))
    }
}

pub(crate) fn column_tail_norm(work: &DenseMatrix, j: usize, from: usize) -> f64 {
    let n = work.cols();
    let data = work.data();
    let mut total = (0.0f64, 1.0f64);
    let mut start = from;
    while start < work.rows() {
        let end = (start + BLOCK).min(work.rows());
        let mut scale = 0.0f64;
        let mut ssq = 1.0f64;
        for i in start..end {
            let v = data[i * n + j];
            if v != 0.0 {
                let a = v.abs();
                if scale < a {
                    ssq = 1.0 + ssq * (scale / a) * (scale / a);
                    scale = a;
                } else {
                    ssq += (a / scale) * (a / scale);
                }
            }
        }
        total = combine_scaled(total, (scale, ssq));
        start = end;
    }
    total.0 * total.1.sqrt()
}

/// `s += Σ_{i ≥ from} v_i · A[i, col+1..]` with `v_i = A[i, col]`, summed
/// blockwise.
fn accumulate_reflector_product(
    data: &[f64],
    n: usize,
    col: usize,
    from: usize,
    m: usize,
    s: &mut [f64],
    partial: &mut [f64],
) {
    let mut start = from;
    while start < m {
        let end = (start + BLOCK).min(m);
        partial.fill(0.0);
        for i in start..end {
            let row = &data[i * n + col..(i + 1) * n];
            let vi = row[0];
            if vi == 0.0 {
                continue;
            }
            for (acc, &a) in partial.iter_mut().zip(&row[1..]) {
                *acc += vi * a;
            }
        }
        for (acc, &p) in s.iter_mut().zip(partial.iter()) {
            *acc += p;
        }
        start = end;
    }
}

fn factor<H: ColumnHook>(
    mut work: DenseMatrix,
    hook: &mut H,
    allow_zero: bool,
) -> Result<Reflectors> {
    let (m, n) = (work.rows(), work.cols());
    let mut tau = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut partial = vec![0.0; n];
    for j in 0..n {
        hook.before_column(j, &mut work)?;
        let alpha = work[(j, j)];
        let xnorm = column_tail_norm(&work, j, j + 1);
        if xnorm == 0.0 {
            if alpha == 0.0 && !allow_zero {
                return Err(Error::ExactRankDeficiency(j));
            }
            // H = I
            diag[j] = alpha;
            continue;
        }
        let beta = -alpha.signum() * alpha.hypot(xnorm);
        tau[j] = (beta - alpha) / beta;
        let inv = 1.0 / (alpha - beta);
        let data = work.data_mut();
        for i in j + 1..m {
            data[i * n + j] *= inv;
        }
        diag[j] = beta;
        if j + 1 == n {
            continue;
        }
        // s = vᵀ A[j.., j+1..]
        let width = n - j - 1;
        let s = &mut s[..width];
        s.copy_from_slice(&data[j * n + j + 1..(j + 1) * n]);
        accumulate_reflector_product(data, n, j, j + 1, m, s, &mut partial[..width]);
        let t = tau[j];
        for acc in s.iter_mut() {
            *acc *= t;
        }
        for (a, &sv) in data[j * n + j + 1..(j + 1) * n].iter_mut().zip(s.iter()) {
            *a -= sv;
        }
        for i in j + 1..m {
            let row = &mut data[i * n + j..(i + 1) * n];
            let vi = row[0];
            if vi == 0.0 {
                continue;
            }
            for (a, &sv) in row[1..].iter_mut().zip(s.iter()) {
                *a -= vi * sv;
            }
        }
    }
    Ok(Reflectors { work, tau, diag })
}

impl Reflectors {
    fn r(&self) -> DenseMatrix {
        let n = self.work.cols();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => self.work[(i, j)],
            std::cmp::Ordering::Equal => self.diag[i],
            std::cmp::Ordering::Greater => 0.0,
        })
    }

    /// Overwrites the reflector storage with the thin Q.
    fn into_factors(self) -> QrFactors {
        let mut r = self.r();
        let Reflectors { mut work, tau, .. } = self;
        let (m, n) = (work.rows(), work.cols());
        let mut s = vec![0.0; n];
        let mut partial = vec![0.0; n];
        let data = work.data_mut();
        for i in (0..n).rev() {
            let t = tau[i];
            if i + 1 < n {
                // apply H_i to A[i.., i+1..], with v_i = 1
                let width = n - i - 1;
                let s = &mut s[..width];
                s.copy_from_slice(&data[i * n + i + 1..(i + 1) * n]);
                accumulate_reflector_product(data, n, i, i + 1, m, s, &mut partial[..width]);
                for acc in s.iter_mut() {
                    *acc *= t;
                }
                for (a, &sv) in data[i * n + i + 1..(i + 1) * n].iter_mut().zip(s.iter()) {
                    *a -= sv;
                }
                for row_idx in i + 1..m {
                    let row = &mut data[row_idx * n + i..(row_idx + 1) * n];
                    let vi = row[0];
                    if vi == 0.0 {
                        continue;
                    }
                    for (a, &sv) in row[1..].iter_mut().zip(s.iter()) {
                        *a -= vi * sv;
                    }
                }
            }
            for row_idx in i + 1..m {
                data[row_idx * n + i] *= -t;
            }
            data[i * n + i] = 1.0 - t;
            for row_idx in 0..i {
                data[row_idx * n + i] = 0.0;
            }
        }
        // positive diagonal: flip row j of R and column j of Q together
        let flips: Vec<bool> = (0..n).map(|j| r[(j, j)] < 0.0).collect();
        if flips.iter().any(|&f| f) {
            for (j, _) in flips.iter().enumerate().filter(|(_, &f)| f) {
                for v in r.row_mut(j) {
                    *v = -*v;
                }
            }
            for row in work.data_mut().chunks_exact_mut(n) {
                for (v, &f) in row.iter_mut().zip(&flips) {
                    if f {
                        *v = -*v;
                    }
                }
            }
        }
        QrFactors { q: work, r }
    }
}

fn check_shape(w: &DenseMatrix) -> Result<()> {
    if w.cols() == 0 || w.rows() < w.cols() {
        return Err(Error::DimensionMismatch {
            expected: w.cols().max(1),
            actual: w.rows(),
        });
    }
    Ok(())
}

/// Thin Householder QR of `w` (`rows ≥ cols ≥ 1`).
pub fn householder_qr(w: &DenseMatrix) -> Result<QrFactors> {
    householder_qr_in_place(w.clone())
}

/// As [`householder_qr`], reusing the storage of `w` for Q.
pub fn householder_qr_in_place(w: DenseMatrix) -> Result<QrFactors> {
    householder_qr_with(w, &mut ())
}

pub(crate) fn householder_qr_with<H: ColumnHook>(
    w: DenseMatrix,
    hook: &mut H,
) -> Result<QrFactors> {
    check_shape(&w)?;
    Ok(factor(w, hook, false)?.into_factors())
}

/// Default rank tolerance `ε_M · max(rows, cols)`.
pub fn numerical_rank_tolerance(rows: usize, cols: usize) -> f64 {
    MACHINE_EPSILON * rows.max(cols) as f64
}

/// Number of singular values above `tol · σ_max`.
///
/// Singular values come from a one-sided Jacobi sweep on the R factor of an
/// unpivoted Householder QR, so exactly zero columns are tolerated.
pub fn numerical_rank(w: &DenseMatrix, tol: f64) -> usize {
    if w.cols() == 0 || w.rows() == 0 {
        return 0;
    }
    let r = if w.rows() >= w.cols() {
        factor(w.clone(), &mut (), true)
            .expect("zero pivots allowed")
            .r()
    } else {
        let wt = w.transpose();
        factor(wt, &mut (), true).expect("zero pivots allowed").r()
    };
    let sv = singular_values_upper(&r);
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// `‖qᵀq − I‖_F`.
pub fn frobenius_orthogonality_error(q: &DenseMatrix) -> f64 {
    let g = q.gram_blocked(BLOCK);
    let n = g.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = g[(i, j)] - if i == j { 1.0 } else { 0.0 };
            sum += d * d;
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| 2.0 * rng.random::<f64>() - 1.0)
    }

    #[test]
    fn single_column() {
        let w = DenseMatrix::from_rows(&[vec![3.0], vec![4.0]]);
        let f = householder_qr(&w).unwrap();
        assert_relative_eq!(f.q[(0, 0)], 0.6, epsilon = 1e-15);
        assert_relative_eq!(f.q[(1, 0)], 0.8, epsilon = 1e-15);
        assert_relative_eq!(f.r[(0, 0)], 5.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_input() {
        let f = householder_qr(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(f.q, DenseMatrix::identity(2));
        assert_eq!(f.r, DenseMatrix::identity(2));
    }

    #[test]
    fn three_by_two_hand_case() {
        let w = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        let f = householder_qr(&w).unwrap();
        let r_expected = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let q_expected = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(f.r.sub(&r_expected).max_abs() < 1e-15);
        assert!(f.q.sub(&q_expected).max_abs() < 1e-15);
        assert!(f.q.matmul(&f.r).sub(&w).max_abs() < 1e-15);
        assert!(frobenius_orthogonality_error(&f.q) < 1e-15);
    }

    #[test]
    fn exact_zero_column_is_reported() {
        let w = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(
            householder_qr(&w).unwrap_err(),
            Error::ExactRankDeficiency(1)
        );
        let wide = DenseMatrix::zeros(1, 2);
        assert!(householder_qr(&wide).is_err());
    }

    #[test]
    fn orthogonality_error_examples() {
        let q = DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]);
        assert_relative_eq!(frobenius_orthogonality_error(&q), 1.0);
        assert_eq!(
            frobenius_orthogonality_error(&DenseMatrix::identity(4)),
            0.0
        );
    }

    #[test]
    fn tall_random_matrix_is_orthonormal_to_1e_12() {
        let w = random_matrix(10_000, 50, 3);
        let f = householder_qr(&w).unwrap();
        assert!(frobenius_orthogonality_error(&f.q) <= 1e-12);
    }

    #[test]
    fn numerical_rank_examples() {
        let tol = 1e-10;
        assert_eq!(numerical_rank(&DenseMatrix::identity(3), tol), 3);
        let dup = DenseMatrix::from_rows(&[
            vec![1.0, 1.0, 0.3],
            vec![2.0, 2.0, -1.0],
            vec![0.5, 0.5, 4.0],
            vec![-1.0, -1.0, 0.0],
        ]);
        assert_eq!(numerical_rank(&dup, tol), 2);
        let zero_col = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert_eq!(numerical_rank(&zero_col, tol), 1);
        // Vandermonde of distinct nodes is nonsingular
        let nodes: [f64; 5] = [-0.9, -0.4, 0.1, 0.5, 0.8];
        let v = DenseMatrix::from_fn(5, 5, |i, j| nodes[i].powi(j as i32));
        assert_eq!(numerical_rank(&v, numerical_rank_tolerance(5, 5)), 5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn reconstruction_and_sign_convention(rows in 1usize..60, extra in 0usize..40, seed in any::<u64>()) {
                let cols = rows.clamp(1, 20);
                let rows = cols + extra;
                let w = random_matrix(rows, cols, seed);
                let f = householder_qr(&w).unwrap();
                let bound = 10.0 * MACHINE_EPSILON * ((rows * cols) as f64).sqrt() * w.frobenius_norm();
                prop_assert!(f.q.matmul(&f.r).sub(&w).frobenius_norm() <= bound);
                prop_assert!(f.r.is_upper_triangular());
                for j in 0..cols {
                    prop_assert!(f.r[(j, j)] > 0.0);
                }
                let orth = frobenius_orthogonality_error(&f.q);
                prop_assert!(orth <= 10.0 * MACHINE_EPSILON * rows as f64 * (cols as f64).powf(1.5));
            }
        }
    }
}
