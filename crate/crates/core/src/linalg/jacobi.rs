use super::DenseMatrix;
use crate::MACHINE_EPSILON;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi eigen-solver for symmetric matrices.
pub fn symmetric_eigen(a: &DenseMatrix) -> SymmetricEigen {
    let n = a.rows();
    assert_eq!(a.cols(), n, "matrix must be square");
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // negligible relative to the diagonal
                if apq.abs() <= 0.5 * MACHINE_EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                {
                    let data = m.data_mut();
                    for k in 0..n {
                        let mpk = data[p * n + k];
                        let mqk = data[q * n + k];
                        data[p * n + k] = c * mpk - s * mqk;
                        data[q * n + k] = s * mpk + c * mqk;
                    }
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors }
}

/// Singular values of a square matrix by one-sided (Hestenes) Jacobi,
/// in descending order.
pub fn singular_values_upper(r: &DenseMatrix) -> Vec<f64> {
    let n = r.cols();
    let rows = r.rows();
    // column-major copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| r.column(j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut a = 0.0;
                    let mut b = 0.0;
                    let mut g = 0.0;
                    for i in 0..rows {
                        a += cp[i] * cp[i];
                        b += cq[i] * cq[i];
                        g += cp[i] * cq[i];
                    }
                    (a, b, g)
                };
                if gamma == 0.0 || gamma.abs() <= MACHINE_EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                let (cp, cq) = (&mut lo[p], &mut hi[0]);
                for i in 0..rows {
                    let x = cp[i];
                    let y = cq[i];
                    cp[i] = c * x - s * y;
                    cq[i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `σ_max / σ_min` of a symmetric matrix; `+∞` when `σ_min ≤ ε_M σ_max`.
pub fn spectral_condition_number(g: &DenseMatrix) -> f64 {
    condition_from_eigenvalues(&symmetric_eigen(g).values)
}

pub(crate) fn condition_from_eigenvalues(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if max == 0.0 || min <= MACHINE_EPSILON * max {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = 2.0 * rng.random::<f64>() - 1.0;
                e[(i, j)] = v;
                e[(j, i)] = v;
            }
        }
        e
    }

    #[test]
    fn condition_number_examples() {
        assert_eq!(spectral_condition_number(&DenseMatrix::identity(5)), 1.0);
        assert_relative_eq!(
            spectral_condition_number(&DenseMatrix::diagonal(&[4.0, 1.0])),
            4.0
        );
        let singular = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(spectral_condition_number(&singular), f64::INFINITY);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = random_symmetric(12, 4);
        let eig = symmetric_eigen(&a);
        let recon = eig
            .vectors
            .matmul(&DenseMatrix::diagonal(&eig.values))
            .matmul(&eig.vectors.transpose());
        assert!(recon.sub(&a).max_abs() < 1e-13);
        let vtv = eig.vectors.gram();
        assert!(vtv.sub(&DenseMatrix::identity(12)).max_abs() < 1e-13);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn perturbed_identity_condition_is_monotone() {
        let e = random_symmetric(8, 21);
        let mut last = 1.0;
        for delta in [1e-6, 1e-4, 1e-3, 1e-2, 5e-2] {
            let mut a = DenseMatrix::identity(8);
            for i in 0..8 {
                for j in 0..8 {
                    a[(i, j)] += delta * e[(i, j)];
                }
            }
            let kappa = spectral_condition_number(&a);
            assert!(kappa >= last, "delta {delta}: {kappa} < {last}");
            last = kappa;
        }
        let mut tiny = DenseMatrix::identity(8);
        for i in 0..8 {
            for j in 0..8 {
                tiny[(i, j)] += 1e-12 * e[(i, j)];
            }
        }
        assert!((spectral_condition_number(&tiny) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singular_values_of_diagonal_and_graded() {
        let sv = singular_values_upper(&DenseMatrix::diagonal(&[3.0, -2.0, 0.5]));
        assert_eq!(sv, vec![3.0, 2.0, 0.5]);
        // strongly graded upper triangle keeps tiny singular values
        let r = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1e-14]]);
        let sv = singular_values_upper(&r);
        assert_relative_eq!(sv[0] * sv[1], 1e-14, max_relative = 1e-10);
    }
}
