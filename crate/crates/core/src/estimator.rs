//! Weighted least-squares fit on the subsampled anchors, truncation, and the
//! sample budgets that guarantee stability and quasi-optimality.

use rand::Rng;

use crate::domains::{sample_uniform, Domain, PointSet};
use crate::error::{Error, Result};
use crate::index_sets::MultiIndexSet;
use crate::linalg::{symmetric_eigen, DenseMatrix};
use crate::sampling::{DiscreteMeasure, SubsampleMap};
use crate::surrogate::{evaluate_basis, evaluate_expansion, Generator, SurrogateBasis};
use crate::MACHINE_EPSILON;

/// `T_η(z) = sign(z) · min(|z|, η)`.
#[inline]
pub fn truncate(z: f64, eta: f64) -> f64 {
    if z.abs() <= eta {
        z
    } else {
        eta.copysign(z)
    }
}

fn check_subsample(basis: &SurrogateBasis, measure: &DiscreteMeasure, s: &SubsampleMap) {
    assert_eq!(
        measure.len(),
        basis.m_tilde(),
        "measure and basis disagree on m̃"
    );
    assert!(
        s.indices().iter().all(|&i| i < basis.m_tilde()),
        "subsample index out of range"
    );
}

/// `D_ij = √w(ỹ^{S(i)}) · L̃_j(ỹ^{S(i)})`, so that `G̃ = DᵀD / m`.
pub fn assemble_design(
    basis: &SurrogateBasis,
    measure: &DiscreteMeasure,
    s: &SubsampleMap,
) -> DenseMatrix {
    check_subsample(basis, measure, s);
    let n = basis.n();
    let sqrt_m = (basis.m_tilde() as f64).sqrt();
    let weights = measure.weights();
    let q = basis.q();
    let mut d = DenseMatrix::zeros(s.len(), n);
    for (i, &k) in s.indices().iter().enumerate() {
        let f = weights[k].sqrt() * sqrt_m;
        for (dv, &qv) in d.row_mut(i).iter_mut().zip(q.row(k)) {
            *dv = f * qv;
        }
    }
    d
}

/// `b̃_j = (1/m) Σ_i w(ỹ^{S(i)}) L̃_j(ỹ^{S(i)}) u_i` with `u_i` the function value
/// at the `i`-th subsampled anchor.
pub fn assemble_rhs(
    basis: &SurrogateBasis,
    measure: &DiscreteMeasure,
    s: &SubsampleMap,
    u_values: &[f64],
) -> Vec<f64> {
    check_subsample(basis, measure, s);
    assert_eq!(u_values.len(), s.len(), "one value per subsampled anchor");
    let sqrt_m = (basis.m_tilde() as f64).sqrt();
    let weights = measure.weights();
    let q = basis.q();
    let mut b = vec![0.0; basis.n()];
    for (&k, &u) in s.indices().iter().zip(u_values) {
        let f = weights[k] * sqrt_m * u;
        for (bj, &qv) in b.iter_mut().zip(q.row(k)) {
            *bj += f * qv;
        }
    }
    let m = s.len() as f64;
    b.iter_mut().for_each(|v| *v /= m);
    b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    /// `κ(G̃)`, infinite when `G̃` is numerically singular.
    pub kappa: f64,
    /// `‖G̃ − I‖` in spectral norm.
    pub gram_deviation: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Set when the pseudo-inverse dropped part of the spectrum.
    pub singular: bool,
    /// `ε` of the basis the fit was computed in.
    pub epsilon: f64,
    pub m: usize,
    pub m_tilde: usize,
}

/// `u_W = Σ_k a_k L̃_k` and its truncation `u_T = T_η ∘ u_W`.
#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    index_set: MultiIndexSet,
    generator: Generator,
    coefficients: Vec<f64>,
    expansion_coefficients: Vec<f64>,
    eta: f64,
    diagnostics: FitDiagnostics,
}

impl LeastSquaresFit {
    /// Fit with explicit coefficients in the basis.
    pub fn from_coefficients(
        basis: &SurrogateBasis,
        coefficients: Vec<f64>,
        eta: f64,
        diagnostics: FitDiagnostics,
    ) -> Self {
        let expansion_coefficients = basis.expansion(&coefficients);
        LeastSquaresFit {
            index_set: basis.index_set().clone(),
            generator: basis.generator(),
            coefficients,
            expansion_coefficients,
            eta,
            diagnostics,
        }
    }

    /// Coefficients `a` in the surrogate basis.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// The same function in the raw generating functions `φ_j`.
    pub fn expansion_coefficients(&self) -> &[f64] {
        &self.expansion_coefficients
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    /// `u_W` without truncation.
    pub fn evaluate_raw(&self, points: &PointSet) -> Result<Vec<f64>> {
        evaluate_expansion(
            &self.index_set,
            self.generator,
            &self.expansion_coefficients,
            points,
        )
    }
}

/// Solves `G̃ a = b̃` with `G̃ = DᵀD / m` through the eigen-decomposition of `G̃`.
/// Eigenvalues at or below `ε_M · n · λ_max` are dropped, giving the
/// minimal-norm solution, and the fit is flagged as singular.
pub fn solve_fit(basis: &SurrogateBasis, d: &DenseMatrix, b: &[f64], eta: f64) -> LeastSquaresFit {
    let n = basis.n();
    assert_eq!(d.cols(), n, "design matrix width must equal n");
    assert_eq!(b.len(), n, "right-hand side length must equal n");
    assert!(d.rows() >= 1, "empty design matrix");
    let m = d.rows();
    let mut g = d.gram();
    g.scale(1.0 / m as f64);
    let eig = symmetric_eigen(&g);
    let lmin = eig.values[0];
    let lmax = eig.values[n - 1];
    let cut = MACHINE_EPSILON * n as f64 * lmax;
    let v = &eig.vectors;
    let vtb = v.t_matvec(b);
    let mut singular = false;
    let scaled: Vec<f64> = vtb
        .iter()
        .zip(&eig.values)
        .map(|(&c, &l)| {
            if l > cut {
                c / l
            } else {
                singular = true;
                0.0
            }
        })
        .collect();
    let a = v.matvec(&scaled);
    let gram_deviation = eig
        .values
        .iter()
        .fold(0.0f64, |acc, l| acc.max((l - 1.0).abs()));
    let kappa = if lmin <= MACHINE_EPSILON * lmax || lmin <= 0.0 {
        f64::INFINITY
    } else {
        lmax / lmin
    };
    let diagnostics = FitDiagnostics {
        kappa,
        gram_deviation,
        min_eigenvalue: lmin,
        max_eigenvalue: lmax,
        singular,
        epsilon: basis.epsilon(),
        m,
        m_tilde: basis.m_tilde(),
    };
    LeastSquaresFit::from_coefficients(basis, a, eta, diagnostics)
}

/// `u_T(y) = T_η(u_W(y))` at every point.
pub fn evaluate_fit(fit: &LeastSquaresFit, points: &PointSet) -> Result<Vec<f64>> {
    let mut v = fit.evaluate_raw(points)?;
    if fit.eta.is_finite() {
        v.iter_mut().for_each(|z| *z = truncate(*z, fit.eta));
    }
    Ok(v)
}

/// `ξ(δ) = (1+δ) ln(1+δ) − δ`.
pub fn xi(delta: f64) -> f64 {
    (1.0 + delta) * delta.ln_1p() - delta
}

/// Sample sizes and error-bound constants for given confidence parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalBudget {
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub epsilon: f64,
    pub xi_delta: f64,
    pub m_required: u64,
    pub m_tilde_required: u64,
    pub tau2: f64,
    pub tau_inf: f64,
    pub k_n_estimate: f64,
}

/// `m ≥ 4n(1+ε)/δ² · ln(2n/α)` and `m̃ ≥ K_n/ξ(δ̃) · ln(2n/α)`, together with
/// `τ₂(n)` and `τ∞(n)`.
pub fn theoretical_budget(
    n: usize,
    alpha: f64,
    delta: f64,
    delta_tilde: f64,
    epsilon: f64,
    k_n_estimate: f64,
) -> Result<TheoreticalBudget> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param("alpha", format!("{alpha} is not in (0, 1/2)")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::param(
            "epsilon",
            format!("{epsilon} is not in [0, 1)"),
        ));
    }
    if !(delta > 0.0 && delta < 1.0 - epsilon) {
        return Err(Error::param(
            "delta",
            format!("{delta} is not in (0, 1 - epsilon)"),
        ));
    }
    if !(delta_tilde > 0.0 && delta_tilde < 1.0) {
        return Err(Error::param(
            "delta_tilde",
            format!("{delta_tilde} is not in (0, 1)"),
        ));
    }
    let nf = n as f64;
    if !(k_n_estimate >= nf) {
        return Err(Error::param(
            "k_n_estimate",
            format!("{k_n_estimate} is below n = {n}"),
        ));
    }
    let log = (2.0 * nf / alpha).ln();
    let xi_delta = xi(delta_tilde);
    let m_required = (4.0 * nf * (1.0 + epsilon) / (delta * delta) * log).ceil() as u64;
    let m_tilde_required = (k_n_estimate / xi_delta * log).ceil() as u64;
    let lead = (1.0 + epsilon * (nf + 1.0)) / (1.0 - delta_tilde);
    let gap = (1.0 - delta - epsilon).powi(2);
    let tau2 = lead * delta * delta * (1.0 + epsilon) / (4.0 * gap * log);
    let tau_inf = lead * xi_delta * (1.0 + epsilon) * nf / (gap * k_n_estimate * log);
    Ok(TheoreticalBudget {
        n,
        alpha,
        delta,
        delta_tilde,
        epsilon,
        xi_delta,
        m_required: m_required.max(n as u64),
        m_tilde_required: m_tilde_required.max(n as u64),
        tau2,
        tau_inf,
        k_n_estimate,
    })
}

const PROBE_BATCH: usize = 65_536;

/// `max_y Σ_j L̃_j(y)²` over `probe_count` fresh uniform points of `domain`.
pub fn estimate_k_n<R: Rng + ?Sized>(
    basis: &SurrogateBasis,
    domain: &Domain,
    probe_count: usize,
    rng: &mut R,
) -> Result<f64> {
    if probe_count == 0 {
        return Err(Error::param("probe_count", "must be at least 1"));
    }
    if domain.dim() != basis.index_set().dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.index_set().dim(),
            actual: domain.dim(),
        });
    }
    let mut best = 0.0f64;
    let mut left = probe_count;
    while left > 0 {
        let batch = left.min(PROBE_BATCH);
        let probes = sample_uniform(domain, batch, rng)?.points;
        let values = evaluate_basis(basis, &probes)?;
        for i in 0..values.rows() {
            best = best.max(values.row(i).iter().map(|v| v * v).sum());
        }
        left -= batch;
    }
    Ok(best)
}
