//! Discretely ε-orthonormal surrogate bases built from monomials (or another
//! generating basis of the same space) on a cloud of uniform anchor points, by
//! direct column scaling or by ADAPT preconditioning.

use crate::domains::PointSet;
use crate::error::{Error, Result};
use crate::index_sets::MultiIndexSet;
use crate::linalg::{
    column_tail_norm, frobenius_orthogonality_error, householder_qr, householder_qr_with,
    numerical_rank_tolerance, singular_values_upper, upper_inverse, ColumnHook, DenseMatrix,
    QrFactors,
};
use crate::MACHINE_EPSILON;

/// Default guardrail on `‖QᵀQ − I‖_F`.
pub const DEFAULT_EPSILON_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Direct,
    Adapt,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Direct => "direct",
            Algorithm::Adapt => "adapt",
        }
    }

    pub fn from_name(name: &str) -> Option<Algorithm> {
        match name {
            "direct" => Some(Algorithm::Direct),
            "adapt" => Some(Algorithm::Adapt),
            _ => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Generating functions `φ_ν` of `V_Λ`. Both span the same space; they differ
/// only in conditioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Generator {
    /// `φ_ν(y) = Π_c y_c^{ν_c}`
    #[default]
    Monomial,
    /// `φ_ν(y) = Π_c P_{ν_c}(y_c)` with Legendre polynomials `P_k(1) = 1`.
    /// Evaluation away from the anchors stays accurate at high degree, where
    /// monomial expansions cancel catastrophically.
    Legendre,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Monomial => "monomial",
            Generator::Legendre => "legendre",
        }
    }

    pub fn from_name(name: &str) -> Option<Generator> {
        match name {
            "monomial" => Some(Generator::Monomial),
            "legendre" => Some(Generator::Legendre),
            _ => None,
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The `m̃` uniform samples the discrete scalar product
/// `⟨u, v⟩_m̃ = (1/m̃) Σ_i u(ỹ^i) v(ỹ^i)` is taken over.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    points: PointSet,
}

impl AnchorSet {
    pub fn new(points: PointSet) -> Self {
        AnchorSet { points }
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// `⟨u, v⟩_m̃` for values given at the anchors.
    pub fn inner_product(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.len());
        assert_eq!(v.len(), self.len());
        u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / self.len() as f64
    }
}

fn check_dims(set: &MultiIndexSet, points: &PointSet) -> Result<()> {
    if set.dim() != points.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: points.dim(),
        });
    }
    Ok(())
}

/// Univariate factors `table[c][e] = φ_e(y_c)` for one point.
struct Factors {
    generator: Generator,
    max_exp: usize,
    table: Vec<f64>,
}

impl Factors {
    fn new(generator: Generator, dim: usize, max_exp: usize) -> Self {
        Factors {
            generator,
            max_exp,
            table: vec![1.0; dim * (max_exp + 1)],
        }
    }

    fn fill(&mut self, y: &[f64]) {
        let stride = self.max_exp + 1;
        for (c, &yc) in y.iter().enumerate() {
            let row = &mut self.table[c * stride..(c + 1) * stride];
            row[0] = 1.0;
            match self.generator {
                Generator::Monomial => {
                    for e in 1..stride {
                        row[e] = row[e - 1] * yc;
                    }
                }
                Generator::Legendre => {
                    if stride > 1 {
                        row[1] = yc;
                    }
                    for e in 2..stride {
                        let k = e as f64;
                        row[e] = ((2.0 * k - 1.0) * yc * row[e - 1] - (k - 1.0) * row[e - 2]) / k;
                    }
                }
            }
        }
    }

    fn product(&self, exponents: &[u32]) -> f64 {
        let stride = self.max_exp + 1;
        exponents
            .iter()
            .enumerate()
            .map(|(c, &e)| self.table[c * stride + e as usize])
            .product()
    }
}

fn generator_rows(set: &MultiIndexSet, generator: Generator, points: &PointSet, out: &mut [f64]) {
    let n = set.len();
    let mut f = Factors::new(generator, set.dim(), set.max_exponent() as usize);
    for (y, row) in points.iter().zip(out.chunks_exact_mut(n.max(1))) {
        f.fill(y);
        for (v, nu) in row.iter_mut().zip(set.iter()) {
            *v = f.product(nu.exponents());
        }
    }
}

/// `Σ_j c_j φ_j(y)` at every point, without materializing `W`.
pub fn evaluate_expansion(
    set: &MultiIndexSet,
    generator: Generator,
    c: &[f64],
    points: &PointSet,
) -> Result<Vec<f64>> {
    check_dims(set, points)?;
    assert_eq!(c.len(), set.len());
    let mut out = vec![0.0; points.len()];
    let fill = |coords: &[f64], out: &mut [f64]| {
        let mut f = Factors::new(generator, set.dim(), set.max_exponent() as usize);
        for (y, v) in coords.chunks_exact(set.dim()).zip(out.iter_mut()) {
            f.fill(y);
            *v = set
                .iter()
                .zip(c)
                .map(|(nu, cj)| cj * f.product(nu.exponents()))
                .sum();
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        const CHUNK: usize = 1024;
        points
            .coords()
            .par_chunks(CHUNK * set.dim())
            .zip(out.par_chunks_mut(CHUNK))
            .for_each(|(coords, out)| fill(coords, out));
    }
    #[cfg(not(feature = "parallel"))]
    fill(points.coords(), &mut out);
    Ok(out)
}

/// `W_jk = φ_k(y^j)` for the chosen generating functions.
pub fn evaluate_generator(
    set: &MultiIndexSet,
    generator: Generator,
    points: &PointSet,
) -> Result<DenseMatrix> {
    check_dims(set, points)?;
    let mut w = DenseMatrix::zeros(points.len(), set.len());
    generator_rows(set, generator, points, w.data_mut());
    Ok(w)
}

/// `W_jk = y^j` to the power `ν_k`, one row per point and one column per
/// multi-index.
pub fn evaluate_monomials(set: &MultiIndexSet, points: &PointSet) -> Result<DenseMatrix> {
    evaluate_generator(set, Generator::Monomial, points)
}

/// `L̃_k = Σ_{j≤k} ℓ̃_jk ρ_j φ_j` together with its values at the anchors.
#[derive(Debug, Clone)]
pub struct SurrogateBasis {
    index_set: MultiIndexSet,
    generator: Generator,
    anchors: AnchorSet,
    rho: Vec<f64>,
    coefficients: DenseMatrix,
    q: DenseMatrix,
    epsilon: f64,
    gamma: f64,
    algorithm: Algorithm,
    max_offdiag_coefficient: f64,
    max_diagonal_deviation: f64,
    numerical_rank: usize,
    singular_value_ratio: f64,
}

impl SurrogateBasis {
    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn anchors(&self) -> &AnchorSet {
        &self.anchors
    }

    /// Number of basis functions `n`.
    pub fn n(&self) -> usize {
        self.index_set.len()
    }

    pub fn m_tilde(&self) -> usize {
        self.anchors.len()
    }

    /// Monomial scalings `ρ_j`.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Upper-triangular `ℓ̃`, entry `(j, k)` multiplying `ρ_j φ_j` in `L̃_k`.
    pub fn coefficients(&self) -> &DenseMatrix {
        &self.coefficients
    }

    /// `Q_jk = L̃_k(ỹ^j) / √m̃`.
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    /// Measured `‖QᵀQ − I‖_F`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `Σ_j ‖L̃_j‖²_m̃ = ‖Q‖²_F`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// `max_{j<k} |ℓ̃_jk|`.
    pub fn max_offdiag_coefficient(&self) -> f64 {
        self.max_offdiag_coefficient
    }

    /// `max_j |R̃_jj − 1|` for ADAPT builds, 0 for direct ones.
    pub fn max_diagonal_deviation(&self) -> f64 {
        self.max_diagonal_deviation
    }

    /// Rank of the column-normalized `W` at the tolerance
    /// `ε_M · max(m̃, n)`. Informational: high-degree monomials are often
    /// numerically dependent while the build itself stays accurate.
    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank
    }

    /// `σ_min / σ_max` of the column-normalized `W`.
    pub fn singular_value_ratio(&self) -> f64 {
        self.singular_value_ratio
    }

    /// A-priori rounding bound `ε_M · m̃ · n^{3/2}`.
    pub fn theoretical_epsilon(&self) -> f64 {
        let n = self.n() as f64;
        MACHINE_EPSILON * self.m_tilde() as f64 * n * n.sqrt()
    }

    /// Values at anchor `j`, i.e. `√m̃ · Q_j·`.
    pub fn anchor_values(&self, j: usize) -> Vec<f64> {
        let s = (self.m_tilde() as f64).sqrt();
        self.q.row(j).iter().map(|v| v * s).collect()
    }

    /// Coefficients of `Σ_k a_k L̃_k` in the raw generating functions `φ_j`.
    pub fn expansion(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.n());
        let mut c = self.coefficients.matvec(a);
        for (cj, rho) in c.iter_mut().zip(&self.rho) {
            *cj *= rho;
        }
        c
    }

    /// Drops the anchor values, keeping what evaluation needs.
    pub fn release_q(&mut self) {
        self.q = DenseMatrix::zeros(0, self.n());
    }
}

/// `L̃_k(y^i)` for arbitrary points, one row per point.
pub fn evaluate_basis(basis: &SurrogateBasis, points: &PointSet) -> Result<DenseMatrix> {
    check_dims(&basis.index_set, points)?;
    let n = basis.n();
    let mut out = DenseMatrix::zeros(points.len(), n);
    generator_rows(&basis.index_set, basis.generator, points, out.data_mut());
    let mut t = vec![0.0; n];
    for i in 0..points.len() {
        let row = out.row_mut(i);
        for ((tj, &phi), &rho) in t.iter_mut().zip(row.iter()).zip(&basis.rho) {
            *tj = rho * phi;
        }
        row.iter_mut().for_each(|v| *v = 0.0);
        for (j, &tj) in t.iter().enumerate() {
            // ℓ̃ is upper triangular: row j only feeds L̃_k for k ≥ j
            let coeffs = &basis.coefficients.row(j)[j..];
            for (v, &l) in row[j..].iter_mut().zip(coeffs) {
                *v += tj * l;
            }
        }
    }
    Ok(out)
}

/// `k̃_n(ỹ^i) = m̃ Σ_k Q_ik²` at every anchor.
pub fn christoffel_row_sums(basis: &SurrogateBasis) -> Result<Vec<f64>> {
    let m = basis.m_tilde() as f64;
    let sums: Vec<f64> = (0..basis.q.rows())
        .map(|i| m * basis.q.row(i).iter().map(|v| v * v).sum::<f64>())
        .collect();
    match sums.iter().position(|&s| s <= 0.0) {
        Some(i) => Err(Error::ZeroRow(i)),
        None => Ok(sums),
    }
}

/// Literal ADAPT: column `j` is scaled to unit length, the prefix
/// `[w̃_1 … w̃_{j-1} | ρ_j w_j]` is refactored from scratch, and `ρ_j` is divided
/// by `|R̃_jj|`. Returns `w̃ = w · diag(ρ)` and `ρ`.
pub fn adapt(w: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let (m, n) = (w.rows(), w.cols());
    if n == 0 || m < n {
        return Err(Error::DimensionMismatch {
            expected: n.max(1),
            actual: m,
        });
    }
    let norms = w.column_norms();
    let mut rho = vec![0.0; n];
    let mut prefix = DenseMatrix::zeros(m, 0);
    for j in 0..n {
        if norms[j] == 0.0 {
            return Err(Error::SingularPivot(j));
        }
        let rho0 = 1.0 / norms[j];
        let col: Vec<f64> = w.column(j).iter().map(|v| v * rho0).collect();
        let z = append_column(&prefix, &col);
        let QrFactors { r, .. } = householder_qr(&z).map_err(|e| match e {
            Error::ExactRankDeficiency(_) => Error::SingularPivot(j),
            other => other,
        })?;
        let rjj = r[(j, j)].abs();
        if !(rjj > 0.0) {
            return Err(Error::SingularPivot(j));
        }
        rho[j] = rho0 / rjj;
        if !rho[j].is_finite() {
            return Err(Error::SingularPivot(j));
        }
        let scaled: Vec<f64> = col.iter().map(|v| v / rjj).collect();
        prefix = append_column(&prefix, &scaled);
    }
    Ok((prefix, rho))
}

fn append_column(a: &DenseMatrix, col: &[f64]) -> DenseMatrix {
    let (m, n) = (a.rows(), a.cols());
    DenseMatrix::from_fn(m, n + 1, |i, j| if j < n { a[(i, j)] } else { col[i] })
}

/// ADAPT folded into a single Householder sweep. Before the reflector of
/// column `j` is built, that column holds `H_{j-1}⋯H_0 w_j`, whose trailing
/// norm is `|R_jj|` of the prefix factorization; rescaling it by the inverse
/// makes the diagonal entry 1.
struct AdaptHook {
    norms: Vec<f64>,
    rho: Vec<f64>,
}

impl ColumnHook for AdaptHook {
    fn before_column(&mut self, j: usize, work: &mut DenseMatrix) -> Result<()> {
        let raw = column_tail_norm(work, j, j);
        let rho0 = 1.0 / self.norms[j];
        let rjj = rho0 * raw;
        if !(rjj > 0.0) || !rjj.is_finite() {
            return Err(Error::SingularPivot(j));
        }
        let rho = rho0 / rjj;
        if !rho.is_finite() {
            return Err(Error::SingularPivot(j));
        }
        self.rho[j] = rho;
        let scale = 1.0 / raw;
        let n = work.cols();
        for row in work.data_mut().chunks_exact_mut(n) {
            row[j] *= scale;
        }
        Ok(())
    }
}

fn adapt_factor(w: DenseMatrix) -> Result<(QrFactors, Vec<f64>)> {
    let norms = w.column_norms();
    if let Some(j) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::SingularPivot(j));
    }
    let n = w.cols();
    let mut hook = AdaptHook {
        norms,
        rho: vec![0.0; n],
    };
    let factors = householder_qr_with(w, &mut hook)?;
    Ok((factors, hook.rho))
}

/// Single-pass ADAPT with the same contract as [`adapt`].
pub fn adapt_incremental(w: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    if w.cols() == 0 || w.rows() < w.cols() {
        return Err(Error::DimensionMismatch {
            expected: w.cols().max(1),
            actual: w.rows(),
        });
    }
    let (_, rho) = adapt_factor(w.clone())?;
    let mut scaled = w.clone();
    scaled.scale_columns(&rho);
    Ok((scaled, rho))
}

/// Thresholds for the two acceptance tests of a basis build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Largest accepted `‖QᵀQ − I‖_F`.
    pub epsilon_threshold: f64,
    /// `W` counts as rank deficient when some singular value of the
    /// column-normalized `W` is at most this multiple of the largest one.
    /// Zero only rejects exact deficiency.
    pub rank_tolerance: f64,
    pub generator: Generator,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            epsilon_threshold: DEFAULT_EPSILON_THRESHOLD,
            rank_tolerance: 0.0,
            generator: Generator::Monomial,
        }
    }
}

impl BuildOptions {
    pub fn with_epsilon_threshold(epsilon_threshold: f64) -> Self {
        BuildOptions {
            epsilon_threshold,
            ..BuildOptions::default()
        }
    }
}

/// Orthogonal basis via column normalization then QR.
pub fn build_direct(
    set: &MultiIndexSet,
    anchors: AnchorSet,
    epsilon_threshold: f64,
) -> Result<SurrogateBasis> {
    build(
        Algorithm::Direct,
        set,
        anchors,
        &BuildOptions::with_epsilon_threshold(epsilon_threshold),
    )
}

/// Orthogonal basis via ADAPT preconditioning; `ℓ̃` has unit diagonal.
pub fn build_adapted(
    set: &MultiIndexSet,
    anchors: AnchorSet,
    epsilon_threshold: f64,
) -> Result<SurrogateBasis> {
    build(
        Algorithm::Adapt,
        set,
        anchors,
        &BuildOptions::with_epsilon_threshold(epsilon_threshold),
    )
}

/// Shared construction. The rank test is run on the R factor of the
/// column-normalized `W`, recovered from whichever factorization was computed.
pub fn build(
    algorithm: Algorithm,
    set: &MultiIndexSet,
    anchors: AnchorSet,
    options: &BuildOptions,
) -> Result<SurrogateBasis> {
    let points = anchors.points();
    check_dims(set, points)?;
    let (m, n) = (points.len(), set.len());
    if n == 0 || m < n {
        return Err(Error::DimensionMismatch {
            expected: n.max(1),
            actual: m,
        });
    }
    let mut w = evaluate_generator(set, options.generator, points)?;
    let norms = w.column_norms();
    if norms.contains(&0.0) {
        return Err(Error::RankDeficient { rank: 0, n });
    }
    let sqrt_m = (m as f64).sqrt();
    let rank_deficient = |e: Error| match e {
        Error::ExactRankDeficiency(j) | Error::SingularPivot(j) => {
            Error::RankDeficient { rank: j, n }
        }
        other => other,
    };

    let (factors, rho_l2) = match algorithm {
        Algorithm::Direct => {
            let inv: Vec<f64> = norms.iter().map(|v| 1.0 / v).collect();
            w.scale_columns(&inv);
            let f = householder_qr_with(w, &mut ()).map_err(rank_deficient)?;
            (f, inv)
        }
        Algorithm::Adapt => adapt_factor(w).map_err(rank_deficient)?,
    };
    let QrFactors { q, mut r } = factors;

    // R of W·diag(1/‖w_j‖) is R̃·diag(1/(‖w_j‖ ρ_j))
    let unit_r = match algorithm {
        Algorithm::Direct => r.clone(),
        Algorithm::Adapt => {
            let s: Vec<f64> = norms
                .iter()
                .zip(&rho_l2)
                .map(|(a, b)| 1.0 / (a * b))
                .collect();
            let mut u = r.clone();
            u.scale_columns(&s);
            u
        }
    };
    let sv = singular_values_upper(&unit_r);
    let sigma_max = sv[0];
    let rank = sv
        .iter()
        .filter(|&&s| s > options.rank_tolerance * sigma_max)
        .count();
    if rank < n {
        return Err(Error::RankDeficient { rank, n });
    }
    let default_tol = numerical_rank_tolerance(m, n) * sigma_max;
    let numerical_rank = sv.iter().filter(|&&s| s > default_tol).count();
    let singular_value_ratio = sv[n - 1] / sigma_max;

    let epsilon = frobenius_orthogonality_error(&q);
    if !(epsilon <= options.epsilon_threshold) {
        return Err(Error::OrthogonalityLost {
            epsilon,
            threshold: options.epsilon_threshold,
        });
    }

    let mut max_diagonal_deviation = 0.0f64;
    if algorithm == Algorithm::Adapt {
        for j in 0..n {
            max_diagonal_deviation = max_diagonal_deviation.max((r[(j, j)] - 1.0).abs());
        }
    }
    let mut coefficients = upper_inverse(&r).map_err(|_| Error::RankDeficient { rank, n })?;
    if algorithm == Algorithm::Adapt {
        for j in 0..n {
            coefficients[(j, j)] = 1.0;
            r[(j, j)] = 1.0;
        }
    }
    let mut max_offdiag = 0.0f64;
    for j in 0..n {
        for k in j + 1..n {
            max_offdiag = max_offdiag.max(coefficients[(j, k)].abs());
        }
    }
    let gamma = crate::linalg::compensated_sum(q.data().iter().map(|v| v * v));
    let rho = rho_l2.iter().map(|v| v * sqrt_m).collect();
    Ok(SurrogateBasis {
        index_set: set.clone(),
        generator: options.generator,
        anchors,
        rho,
        coefficients,
        q,
        epsilon,
        gamma,
        algorithm,
        max_offdiag_coefficient: max_offdiag,
        max_diagonal_deviation,
        numerical_rank,
        singular_value_ratio,
    })
}
