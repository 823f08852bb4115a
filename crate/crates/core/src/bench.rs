//! Experiment driver: built-in test functions, the full pipeline for one
//! repetition, order sweeps with Monte Carlo cross-validation, heatmaps, and
//! their CSV output.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use crate::domains::{
    make_annulus, make_hypercube, make_mandelbrot_with, make_swiss_cheese, sample_uniform, Domain,
    MandelbrotMap, PointSet, RngStream,
};
use crate::error::{Error, Result};
use crate::estimator::{assemble_design, assemble_rhs, evaluate_fit, solve_fit, LeastSquaresFit};
use crate::index_sets::IndexFamily;
use crate::sampling::{build_sigma_tilde, draw_indices, draw_indices_without_replacement};
use crate::surrogate::{
    build, Algorithm, AnchorSet, BuildOptions, Generator, DEFAULT_EPSILON_THRESHOLD,
};

/// Stream reserved for the cross-validation points; repetitions use `0..r`.
pub const CV_STREAM: u64 = u64::MAX;

/// Heatmap values are clamped to this range.
pub const LOG10_CLAMP: (f64, f64) = (-16.0, 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinFunction {
    /// `1 / (1 + 0.2 y₁ + 0.1 y₂)`
    Cheese,
    /// `cos(2 y₁) sin(y₂)`
    Cossin,
    /// `|y₁|^{-1/2} + |y₂|^{-1/2}`
    Singular,
}

impl BuiltinFunction {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinFunction::Cheese => "cheese",
            BuiltinFunction::Cossin => "cossin",
            BuiltinFunction::Singular => "singular",
        }
    }

    pub fn eval(self, y: &[f64]) -> f64 {
        match self {
            BuiltinFunction::Cheese => 1.0 / (1.0 + 0.2 * y[0] + 0.1 * y[1]),
            BuiltinFunction::Cossin => (2.0 * y[0]).cos() * y[1].sin(),
            BuiltinFunction::Singular => y[0].abs().powf(-0.5) + y[1].abs().powf(-0.5),
        }
    }

    /// Bound `η ≥ ‖u‖_∞` on `B`. The singular function has none, so its
    /// estimator is left untruncated.
    pub fn default_eta(self) -> f64 {
        match self {
            BuiltinFunction::Cheese => 1.0 / 0.7,
            BuiltinFunction::Cossin => 1.0,
            BuiltinFunction::Singular => f64::INFINITY,
        }
    }
}

impl fmt::Display for BuiltinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn builtin_function(name: &str) -> Result<BuiltinFunction> {
    match name {
        "cheese" => Ok(BuiltinFunction::Cheese),
        "cossin" => Ok(BuiltinFunction::Cossin),
        "singular" => Ok(BuiltinFunction::Singular),
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Hypercube { dim: usize },
    SwissCheese,
    Annulus,
    Mandelbrot(MandelbrotMap),
}

impl DomainSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Hypercube { .. } => "hypercube",
            DomainSpec::SwissCheese => "swiss_cheese",
            DomainSpec::Annulus => "annulus",
            DomainSpec::Mandelbrot(_) => "mandelbrot",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Hypercube { dim } => *dim,
            _ => 2,
        }
    }

    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainSpec::Hypercube { dim } => {
                if *dim == 0 {
                    return Err(Error::param("dimension", "must be at least 1"));
                }
                Ok(make_hypercube(*dim))
            }
            DomainSpec::SwissCheese => Ok(make_swiss_cheese()),
            DomainSpec::Annulus => Ok(make_annulus()),
            DomainSpec::Mandelbrot(map) => make_mandelbrot_with(*map),
        }
    }
}

/// Everything one experiment needs. `orders` lists the polynomial orders `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub function: BuiltinFunction,
    pub family: IndexFamily,
    pub orders: Vec<u32>,
    pub algorithm: Algorithm,
    pub generator: Generator,
    /// `m̃ = ⌈θ n max(ln n, 1)⌉`
    pub theta: f64,
    /// `m = ⌈c n max(ln n, 1)⌉`
    pub c: f64,
    pub replacement: bool,
    pub repetitions: usize,
    pub m_cv: usize,
    pub seed: u64,
    /// `None` selects the function's default.
    pub eta: Option<f64>,
    pub epsilon_threshold: f64,
    pub rank_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: DomainSpec::SwissCheese,
            function: BuiltinFunction::Cheese,
            family: IndexFamily::TotalDegree,
            orders: (1..=10).collect(),
            algorithm: Algorithm::Direct,
            generator: Generator::Monomial,
            theta: 200.0,
            c: 4.0,
            replacement: true,
            repetitions: 10,
            m_cv: 100_000,
            seed: 0,
            eta: None,
            epsilon_threshold: DEFAULT_EPSILON_THRESHOLD,
            rank_tolerance: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 1.0) {
            return Err(Error::param("theta", format!("{} is below 1", self.theta)));
        }
        if !(self.c >= 1.0) {
            return Err(Error::param("c", format!("{} is below 1", self.c)));
        }
        if self.repetitions == 0 {
            return Err(Error::param("repetitions", "must be at least 1"));
        }
        if self.m_cv == 0 {
            return Err(Error::param("m_cv", "must be at least 1"));
        }
        if self.orders.is_empty() {
            return Err(Error::param("order", "the order range is empty"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return Err(Error::param("eta", format!("{eta} is not positive")));
            }
        }
        if !(self.epsilon_threshold >= 0.0) {
            return Err(Error::param("epsilon_threshold", "must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.rank_tolerance) {
            return Err(Error::param("rank_tolerance", "must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| self.function.default_eta())
    }

    fn build_options(&self) -> BuildOptions {
        BuildOptions {
            epsilon_threshold: self.epsilon_threshold,
            rank_tolerance: self.rank_tolerance,
            generator: self.generator,
        }
    }
}

fn log_factor(n: usize) -> f64 {
    (n as f64).ln().max(1.0)
}

/// `⌈c · n · max(ln n, 1)⌉`
pub fn m_rule(c: f64, n: usize) -> usize {
    (c * n as f64 * log_factor(n)).ceil() as usize
}

/// `⌈θ · n · max(ln n, 1)⌉`
pub fn m_tilde_rule(theta: f64, n: usize) -> usize {
    (theta * n as f64 * log_factor(n)).ceil() as usize
}

/// Fixed uniform points with the target function evaluated on them.
#[derive(Debug, Clone)]
pub struct CvSet {
    points: PointSet,
    values: Vec<f64>,
}

impl CvSet {
    pub fn new(points: PointSet, function: BuiltinFunction) -> Self {
        Self::from_fn(points, |y| function.eval(y))
    }

    pub fn from_fn(points: PointSet, u: impl Fn(&[f64]) -> f64) -> Self {
        let values = points.iter().map(u).collect();
        CvSet { points, values }
    }

    /// The experiment's CV set, drawn once from its own stream.
    pub fn draw(config: &ExperimentConfig, domain: &Domain) -> Result<Self> {
        let mut rng = RngStream::new(config.seed, CV_STREAM).rng();
        let points = sample_uniform(domain, config.m_cv, &mut rng)?.points;
        Ok(CvSet::new(points, config.function))
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `‖u‖_CV`, the error of the zero estimator.
    pub fn norm(&self) -> f64 {
        rms(self.values.iter().copied())
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    (sum / count as f64).sqrt()
}

/// `‖u − u_T‖_CV`: root mean square of the error over the CV points.
pub fn cv_error(cv: &CvSet, fit: &LeastSquaresFit) -> Result<f64> {
    let est = evaluate_fit(fit, &cv.points)?;
    Ok(rms(cv.values.iter().zip(est).map(|(u, v)| u - v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Ok,
    RankDeficient,
    OrthogonalityLost,
    /// No anchors could be drawn from the domain.
    SamplingFailed,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::RankDeficient => "rank_deficient",
            RunStatus::OrthogonalityLost => "orthogonality_lost",
            RunStatus::SamplingFailed => "sampling_failed",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One repetition. Diagnostics that were never computed are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Repetition {
    pub cv_error: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub status: RunStatus,
}

/// A repetition together with the fit it produced, if any.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub repetition: Repetition,
    pub fit: Option<LeastSquaresFit>,
    /// `σ_min / σ_max` of the column-normalized monomial matrix.
    pub singular_value_ratio: f64,
    pub max_offdiag_coefficient: f64,
    pub n: usize,
    pub m: usize,
    pub m_tilde: usize,
}

fn failed(cv: &CvSet, status: RunStatus, epsilon: f64) -> Repetition {
    Repetition {
        cv_error: cv.norm(),
        kappa: f64::NAN,
        epsilon,
        gamma: f64::NAN,
        status,
    }
}

/// One pass of the whole algorithm for order `k` on RNG stream `stream`:
/// anchors, basis with both tests, optimal measure, subsample, weighted fit,
/// truncation and CV error. A failed test yields the zero estimator.
pub fn run_pipeline_once(
    config: &ExperimentConfig,
    domain: &Domain,
    cv: &CvSet,
    k: u32,
    stream: u64,
) -> Result<PipelineOutcome> {
    run_pipeline_with(config, domain, cv, k, stream, |y| config.function.eval(y))
}

/// [`run_pipeline_once`] for an arbitrary target `u`; `config.function`
/// only supplies the default η.
pub fn run_pipeline_with(
    config: &ExperimentConfig,
    domain: &Domain,
    cv: &CvSet,
    k: u32,
    stream: u64,
    u: impl Fn(&[f64]) -> f64,
) -> Result<PipelineOutcome> {
    let set = config.family.build(domain.dim(), k)?;
    let n = set.len();
    let m = m_rule(config.c, n);
    let m_tilde = m_tilde_rule(config.theta, n).max(n);
    let mut outcome = PipelineOutcome {
        repetition: failed(cv, RunStatus::SamplingFailed, f64::NAN),
        fit: None,
        singular_value_ratio: f64::NAN,
        max_offdiag_coefficient: f64::NAN,
        n,
        m,
        m_tilde,
    };
    let mut rng = RngStream::new(config.seed, stream).rng();
    let anchors = match sample_uniform(domain, m_tilde, &mut rng) {
        Ok(s) => AnchorSet::new(s.points),
        Err(Error::AcceptanceTooLow { .. }) => return Ok(outcome),
        Err(e) => return Err(e),
    };
    let basis = match build(config.algorithm, &set, anchors, &config.build_options()) {
        Ok(b) => b,
        Err(Error::RankDeficient { .. }) => {
            outcome.repetition = failed(cv, RunStatus::RankDeficient, f64::NAN);
            return Ok(outcome);
        }
        Err(Error::OrthogonalityLost { epsilon, .. }) => {
            outcome.repetition = failed(cv, RunStatus::OrthogonalityLost, epsilon);
            return Ok(outcome);
        }
        Err(e) => return Err(e),
    };
    outcome.singular_value_ratio = basis.singular_value_ratio();
    outcome.max_offdiag_coefficient = basis.max_offdiag_coefficient();
    let measure = build_sigma_tilde(&basis)?;
    let s = if config.replacement {
        draw_indices(&measure, m, &mut rng)
    } else {
        draw_indices_without_replacement(&measure, m.min(m_tilde), &mut rng)?
    };
    // u is evaluated once per distinct anchor
    let points = basis.anchors().points();
    let mut cache: HashMap<usize, f64> = HashMap::with_capacity(s.len());
    let u_values: Vec<f64> = s
        .indices()
        .iter()
        .map(|&i| *cache.entry(i).or_insert_with(|| u(points.point(i))))
        .collect();
    let d = assemble_design(&basis, &measure, &s);
    let b = assemble_rhs(&basis, &measure, &s, &u_values);
    let fit = solve_fit(&basis, &d, &b, config.eta());
    drop(basis);
    let diag = *fit.diagnostics();
    outcome.repetition = Repetition {
        cv_error: cv_error(cv, &fit)?,
        kappa: diag.kappa,
        epsilon: diag.epsilon,
        gamma: measure.gamma(),
        status: RunStatus::Ok,
    };
    outcome.fit = Some(fit);
    Ok(outcome)
}

/// All repetitions for one order `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub k: u32,
    pub n: usize,
    pub m: usize,
    pub m_tilde: usize,
    pub repetitions: Vec<Repetition>,
}

impl RunRecord {
    /// Monte Carlo mean of the CV error over the repetitions.
    pub fn mean_cv_error(&self) -> f64 {
        self.repetitions.iter().map(|r| r.cv_error).sum::<f64>() / self.repetitions.len() as f64
    }

    fn ok_kappas(&self) -> impl Iterator<Item = f64> + '_ {
        self.repetitions
            .iter()
            .filter(|r| r.status == RunStatus::Ok)
            .map(|r| r.kappa)
    }

    /// NaN when no repetition succeeded.
    pub fn min_kappa(&self) -> f64 {
        self.ok_kappas().fold(f64::NAN, f64::min)
    }

    pub fn max_kappa(&self) -> f64 {
        self.ok_kappas().fold(f64::NAN, f64::max)
    }

    pub fn max_epsilon(&self) -> f64 {
        self.repetitions
            .iter()
            .map(|r| r.epsilon)
            .fold(f64::NAN, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.repetitions
            .iter()
            .filter(|r| r.status != RunStatus::Ok)
            .count()
    }
}

/// Runs every repetition of order `k`, concurrently when the `parallel`
/// feature is on. Results are ordered by repetition index either way.
pub fn run_order(
    config: &ExperimentConfig,
    domain: &Domain,
    cv: &CvSet,
    k: u32,
) -> Result<RunRecord> {
    let reps = config.repetitions as u64;
    let run = |stream: u64| run_pipeline_once(config, domain, cv, k, stream);
    #[cfg(feature = "parallel")]
    let outcomes: Vec<PipelineOutcome> = {
        use rayon::prelude::*;
        (0..reps).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<PipelineOutcome> = (0..reps).map(run).collect::<Result<_>>()?;
    let first = &outcomes[0];
    Ok(RunRecord {
        k,
        n: first.n,
        m: first.m,
        m_tilde: first.m_tilde,
        repetitions: outcomes.iter().map(|o| o.repetition).collect(),
    })
}

/// One record per configured order, sharing a single CV set.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let domain = config.domain.build()?;
    let cv = CvSet::draw(config, &domain)?;
    config
        .orders
        .iter()
        .map(|&k| run_order(config, &domain, &cv, k))
        .collect()
}

/// Shortest decimal that round-trips, in exponent form when plain notation
/// would be long.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub const SWEEP_HEADER: &str =
    "k,n,m,m_tilde,mean_cv_error,min_kappa,max_kappa,max_epsilon,failures";

pub fn write_sweep_csv<W: Write>(records: &[RunRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            r.n,
            r.m,
            r.m_tilde,
            format_float(r.mean_cv_error()),
            format_float(r.min_kappa()),
            format_float(r.max_kappa()),
            format_float(r.max_epsilon()),
            r.failures()
        )?;
    }
    Ok(())
}

/// Pointwise errors on a regular grid over `B = [-1, 1]²`.
#[derive(Debug, Clone)]
pub struct Heatmap {
    pub resolution: usize,
    /// Row-major by `y₂` then `y₁`: `(y₁, y₂, |u − u_T|)`, error `None` outside Ω.
    pub cells: Vec<(f64, f64, Option<f64>)>,
}

impl Heatmap {
    /// Largest error and where it occurs.
    pub fn max_error(&self) -> Option<(f64, f64, f64)> {
        self.cells
            .iter()
            .filter_map(|&(a, b, e)| e.map(|e| (a, b, e)))
            .fold(None, |best, c| match best {
                Some(b) if b.2 >= c.2 => Some(b),
                _ => Some(c),
            })
    }

    pub fn inside_count(&self) -> usize {
        self.cells.iter().filter(|c| c.2.is_some()).count()
    }
}

/// Grid coordinate `i` of `resolution` equispaced values on `[-1, 1]`.
pub fn grid_coordinate(i: usize, resolution: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (resolution - 1) as f64
}

pub fn emit_heatmap(
    function: BuiltinFunction,
    fit: &LeastSquaresFit,
    domain: &Domain,
    resolution: usize,
) -> Result<Heatmap> {
    if domain.dim() != 2 {
        return Err(Error::DimensionUnsupported(domain.dim()));
    }
    if resolution < 2 {
        return Err(Error::param("resolution", "must be at least 2"));
    }
    let mut inside = PointSet::with_capacity(2, resolution * resolution);
    let mut cells = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let y2 = grid_coordinate(j, resolution);
        for i in 0..resolution {
            let y1 = grid_coordinate(i, resolution);
            let y = [y1, y2];
            if domain.contains(&y) {
                inside.push(&y);
                cells.push((y1, y2, Some(0.0)));
            } else {
                cells.push((y1, y2, None));
            }
        }
    }
    let est = evaluate_fit(fit, &inside)?;
    let mut values = inside
        .iter()
        .zip(est)
        .map(|(y, v)| (function.eval(y) - v).abs());
    for cell in cells.iter_mut().filter(|c| c.2.is_some()) {
        cell.2 = values.next();
    }
    Ok(Heatmap { resolution, cells })
}

/// `y1,y2,log10_error`, clamped; empty field outside Ω.
pub fn write_heatmap_csv<W: Write>(map: &Heatmap, mut out: W) -> io::Result<()> {
    writeln!(out, "y1,y2,log10_error")?;
    for &(y1, y2, e) in &map.cells {
        match e {
            Some(e) => {
                let v = e.log10().clamp(LOG10_CLAMP.0, LOG10_CLAMP.1);
                // NaN errors come from non-finite fits; report them as the ceiling
                let v = if v.is_nan() { LOG10_CLAMP.1 } else { v };
                writeln!(
                    out,
                    "{},{},{}",
                    format_float(y1),
                    format_float(y2),
                    format_float(v)
                )?
            }
            None => writeln!(out, "{},{},", format_float(y1), format_float(y2))?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::total_degree_set;
    use crate::surrogate::{build_direct, evaluate_basis};
    use approx::assert_relative_eq;

    #[test]
    fn builtin_values() {
        assert_eq!(builtin_function("cheese").unwrap().eval(&[0.0, 0.0]), 1.0);
        assert_eq!(builtin_function("cossin").unwrap().eval(&[0.0, 0.0]), 0.0);
        assert_eq!(builtin_function("singular").unwrap().eval(&[1.0, 1.0]), 2.0);
        assert_eq!(
            builtin_function("runge").unwrap_err(),
            Error::UnknownFunction("runge".into())
        );
    }

    #[test]
    fn cheese_eta_bounds_the_function() {
        let eta = BuiltinFunction::Cheese.default_eta();
        for i in 0..=20 {
            for j in 0..=20 {
                let y = [grid_coordinate(i, 21), grid_coordinate(j, 21)];
                assert!(BuiltinFunction::Cheese.eval(&y) <= eta + 1e-15);
            }
        }
    }

    #[test]
    fn budget_rules() {
        assert_eq!(m_rule(4.0, 1), 4);
        assert_eq!(m_tilde_rule(200.0, 1), 200);
        assert_eq!(m_rule(4.0, 10), (40.0 * 10f64.ln()).ceil() as usize);
    }

    fn constant_fit(value: f64, eta: f64) -> LeastSquaresFit {
        let set = total_degree_set(2, 0).unwrap();
        let anchors = AnchorSet::new(PointSet::new(2, vec![0.0, 0.0, 0.5, 0.5]));
        let basis = build_direct(&set, anchors, DEFAULT_EPSILON_THRESHOLD).unwrap();
        let d = crate::linalg::DenseMatrix::new(1, 1, vec![1.0]);
        solve_fit(&basis, &d, &[value], eta)
    }

    #[test]
    fn cv_error_examples() {
        let pts = PointSet::new(2, vec![0.1, 0.2, -0.5, 0.3, 0.9, -0.9]);
        let one = CvSet {
            points: pts.clone(),
            values: vec![1.0; 3],
        };
        assert_relative_eq!(cv_error(&one, &constant_fit(1.0, 2.0)).unwrap(), 0.0);
        assert_relative_eq!(cv_error(&one, &constant_fit(0.0, 2.0)).unwrap(), 1.0);
        assert_relative_eq!(one.norm(), 1.0);
        let zero = CvSet {
            points: pts,
            values: vec![0.0; 3],
        };
        assert_relative_eq!(
            cv_error(&zero, &constant_fit(-0.4, 2.0)).unwrap(),
            0.4,
            epsilon = 1e-15
        );
    }

    #[test]
    fn heatmap_shapes() {
        let fit = constant_fit(1.0, 2.0);
        let cube = make_hypercube(2);
        let map = emit_heatmap(BuiltinFunction::Cheese, &fit, &cube, 3).unwrap();
        assert_eq!(map.cells.len(), 9);
        assert_eq!(map.inside_count(), 9);
        // exact at the origin only
        let centre = map.cells[4];
        assert_eq!((centre.0, centre.1), (0.0, 0.0));
        assert!(centre.2.unwrap() < 1e-15);
        assert!(map.cells[0].2.unwrap() > 0.1);

        let annulus = make_annulus();
        let map = emit_heatmap(BuiltinFunction::Cheese, &fit, &annulus, 41).unwrap();
        for &(y1, y2, e) in &map.cells {
            assert_eq!(e.is_some(), annulus.contains(&[y1, y2]));
        }
        let mut csv = Vec::new();
        write_heatmap_csv(&map, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 41 * 41);
        for (row, &(_, _, e)) in rows.iter().zip(&map.cells) {
            assert_eq!(row.ends_with(','), e.is_none());
        }
        assert!(matches!(
            emit_heatmap(BuiltinFunction::Cheese, &fit, &make_hypercube(3), 4),
            Err(Error::DimensionUnsupported(3))
        ));
    }

    #[test]
    fn exact_fit_clamps_to_floor() {
        let fit = constant_fit(0.0, 1.0);
        let map = Heatmap {
            resolution: 2,
            cells: vec![(0.0, 0.0, Some(0.0)), (1.0, 0.0, None)],
        };
        let mut csv = Vec::new();
        write_heatmap_csv(&map, &mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "y1,y2,log10_error\n0,0,-16\n1,0,\n"
        );
        assert_eq!(fit.coefficients(), &[0.0]);
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.0, 1.0, -2.5, 1e-20, 3.0e17, 0.1 + 0.2, 123456.789] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(1e-20), "1e-20");
        assert_eq!(format_float(0.25), "0.25");
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            domain: DomainSpec::Hypercube { dim: 2 },
            function: BuiltinFunction::Cheese,
            orders: vec![0, 2],
            theta: 20.0,
            repetitions: 3,
            m_cv: 500,
            seed: 5,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn constant_recovery_on_hypercube() {
        let config = small_config();
        let domain = config.domain.build().unwrap();
        let pts = sample_uniform(&domain, 200, &mut RngStream::new(1, 1).rng())
            .unwrap()
            .points;
        // a constant target lies in V_n for k = 0
        let cv = CvSet {
            values: vec![0.7; pts.len()],
            points: pts,
        };
        let set = total_degree_set(2, 0).unwrap();
        let anchors = AnchorSet::new(cv.points.clone());
        let basis = build_direct(&set, anchors, DEFAULT_EPSILON_THRESHOLD).unwrap();
        let l = evaluate_basis(&basis, &cv.points).unwrap();
        assert!(l.data().iter().all(|v| (v - 1.0).abs() < 1e-14));
        let d = crate::linalg::DenseMatrix::new(2, 1, vec![1.0, 1.0]);
        let fit = solve_fit(&basis, &d, &[0.7], 1.0);
        assert!(cv_error(&cv, &fit).unwrap() <= 1e-14);
    }

    #[test]
    fn polynomial_reproduction() {
        let config = ExperimentConfig {
            eta: Some(f64::INFINITY),
            ..small_config()
        };
        let domain = config.domain.build().unwrap();
        let p =
            |y: &[f64]| 0.3 - y[0] + 2.0 * y[0] * y[1] - 0.5 * y[1].powi(3) + y[0].powi(2) * y[1];
        let pts = sample_uniform(&domain, 1000, &mut RngStream::new(9, 0).rng())
            .unwrap()
            .points;
        let cv = CvSet::from_fn(pts, p);
        let out = run_pipeline_with(&config, &domain, &cv, 3, 0, p).unwrap();
        assert_eq!(out.n, 10);
        assert!(
            out.repetition.cv_error <= 1e-8,
            "{}",
            out.repetition.cv_error
        );
    }

    #[test]
    fn pipeline_statuses() {
        let mut config = small_config();
        let domain = config.domain.build().unwrap();
        let cv = CvSet::draw(&config, &domain).unwrap();
        let ok = run_pipeline_once(&config, &domain, &cv, 2, 0).unwrap();
        assert_eq!(ok.repetition.status, RunStatus::Ok);
        assert!(ok.repetition.kappa <= 10.0);
        config.epsilon_threshold = 0.0;
        let lost = run_pipeline_once(&config, &domain, &cv, 2, 0).unwrap();
        assert_eq!(lost.repetition.status, RunStatus::OrthogonalityLost);
        assert_eq!(lost.repetition.cv_error, cv.norm());
        assert!(lost.fit.is_none());

        let empty = ExperimentConfig {
            domain: DomainSpec::Mandelbrot(MandelbrotMap {
                center_re: 10.0,
                scale: 0.1,
                ..MandelbrotMap::default()
            }),
            ..small_config()
        };
        let cube_cv = cv.clone();
        let dom = empty.domain.build().unwrap();
        let out = run_pipeline_once(&empty, &dom, &cube_cv, 1, 0).unwrap();
        assert_eq!(out.repetition.status, RunStatus::SamplingFailed);
        assert_eq!(out.repetition.cv_error, cube_cv.norm());
    }

    #[test]
    fn sweep_is_deterministic() {
        let config = small_config();
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_sweep_csv(&a, &mut ca).unwrap();
        write_sweep_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        let text = String::from_utf8(ca).unwrap();
        assert!(text.starts_with(SWEEP_HEADER));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(a[0].n, 1);
        assert_eq!(a[0].m, 4);
    }

    #[test]
    fn invalid_configs() {
        let bad = ExperimentConfig {
            theta: 0.5,
            ..ExperimentConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::ParameterOutOfRange { name: "theta", .. })
        ));
        let bad = ExperimentConfig {
            orders: vec![],
            ..ExperimentConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
