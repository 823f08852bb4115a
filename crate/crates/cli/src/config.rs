//! TOML experiment files and their merge with command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use irregular_wls::bench::{builtin_function, DomainSpec, ExperimentConfig};
use irregular_wls::domains::MandelbrotMap;
use irregular_wls::index_sets::IndexFamily;
use irregular_wls::surrogate::{Algorithm, Generator, DEFAULT_EPSILON_THRESHOLD};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub index_sets: IndexSetsSection,
    #[serde(default)]
    pub domains: DomainsSection,
    #[serde(default)]
    pub surrogate: SurrogateSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub bench: BenchSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSetsSection {
    pub index_set: Option<String>,
    pub order: Option<u32>,
    pub min_order: Option<u32>,
    pub dimension: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainsSection {
    pub domain: Option<String>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    #[serde(default)]
    pub mandelbrot: MandelbrotSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MandelbrotSection {
    pub max_iter: Option<u32>,
    pub scale: Option<f64>,
    pub center_re: Option<f64>,
    pub center_im: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateSection {
    pub algorithm: Option<String>,
    pub generator: Option<String>,
    pub epsilon_threshold: Option<f64>,
    pub rank_tolerance: Option<f64>,
    pub m_tilde_rule: Option<String>,
    pub theta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub m_rule: Option<String>,
    pub c: Option<f64>,
    pub replacement: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EtaValue {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub eta: Option<EtaValue>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub delta_tilde: Option<f64>,
    pub k_n: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub function: Option<String>,
    pub repetitions: Option<usize>,
    pub m_cv: Option<usize>,
    pub resolution: Option<usize>,
    pub output: Option<PathBuf>,
}

/// Flags shared by every subcommand. Each one overrides the matching key of
/// the config file.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// TOML experiment file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// hypercube, swiss_cheese, annulus or mandelbrot
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub dimension: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub stream: Option<u64>,
    /// total_degree or hyperbolic_cross
    #[arg(long)]
    pub index_set: Option<String>,
    /// Polynomial order k; the last order of a sweep
    #[arg(long)]
    pub order: Option<u32>,
    /// First order of a sweep
    #[arg(long)]
    pub min_order: Option<u32>,
    /// direct or adapt
    #[arg(long)]
    pub algorithm: Option<String>,
    /// monomial or legendre
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub epsilon_threshold: Option<f64>,
    #[arg(long)]
    pub rank_tolerance: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub replacement: Option<bool>,
    /// Truncation level, a positive number or `inf`
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub delta_tilde: Option<f64>,
    /// Skip the basis build and use this value for K_n
    #[arg(long)]
    pub k_n: Option<f64>,
    /// ε used with --k-n
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// cheese, cossin or singular
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub m_cv: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub experiment: ExperimentConfig,
    pub order: u32,
    pub stream: u64,
    pub alpha: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub k_n: Option<f64>,
    pub epsilon: f64,
    pub resolution: usize,
    pub output: Option<PathBuf>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_eta(v: &EtaValue) -> Result<f64, CliError> {
    let eta = match v {
        EtaValue::Int(i) => *i as f64,
        EtaValue::Float(f) => *f,
        EtaValue::Text(s) if s == "inf" => f64::INFINITY,
        EtaValue::Text(s) => s.parse().map_err(|_| {
            CliError::Config(format!(
                "eta must be a positive number or \"inf\", got `{s}`"
            ))
        })?,
    };
    if eta.is_nan() || eta <= 0.0 {
        return Err(CliError::Config(format!("eta must be positive, got {eta}")));
    }
    Ok(eta)
}

fn check_rule(key: &str, value: Option<&String>, expected: &str) -> Result<(), CliError> {
    match value {
        Some(v) if v != expected => Err(CliError::Config(format!(
            "{key} `{v}` is not supported, only `{expected}`"
        ))),
        _ => Ok(()),
    }
}

impl Settings {
    pub fn resolve(flags: &Overrides) -> Result<Settings, CliError> {
        let file = match &flags.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        Self::merge(file, flags)
    }

    pub fn merge(file: FileConfig, flags: &Overrides) -> Result<Settings, CliError> {
        let defaults = ExperimentConfig::default();
        let FileConfig {
            index_sets,
            domains,
            surrogate,
            sampling,
            estimator,
            bench,
        } = file;
        check_rule(
            "m_tilde_rule",
            surrogate.m_tilde_rule.as_ref(),
            "theta_n_log_n",
        )?;
        check_rule("m_rule", sampling.m_rule.as_ref(), "c_n_log_n")?;

        let domain_name = flags
            .domain
            .clone()
            .or(domains.domain)
            .unwrap_or_else(|| "swiss_cheese".into());
        let dimension = flags.dimension.or(index_sets.dimension);
        let mut map = MandelbrotMap::default();
        map.max_iter = flags
            .max_iter
            .or(domains.mandelbrot.max_iter)
            .unwrap_or(map.max_iter);
        map.scale = domains.mandelbrot.scale.unwrap_or(map.scale);
        map.center_re = domains.mandelbrot.center_re.unwrap_or(map.center_re);
        map.center_im = domains.mandelbrot.center_im.unwrap_or(map.center_im);
        let domain = match domain_name.as_str() {
            "hypercube" => DomainSpec::Hypercube {
                dim: dimension.unwrap_or(2),
            },
            "swiss_cheese" => DomainSpec::SwissCheese,
            "annulus" => DomainSpec::Annulus,
            "mandelbrot" => DomainSpec::Mandelbrot(map),
            other => return Err(CliError::Config(format!("unknown domain `{other}`"))),
        };
        if let Some(d) = dimension {
            if d != domain.dim() {
                return Err(CliError::Config(format!(
                    "dimension {d} does not match domain `{domain_name}` of dimension {}",
                    domain.dim()
                )));
            }
        }

        let family_name = flags
            .index_set
            .clone()
            .or(index_sets.index_set)
            .unwrap_or_else(|| "total_degree".into());
        let family = IndexFamily::from_name(&family_name)
            .ok_or_else(|| CliError::Config(format!("unknown index set `{family_name}`")))?;
        let order = flags.order.or(index_sets.order).unwrap_or(10);
        let min_order = flags.min_order.or(index_sets.min_order).unwrap_or(1);
        if min_order > order {
            return Err(CliError::Config(format!(
                "min_order {min_order} exceeds order {order}"
            )));
        }

        let algorithm_name = flags
            .algorithm
            .clone()
            .or(surrogate.algorithm)
            .unwrap_or_else(|| "direct".into());
        let algorithm = Algorithm::from_name(&algorithm_name)
            .ok_or_else(|| CliError::Config(format!("unknown algorithm `{algorithm_name}`")))?;

        let generator_name = flags
            .generator
            .clone()
            .or(surrogate.generator)
            .unwrap_or_else(|| "monomial".into());
        let generator = Generator::from_name(&generator_name)
            .ok_or_else(|| CliError::Config(format!("unknown generator `{generator_name}`")))?;

        let function_name = flags
            .function
            .clone()
            .or(bench.function)
            .unwrap_or_else(|| "cheese".into());
        let function =
            builtin_function(&function_name).map_err(|e| CliError::Config(e.to_string()))?;

        let eta = match (&flags.eta, &estimator.eta) {
            (Some(s), _) => Some(parse_eta(&EtaValue::Text(s.clone()))?),
            (None, Some(v)) => Some(parse_eta(v)?),
            (None, None) => None,
        };

        let experiment = ExperimentConfig {
            domain,
            function,
            family,
            orders: (min_order..=order).collect(),
            algorithm,
            generator,
            theta: flags.theta.or(surrogate.theta).unwrap_or(defaults.theta),
            c: flags.c.or(sampling.c).unwrap_or(defaults.c),
            replacement: flags
                .replacement
                .or(sampling.replacement)
                .unwrap_or(defaults.replacement),
            repetitions: flags
                .repetitions
                .or(bench.repetitions)
                .unwrap_or(defaults.repetitions),
            m_cv: flags.m_cv.or(bench.m_cv).unwrap_or(defaults.m_cv),
            seed: flags.seed.or(domains.seed).unwrap_or(defaults.seed),
            eta,
            epsilon_threshold: flags
                .epsilon_threshold
                .or(surrogate.epsilon_threshold)
                .unwrap_or(DEFAULT_EPSILON_THRESHOLD),
            rank_tolerance: flags
                .rank_tolerance
                .or(surrogate.rank_tolerance)
                .unwrap_or(defaults.rank_tolerance),
        };
        experiment
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let resolution = flags.resolution.or(bench.resolution).unwrap_or(400);
        if resolution < 2 {
            return Err(CliError::Config("resolution must be at least 2".into()));
        }
        Ok(Settings {
            experiment,
            order,
            stream: flags.stream.or(domains.stream).unwrap_or(0),
            alpha: flags.alpha.or(estimator.alpha).unwrap_or(0.05),
            delta: flags.delta.or(estimator.delta).unwrap_or(0.5),
            delta_tilde: flags.delta_tilde.or(estimator.delta_tilde).unwrap_or(0.5),
            k_n: flags.k_n.or(estimator.k_n),
            epsilon: flags.epsilon.or(estimator.epsilon).unwrap_or(0.0),
            resolution,
            output: flags.output.clone().or(bench.output),
        })
    }
}
