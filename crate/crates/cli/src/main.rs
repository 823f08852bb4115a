use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use irregular_wls::bench::{
    emit_heatmap, run_pipeline_once, run_sweep, write_heatmap_csv, write_sweep_csv, CvSet,
    RunStatus,
};
use irregular_wls::domains::{sample_uniform, RngStream};
use irregular_wls::estimator::{estimate_k_n, theoretical_budget};
use irregular_wls::surrogate::{build, AnchorSet, BuildOptions};

mod config;

use config::{Overrides, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Pipeline(#[from] irregular_wls::Error),
    #[error("{0}: status {1}")]
    Failed(&'static str, RunStatus),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wls-bench",
    version,
    about = "Weighted least-squares approximation on irregular domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the pipeline once and print its diagnostics
    Fit(Overrides),
    /// Sweep orders `min_order..=order` and write the CSV table
    Sweep(Overrides),
    /// Fit once and write `log10 |u - u_T|` on a grid over [-1, 1]²
    Heatmap(Overrides),
    /// Print the sample budget for the configured space
    Budget(Overrides),
}

fn output(settings: &Settings) -> Result<Box<dyn Write>, CliError> {
    Ok(match &settings.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn warn_untruncated(settings: &Settings) {
    if settings.experiment.eta().is_infinite() {
        eprintln!(
            "warning: eta is infinite for `{}`, the estimator is not truncated",
            settings.experiment.function
        );
    }
}

fn fit(flags: &Overrides) -> Result<(), CliError> {
    let s = Settings::resolve(flags)?;
    warn_untruncated(&s);
    let e = &s.experiment;
    let domain = e.domain.build()?;
    let cv = CvSet::draw(e, &domain)?;
    let out = run_pipeline_once(e, &domain, &cv, s.order, s.stream)?;
    let r = out.repetition;
    let mut w = output(&s)?;
    writeln!(w, "domain: {}", e.domain.name())?;
    writeln!(w, "function: {}", e.function)?;
    writeln!(w, "index_set: {} order {}", e.family.name(), s.order)?;
    writeln!(w, "algorithm: {}", e.algorithm)?;
    writeln!(w, "generator: {}", e.generator)?;
    writeln!(w, "n: {}", out.n)?;
    writeln!(w, "m: {}", out.m)?;
    writeln!(w, "m_tilde: {}", out.m_tilde)?;
    writeln!(w, "status: {}", r.status)?;
    writeln!(w, "epsilon: {:e}", r.epsilon)?;
    writeln!(w, "singular_value_ratio: {:e}", out.singular_value_ratio)?;
    writeln!(w, "gamma: {}", r.gamma)?;
    writeln!(w, "kappa: {}", r.kappa)?;
    writeln!(w, "cv_error: {:e}", r.cv_error)?;
    if let Some(fit) = &out.fit {
        let d = fit.diagnostics();
        writeln!(w, "gram_deviation: {:e}", d.gram_deviation)?;
        writeln!(w, "singular_gram: {}", d.singular)?;
    }
    w.flush()?;
    match r.status {
        RunStatus::Ok => Ok(()),
        status => Err(CliError::Failed("fit", status)),
    }
}

fn sweep(flags: &Overrides) -> Result<(), CliError> {
    let s = Settings::resolve(flags)?;
    warn_untruncated(&s);
    let records = run_sweep(&s.experiment)?;
    let mut w = output(&s)?;
    write_sweep_csv(&records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn heatmap(flags: &Overrides) -> Result<(), CliError> {
    let s = Settings::resolve(flags)?;
    warn_untruncated(&s);
    let e = &s.experiment;
    let domain = e.domain.build()?;
    if domain.dim() != 2 {
        return Err(irregular_wls::Error::DimensionUnsupported(domain.dim()).into());
    }
    let cv = CvSet::draw(e, &domain)?;
    let out = run_pipeline_once(e, &domain, &cv, s.order, s.stream)?;
    let fit = out
        .fit
        .ok_or(CliError::Failed("heatmap", out.repetition.status))?;
    let map = emit_heatmap(e.function, &fit, &domain, s.resolution)?;
    let mut w = output(&s)?;
    write_heatmap_csv(&map, &mut w)?;
    w.flush()?;
    Ok(())
}

fn budget(flags: &Overrides) -> Result<(), CliError> {
    let s = Settings::resolve(flags)?;
    let e = &s.experiment;
    let set = e.family.build(e.domain.dim(), s.order)?;
    let n = set.len();
    let (k_n, epsilon) = match s.k_n {
        Some(k) => (k, s.epsilon),
        None => {
            // K_n from a fresh basis, probed at 10 m̃ uniform points
            let domain = e.domain.build()?;
            let m_tilde = irregular_wls::bench::m_tilde_rule(e.theta, n).max(n);
            let mut rng = RngStream::new(e.seed, s.stream).rng();
            let anchors = AnchorSet::new(sample_uniform(&domain, m_tilde, &mut rng)?.points);
            let options = BuildOptions {
                epsilon_threshold: f64::INFINITY,
                rank_tolerance: e.rank_tolerance,
                generator: e.generator,
            };
            let basis = build(e.algorithm, &set, anchors, &options)?;
            let k = estimate_k_n(&basis, &domain, 10 * m_tilde, &mut rng)?;
            (k, basis.epsilon())
        }
    };
    let b = theoretical_budget(n, s.alpha, s.delta, s.delta_tilde, epsilon, k_n)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut w = output(&s)?;
    writeln!(w, "n: {}", b.n)?;
    writeln!(w, "alpha: {}", b.alpha)?;
    writeln!(w, "delta: {}", b.delta)?;
    writeln!(w, "delta_tilde: {}", b.delta_tilde)?;
    writeln!(w, "epsilon: {:e}", b.epsilon)?;
    writeln!(w, "xi_delta: {}", b.xi_delta)?;
    writeln!(w, "k_n_estimate: {}", b.k_n_estimate)?;
    writeln!(w, "m_required: {}", b.m_required)?;
    writeln!(w, "m_tilde_required: {}", b.m_tilde_required)?;
    writeln!(w, "tau2: {:e}", b.tau2)?;
    writeln!(w, "tau_inf: {:e}", b.tau_inf)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(f) => fit(f),
        Command::Sweep(f) => sweep(f),
        Command::Heatmap(f) => heatmap(f),
        Command::Budget(f) => budget(f),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
