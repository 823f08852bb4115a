//! Browser bindings: domain masks, uniform samples, and a single-run fit
//! with its pointwise error grid.

use irregular_wls::bench::{
    builtin_function, emit_heatmap, grid_coordinate, run_pipeline_once, CvSet, DomainSpec,
    ExperimentConfig,
};
use irregular_wls::domains::{sample_uniform, Domain, MandelbrotMap, RngStream};
use irregular_wls::index_sets::IndexFamily;
use irregular_wls::surrogate::Algorithm;
use irregular_wls::{Error, Result};
use wasm_bindgen::prelude::*;

/// Points for the in-browser CV error; kept small for responsiveness.
const DEMO_M_CV: usize = 5000;

fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::ParameterOutOfRange {
        name,
        reason: reason.into(),
    }
}

pub fn domain_spec(name: &str) -> Result<DomainSpec> {
    match name {
        "hypercube" => Ok(DomainSpec::Hypercube { dim: 2 }),
        "swiss_cheese" => Ok(DomainSpec::SwissCheese),
        "annulus" => Ok(DomainSpec::Annulus),
        "mandelbrot" => Ok(DomainSpec::Mandelbrot(MandelbrotMap::default())),
        other => Err(param("domain", format!("unknown domain `{other}`"))),
    }
}

fn domain(name: &str) -> Result<Domain> {
    domain_spec(name)?.build()
}

/// Row-major membership grid, rows by `y₂` ascending; 1 inside Ω.
pub fn mask(name: &str, resolution: usize) -> Result<Vec<u8>> {
    if resolution < 2 {
        return Err(param("resolution", "must be at least 2"));
    }
    let dom = domain(name)?;
    let mut out = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let y2 = grid_coordinate(j, resolution);
        for i in 0..resolution {
            let y1 = grid_coordinate(i, resolution);
            out.push(u8::from(dom.contains(&[y1, y2])));
        }
    }
    Ok(out)
}

/// `count` uniform points in Ω, interleaved `y₁, y₂`.
pub fn samples(name: &str, count: usize, seed: u64) -> Result<Vec<f64>> {
    let dom = domain(name)?;
    let mut rng = RngStream::new(seed, 0).rng();
    Ok(sample_uniform(&dom, count, &mut rng)?
        .points
        .coords()
        .to_vec())
}

/// Outcome of one pipeline run as shown on the page.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct FitReport {
    status: String,
    n: usize,
    m: usize,
    m_tilde: usize,
    kappa: f64,
    epsilon: f64,
    cv_error: f64,
    max_error: f64,
    errors: Vec<f64>,
}

#[wasm_bindgen]
impl FitReport {
    #[wasm_bindgen(getter)]
    pub fn status(&self) -> String {
        self.status.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }
    #[wasm_bindgen(getter)]
    pub fn m(&self) -> usize {
        self.m
    }
    #[wasm_bindgen(getter)]
    pub fn m_tilde(&self) -> usize {
        self.m_tilde
    }
    #[wasm_bindgen(getter)]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    #[wasm_bindgen(getter)]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    #[wasm_bindgen(getter)]
    pub fn cv_error(&self) -> f64 {
        self.cv_error
    }
    #[wasm_bindgen(getter)]
    pub fn max_error(&self) -> f64 {
        self.max_error
    }
    /// `log10 |u − u_T|` per grid cell in the layout of [`mask`], NaN
    /// outside Ω or when the run failed.
    #[wasm_bindgen(getter)]
    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn fit(
    domain_name: &str,
    function: &str,
    family: &str,
    order: u32,
    theta: f64,
    algorithm: &str,
    seed: u64,
    resolution: usize,
) -> Result<FitReport> {
    let config = ExperimentConfig {
        domain: domain_spec(domain_name)?,
        function: builtin_function(function)?,
        family: IndexFamily::from_name(family)
            .ok_or_else(|| param("family", format!("unknown index set `{family}`")))?,
        orders: vec![order],
        algorithm: Algorithm::from_name(algorithm)
            .ok_or_else(|| param("algorithm", format!("unknown algorithm `{algorithm}`")))?,
        theta,
        repetitions: 1,
        m_cv: DEMO_M_CV,
        seed,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let dom = config.domain.build()?;
    let cv = CvSet::draw(&config, &dom)?;
    let out = run_pipeline_once(&config, &dom, &cv, order, 0)?;
    let (errors, max_error) = match &out.fit {
        Some(fit) => {
            let map = emit_heatmap(config.function, fit, &dom, resolution)?;
            let grid = map
                .cells
                .iter()
                .map(|c| c.2.map_or(f64::NAN, |e| e.log10().clamp(-16.0, 3.0)))
                .collect();
            (grid, map.max_error().map_or(f64::NAN, |m| m.2))
        }
        None => (vec![f64::NAN; resolution * resolution], f64::NAN),
    };
    let r = out.repetition;
    Ok(FitReport {
        status: r.status.name().to_string(),
        n: out.n,
        m: out.m,
        m_tilde: out.m_tilde,
        kappa: r.kappa,
        epsilon: r.epsilon,
        cv_error: r.cv_error,
        max_error,
        errors,
    })
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn domain_mask(domain: &str, resolution: usize) -> std::result::Result<Vec<u8>, JsError> {
    mask(domain, resolution).map_err(js)
}

#[wasm_bindgen]
pub fn sample_points(
    domain: &str,
    count: usize,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsError> {
    samples(domain, count, seed).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn fit_error_map(
    domain: &str,
    function: &str,
    family: &str,
    order: u32,
    theta: f64,
    algorithm: &str,
    seed: u64,
    resolution: usize,
) -> std::result::Result<FitReport, JsError> {
    fit(
        domain, function, family, order, theta, algorithm, seed, resolution,
    )
    .map_err(js)
}
