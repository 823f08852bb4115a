//! Bounded domains inside the box `B = [-1, 1]^d` and uniform sampling on them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A reproducible random stream: a 64-bit seed plus a stream id.
///
/// Two streams with the same seed and different ids are independent
/// ChaCha8 streams, so Monte Carlo repetitions can run in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        RngStream { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Points in `ℝ^d` stored contiguously, one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(
            dim > 0 && coords.len().is_multiple_of(dim),
            "coordinate count not a multiple of dim"
        );
        PointSet { dim, coords }
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Self {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            assert_eq!(p.len(), dim);
            coords.extend_from_slice(p);
        }
        PointSet { dim, coords }
    }

    pub fn with_capacity(dim: usize, count: usize) -> Self {
        PointSet {
            dim,
            coords: Vec::with_capacity(dim * count),
        }
    }

    pub fn push(&mut self, point: &[f64]) {
        debug_assert_eq!(point.len(), self.dim);
        self.coords.extend_from_slice(point);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Points selected by `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut out = PointSet::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.push(self.point(i));
        }
        out
    }
}

/// Affine placement of the Mandelbrot set inside `B`:
/// `c = (center_re + scale·y₁) + i·(center_im + scale·y₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MandelbrotMap {
    pub max_iter: u32,
    pub scale: f64,
    pub center_re: f64,
    pub center_im: f64,
}

impl Default for MandelbrotMap {
    fn default() -> Self {
        MandelbrotMap {
            max_iter: 1000,
            scale: 1.25,
            center_re: -0.75,
            center_im: 0.0,
        }
    }
}

impl MandelbrotMap {
    /// Escape-time test with bailout radius 2.
    pub fn contains(&self, y: &[f64]) -> bool {
        let cr = self.center_re + self.scale * y[0];
        let ci = self.center_im + self.scale * y[1];
        let (mut zr, mut zi) = (0.0f64, 0.0f64);
        for _ in 0..self.max_iter {
            let zr2 = zr * zr;
            let zi2 = zi * zi;
            if zr2 + zi2 > 4.0 {
                return false;
            }
            zi = 2.0 * zr * zi + ci;
            zr = zr2 - zi2 + cr;
        }
        zr * zr + zi * zi <= 4.0
    }
}

/// Axis-aligned ellipse; the open interior is a hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
}

impl Ellipse {
    pub fn contains_open(&self, y: &[f64]) -> bool {
        let u = (y[0] - self.center[0]) / self.semi_axes[0];
        let v = (y[1] - self.center[1]) / self.semi_axes[1];
        u * u + v * v < 1.0
    }

    pub fn area(&self) -> f64 {
        PI * self.semi_axes[0] * self.semi_axes[1]
    }
}

/// Closed convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon {
    /// Convex hull by gift wrapping.
    pub fn hull(points: &[[f64; 2]]) -> Self {
        assert!(points.len() >= 3, "hull needs at least three points");
        let start = points
            .iter()
            .copied()
            .min_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])))
            .unwrap();
        let mut vertices = vec![start];
        let mut current = start;
        loop {
            let mut candidate = if points[0] == current {
                points[1]
            } else {
                points[0]
            };
            for &p in points {
                if p == current {
                    continue;
                }
                let turn = cross(current, candidate, p);
                let farther = {
                    let dc =
                        (candidate[0] - current[0]).powi(2) + (candidate[1] - current[1]).powi(2);
                    let dp = (p[0] - current[0]).powi(2) + (p[1] - current[1]).powi(2);
                    dp > dc
                };
                // p is clockwise of the candidate edge, or collinear and farther
                if turn < 0.0 || (turn == 0.0 && farther) {
                    candidate = p;
                }
            }
            if candidate == start {
                break;
            }
            vertices.push(candidate);
            current = candidate;
            if vertices.len() > points.len() {
                break;
            }
        }
        ConvexPolygon { vertices }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Closed containment via signed half-planes.
    pub fn contains(&self, y: &[f64]) -> bool {
        let p = [y[0], y[1]];
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= 0.0)
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }
}

/// Convex hull minus elliptic holes.
#[derive(Debug, Clone, PartialEq)]
pub struct SwissCheese {
    pub hull: ConvexPolygon,
    pub holes: Vec<Ellipse>,
}

impl SwissCheese {
    pub fn contains(&self, y: &[f64]) -> bool {
        self.hull.contains(y) && !self.holes.iter().any(|e| e.contains_open(y))
    }
}

type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum Geometry {
    Hypercube,
    SwissCheese(SwissCheese),
    /// `inner ≤ ‖y‖₂ ≤ outer`
    Annulus {
        inner: f64,
        outer: f64,
    },
    Mandelbrot(MandelbrotMap),
    Custom(Predicate),
}

impl fmt::Debug for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Hypercube => write!(f, "Hypercube"),
            Geometry::SwissCheese(s) => f.debug_tuple("SwissCheese").field(s).finish(),
            Geometry::Annulus { inner, outer } => f
                .debug_struct("Annulus")
                .field("inner", inner)
                .field("outer", outer)
                .finish(),
            Geometry::Mandelbrot(m) => f.debug_tuple("Mandelbrot").field(m).finish(),
            Geometry::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A bounded region `Ω ⊆ [-1,1]^d` given by a membership test.
#[derive(Debug, Clone)]
pub struct Domain {
    dim: usize,
    name: String,
    geometry: Geometry,
    volume_fraction: Option<f64>,
}

impl Domain {
    /// Domain from an arbitrary predicate. Points outside `B` are always rejected.
    pub fn custom(
        dim: usize,
        name: impl Into<String>,
        predicate: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Domain {
            dim,
            name: name.into(),
            geometry: Geometry::Custom(Arc::new(predicate)),
            volume_fraction: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// `λ(Ω)/λ(B)` when known analytically.
    pub fn volume_fraction(&self) -> Option<f64> {
        self.volume_fraction
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        debug_assert_eq!(y.len(), self.dim);
        if !y.iter().all(|&c| (-1.0..=1.0).contains(&c)) {
            return false;
        }
        match &self.geometry {
            Geometry::Hypercube => true,
            Geometry::SwissCheese(s) => s.contains(y),
            Geometry::Annulus { inner, outer } => {
                let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                *inner <= r && r <= *outer
            }
            Geometry::Mandelbrot(m) => m.contains(y),
            Geometry::Custom(p) => p(y),
        }
    }
}

pub fn make_hypercube(dim: usize) -> Domain {
    assert!(dim >= 1, "dimension must be positive");
    Domain {
        dim,
        name: "hypercube".into(),
        geometry: Geometry::Hypercube,
        volume_fraction: Some(1.0),
    }
}

/// Vertex set whose convex hull carries the two elliptic holes.
pub const SWISS_CHEESE_VERTICES: [[f64; 2]; 6] = [
    [-0.4, 0.2],
    [-0.7, -0.7],
    [0.5, -0.3],
    [0.8, 0.7],
    [0.0, 0.7],
    [0.0, -0.6],
];

pub fn make_swiss_cheese() -> Domain {
    let hull = ConvexPolygon::hull(&SWISS_CHEESE_VERTICES);
    let holes = vec![
        Ellipse {
            center: [-0.2, -0.3],
            semi_axes: [0.15, 0.15 / 2f64.sqrt()],
        },
        Ellipse {
            center: [0.2, 0.2],
            semi_axes: [0.2, 0.2 / 2f64.sqrt()],
        },
    ];
    // both holes lie inside the hull
    let area = hull.area() - holes.iter().map(Ellipse::area).sum::<f64>();
    Domain {
        dim: 2,
        name: "swiss_cheese".into(),
        geometry: Geometry::SwissCheese(SwissCheese { hull, holes }),
        volume_fraction: Some(area / 4.0),
    }
}

pub fn make_annulus() -> Domain {
    Domain {
        dim: 2,
        name: "annulus".into(),
        geometry: Geometry::Annulus {
            inner: 0.25,
            outer: 1.0,
        },
        volume_fraction: Some(PI * (1.0 - 1.0 / 16.0) / 4.0),
    }
}

pub fn make_mandelbrot(max_iter: u32) -> Result<Domain> {
    make_mandelbrot_with(MandelbrotMap {
        max_iter,
        ..MandelbrotMap::default()
    })
}

pub fn make_mandelbrot_with(map: MandelbrotMap) -> Result<Domain> {
    if map.max_iter < 1 {
        return Err(Error::param("mandelbrot.max_iter", "must be at least 1"));
    }
    if !(map.scale > 0.0 && map.scale.is_finite()) {
        return Err(Error::param("mandelbrot.scale", "must be positive"));
    }
    Ok(Domain {
        dim: 2,
        name: "mandelbrot".into(),
        geometry: Geometry::Mandelbrot(map),
        volume_fraction: None,
    })
}

/// Uniform sample on a domain together with its rejection statistics.
#[derive(Debug, Clone)]
pub struct UniformSample {
    pub points: PointSet,
    pub proposals: u64,
}

impl UniformSample {
    /// Accepted / proposed; estimates `λ(Ω)/λ(B)`.
    pub fn acceptance_rate(&self) -> f64 {
        self.points.len() as f64 / self.proposals as f64
    }
}

/// Draws `count` iid uniform points on `dom` by rejection from `B`.
///
/// Fails with [`Error::AcceptanceTooLow`] when the first `10⁶·d` proposals are
/// all rejected.
pub fn sample_uniform<R: Rng + ?Sized>(
    dom: &Domain,
    count: usize,
    rng: &mut R,
) -> Result<UniformSample> {
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let d = dom.dim();
    let give_up = 1_000_000u64 * d as u64;
    let mut points = PointSet::with_capacity(d, count);
    let mut proposals = 0u64;
    let mut y = vec![0.0; d];
    while points.len() < count {
        for c in y.iter_mut() {
            *c = 2.0 * rng.random::<f64>() - 1.0;
        }
        proposals += 1;
        if dom.contains(&y) {
            points.push(&y);
        } else if points.is_empty() && proposals >= give_up {
            return Err(Error::AcceptanceTooLow {
                domain: dom.name().to_string(),
                proposals,
            });
        }
    }
    Ok(UniformSample { points, proposals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_examples() {
        let cube = make_hypercube(3);
        assert!(cube.contains(&[0.0, 0.0, 0.0]));
        assert!(cube.contains(&[1.0, 1.0, 1.0]));
        assert!(!cube.contains(&[1.0, 1.0, 1.0 + 1e-12]));
        assert_eq!(cube.volume_fraction(), Some(1.0));
    }

    #[test]
    fn swiss_cheese_examples() {
        let cheese = make_swiss_cheese();
        assert!(!cheese.contains(&[-0.2, -0.3]));
        assert!(!cheese.contains(&[0.2, 0.2]));
        assert!(!cheese.contains(&[0.99, 0.99]));
        assert!(cheese.contains(&[-0.6, -0.6]));
        // hull vertices are on the closed boundary
        for v in SWISS_CHEESE_VERTICES {
            assert!(cheese.contains(&v), "vertex {v:?}");
        }
        // a point on the boundary of E1 belongs to Ω
        assert!(cheese.contains(&[-0.2 + 0.15, -0.3]));
        assert!(!cheese.contains(&[-0.2 + 0.1499, -0.3]));
    }

    #[test]
    fn swiss_cheese_hull_uses_all_six_points() {
        let hull = ConvexPolygon::hull(&SWISS_CHEESE_VERTICES);
        assert_eq!(hull.vertices().len(), 6);
        assert!(hull.area() > 0.0);
    }

    #[test]
    fn annulus_examples() {
        let ann = make_annulus();
        assert!(ann.contains(&[0.0, 0.5]));
        assert!(!ann.contains(&[0.1, 0.1]));
        assert!(ann.contains(&[0.25, 0.0]));
        assert!(ann.contains(&[1.0, 0.0]));
        let frac = ann.volume_fraction().unwrap();
        assert!((frac - 0.73631).abs() < 1e-5);
    }

    #[test]
    fn mandelbrot_examples() {
        let m = MandelbrotMap {
            max_iter: 1000,
            scale: 1.0,
            center_re: 0.0,
            center_im: 0.0,
        };
        assert!(m.contains(&[0.0, 0.0]));
        assert!(!m.contains(&[1.0, 0.0]));
        assert!(m.contains(&[-1.0, 0.0]));
        assert!(make_mandelbrot(0).is_err());
        let dom = make_mandelbrot(1000).unwrap();
        // c = -0.75 is in the set (cusp between bulbs); y = (0, 0)
        assert!(dom.contains(&[0.0, 0.0]));
        // c = 1.25 - 0.75 = 0.5 escapes
        assert!(!dom.contains(&[1.0, 0.0]));
    }

    #[test]
    fn sampling_hypercube_accepts_everything() {
        let cube = make_hypercube(2);
        let s = sample_uniform(&cube, 5, &mut RngStream::new(1, 0).rng()).unwrap();
        assert_eq!(s.points.len(), 5);
        assert_eq!(s.acceptance_rate(), 1.0);
    }

    #[test]
    fn sampling_degenerate_domain_fails() {
        let empty = Domain::custom(1, "empty", |_| false);
        let err = sample_uniform(&empty, 1, &mut RngStream::new(1, 0).rng()).unwrap_err();
        assert!(matches!(
            err,
            Error::AcceptanceTooLow {
                proposals: 1_000_000,
                ..
            }
        ));
    }

    #[test]
    fn sampling_is_reproducible_and_streams_differ() {
        let cheese = make_swiss_cheese();
        let a = sample_uniform(&cheese, 100, &mut RngStream::new(9, 3).rng()).unwrap();
        let b = sample_uniform(&cheese, 100, &mut RngStream::new(9, 3).rng()).unwrap();
        let c = sample_uniform(&cheese, 100, &mut RngStream::new(9, 4).rng()).unwrap();
        assert_eq!(a.points, b.points);
        assert_ne!(a.points, c.points);
        assert!(a.points.iter().all(|p| cheese.contains(p)));
    }

    fn within_three_sigma(dom: &Domain, proposals: usize, seed: u64) {
        let expected = dom.volume_fraction().unwrap();
        let mut rng = RngStream::new(seed, 0).rng();
        let mut hits = 0usize;
        for _ in 0..proposals {
            let y = [
                2.0 * rng.random::<f64>() - 1.0,
                2.0 * rng.random::<f64>() - 1.0,
            ];
            if dom.contains(&y) {
                hits += 1;
            }
        }
        let rate = hits as f64 / proposals as f64;
        let sigma = (expected * (1.0 - expected) / proposals as f64).sqrt();
        assert!(
            (rate - expected).abs() <= 3.0 * sigma,
            "{}: rate {rate} expected {expected} sigma {sigma}",
            dom.name()
        );
    }

    #[test]
    fn hit_rates_match_analytic_volume_fractions() {
        within_three_sigma(&make_annulus(), 200_000, 11);
        within_three_sigma(&make_swiss_cheese(), 200_000, 12);
    }

    #[test]
    fn annulus_acceptance_rate() {
        let s = sample_uniform(&make_annulus(), 100_000, &mut RngStream::new(5, 0).rng()).unwrap();
        assert!((s.acceptance_rate() - 0.7363).abs() < 0.01);
    }

    #[test]
    fn swiss_cheese_hole_and_hull_consistency() {
        let cheese = make_swiss_cheese();
        let Geometry::SwissCheese(sc) = cheese.geometry() else {
            unreachable!()
        };
        let mut rng = RngStream::new(77, 0).rng();
        for _ in 0..50_000 {
            let y = [
                2.0 * rng.random::<f64>() - 1.0,
                2.0 * rng.random::<f64>() - 1.0,
            ];
            if sc.holes.iter().any(|e| e.contains_open(&y)) || !sc.hull.contains(&y) {
                assert!(!cheese.contains(&y));
            }
        }
    }
}
