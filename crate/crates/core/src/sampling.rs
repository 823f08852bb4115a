//! The discrete optimal measure `σ̃_n` on the anchors and iid draws from it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::surrogate::{christoffel_row_sums, SurrogateBasis};

/// Vose alias table: a draw picks a column uniformly, then keeps it with
/// probability `prob[i]` or jumps to `alias[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// `p` must be nonnegative with positive sum.
    pub fn new(p: &[f64]) -> Result<Self> {
        let len = p.len();
        let total: f64 = p.iter().sum();
        if len == 0 || !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let mut scaled: Vec<f64> = p.iter().map(|v| v * len as f64 / total).collect();
        let mut prob = vec![0.0; len];
        let mut alias: Vec<u32> = (0..len as u32).collect();
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, &v) in scaled.iter().enumerate() {
            if v < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to round-off
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

/// `σ̃_n = w⁻¹ μ̃` with `w = γ / k̃_n`.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    probabilities: Vec<f64>,
    weights: Vec<f64>,
    gamma: f64,
    table: AliasTable,
}

impl DiscreteMeasure {
    /// Measure proportional to `masses`, with `γ = Σ masses / len`.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total = compensated_sum(masses.iter().copied());
        if masses.is_empty() || !(total > 0.0) || masses.iter().any(|&v| v < 0.0) {
            return Err(Error::ZeroMass);
        }
        let m = masses.len() as f64;
        let mut p: Vec<f64> = masses.iter().map(|v| v / total).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        let weights = p
            .iter()
            .map(|&pi| {
                if pi > 0.0 {
                    1.0 / (m * pi)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let table = AliasTable::new(&p)?;
        Ok(DiscreteMeasure {
            probabilities: p,
            weights,
            gamma: total / m,
            table,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `w_i`, satisfying `w_i p_i = 1/m̃`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn alias_table(&self) -> &AliasTable {
        &self.table
    }
}

/// `S : {0,…,m−1} → {0,…,m̃−1}`, selecting `y^i = ỹ^{S(i)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsampleMap {
    indices: Vec<usize>,
}

impl SubsampleMap {
    pub fn new(indices: Vec<usize>) -> Self {
        SubsampleMap { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Measure with probabilities proportional to `k̃_n` at the anchors.
pub fn build_sigma_tilde(basis: &SurrogateBasis) -> Result<DiscreteMeasure> {
    let sums = christoffel_row_sums(basis).map_err(|_| Error::ZeroMass)?;
    DiscreteMeasure::from_masses(&sums)
}

/// `m` iid indices from `measure`.
pub fn draw_indices<R: Rng + ?Sized>(
    measure: &DiscreteMeasure,
    m: usize,
    rng: &mut R,
) -> SubsampleMap {
    let table = measure.alias_table();
    SubsampleMap::new((0..m).map(|_| table.sample(rng)).collect())
}

/// `m` distinct indices, distributed as successive weighted draws with the
/// drawn index removed each time. Uses exponential keys `ln(u)/p_i`: the `m`
/// largest keys, sorted descending, have exactly that law.
pub fn draw_indices_without_replacement<R: Rng + ?Sized>(
    measure: &DiscreteMeasure,
    m: usize,
    rng: &mut R,
) -> Result<SubsampleMap> {
    let p = measure.probabilities();
    let support = p.iter().filter(|&&v| v > 0.0).count();
    if support < m {
        return Err(Error::InsufficientSupport {
            support,
            requested: m,
        });
    }
    let mut keyed: Vec<(f64, usize)> = p
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| {
            // 1 − u lies in (0, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            (u.ln() / v, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(SubsampleMap::new(
        keyed.into_iter().take(m).map(|(_, i)| i).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{PointSet, RngStream};
    use crate::index_sets::total_degree_set;
    use crate::surrogate::{build_direct, AnchorSet, DEFAULT_EPSILON_THRESHOLD};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn three_anchor_measure() -> DiscreteMeasure {
        let set = total_degree_set(1, 1).unwrap();
        let anchors = AnchorSet::new(PointSet::new(1, vec![-1.0, 0.0, 1.0]));
        let basis = build_direct(&set, anchors, DEFAULT_EPSILON_THRESHOLD).unwrap();
        build_sigma_tilde(&basis).unwrap()
    }

    #[test]
    fn three_anchor_hand_measure() {
        let mu = three_anchor_measure();
        assert_relative_eq!(mu.gamma(), 2.0, max_relative = 1e-14);
        for (p, e) in mu
            .probabilities()
            .iter()
            .zip([5.0 / 12.0, 2.0 / 12.0, 5.0 / 12.0])
        {
            assert_relative_eq!(*p, e, max_relative = 1e-14);
        }
        for (w, e) in mu.weights().iter().zip([0.8, 2.0, 0.8]) {
            assert_relative_eq!(*w, e, max_relative = 1e-14);
        }
    }

    #[test]
    fn constant_basis_is_uniform() {
        let set = total_degree_set(2, 0).unwrap();
        let anchors = AnchorSet::new(PointSet::new(
            2,
            vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.0, 0.0],
        ));
        let basis = build_direct(&set, anchors, DEFAULT_EPSILON_THRESHOLD).unwrap();
        let mu = build_sigma_tilde(&basis).unwrap();
        assert_eq!(mu.probabilities(), &[0.25; 4]);
        assert_eq!(mu.weights(), &[1.0; 4]);
        assert_relative_eq!(mu.gamma(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn point_mass() {
        let mu = DiscreteMeasure::from_masses(&[1.0, 0.0, 0.0]).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        assert!(draw_indices(&mu, 1000, &mut rng)
            .indices()
            .iter()
            .all(|&i| i == 0));
        assert_eq!(
            draw_indices_without_replacement(&mu, 2, &mut rng).unwrap_err(),
            Error::InsufficientSupport {
                support: 1,
                requested: 2
            }
        );
        assert_eq!(
            DiscreteMeasure::from_masses(&[0.0, 0.0]).unwrap_err(),
            Error::ZeroMass
        );
    }

    #[test]
    fn fair_coin_frequency() {
        let mu = DiscreteMeasure::from_masses(&[1.0, 1.0]).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        let draws = draw_indices(&mu, 1_000_000, &mut rng);
        let ones = draws.indices().iter().filter(|&&i| i == 0).count() as f64 / 1e6;
        assert!((ones - 0.5).abs() <= 0.002, "{ones}");
    }

    #[test]
    fn three_anchor_frequencies_within_three_sigma() {
        let mu = three_anchor_measure();
        let mut rng = RngStream::new(3, 0).rng();
        let m = 1_000_000;
        let mut counts = [0usize; 3];
        for &i in draw_indices(&mu, m, &mut rng).indices() {
            counts[i] += 1;
        }
        for (c, p) in counts.iter().zip(mu.probabilities()) {
            let sigma = (p * (1.0 - p) / m as f64).sqrt();
            assert!((*c as f64 / m as f64 - p).abs() <= 3.0 * sigma);
        }
    }

    /// Upper-tail p-value of a chi-square statistic (Wilson-Hilferty).
    fn chi_square_p_value(stat: f64, df: f64) -> f64 {
        let h = 2.0 / (9.0 * df);
        let z = ((stat / df).powf(1.0 / 3.0) - (1.0 - h)) / h.sqrt();
        0.5 * erfc(z / std::f64::consts::SQRT_2)
    }

    fn erfc(x: f64) -> f64 {
        // Numerical Recipes erfcc, relative error below 1.2e-7
        let z = x.abs();
        let t = 1.0 / (1.0 + 0.5 * z);
        let r = t
            * (-z * z - 1.26551223
                + t * (1.00002368
                    + t * (0.37409196
                        + t * (0.09678418
                            + t * (-0.18628806
                                + t * (0.27886807
                                    + t * (-1.13520398
                                        + t * (1.48851587
                                            + t * (-0.82215223 + t * 0.17087277)))))))))
                .exp();
        if x >= 0.0 {
            r
        } else {
            2.0 - r
        }
    }

    #[test]
    fn alias_matches_target_distribution() {
        let masses: Vec<f64> = (0..64).map(|i| 1.0 + ((i * 37) % 11) as f64).collect();
        let mu = DiscreteMeasure::from_masses(&masses).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let m = 1_000_000;
        let mut counts = vec![0usize; 64];
        for &i in draw_indices(&mu, m, &mut rng).indices() {
            counts[i] += 1;
        }
        let stat: f64 = counts
            .iter()
            .zip(mu.probabilities())
            .map(|(&c, &p)| {
                let e = p * m as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        let pv = chi_square_p_value(stat, 63.0);
        assert!(pv > 1e-4, "chi2 = {stat}, p = {pv}");
    }

    #[test]
    fn exhaustive_draw_is_permutation() {
        let mu = DiscreteMeasure::from_masses(&[1.0; 10]).unwrap();
        for seed in 0..20 {
            let mut rng = RngStream::new(seed, 0).rng();
            let mut s = draw_indices_without_replacement(&mu, 10, &mut rng)
                .unwrap()
                .indices()
                .to_vec();
            s.sort_unstable();
            assert_eq!(s, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn without_replacement_first_draw_law() {
        // the first index must follow p itself
        let mu = DiscreteMeasure::from_masses(&[1.0, 2.0, 5.0]).unwrap();
        let mut rng = RngStream::new(6, 0).rng();
        let trials = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            counts[draw_indices_without_replacement(&mu, 2, &mut rng)
                .unwrap()
                .indices()[0]] += 1;
        }
        for (c, p) in counts.iter().zip(mu.probabilities()) {
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((*c as f64 / trials as f64 - p).abs() <= 4.0 * sigma);
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let mu = three_anchor_measure();
        let a = draw_indices(&mu, 50, &mut RngStream::new(9, 2).rng());
        let b = draw_indices(&mu, 50, &mut RngStream::new(9, 2).rng());
        let c = draw_indices(&mu, 50, &mut RngStream::new(9, 3).rng());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn weight_probability_identity(masses in prop::collection::vec(1e-6f64..1e3, 1..200)) {
            let mu = DiscreteMeasure::from_masses(&masses).unwrap();
            let m = masses.len() as f64;
            let total: f64 = mu.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() <= 4.0 * f64::EPSILON * m.sqrt());
            for (w, p) in mu.weights().iter().zip(mu.probabilities()) {
                prop_assert!((w * p * m - 1.0).abs() <= 2.0 * f64::EPSILON);
            }
        }
    }
}
