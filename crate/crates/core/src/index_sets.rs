//! Downward-closed multi-index sets defining polynomial spaces.
//!
//! Indices are kept in graded order: ascending total degree, ties broken by
//! lexicographic order of the exponent vectors. The zero index therefore always
//! comes first, which makes the first surrogate basis function the constant.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest index set the constructors will build.
pub const MAX_CARDINALITY: usize = 100_000;

/// Exponent vector of a tensorized monomial `y^ν = Π_i y_i^{ν_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn max_exponent(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

fn graded_cmp(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.total_degree()
        .cmp(&b.total_degree())
        .then_with(|| a.0.cmp(&b.0))
}

/// The two index-set families used for the approximation spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexFamily {
    TotalDegree,
    HyperbolicCross,
}

impl IndexFamily {
    pub fn build(self, dim: usize, order: u32) -> Result<MultiIndexSet> {
        match self {
            IndexFamily::TotalDegree => total_degree_set(dim, order),
            IndexFamily::HyperbolicCross => hyperbolic_cross_set(dim, order),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IndexFamily::TotalDegree => "total_degree",
            IndexFamily::HyperbolicCross => "hyperbolic_cross",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "total_degree" => Some(IndexFamily::TotalDegree),
            "hyperbolic_cross" => Some(IndexFamily::HyperbolicCross),
            _ => None,
        }
    }
}

/// A downward-closed set of distinct multi-indices in graded order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    /// Validates and sorts an arbitrary list of indices.
    pub fn from_indices(dim: usize, mut indices: Vec<MultiIndex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidIndexSet(
                "dimension must be at least 1".into(),
            ));
        }
        if indices.len() > MAX_CARDINALITY {
            return Err(Error::CardinalityTooLarge(indices.len()));
        }
        if let Some(bad) = indices.iter().find(|nu| nu.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        let unique: HashSet<&MultiIndex> = indices.iter().collect();
        if unique.len() != indices.len() {
            return Err(Error::InvalidIndexSet("duplicate multi-index".into()));
        }
        if !unique.contains(&MultiIndex::zero(dim)) {
            return Err(Error::InvalidIndexSet("zero index missing".into()));
        }
        if !is_downward_closed(&indices) {
            return Err(Error::InvalidIndexSet("set is not downward closed".into()));
        }
        indices.sort_by(graded_cmp);
        Ok(MultiIndexSet { dim, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    /// Largest exponent appearing in any coordinate.
    pub fn max_exponent(&self) -> u32 {
        self.indices
            .iter()
            .map(|nu| nu.max_exponent())
            .max()
            .unwrap_or(0)
    }

    pub fn is_downward_closed(&self) -> bool {
        is_downward_closed(&self.indices)
    }
}

impl<'a> IntoIterator for &'a MultiIndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// True iff every componentwise predecessor of each member is a member.
///
/// Checking the immediate predecessors `ν - e_j` suffices by induction.
pub fn is_downward_closed(indices: &[MultiIndex]) -> bool {
    let members: HashSet<&[u32]> = indices.iter().map(|nu| nu.exponents()).collect();
    let mut scratch = Vec::new();
    for nu in indices {
        scratch.clear();
        scratch.extend_from_slice(nu.exponents());
        for j in 0..scratch.len() {
            if scratch[j] == 0 {
                continue;
            }
            scratch[j] -= 1;
            let present = members.contains(scratch.as_slice());
            scratch[j] += 1;
            if !present {
                return false;
            }
        }
    }
    true
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// All `ν ∈ ℕ₀^d` with `Σ_j ν_j ≤ order`; cardinality `binom(d + order, order)`.
pub fn total_degree_set(dim: usize, order: u32) -> Result<MultiIndexSet> {
    if dim == 0 {
        return Err(Error::InvalidIndexSet(
            "dimension must be at least 1".into(),
        ));
    }
    let card = binomial(dim as u64 + order as u64, order as u64)
        .map(|c| c as usize)
        .unwrap_or(usize::MAX);
    if card > MAX_CARDINALITY {
        return Err(Error::CardinalityTooLarge(card));
    }
    let mut out = Vec::with_capacity(card);
    let mut current = vec![0u32; dim];
    fn recurse(pos: usize, budget: u32, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos == current.len() {
            out.push(MultiIndex(current.clone()));
            return;
        }
        for e in 0..=budget {
            current[pos] = e;
            recurse(pos + 1, budget - e, current, out);
        }
        current[pos] = 0;
    }
    recurse(0, order, &mut current, &mut out);
    out.sort_by(graded_cmp);
    Ok(MultiIndexSet { dim, indices: out })
}

/// All `ν ∈ ℕ₀^d` with `Π_j (ν_j + 1) ≤ order + 1`.
pub fn hyperbolic_cross_set(dim: usize, order: u32) -> Result<MultiIndexSet> {
    if dim == 0 {
        return Err(Error::InvalidIndexSet(
            "dimension must be at least 1".into(),
        ));
    }
    let bound = order as u64 + 1;
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    fn recurse(
        pos: usize,
        remaining: u64,
        current: &mut Vec<u32>,
        out: &mut Vec<MultiIndex>,
    ) -> Result<()> {
        if pos == current.len() {
            if out.len() == MAX_CARDINALITY {
                return Err(Error::CardinalityTooLarge(MAX_CARDINALITY + 1));
            }
            out.push(MultiIndex(current.clone()));
            return Ok(());
        }
        // (ν + 1) ≤ remaining
        let mut e = 0u64;
        while e < remaining {
            current[pos] = e as u32;
            recurse(pos + 1, remaining / (e + 1), current, out)?;
            e += 1;
        }
        current[pos] = 0;
        Ok(())
    }
    recurse(0, bound, &mut current, &mut out)?;
    out.sort_by(graded_cmp);
    Ok(MultiIndexSet { dim, indices: out })
}
