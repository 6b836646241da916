//! Finitely supported probability measures.
//!
//! A [`DiscreteMeasure`] is a weight vector over either the points of a shared
//! [`MetricSpace`] (finite-state chains) or raw positions on the real line
//! (chains on an interval). Weights are validated to be nonnegative and to sum
//! to one within `1e-12` at every construction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::{MetricSpace, State};

/// Tolerance for the normalization check `|sum - 1| <= NORMALIZATION_TOL`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Where the atoms of a measure live.
#[derive(Debug, Clone)]
pub enum Support {
    /// Atom `k` sits at `space.coord(indices[k])`.
    Indexed { space: Arc<MetricSpace>, indices: Vec<usize> },
    /// Atom `k` sits at `positions[k]` on the real line.
    Real { positions: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    support: Support,
    weights: Vec<f64>,
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    // Kahan summation: naive accumulation over ~1e6 atoms drifts past the
    // tolerance even for exactly uniform weights.
    let mut sum = 0.0;
    let mut carry = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidMeasure(format!("weight {i} is {w}")));
        }
        let y = w - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidMeasure(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

impl DiscreteMeasure {
    /// A measure over selected points of a finite space.
    pub fn indexed(space: Arc<MetricSpace>, indices: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if indices.len() != weights.len() {
            return Err(Error::LengthMismatch(format!(
                "{} indices for {} weights",
                indices.len(),
                weights.len()
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= space.len()) {
            return Err(Error::StateOutsideSpace(format!("index {bad} in a space of {}", space.len())));
        }
        validate_weights(&weights)?;
        Ok(Self { support: Support::Indexed { space, indices }, weights })
    }

    /// A measure over all points of a finite space, in order.
    pub fn over_space(space: Arc<MetricSpace>, weights: Vec<f64>) -> Result<Self> {
        let indices = (0..space.len()).collect();
        Self::indexed(space, indices, weights)
    }

    /// A measure on raw real positions. Positions need not be sorted or
    /// distinct; use [`DiscreteMeasure::canonicalized`] to merge duplicates.
    pub fn real(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::LengthMismatch(format!(
                "{} positions for {} weights",
                positions.len(),
                weights.len()
            )));
        }
        if let Some(&bad) = positions.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParam(format!("non-finite position {bad}")));
        }
        validate_weights(&weights)?;
        Ok(Self { support: Support::Real { positions }, weights })
    }

    /// Point mass at a real position.
    pub fn dirac_real(x: f64) -> Self {
        Self { support: Support::Real { positions: vec![x] }, weights: vec![1.0] }
    }

    /// Point mass at a point of a finite space.
    pub fn dirac_indexed(space: Arc<MetricSpace>, i: usize) -> Result<Self> {
        Self::indexed(space, vec![i], vec![1.0])
    }

    /// Empirical measure of real-valued samples: equal weights, duplicates
    /// merged by exact position equality.
    pub fn empirical_real(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidMeasure("empirical measure of zero samples".into()));
        }
        let w = 1.0 / samples.len() as f64;
        let m = Self::real(samples.to_vec(), vec![w; samples.len()])?;
        Ok(m.canonicalized())
    }

    /// Empirical measure of finite-space samples.
    pub fn empirical_indexed(space: Arc<MetricSpace>, samples: &[usize]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidMeasure("empirical measure of zero samples".into()));
        }
        let mut counts = vec![0u64; space.len()];
        for &s in samples {
            if s >= space.len() {
                return Err(Error::StateOutsideSpace(format!("sample {s} in a space of {}", space.len())));
            }
            counts[s] += 1;
        }
        let n = samples.len() as f64;
        let weights = counts.iter().map(|&c| c as f64 / n).collect();
        Self::over_space(space, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    /// The state of atom `k`.
    pub fn state(&self, k: usize) -> State {
        match &self.support {
            Support::Indexed { indices, .. } => State::Finite(indices[k]),
            Support::Real { positions } => State::Real(positions[k]),
        }
    }

    /// The shared space, for indexed supports.
    pub fn space(&self) -> Option<&Arc<MetricSpace>> {
        match &self.support {
            Support::Indexed { space, .. } => Some(space),
            Support::Real { .. } => None,
        }
    }

    /// 1-D positions of all atoms, if the support lives on the real line
    /// (raw positions, or an indexed space of dimension one).
    pub fn positions_1d(&self) -> Option<Vec<f64>> {
        match &self.support {
            Support::Real { positions } => Some(positions.clone()),
            Support::Indexed { space, indices } => {
                let pos = space.positions_1d()?;
                Some(indices.iter().map(|&i| pos[i]).collect())
            }
        }
    }

    /// Coordinates of all atoms in R^d, for kernel-based distances.
    pub fn coords(&self) -> Vec<Vec<f64>> {
        match &self.support {
            Support::Real { positions } => positions.iter().map(|&x| vec![x]).collect(),
            Support::Indexed { space, indices } => {
                indices.iter().map(|&i| space.coord(i).to_vec()).collect()
            }
        }
    }

    /// Draw one atom proportionally to its weight.
    pub fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> State {
        use rand::Rng;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (k, &w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return self.state(k);
            }
        }
        self.state(self.len() - 1)
    }

    /// Expectation of a pointwise function of the state.
    pub fn expect(&self, f: impl Fn(State) -> f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(k, &w)| w * f(self.state(k)))
            .sum()
    }

    /// Sort atoms (by index or position) and merge exact duplicates.
    /// Weight order follows the sort, so equal inputs produce equal outputs
    /// regardless of original atom order.
    pub fn canonicalized(&self) -> Self {
        match &self.support {
            Support::Indexed { space, indices } => {
                let mut order: Vec<usize> = (0..indices.len()).collect();
                order.sort_by_key(|&k| indices[k]);
                let mut out_idx: Vec<usize> = Vec::with_capacity(indices.len());
                let mut out_w: Vec<f64> = Vec::with_capacity(indices.len());
                for &k in &order {
                    if out_idx.last() == Some(&indices[k]) {
                        *out_w.last_mut().unwrap() += self.weights[k];
                    } else {
                        out_idx.push(indices[k]);
                        out_w.push(self.weights[k]);
                    }
                }
                Self { support: Support::Indexed { space: space.clone(), indices: out_idx }, weights: out_w }
            }
            Support::Real { positions } => {
                let mut order: Vec<usize> = (0..positions.len()).collect();
                order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
                let mut out_pos: Vec<f64> = Vec::with_capacity(positions.len());
                let mut out_w: Vec<f64> = Vec::with_capacity(positions.len());
                for &k in &order {
                    if out_pos.last() == Some(&positions[k]) {
                        *out_w.last_mut().unwrap() += self.weights[k];
                    } else {
                        out_pos.push(positions[k]);
                        out_w.push(self.weights[k]);
                    }
                }
                Self { support: Support::Real { positions: out_pos }, weights: out_w }
            }
        }
    }

    /// Align two measures on a merged support and return paired weights.
    /// Requires both supports to be indexed into the same space, or both to
    /// be raw real positions (merged by exact equality).
    pub fn aligned_weights(&self, other: &Self) -> Result<Vec<(f64, f64)>> {
        match (&self.support, &other.support) {
            (Support::Indexed { space: sa, .. }, Support::Indexed { space: sb, .. }) => {
                if !Arc::ptr_eq(sa, sb) && **sa != **sb {
                    return Err(Error::IncompatibleSupports(
                        "indexed measures live in different spaces".into(),
                    ));
                }
                let a = self.canonicalized();
                let b = other.canonicalized();
                let (ia, wa) = a.indexed_parts();
                let (ib, wb) = b.indexed_parts();
                Ok(merge_sorted(ia, wa, ib, wb, |x, y| x.cmp(y)))
            }
            (Support::Real { .. }, Support::Real { .. }) => {
                let a = self.canonicalized();
                let b = other.canonicalized();
                let (pa, wa) = a.real_parts();
                let (pb, wb) = b.real_parts();
                Ok(merge_sorted(pa, wa, pb, wb, |x, y| x.total_cmp(y)))
            }
            _ => Err(Error::IncompatibleSupports(
                "cannot align an indexed support with raw real positions".into(),
            )),
        }
    }

    fn indexed_parts(&self) -> (&[usize], &[f64]) {
        match &self.support {
            Support::Indexed { indices, .. } => (indices, &self.weights),
            Support::Real { .. } => unreachable!("caller checked the support kind"),
        }
    }

    fn real_parts(&self) -> (&[f64], &[f64]) {
        match &self.support {
            Support::Real { positions } => (positions, &self.weights),
            Support::Indexed { .. } => unreachable!("caller checked the support kind"),
        }
    }
}

/// Merge two sorted (key, weight) sequences into pairs over the key union,
/// filling 0 for absent keys.
fn merge_sorted<K: Copy>(
    ka: &[K],
    wa: &[f64],
    kb: &[K],
    wb: &[f64],
    cmp: impl Fn(&K, &K) -> std::cmp::Ordering,
) -> Vec<(f64, f64)> {
    use std::cmp::Ordering;
    let mut out = Vec::with_capacity(ka.len() + kb.len());
    let (mut i, mut j) = (0, 0);
    while i < ka.len() || j < kb.len() {
        if i == ka.len() {
            out.push((0.0, wb[j]));
            j += 1;
        } else if j == kb.len() {
            out.push((wa[i], 0.0));
            i += 1;
        } else {
            match cmp(&ka[i], &kb[j]) {
                Ordering::Less => {
                    out.push((wa[i], 0.0));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((0.0, wb[j]));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((wa[i], wb[j]));
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    out
}
