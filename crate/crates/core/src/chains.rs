//! Chain models: finite kernels, a decimal AR(1) chain, linear contractions,
//! and a one-dimensional SGD iterate chain.
//!
//! Each model supports single-step sampling. Models that admit it also expose
//! exact k-step laws (matrix powers for finite kernels, atom enumeration for
//! the decimal AR(1) chain) and an exact stationary law; the others fall back
//! to empirical long-run measures.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::rng::RngStream;
use crate::space::{MetricSpace, State};

/// Largest exact atom enumeration the AR(1) chain will attempt.
pub const MAX_ENUMERATED_ATOMS: usize = 1_000_000;

/// Exact positions for the decimal chain are built on a micro-lattice
/// (integer multiples of 1e-6, with sub-lattice quotients for deep steps) so
/// that atoms which are equal as rationals compare equal as `f64`.
fn micro_pos(units: f64) -> f64 {
    // Division, not multiplication by 1e-6: the quotient of two exactly
    // representable values is correctly rounded, so lattice points from
    // different enumeration routes land on identical floats.
    units / 1e6
}

const POW10: [f64; 7] = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6];

/// Row-stochastic transition matrix over a finite metric space.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    rows: Vec<Vec<f64>>,
    space: Arc<MetricSpace>,
}

impl FiniteKernel {
    /// Validates that every row is a probability vector over the space.
    pub fn new(rows: Vec<Vec<f64>>, space: Arc<MetricSpace>) -> Result<Self> {
        if rows.len() != space.len() {
            return Err(Error::LengthMismatch(format!(
                "{} rows for a space of {} points",
                rows.len(),
                space.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != space.len() {
                return Err(Error::LengthMismatch(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    space.len()
                )));
            }
            let mut sum = 0.0;
            for &p in row {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidParam(format!("row {i} has entry {p}")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParam(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { rows, space })
    }

    /// Kernel over states 0..n-1 placed at those positions on a line.
    pub fn on_line(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        Self::new(rows, Arc::new(MetricSpace::line(n)?))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Row `i` as a measure on the space.
    pub fn row_measure(&self, i: usize) -> DiscreteMeasure {
        DiscreteMeasure::over_space(self.space.clone(), self.rows[i].clone())
            .expect("kernel rows are validated probability vectors")
    }

    /// Push a distribution vector through the kernel once.
    pub fn apply(&self, dist: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for (i, &w) in dist.iter().enumerate() {
            if w != 0.0 {
                for j in 0..n {
                    out[j] += w * self.rows[i][j];
                }
            }
        }
        out
    }

    /// `P^k` by repeated multiplication.
    pub fn power(&self, k: usize) -> FiniteKernel {
        let n = self.len();
        let mut acc: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for _ in 0..k {
            acc = acc.iter().map(|row| self.apply(row)).collect();
        }
        FiniteKernel { rows: acc, space: self.space.clone() }
    }
}

/// Noise law for the linear contraction chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    None,
    Uniform { lo: f64, hi: f64 },
    Gauss { sd: f64 },
}

impl Noise {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Uniform { lo, hi } => rng.gen_range(lo..hi),
            Noise::Gauss { sd } => {
                // Box-Muller; one draw per call keeps streams reproducible.
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                sd * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            }
        }
    }
}

/// One-dimensional SGD with per-sample quadratic losses
/// `l_i(t) = c_i/2 (t - u_i)^2`, minibatches drawn uniformly with
/// replacement, and projection onto `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct SgdChain {
    pub curvatures: Vec<f64>,
    pub targets: Vec<f64>,
    pub strong_convexity: f64,
    pub smoothness: f64,
    pub step_size: f64,
    pub batch: usize,
    pub lo: f64,
    pub hi: f64,
}

impl SgdChain {
    pub fn new(
        curvatures: Vec<f64>,
        targets: Vec<f64>,
        strong_convexity: f64,
        smoothness: f64,
        step_size: f64,
        batch: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        if curvatures.len() != targets.len() || curvatures.is_empty() {
            return Err(Error::LengthMismatch(format!(
                "{} curvatures for {} targets",
                curvatures.len(),
                targets.len()
            )));
        }
        if !(strong_convexity > 0.0 && smoothness >= strong_convexity) {
            return Err(Error::InvalidParam(format!(
                "need 0 < strong convexity ({strong_convexity}) <= smoothness ({smoothness})"
            )));
        }
        if !(step_size > 0.0 && step_size < 2.0 / smoothness) {
            return Err(Error::InvalidParam(format!(
                "step size {step_size} outside (0, {})",
                2.0 / smoothness
            )));
        }
        for &c in &curvatures {
            if c < strong_convexity - 1e-12 || c > smoothness + 1e-12 {
                return Err(Error::InvalidParam(format!(
                    "curvature {c} outside [{strong_convexity}, {smoothness}]"
                )));
            }
        }
        if batch == 0 {
            return Err(Error::InvalidParam("batch size must be positive".into()));
        }
        if !(lo < hi) {
            return Err(Error::InvalidParam(format!("projection interval [{lo}, {hi}] is empty")));
        }
        Ok(Self { curvatures, targets, strong_convexity, smoothness, step_size, batch, lo, hi })
    }

    /// Worst-case one-step contraction factor
    /// `max(|1 - b*eta|, |1 - b*L|)`, which is < 1 for b in (0, 2/L).
    pub fn contraction_rate(&self) -> f64 {
        let a = (1.0 - self.step_size * self.strong_convexity).abs();
        let b = (1.0 - self.step_size * self.smoothness).abs();
        a.max(b)
    }

    /// Deterministic update for a given minibatch of sample indices.
    pub fn step_with_batch(&self, theta: f64, batch: &[usize]) -> f64 {
        let n = batch.len() as f64;
        let grad: f64 =
            batch.iter().map(|&j| self.curvatures[j] * (theta - self.targets[j])).sum::<f64>() / n;
        (theta - self.step_size * grad).clamp(self.lo, self.hi)
    }

    fn step(&self, theta: f64, rng: &mut ChaCha8Rng) -> f64 {
        let m = self.curvatures.len();
        let batch: Vec<usize> = (0..self.batch).map(|_| rng.gen_range(0..m)).collect();
        self.step_with_batch(theta, &batch)
    }
}

/// The chain models the toolkit ships.
#[derive(Debug, Clone)]
pub enum ChainModel {
    Finite(FiniteKernel),
    /// `X' = X/10 + e`, `e` uniform on `{0, 0.1, ..., 0.9}`, on `[0, 1)`.
    /// The declared stationary law is the uniform decimal grid at resolution
    /// `10^-k_ref`, which carries a W1 discretization error of half a grid
    /// step relative to the continuum uniform law.
    Ar1Decimal { k_ref: u32 },
    /// `X' = a X + e`.
    LinearContraction { a: f64, noise: Noise },
    Sgd(SgdChain),
}

impl ChainModel {
    pub fn ar1(k_ref: u32) -> Result<Self> {
        if k_ref == 0 || k_ref > 6 {
            return Err(Error::InvalidParam(format!("grid exponent {k_ref} outside 1..=6")));
        }
        Ok(ChainModel::Ar1Decimal { k_ref })
    }

    pub fn linear(a: f64, noise: Noise) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(Error::InvalidParam(format!("contraction factor |{a}| must be < 1")));
        }
        Ok(ChainModel::LinearContraction { a, noise })
    }

    /// The finite space, for kernel chains.
    pub fn space(&self) -> Option<&Arc<MetricSpace>> {
        match self {
            ChainModel::Finite(k) => Some(k.space()),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChainModel::Finite(_) => "finite_kernel",
            ChainModel::Ar1Decimal { .. } => "ar1_decimal",
            ChainModel::LinearContraction { .. } => "linear_contraction",
            ChainModel::Sgd(_) => "sgd_iterate",
        }
    }

    /// Check that `s` belongs to this chain's state space.
    pub fn check_state(&self, s: State) -> Result<()> {
        match (self, s) {
            (ChainModel::Finite(k), State::Finite(i)) => {
                if i < k.len() {
                    Ok(())
                } else {
                    Err(Error::StateOutsideSpace(format!("state {i} in a space of {}", k.len())))
                }
            }
            (ChainModel::Finite(_), State::Real(x)) => {
                Err(Error::StateOutsideSpace(format!("real state {x} for a finite kernel")))
            }
            (ChainModel::Ar1Decimal { .. }, State::Real(x)) => {
                if (0.0..1.0).contains(&x) {
                    Ok(())
                } else {
                    Err(Error::StateOutsideSpace(format!("{x} outside [0, 1)")))
                }
            }
            (ChainModel::LinearContraction { .. }, State::Real(x))
            | (ChainModel::Sgd(_), State::Real(x)) => {
                if x.is_finite() {
                    Ok(())
                } else {
                    Err(Error::StateOutsideSpace(format!("non-finite state {x}")))
                }
            }
            (_, State::Finite(i)) => {
                Err(Error::StateOutsideSpace(format!("finite state {i} for a real-line chain")))
            }
        }
    }

    /// One transition from `state`.
    pub fn step(&self, state: State, rng: &mut ChaCha8Rng) -> Result<State> {
        self.check_state(state)?;
        Ok(match (self, state) {
            (ChainModel::Finite(k), State::Finite(i)) => {
                let u: f64 = rng.gen();
                let row = k.row(i);
                let mut acc = 0.0;
                let mut next = row.len() - 1;
                for (j, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        next = j;
                        break;
                    }
                }
                State::Finite(next)
            }
            (ChainModel::Ar1Decimal { .. }, State::Real(x)) => {
                let digit = rng.gen_range(0u32..10);
                State::Real(ar1_step(x, digit))
            }
            (ChainModel::LinearContraction { a, noise }, State::Real(x)) => {
                State::Real(a * x + noise.sample(rng))
            }
            (ChainModel::Sgd(chain), State::Real(theta)) => State::Real(chain.step(theta, rng)),
            _ => unreachable!("check_state filtered mismatched kinds"),
        })
    }

    /// Sample `len` further states `X_1, ..., X_len` from `start`.
    pub fn sample_path(&self, start: State, len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<State>> {
        let mut path = Vec::with_capacity(len);
        let mut s = start;
        for _ in 0..len {
            s = self.step(s, rng)?;
            path.push(s);
        }
        Ok(path)
    }

    /// Exact law of `X_k` when `X_0 ~ start`.
    ///
    /// Finite kernels use matrix powers. The decimal AR(1) chain enumerates
    /// atoms, which multiplies the support by `10^k`; requests beyond `k = 6`
    /// or [`MAX_ENUMERATED_ATOMS`] are rejected. The remaining models have no
    /// exact path; sample and use an empirical law instead.
    pub fn k_step_distribution(&self, start: &DiscreteMeasure, k: usize) -> Result<DiscreteMeasure> {
        match self {
            ChainModel::Finite(kernel) => {
                let space = start
                    .space()
                    .ok_or_else(|| Error::IncompatibleSupports("start is not on the kernel's space".into()))?;
                if !Arc::ptr_eq(space, kernel.space()) && **space != **kernel.space() {
                    return Err(Error::IncompatibleSupports("start lives in a different space".into()));
                }
                let mut dist = vec![0.0; kernel.len()];
                for (a, &w) in start.weights().iter().enumerate() {
                    match start.state(a) {
                        State::Finite(i) => dist[i] += w,
                        State::Real(_) => unreachable!("indexed support"),
                    }
                }
                for _ in 0..k {
                    dist = kernel.apply(&dist);
                }
                DiscreteMeasure::over_space(kernel.space().clone(), dist)
            }
            ChainModel::Ar1Decimal { .. } => {
                if k > 6 {
                    return Err(Error::InvalidParam(format!(
                        "exact decimal enumeration supports k <= 6, got {k}"
                    )));
                }
                let factor = 10usize.pow(k as u32);
                let total = start
                    .len()
                    .checked_mul(factor)
                    .filter(|&t| t <= MAX_ENUMERATED_ATOMS)
                    .ok_or(Error::SupportTooLarge {
                        got: start.len().saturating_mul(factor),
                        limit: MAX_ENUMERATED_ATOMS,
                    })?;
                let mut positions = Vec::with_capacity(total);
                let mut weights = Vec::with_capacity(total);
                let scale = POW10[k];
                for (a, &w) in start.weights().iter().enumerate() {
                    let x = match start.state(a) {
                        State::Real(x) => x,
                        State::Finite(_) => {
                            return Err(Error::IncompatibleSupports(
                                "decimal chain states are real positions".into(),
                            ))
                        }
                    };
                    self.check_state(State::Real(x))?;
                    // Micro-lattice units; rounded when the start already
                    // sits on the lattice so exact coincidences stay exact.
                    let raw_units = x * 1e6;
                    let units = if (raw_units - raw_units.round()).abs() < 1e-6 {
                        raw_units.round()
                    } else {
                        raw_units
                    };
                    let aw = w / factor as f64;
                    for m in 0..factor {
                        positions.push(micro_pos((units + (m as f64) * 1e6) / scale));
                        weights.push(aw);
                    }
                }
                Ok(DiscreteMeasure::real(positions, weights)?.canonicalized())
            }
            ChainModel::LinearContraction { .. } | ChainModel::Sgd(_) => Err(Error::InvalidParam(
                format!("{} has no exact k-step law; sample a path instead", self.kind()),
            )),
        }
    }

    /// The stationary law.
    ///
    /// Finite kernels run power iteration to `1e-12` (error after 1e6
    /// sweeps); the decimal chain declares the uniform grid at its reference
    /// resolution; the remaining models return an empirical long-run measure
    /// (default burn-in 1000, then 10^4 retained states) driven by `stream`.
    pub fn stationary_distribution(&self, stream: &RngStream) -> Result<DiscreteMeasure> {
        match self {
            ChainModel::Finite(kernel) => {
                let n = kernel.len();
                let mut dist = vec![1.0 / n as f64; n];
                for _ in 0..1_000_000u32 {
                    let next = kernel.apply(&dist);
                    let gap = dist
                        .iter()
                        .zip(&next)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    dist = next;
                    if gap <= 1e-12 {
                        // Renormalize accumulated float drift before returning.
                        let sum: f64 = dist.iter().sum();
                        for w in &mut dist {
                            *w /= sum;
                        }
                        return DiscreteMeasure::over_space(kernel.space().clone(), dist);
                    }
                }
                Err(Error::NoConvergence("power iteration did not reach 1e-12 in 1e6 sweeps".into()))
            }
            ChainModel::Ar1Decimal { k_ref } => {
                let n = 10usize.pow(*k_ref);
                let spacing = POW10[6 - *k_ref as usize];
                let positions = (0..n).map(|j| micro_pos(j as f64 * spacing)).collect();
                let weights = vec![1.0 / n as f64; n];
                DiscreteMeasure::real(positions, weights)
            }
            ChainModel::LinearContraction { .. } | ChainModel::Sgd(_) => {
                self.empirical_stationary(stream, 1_000, 10_000, None)
            }
        }
    }

    /// Long-run empirical measure: `burn_in` discarded steps, then `samples`
    /// retained states from a single trajectory.
    pub fn empirical_stationary(
        &self,
        stream: &RngStream,
        burn_in: usize,
        samples: usize,
        start: Option<State>,
    ) -> Result<DiscreteMeasure> {
        let start = start.unwrap_or(match self {
            ChainModel::Finite(_) => State::Finite(0),
            ChainModel::Sgd(c) => State::Real(0.5 * (c.lo + c.hi)),
            _ => State::Real(0.0),
        });
        let mut rng = stream.rng();
        let mut s = start;
        for _ in 0..burn_in {
            s = self.step(s, &mut rng)?;
        }
        match self {
            ChainModel::Finite(kernel) => {
                let mut idx = Vec::with_capacity(samples);
                for _ in 0..samples {
                    s = self.step(s, &mut rng)?;
                    if let State::Finite(i) = s {
                        idx.push(i);
                    }
                }
                DiscreteMeasure::empirical_indexed(kernel.space().clone(), &idx)
            }
            _ => {
                let mut xs = Vec::with_capacity(samples);
                for _ in 0..samples {
                    s = self.step(s, &mut rng)?;
                    if let State::Real(x) = s {
                        xs.push(x);
                    }
                }
                DiscreteMeasure::empirical_real(&xs)
            }
        }
    }
}

/// The deterministic part of the decimal AR(1) update: `(x + d) / 10` for a
/// noise digit `d in 0..=9`.
pub fn ar1_step(x: f64, digit: u32) -> f64 {
    (x + digit as f64) / 10.0
}

/// A minorization certificate `P^m(x, .) >= lambda * phi(.)`.
#[derive(Debug, Clone)]
pub struct DoeblinCertificate {
    pub m: usize,
    pub lambda: f64,
    pub phi: Vec<f64>,
}

impl DoeblinCertificate {
    /// The best certificate at lag `m`: `lambda = sum_j min_x P^m(x, j)`,
    /// `phi = column minima / lambda`. Errors when the minorization mass is
    /// zero (no single-lag Doeblin condition at this `m`).
    pub fn compute(kernel: &FiniteKernel, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParam("minorization lag must be >= 1".into()));
        }
        let pm = kernel.power(m);
        let n = kernel.len();
        let mins: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| pm.row(i)[j]).fold(f64::INFINITY, f64::min))
            .collect();
        let lambda: f64 = mins.iter().sum();
        if lambda <= 0.0 {
            return Err(Error::NoConvergence(format!("no minorization mass at lag {m}")));
        }
        let phi = mins.iter().map(|&v| v / lambda).collect();
        Ok(Self { m, lambda, phi })
    }

    /// Exact componentwise check of `P^m >= lambda * phi` (tolerance 1e-12)
    /// plus validity of `lambda` and `phi`.
    pub fn verify(&self, kernel: &FiniteKernel) -> bool {
        if !(self.lambda > 0.0 && self.lambda <= 1.0 + 1e-12) {
            return false;
        }
        let sum: f64 = self.phi.iter().sum();
        if self.phi.len() != kernel.len()
            || self.phi.iter().any(|&p| p < 0.0)
            || (sum - 1.0).abs() > 1e-9
        {
            return false;
        }
        let pm = kernel.power(self.m);
        (0..kernel.len()).all(|i| {
            (0..kernel.len()).all(|j| pm.row(i)[j] >= self.lambda * self.phi[j] - 1e-12)
        })
    }
}

/// The reference two-state kernel used across examples and tests:
/// rows `(0.9, 0.1)` and `(0.2, 0.8)` on line coordinates `{0, 1}`.
pub fn two_state_reference() -> FiniteKernel {
    FiniteKernel::on_line(vec![vec![0.9, 0.1], vec![0.2, 0.8]])
        .expect("reference kernel rows are stochastic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipm;

    fn stream() -> RngStream {
        RngStream::new(12345, 0)
    }

    #[test]
    fn ar1_deterministic_update() {
        assert_eq!(ar1_step(0.0, 3), 0.3);
        assert_eq!(ar1_step(0.5, 0), 0.05);
    }

    #[test]
    fn identity_kernel_step_stays_put() {
        let chain = ChainModel::Finite(
            FiniteKernel::on_line(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        );
        let mut rng = stream().rng();
        for _ in 0..20 {
            assert_eq!(chain.step(State::Finite(0), &mut rng).unwrap(), State::Finite(0));
        }
    }

    #[test]
    fn one_step_law_reads_the_row() {
        let chain = ChainModel::Finite(two_state_reference());
        let start = DiscreteMeasure::dirac_indexed(chain.space().unwrap().clone(), 0).unwrap();
        let law = chain.k_step_distribution(&start, 1).unwrap();
        assert_eq!(law.weights(), &[0.9, 0.1]);
    }

    #[test]
    fn two_step_law_matches_hand_computed_power() {
        // Oracle by hand: P^2(0, .) = (0.9*0.9 + 0.1*0.2, 0.9*0.1 + 0.1*0.8)
        //                           = (0.83, 0.17).
        let chain = ChainModel::Finite(two_state_reference());
        let start = DiscreteMeasure::dirac_indexed(chain.space().unwrap().clone(), 0).unwrap();
        let law = chain.k_step_distribution(&start, 2).unwrap();
        assert!((law.weights()[0] - 0.83).abs() < 1e-15);
        assert!((law.weights()[1] - 0.17).abs() < 1e-15);
    }

    #[test]
    fn ar1_one_step_from_zero_is_the_decade_grid() {
        let chain = ChainModel::ar1(6).unwrap();
        let law = chain.k_step_distribution(&DiscreteMeasure::dirac_real(0.0), 1).unwrap();
        let expect: Vec<f64> = (0..10).map(|d| d as f64 / 10.0).collect();
        assert_eq!(law.positions_1d().unwrap(), expect);
        assert!(law.weights().iter().all(|&w| (w - 0.1).abs() < 1e-15));
    }

    #[test]
    fn ar1_k_step_atoms_share_equal_mass() {
        let chain = ChainModel::ar1(6).unwrap();
        for k in 1..=4usize {
            let law = chain.k_step_distribution(&DiscreteMeasure::dirac_real(0.13), k).unwrap();
            let n = 10usize.pow(k as u32);
            assert_eq!(law.len(), n);
            let w = 1.0 / n as f64;
            assert!(law.weights().iter().all(|&x| (x - w).abs() < 1e-15));
            let sum: f64 = law.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ar1_enumeration_budget_is_enforced() {
        let chain = ChainModel::ar1(6).unwrap();
        let start = chain.stationary_distribution(&stream()).unwrap();
        // 1e6 existing atoms times 10 would blow the budget.
        assert!(matches!(
            chain.k_step_distribution(&start, 1),
            Err(Error::SupportTooLarge { .. })
        ));
        assert!(chain.k_step_distribution(&DiscreteMeasure::dirac_real(0.0), 7).is_err());
    }

    #[test]
    fn stationary_of_reference_kernel() {
        // Oracle: pi = (2/3, 1/3) solves pi P = pi for the reference kernel.
        let chain = ChainModel::Finite(two_state_reference());
        let pi = chain.stationary_distribution(&stream()).unwrap();
        assert!((pi.weights()[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((pi.weights()[1] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn doubly_stochastic_kernel_has_uniform_stationary_law() {
        let chain = ChainModel::Finite(
            FiniteKernel::on_line(vec![
                vec![0.5, 0.3, 0.2],
                vec![0.2, 0.5, 0.3],
                vec![0.3, 0.2, 0.5],
            ])
            .unwrap(),
        );
        let pi = chain.stationary_distribution(&stream()).unwrap();
        for &w in pi.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ar1_declared_stationary_law_is_the_grid() {
        let chain = ChainModel::ar1(1).unwrap();
        let pi = chain.stationary_distribution(&stream()).unwrap();
        let expect: Vec<f64> = (0..10).map(|d| d as f64 / 10.0).collect();
        assert_eq!(pi.positions_1d().unwrap(), expect);
    }

    #[test]
    fn linear_contraction_shrinks_dirac_pairs_empirically() {
        // W1 between empirical k-step laws from two Dirac starts is at most
        // a^k |x - y| plus sampling error (synchronous coupling argument).
        let chain = ChainModel::linear(0.5, Noise::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let trials = 20_000;
        for k in [1usize, 3] {
            let mut xs = Vec::with_capacity(trials);
            let mut ys = Vec::with_capacity(trials);
            for t in 0..trials {
                let mut rng = stream().substream(t as u64).rng();
                let px = chain.sample_path(State::Real(-1.0), k, &mut rng).unwrap();
                let mut rng = stream().substream((trials + t) as u64).rng();
                let py = chain.sample_path(State::Real(1.0), k, &mut rng).unwrap();
                xs.push(px[k - 1].real().unwrap());
                ys.push(py[k - 1].real().unwrap());
            }
            let mu = DiscreteMeasure::empirical_real(&xs).unwrap();
            let nu = DiscreteMeasure::empirical_real(&ys).unwrap();
            let w = ipm::w1_distance_1d(&mu, &nu).unwrap().value;
            assert!(
                w <= 0.5f64.powi(k as i32) * 2.0 + 0.05,
                "k = {k}: empirical W1 {w} exceeds the contraction envelope"
            );
        }
    }

    #[test]
    fn sgd_chain_validates_its_step_size() {
        let bad = SgdChain::new(vec![1.0], vec![0.0], 0.5, 2.0, 1.5, 1, 0.0, 1.0);
        assert!(bad.is_err(), "step size 1.5 >= 2/L = 1 must be rejected");
        let good = SgdChain::new(vec![1.0], vec![0.0], 0.5, 2.0, 0.5, 1, 0.0, 1.0);
        assert!(good.is_ok());
    }

    #[test]
    fn doeblin_certificate_for_the_reference_kernel() {
        // Column minima: min(0.9, 0.2) = 0.2 and min(0.1, 0.8) = 0.1, so
        // lambda = 0.3 and phi = (2/3, 1/3).
        let kernel = two_state_reference();
        let cert = DoeblinCertificate::compute(&kernel, 1).unwrap();
        assert!((cert.lambda - 0.3).abs() < 1e-15);
        assert!((cert.phi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!(cert.verify(&kernel));
    }

    #[test]
    fn doeblin_verification_rejects_an_inflated_lambda() {
        let kernel = two_state_reference();
        let mut cert = DoeblinCertificate::compute(&kernel, 1).unwrap();
        cert.lambda = 0.9;
        assert!(!cert.verify(&kernel));
    }

    #[test]
    fn states_outside_the_space_are_rejected() {
        let chain = ChainModel::Finite(two_state_reference());
        let mut rng = stream().rng();
        assert!(chain.step(State::Finite(5), &mut rng).is_err());
        assert!(chain.step(State::Real(0.5), &mut rng).is_err());
        let ar1 = ChainModel::ar1(6).unwrap();
        assert!(ar1.step(State::Real(1.0), &mut rng).is_err());
    }
}
