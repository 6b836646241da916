//! Monte Carlo estimation of partial-sum tail probabilities and validation
//! of bound reports against them.
//!
//! A [`TailExperiment`] fixes a chain, observables `f_i`, a horizon `n`, and
//! an initial law, and estimates
//!
//! ```text
//! p(eps) = P[ |S~_n - center| >= n * eps ],    S~_n = sum_{i<n} f_i(X_i),
//! ```
//!
//! with `center = sum_i pi(f_i)` taken from the chain's stationary law
//! (exact where an exact law exists, a long-run empirical law otherwise).
//! The event uses `>=`, which over-counts relative to the strict inequality
//! in the tail statements exactly at atoms of the sum's law, keeping
//! validation conservative.
//!
//! Estimates come with exact Clopper-Pearson confidence intervals at the
//! fixed 99% level, and [`validate_bounds`] declares PASS per grid point
//! exactly when the interval's lower end does not exceed the bound value
//! (bounds are upper bounds, so only `ci_low > bound` is evidence of a
//! violation). Trials draw from per-trial substreams keyed by trial index
//! and land in slot-indexed buffers, so results are bit-identical for a
//! given seed no matter how the trials are scheduled across threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bounds::BoundReport;
use crate::chains::{ChainModel, FiniteKernel};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::observable::FunctionProfile;
use crate::rng::RngStream;
use crate::space::State;

/// Which deviation the experiment counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    /// `|S~ - center| >= n eps`, matching the two-sided statements.
    TwoSided,
    /// `S~ - center >= n eps`, for the one-sided spectral bound.
    Upper,
}

/// Substream id reserved for the empirical-center draw, outside the
/// trial-indexed range a practical trial count can reach.
const CENTER_STREAM: u64 = u64::MAX;

/// A tail-probability experiment on one chain.
#[derive(Clone)]
pub struct TailExperiment {
    chain: ChainModel,
    fs: Vec<FunctionProfile>,
    n: usize,
    start: DiscreteMeasure,
    trials: usize,
    side: TailSide,
    center: f64,
    stream: RngStream,
}

/// One grid point of a tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub eps: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Empirical tail probabilities over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub per_epsilon: Vec<TailPoint>,
    /// Interval construction, fixed to exact Clopper-Pearson at 99%.
    pub method: &'static str,
    pub trials: usize,
    pub side: TailSide,
    pub center: f64,
}

/// Verdict for one (family, eps) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One row of the validation table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRow {
    pub family: String,
    pub eps: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// The proof-consistent bound value the check uses.
    pub bound: f64,
    pub verdict: Verdict,
}

/// `measure(f)`, the expectation of an observable under an atomic law.
pub fn expectation(measure: &DiscreteMeasure, f: &FunctionProfile) -> f64 {
    (0..measure.len())
        .map(|i| measure.weights()[i] * f.eval(measure.state(i)))
        .sum()
}

fn profile_at(fs: &[FunctionProfile], i: usize) -> &FunctionProfile {
    if fs.len() == 1 {
        &fs[0]
    } else {
        &fs[i]
    }
}

impl TailExperiment {
    /// Set up an experiment; `fs` is either a single profile applied at
    /// every step or one profile per step. The centering constant
    /// `sum_i pi(f_i)` is computed here, from the declared stationary law
    /// when the chain has one (finite kernels, the decimal chain) and from
    /// a long-run empirical law on a reserved substream otherwise.
    pub fn new(
        chain: ChainModel,
        fs: Vec<FunctionProfile>,
        n: usize,
        start: DiscreteMeasure,
        trials: usize,
        stream: RngStream,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("horizon n must be at least 1".into()));
        }
        if trials == 0 {
            return Err(Error::InvalidParam("trials must be at least 1".into()));
        }
        if fs.is_empty() || (fs.len() != 1 && fs.len() != n) {
            return Err(Error::LengthMismatch(format!(
                "need 1 or {n} observables, got {}",
                fs.len()
            )));
        }
        for i in 0..start.len() {
            chain.check_state(start.state(i))?;
        }
        let pi = chain.stationary_distribution(&stream.substream(CENTER_STREAM))?;
        let center = (0..n).map(|i| expectation(&pi, profile_at(&fs, i))).sum();
        Ok(Self { chain, fs, n, start, trials, side: TailSide::TwoSided, center, stream })
    }

    /// Count one-sided upper deviations instead of two-sided ones.
    pub fn with_side(mut self, side: TailSide) -> Self {
        self.side = side;
        self
    }

    /// Override the centering constant (a known analytic value, or a
    /// stationary-start shortcut).
    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Simulate the deviation statistic once; `trial` keys the substream.
    fn deviation(&self, trial: u64) -> Result<f64> {
        let mut rng = self.stream.substream(trial).rng();
        let mut s = self.start.sample(&mut rng);
        let mut sum = profile_at(&self.fs, 0).eval(s);
        for i in 1..self.n {
            s = self.chain.step(s, &mut rng)?;
            sum += profile_at(&self.fs, i).eval(s);
        }
        let dev = sum - self.center;
        Ok(match self.side {
            TailSide::TwoSided => dev.abs(),
            TailSide::Upper => dev,
        })
    }

    /// Estimate the tail probability at each grid point.
    ///
    /// Each trial simulates `X_0..X_(n-1)` from the initial law on its own
    /// substream and contributes an exceedance indicator per grid point;
    /// counts are integers, so the estimate does not depend on the number
    /// of worker threads.
    pub fn empirical_tail(&self, eps_grid: &[f64]) -> Result<TailEstimate> {
        if eps_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParam("eps grid must be strictly increasing".into()));
        }
        let deviations: Vec<f64> = (0..self.trials as u64)
            .into_par_iter()
            .map(|t| self.deviation(t))
            .collect::<Result<Vec<_>>>()?;
        let n_f = self.n as f64;
        let per_epsilon = eps_grid
            .iter()
            .map(|&eps| {
                let count = deviations.iter().filter(|&&d| d >= n_f * eps).count();
                let (ci_low, ci_high) = clopper_pearson(count as u64, self.trials as u64, 0.01);
                TailPoint { eps, p_hat: count as f64 / self.trials as f64, ci_low, ci_high }
            })
            .collect();
        Ok(TailEstimate {
            per_epsilon,
            method: "clopper_pearson_99",
            trials: self.trials,
            side: self.side,
            center: self.center,
        })
    }
}

/// Exact two-sided Clopper-Pearson interval for `k` successes in `n`
/// Bernoulli trials at level `1 - alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    let low = if k == 0 {
        0.0
    } else {
        Beta::new(k as f64, (n - k + 1) as f64)
            .expect("positive shape parameters")
            .inverse_cdf(alpha / 2.0)
    };
    let high = if k == n {
        1.0
    } else {
        Beta::new((k + 1) as f64, (n - k) as f64)
            .expect("positive shape parameters")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

/// Exact tail probabilities for a finite chain by exhaustive path
/// enumeration: sums `start(x_0) prod P(x_i, x_(i+1))` over all `K^n`
/// paths whose deviation statistic reaches `n eps`. Budgeted at `K^n <=
/// 2^22`; the estimate's Monte Carlo counterpart should land inside its own
/// interval around these values.
pub fn exact_tail(
    kernel: &FiniteKernel,
    fs: &[FunctionProfile],
    n: usize,
    start: &DiscreteMeasure,
    center: f64,
    side: TailSide,
    eps_grid: &[f64],
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParam("horizon n must be at least 1".into()));
    }
    if fs.is_empty() || (fs.len() != 1 && fs.len() != n) {
        return Err(Error::LengthMismatch(format!(
            "need 1 or {n} observables, got {}",
            fs.len()
        )));
    }
    let k = kernel.len();
    let budget: f64 = (k as f64).powi(n as i32);
    if budget > (1u64 << 22) as f64 {
        return Err(Error::SupportTooLarge {
            got: budget as usize,
            limit: 1 << 22,
        });
    }
    let mut probs = vec![0.0f64; eps_grid.len()];
    // Depth-first over (state, partial sum, path probability).
    let mut stack: Vec<(usize, usize, f64, f64)> = Vec::new();
    for a in 0..start.len() {
        let w = start.weights()[a];
        if w == 0.0 {
            continue;
        }
        let s0 = match start.state(a) {
            State::Finite(i) => i,
            State::Real(_) => {
                return Err(Error::IncompatibleSupports(
                    "exact enumeration needs an indexed start law".into(),
                ))
            }
        };
        stack.push((s0, 1, w, profile_at(fs, 0).eval(State::Finite(s0))));
    }
    while let Some((s, depth, prob, sum)) = stack.pop() {
        if depth == n {
            let dev = match side {
                TailSide::TwoSided => (sum - center).abs(),
                TailSide::Upper => sum - center,
            };
            for (slot, &eps) in probs.iter_mut().zip(eps_grid) {
                if dev >= n as f64 * eps {
                    *slot += prob;
                }
            }
            continue;
        }
        let row = kernel.row(s);
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                let f = profile_at(fs, depth).eval(State::Finite(j));
                stack.push((j, depth + 1, prob * p, sum + f));
            }
        }
    }
    Ok(probs)
}

/// Check an estimate against bound reports sharing its grid.
///
/// A row passes when `ci_low <= bound`: an upper bound is only refuted
/// when the estimate's entire confidence interval sits above it. The bound
/// column is the proof-consistent value. Estimates and reports must agree
/// on the grid exactly; a mismatch is a configuration error, not a
/// tolerance question.
pub fn validate_bounds(
    estimate: &TailEstimate,
    reports: &[BoundReport],
) -> Result<Vec<VerdictRow>> {
    let mut rows = Vec::new();
    for report in reports {
        if report.per_epsilon.len() != estimate.per_epsilon.len() {
            return Err(Error::LengthMismatch(format!(
                "report for {} has {} grid points, estimate has {}",
                report.family.name(),
                report.per_epsilon.len(),
                estimate.per_epsilon.len()
            )));
        }
        for (b, t) in report.per_epsilon.iter().zip(&estimate.per_epsilon) {
            if b.eps != t.eps {
                return Err(Error::IncompatibleSupports(format!(
                    "grid mismatch for {}: bound at eps {} against estimate at eps {}",
                    report.family.name(),
                    b.eps,
                    t.eps
                )));
            }
            let bound = b.value_proof_consistent;
            let verdict = if t.ci_low <= bound { Verdict::Pass } else { Verdict::Fail };
            rows.push(VerdictRow {
                family: report.family.name().to_string(),
                eps: t.eps,
                p_hat: t.p_hat,
                ci_low: t.ci_low,
                ci_high: t.ci_high,
                bound,
                verdict,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{BoundFamily, EpsBound};
    use crate::chains::two_state_reference;

    fn coin_chain() -> ChainModel {
        ChainModel::Finite(
            FiniteKernel::on_line(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
        )
    }

    fn identity_profile(chain: &ChainModel) -> FunctionProfile {
        let space = chain.space().unwrap();
        FunctionProfile::table(vec![0.0, 1.0], space).unwrap()
    }

    fn dirac0(chain: &ChainModel) -> DiscreteMeasure {
        DiscreteMeasure::dirac_indexed(chain.space().unwrap().clone(), 0).unwrap()
    }

    #[test]
    fn constant_chain_never_deviates() {
        let chain = ChainModel::Finite(FiniteKernel::on_line(vec![vec![1.0]]).unwrap());
        let f = FunctionProfile::table(vec![0.75], chain.space().unwrap()).unwrap();
        let start = dirac0(&chain);
        let exp =
            TailExperiment::new(chain, vec![f], 20, start, 2_000, RngStream::new(7, 0)).unwrap();
        assert!((exp.center() - 15.0).abs() < 1e-12);
        let est = exp.empirical_tail(&[0.01, 0.1, 1.0]).unwrap();
        for point in &est.per_epsilon {
            assert_eq!(point.p_hat, 0.0);
            assert_eq!(point.ci_low, 0.0);
            assert!(point.ci_high < 0.01);
        }
    }

    #[test]
    fn fair_coin_tail_matches_the_binomial_atom() {
        // P(|Bin(10, 1/2) - 5| >= 5) = 2 / 2^10.
        let chain = coin_chain();
        let f = identity_profile(&chain);
        let start = dirac0(&chain);
        let exp = TailExperiment::new(chain, vec![f], 10, start, 100_000, RngStream::new(11, 0))
            .unwrap();
        assert!((exp.center() - 5.0).abs() < 1e-10);
        let est = exp.empirical_tail(&[0.5]).unwrap();
        let truth = 2.0f64.powi(-9);
        let point = est.per_epsilon[0];
        assert!(point.ci_low <= truth && truth <= point.ci_high, "{point:?}");
        assert!((point.p_hat - truth).abs() < 1.5e-3);
    }

    #[test]
    fn exact_enumeration_agrees_with_binomial_arithmetic() {
        let chain = coin_chain();
        let f = identity_profile(&chain);
        let start = dirac0(&chain);
        let kernel = match &chain {
            ChainModel::Finite(k) => k,
            _ => unreachable!(),
        };
        // From a Dirac start the first state is fixed, so S ~ 1[s0=1] +
        // Bin(9, 1/2); with s0 = 0: P(|S - 5| >= 5) = P(S=0) + P(S=10)
        // = (1/2)^9 + 0.
        let probs =
            exact_tail(kernel, &[f], 10, &start, 5.0, TailSide::TwoSided, &[0.5]).unwrap();
        assert!((probs[0] - 2.0f64.powi(-9)).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_lands_inside_its_interval_around_the_exact_tail() {
        let chain = ChainModel::Finite(two_state_reference());
        let f = FunctionProfile::indicator(0);
        let start = dirac0(&chain);
        let grid = [0.05, 0.1, 0.2, 0.4];
        let exp = TailExperiment::new(
            chain.clone(),
            vec![f.clone()],
            12,
            start.clone(),
            50_000,
            RngStream::new(23, 0),
        )
        .unwrap();
        let est = exp.empirical_tail(&grid).unwrap();
        let kernel = match &chain {
            ChainModel::Finite(k) => k,
            _ => unreachable!(),
        };
        let exact =
            exact_tail(kernel, &[f], 12, &start, exp.center(), TailSide::TwoSided, &grid)
                .unwrap();
        for (point, &truth) in est.per_epsilon.iter().zip(&exact) {
            assert!(
                point.ci_low <= truth && truth <= point.ci_high,
                "exact {truth} outside [{}, {}]",
                point.ci_low,
                point.ci_high
            );
        }
    }

    #[test]
    fn estimates_do_not_depend_on_the_thread_count() {
        let chain = ChainModel::Finite(two_state_reference());
        let f = FunctionProfile::indicator(0);
        let start = dirac0(&chain);
        let exp =
            TailExperiment::new(chain, vec![f], 50, start, 20_000, RngStream::new(3, 9)).unwrap();
        let grid = [0.05, 0.15, 0.3];
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| exp.empirical_tail(&grid).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| exp.empirical_tail(&grid).unwrap());
        assert_eq!(single, many);
    }

    #[test]
    fn tail_points_are_monotone_and_ordered() {
        let chain = ChainModel::Finite(two_state_reference());
        let f = FunctionProfile::indicator(0);
        let start = dirac0(&chain);
        let exp =
            TailExperiment::new(chain, vec![f], 30, start, 5_000, RngStream::new(5, 4)).unwrap();
        let grid: Vec<f64> = (1..=10).map(|k| k as f64 * 0.05).collect();
        let est = exp.empirical_tail(&grid).unwrap();
        let mut prev = f64::INFINITY;
        for p in &est.per_epsilon {
            assert!(0.0 <= p.ci_low && p.ci_low <= p.p_hat);
            assert!(p.p_hat <= p.ci_high && p.ci_high <= 1.0);
            assert!(p.p_hat <= prev);
            prev = p.p_hat;
        }
    }

    #[test]
    fn one_sided_counts_only_upper_deviations() {
        // f = -indicator(0) from a start pinned at state 0 drifts down, so
        // upper deviations are rare while two-sided ones are common.
        let chain = ChainModel::Finite(two_state_reference());
        let space = chain.space().unwrap();
        let f = FunctionProfile::table(vec![-1.0, 0.0], space).unwrap();
        let start = dirac0(&chain);
        let two = TailExperiment::new(
            chain.clone(),
            vec![f.clone()],
            20,
            start.clone(),
            4_000,
            RngStream::new(2, 2),
        )
        .unwrap();
        let one = two.clone().with_side(TailSide::Upper);
        let grid = [0.05];
        let p_two = two.empirical_tail(&grid).unwrap().per_epsilon[0].p_hat;
        let p_one = one.empirical_tail(&grid).unwrap().per_epsilon[0].p_hat;
        assert!(p_one <= p_two);
    }

    #[test]
    fn clopper_pearson_brackets_the_rate() {
        // For k = 0 the upper end solves (1-p)^n = alpha/2 in closed form;
        // the quantile solver is iterative, so compare at its accuracy.
        let (low, high) = clopper_pearson(0, 100, 0.01);
        assert_eq!(low, 0.0);
        assert!((high - (1.0 - (0.005f64).powf(0.01))).abs() < 1e-5);
        let (low, high) = clopper_pearson(100, 100, 0.01);
        assert_eq!(high, 1.0);
        assert!(low > 0.9);
        let (low, high) = clopper_pearson(50, 100, 0.01);
        assert!(low < 0.5 && 0.5 < high);
        assert!(high - low < 0.3);
    }

    fn fake_report(family: BoundFamily, grid: &[f64], value: f64) -> BoundReport {
        BoundReport {
            family,
            per_epsilon: grid
                .iter()
                .map(|&eps| EpsBound {
                    eps,
                    value_as_stated: value,
                    value_proof_consistent: value,
                    valid: true,
                })
                .collect(),
            threshold: 0.0,
            notes: vec![],
        }
    }

    #[test]
    fn validation_passes_trivial_bounds_and_fails_planted_violations() {
        let chain = ChainModel::Finite(two_state_reference());
        let f = FunctionProfile::indicator(0);
        let start = dirac0(&chain);
        let exp =
            TailExperiment::new(chain, vec![f], 25, start, 5_000, RngStream::new(19, 1)).unwrap();
        let grid = [0.01, 0.05];
        let est = exp.empirical_tail(&grid).unwrap();
        assert!(est.per_epsilon[0].p_hat > 0.0, "need a live tail for the negative control");

        let trivial = fake_report(BoundFamily::IidHoeffding, &grid, 2.0);
        let planted = fake_report(BoundFamily::GlynnDoeblin, &grid, 0.0);
        let rows = validate_bounds(&est, &[trivial, planted]).unwrap();
        assert!(rows[..2].iter().all(|r| r.verdict == Verdict::Pass));
        assert!(rows[2..].iter().any(|r| r.verdict == Verdict::Fail));
    }

    #[test]
    fn validation_rejects_grid_mismatches() {
        let chain = ChainModel::Finite(two_state_reference());
        let f = FunctionProfile::indicator(0);
        let start = dirac0(&chain);
        let exp =
            TailExperiment::new(chain, vec![f], 10, start, 1_000, RngStream::new(1, 1)).unwrap();
        let est = exp.empirical_tail(&[0.1, 0.2]).unwrap();
        let report = fake_report(BoundFamily::IidHoeffding, &[0.1, 0.25], 2.0);
        assert!(matches!(
            validate_bounds(&est, &[report]),
            Err(Error::IncompatibleSupports(_))
        ));
        let report = fake_report(BoundFamily::IidHoeffding, &[0.1], 2.0);
        assert!(matches!(
            validate_bounds(&est, &[report]),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn time_dep_profiles_enter_per_step() {
        // f_i = indicator(0) at even i, zero at odd i: center uses only the
        // even steps.
        let chain = ChainModel::Finite(two_state_reference());
        let space = chain.space().unwrap().clone();
        let zero = FunctionProfile::new("zero", |_| 0.0, 0.0, 0.0, 0.0, Some(0.0)).unwrap();
        let ind = FunctionProfile::indicator(0);
        let fs: Vec<FunctionProfile> = (0..6)
            .map(|i| if i % 2 == 0 { ind.clone() } else { zero.clone() })
            .collect();
        let start = DiscreteMeasure::dirac_indexed(space, 0).unwrap();
        let exp =
            TailExperiment::new(chain, fs, 6, start, 1_000, RngStream::new(4, 4)).unwrap();
        assert!((exp.center() - 3.0 * 2.0 / 3.0).abs() < 1e-9);
    }
}

