//! A UCB policy for rested Markovian bandits.
//!
//! Each arm is a Markov chain that advances only when the arm is pulled,
//! with a reward read off the new state. After a warm-up that plays every
//! arm `M` times in the first `K` steps, the policy plays the `M` arms with
//! the highest indices
//!
//! ```text
//! h_i(t) = rbar_i(T_i(t)) + sqrt(L log t / T_i(t)),
//! ```
//!
//! ties going to the lowest arm index. Against the oracle that plays the
//! `M` arms with the best stationary mean rewards `eta_i = pi_i(r_i)`, the
//! expected regret obeys
//!
//! ```text
//! R(n) <= 4 L log n sum_{i>M} (eta_1 - eta_i)/(eta_M - eta_i)^2
//!         + sum_{i>M} (eta_1 - eta_i)(1 + 2 beta) M + 2 sum_i R_i Gamma_i,
//! ```
//!
//! with `beta = sum t^-2 = pi^2/6`, provided the exploration constant
//! reaches `max_i (R_i Gamma_i + sp(r_i))^2 (1/sqrt(log K) + 2 sqrt(2))^2`;
//! the same lemma bounds each suboptimal pull count by
//! `(1 + 2 beta) M + 4 L log n / (eta_M - eta_i)^2`. The checker compares
//! Monte Carlo means over seeds, not single traces, because the statements
//! bound expectations.

use rayon::prelude::*;

use super::mean_ci99;
use crate::chains::{ChainModel, FiniteKernel};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::montecarlo::expectation;
use crate::observable::FunctionProfile;
use crate::rng::RngStream;
use crate::space::State;

/// One rested arm: a chain, its reward, and the declared constants coupling
/// the reward to the chain's generator.
#[derive(Clone)]
pub struct BanditArm {
    pub chain: ChainModel,
    pub reward: FunctionProfile,
    /// Minimal stretch `R_i` of the reward into the arm's generator.
    pub r_stretch: f64,
    /// Concentrability `Gamma_i` of the arm's chain.
    pub gamma: f64,
    /// The arm's stationary law; initial states are drawn from it.
    pub pi: DiscreteMeasure,
    /// Exact stationary mean reward `eta_i = pi_i(r_i)`.
    pub eta: f64,
}

impl BanditArm {
    /// Resolve the arm's stationary law and mean reward. Finite kernels and
    /// the decimal chain carry exact laws; other chains fall back to the
    /// long-run empirical law on `probe`.
    pub fn new(
        chain: ChainModel,
        reward: FunctionProfile,
        r_stretch: f64,
        gamma: f64,
        probe: &RngStream,
    ) -> Result<Self> {
        if !(r_stretch >= 0.0 && gamma >= 0.0 && r_stretch.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "arm constants R = {r_stretch}, gamma = {gamma} must be nonnegative"
            )));
        }
        let pi = chain.stationary_distribution(probe)?;
        let eta = expectation(&pi, &reward);
        if !eta.is_finite() {
            return Err(Error::InvalidParam("stationary mean reward is not finite".into()));
        }
        Ok(Self { chain, reward, r_stretch, gamma, pi, eta })
    }
}

/// A bandit instance: arms, the number pulled per step, the exploration
/// constant, and the horizon.
#[derive(Clone)]
pub struct BanditConfig {
    pub arms: Vec<BanditArm>,
    pub m_play: usize,
    /// Exploration constant in use (auto-set to the lemma threshold unless
    /// overridden).
    pub l_explore: f64,
    /// The lemma threshold `max_i (R_i Gamma_i + sp(r_i))^2
    /// (1/sqrt(log K) + 2 sqrt(2))^2`, kept alongside the constant in use.
    pub l_threshold: f64,
    pub horizon: usize,
    /// Arm indices sorted by stationary mean reward, descending; position
    /// defines `eta_1 >= eta_2 >= ...` in the bound.
    pub order: Vec<usize>,
}

impl BanditConfig {
    pub fn new(
        arms: Vec<BanditArm>,
        m_play: usize,
        l_explore: Option<f64>,
        horizon: usize,
    ) -> Result<Self> {
        let k = arms.len();
        if m_play == 0 || k < m_play + 1 {
            return Err(Error::InvalidParam(format!(
                "need at least M + 1 = {} arms, got {k}",
                m_play + 1
            )));
        }
        if k > u16::MAX as usize {
            return Err(Error::InvalidParam(format!("{k} arms exceed the index width")));
        }
        if horizon < k {
            return Err(Error::InvalidParam(format!(
                "horizon {horizon} cannot cover the {k}-step warm-up"
            )));
        }
        let factor = {
            let f = 1.0 / (k as f64).ln().sqrt() + 2.0 * 2.0f64.sqrt();
            f * f
        };
        let l_threshold = arms
            .iter()
            .map(|a| {
                let base = a.r_stretch * a.gamma + a.reward.span();
                base * base * factor
            })
            .fold(0.0f64, f64::max);
        let l = l_explore.unwrap_or(l_threshold);
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::InvalidParam(format!("exploration constant {l}")));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| arms[b].eta.total_cmp(&arms[a].eta).then(a.cmp(&b)));
        Ok(Self { arms, m_play, l_explore: l, l_threshold, horizon, order })
    }

    /// The oracle's per-step rate: the sum of the `M` best stationary mean
    /// rewards.
    pub fn oracle_rate(&self) -> f64 {
        self.order[..self.m_play].iter().map(|&i| self.arms[i].eta).sum()
    }

    /// The reference three-arm instance: symmetric two-state kernels with
    /// second eigenvalue 0.05 and reward tables `eta_i -+ 0.025` around
    /// `eta = (0.7, 0.5, 0.3)`. The chains contract in total variation by
    /// 0.05 per step from distance 1/2, and the bounded Lipschitz metric is
    /// at most twice total variation, so `Gamma_i <= 0.05/0.95 = 1/19`;
    /// rewards have span 0.05 and bounded Lipschitz stretch
    /// `max(sup, Lip) = eta_i + 0.025`.
    pub fn three_arm_reference(horizon: usize, probe: &RngStream) -> Result<Self> {
        let mut arms = Vec::new();
        for (idx, eta) in [0.7, 0.5, 0.3].into_iter().enumerate() {
            let kernel =
                FiniteKernel::on_line(vec![vec![0.525, 0.475], vec![0.475, 0.525]])?;
            let reward =
                FunctionProfile::table(vec![eta - 0.025, eta + 0.025], kernel.space())?;
            arms.push(BanditArm::new(
                ChainModel::Finite(kernel),
                reward,
                eta + 0.025,
                0.05 / 0.95,
                &probe.substream(idx as u64),
            )?);
        }
        Self::new(arms, 1, None, horizon)
    }
}

/// One realized run of the policy.
#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub m_play: usize,
    /// The oracle's per-step rate the regret is measured against.
    pub oracle_rate: f64,
    /// Pulled arms, `m_play` entries per step, flattened in step order.
    pub pulls: Vec<u16>,
    /// Cumulative collected reward after each step.
    pub collected: Vec<f64>,
    /// Observed rewards per arm, in that arm's own pull order.
    pub rewards_by_arm: Vec<Vec<f64>>,
}

impl RegretTrace {
    pub fn horizon(&self) -> usize {
        self.collected.len()
    }

    /// The arms pulled at step `t` (1-indexed).
    pub fn arm_set(&self, t: usize) -> &[u16] {
        &self.pulls[(t - 1) * self.m_play..t * self.m_play]
    }

    /// Realized regret after `t` steps: `t * oracle_rate - collected`.
    pub fn regret_at(&self, t: usize) -> f64 {
        t as f64 * self.oracle_rate - self.collected[t - 1]
    }

    /// Pull counts per arm after `t` steps.
    pub fn counts_at(&self, t: usize, num_arms: usize) -> Vec<usize> {
        let mut counts = vec![0usize; num_arms];
        for &arm in &self.pulls[..t * self.m_play] {
            counts[arm as usize] += 1;
        }
        counts
    }
}

/// Run the policy once. Arm `i` draws its initial state and all its
/// transitions from `stream.substream(i)`, so an arm's state is a function
/// of its own pull count alone: pulling patterns, other arms, and the
/// horizon cannot perturb it.
pub fn ucb_m_run(config: &BanditConfig, stream: &RngStream) -> Result<RegretTrace> {
    let k = config.arms.len();
    let m = config.m_play;
    let mut rngs: Vec<_> = (0..k).map(|i| stream.substream(i as u64).rng()).collect();
    let mut states: Vec<State> =
        config.arms.iter().zip(&mut rngs).map(|(a, rng)| a.pi.sample(rng)).collect();
    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0f64; k];
    let mut rewards_by_arm = vec![Vec::new(); k];
    let mut pulls = Vec::with_capacity(config.horizon * m);
    let mut collected = Vec::with_capacity(config.horizon);
    let mut total = 0.0f64;
    let mut selected = Vec::with_capacity(m);
    let mut index_order: Vec<usize> = (0..k).collect();

    for t in 1..=config.horizon {
        selected.clear();
        if t <= k {
            // Warm-up: a cyclic window pulls every arm exactly m times over
            // the first k steps.
            selected.extend((0..m).map(|j| (t - 1 + j) % k));
        } else {
            let log_t = (t as f64).ln();
            let h: Vec<f64> = (0..k)
                .map(|i| sums[i] / counts[i] as f64 + (config.l_explore * log_t / counts[i] as f64).sqrt())
                .collect();
            index_order.sort_by(|&a, &b| h[b].total_cmp(&h[a]).then(a.cmp(&b)));
            selected.extend_from_slice(&index_order[..m]);
        }
        for &i in &selected {
            states[i] = config.arms[i].chain.step(states[i], &mut rngs[i])?;
            let r = config.arms[i].reward.eval(states[i]);
            counts[i] += 1;
            sums[i] += r;
            total += r;
            rewards_by_arm[i].push(r);
            pulls.push(i as u16);
        }
        collected.push(total);
    }
    Ok(RegretTrace {
        m_play: m,
        oracle_rate: config.oracle_rate(),
        pulls,
        collected,
        rewards_by_arm,
    })
}

/// Run the policy over `runs` seeds in parallel; run `j` uses
/// `stream.substream(j)`, so the collection is reproducible under any
/// thread count.
pub fn ucb_m_runs(config: &BanditConfig, runs: usize, stream: &RngStream) -> Result<Vec<RegretTrace>> {
    if runs == 0 {
        return Err(Error::InvalidParam("need at least one run".into()));
    }
    (0..runs as u64)
        .into_par_iter()
        .map(|j| ucb_m_run(config, &stream.substream(j)))
        .collect()
}

/// One checkpoint of the regret verdict.
#[derive(Debug, Clone)]
pub struct RegretCheckpoint {
    pub t: usize,
    pub mean_regret: f64,
    /// 99% normal half-width of the mean over seeds.
    pub ci_half: f64,
    pub bound_rhs: f64,
    pub regret_pass: bool,
    /// Mean pull counts per arm, in configuration order.
    pub mean_counts: Vec<f64>,
    /// Per-arm expected-pull bounds; optimal arms carry infinity.
    pub count_bounds: Vec<f64>,
    pub counts_pass: bool,
}

/// Bound verdict over a set of traces from a common configuration.
#[derive(Debug, Clone)]
pub struct RegretVerdict {
    pub l_used: f64,
    pub l_threshold: f64,
    pub l_meets_threshold: bool,
    pub beta: f64,
    pub checkpoints: Vec<RegretCheckpoint>,
    pub pass: bool,
}

/// The three horizon-independent ingredients of the regret bound: the
/// coefficient of `4 L log n`, the warm-up term, and the additive
/// `2 sum_i R_i Gamma_i`. Errors when a suboptimal arm ties `eta_M` (the
/// bound divides by that gap).
fn regret_terms(config: &BanditConfig) -> Result<(f64, f64, f64)> {
    let m = config.m_play;
    let eta: Vec<f64> = config.order.iter().map(|&i| config.arms[i].eta).collect();
    for (pos, &e) in eta.iter().enumerate().skip(m) {
        if eta[m - 1] - e <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "division by zero gap: arm at rank {} matches eta_M = {}",
                pos + 1,
                eta[m - 1]
            )));
        }
    }
    let beta = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let talon: f64 = 2.0 * config.arms.iter().map(|a| a.r_stretch * a.gamma).sum::<f64>();
    let per_log: f64 =
        eta[m..].iter().map(|&e| (eta[0] - e) / ((eta[m - 1] - e) * (eta[m - 1] - e))).sum();
    let warm: f64 =
        eta[m..].iter().map(|&e| (eta[0] - e) * (1.0 + 2.0 * beta) * m as f64).sum();
    Ok((per_log, warm, talon))
}

/// The regret bound's right-hand side at horizon `t`.
pub fn regret_rhs(config: &BanditConfig, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParam("the regret bound needs t >= 1".into()));
    }
    let (per_log, warm, talon) = regret_terms(config)?;
    Ok(4.0 * config.l_explore * (t as f64).ln() * per_log + warm + talon)
}

/// Compare mean regret and mean pull counts at each checkpoint against the
/// closed-form right-hand sides. A checkpoint passes when mean + CI stays
/// at or below the bound; single-trace excursions are expected and do not
/// fail the verdict.
pub fn regret_bound_check(
    config: &BanditConfig,
    traces: &[RegretTrace],
    checkpoints: &[usize],
) -> Result<RegretVerdict> {
    if traces.is_empty() {
        return Err(Error::InvalidParam("need at least one trace".into()));
    }
    let k = config.arms.len();
    let m = config.m_play;
    let eta: Vec<f64> = config.order.iter().map(|&i| config.arms[i].eta).collect();
    let beta = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let (per_log, warm, talon) = regret_terms(config)?;

    let mut rows = Vec::new();
    for &t in checkpoints {
        if t == 0 || t > config.horizon || traces.iter().any(|tr| tr.horizon() < t) {
            return Err(Error::InvalidParam(format!("checkpoint {t} outside the traces")));
        }
        let log_t = (t as f64).ln();
        let bound_rhs = 4.0 * config.l_explore * log_t * per_log + warm + talon;
        let regrets: Vec<f64> = traces.iter().map(|tr| tr.regret_at(t)).collect();
        let (mean_regret, ci_half) = mean_ci99(&regrets);
        let regret_pass = mean_regret + ci_half <= bound_rhs;

        let all_counts: Vec<Vec<usize>> = traces.iter().map(|tr| tr.counts_at(t, k)).collect();
        let mut mean_counts = vec![0.0f64; k];
        let mut count_bounds = vec![f64::INFINITY; k];
        let mut counts_pass = true;
        for (pos, &arm) in config.order.iter().enumerate() {
            let vals: Vec<f64> = all_counts.iter().map(|c| c[arm] as f64).collect();
            let (mean_c, ci_c) = mean_ci99(&vals);
            mean_counts[arm] = mean_c;
            if pos >= m {
                let gap = eta[m - 1] - eta[pos];
                let bound = (1.0 + 2.0 * beta) * m as f64
                    + 4.0 * config.l_explore * log_t / (gap * gap);
                count_bounds[arm] = bound;
                counts_pass &= mean_c + ci_c <= bound;
            }
        }
        rows.push(RegretCheckpoint {
            t,
            mean_regret,
            ci_half,
            bound_rhs,
            regret_pass,
            mean_counts,
            count_bounds,
            counts_pass,
        });
    }
    let pass = rows.iter().all(|r| r.regret_pass && r.counts_pass);
    Ok(RegretVerdict {
        l_used: config.l_explore,
        l_threshold: config.l_threshold,
        l_meets_threshold: config.l_explore >= config.l_threshold,
        beta,
        checkpoints: rows,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_arm(value: f64, probe: &RngStream) -> BanditArm {
        let kernel = FiniteKernel::on_line(vec![vec![1.0]]).unwrap();
        let reward = FunctionProfile::table(vec![value], kernel.space()).unwrap();
        BanditArm::new(ChainModel::Finite(kernel), reward, 0.0, 0.0, probe).unwrap()
    }

    fn symmetric_arm(eta: f64, probe: &RngStream) -> BanditArm {
        let kernel =
            FiniteKernel::on_line(vec![vec![0.525, 0.475], vec![0.475, 0.525]]).unwrap();
        let reward =
            FunctionProfile::table(vec![eta - 0.025, eta + 0.025], kernel.space()).unwrap();
        BanditArm::new(ChainModel::Finite(kernel), reward, eta + 0.025, 0.05 / 0.95, probe)
            .unwrap()
    }

    #[test]
    fn warmup_plays_every_arm_exactly_m_times() {
        let probe = RngStream::new(3, 3);
        let arms = vec![
            constant_arm(0.9, &probe),
            constant_arm(0.5, &probe),
            constant_arm(0.1, &probe),
        ];
        let config = BanditConfig::new(arms, 2, None, 3).unwrap();
        let trace = ucb_m_run(&config, &RngStream::new(4, 4)).unwrap();
        assert_eq!(trace.arm_set(1), &[0, 1]);
        assert_eq!(trace.arm_set(2), &[1, 2]);
        assert_eq!(trace.arm_set(3), &[2, 0]);
        assert_eq!(trace.counts_at(3, 3), vec![2, 2, 2]);
    }

    #[test]
    fn constant_two_arm_run_matches_the_hand_replica() {
        let probe = RngStream::new(1, 1);
        let arms = vec![constant_arm(1.0, &probe), constant_arm(0.0, &probe)];
        let config = BanditConfig::new(arms, 1, None, 20).unwrap();
        let trace = ucb_m_run(&config, &RngStream::new(8, 8)).unwrap();
        // Warm-up pulls 0 then 1; afterwards the unit-reward arm dominates
        // every index comparison, so the regret freezes at the single
        // warm-up miss.
        assert_eq!(trace.arm_set(1), &[0]);
        assert_eq!(trace.arm_set(2), &[1]);
        for t in 3..=20 {
            assert_eq!(trace.arm_set(t), &[0]);
            assert_eq!(trace.regret_at(t), 1.0);
        }
        assert_eq!(trace.oracle_rate, 1.0);
    }

    #[test]
    fn index_ties_resolve_to_the_lowest_arm() {
        let probe = RngStream::new(2, 2);
        let arms = vec![constant_arm(0.5, &probe), constant_arm(0.5, &probe)];
        // A live exploration constant makes the index depend on the pull
        // counts: equal counts tie (lowest arm wins) and the pulled arm's
        // index then dips below the other's, so pulls alternate.
        let config = BanditConfig::new(arms, 1, Some(1.0), 9).unwrap();
        let trace = ucb_m_run(&config, &RngStream::new(6, 6)).unwrap();
        for t in 1..=9 {
            assert_eq!(trace.arm_set(t), &[((t + 1) % 2) as u16], "step {t}");
        }
    }

    #[test]
    fn identical_arms_collect_the_oracle_rate_on_average() {
        let probe = RngStream::new(5, 5);
        let arms = vec![symmetric_arm(0.5, &probe), symmetric_arm(0.5, &probe)];
        let config = BanditConfig::new(arms, 1, None, 300).unwrap();
        let traces = ucb_m_runs(&config, 40, &RngStream::new(7, 0)).unwrap();
        let mean =
            traces.iter().map(|tr| tr.regret_at(300)).sum::<f64>() / traces.len() as f64;
        assert!(mean.abs() < 0.3, "mean regret {mean}");
    }

    #[test]
    fn rested_reward_streams_ignore_the_policy_context() {
        let probe = RngStream::new(11, 11);
        let shared = vec![symmetric_arm(0.7, &probe), symmetric_arm(0.5, &probe)];
        let mut extended = shared.clone();
        extended.push(symmetric_arm(0.3, &probe));
        let stream = RngStream::new(21, 0);
        let two = ucb_m_run(&BanditConfig::new(shared, 1, None, 400).unwrap(), &stream).unwrap();
        let three =
            ucb_m_run(&BanditConfig::new(extended, 1, None, 400).unwrap(), &stream).unwrap();
        for arm in 0..2 {
            let a = &two.rewards_by_arm[arm];
            let b = &three.rewards_by_arm[arm];
            let shared_len = a.len().min(b.len());
            assert!(shared_len >= 8, "arm {arm} shares only {shared_len} pulls");
            assert_eq!(a[..shared_len], b[..shared_len]);
        }
    }

    #[test]
    fn auto_exploration_matches_the_threshold_formula() {
        let config =
            BanditConfig::three_arm_reference(100, &RngStream::new(13, 13)).unwrap();
        let factor = {
            let f = 1.0 / 3.0f64.ln().sqrt() + 2.0 * 2.0f64.sqrt();
            f * f
        };
        let base = 0.725 * (0.05 / 0.95) + 0.05;
        assert!((config.l_explore - base * base * factor).abs() < 1e-12);
        assert_eq!(config.l_explore, config.l_threshold);
        assert_eq!(config.order, vec![0, 1, 2]);
        assert!((config.oracle_rate() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn regret_and_pull_counts_stay_under_the_bounds() {
        let config =
            BanditConfig::three_arm_reference(2_000, &RngStream::new(17, 17)).unwrap();
        let traces = ucb_m_runs(&config, 20, &RngStream::new(29, 0)).unwrap();
        let verdict = regret_bound_check(&config, &traces, &[100, 1_000, 2_000]).unwrap();
        assert!(verdict.l_meets_threshold);
        assert!(verdict.pass, "{:#?}", verdict.checkpoints);
        for row in &verdict.checkpoints {
            assert!(row.mean_regret < row.bound_rhs);
            assert!(row.count_bounds[0].is_infinite());
        }
    }

    #[test]
    fn zero_gaps_are_rejected_by_the_checker() {
        let probe = RngStream::new(23, 23);
        let arms = vec![symmetric_arm(0.5, &probe), symmetric_arm(0.5, &probe)];
        let config = BanditConfig::new(arms, 1, None, 10).unwrap();
        let traces = ucb_m_runs(&config, 2, &RngStream::new(31, 0)).unwrap();
        let err = regret_bound_check(&config, &traces, &[10]);
        match err {
            Err(Error::InvalidParam(msg)) => assert!(msg.contains("zero gap")),
            other => panic!("expected a zero-gap error, got {other:?}"),
        }
    }

    #[test]
    fn configuration_errors_are_rejected() {
        let probe = RngStream::new(37, 37);
        let one_arm = vec![constant_arm(0.5, &probe)];
        assert!(BanditConfig::new(one_arm, 1, None, 10).is_err());
        let arms = vec![constant_arm(0.5, &probe), constant_arm(0.4, &probe)];
        assert!(BanditConfig::new(arms.clone(), 1, None, 1).is_err());
        assert!(BanditConfig::new(arms, 1, Some(f64::NAN), 10).is_err());
    }
}
