//! Application experiments built on the bound machinery: empirical risk
//! minimization on a Markovian sample, Polyak-Ruppert averaging of constant
//! step-size SGD, and a UCB policy for rested Markovian bandits.
//!
//! Each driver runs a seeded Monte Carlo experiment against the closed-form
//! guarantee for its setting and reports the empirical rate together with an
//! exact confidence interval, so a PASS means the guarantee survived the
//! simulation and a FAIL localizes the grid point or checkpoint that broke.

mod bandit;
mod erm;
mod sgd;

pub use bandit::{
    regret_bound_check, regret_rhs, ucb_m_run, ucb_m_runs, BanditArm, BanditConfig,
    RegretCheckpoint, RegretTrace, RegretVerdict,
};
pub use erm::{ErmProblem, ErmReport};
pub use sgd::{dirac_pair_contraction, one_step_law, sgd_experiment, SgdConfig, SgdReport};

/// Two-sided 99% normal confidence half-width for a sample mean; zero when
/// fewer than two values.
fn mean_ci99(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    // z at the 99.5th percentile.
    (mean, 2.5758293035489004 * (var / n).sqrt())
}
