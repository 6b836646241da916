//! Polyak-Ruppert averaging of constant step-size SGD.
//!
//! With per-sample quadratic losses whose curvatures lie in `[eta, L]` and a
//! step `beta in (0, 2/L)`, every realized SGD operator contracts by
//! `alpha_T = max(|1 - beta eta|, |1 - beta L|) < 1`, so the iterate chain
//! has a unique stationary law `pi_n`. On a parameter interval of diameter
//! `diam`, the averaged iterate satisfies
//! `|theta_bar_m - E_pi_n theta| < eps` with probability at least
//! `1 - delta` once
//!
//! ```text
//! m >= 1/(4 eps^2) log(2/delta) diam^2 (2 Gamma_BL + 1)^2
//! ```
//!
//! (the one-dimensional form of the sample-complexity display; the general
//! statement carries `d_p^2` and `log(2 d_p / delta)`). The experiment here
//! runs the chain at that `m`, checks the success frequency, and certifies
//! the contraction claim itself by pushing Dirac pairs through the exact
//! one-step law.

use rayon::prelude::*;

use crate::chains::{ChainModel, SgdChain};
use crate::error::{Error, Result};
use crate::ipm::w1_distance_1d;
use crate::measure::DiscreteMeasure;
use crate::montecarlo::clopper_pearson;
use crate::rng::RngStream;
use crate::space::State;

/// Substream id reserved for the stationary-mean probe.
const PROBE_STREAM: u64 = u64::MAX;
/// Enumeration budget for the exact one-step law, `N^batch` atoms.
const MAX_BATCH_ATOMS: usize = 100_000;
/// Long-run schedule for estimating the stationary mean.
const PROBE_BURN: usize = 2_000;
const PROBE_WINDOW: usize = 200_000;

/// An averaging experiment on one SGD chain.
#[derive(Debug, Clone)]
pub struct SgdConfig {
    pub chain: SgdChain,
    /// Declared concentrability of the iterate chain in the bounded
    /// Lipschitz metric; [`SgdConfig::gamma_from_contraction`] gives the
    /// generic upper bound from the contraction rate.
    pub gamma_bl: f64,
    pub eps: f64,
    pub delta: f64,
}

/// Outcome of an averaging experiment.
#[derive(Debug, Clone)]
pub struct SgdReport {
    /// The averaging length the sample-complexity display demands.
    pub m: usize,
    pub alpha_t: f64,
    /// Long-run estimate of the stationary mean of the iterate.
    pub center: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub eps: f64,
    pub delta: f64,
    /// Whether the success frequency is statistically consistent with the
    /// guaranteed level `1 - delta` at 99%.
    pub pass: bool,
    /// Largest exact Dirac-pair W1 ratio across the check grid.
    pub max_contraction_ratio: f64,
    pub contraction_ok: bool,
    /// Per-trial deviations `|theta_bar - center|`, indexed by trial
    /// substream id.
    pub errors: Vec<f64>,
}

impl SgdConfig {
    pub fn new(chain: SgdChain, gamma_bl: f64, eps: f64, delta: f64) -> Result<Self> {
        if !(gamma_bl >= 0.0 && gamma_bl.is_finite()) {
            return Err(Error::InvalidParam(format!("gamma_bl = {gamma_bl}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParam(format!("eps = {eps} must be positive")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParam(format!("delta = {delta} outside (0, 1)")));
        }
        Ok(Self { chain, gamma_bl, eps, delta })
    }

    /// The generic concentrability bound `diam * alpha / (1 - alpha)` from
    /// one-step W1 contraction at rate `alpha`: the k-step term is at most
    /// `alpha^k diam`, summed over `k >= 1`.
    pub fn gamma_from_contraction(diam: f64, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParam(format!("contraction rate {alpha} outside [0, 1)")));
        }
        if !(diam > 0.0 && diam.is_finite()) {
            return Err(Error::InvalidParam(format!("diameter {diam}")));
        }
        Ok(diam * alpha / (1.0 - alpha))
    }

    pub fn diameter(&self) -> f64 {
        self.chain.hi - self.chain.lo
    }

    /// The smallest averaging length the display admits.
    pub fn required_m(&self) -> usize {
        let d = self.diameter();
        let g = 2.0 * self.gamma_bl + 1.0;
        let m = (2.0 / self.delta).ln() / (4.0 * self.eps * self.eps) * d * d * g * g;
        m.ceil().max(1.0) as usize
    }
}

/// The exact law of one SGD step from a Dirac at `theta`: minibatches are
/// drawn uniformly with replacement, so the `N^batch` index sequences are
/// equiprobable and each contributes its deterministic update as an atom.
pub fn one_step_law(chain: &SgdChain, theta: f64) -> Result<DiscreteMeasure> {
    let n = chain.curvatures.len();
    let mut atoms = 1usize;
    for _ in 0..chain.batch {
        atoms = atoms.saturating_mul(n);
        if atoms > MAX_BATCH_ATOMS {
            return Err(Error::SupportTooLarge { got: atoms, limit: MAX_BATCH_ATOMS });
        }
    }
    let mut batch = vec![0usize; chain.batch];
    let mut positions = Vec::with_capacity(atoms);
    for mut code in 0..atoms {
        for slot in batch.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        positions.push(chain.step_with_batch(theta, &batch));
    }
    let w = 1.0 / atoms as f64;
    DiscreteMeasure::real(positions, vec![w; atoms])
}

/// The exact one-step W1 contraction factor between Dirac starts,
/// `W1(P(t1, .), P(t2, .)) / |t1 - t2|`. Coupling the two starts through a
/// shared minibatch shows the factor never exceeds `alpha_T`.
pub fn dirac_pair_contraction(chain: &SgdChain, t1: f64, t2: f64) -> Result<f64> {
    if t1 == t2 {
        return Err(Error::InvalidParam("Dirac pair needs distinct starts".into()));
    }
    let a = one_step_law(chain, t1)?;
    let b = one_step_law(chain, t2)?;
    Ok(w1_distance_1d(&a, &b)?.value / (t1 - t2).abs())
}

/// Run the averaging experiment: estimate the stationary mean on a reserved
/// substream, then per trial run the chain from the lower endpoint for the
/// display's `m` steps and test `|theta_bar - center| < eps`. The Dirac-pair
/// contraction check runs over five equispaced starts.
pub fn sgd_experiment(config: &SgdConfig, trials: usize, stream: &RngStream) -> Result<SgdReport> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be at least 1".into()));
    }
    let chain = ChainModel::Sgd(config.chain.clone());
    let alpha_t = config.chain.contraction_rate();
    let m = config.required_m();

    let mut probe = stream.substream(PROBE_STREAM).rng();
    let mut theta = 0.5 * (config.chain.lo + config.chain.hi);
    let mut state = State::Real(theta);
    for _ in 0..PROBE_BURN {
        state = chain.step(state, &mut probe)?;
    }
    let mut sum = 0.0;
    for _ in 0..PROBE_WINDOW {
        state = chain.step(state, &mut probe)?;
        sum += state.real().expect("SGD states are real");
    }
    let center = sum / PROBE_WINDOW as f64;

    let errors: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream.substream(t).rng();
            let mut s = State::Real(config.chain.lo);
            let mut acc = config.chain.lo;
            for _ in 1..m {
                s = chain.step(s, &mut rng)?;
                acc += s.real().expect("SGD states are real");
            }
            let bar = acc / m as f64;
            Ok((bar - center).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = errors.iter().filter(|e| **e < config.eps).count();

    let mut max_ratio = 0.0f64;
    theta = config.chain.lo;
    let step = config.diameter() / 4.0;
    let grid: Vec<f64> = (0..5).map(|j| theta + j as f64 * step).collect();
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            max_ratio = max_ratio.max(dirac_pair_contraction(&config.chain, grid[i], grid[j])?);
        }
    }

    let (ci_low, ci_high) = clopper_pearson(successes as u64, trials as u64, 0.01);
    Ok(SgdReport {
        m,
        alpha_t,
        center,
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        eps: config.eps,
        delta: config.delta,
        pass: ci_high >= 1.0 - config.delta,
        max_contraction_ratio: max_ratio,
        contraction_ok: max_ratio <= alpha_t + 1e-9,
        errors,
    })
}
