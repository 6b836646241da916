//! Ergodicity coefficients: per-step distances to stationarity, the
//! concentrability coefficient, its kernel-contraction variant, and
//! Dobrushin coefficients.
//!
//! For a chain with kernel `P`, stationary law `pi`, and generator class `F`,
//! the central quantity is
//!
//! ```text
//! Gamma_F = sup_x sum_{i >= 1} IPM_F( P^i(x, .), pi )
//! ```
//!
//! together with the kernel-contraction variant built from Dobrushin
//! coefficients `Delta(P^i) = sup_{x,y} TV( P^i(x, .), P^i(y, .) )`,
//!
//! ```text
//! Gamma~ = sum_{i >= 0} Delta(P^i),    Delta(P^0) = 1.
//! ```
//!
//! Chains with exact k-step laws (finite kernels, the decimal AR(1) chain)
//! get exact per-step suprema over a start grid, truncated at a horizon with
//! a geometric tail estimate fitted from the last observed decay ratio. The
//! remaining chains get a sampled route: empirical marginal laws against an
//! empirical stationary law, truncated where sampling noise swamps the decay.
//! Reports say which route produced them.

use crate::chains::{ChainModel, FiniteKernel};
use crate::error::{Error, Result};
use crate::ipm;
use crate::measure::DiscreteMeasure;
use crate::observable::GeneratorClass;
use crate::rng::RngStream;
use crate::space::State;

/// Knobs for [`concentrability`].
#[derive(Debug, Clone)]
pub struct ConcentrabilityOptions {
    /// Largest lag to evaluate. The decimal chain clamps this to 6, its
    /// exact-enumeration limit.
    pub horizon: usize,
    /// Stop once the per-step supremum falls below this.
    pub tol: f64,
    /// Sample paths per start for the sampled route.
    pub trials: usize,
    /// Starts for the supremum; defaults to every state (finite kernels),
    /// the decade lattice (decimal chain), or stationary quantiles (sampled).
    pub start_grid: Option<Vec<State>>,
    /// Stationary law override; computed from the chain when absent.
    pub pi: Option<DiscreteMeasure>,
}

impl Default for ConcentrabilityOptions {
    fn default() -> Self {
        Self { horizon: 64, tol: 1e-13, trials: 2000, start_grid: None, pi: None }
    }
}

/// The output of [`concentrability`].
#[derive(Debug, Clone)]
pub struct ErgodicityReport {
    pub generator: GeneratorClass,
    /// Truncated series plus the geometric tail estimate. Infinite when no
    /// decay could be certified inside the horizon.
    pub gamma: f64,
    /// `sum_{i >= 0} Delta(P^i)` over classical Dobrushin coefficients;
    /// computed for the TV generator on finite kernels, absent elsewhere.
    pub gamma_tilde: Option<f64>,
    /// `sup_x IPM(P^i(x, .), pi)` for lags `i = 1, 2, ...`.
    pub per_step: Vec<f64>,
    /// `Delta(P^i)` for lags `i = 0, 1, ...` when `gamma_tilde` is present.
    pub delta_seq: Vec<f64>,
    /// Number of lags actually summed.
    pub truncation_horizon: usize,
    /// The geometric tail added beyond the truncation.
    pub tail_bound: f64,
    /// Starts the supremum ran over.
    pub start_grid: Vec<State>,
    /// Whether per-step laws were exact or empirical.
    pub exact: bool,
}

/// Geometric tail estimate for a truncated positive series: fit the decay
/// ratio `r = sqrt(s_N / s_{N-2})` from the last three entries and add
/// `s_N r / (1 - r)`. Returns 0 when the series already fell below `tol` and
/// infinity when no decay is visible (r >= 1 or too few entries).
fn geometric_tail(seq: &[f64], tol: f64) -> f64 {
    let n = seq.len();
    if n == 0 {
        return 0.0;
    }
    let last = seq[n - 1];
    if last <= tol {
        return 0.0;
    }
    if n >= 3 && seq[n - 3] > 0.0 {
        let r = (last / seq[n - 3]).sqrt();
        if r < 1.0 {
            return last * r / (1.0 - r);
        }
    }
    f64::INFINITY
}

/// The concentrability coefficient of `chain` under `generator`, with the
/// route picked by the chain model (see the module docs).
pub fn concentrability(
    chain: &ChainModel,
    generator: GeneratorClass,
    opts: &ConcentrabilityOptions,
    stream: &RngStream,
) -> Result<ErgodicityReport> {
    if opts.horizon == 0 {
        return Err(Error::InvalidParam("concentrability horizon must be >= 1".into()));
    }
    match chain {
        ChainModel::Finite(kernel) => exact_finite(kernel, generator, opts, stream),
        ChainModel::Ar1Decimal { .. } => exact_decimal(chain, generator, opts, stream),
        _ => sampled(chain, generator, opts, stream),
    }
}

fn exact_finite(
    kernel: &FiniteKernel,
    g: GeneratorClass,
    opts: &ConcentrabilityOptions,
    stream: &RngStream,
) -> Result<ErgodicityReport> {
    let pi = match &opts.pi {
        Some(p) => p.clone(),
        None => ChainModel::Finite(kernel.clone()).stationary_distribution(stream)?,
    };
    let n = kernel.len();
    let starts: Vec<State> = match &opts.start_grid {
        Some(s) => s.clone(),
        None => (0..n).map(State::Finite).collect(),
    };
    if starts.is_empty() {
        return Err(Error::InvalidParam("the start grid is empty".into()));
    }
    let mut dists: Vec<Vec<f64>> = starts
        .iter()
        .map(|s| match *s {
            State::Finite(i) if i < n => {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                Ok(v)
            }
            other => Err(Error::StateOutsideSpace(format!("start {other} for a finite kernel"))),
        })
        .collect::<Result<_>>()?;

    let mut per_step = Vec::new();
    for _ in 1..=opts.horizon {
        let mut sup = 0.0f64;
        for d in &mut dists {
            *d = kernel.apply(d);
            let law = DiscreteMeasure::over_space(kernel.space().clone(), d.clone())?;
            sup = sup.max(ipm::ipm_distance(&law, &pi, g, Some(&pi))?.value);
        }
        per_step.push(sup);
        if sup < opts.tol {
            break;
        }
    }
    let tail_bound = geometric_tail(&per_step, opts.tol);
    let gamma = per_step.iter().sum::<f64>() + tail_bound;

    let (delta_seq, gamma_tilde) = if g == GeneratorClass::Tv {
        let mut seq = vec![if n > 1 { 1.0 } else { 0.0 }];
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for _ in 1..=opts.horizon {
            for row in &mut rows {
                *row = kernel.apply(row);
            }
            let d = pairwise_tv(&rows);
            seq.push(d);
            if d < opts.tol {
                break;
            }
        }
        let tail = geometric_tail(&seq[1..], opts.tol);
        let total = seq.iter().sum::<f64>() + tail;
        (seq, Some(total))
    } else {
        (Vec::new(), None)
    };

    Ok(ErgodicityReport {
        generator: g,
        gamma,
        gamma_tilde,
        truncation_horizon: per_step.len(),
        per_step,
        delta_seq,
        tail_bound,
        start_grid: starts,
        exact: true,
    })
}

fn exact_decimal(
    chain: &ChainModel,
    g: GeneratorClass,
    opts: &ConcentrabilityOptions,
    stream: &RngStream,
) -> Result<ErgodicityReport> {
    let pi = match &opts.pi {
        Some(p) => p.clone(),
        None => chain.stationary_distribution(stream)?,
    };
    let horizon = opts.horizon.min(6);
    let starts: Vec<State> = match &opts.start_grid {
        Some(s) => s.clone(),
        None => (0..10).map(|j| State::Real(j as f64 / 10.0)).collect(),
    };
    if starts.is_empty() {
        return Err(Error::InvalidParam("the start grid is empty".into()));
    }

    let mut per_step = Vec::new();
    for i in 1..=horizon {
        let mut sup = 0.0f64;
        for s in &starts {
            let x = s
                .real()
                .ok_or_else(|| Error::StateOutsideSpace(format!("start {s} for a real-line chain")))?;
            let law = chain.k_step_distribution(&DiscreteMeasure::dirac_real(x), i)?;
            sup = sup.max(ipm::ipm_distance(&law, &pi, g, Some(&pi))?.value);
        }
        per_step.push(sup);
        if sup < opts.tol {
            break;
        }
    }
    let tail_bound = geometric_tail(&per_step, opts.tol);
    let gamma = per_step.iter().sum::<f64>() + tail_bound;
    Ok(ErgodicityReport {
        generator: g,
        gamma,
        gamma_tilde: None,
        truncation_horizon: per_step.len(),
        per_step,
        delta_seq: Vec::new(),
        tail_bound,
        start_grid: starts,
        exact: true,
    })
}

fn sampled(
    chain: &ChainModel,
    g: GeneratorClass,
    opts: &ConcentrabilityOptions,
    stream: &RngStream,
) -> Result<ErgodicityReport> {
    let pi = match &opts.pi {
        Some(p) => p.clone(),
        None => chain.stationary_distribution(&stream.substream(0))?,
    };
    let starts: Vec<State> = match &opts.start_grid {
        Some(s) => s.clone(),
        None => stationary_quantile_grid(&pi)?,
    };
    if starts.is_empty() {
        return Err(Error::InvalidParam("the start grid is empty".into()));
    }

    // Marginal samples, streams keyed by (start, trial) so results do not
    // depend on evaluation order.
    let mut marginals: Vec<Vec<Vec<f64>>> = Vec::with_capacity(starts.len());
    for (gx, s) in starts.iter().enumerate() {
        let mut per_lag = vec![Vec::with_capacity(opts.trials); opts.horizon];
        for t in 0..opts.trials {
            let mut rng = stream.substream(1 + gx as u64).substream(t as u64).rng();
            let path = chain.sample_path(*s, opts.horizon, &mut rng)?;
            for (i, st) in path.iter().enumerate() {
                per_lag[i].push(st.real().ok_or_else(|| {
                    Error::StateOutsideSpace("real-line chain produced a finite state".into())
                })?);
            }
        }
        marginals.push(per_lag);
    }

    let mut per_step: Vec<f64> = Vec::new();
    for i in 0..opts.horizon {
        let mut sup = 0.0f64;
        for per_lag in &marginals {
            let emp = DiscreteMeasure::empirical_real(&per_lag[i])?;
            sup = sup.max(ipm::ipm_distance(&emp, &pi, g, Some(&pi))?.value);
        }
        // Once the sequence stops decreasing, later lags measure sampling
        // noise rather than mixing; truncate there.
        if per_step.last().is_some_and(|&prev| sup >= prev) {
            break;
        }
        per_step.push(sup);
        if sup < opts.tol {
            break;
        }
    }
    let tail_bound = geometric_tail(&per_step, opts.tol);
    let gamma = per_step.iter().sum::<f64>() + tail_bound;
    Ok(ErgodicityReport {
        generator: g,
        gamma,
        gamma_tilde: None,
        truncation_horizon: per_step.len(),
        per_step,
        delta_seq: Vec::new(),
        tail_bound,
        start_grid: starts,
        exact: false,
    })
}

/// Quantile starts (min, quartiles, max) of a real-line stationary law.
fn stationary_quantile_grid(pi: &DiscreteMeasure) -> Result<Vec<State>> {
    let mut pos = pi
        .positions_1d()
        .ok_or_else(|| Error::IncompatibleSupports("the sampled route needs a real-line law".into()))?;
    pos.sort_by(f64::total_cmp);
    let n = pos.len();
    if n == 0 {
        return Err(Error::InvalidMeasure("stationary law has no atoms".into()));
    }
    Ok([0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|q| State::Real(pos[((q * (n - 1) as f64).round()) as usize]))
        .collect())
}

/// Largest classical total variation between two rows.
fn pairwise_tv(rows: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in rows.iter().skip(i + 1) {
            let tv = 0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
            worst = worst.max(tv);
        }
    }
    worst
}

/// Classical Dobrushin coefficient of `P^m`:
/// `max_{x,y} TV( P^m(x, .), P^m(y, .) )`, in `[0, 1]`. This is the exact
/// contraction factor of `P^m` on classical TV, and it is scale-invariant,
/// so no generator-ball doubling applies. `m = 0` gives 1 (identity kernel)
/// for spaces with at least two points.
pub fn dobrushin_tv(kernel: &FiniteKernel, m: usize) -> f64 {
    if kernel.len() < 2 {
        return 0.0;
    }
    if m == 0 {
        return 1.0;
    }
    let pm = kernel.power(m);
    let rows: Vec<Vec<f64>> = (0..pm.len()).map(|i| pm.row(i).to_vec()).collect();
    pairwise_tv(&rows)
}

/// Contraction-ratio estimate over Dirac pairs:
/// `max_{x != y} IPM( P(x, .), P(y, .) ) / IPM( delta_x, delta_y )`.
///
/// For TV and W1 the supremum over all measure pairs is attained at Dirac
/// pairs, so on finite kernels (exact one-step laws) this is the exact
/// contraction coefficient; for other generators, and on sampled chains
/// (empirical one-step laws from `trials` draws per start), it is an
/// estimate from below. Errors when no pair of starts is separated under
/// the generator.
pub fn dobrushin_ipm_estimate(
    chain: &ChainModel,
    g: GeneratorClass,
    starts: &[State],
    stream: &RngStream,
    trials: usize,
) -> Result<f64> {
    if starts.len() < 2 {
        return Err(Error::InvalidParam("need at least two starts for a contraction ratio".into()));
    }
    // One-step laws, exact where the chain admits them.
    let mut laws: Vec<DiscreteMeasure> = Vec::with_capacity(starts.len());
    let mut diracs: Vec<DiscreteMeasure> = Vec::with_capacity(starts.len());
    for (k, s) in starts.iter().enumerate() {
        match (chain, *s) {
            (ChainModel::Finite(kernel), State::Finite(i)) => {
                if i >= kernel.len() {
                    return Err(Error::StateOutsideSpace(format!(
                        "start {i} in a space of {}",
                        kernel.len()
                    )));
                }
                laws.push(kernel.row_measure(i));
                diracs.push(DiscreteMeasure::dirac_indexed(kernel.space().clone(), i)?);
            }
            (ChainModel::Ar1Decimal { .. }, State::Real(x)) => {
                laws.push(chain.k_step_distribution(&DiscreteMeasure::dirac_real(x), 1)?);
                diracs.push(DiscreteMeasure::dirac_real(x));
            }
            (_, State::Real(x)) => {
                let mut rng = stream.substream(k as u64).rng();
                let mut draws = Vec::with_capacity(trials);
                for _ in 0..trials {
                    let next = chain.step(State::Real(x), &mut rng)?;
                    draws.push(next.real().expect("real-line chains stay on the line"));
                }
                laws.push(DiscreteMeasure::empirical_real(&draws)?);
                diracs.push(DiscreteMeasure::dirac_real(x));
            }
            (_, other) => {
                return Err(Error::StateOutsideSpace(format!("start {other} for this chain")));
            }
        }
    }

    let mut best: Option<f64> = None;
    for a in 0..starts.len() {
        for b in (a + 1)..starts.len() {
            let denom = ipm::ipm_distance(&diracs[a], &diracs[b], g, None)?.value;
            if denom <= 0.0 {
                continue;
            }
            let num = ipm::ipm_distance(&laws[a], &laws[b], g, None)?.value;
            let ratio = num / denom;
            best = Some(best.map_or(ratio, |v| v.max(ratio)));
        }
    }
    best.ok_or_else(|| {
        Error::InvalidParam("no pair of starts is separated under this generator".into())
    })
}
