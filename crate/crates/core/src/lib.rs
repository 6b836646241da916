//! Concentration inequalities for Markov chains under integral probability
//! metrics, with the machinery to check them empirically.
//!
//! The toolkit revolves around one quantity: for a chain with kernel `P`,
//! stationary law `pi`, and a generator class `F` of test functions, the
//! concentrability coefficient
//!
//! ```text
//! Gamma_F = sup_x sum_{i >= 1} IPM_F( P^i(x, .), pi )
//! ```
//!
//! measures how fast the chain forgets its start, as seen through `F`. When
//! `Gamma_F` is finite, sums `S = f_0(X_0) + ... + f_{n-1}(X_{n-1})` of
//! bounded observables concentrate around `n pi(f)` at the familiar
//! `exp(-2 n eps^2 / C^2)` rate, with `C` inflated by `Gamma_F` relative to
//! the independent case. This crate computes every ingredient exactly where
//! the chain admits it and validates the resulting tail bounds against
//! simulated exceedance frequencies with confidence intervals.
//!
//! # Module map
//!
//! * [`space`], [`measure`]: finite metric spaces, discrete probability
//!   measures, alignment and canonicalization.
//! * [`observable`]: generator classes (`TV`, `W1`, `BL`, `MMD`, `L2(pi)`)
//!   and function profiles with declared analytic attributes.
//! * [`ipm`]: exact distances for each generator class (CDF sweep,
//!   transportation LP, closed forms) plus plugin estimates.
//! * [`chains`]: finite kernels, a decimal AR(1) chain with exact k-step
//!   laws, linear contractions, SGD iterate chains, Doeblin certificates.
//! * [`ergodicity`]: concentrability coefficients `Gamma_F`, per-step
//!   contraction sequences, Dobrushin coefficients.
//! * [`bounds`]: the tail bound families and their comparison.
//! * [`montecarlo`]: seeded tail-frequency experiments, Clopper-Pearson
//!   intervals, bound-versus-frequency verdict tables.
//! * [`apps`]: empirical risk minimization on a Markov sample, averaged SGD,
//!   and a rested Markov bandit with a UCB index.
//! * [`cli`]: config-file driven experiment runner behind the `mhk` binary.
//!
//! # Quick start
//!
//! Compute a concentrability coefficient and a tail bound for the two-state
//! reference kernel:
//!
//! ```
//! use markov_hoeffding::chains::{two_state_reference, ChainModel};
//! use markov_hoeffding::observable::GeneratorClass;
//! use markov_hoeffding::ergodicity::{concentrability, ConcentrabilityOptions};
//! use markov_hoeffding::rng::RngStream;
//!
//! let chain = ChainModel::Finite(two_state_reference());
//! let stream = RngStream::new(7, 0);
//! let report = concentrability(
//!     &chain,
//!     GeneratorClass::Tv,
//!     &ConcentrabilityOptions::default(),
//!     &stream,
//! ).unwrap();
//! assert!(report.gamma < 4.0);
//! ```
//!
//! Every random quantity flows from a [`rng::RngStream`], a pure function of
//! `(master_seed, stream_id)`, so results are bit-reproducible across thread
//! counts and runs.

pub mod apps;
pub mod bounds;
pub mod chains;
pub mod cli;
pub mod ergodicity;
pub mod error;
pub mod ipm;
pub mod measure;
pub mod montecarlo;
pub mod observable;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
