//! Monte Carlo validation: do the bounds actually bound?
//!
//! For the two-state reference kernel with the indicator of state 0,
//! `n = 200` steps from a stationary start, this draws 20000 seeded
//! trials, estimates `P(|S - n pi(f)| >= n eps)` with exact 99%
//! Clopper-Pearson intervals, and checks each bound family's
//! proof-consistent value against the interval's lower end. A bound
//! passes when the data cannot refute it at 99%; the verdict table is
//! the same one the `mhk validate` subcommand writes as CSV.
//!
//! Run with `cargo run --example validate_two_state` (about a second;
//! the acceptance suite repeats this at 100000 trials).

use markov_hoeffding::bounds::{BoundFamily, BoundSpec};
use markov_hoeffding::chains::{two_state_reference, ChainModel};
use markov_hoeffding::montecarlo::{validate_bounds, TailExperiment, Verdict};
use markov_hoeffding::observable::FunctionProfile;
use markov_hoeffding::rng::RngStream;

fn main() {
    let n = 200usize;
    let trials = 20_000usize;
    let eps: Vec<f64> = (1..=8).map(|k| k as f64 * 0.05).collect();
    let chain = ChainModel::Finite(two_state_reference());
    let stream = RngStream::new(42, 0);
    let pi = chain.stationary_distribution(&stream.substream(u64::MAX)).unwrap();

    let experiment = TailExperiment::new(
        chain,
        vec![FunctionProfile::indicator(0)],
        n,
        pi,
        trials,
        stream,
    )
    .unwrap();
    let estimate = experiment.empirical_tail(&eps).unwrap();

    let base = BoundSpec {
        family: BoundFamily::TimeIndep,
        n: n as u64,
        eps: eps.clone(),
        m_stretch: Some(1.0),
        m_list: None,
        gamma: Some(28.0 / 9.0),
        gamma_tilde: None,
        delta_seq: None,
        span: Some(1.0),
        span_list: None,
        sup_norm: None,
        lip: None,
        bl_norm: None,
        lambda: None,
        m_lag: None,
        mu_pi: None,
        lambda_spec: None,
    };
    let specs = vec![
        base.clone(),
        BoundSpec {
            family: BoundFamily::DoucTv,
            m_stretch: None,
            gamma: None,
            gamma_tilde: Some(10.0 / 3.0),
            mu_pi: Some(0.0),
            ..base.clone()
        },
        BoundSpec {
            family: BoundFamily::GlynnDoeblin,
            m_stretch: None,
            gamma: None,
            span: None,
            m_lag: Some(1),
            lambda: Some(0.3),
            sup_norm: Some(1.0),
            ..base.clone()
        },
        BoundSpec {
            family: BoundFamily::FanL2,
            m_stretch: None,
            gamma: None,
            span: None,
            span_list: Some(vec![1.0; n]),
            lambda_spec: Some(0.7),
            ..base
        },
    ];
    let reports: Vec<_> = specs.iter().map(|s| s.evaluate().unwrap()).collect();
    let rows = validate_bounds(&estimate, &reports).unwrap();

    println!("family         eps    p_hat       ci_low      ci_high     bound       verdict");
    for r in &rows {
        println!(
            "{:<13} {:>5.2}   {:<10.6}  {:<10.6}  {:<10.6}  {:<10.6}  {:?}",
            r.family, r.eps, r.p_hat, r.ci_low, r.ci_high, r.bound, r.verdict
        );
    }
    assert!(rows.iter().all(|r| r.verdict == Verdict::Pass));
    println!("\nall {} rows PASS at 99%", rows.len());
}
