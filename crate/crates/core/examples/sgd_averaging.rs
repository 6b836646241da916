//! Polyak-Ruppert averaging of constant-step SGD as a Markov chain.
//!
//! Projected SGD on a finite pool of scalar quadratic losses with a
//! constant step is a time-homogeneous Markov chain in the iterate. Its
//! one-step map contracts every Dirac pair in W1 by at least
//! `alpha_T = max{|1 - beta eta|, |1 - beta L|}`, which makes the chain's
//! bounded-Lipschitz concentrability finite and gives a sample-complexity
//! rule for the averaged iterate: after
//!
//! ```text
//! m >= ln(2/delta) / (4 eps^2) * diam^2 * (2 Gamma_BL + 1)^2
//! ```
//!
//! averaging steps, `|theta_bar - E_pi theta|` stays below `eps` outside
//! probability `delta`. The experiment checks both claims: the exact
//! enumerated one-step laws certify the contraction factor, and seeded
//! trials certify the success frequency.
//!
//! Run with `cargo run --example sgd_averaging`.

use markov_hoeffding::apps::{dirac_pair_contraction, SgdConfig};
use markov_hoeffding::apps::sgd_experiment;
use markov_hoeffding::chains::SgdChain;
use markov_hoeffding::rng::RngStream;

fn main() {
    // Four losses with curvatures in [0.5, 2], step 0.5, iterates in [0, 1].
    let chain = SgdChain::new(
        vec![0.5, 2.0, 1.0, 1.5],
        vec![0.1, 0.9, 0.4, 0.6],
        0.5,
        2.0,
        0.5,
        1,
        0.0,
        1.0,
    )
    .unwrap();
    println!("advertised contraction alpha_T = {}", chain.contraction_rate());
    let ratio = dirac_pair_contraction(&chain, 0.0, 1.0).unwrap();
    println!("exact one-step W1 ratio from the pair (0, 1): {ratio:.6}");
    assert!(ratio <= chain.contraction_rate() + 1e-12);

    let config = SgdConfig::new(chain, 0.0, 0.1, 0.1).unwrap();
    println!("required averaging length m = {}", config.required_m());

    let report = sgd_experiment(&config, 400, &RngStream::new(99, 0)).unwrap();
    println!(
        "center {:.6}, successes {}/{} (99% CI [{:.4}, {:.4}]), \
         max contraction ratio {:.4} <= alpha_T {:.4}: {}",
        report.center,
        report.successes,
        report.trials,
        report.ci_low,
        report.ci_high,
        report.max_contraction_ratio,
        report.alpha_t,
        if report.pass && report.contraction_ok { "PASS" } else { "FAIL" },
    );
    assert!(report.pass && report.contraction_ok);
}
