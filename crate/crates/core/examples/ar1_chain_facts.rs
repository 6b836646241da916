//! The decimal AR(1) chain: geometric W1 mixing next to total TV blindness.
//!
//! The chain `X' = X/10 + digit/10` (digit uniform on `{0, ..., 9}`)
//! contracts the line by a factor 10 per step, so the Wasserstein distance
//! from any start to the uniform stationary law falls like `10^-n`. But
//! the `n`-step law from a Dirac start is supported on a shifted lattice
//! that shares (almost) no atoms with the stationary grid, so total
//! variation stays saturated at 1 forever. One chain, two generators,
//! opposite verdicts: this is why concentration constants must name their
//! generator class.
//!
//! Exact laws here, no simulation: the `k`-step law of the decimal chain
//! is enumerable, and the declared stationary law is the uniform grid at
//! resolution `10^-6` (W1 discretization error below `5e-7`).
//!
//! Run with `cargo run --example ar1_chain_facts`.

use markov_hoeffding::chains::ChainModel;
use markov_hoeffding::ipm::{tv_distance, w1_distance_1d};
use markov_hoeffding::measure::DiscreteMeasure;
use markov_hoeffding::rng::RngStream;

fn main() {
    let chain = ChainModel::ar1(6).unwrap();
    let pi = chain.stationary_distribution(&RngStream::new(1, 0)).unwrap();

    println!("  x      n   W1(P^n(x,.), pi)   10^-n + grid    TV          1 - coincidence");
    for &x in &[0.0, 0.13, 0.5, 0.99] {
        let start = DiscreteMeasure::dirac_real(x);
        for n in 1..=5usize {
            let law = chain.k_step_distribution(&start, n).unwrap();
            let w1 = w1_distance_1d(&law, &pi).unwrap().value;
            let tv = tv_distance(&law, &pi).unwrap().value;
            let cap = 10f64.powi(-(n as i32)) + 5e-7;

            // The n-step law is uniform on the lattice x/10^n + j/10^n.
            // When x/10^n lands on the 10^-6 stationary grid, the 10^n
            // lattice atoms each share 10^-6 of stationary mass and the
            // exact TV is 1 - 10^(n-6); off the grid it is exactly 1.
            let micro = (x * 1e6).round() as u64;
            let on_grid = micro % 10u64.pow(n as u32) == 0;
            let expected_tv =
                if on_grid { 1.0 - 10f64.powi(n as i32 - 6) } else { 1.0 };
            println!(
                "{x:5.2}  {n:3}   {w1:<18.12} {cap:<15.12} {tv:<11.6} {expected_tv:.6}"
            );
            assert!(w1 <= cap, "W1 {w1} above {cap} at x = {x}, n = {n}");
            assert!((tv - expected_tv).abs() < 1e-9, "TV {tv} vs {expected_tv}");
            assert!(tv >= 0.9 - 1e-9, "TV stays saturated up to discretization");
        }
    }
    println!("\nW1 forgets the start geometrically; TV never forgets a lattice shift.");
}
