//! Empirical `P(|insphere| <= V)` against the analytic bounds.
//!
//! Usage: `tail_experiment [dim] [samples] [seed]`

use certpred::mc::{log_log_slope, run_tail_experiment, ExperimentConfig};
use certpred::{Dim, Domain};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dim = Dim::new(args.first().map_or(2, |s| s.parse().expect("dimension"))).expect("dimension in 1..=6");
    let samples = args.get(1).map_or(200_000, |s| s.parse().expect("sample count"));
    let seed = args.get(2).map_or(7, |s| s.parse().expect("seed"));

    let mut cfg = ExperimentConfig::new(dim, Domain::Ball, samples, seed);
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let rows = run_tail_experiment(&cfg).expect("valid configuration");

    println!("{:>12} {:>12} {:>12} {:>12}", "V", "empirical", "stderr", "ball bound");
    for r in rows.iter().step_by(12) {
        println!("{:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}", r.v, r.empirical, r.stderr, r.analytic_ball);
    }
    match log_log_slope(&rows, 1e-6, 1e-2) {
        Some(s) => println!("log-log slope over [1e-6, 1e-2]: {s:.3}"),
        None => println!("too few hits for a slope; raise the sample count"),
    }
}
