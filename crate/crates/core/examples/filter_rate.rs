//! How often the static filter falls back to exact arithmetic on random
//! 3D insphere tests, and whether any certified sign is wrong.

use certpred::bounds::failure_probability;
use certpred::mc::{run_filter_experiment, ExperimentConfig};
use certpred::{Dim, Domain, Precision};

fn main() {
    let samples = std::env::args().nth(1).map_or(200_000, |s| s.parse().expect("sample count"));
    let d3 = Dim::new(3).unwrap();
    let mut cfg = ExperimentConfig::new(d3, Domain::Cube, samples, 2024);
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    for precision in [Precision::Single, Precision::Double] {
        let o = run_filter_experiment(&cfg, precision).expect("valid configuration");
        println!(
            "{precision}-bit: {} of {} fell back (rate {:.2e} +- {:.1e}, bound {:.2e}), {} certified signs wrong",
            o.fallbacks,
            o.samples,
            o.fallback_rate,
            o.stderr,
            failure_probability(d3, precision, Domain::Cube),
            o.certified_wrong
        );
    }
}
