//! Ball volumes, density constants, tail bounds and filter failure
//! probabilities for dimensions 1 to 6.

use certpred::bounds::{failure_probability, AnalyticConstants, TailBound};
use certpred::engine::reference_threshold;
use certpred::{Dim, Domain, Precision};

fn main() {
    println!("{:>2} {:>8} {:>10} {:>14}", "d", "v_d", "sigma_d", "psi_d");
    for d in Dim::all() {
        let c = AnalyticConstants::new(d);
        println!("{:>2} {:>8.4} {:>10.4} {:>14.4}", d.get(), c.ball_volume, c.sigma, c.psi);
    }

    println!();
    for d in Dim::all() {
        for domain in [Domain::Ball, Domain::Cube] {
            println!("P(|insphere| <= V), d={} {domain}: <= {}", d.get(), TailBound::insphere(d, domain));
        }
    }

    println!();
    let d3 = Dim::new(3).unwrap();
    for precision in [Precision::Double, Precision::Single] {
        let hand = reference_threshold(precision).to_f64();
        let cube = TailBound::insphere(d3, Domain::Cube);
        println!(
            "3D cube, {precision}-bit: failure <= {:.3e} at the derived threshold, {:.3e} at the hand threshold {:.3e}",
            failure_probability(d3, precision, Domain::Cube),
            cube.evaluate(hand),
            hand
        );
    }
}
