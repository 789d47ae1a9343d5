//! The insphere determinant equals the orientation determinant times the
//! power of the query point with respect to the sphere through the other
//! points and the origin.

use certpred::bounds::Domain;
use certpred::mc::{sample_point, trial_rng};
use certpred::predicates::{circumsphere_through_origin, insphere_exact, orientation_exact, power_of_point};
use certpred::Point;

fn main() {
    let mut rng = trial_rng(1, 0);
    for d in 2..=4 {
        let pts: Vec<Point> = (0..=d)
            .map(|_| {
                let mut c = vec![0.0; d];
                sample_point(Domain::Ball, &mut rng, &mut c);
                Point::new(c).unwrap()
            })
            .collect();
        let delta = insphere_exact(&pts).unwrap().to_f64();
        let orient = orientation_exact(&pts[..d]).unwrap().to_f64();
        let sphere = circumsphere_through_origin(&pts[..d]).unwrap();
        let power = power_of_point(&pts[d], &sphere);
        let product = orient * power;
        println!(
            "d={d}: insphere {delta:+.12e}  orientation x power {product:+.12e}  relative gap {:.1e}",
            ((delta - product) / delta).abs()
        );
    }
}
