//! Filtered insphere tests on a few hand-picked configurations.

use certpred::predicates::{insphere_predicate, orientation_predicate};
use certpred::{Point, Precision};

fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec()).expect("coordinates in [-1, 1]")
}

fn main() {
    let cases: Vec<(&str, Vec<Point>)> = vec![
        ("query well inside", vec![p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[0.0, 0.0, 1.0]), p(&[0.2, 0.2, 0.2])]),
        ("query well outside", vec![p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[0.0, 0.0, 1.0]), p(&[-0.5, -0.5, 0.0])]),
        ("cospherical", vec![p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[0.0, 0.0, 1.0]), p(&[1.0, 1.0, 0.0])]),
        (
            "one ulp off the sphere",
            vec![p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[0.0, 0.0, 1.0]), p(&[1.0, 1.0, f64::EPSILON])],
        ),
    ];
    for precision in [Precision::Double, Precision::Single] {
        println!("{precision}-bit filter");
        for (name, pts) in &cases {
            let r = insphere_predicate(pts, precision).unwrap();
            println!(
                "  {name:<24} sign {:+}  via {:<5}  float {:+.3e}  threshold {:.3e}",
                r.sign.as_i8(),
                r.certificate,
                r.float_value,
                r.threshold
            );
        }
    }

    let r = orientation_predicate(&[p(&[1.0, 0.0]), p(&[0.0, 1.0])], Precision::Double).unwrap();
    println!("2D orientation of the unit basis: {:+} ({})", r.sign.as_i8(), r.certificate);
}
