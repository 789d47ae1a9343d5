//! Exact dyadic arithmetic and determinants on floating-point inputs.

use certpred::exact::{determinant, DetMethod, ExactScalar};

fn main() {
    let tenth = ExactScalar::from_f64(0.1).unwrap();
    let square = &tenth * &tenth;
    println!("0.1 is exactly {} x 2^{}", tenth.mantissa(), tenth.exponent());
    println!("0.1 * 0.1 rounds to {:e}; exactly it is {} x 2^{}", square.to_f64(), square.mantissa(), square.exponent());
    println!("exact square vs binary64 product: {:?}", square.cmp_abs_f64(0.1 * 0.1));

    // Rows that are proportional in exact arithmetic but not after rounding.
    let a = [0.1, 0.3, 0.45];
    let rows: Vec<Vec<ExactScalar>> = [a.to_vec(), a.iter().map(|x| x * 2.0).collect(), vec![0.5, -0.25, 1.0]]
        .iter()
        .map(|r| r.iter().map(|&x| ExactScalar::from_f64(x).unwrap()).collect())
        .collect();
    for method in [DetMethod::Cofactor, DetMethod::Bareiss] {
        let det = determinant(&rows, method).unwrap();
        println!("{method:?}: determinant sign {}", det.signum());
    }
}
