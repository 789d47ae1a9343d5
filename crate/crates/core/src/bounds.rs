//! Closed-form tail bounds for random orientation and insphere values.
//!
//! For `d + 1` points drawn uniformly from the unit ball `B_d` or the cube
//! `C_d = [-1, 1]^d`, these bound the probability that a predicate value is
//! at most `V` in absolute value. Evaluated at a filter threshold they bound
//! the rate at which the static filter has to fall back to exact arithmetic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dim::{Dim, Precision};
use crate::engine;

/// Sampling domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Unit ball `B_d`.
    Ball,
    /// Cube `[-1, 1]^d`.
    Cube,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Ball => "ball",
            Domain::Cube => "cube",
        })
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ball" => Ok(Domain::Ball),
            "cube" => Ok(Domain::Cube),
            _ => Err(format!("domain must be 'ball' or 'cube', got '{s}'")),
        }
    }
}

/// Volume of the unit ball in dimension `d` (with `v_0 = 1`).
pub fn ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// Density constant of the orientation determinant for points in the ball:
/// `sigma_d = d v_{d-1}^d / v_d^{d-1}`.
pub fn sigma(dim: Dim) -> f64 {
    let d = dim.get();
    d as f64 * ball_volume(d - 1).powi(d as i32) / ball_volume(d).powi(d as i32 - 1)
}

/// Density constant for points in the cube:
/// `psi_d = d v_d v_{d-1}^d d^(d(d-1)/2) / 2^(d^2)`.
pub fn psi(dim: Dim) -> f64 {
    let d = dim.get();
    let di = d as i32;
    d as f64 * ball_volume(d) * ball_volume(d - 1).powi(di) * (d as f64).powi(di * (di - 1) / 2)
        / 2f64.powi(di * di)
}

/// `(d, v_d, sigma_d, psi_d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticConstants {
    pub dim: Dim,
    pub ball_volume: f64,
    pub sigma: f64,
    pub psi: f64,
}

impl AnalyticConstants {
    pub fn new(dim: Dim) -> Self {
        AnalyticConstants { dim, ball_volume: ball_volume(dim.get()), sigma: sigma(dim), psi: psi(dim) }
    }
}

/// Density constant `A` of the orientation value: `P(V <= |det| <= V + dV) <= A dV`.
pub fn orientation_density(dim: Dim, domain: Domain) -> f64 {
    match domain {
        Domain::Ball => sigma(dim),
        Domain::Cube => psi(dim),
    }
}

/// Constant `B` of the power of a random point: `P(|power| <= V) <= B V`,
/// `d` in the ball and `d v_d / 2^d` in the cube.
pub fn power_constant(dim: Dim, domain: Domain) -> f64 {
    let d = dim.get();
    match domain {
        Domain::Ball => d as f64,
        Domain::Cube => d as f64 * ball_volume(d) / 2f64.powi(d as i32),
    }
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Bound on `P(|p_1 .. p_d| <= V)`, clamped to `[0, 1]`.
pub fn orientation_tail(dim: Dim, v: f64, domain: Domain) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    clamp01(orientation_density(dim, domain) * v)
}

/// Bound on `P(|power(p, S)| <= V)` for a fixed sphere, clamped to `[0, 1]`.
pub fn power_tail(dim: Dim, v: f64, domain: Domain) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    clamp01(power_constant(dim, domain) * v)
}

/// Bound on `P(ab <= V)` when `P(V <= a <= V + dV) <= A dV` and
/// `P(b <= V | a) <= B V`: `(A + B) V + A B V ln(1/V)`.
///
/// This is the raw bound, not clamped; `V` should lie in `(0, 1]` and
/// `V <= 0` yields 0.
pub fn product_tail(a: f64, b: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    (a + b) * v + a * b * v * (1.0 / v).ln()
}

/// The dimension-one constant `17 * 2^(1/3) / 4`.
pub fn interval_constant() -> f64 {
    17.0 * 2f64.cbrt() / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TailShape {
    /// `log_coeff V ln(1/V) + linear_coeff V`.
    NearLinear { log_coeff: f64, linear_coeff: f64 },
    /// `coeff V^exponent`.
    Power { coeff: f64, exponent: f64 },
}

/// Bound on `P(|insphere| <= V)` for `d + 1` uniform points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound {
    pub dim: Dim,
    pub domain: Domain,
    pub shape: TailShape,
}

impl TailBound {
    pub fn insphere(dim: Dim, domain: Domain) -> Self {
        let shape = if dim.get() == 1 {
            TailShape::Power { coeff: interval_constant(), exponent: 2.0 / 3.0 }
        } else {
            let a = orientation_density(dim, domain);
            let b = power_constant(dim, domain);
            TailShape::NearLinear { log_coeff: a * b, linear_coeff: a + b }
        };
        TailBound { dim, domain, shape }
    }

    /// `(log_coeff, linear_coeff)` for the near-linear form.
    pub fn coefficients(&self) -> Option<(f64, f64)> {
        match self.shape {
            TailShape::NearLinear { log_coeff, linear_coeff } => Some((log_coeff, linear_coeff)),
            TailShape::Power { .. } => None,
        }
    }

    /// The bound at `V`, clamped to `[0, 1]`.
    pub fn evaluate(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let raw = match self.shape {
            TailShape::NearLinear { log_coeff, linear_coeff } => log_coeff * v * (1.0 / v).ln() + linear_coeff * v,
            TailShape::Power { coeff, exponent } => coeff * v.powf(exponent),
        };
        clamp01(raw)
    }
}

impl fmt::Display for TailBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            TailShape::NearLinear { log_coeff, linear_coeff } => {
                write!(f, "{log_coeff:.4} V ln(1/V) + {linear_coeff:.4} V")
            }
            TailShape::Power { coeff, exponent } => write!(f, "{coeff:.4} V^{exponent:.4}"),
        }
    }
}

pub fn insphere_tail(dim: Dim, v: f64, domain: Domain) -> f64 {
    TailBound::insphere(dim, domain).evaluate(v)
}

/// Probability bound that the insphere filter of `precision` falls back,
/// using the threshold derived by the error engine.
pub fn failure_probability(dim: Dim, precision: Precision, domain: Domain) -> f64 {
    insphere_tail(dim, engine::insphere_threshold(dim, precision), domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    #[test]
    fn volumes() {
        assert_eq!(ball_volume(1), 2.0);
        assert!((ball_volume(2) - PI).abs() < 1e-15);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((ball_volume(6) - PI.powi(3) / 6.0).abs() < 1e-13);
    }

    #[test]
    fn small_dimension_constants() {
        assert_eq!(sigma(dim(1)), 1.0);
        assert_eq!(psi(dim(1)), 1.0);
        assert!((sigma(dim(2)) - 8.0 / PI).abs() < 1e-15);
        assert!((psi(dim(2)) - PI).abs() < 1e-15);
        assert!((sigma(dim(3)) - 27.0 * PI / 16.0).abs() < 1e-14);
    }

    #[test]
    fn orientation_and_power_examples() {
        assert!((orientation_tail(dim(2), 0.01, Domain::Ball) - 0.08 / PI).abs() < 1e-15);
        assert_eq!(orientation_tail(dim(2), 0.0, Domain::Ball), 0.0);
        assert_eq!(orientation_tail(dim(6), 0.5, Domain::Cube), 1.0);
        assert!((power_tail(dim(3), 0.01, Domain::Ball) - 0.03).abs() < 1e-15);
        assert!((power_tail(dim(2), 0.1, Domain::Cube) - 2.0 * PI / 4.0 * 0.1).abs() < 1e-15);
    }

    #[test]
    fn product_examples() {
        assert_eq!(product_tail(0.0, 0.0, 0.5), 0.0);
        assert_eq!(product_tail(3.0, 2.0, 1.0), 5.0);
        let v = 1e-3;
        let a = sigma(dim(2));
        let expected = 2.0 * a * v * 1000f64.ln() + (a + 2.0) * v;
        assert!((product_tail(a, 2.0, v) - expected).abs() < 1e-15);
        assert!((product_tail(a, 2.0, v) - 0.0397).abs() < 5e-4);
    }

    #[test]
    fn interval_bound() {
        let b = insphere_tail(dim(1), 1e-3, Domain::Ball);
        assert!((b - 5.36e-2).abs() < 5.36e-4);
        assert_eq!(b, insphere_tail(dim(1), 1e-3, Domain::Cube));
    }

    #[test]
    fn ball_2d_coefficients() {
        let (log, lin) = TailBound::insphere(dim(2), Domain::Ball).coefficients().unwrap();
        assert!((log - 16.0 / PI).abs() < 1e-14);
        assert!((lin - (8.0 / PI + 2.0)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn dominance_after_product_lemma(a in 2.0f64..1e6, b in 2.0f64..1e6, v in 1e-300f64..0.36787944117144233) {
            prop_assert!((a + b) * v <= a * b * v * (1.0 / v).ln());
        }

        #[test]
        fn tails_are_monotone(d in 1usize..=6, v in 1e-12f64..0.36, k in 1.0f64..1.1) {
            let dim = Dim::new(d).unwrap();
            let w = (v * k).min(1.0 / std::f64::consts::E);
            for domain in [Domain::Ball, Domain::Cube] {
                prop_assert!(insphere_tail(dim, v, domain) <= insphere_tail(dim, w, domain));
                prop_assert!(orientation_tail(dim, v, domain) <= orientation_tail(dim, w, domain));
                prop_assert!(power_tail(dim, v, domain) <= power_tail(dim, w, domain));
                let t = insphere_tail(dim, v, domain);
                prop_assert!((0.0..=1.0).contains(&t));
            }
        }
    }

    #[test]
    fn tails_vanish_at_zero() {
        for d in Dim::all() {
            for domain in [Domain::Ball, Domain::Cube] {
                assert!(insphere_tail(d, 1e-300, domain) < 1e-190);
            }
        }
    }
}
