#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Gaussian elimination over the rationals.
pub fn det_rational(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            let f = &m[r][col] / &p;
            if f.is_zero() {
                continue;
            }
            let (top, rest) = m.split_at_mut(r);
            for (x, p) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= &f * p;
            }
        }
    }
    det
}

/// Lifted determinant with rows `(p_i, |p_i|^2)` of row-major coordinates.
pub fn insphere_rational(coords: &[f64], d: usize) -> BigRational {
    let m = coords
        .chunks(d)
        .map(|p| {
            let mut row: Vec<BigRational> = p.iter().map(|&x| rational(x)).collect();
            let norm = row.iter().fold(BigRational::zero(), |acc, x| acc + x * x);
            row.push(norm);
            row
        })
        .collect();
    det_rational(m)
}

pub fn orientation_rational(coords: &[f64], d: usize) -> BigRational {
    det_rational(coords.chunks(d).map(|p| p.iter().map(|&x| rational(x)).collect()).collect())
}

pub fn rational_sign(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let (n, d) = (r.numer().clone(), r.denom().clone());
    // Enough bits that the quotient rounds correctly to well under a ulp.
    let shift = 200i64 + d.bits() as i64 - n.bits() as i64;
    let q: BigInt = if shift >= 0 { (n << shift as usize) / d } else { n / (d << (-shift) as usize) };
    let (sign, digits) = q.to_u64_digits();
    let mut v = 0.0f64;
    for &w in digits.iter().rev() {
        v = v * 18446744073709551616.0 + w as f64;
    }
    let v = v * 2f64.powi(-shift as i32);
    if sign == num_bigint::Sign::Minus {
        -v
    } else {
        v
    }
}

/// Uniform coordinates in `[-1, 1]`.
pub fn random_coords<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Every integer quaternion `(a, b, c, d)` with `a^2 + b^2 + c^2 + d^2 = n`.
pub fn quaternions_of_norm(n: i64) -> Vec<[i64; 4]> {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let rest = n - a * a - b * b - c * c;
                if rest < 0 {
                    continue;
                }
                let d = (rest as f64).sqrt().round() as i64;
                if d * d == rest {
                    out.push([a, b, c, d]);
                    if d != 0 {
                        out.push([a, b, c, -d]);
                    }
                }
            }
        }
    }
    out
}

/// `q x conj(q)` for the pure quaternion `x`; scales `|x|` by `|q|^2`.
pub fn rotate(q: [i64; 4], x: [i64; 3]) -> [i64; 3] {
    let [a, b, c, d] = q;
    let v = [b, c, d];
    let vv = b * b + c * c + d * d;
    let vx = b * x[0] + c * x[1] + d * x[2];
    let cross = [c * x[2] - d * x[1], d * x[0] - b * x[2], b * x[1] - c * x[0]];
    [0, 1, 2].map(|i| (a * a - vv) * x[i] + 2 * vx * v[i] + 2 * a * cross[i])
}

/// Four points on one sphere through the origin, with dyadic coordinates of
/// up to about `bits + 12` significant bits, scaled into `[-1, 1]`.
///
/// With `C = n c` and `w_i = q_i c conj(q_i)` for quaternions of norm `n`,
/// every `p_i = C + w_i` satisfies `|p_i - C| = |C|`.
pub struct CosphericalFamily {
    norms: Vec<(i64, Vec<[i64; 4]>)>,
}

impl CosphericalFamily {
    pub fn new() -> Self {
        let norms = (50..400).step_by(7).map(|n| (n, quaternions_of_norm(n))).filter(|(_, q)| q.len() >= 8).collect();
        CosphericalFamily { norms }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, bits: u32) -> Vec<f64> {
        let (n, qs) = &self.norms[rng.random_range(0..self.norms.len())];
        let lim = 1i64 << bits;
        let c = [0; 3].map(|_| rng.random_range(-lim..=lim));
        let pts: Vec<[i64; 3]> = (0..4)
            .map(|_| {
                let w = rotate(qs[rng.random_range(0..qs.len())], c);
                [0, 1, 2].map(|i| n * c[i] + w[i])
            })
            .collect();
        let max = pts.iter().flatten().map(|v| v.unsigned_abs()).max().unwrap_or(1).max(1);
        let e = 64 - (max - 1).leading_zeros() as i32;
        pts.iter().flatten().map(|&v| v as f64 * 2f64.powi(-e)).collect()
    }
}

/// Moves `x` by `k` representable values, staying inside `[-1, 1]`.
pub fn ulp_shift(mut x: f64, k: i32) -> f64 {
    for _ in 0..k.unsigned_abs() {
        let y = if k > 0 { x.next_up() } else { x.next_down() };
        if y.abs() > 1.0 {
            break;
        }
        x = y;
    }
    x
}

/// `|fl - exact| <= bound`, decided exactly.
pub fn within_bound(exact: &certpred::exact::ExactScalar, fl: f64, bound: f64) -> bool {
    use num_traits::Float;
    let (m, e, s) = fl.integer_decode();
    let v = certpred::exact::ExactScalar::from_parts(BigInt::from(m as i64 * s as i64), e as i64, exact.weight());
    let diff = exact.try_sub(&v).expect("same weight");
    diff.cmp_abs_f64(bound) != std::cmp::Ordering::Greater
}
