//! Orientation and insphere predicates with a static floating-point filter.
//!
//! Each predicate is evaluated three ways: a plain floating-point run of the
//! expression graph, the filtered predicate that trusts that run only when
//! its magnitude exceeds the certified error bound, and the exact
//! determinant used as fallback.
//!
//! The insphere determinant tests point `p_{d+1}` against the sphere through
//! `p_1 .. p_d` and the origin:
//!
//! ```text
//! | x_11      ...  x_1d      |p_1|^2     |
//! | ...                                  |
//! | x_(d+1)1  ...  x_(d+1)d  |p_(d+1)|^2 |
//! ```
//!
//! It factors as `|p_1 .. p_d| * power(p_{d+1}, S)`, see
//! [`circumsphere_through_origin`] and [`power_of_point`].

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dim::{Dim, DimError, PredicateKind, Precision};
use crate::engine;
use crate::exact::{determinant, DetMethod, ExactError, ExactScalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredicateError {
    #[error(transparent)]
    Dim(#[from] DimError),
    #[error("coordinate {0} out of [-1,1]")]
    Coordinate(f64),
    #[error("expected {expected} points, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("point of dimension {got} where dimension {expected} was expected")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("points are affinely dependent with the origin")]
    Degenerate,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A point with coordinates in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, PredicateError> {
        Dim::new(coords.len())?;
        if let Some(&bad) = coords.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
            return Err(PredicateError::Coordinate(bad));
        }
        Ok(Point { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> Dim {
        Dim::new(self.coords.len()).expect("checked on construction")
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords
    }
}

/// A sphere given by its center and squared radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Sphere {
    pub center: Vec<f64>,
    pub radius_squared: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_f64(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn of_exact(x: &ExactScalar) -> Sign {
        match x.signum() {
            1 => Sign::Positive,
            -1 => Sign::Negative,
            _ => Sign::Zero,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// How the sign of a filtered predicate was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Certificate {
    /// The floating-point value exceeded the static threshold.
    FloatCertified,
    /// The exact determinant decided the sign.
    ExactFallback,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Certificate::FloatCertified => "float",
            Certificate::ExactFallback => "exact",
        })
    }
}

/// Outcome of a filtered predicate. `sign` is always the exact sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredicateResult {
    pub sign: Sign,
    pub certificate: Certificate,
    pub float_value: f64,
    pub threshold: f64,
}

/// A predicate bound to a dimension and a floating-point format, working on
/// row-major coordinate slices. This is the allocation-light entry point
/// used by the experiments; the `Point` functions below wrap it.
#[derive(Clone, Copy, Debug)]
pub struct StaticFilter {
    kind: PredicateKind,
    dim: Dim,
    precision: Precision,
    threshold: f64,
    graph: &'static engine::ExprGraph,
}

impl StaticFilter {
    pub fn new(kind: PredicateKind, dim: Dim, precision: Precision) -> Self {
        StaticFilter {
            kind,
            dim,
            precision,
            threshold: engine::threshold(kind, dim, precision),
            graph: engine::graph(kind, dim),
        }
    }

    pub fn kind(&self) -> PredicateKind {
        self.kind
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of coordinates the predicate consumes.
    pub fn input_len(&self) -> usize {
        self.kind.arity(self.dim) * self.dim.get()
    }

    fn check(&self, coords: &[f64]) -> Result<(), PredicateError> {
        if coords.len() != self.input_len() {
            return Err(PredicateError::Arity {
                expected: self.kind.arity(self.dim),
                got: coords.len() / self.dim.get(),
            });
        }
        match coords.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
            Some(&bad) => Err(PredicateError::Coordinate(bad)),
            None => Ok(()),
        }
    }

    /// Runs the expression graph in the filter's format. In single precision
    /// the coordinates are rounded to binary32 first and every operation is
    /// a binary32 operation.
    pub fn eval_float(&self, coords: &[f64]) -> Result<f64, PredicateError> {
        self.check(coords)?;
        Ok(self.eval_float_unchecked(coords))
    }

    fn eval_float_unchecked(&self, coords: &[f64]) -> f64 {
        match self.precision {
            Precision::Double => self.graph.eval(coords),
            Precision::Single => {
                let mut buf = [0f32; 42];
                let rounded = &mut buf[..coords.len()];
                for (r, &x) in rounded.iter_mut().zip(coords) {
                    *r = x as f32;
                }
                f64::from(self.graph.eval(rounded))
            }
        }
    }

    /// Exact value of the determinant of the (format-rounded) coordinates.
    pub fn eval_exact(&self, coords: &[f64]) -> Result<ExactScalar, PredicateError> {
        self.check(coords)?;
        let rounded: Vec<f64> = coords.iter().map(|&x| self.precision.round(x)).collect();
        let d = self.dim.get();
        let rows: Vec<&[f64]> = rounded.chunks(d).collect();
        Ok(match self.kind {
            PredicateKind::Orientation => exact_orientation(&rows)?,
            PredicateKind::Insphere => exact_insphere(&rows)?,
        })
    }

    /// Filtered predicate: certified float sign, or exact fallback.
    pub fn classify(&self, coords: &[f64]) -> Result<PredicateResult, PredicateError> {
        self.check(coords)?;
        let float_value = self.eval_float_unchecked(coords);
        if float_value.abs() > self.threshold {
            return Ok(PredicateResult {
                sign: Sign::of_f64(float_value),
                certificate: Certificate::FloatCertified,
                float_value,
                threshold: self.threshold,
            });
        }
        let exact = self.eval_exact(coords)?;
        Ok(PredicateResult {
            sign: Sign::of_exact(&exact),
            certificate: Certificate::ExactFallback,
            float_value,
            threshold: self.threshold,
        })
    }
}

fn method_for(dim: usize) -> DetMethod {
    if dim <= 4 {
        DetMethod::Cofactor
    } else {
        DetMethod::Bareiss
    }
}

fn exact_row(row: &[f64]) -> Vec<ExactScalar> {
    row.iter().map(|&x| ExactScalar::from_finite(x, 1)).collect()
}

fn squared_norm(row: &[ExactScalar]) -> ExactScalar {
    let mut acc = ExactScalar::zero(2);
    for x in row {
        acc = &acc + &(x * x);
    }
    acc
}

pub(crate) fn exact_orientation(rows: &[&[f64]]) -> Result<ExactScalar, ExactError> {
    let m: Vec<Vec<ExactScalar>> = rows.iter().map(|r| exact_row(r)).collect();
    determinant(&m, method_for(rows.len()))
}

pub(crate) fn exact_insphere(rows: &[&[f64]]) -> Result<ExactScalar, ExactError> {
    let m: Vec<Vec<ExactScalar>> = rows
        .iter()
        .map(|r| {
            let mut row = exact_row(r);
            let norm = squared_norm(&row);
            row.push(norm);
            row
        })
        .collect();
    determinant(&m, method_for(rows.len() - 1))
}

fn flatten(points: &[Point], kind: PredicateKind) -> Result<(Dim, Vec<f64>), PredicateError> {
    let first = points.first().ok_or(PredicateError::Arity { expected: 2, got: 0 })?;
    let dim = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != dim) {
        return Err(PredicateError::DimensionMismatch { expected: dim.get(), got: p.dim().get() });
    }
    let expected = kind.arity(dim);
    if points.len() != expected {
        return Err(PredicateError::Arity { expected, got: points.len() });
    }
    Ok((dim, points.iter().flat_map(|p| p.coords.iter().copied()).collect()))
}

/// `|p_1 .. p_d|` in binary64, in the analyzed operation order.
pub fn orientation_float(points: &[Point]) -> Result<f64, PredicateError> {
    let (dim, coords) = flatten(points, PredicateKind::Orientation)?;
    StaticFilter::new(PredicateKind::Orientation, dim, Precision::Double).eval_float(&coords)
}

/// The insphere determinant evaluated in `precision`, in the analyzed order.
pub fn insphere_float(points: &[Point], precision: Precision) -> Result<f64, PredicateError> {
    let (dim, coords) = flatten(points, PredicateKind::Insphere)?;
    StaticFilter::new(PredicateKind::Insphere, dim, precision).eval_float(&coords)
}

pub fn orientation_exact(points: &[Point]) -> Result<ExactScalar, PredicateError> {
    let (dim, coords) = flatten(points, PredicateKind::Orientation)?;
    StaticFilter::new(PredicateKind::Orientation, dim, Precision::Double).eval_exact(&coords)
}

pub fn insphere_exact(points: &[Point]) -> Result<ExactScalar, PredicateError> {
    let (dim, coords) = flatten(points, PredicateKind::Insphere)?;
    StaticFilter::new(PredicateKind::Insphere, dim, Precision::Double).eval_exact(&coords)
}

pub fn orientation_predicate(points: &[Point], precision: Precision) -> Result<PredicateResult, PredicateError> {
    let (dim, coords) = flatten(points, PredicateKind::Orientation)?;
    StaticFilter::new(PredicateKind::Orientation, dim, precision).classify(&coords)
}

pub fn insphere_predicate(points: &[Point], precision: Precision) -> Result<PredicateResult, PredicateError> {
    let (dim, coords) = flatten(points, PredicateKind::Insphere)?;
    StaticFilter::new(PredicateKind::Insphere, dim, precision).classify(&coords)
}

/// Sphere through `p_1 .. p_d` and the origin.
///
/// Solves `sum_j c_j x_ij = |p_i|^2` by Cramer's rule in binary64 and
/// returns center `c / 2` and `r^2 = |c / 2|^2`. Only an exactly singular
/// system is an error; when the floating-point denominator vanishes for a
/// regular system the ratios are taken from the exact determinants.
pub fn circumsphere_through_origin(points: &[Point]) -> Result<Sphere, PredicateError> {
    let (dim, coords) = flatten(points, PredicateKind::Orientation)?;
    let d = dim.get();
    let rows: Vec<&[f64]> = coords.chunks(d).collect();
    if exact_orientation(&rows)?.is_zero() {
        return Err(PredicateError::Degenerate);
    }
    let graph = engine::graph(PredicateKind::Orientation, dim);
    let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x * x).sum()).collect();
    let den = graph.eval(&coords);
    let mut c = Vec::with_capacity(d);
    for j in 0..d {
        let mut replaced = coords.clone();
        for (i, &n) in norms.iter().enumerate() {
            replaced[i * d + j] = n;
        }
        c.push(graph.eval(&replaced) / den);
    }
    if den == 0.0 || c.iter().any(|v| !v.is_finite()) {
        c = exact_cramer(&rows)?;
    }
    let center: Vec<f64> = c.iter().map(|v| v / 2.0).collect();
    let radius_squared = center.iter().map(|x| x * x).sum();
    Ok(Sphere { center, radius_squared })
}

fn exact_cramer(rows: &[&[f64]]) -> Result<Vec<f64>, PredicateError> {
    let d = rows.len();
    let m: Vec<Vec<ExactScalar>> = rows.iter().map(|r| exact_row(r)).collect();
    let norms: Vec<ExactScalar> = m.iter().map(|r| squared_norm(r)).collect();
    let den = determinant(&m, method_for(d))?;
    (0..d)
        .map(|j| {
            let mut r = m.clone();
            for (row, n) in r.iter_mut().zip(&norms) {
                row[j] = n.clone();
            }
            let num = determinant(&r, method_for(d))?;
            num.ratio_to_f64(&den).ok_or(PredicateError::Degenerate)
        })
        .collect()
}

/// `|p - center|^2 - r^2`: positive outside the sphere, negative inside.
pub fn power_of_point(p: &Point, s: &Sphere) -> f64 {
    debug_assert_eq!(p.coords.len(), s.center.len());
    let dist: f64 = p.coords.iter().zip(&s.center).map(|(x, c)| (x - c) * (x - c)).sum();
    dist - s.radius_squared
}

/// General insphere test for `d + 2` points: the sign of the lifted
/// determinant of `p_1 .. p_{d+1}` translated so that the last point `q`
/// is the origin. Exact only; translated coordinates can leave
/// `[-1, 1]`, so no static filter applies.
pub fn insphere_general_exact(points: &[Point]) -> Result<Sign, PredicateError> {
    let first = points.first().ok_or(PredicateError::Arity { expected: 3, got: 0 })?;
    let d = first.dim().get();
    if let Some(p) = points.iter().find(|p| p.dim().get() != d) {
        return Err(PredicateError::DimensionMismatch { expected: d, got: p.dim().get() });
    }
    if points.len() != d + 2 {
        return Err(PredicateError::Arity { expected: d + 2, got: points.len() });
    }
    let q = exact_row(&points[d + 1].coords);
    let m: Vec<Vec<ExactScalar>> = points[..=d]
        .iter()
        .map(|p| {
            let mut row: Vec<ExactScalar> = exact_row(&p.coords).iter().zip(&q).map(|(x, o)| x - o).collect();
            let norm = squared_norm(&row);
            row.push(norm);
            row
        })
        .collect();
    Ok(Sign::of_exact(&determinant(&m, method_for(d))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> Vec<Point> {
        rows.iter().map(|r| Point::new(r.to_vec()).unwrap()).collect()
    }

    #[test]
    fn identity_orientation() {
        let p = pts(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(orientation_float(&p).unwrap(), 1.0);
        let r = orientation_predicate(&p, Precision::Double).unwrap();
        assert_eq!((r.sign, r.certificate), (Sign::Positive, Certificate::FloatCertified));
    }

    #[test]
    fn repeated_point_falls_back_to_exact_zero() {
        let p = pts(&[&[0.3, 0.7], &[0.3, 0.7]]);
        assert_eq!(orientation_float(&p).unwrap(), 0.0);
        let r = orientation_predicate(&p, Precision::Double).unwrap();
        assert_eq!((r.sign, r.certificate), (Sign::Zero, Certificate::ExactFallback));
    }

    #[test]
    fn cospherical_3d_is_exact_zero() {
        // (1,0,0), (0,1,0), (0,0,1), (1,1,0) and the origin lie on the
        // sphere centered at (1/2, 1/2, 1/2).
        let p = pts(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        let r = insphere_predicate(&p, Precision::Double).unwrap();
        assert_eq!((r.sign, r.certificate), (Sign::Zero, Certificate::ExactFallback));
        assert!(r.float_value.abs() <= r.threshold);
    }

    #[test]
    fn far_from_threshold_is_certified() {
        let p = pts(&[&[0.9, 0.1, -0.2], &[-0.3, 0.8, 0.1], &[0.2, -0.4, 0.9], &[-0.7, -0.6, -0.5]]);
        let r = insphere_predicate(&p, Precision::Double).unwrap();
        assert_eq!(r.certificate, Certificate::FloatCertified);
        assert_eq!(r.sign, Sign::of_exact(&insphere_exact(&p).unwrap()));
    }

    #[test]
    fn insphere_1d_direct_formula() {
        let (a, b) = (0.625, -0.375);
        let p = pts(&[&[a], &[b]]);
        assert_eq!(insphere_float(&p, Precision::Double).unwrap(), a * b * b - b * a * a);
    }

    #[test]
    fn insphere_2d_sign_matches_exact() {
        // Sphere through (1,0), (0,1) and the origin contains (-1, 0)? No:
        // center (1/2, 1/2), r^2 = 1/2, |(-1,0) - c|^2 = 2.5 > 0.5.
        let p = pts(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0]]);
        let f = insphere_float(&p, Precision::Double).unwrap();
        let e = insphere_exact(&p).unwrap();
        assert_eq!(Sign::of_f64(f), Sign::of_exact(&e));
        assert_eq!(Sign::of_f64(f), Sign::Positive);
        assert_eq!(f, 2.0);
    }

    #[test]
    fn circle_through_origin() {
        let s = circumsphere_through_origin(&pts(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(s.center, vec![0.5, 0.5]);
        assert_eq!(s.radius_squared, 0.5);
        let origin = Point::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(power_of_point(&origin, &s), 0.0);
    }

    #[test]
    fn power_inside_unit_sphere() {
        let s = Sphere { center: vec![0.0; 3], radius_squared: 1.0 };
        assert_eq!(power_of_point(&Point::new(vec![0.5, 0.0, 0.0]).unwrap(), &s), -0.75);
    }

    #[test]
    fn degenerate_circumsphere() {
        let err = circumsphere_through_origin(&pts(&[&[0.5, 0.25], &[-0.5, -0.25]])).unwrap_err();
        assert_eq!(err, PredicateError::Degenerate);
    }

    #[test]
    fn nearly_degenerate_circumsphere_is_returned() {
        let eps = 2f64.powi(-40);
        let s = circumsphere_through_origin(&pts(&[&[1.0, 0.0], &[1.0, eps]])).unwrap();
        // The exact solution is c = (1, eps), center (1/2, eps/2); binary64
        // loses eps^2 in |p_2|^2, which only moves the center by O(eps).
        assert_eq!(s.center[0], 0.5);
        assert!((s.center[1] - eps / 2.0).abs() <= eps);
    }

    #[test]
    fn errors() {
        assert_eq!(Point::new(vec![1.5, 0.0]).unwrap_err().to_string(), "coordinate 1.5 out of [-1,1]");
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![0.0; 7]).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
        let p = pts(&[&[1.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(matches!(orientation_float(&p), Err(PredicateError::DimensionMismatch { .. })));
        let p = pts(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(insphere_float(&p, Precision::Double), Err(PredicateError::Arity { expected: 3, got: 2 })));
    }

    #[test]
    fn single_precision_rounds_inputs() {
        let f = StaticFilter::new(PredicateKind::Orientation, Dim::new(1).unwrap(), Precision::Single);
        let x = 1.0 / 3.0;
        assert_eq!(f.eval_float(&[x]).unwrap(), f64::from(x as f32));
        assert_eq!(f.eval_exact(&[x]).unwrap().to_f64(), f64::from(x as f32));
    }

    #[test]
    fn general_insphere_translates_exactly() {
        // Unit circle around (0.5, 0): (1.5, 0) is out of range, so use the
        // circle through (0,0), (1,0), (0.5,0.5) and test (0.5, -0.5) on it,
        // with the origin-free reference point (0.5, 0.5).
        let p = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, -0.5], &[0.5, 0.5]]);
        assert_eq!(insphere_general_exact(&p).unwrap(), Sign::Zero);
        let p = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, 0.0], &[0.5, 0.5]]);
        assert_ne!(insphere_general_exact(&p).unwrap(), Sign::Zero);
    }
}
