use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{ExactError, ExactScalar};

/// Strategy for exact determinant evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetMethod {
    /// Laplace expansion down the first column, minors memoized by row set.
    Cofactor,
    /// Fraction-free Gaussian elimination on the integer matrix.
    Bareiss,
}

const MAX_COFACTOR: usize = 12;

/// Exact determinant of a square matrix of [`ExactScalar`]s.
///
/// All entries of one column must share a weight; the result weight is the
/// sum of the column weights.
pub fn determinant(rows: &[Vec<ExactScalar>], method: DetMethod) -> Result<ExactScalar, ExactError> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ExactError::NotSquare { rows: n, row: i, len: row.len() });
        }
    }
    if n == 0 {
        return Ok(ExactScalar::one(0));
    }
    let (ints, col_exp, col_weight) = integer_columns(rows)?;
    let weight: u32 = col_weight.iter().sum();
    let exp: i64 = col_exp.iter().sum();
    let det = match method {
        DetMethod::Cofactor => {
            if n > MAX_COFACTOR {
                return Err(ExactError::TooLarge(n));
            }
            cofactor(&ints)
        }
        DetMethod::Bareiss => bareiss(ints),
    };
    Ok(ExactScalar::from_parts(det, exp, weight))
}

/// Integer matrix, per-column exponents and per-column weights.
type IntegerColumns = (Vec<Vec<BigInt>>, Vec<i64>, Vec<u32>);

/// Rewrites each column over a common exponent so the matrix is integral.
fn integer_columns(rows: &[Vec<ExactScalar>]) -> Result<IntegerColumns, ExactError> {
    let n = rows.len();
    let mut col_exp = Vec::with_capacity(n);
    let mut col_weight = Vec::with_capacity(n);
    for c in 0..n {
        let w = rows[0][c].weight();
        let mut e = i64::MAX;
        for row in rows {
            if row[c].weight() != w {
                return Err(ExactError::WeightMismatch { left: w, right: row[c].weight() });
            }
            if !row[c].is_zero() {
                e = e.min(row[c].exponent());
            }
        }
        col_exp.push(if e == i64::MAX { 0 } else { e });
        col_weight.push(w);
    }
    let ints = rows
        .iter()
        .map(|row| row.iter().zip(&col_exp).map(|(v, &e)| v.with_exponent(e)).collect())
        .collect();
    Ok((ints, col_exp, col_weight))
}

/// Laplace expansion down the first column. Minors over the trailing
/// columns are built bottom-up, indexed by the bit mask of their rows.
fn cofactor(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let full = (1usize << n) - 1;
    let mut minors: Vec<BigInt> = vec![BigInt::zero(); 1 << n];
    for r in 0..n {
        minors[1 << r] = m[r][n - 1].clone();
    }
    for size in 2..=n {
        let col = n - size;
        for mask in (1..=full).filter(|k: &usize| k.count_ones() as usize == size) {
            let mut acc = BigInt::zero();
            let mut positive = true;
            for r in (0..n).filter(|r| mask & (1 << r) != 0) {
                let sub = &minors[mask & !(1 << r)];
                if !m[r][col].is_zero() && !sub.is_zero() {
                    let term = &m[r][col] * sub;
                    if positive {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                positive = !positive;
            }
            minors[mask] = acc;
        }
    }
    std::mem::take(&mut minors[full])
}

fn bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                // Exact by Sylvester's identity.
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> Vec<Vec<ExactScalar>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| ExactScalar::from_f64(x).unwrap()).collect())
            .collect()
    }

    #[test]
    fn identity_and_swap() {
        let id = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let sw = matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        for method in [DetMethod::Cofactor, DetMethod::Bareiss] {
            assert_eq!(determinant(&id, method).unwrap().signum(), 1);
            assert_eq!(determinant(&sw, method).unwrap().signum(), -1);
        }
    }

    #[test]
    fn bareiss_pivots_past_zeros() {
        let m = matrix(&[&[0.0, 0.5, 0.25], &[0.0, 0.0, 1.0], &[0.75, 0.125, 0.0]]);
        let c = determinant(&m, DetMethod::Cofactor).unwrap();
        let b = determinant(&m, DetMethod::Bareiss).unwrap();
        assert_eq!(c, b);
        assert_eq!(c.to_f64(), 0.375);
    }

    #[test]
    fn singular_matrix_is_exact_zero() {
        // Doubling is exact, so the second row is exactly twice the first.
        let m = matrix(&[&[0.1, 0.2, 0.3], &[0.2, 0.4, 0.6], &[0.7, -0.5, 0.9]]);
        assert!(determinant(&m, DetMethod::Cofactor).unwrap().is_zero());
        let m = matrix(&[&[0.1, 0.2, 0.3], &[0.2, 0.4, 0.6], &[0.2, 0.4, 0.6]]);
        assert!(determinant(&m, DetMethod::Bareiss).unwrap().is_zero());
    }

    #[test]
    fn rejects_ragged_and_mixed_columns() {
        let mut m = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        m[1].pop();
        assert!(matches!(determinant(&m, DetMethod::Cofactor), Err(ExactError::NotSquare { .. })));
        let mut m = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        m[1][1] = &m[1][1] * &m[1][1];
        assert!(matches!(determinant(&m, DetMethod::Bareiss), Err(ExactError::WeightMismatch { .. })));
    }

    #[test]
    fn result_weight_is_column_sum() {
        let a = ExactScalar::from_f64(0.5).unwrap();
        let sq = &a * &a;
        let m = vec![vec![a.clone(), sq.clone()], vec![sq.clone().mul_pow2(0), sq.clone()]];
        // Second row first column has weight 2, so this is malformed.
        assert!(determinant(&m, DetMethod::Cofactor).is_err());
        let m = vec![vec![a.clone(), sq.clone()], vec![a.clone(), sq]];
        let d = determinant(&m, DetMethod::Cofactor).unwrap();
        assert_eq!(d.weight(), 3);
        assert!(d.is_zero());
    }
}
