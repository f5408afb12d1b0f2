//! Exact arithmetic in `Q(lambda)` for the Perron root `lambda` of a
//! primitive integer matrix.
//!
//! Numbers are polynomials in `lambda` reduced modulo the square-free part
//! of a characteristic polynomial. Zero tests use a gcd with the modulus and
//! a Sturm count on the isolating interval of `lambda`; signs are then read
//! off by bisecting that interval with rational interval arithmetic. No
//! floating point enters any decision.

mod field;
mod number;
mod poly;

pub use field::ModulusField;
pub use number::AlgebraicNumber;
pub use poly::Poly;

pub(crate) use number::parse_rational;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("characteristic polynomial has no real root above one")]
    NoRootAboveOne,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by a number that is zero at lambda")]
    DivisionByZero,
    #[error("interval does not isolate a single root above one")]
    BadInterval,
    #[error("cannot parse L-polynomial `{0}`")]
    Parse(String),
}

/// Characteristic polynomial `det(xI - M)` of a square integer matrix, by
/// the Faddeev-LeVerrier recurrence over the rationals.
pub fn charpoly(matrix: &[Vec<i64>]) -> Poly {
    let n = matrix.len();
    let m: Vec<Vec<BigRational>> = matrix
        .iter()
        .map(|row| row.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    // c[n] = 1; M_k = A M_{k-1} + c_{n-k+1} I; c_{n-k} = -tr(A M_k) / k
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::from_integer(BigInt::from(1));
    let mut mk = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for l in 0..n {
                    if !m[i][l].is_zero() && !mk[l][j].is_zero() {
                        acc += &m[i][l] * &mk[l][j];
                    }
                }
                next[i][j] = acc;
            }
            next[i][i] += &coeffs[n - k + 1];
        }
        // trace(A * next)
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                if !m[i][l].is_zero() {
                    tr += &m[i][l] * &next[l][i];
                }
            }
        }
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k as i64));
        mk = next;
    }
    Poly::new(coeffs)
}
