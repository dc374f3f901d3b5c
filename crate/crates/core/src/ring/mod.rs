//! Coefficient fields.
//!
//! Every algorithm in this crate is generic over [`Scalar`]. The exact
//! backends ([`Rational`], [`Surd`], [`MarkerPoly`]) compare by identity, so
//! equality checks downstream are bit-exact; the floating backends carry a
//! comparison tolerance.

mod float;
mod marker;
mod rational;
mod surd;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use float::ComplexFloat;
pub use marker::{Monomial, MarkerPoly};
pub use rational::{
    double_factorial, factorial, parse_rational, rational, squarefree_decompose, Rational,
};
pub use surd::Surd;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("{value} has no square root in the current field")]
    NoSquareRoot { value: String },
    #[error("square root of negative value {value} requested in a real-only field")]
    NegativeUnderExactField { value: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{value} is not invertible in the marker ring (only monomials are)")]
    NotMonomial { value: String },
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

/// Which square roots a field backend may adjoin when asked for `sqrt`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum RadicalPolicy {
    /// Perfect squares only.
    #[default]
    RationalOnly,
    /// Adjoin only the listed squarefree radicands.
    Allow(Vec<i64>),
    /// Adjoin any square root of a rational number.
    Any,
}

impl RadicalPolicy {
    pub fn permits(&self, radicand: i64) -> bool {
        match self {
            RadicalPolicy::RationalOnly => radicand == 1,
            RadicalPolicy::Allow(list) => radicand == 1 || list.contains(&radicand),
            RadicalPolicy::Any => true,
        }
    }
}

/// A field element usable by the series, recursion and intersection engines.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&rational(num, den))
    }

    fn try_inv(&self) -> Result<Self, RingError>;

    fn try_div(&self, other: &Self) -> Result<Self, RingError> {
        Ok(self.mul_ref(&other.try_inv()?))
    }

    /// Square root, adjoining a radical when the backend and `policy` allow.
    fn try_sqrt(&self, policy: &RadicalPolicy) -> Result<Self, RingError>;

    /// The value as a rational number, when it is one.
    fn to_rational(&self) -> Option<BigRational>;

    fn is_exact() -> bool;

    /// Identity for exact backends, tolerance comparison for floats.
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn backend_name() -> &'static str;

    fn to_text(&self) -> String;

    fn from_text(s: &str) -> Result<Self, RingError>;

    fn add_ref(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }

    fn scale(&self, r: &BigRational) -> Self {
        self.mul_ref(&Self::from_rational(r))
    }

    fn powi(&self, n: i64) -> Result<Self, RingError> {
        let base = if n < 0 { self.try_inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul_ref(&sq);
            }
        }
        Ok(acc)
    }
}

/// `num / den` as a scalar; both integers, `den != 0`.
pub fn ratio<S: Scalar>(num: i64, den: i64) -> S {
    S::from_ratio(num, den)
}

/// Integer sign helper used by the text parsers.
pub(crate) fn split_signed_terms(s: &str) -> Result<Vec<(bool, String)>, RingError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(RingError::Parse(s));
    }
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    let mut negative = false;
    let chars: Vec<char> = s.chars().collect();
    for (idx, &c) in chars.iter().enumerate() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth -= 1;
                current.push(c);
            }
            '+' | '-' if depth == 0 => {
                // exponent sign of a decimal like 1e-5 stays in the term
                let prev = if idx > 0 { Some(chars[idx - 1]) } else { None };
                if matches!(prev, Some('e') | Some('E')) && !current.is_empty() {
                    current.push(c);
                    continue;
                }
                if matches!(prev, Some('^')) {
                    current.push(c);
                    continue;
                }
                if current.is_empty() {
                    if idx != 0 {
                        return Err(RingError::Parse(s.clone()));
                    }
                } else {
                    terms.push((negative, std::mem::take(&mut current)));
                }
                negative = c == '-';
            }
            _ => current.push(c),
        }
    }
    if current.is_empty() {
        return Err(RingError::Parse(s));
    }
    terms.push((negative, current));
    Ok(terms)
}

pub(crate) fn rational_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn is_negative(r: &BigRational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_splitting() {
        let t = split_signed_terms("1/2-3/4*sqrt(3)").unwrap();
        assert_eq!(t, vec![(false, "1/2".into()), (true, "3/4*sqrt(3)".into())]);
        let t = split_signed_terms("-2+sqrt(-1)").unwrap();
        assert_eq!(t, vec![(true, "2".into()), (false, "sqrt(-1)".into())]);
        assert!(split_signed_terms("").is_err());
        assert!(split_signed_terms("1+").is_err());
    }

    #[test]
    fn powi_negative_exponent() {
        let x: Rational = rational(2, 3);
        assert_eq!(x.powi(-2).unwrap(), rational(9, 4));
        assert_eq!(x.powi(0).unwrap(), Rational::one());
    }
}
