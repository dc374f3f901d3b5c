use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{is_negative, rational_text, RadicalPolicy, RingError, Scalar};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `n!!` with the conventions `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

/// Write a nonzero integer as `s^2 * k` with `k` squarefree carrying the sign.
pub fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt) {
    assert!(!n.is_zero(), "squarefree part of zero");
    let sign = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut rest = n.abs();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= &p;
        }
        if e % 2 == 1 {
            free *= &p;
        }
        p += 1u32;
    }
    free *= rest;
    (square, free * sign)
}

/// Parse `p`, `p/q` or a finite decimal such as `-0.125` or `1.5e-3`.
pub fn parse_rational(s: &str) -> Result<Rational, RingError> {
    let s = s.trim();
    let err = || RingError::Parse(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    // decimal
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| err())?;
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(if negative { -value } else { value })
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn try_inv(&self) -> Result<Self, RingError> {
        if self.is_zero() {
            Err(RingError::DivisionByZero)
        } else {
            Ok(self.recip())
        }
    }

    fn try_sqrt(&self, _policy: &RadicalPolicy) -> Result<Self, RingError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        if is_negative(self) {
            return Err(RingError::NegativeUnderExactField { value: self.to_text() });
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Ok(BigRational::new(n, d))
        } else {
            Err(RingError::NoSquareRoot { value: self.to_text() })
        }
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn is_exact() -> bool {
        true
    }

    fn backend_name() -> &'static str {
        "rational"
    }

    fn to_text(&self) -> String {
        rational_text(self)
    }

    fn from_text(s: &str) -> Result<Self, RingError> {
        parse_rational(s)
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn scale(&self, r: &BigRational) -> Self {
        self * r
    }
}

/// Small helper: exact integer gcd on i64 values.
pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    a.unsigned_abs().gcd(&b.unsigned_abs()) as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_square_root() {
        let x = rational(9, 4);
        assert_eq!(x.try_sqrt(&RadicalPolicy::RationalOnly).unwrap(), rational(3, 2));
        assert!(matches!(
            rational(3, 1).try_sqrt(&RadicalPolicy::Any),
            Err(RingError::NoSquareRoot { .. })
        ));
        assert!(matches!(
            rational(-4, 1).try_sqrt(&RadicalPolicy::Any),
            Err(RingError::NegativeUnderExactField { .. })
        ));
    }

    #[test]
    fn double_factorial_conventions() {
        assert_eq!(double_factorial(-1), BigInt::one());
        assert_eq!(double_factorial(0), BigInt::one());
        assert_eq!(double_factorial(7), BigInt::from(105));
        assert_eq!(double_factorial(8), BigInt::from(384));
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(
            squarefree_decompose(&BigInt::from(-12)),
            (BigInt::from(2), BigInt::from(-3))
        );
        assert_eq!(squarefree_decompose(&BigInt::from(49)), (BigInt::from(7), BigInt::one()));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("-3/6").unwrap(), rational(-1, 2));
        assert_eq!(parse_rational("0.125").unwrap(), rational(1, 8));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), rational(-3, 20));
        assert_eq!(parse_rational("17").unwrap(), rational(17, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }
}
