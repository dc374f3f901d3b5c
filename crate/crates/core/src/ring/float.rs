use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{split_signed_terms, RadicalPolicy, RingError, Scalar};

const REL_TOL: f64 = 1e-9;

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= REL_TOL * scale.max(1.0)
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn try_inv(&self) -> Result<Self, RingError> {
        if *self == 0.0 {
            Err(RingError::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }

    fn try_sqrt(&self, _policy: &RadicalPolicy) -> Result<Self, RingError> {
        if *self < 0.0 {
            Err(RingError::NoSquareRoot { value: self.to_string() })
        } else {
            Ok(self.sqrt())
        }
    }

    fn to_rational(&self) -> Option<BigRational> {
        None
    }

    fn is_exact() -> bool {
        false
    }

    fn approx_eq(&self, other: &Self) -> bool {
        close(*self, *other, self.abs().max(other.abs()))
    }

    fn backend_name() -> &'static str {
        "f64"
    }

    fn to_text(&self) -> String {
        format!("{self:e}")
    }

    fn from_text(s: &str) -> Result<Self, RingError> {
        if let Ok(r) = super::parse_rational(s) {
            return Ok(rational_to_f64(&r));
        }
        s.trim().parse().map_err(|_| RingError::Parse(s.to_string()))
    }
}

/// Complex double with tolerant comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexFloat(pub Complex64);

impl ComplexFloat {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexFloat(Complex64::new(re, im))
    }
}

impl Zero for ComplexFloat {
    fn zero() -> Self {
        ComplexFloat(Complex64::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for ComplexFloat {
    fn one() -> Self {
        ComplexFloat(Complex64::one())
    }
}

impl Add for ComplexFloat {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ComplexFloat(self.0 + rhs.0)
    }
}

impl Sub for ComplexFloat {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ComplexFloat(self.0 - rhs.0)
    }
}

impl Mul for ComplexFloat {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        ComplexFloat(self.0 * rhs.0)
    }
}

impl Neg for ComplexFloat {
    type Output = Self;
    fn neg(self) -> Self {
        ComplexFloat(-self.0)
    }
}

impl Scalar for ComplexFloat {
    fn from_rational(r: &BigRational) -> Self {
        ComplexFloat::new(rational_to_f64(r), 0.0)
    }

    fn try_inv(&self) -> Result<Self, RingError> {
        if self.0.is_zero() {
            Err(RingError::DivisionByZero)
        } else {
            Ok(ComplexFloat(self.0.inv()))
        }
    }

    fn try_sqrt(&self, _policy: &RadicalPolicy) -> Result<Self, RingError> {
        Ok(ComplexFloat(self.0.sqrt()))
    }

    fn to_rational(&self) -> Option<BigRational> {
        None
    }

    fn is_exact() -> bool {
        false
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = self.0.norm().max(other.0.norm());
        close(self.0.re, other.0.re, scale) && close(self.0.im, other.0.im, scale)
    }

    fn backend_name() -> &'static str {
        "complex-f64"
    }

    fn to_text(&self) -> String {
        if self.0.im == 0.0 {
            format!("{:e}", self.0.re)
        } else {
            let sign = if self.0.im < 0.0 { '-' } else { '+' };
            format!("{:e} {sign} {:e}*i", self.0.re, self.0.im.abs())
        }
    }

    fn from_text(s: &str) -> Result<Self, RingError> {
        let mut acc = ComplexFloat::zero();
        for (negative, term) in split_signed_terms(s)? {
            let (body, imaginary) = match term.strip_suffix("*i") {
                Some(b) => (b, true),
                None if term == "i" => ("1", true),
                None => (term.as_str(), false),
            };
            let mut v = f64::from_text(body)?;
            if negative {
                v = -v;
            }
            acc = acc + if imaginary { ComplexFloat::new(0.0, v) } else { ComplexFloat::new(v, 0.0) };
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_sqrt_of_negative() {
        let x = ComplexFloat::new(-3.0, 0.0);
        let r = x.try_sqrt(&RadicalPolicy::RationalOnly).unwrap();
        assert!((r * r).approx_eq(&x));
    }

    #[test]
    fn text_round_trip() {
        let x = ComplexFloat::new(0.5, -1.25e-3);
        let y = ComplexFloat::from_text(&x.to_text()).unwrap();
        assert!(x.approx_eq(&y));
        assert!(ComplexFloat::from_text("2 + i").unwrap().approx_eq(&ComplexFloat::new(2.0, 1.0)));
    }
}
