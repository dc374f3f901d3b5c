use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rational::{gcd_i64, parse_rational, squarefree_decompose};
use super::{rational_text, split_signed_terms, RadicalPolicy, RingError, Scalar};

/// Element of a multi-quadratic extension `Q(sqrt(k1), sqrt(k2), ...)`.
///
/// Stored as a sum of rational multiples of `sqrt(k)` over squarefree
/// radicands `k`; the key `1` is the rational part and `sqrt(k)` for negative
/// `k` stands for `i*sqrt(|k|)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Surd {
    terms: BTreeMap<i64, BigRational>,
}

impl Surd {
    pub fn from_rational_value(r: BigRational) -> Self {
        let mut s = Surd::default();
        s.push(1, r);
        s
    }

    /// `c * sqrt(k)` for a squarefree integer `k`.
    pub fn radical(k: i64, c: BigRational) -> Self {
        let (sq, free) = squarefree_decompose(&BigInt::from(k));
        let mut s = Surd::default();
        s.push(free.to_i64().expect("radicand fits i64"), c * BigRational::from_integer(sq));
        s
    }

    /// `sqrt(k)` with the canonical (positive, or positive-imaginary) branch.
    pub fn sqrt_int(k: i64) -> Self {
        Self::radical(k, BigRational::one())
    }

    pub fn radicands(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.keys().copied().filter(|&k| k != 1)
    }

    pub fn coefficient(&self, radicand: i64) -> BigRational {
        self.terms.get(&radicand).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_rational(&self) -> bool {
        self.radicands().next().is_none()
    }

    /// Complex approximation, used only for display and float cross-checks.
    pub fn to_complex(&self) -> num_complex::Complex64 {
        let mut z = num_complex::Complex64::new(0.0, 0.0);
        for (&k, c) in &self.terms {
            let c = c.to_f64().unwrap_or(f64::NAN);
            let r = (k.unsigned_abs() as f64).sqrt();
            if k < 0 {
                z.im += c * r;
            } else {
                z.re += c * r;
            }
        }
        z
    }

    fn push(&mut self, k: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    fn basis_product(a: i64, b: i64) -> (i64, BigRational) {
        let g = gcd_i64(a, b);
        let k = (a / g) * (b / g);
        let mut c = BigRational::from_integer(BigInt::from(g));
        if a < 0 && b < 0 {
            c = -c;
        }
        (k, c)
    }

    /// A generator of the field spanned by the radicands: `-1` when any
    /// radicand is negative, else the smallest prime dividing one of them.
    fn generator(&self) -> Option<i64> {
        let keys: Vec<i64> = self.radicands().collect();
        if keys.is_empty() {
            return None;
        }
        if keys.iter().any(|&k| k < 0) {
            return Some(-1);
        }
        keys.iter().map(|&k| smallest_prime_factor(k)).min()
    }

    /// Split as `a + b*sqrt(g)` where neither part involves `g`.
    fn split(&self, g: i64) -> (Surd, Surd) {
        let mut a = Surd::default();
        let mut b = Surd::default();
        for (&k, c) in &self.terms {
            let contains = if g == -1 { k < 0 } else { k % g == 0 };
            if contains {
                b.push(k / g, c.clone());
            } else {
                a.push(k, c.clone());
            }
        }
        (a, b)
    }
}

fn smallest_prime_factor(k: i64) -> i64 {
    let n = k.abs();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 1;
    }
    n
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::from_rational_value(BigRational::one())
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        self.add_ref(&rhs)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self.sub_ref(&rhs)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        self.mul_ref(&rhs)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(mut self) -> Surd {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Scalar for Surd {
    fn from_rational(r: &BigRational) -> Self {
        Surd::from_rational_value(r.clone())
    }

    fn try_inv(&self) -> Result<Self, RingError> {
        if self.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        match self.generator() {
            None => Ok(Surd::from_rational_value(self.coefficient(1).recip())),
            Some(g) => {
                let (a, b) = self.split(g);
                let gs = Surd::sqrt_int(g);
                let conj = a.sub_ref(&b.mul_ref(&gs));
                let norm = a.mul_ref(&a).sub_ref(&b.mul_ref(&b).scale(&BigRational::from_integer(g.into())));
                Ok(conj.mul_ref(&norm.try_inv()?))
            }
        }
    }

    fn try_sqrt(&self, policy: &RadicalPolicy) -> Result<Self, RingError> {
        let Some(r) = self.to_rational() else {
            return Err(RingError::NoSquareRoot { value: self.to_text() });
        };
        if r.is_zero() {
            return Ok(Surd::zero());
        }
        let pq = r.numer() * r.denom();
        let (s, k) = squarefree_decompose(&pq);
        let k = k.to_i64().ok_or_else(|| RingError::NoSquareRoot { value: self.to_text() })?;
        if !policy.permits(k) {
            return Err(if k < 0 && !policy.permits(-1) && matches!(policy, RadicalPolicy::RationalOnly) {
                RingError::NegativeUnderExactField { value: self.to_text() }
            } else {
                RingError::NoSquareRoot { value: self.to_text() }
            });
        }
        Ok(Surd::radical(k, BigRational::new(s, r.denom().clone())))
    }

    fn to_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coefficient(1))
        } else {
            None
        }
    }

    fn is_exact() -> bool {
        true
    }

    fn backend_name() -> &'static str {
        "surd"
    }

    fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        let ordered = self
            .terms
            .get(&1)
            .map(|c| (1, c))
            .into_iter()
            .chain(self.terms.iter().filter(|(k, _)| **k != 1).map(|(k, c)| (*k, c)));
        for (k, c) in ordered {
            let negative = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            if k == 1 {
                out.push_str(&rational_text(&mag));
            } else if mag.is_one() {
                out.push_str(&format!("sqrt({k})"));
            } else {
                out.push_str(&format!("{}*sqrt({k})", rational_text(&mag)));
            }
        }
        out
    }

    fn from_text(s: &str) -> Result<Self, RingError> {
        let mut acc = Surd::zero();
        for (negative, term) in split_signed_terms(s)? {
            let value = parse_term(&term).ok_or_else(|| RingError::Parse(s.to_string()))?;
            acc = if negative { acc - value } else { acc + value };
        }
        Ok(acc)
    }

    fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.push(k, c.clone());
        }
        out
    }

    fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.push(k, -c.clone());
        }
        out
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = Surd::default();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                let (k, c) = Surd::basis_product(a, b);
                out.push(k, c * ca * cb);
            }
        }
        out
    }

    fn scale(&self, r: &BigRational) -> Self {
        let mut out = Surd::default();
        for (&k, c) in &self.terms {
            out.push(k, c * r);
        }
        out
    }
}

fn parse_term(term: &str) -> Option<Surd> {
    let mut value = Surd::one();
    for factor in term.split('*') {
        let f = if let Some(inner) = factor.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
            let k: i64 = inner.parse().ok()?;
            if k == 0 {
                Surd::zero()
            } else {
                Surd::sqrt_int(k)
            }
        } else if factor == "i" {
            Surd::sqrt_int(-1)
        } else {
            Surd::from_rational_value(parse_rational(factor).ok()?)
        };
        value = value.mul_ref(&f);
    }
    Some(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rational;

    fn q(n: i64, d: i64) -> Surd {
        Surd::from_rational(&rational(n, d))
    }

    #[test]
    fn sqrt_promotion() {
        let s3 = q(3, 1).try_sqrt(&RadicalPolicy::Any).unwrap();
        assert_eq!(s3, Surd::sqrt_int(3));
        assert_eq!(q(9, 4).try_sqrt(&RadicalPolicy::RationalOnly).unwrap(), q(3, 2));
        assert!(q(3, 1).try_sqrt(&RadicalPolicy::RationalOnly).is_err());
        assert_eq!(
            q(3, 4).try_sqrt(&RadicalPolicy::Allow(vec![3])).unwrap(),
            Surd::radical(3, rational(1, 2))
        );
    }

    #[test]
    fn conjugate_product() {
        let s3 = Surd::sqrt_int(3);
        let a = Surd::one() + s3.clone();
        let b = Surd::one() - s3;
        assert_eq!(a * b, q(-2, 1));
    }

    #[test]
    fn imaginary_units() {
        let i = Surd::sqrt_int(-1);
        assert_eq!(i.clone() * i.clone(), q(-1, 1));
        let m3 = Surd::sqrt_int(-3);
        assert_eq!(i.clone() * Surd::sqrt_int(3), m3);
        assert_eq!(i * m3.clone(), -Surd::sqrt_int(3));
        assert_eq!(m3.clone() * m3, q(-3, 1));
    }

    #[test]
    fn inverse_in_biquadratic_field() {
        let x = Surd::one() + Surd::sqrt_int(3) + Surd::radical(-1, rational(2, 5)) + Surd::sqrt_int(-3);
        let y = x.try_inv().unwrap();
        assert_eq!(x * y, Surd::one());
    }

    #[test]
    fn text_round_trip() {
        let x = Surd::radical(3, rational(-3, 4)) + q(1, 2) + Surd::sqrt_int(-1);
        let text = x.to_text();
        assert_eq!(text, "1/2 + sqrt(-1) - 3/4*sqrt(3)");
        assert_eq!(Surd::from_text(&text).unwrap(), x);
    }
}
