use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{split_signed_terms, RadicalPolicy, RingError, Scalar};

/// A Laurent monomial in named formal markers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(BTreeMap<String, i64>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(name: &str) -> Self {
        Monomial::power(name, 1)
    }

    pub fn power(name: &str, e: i64) -> Self {
        let mut m = BTreeMap::new();
        if e != 0 {
            m.insert(name.to_string(), e);
        }
        Monomial(m)
    }

    pub fn exponent(&self, name: &str) -> i64 {
        self.0.get(name).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (k, e) in &other.0 {
            let entry = out.entry(k.clone()).or_insert(0);
            *entry += e;
            if *entry == 0 {
                out.remove(k);
            }
        }
        Monomial(out)
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(k, e)| (k.clone(), -e)).collect())
    }

    fn text(&self) -> String {
        self.0
            .iter()
            .map(|(k, e)| if *e == 1 { k.clone() } else { format!("{k}^{e}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Laurent polynomial over `S` in formal markers. Only monomials are units.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerPoly<S: Scalar> {
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Default for MarkerPoly<S> {
    fn default() -> Self {
        MarkerPoly { terms: BTreeMap::new() }
    }
}

impl<S: Scalar> MarkerPoly<S> {
    pub fn constant(c: S) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(name: &str) -> Self {
        Self::term(S::one(), Monomial::var(name))
    }

    pub fn term(c: S, m: Monomial) -> Self {
        let mut p = MarkerPoly::default();
        p.push(m, c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    /// Largest exponent of `name` over all terms (`None` for zero).
    pub fn max_degree(&self, name: &str) -> Option<i64> {
        self.terms.keys().map(|m| m.exponent(name)).max()
    }

    /// Keep only terms whose exponent of `name` equals `e`, dropping that marker.
    pub fn component(&self, name: &str, e: i64) -> Self {
        let mut out = MarkerPoly::default();
        for (m, c) in &self.terms {
            if m.exponent(name) == e {
                out.push(m.mul(&Monomial::power(name, -e)), c.clone());
            }
        }
        out
    }

    /// Substitute scalar values for some markers.
    pub fn evaluate(&self, values: &BTreeMap<String, S>) -> Result<Self, RingError> {
        let mut out = MarkerPoly::default();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Monomial::one();
            for (k, e) in m.exponents() {
                match values.get(k) {
                    Some(v) => coeff = coeff.mul_ref(&v.powi(e)?),
                    None => rest = rest.mul(&Monomial::power(k, e)),
                }
            }
            out.push(rest, coeff);
        }
        Ok(out)
    }

    fn push(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.add_ref(&c);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }
}

impl<S: Scalar> Zero for MarkerPoly<S> {
    fn zero() -> Self {
        MarkerPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Scalar> One for MarkerPoly<S> {
    fn one() -> Self {
        MarkerPoly::constant(S::one())
    }
}

impl<S: Scalar> Add for MarkerPoly<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl<S: Scalar> Sub for MarkerPoly<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.sub_ref(&rhs)
    }
}

impl<S: Scalar> Mul for MarkerPoly<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<S: Scalar> Neg for MarkerPoly<S> {
    type Output = Self;
    fn neg(self) -> Self {
        MarkerPoly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<S: Scalar> Scalar for MarkerPoly<S> {
    fn from_rational(r: &BigRational) -> Self {
        MarkerPoly::constant(S::from_rational(r))
    }

    fn try_inv(&self) -> Result<Self, RingError> {
        let mut it = self.terms.iter();
        match (it.next(), it.next()) {
            (Some((m, c)), None) => Ok(MarkerPoly::term(c.try_inv()?, m.inv())),
            (None, _) => Err(RingError::DivisionByZero),
            _ => Err(RingError::NotMonomial { value: self.to_text() }),
        }
    }

    fn try_sqrt(&self, policy: &RadicalPolicy) -> Result<Self, RingError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let mut it = self.terms.iter();
        match (it.next(), it.next()) {
            (Some((m, c)), None) if m.exponents().all(|(_, e)| e % 2 == 0) => {
                let half = Monomial(m.0.iter().map(|(k, e)| (k.clone(), e / 2)).collect());
                Ok(MarkerPoly::term(c.try_sqrt(policy)?, half))
            }
            _ => Err(RingError::NoSquareRoot { value: self.to_text() }),
        }
    }

    fn to_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                if m.is_one() {
                    c.to_rational()
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn is_exact() -> bool {
        S::is_exact()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let diff = self.sub_ref(other);
        diff.terms.values().all(|c| c.approx_eq(&S::zero()))
    }

    fn backend_name() -> &'static str {
        "markers"
    }

    fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    format!("({})", c.to_text())
                } else {
                    format!("({})*{}", c.to_text(), m.text())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn from_text(s: &str) -> Result<Self, RingError> {
        let mut acc = MarkerPoly::zero();
        for (negative, term) in split_signed_terms(s)? {
            let mut value = MarkerPoly::one();
            for factor in split_factors(&term) {
                let f = if let Some(inner) = factor.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
                    MarkerPoly::constant(S::from_text(inner)?)
                } else if factor.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
                    let (name, e) = match factor.split_once('^') {
                        Some((n, e)) => (n, e.parse().map_err(|_| RingError::Parse(s.to_string()))?),
                        None => (factor, 1),
                    };
                    MarkerPoly::term(S::one(), Monomial::power(name, e))
                } else {
                    MarkerPoly::constant(S::from_text(factor)?)
                };
                value = value.mul_ref(&f);
            }
            acc = if negative { acc - value } else { acc + value };
        }
        Ok(acc)
    }

    fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.push(m.clone(), c.clone());
        }
        out
    }

    fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.push(m.clone(), -c.clone());
        }
        out
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = MarkerPoly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.push(ma.mul(mb), ca.mul_ref(cb));
            }
        }
        out
    }

    fn scale(&self, r: &BigRational) -> Self {
        let mut out = MarkerPoly::default();
        for (m, c) in &self.terms {
            out.push(m.clone(), c.scale(r));
        }
        out
    }
}

/// Split on `*` outside parentheses.
fn split_factors(term: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in term.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&term[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&term[start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rational, Rational};

    type P = MarkerPoly<Rational>;

    #[test]
    fn monomials_invert() {
        let x = P::var("x").mul_ref(&P::constant(rational(2, 1)));
        let y = x.try_inv().unwrap();
        assert_eq!(x * y, P::one());
        let s = P::var("x") + P::one();
        assert!(matches!(s.try_inv(), Err(RingError::NotMonomial { .. })));
    }

    #[test]
    fn degree_and_components() {
        let e = P::var("eps");
        let p = e.clone() * e.clone() * P::var("b") + e + P::one();
        assert_eq!(p.max_degree("eps"), Some(2));
        assert_eq!(p.component("eps", 2), P::var("b"));
    }

    #[test]
    fn text_round_trip() {
        let p = P::var("B_0_1") * P::constant(rational(-3, 4)) + P::var("u").powi(-2).unwrap();
        let q = P::from_text(&p.to_text()).unwrap();
        assert_eq!(p, q);
    }
}
