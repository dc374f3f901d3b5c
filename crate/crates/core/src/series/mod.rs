//! Truncated Laurent series in one variable, plus the bivariate tables in
//! [`bivariate`].
//!
//! A series knows its coefficients up to an explicit order; asking for a
//! coefficient past that order is an error rather than a silent zero.

pub mod bivariate;

use num_rational::BigRational;
use thiserror::Error;

use crate::ring::{RadicalPolicy, RingError, Scalar};

pub use bivariate::BiSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("coefficient of degree {requested} requested but series is only known to degree {known}")]
    InsufficientTruncation { requested: i64, known: i64 },
    #[error("leading coefficient is not a unit (series is zero to known order)")]
    NonUnitLeading,
    #[error("square root of a series with odd valuation {valuation}")]
    OddValuationSqrt { valuation: i64 },
    #[error("operation needs a finite truncation order")]
    UnboundedOrder,
    #[error("composition argument must have positive valuation, got {valuation}")]
    BadComposition { valuation: i64 },
    #[error("reversion needs valuation exactly 1, got {valuation}")]
    BadReversion { valuation: i64 },
    #[error("cannot integrate a series with a z^-1 term")]
    LogarithmicTerm,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `min` on orders where `None` means exact (known to all degrees).
fn min_order(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn add_order(a: Option<i64>, k: i64) -> Option<i64> {
    a.map(|x| x.saturating_add(k))
}

/// Laurent series `sum_{d >= val} c_d z^d`, known up to degree `order`
/// (or exactly, when `order` is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<S> {
    val: i64,
    coeffs: Vec<S>,
    order: Option<i64>,
}

impl<S: Scalar> TruncatedSeries<S> {
    /// Exact Laurent polynomial with lowest degree `val`.
    pub fn exact(val: i64, coeffs: Vec<S>) -> Self {
        TruncatedSeries { val, coeffs, order: None }.normalized()
    }

    /// Coefficients starting at degree `val`, known up to `order`.
    pub fn new(val: i64, coeffs: Vec<S>, order: i64) -> Self {
        let mut coeffs = coeffs;
        let keep = (order - val + 1).max(0) as usize;
        coeffs.truncate(keep);
        TruncatedSeries { val, coeffs, order: Some(order) }.normalized()
    }

    pub fn zero(order: Option<i64>) -> Self {
        TruncatedSeries { val: 0, coeffs: Vec::new(), order }
    }

    pub fn constant(c: S, order: Option<i64>) -> Self {
        Self::monomial(c, 0, order)
    }

    pub fn monomial(c: S, degree: i64, order: Option<i64>) -> Self {
        let s = TruncatedSeries { val: degree, coeffs: vec![c], order: None };
        match order {
            Some(n) => s.truncate(n),
            None => s.normalized(),
        }
    }

    /// The variable itself, `z`.
    pub fn var(order: Option<i64>) -> Self {
        Self::monomial(S::one(), 1, order)
    }

    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.val = 0;
            }
            Some(i) => {
                self.coeffs.drain(..i);
                self.val += i as i64;
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }
        self
    }

    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the first nonzero coefficient. For a series that is zero to
    /// its known order this is `order + 1`; for the exact zero it is `None`.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            self.order.map(|n| n + 1)
        } else {
            Some(self.val)
        }
    }

    /// Highest degree with a stored nonzero coefficient.
    pub fn top_degree(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val + self.coeffs.len() as i64 - 1)
        }
    }

    pub fn coeff(&self, d: i64) -> Result<S, SeriesError> {
        if let Some(n) = self.order {
            if d > n {
                return Err(SeriesError::InsufficientTruncation { requested: d, known: n });
            }
        }
        Ok(self.coeff_unchecked(d))
    }

    fn coeff_unchecked(&self, d: i64) -> S {
        let i = d - self.val;
        if i < 0 || i as usize >= self.coeffs.len() {
            S::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Nonzero (degree, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &S)> {
        let val = self.val;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (val + i as i64, c))
    }

    /// Forget everything above degree `n`.
    pub fn truncate(&self, n: i64) -> Self {
        let order = min_order(self.order, Some(n));
        let keep = (order.unwrap() - self.val + 1).max(0) as usize;
        let coeffs = self.coeffs.iter().take(keep).cloned().collect();
        TruncatedSeries { val: self.val, coeffs, order }.normalized()
    }

    pub fn residue(&self) -> Result<S, SeriesError> {
        self.coeff(-1)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, subtract: bool) -> Self {
        let order = min_order(self.order, other.order);
        let lo = match (self.coeffs.is_empty(), other.coeffs.is_empty()) {
            (true, true) => return TruncatedSeries::zero(order),
            (false, true) => self.val,
            (true, false) => other.val,
            (false, false) => self.val.min(other.val),
        };
        let hi_a = self.top_degree().unwrap_or(lo);
        let hi_b = other.top_degree().unwrap_or(lo);
        let mut hi = hi_a.max(hi_b);
        if let Some(n) = order {
            hi = hi.min(n);
        }
        let mut coeffs = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        for d in lo..=hi {
            let a = self.coeff_unchecked(d);
            let b = other.coeff_unchecked(d);
            coeffs.push(if subtract { a.sub_ref(&b) } else { a.add_ref(&b) });
        }
        TruncatedSeries { val: lo, coeffs, order }.normalized()
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
            order: self.order,
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        TruncatedSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|x| x.mul_ref(c)).collect(),
            order: self.order,
        }
        .normalized()
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        TruncatedSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|x| x.scale(r)).collect(),
            order: self.order,
        }
        .normalized()
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        TruncatedSeries { val: self.val + k, coeffs: self.coeffs.clone(), order: add_order(self.order, k) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = match (self.valuation(), other.valuation()) {
            (None, _) | (_, None) => {
                // an exact zero factor
                return TruncatedSeries::zero(None);
            }
            (Some(va), Some(vb)) => {
                min_order(add_order(self.order, vb), add_order(other.order, va))
            }
        };
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return TruncatedSeries::zero(order);
        }
        let lo = self.val + other.val;
        let mut hi = self.top_degree().unwrap() + other.top_degree().unwrap();
        if let Some(n) = order {
            hi = hi.min(n);
        }
        if hi < lo {
            return TruncatedSeries::zero(order);
        }
        let len = (hi - lo + 1) as usize;
        let mut coeffs = vec![S::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add_ref(&a.mul_ref(b));
            }
        }
        TruncatedSeries { val: lo, coeffs, order }.normalized()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = TruncatedSeries::constant(S::one(), None);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    fn leading(&self) -> Result<(i64, S, i64), SeriesError> {
        let n = self.order.ok_or(SeriesError::UnboundedOrder)?;
        if self.coeffs.is_empty() {
            return Err(SeriesError::NonUnitLeading);
        }
        Ok((self.val, self.coeffs[0].clone(), n))
    }

    pub fn inv(&self) -> Result<Self, SeriesError> {
        let (v, a0, n) = match self.leading() {
            Err(SeriesError::UnboundedOrder) if self.coeffs.len() == 1 => {
                let c = self.coeffs[0].try_inv()?;
                return Ok(TruncatedSeries { val: -self.val, coeffs: vec![c], order: None });
            }
            other => other?,
        };
        let rel = n - v;
        let inv0 = a0.try_inv()?;
        let mut out: Vec<S> = Vec::with_capacity(rel as usize + 1);
        out.push(inv0.clone());
        for k in 1..=rel as usize {
            let mut acc = S::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                acc = acc.add_ref(&self.coeffs[j].mul_ref(&out[k - j]));
            }
            out.push(-(acc.mul_ref(&inv0)));
        }
        Ok(TruncatedSeries { val: -v, coeffs: out, order: Some(-v + rel) }.normalized())
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn differentiate(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.mul_ref(&S::from_int(self.val + i as i64)))
            .collect();
        TruncatedSeries { val: self.val - 1, coeffs, order: add_order(self.order, -1) }.normalized()
    }

    /// Primitive with zero constant term.
    pub fn integrate(&self) -> Result<Self, SeriesError> {
        if !self.coeff_unchecked(-1).is_zero() {
            return Err(SeriesError::LogarithmicTerm);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let d = self.val + i as i64;
                if d == -1 {
                    Ok(S::zero())
                } else {
                    c.try_div(&S::from_int(d + 1))
                }
            })
            .collect::<Result<Vec<_>, RingError>>()?;
        Ok(TruncatedSeries { val: self.val + 1, coeffs, order: add_order(self.order, 1) }.normalized())
    }

    /// `self(g(z))`. `g` must have positive valuation, or valuation 1 when
    /// `self` has negative powers.
    pub fn compose(&self, g: &Self) -> Result<Self, SeriesError> {
        let m = g.valuation().ok_or(SeriesError::BadComposition { valuation: 0 })?;
        if m < 1 || g.coeffs.is_empty() {
            return Err(SeriesError::BadComposition { valuation: m });
        }
        if self.coeffs.is_empty() {
            return Ok(TruncatedSeries::zero(self.order.map(|n| m * (n + 1) - 1)));
        }
        let cap = self.order.map(|n| m * (n + 1) - 1);
        let top = self.top_degree().unwrap();
        let mut acc = TruncatedSeries::zero(cap);
        if self.val < 0 {
            let ginv = g.inv()?;
            let mut p = TruncatedSeries::constant(S::one(), None);
            for d in (self.val..0).rev() {
                p = p.mul(&ginv);
                let c = self.coeff_unchecked(d);
                if !c.is_zero() {
                    acc = acc.add(&p.scale(&c));
                }
            }
        }
        let mut p = TruncatedSeries::constant(S::one(), None);
        for d in 0..=top {
            if d > 0 {
                p = p.mul(g);
                if let Some(c) = cap {
                    p = p.truncate(c);
                }
            }
            let c = self.coeff_unchecked(d);
            if !c.is_zero() {
                acc = acc.add(&p.scale(&c));
            }
        }
        Ok(match cap {
            Some(c) => acc.truncate(c),
            None => acc,
        })
    }

    /// Compositional inverse of a series with valuation 1, by Lagrange
    /// inversion.
    pub fn revert(&self) -> Result<Self, SeriesError> {
        let n = self.order.ok_or(SeriesError::UnboundedOrder)?;
        let v = self.valuation().unwrap_or(0);
        if v != 1 || self.coeffs.is_empty() {
            return Err(SeriesError::BadReversion { valuation: v });
        }
        // h = z / f(z), then [w^k] r = (1/k) [z^{k-1}] h^k
        let h = self.shift(-1).inv()?;
        let mut coeffs = vec![S::zero(); n as usize];
        let mut hk = TruncatedSeries::constant(S::one(), None);
        for k in 1..=n {
            hk = hk.mul(&h).truncate(n - 1);
            coeffs[(k - 1) as usize] = hk.coeff(k - 1)?.try_div(&S::from_int(k))?;
        }
        Ok(TruncatedSeries { val: 1, coeffs, order: Some(n) }.normalized())
    }

    pub fn sqrt(&self, policy: &RadicalPolicy) -> Result<Self, SeriesError> {
        let (v, a0, n) = self.leading()?;
        if v % 2 != 0 {
            return Err(SeriesError::OddValuationSqrt { valuation: v });
        }
        let rel = (n - v) as usize;
        let s0 = a0.try_sqrt(policy)?;
        let inv_a0 = a0.try_inv()?;
        let t: Vec<S> = (0..=rel).map(|i| self.coeffs.get(i).cloned().unwrap_or_else(S::zero).mul_ref(&inv_a0)).collect();
        let half = S::from_ratio(1, 2);
        let mut s: Vec<S> = vec![S::one()];
        for k in 1..=rel {
            let mut acc = t[k].clone();
            for j in 1..k {
                acc = acc.sub_ref(&s[j].mul_ref(&s[k - j]));
            }
            s.push(acc.mul_ref(&half));
        }
        let coeffs = s.into_iter().map(|c| c.mul_ref(&s0)).collect();
        Ok(TruncatedSeries { val: v / 2, coeffs, order: Some(v / 2 + rel as i64) }.normalized())
    }

    /// `exp` of a series with positive valuation.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        let n = self.order.ok_or(SeriesError::UnboundedOrder)?;
        if let Some(v) = self.valuation() {
            if v < 1 && !self.coeffs.is_empty() {
                return Err(SeriesError::BadComposition { valuation: v });
            }
        }
        // e' = t' e
        let dt = self.differentiate();
        let mut e: Vec<S> = vec![S::one()];
        for k in 1..=n.max(0) {
            let mut acc = S::zero();
            for j in 1..=k {
                acc = acc.add_ref(&dt.coeff_unchecked(j - 1).mul_ref(&e[(k - j) as usize]));
            }
            e.push(acc.try_div(&S::from_int(k))?);
        }
        Ok(TruncatedSeries { val: 0, coeffs: e, order: Some(n) }.normalized())
    }

    /// `log` of a power series with constant term 1.
    pub fn log(&self) -> Result<Self, SeriesError> {
        let (v, a0, _) = self.leading()?;
        if v != 0 || !a0.approx_eq(&S::one()) {
            return Err(SeriesError::NonUnitLeading);
        }
        self.differentiate().div(self)?.integrate()
    }

    /// `self(c z)`.
    pub fn rescale_var(&self, c: &S) -> Result<Self, SeriesError> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, a) in self.coeffs.iter().enumerate() {
            coeffs.push(a.mul_ref(&c.powi(self.val + i as i64)?));
        }
        Ok(TruncatedSeries { val: self.val, coeffs, order: self.order }.normalized())
    }

    /// `self(-z)`.
    pub fn reflect(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| if (self.val + i as i64) % 2 == 0 { a.clone() } else { -a.clone() })
            .collect();
        TruncatedSeries { val: self.val, coeffs, order: self.order }
    }

    /// `self(z^k)` for `k >= 1`.
    pub fn dilate(&self, k: i64) -> Self {
        assert!(k >= 1);
        let mut coeffs = vec![S::zero(); ((self.coeffs.len().max(1) - 1) as i64 * k + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = a.clone();
        }
        let order = self.order.map(|n| (n + 1) * k - 1);
        TruncatedSeries { val: self.val * k, coeffs, order }.normalized()
    }

    /// Even and odd parts, `(f(z) + f(-z))/2` and `(f(z) - f(-z))/2`.
    pub fn parity_parts(&self) -> (Self, Self) {
        let mut even = self.clone();
        let mut odd = self.clone();
        for i in 0..self.coeffs.len() {
            if (self.val + i as i64) % 2 == 0 {
                odd.coeffs[i] = S::zero();
            } else {
                even.coeffs[i] = S::zero();
            }
        }
        (even.normalized(), odd.normalized())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TruncatedSeries<T> {
        TruncatedSeries { val: self.val, coeffs: self.coeffs.iter().map(f).collect(), order: self.order }
            .normalized()
    }

    /// Agreement on the common known range.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let order = min_order(self.order, other.order);
        let diff = self.sub(other);
        let diff = match order {
            Some(n) => diff.truncate(n),
            None => diff,
        };
        diff.coeffs.iter().all(|c| c.approx_eq(&S::zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rational, Rational};

    type Ser = TruncatedSeries<Rational>;

    fn q(n: i64) -> Rational {
        rational(n, 1)
    }

    #[test]
    fn residue_of_laurent_polynomial() {
        let s = Ser::exact(-1, vec![q(1), q(3), q(1)]);
        assert_eq!(s.residue().unwrap(), q(1));
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let s = Ser::new(0, vec![q(1), q(2), q(1)], 6);
        let r = s.sqrt(&RadicalPolicy::RationalOnly).unwrap();
        assert!(r.agrees_with(&Ser::new(0, vec![q(1), q(1)], 6)));
        assert_eq!(r.order(), Some(6));
    }

    #[test]
    fn revert_composes_back() {
        let f = Ser::new(1, vec![q(1), q(0), q(1)], 5);
        let r = f.revert().unwrap();
        let id = f.compose(&r).unwrap();
        assert!(id.agrees_with(&Ser::var(Some(5))));
        assert_eq!(id.order(), Some(5));
        assert_eq!(r.coeff(3).unwrap(), q(-1));
        assert_eq!(r.coeff(5).unwrap(), q(3));
    }

    #[test]
    fn unknown_coefficient_is_an_error() {
        let s = Ser::new(0, vec![q(1), q(1)], 3);
        assert_eq!(s.coeff(3).unwrap(), q(0));
        assert!(matches!(s.coeff(4), Err(SeriesError::InsufficientTruncation { requested: 4, known: 3 })));
    }

    #[test]
    fn product_order_is_conservative() {
        let a = Ser::new(-2, vec![q(1), q(1), q(1)], 3);
        let b = Ser::new(1, vec![q(2), q(5)], 4);
        let p = a.mul(&b);
        assert_eq!(p.order(), Some(2));
        let inv = a.inv().unwrap();
        assert_eq!(inv.order(), Some(7));
        assert!(a.mul(&inv).agrees_with(&Ser::constant(q(1), None)));
    }

    #[test]
    fn odd_valuation_sqrt_rejected() {
        let s = Ser::new(1, vec![q(1)], 5);
        assert!(matches!(s.sqrt(&RadicalPolicy::Any), Err(SeriesError::OddValuationSqrt { valuation: 1 })));
    }

    #[test]
    fn exp_log_inverse() {
        let t = Ser::new(1, vec![q(1), rational(-1, 3), q(2)], 7);
        let e = t.exp().unwrap();
        assert!(e.log().unwrap().agrees_with(&t));
    }

    #[test]
    fn dilate_and_reflect() {
        let s = Ser::new(0, vec![q(1), q(2), q(3)], 4);
        let d = s.dilate(2);
        assert_eq!(d.order(), Some(9));
        assert_eq!(d.coeff(4).unwrap(), q(3));
        assert_eq!(d.coeff(3).unwrap(), q(0));
        assert_eq!(s.reflect().coeff(1).unwrap(), q(-2));
    }
}
