//! Dense univariate polynomials and rational functions over a [`Scalar`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ring::{RingError, Scalar};
use crate::series::{SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Polynomial<S> {
    /// Coefficients in ascending degree.
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| S::from_int(c)).collect())
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, z: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| acc.mul_ref(z).add_ref(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul_ref(&S::from_int(i as i64))).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(S::zero);
                    let b = other.coeffs.get(i).cloned().unwrap_or_else(S::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add_ref(&a.mul_ref(b));
            }
        }
        Self::new(out)
    }

    /// `p(a + w)` as a polynomial in `w`.
    pub fn taylor_shift(&self, a: &S) -> Self {
        let mut out: Vec<S> = Vec::new();
        // Horner with (a + w)
        for c in self.coeffs.iter().rev() {
            let mut next = vec![S::zero(); out.len() + 1];
            for (i, x) in out.iter().enumerate() {
                next[i] = next[i].add_ref(&x.mul_ref(a));
                next[i + 1] = next[i + 1].add_ref(x);
            }
            next[0] = next[0].add_ref(c);
            out = next;
        }
        Self::new(out)
    }

    /// Multiplicity of the root `w = 0`.
    pub fn low_degree(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Rational roots, for polynomials with rational coefficients.
    pub fn rational_roots(&self) -> Vec<BigRational> {
        let Some(rat) = self.coeffs.iter().map(|c| c.to_rational()).collect::<Option<Vec<_>>>() else {
            return Vec::new();
        };
        if rat.iter().all(|c| c.is_zero()) {
            return Vec::new();
        }
        let lcm = rat.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = rat.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
        let mut roots = Vec::new();
        let zeros = ints.iter().position(|c| !c.is_zero()).unwrap();
        if zeros > 0 {
            roots.push(BigRational::zero());
            ints.drain(..zeros);
        }
        let (Some(c0), Some(cn)) = (ints.first().and_then(|c| c.abs().to_u64()), ints.last().and_then(|c| c.abs().to_u64())) else {
            return roots;
        };
        let poly = Polynomial::<BigRational>::new(ints.iter().cloned().map(BigRational::from_integer).collect());
        for p in divisors(c0) {
            for q in divisors(cn) {
                for sign in [1i64, -1] {
                    let r = BigRational::new(BigInt::from(sign) * BigInt::from(p), BigInt::from(q));
                    if !roots.contains(&r) && poly.eval(&r).is_zero() {
                        roots.push(r);
                    }
                }
            }
        }
        roots.sort();
        roots
    }
}

fn divisors(n: u64) -> Vec<u64> {
    if n == 0 || n > 1 << 40 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out
}

/// `num / den` with `den` not identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction<S> {
    pub num: Polynomial<S>,
    pub den: Polynomial<S>,
}

impl<S: Scalar> RationalFunction<S> {
    pub fn new(num: Polynomial<S>, den: Polynomial<S>) -> Result<Self, RingError> {
        if den.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn polynomial(p: Polynomial<S>) -> Self {
        RationalFunction { num: p, den: Polynomial::one() }
    }

    pub fn eval(&self, z: &S) -> Result<S, RingError> {
        self.num.eval(z).try_div(&self.den.eval(z))
    }

    pub fn derivative(&self) -> Self {
        let num = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        RationalFunction { num, den: self.den.mul(&self.den) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RationalFunction { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalFunction {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Laurent expansion in `w = z - a`, known up to `w^order`.
    pub fn expand_at(&self, a: &S, order: i64) -> Result<TruncatedSeries<S>, SeriesError> {
        let num = self.num.taylor_shift(a);
        let den = self.den.taylor_shift(a);
        let vn = num.low_degree() as i64;
        let vd = den.low_degree() as i64;
        if num.is_zero() {
            return Ok(TruncatedSeries::zero(Some(order)));
        }
        let rel = order - (vn - vd);
        if rel < 0 {
            return Ok(TruncatedSeries::zero(Some(order)));
        }
        let n = TruncatedSeries::new(0, num.coeffs[vn as usize..].to_vec(), rel);
        let d = TruncatedSeries::new(0, den.coeffs[vd as usize..].to_vec(), rel);
        Ok(n.div(&d)?.truncate(rel).shift(vn - vd))
    }

    /// Order of vanishing at `a` (negative for a pole).
    pub fn order_at(&self, a: &S) -> i64 {
        self.num.taylor_shift(a).low_degree() as i64 - self.den.taylor_shift(a).low_degree() as i64
    }

    /// `f(g)` for a power series `g`: numerator and denominator are composed
    /// separately and divided.
    pub fn compose_series(&self, g: &TruncatedSeries<S>) -> Result<TruncatedSeries<S>, SeriesError> {
        let n = horner(&self.num, g);
        let d = horner(&self.den, g);
        n.div(&d)
    }
}

fn horner<S: Scalar>(p: &Polynomial<S>, g: &TruncatedSeries<S>) -> TruncatedSeries<S> {
    let mut acc = TruncatedSeries::zero(None);
    for c in p.coeffs.iter().rev() {
        acc = acc.mul(g).add(&TruncatedSeries::constant(c.clone(), None));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rational, Rational};

    #[test]
    fn shift_and_roots() {
        // z^3 - 3z
        let p = Polynomial::<Rational>::from_ints(&[0, -3, 0, 1]);
        let dp = p.derivative();
        assert_eq!(dp.rational_roots(), vec![rational(-1, 1), rational(1, 1)]);
        let shifted = p.taylor_shift(&rational(1, 1));
        assert_eq!(shifted, Polynomial::from_ints(&[-2, 0, 3, 1]));
    }

    #[test]
    fn laurent_expansion_of_pole() {
        // 1/(z^2 (1 - z)) at 0
        let f = RationalFunction::new(Polynomial::<Rational>::one(), Polynomial::from_ints(&[0, 0, 1, -1])).unwrap();
        let s = f.expand_at(&rational(0, 1), 3).unwrap();
        assert_eq!(s.valuation(), Some(-2));
        for d in -2..=3 {
            assert_eq!(s.coeff(d).unwrap(), rational(1, 1));
        }
        assert!(s.coeff(4).is_err());
        assert_eq!(f.order_at(&rational(0, 1)), -2);
    }
}
