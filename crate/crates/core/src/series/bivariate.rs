use super::{SeriesError, TruncatedSeries};
use crate::ring::Scalar;

/// Power series in two variables `p, q`, known for total degree `<= order`,
/// with an optional `pole / (p - q)^2` term kept aside.
#[derive(Debug, Clone, PartialEq)]
pub struct BiSeries<S> {
    order: i64,
    rows: Vec<Vec<S>>,
    pole: S,
}

impl<S: Scalar> BiSeries<S> {
    pub fn zero(order: i64) -> Self {
        let rows = (0..=order.max(-1)).map(|a| vec![S::zero(); (order - a + 1) as usize]).collect();
        BiSeries { order, rows, pole: S::zero() }
    }

    pub fn from_fn(order: i64, mut f: impl FnMut(i64, i64) -> S) -> Self {
        let mut out = Self::zero(order);
        for a in 0..=order {
            for b in 0..=order - a {
                out.rows[a as usize][b as usize] = f(a, b);
            }
        }
        out
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn pole(&self) -> &S {
        &self.pole
    }

    pub fn with_pole(mut self, pole: S) -> Self {
        self.pole = pole;
        self
    }

    pub fn get(&self, a: i64, b: i64) -> Result<S, SeriesError> {
        if a < 0 || b < 0 {
            return Ok(S::zero());
        }
        if a + b > self.order {
            return Err(SeriesError::InsufficientTruncation { requested: a + b, known: self.order });
        }
        Ok(self.rows[a as usize][b as usize].clone())
    }

    fn at(&self, a: i64, b: i64) -> &S {
        &self.rows[a as usize][b as usize]
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        BiSeries::from_fn(order, |a, b| self.at(a, b).clone()).with_pole(self.pole.clone())
    }

    /// `f(p)` as a bivariate series.
    pub fn from_first(f: &TruncatedSeries<S>, order: i64) -> Result<Self, SeriesError> {
        let mut out = Self::zero(order);
        for a in 0..=order {
            out.rows[a as usize][0] = f.coeff(a)?;
        }
        Ok(out)
    }

    /// `f(q)` as a bivariate series.
    pub fn from_second(f: &TruncatedSeries<S>, order: i64) -> Result<Self, SeriesError> {
        Ok(Self::from_first(f, order)?.transpose())
    }

    /// `(f(p) - f(q)) / (p - q)` for a power series `f`.
    pub fn difference_quotient(f: &TruncatedSeries<S>, order: i64) -> Result<Self, SeriesError> {
        let mut out = Self::zero(order);
        for k in 0..=order {
            let c = f.coeff(k + 1)?;
            for a in 0..=k {
                out.rows[a as usize][(k - a) as usize] = c.clone();
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        BiSeries::from_fn(self.order, |a, b| self.at(b, a).clone()).with_pole(self.pole.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        BiSeries::from_fn(order, |a, b| self.at(a, b).add_ref(other.at(a, b)))
            .with_pole(self.pole.add_ref(&other.pole))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        BiSeries::from_fn(order, |a, b| self.at(a, b).sub_ref(other.at(a, b)))
            .with_pole(self.pole.sub_ref(&other.pole))
    }

    pub fn scale(&self, c: &S) -> Self {
        BiSeries::from_fn(self.order, |a, b| self.at(a, b).mul_ref(c)).with_pole(self.pole.mul_ref(c))
    }

    /// Product of the regular parts; poles are not multiplied.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(order);
        for a1 in 0..=order {
            for b1 in 0..=order - a1 {
                let x = self.at(a1, b1);
                if x.is_zero() {
                    continue;
                }
                for a2 in 0..=order - a1 - b1 {
                    for b2 in 0..=order - a1 - b1 - a2 {
                        let y = other.at(a2, b2);
                        if y.is_zero() {
                            continue;
                        }
                        let slot = &mut out.rows[(a1 + a2) as usize][(b1 + b2) as usize];
                        *slot = slot.add_ref(&x.mul_ref(y));
                    }
                }
            }
        }
        out
    }

    /// Inverse of a regular series with invertible constant term.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        let c0 = self.at(0, 0).clone();
        if c0.is_zero() {
            return Err(SeriesError::NonUnitLeading);
        }
        let inv0 = c0.try_inv()?;
        let mut out = Self::zero(self.order);
        out.rows[0][0] = inv0.clone();
        for t in 1..=self.order {
            for a in 0..=t {
                let b = t - a;
                let mut acc = S::zero();
                for i in 0..=a {
                    for j in 0..=b {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        let x = self.at(i, j);
                        if !x.is_zero() {
                            acc = acc.add_ref(&x.mul_ref(out.at(a - i, b - j)));
                        }
                    }
                }
                out.rows[a as usize][b as usize] = -(acc.mul_ref(&inv0));
            }
        }
        Ok(out)
    }

    /// Exact quotient by `p - sign*q` (`sign = 1` for the difference, `-1`
    /// for the sum). The caller guarantees divisibility; the top total degree
    /// is lost.
    fn div_linear(&self, sign: i64) -> Self {
        let order = self.order - 1;
        let s = S::from_int(sign);
        BiSeries::from_fn(order, |a, b| {
            // q_{a,b} = sum_j sign^j p_{a+1+j, b-j}
            let mut acc = S::zero();
            let mut w = S::one();
            for j in 0..=b {
                acc = acc.add_ref(&self.at(a + 1 + j, b - j).mul_ref(&w));
                w = w.mul_ref(&s);
            }
            acc
        })
    }

    pub fn div_by_difference(&self) -> Self {
        self.div_linear(1)
    }

    pub fn div_by_sum(&self) -> Self {
        self.div_linear(-1)
    }

    /// Whether `p - q` divides the regular part, checked on the known range.
    pub fn vanishes_on_diagonal(&self) -> bool {
        (0..=self.order).all(|t| {
            let mut acc = S::zero();
            for a in 0..=t {
                acc = acc.add_ref(self.at(a, t - a));
            }
            acc.approx_eq(&S::zero())
        })
    }

    /// Whether `p + q` divides the regular part, checked on the known range.
    pub fn vanishes_on_antidiagonal(&self) -> bool {
        (0..=self.order).all(|t| {
            let mut acc = S::zero();
            for a in 0..=t {
                let c = self.at(a, t - a);
                acc = if a % 2 == 0 { acc.add_ref(c) } else { acc.sub_ref(c) };
            }
            acc.approx_eq(&S::zero())
        })
    }

    /// First entry (in total-degree then lexicographic order) where the two
    /// series differ on their common range.
    pub fn first_difference(&self, other: &Self) -> Option<(i64, i64)> {
        let order = self.order.min(other.order);
        for t in 0..=order {
            for a in 0..=t {
                if !self.at(a, t - a).approx_eq(other.at(a, t - a)) {
                    return Some((a, t - a));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rational, Rational};

    #[test]
    fn linear_division_round_trip() {
        let x = BiSeries::<Rational>::from_fn(6, |a, b| rational(a * 3 + b + 1, b + 1));
        let d = BiSeries::from_fn(7, |a, b| match (a, b) {
            (1, 0) => rational(1, 1),
            (0, 1) => rational(-1, 1),
            _ => rational(0, 1),
        });
        let prod = x.mul(&d);
        assert!(prod.vanishes_on_diagonal());
        assert_eq!(prod.div_by_difference().first_difference(&x), None);
    }

    #[test]
    fn inverse_of_unit() {
        let x = BiSeries::<Rational>::from_fn(5, |a, b| rational(1 + a, 1 + b));
        let y = x.inv().unwrap();
        let one = BiSeries::from_fn(5, |a, b| if a == 0 && b == 0 { rational(1, 1) } else { rational(0, 1) });
        assert_eq!(x.mul(&y).first_difference(&one), None);
    }
}
