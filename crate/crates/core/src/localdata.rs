//! Laplace-transform data at the branchpoints: times, the tables `B`, `B̂`,
//! the `dξ` cross-expansions, the kernels `f_{i,j}` and the bi-series `B̌`.
//!
//! Everything is computed termwise from the chart through Gaussian moments,
//! `∫ ζ^{2k} e^{-uζ²} dζ ∝ (2k-1)!! / (2u)^k`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::curve::{check_branchpoints, extract_chart, local_bergman, BranchChart, CurveError, CurvePresentation};
use crate::ring::{double_factorial, factorial, RingError, Scalar};
use crate::series::{BiSeries, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalDataError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("unit e^(-t0) = {watson} from moments disagrees with y'(a)/sqrt(2x''(a)) = {closed}")]
    UnitMismatch { watson: String, closed: String },
    #[error("Bhat lemma fails at branchpoints ({i},{j}), entry u^-{k} v^-{l}")]
    LemmaMismatch { i: usize, j: usize, k: i64, l: i64 },
    #[error("framing f must avoid 0 and -1")]
    BadFraming,
}

/// Truncation orders for a local data package.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orders {
    /// Total degree of the `B_{i,k;j,l}` tables.
    pub bergman: i64,
    /// Number of times `t̂_1..t̂_K`.
    pub times: usize,
}

impl Orders {
    /// Orders sufficient for the invariants with `3g - 3 + n <= dim`.
    pub fn for_dimension(dim: i64) -> Self {
        let dim = dim.max(0);
        Orders { bergman: 4 * dim + 6, times: (dim + 2) as usize }
    }

    pub fn chart(&self) -> i64 {
        (self.bergman + 3).max(2 * self.times as i64 + 3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointData<S> {
    pub chart: Option<BranchChart<S>>,
    /// `u_k`, the odd part of `y` in the chart.
    pub u: Vec<S>,
    /// `e^{-t̂_0} = u_0 / 2`.
    pub unit: S,
    /// `t̂_1 .. t̂_K`.
    pub times: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSpectralData<S> {
    pub name: String,
    pub points: Vec<PointData<S>>,
    /// Tables keyed by `(i, j)` with `i <= j`.
    bergman: BTreeMap<(usize, usize), BiSeries<S>>,
    pub orders: Orders,
}

fn df(n: i64) -> BigRational {
    BigRational::from_integer(double_factorial(n))
}

fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Gaussian-moment weight `(2k+1)!! / 2^{k+1}` relating `u_k` to the
/// Laplace series coefficient.
fn moment(k: i64) -> BigRational {
    df(2 * k + 1) * pow2(-k - 1)
}

/// `(e^{-t̂_0}, [t̂_1..t̂_K])` from the odd coefficients of `y`.
pub fn times_from_u<S: Scalar>(u: &[S], count: usize) -> Result<(S, Vec<S>), LocalDataError> {
    let n = count as i64;
    if u.len() <= count {
        return Err(SeriesError::InsufficientTruncation { requested: 2 * n + 1, known: 2 * u.len() as i64 - 1 }.into());
    }
    let coeffs: Vec<S> = (0..=count).map(|k| u[k].scale(&moment(k as i64))).collect();
    let unit = coeffs[0].clone();
    let inv = unit.try_inv()?;
    let normalized = TruncatedSeries::new(0, coeffs.iter().map(|c| c.mul_ref(&inv)).collect(), n);
    let g = normalized.log()?.neg();
    let times = (1..=n).map(|k| g.coeff(k)).collect::<Result<Vec<_>, _>>()?;
    Ok((unit, times))
}

/// Inverse of [`times_from_u`]: `u_0 .. u_K` from the unit and times.
pub fn u_from_times<S: Scalar>(unit: &S, times: &[S]) -> Result<Vec<S>, LocalDataError> {
    let n = times.len() as i64;
    let g = TruncatedSeries::new(1, times.to_vec(), n);
    let e = g.neg().exp()?;
    (0..=n)
        .map(|k| Ok(e.coeff(k)?.mul_ref(unit).scale(&moment(k).recip())))
        .collect()
}

impl<S: Scalar> LocalSpectralData<S> {
    pub fn from_curve(curve: &CurvePresentation<S>, orders: Orders) -> Result<Self, LocalDataError> {
        check_branchpoints(curve)?;
        let n = curve.branchpoints.len();
        let charts = (0..n)
            .into_par_iter()
            .map(|i| extract_chart(curve, i, orders.chart()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut points = Vec::with_capacity(n);
        for ch in &charts {
            let (unit, times) = times_from_u(&ch.u, orders.times)?;
            // closed form y'(a) / (2 sqrt(x''(a)/2))
            let dy = curve.y.derivative().eval(&ch.point)?;
            let closed = dy.try_div(&ch.scale.scale(&BigRational::from_integer(2.into())))?;
            if !closed.approx_eq(&unit) {
                return Err(LocalDataError::UnitMismatch { watson: unit.to_text(), closed: closed.to_text() });
            }
            points.push(PointData { chart: Some(ch.clone()), u: ch.u.clone(), unit, times });
        }
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let tables = pairs
            .par_iter()
            .map(|&(i, j)| local_bergman(curve.kernel, &charts[i], &charts[j], i == j, orders.bergman).map(|t| ((i, j), t)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LocalSpectralData { name: curve.name.clone(), points, bergman: tables.into_iter().collect(), orders })
    }

    /// Assemble from given units, times and `B` tables (`B_{i,k;j,l}` for
    /// `i <= j`), without a chart.
    pub fn from_parts(
        name: &str,
        units: Vec<S>,
        times: Vec<Vec<S>>,
        bergman: BTreeMap<(usize, usize), BiSeries<S>>,
    ) -> Result<Self, LocalDataError> {
        let count = times.iter().map(|t| t.len()).min().unwrap_or(0);
        let order = bergman.values().map(|b| b.order()).min().unwrap_or(0);
        let mut points = Vec::new();
        for (unit, t) in units.into_iter().zip(times) {
            let u = u_from_times(&unit, &t)?;
            points.push(PointData { chart: None, u, unit, times: t });
        }
        Ok(LocalSpectralData {
            name: name.to_string(),
            points,
            bergman,
            orders: Orders { bergman: order, times: count },
        })
    }

    pub fn branchpoints(&self) -> usize {
        self.points.len()
    }

    pub fn bergman_table(&self, i: usize, j: usize) -> Option<&BiSeries<S>> {
        self.bergman.get(&(i.min(j), i.max(j)))
    }

    /// Replace one `B` table; used to inject faults in tests and to build
    /// perturbed copies.
    pub fn with_bergman_table(mut self, i: usize, j: usize, table: BiSeries<S>) -> Self {
        let key = (i.min(j), i.max(j));
        let table = if i <= j { table } else { table.transpose() };
        self.bergman.insert(key, table);
        self
    }

    /// `B_{i,k;j,l}`.
    pub fn b(&self, i: usize, k: i64, j: usize, l: i64) -> Result<S, LocalDataError> {
        let t = self.bergman_table(i, j).expect("table for every pair");
        Ok(if i <= j { t.get(k, l)? } else { t.get(l, k)? })
    }

    /// `B̂_{i,k;j,l} = (2k-1)!!(2l-1)!! 2^{-k-l-1} B_{i,2k;j,2l}`.
    pub fn bhat(&self, i: usize, k: i64, j: usize, l: i64) -> Result<S, LocalDataError> {
        let c = df(2 * k - 1) * df(2 * l - 1) * pow2(-k - l - 1);
        Ok(self.b(i, 2 * k, j, 2 * l)?.scale(&c))
    }

    /// Largest `k + l` for which every `B̂_{.,k;.,l}` is known.
    pub fn bhat_order(&self) -> i64 {
        self.orders.bergman / 2
    }

    /// `dξ_{i,d}` expanded at `a_j` as a Laurent series in `ζ_j`, known up to
    /// `ζ_j^order`.
    pub fn xi(&self, i: usize, d: i64, j: usize, order: i64) -> Result<TruncatedSeries<S>, LocalDataError> {
        let c = df(2 * d - 1) * pow2(-d);
        let mut coeffs = Vec::with_capacity(order.max(0) as usize + 1);
        for m in 0..=order {
            coeffs.push(-self.b(i, 2 * d, j, m)?.scale(&c));
        }
        let mut s = TruncatedSeries::new(0, coeffs, order);
        if i == j {
            let sing = df(2 * d + 1) * pow2(-d);
            s = s.sub(&TruncatedSeries::monomial(S::from_rational(&sing), -2 * d - 2, None));
        }
        Ok(s)
    }

    /// `f_{i,j}(u) = δ_{ij} - Σ_k B̂_{j,0;i,k} u^{-k-1}`, as a series in `1/u`.
    pub fn f_series(&self, i: usize, j: usize, order: i64) -> Result<TruncatedSeries<S>, LocalDataError> {
        let mut coeffs = Vec::with_capacity(order as usize + 1);
        coeffs.push(if i == j { S::one() } else { S::zero() });
        for k in 0..order {
            coeffs.push(-self.bhat(j, 0, i, k)?);
        }
        Ok(TruncatedSeries::new(0, coeffs, order))
    }

    /// `B̌_{i,j}` as the generating series of `B̂`, in `(1/u, 1/v)`, for bidegree
    /// up to `(order, order)`.
    pub fn bcheck_direct(&self, i: usize, j: usize, order: i64) -> Result<BiSeries<S>, LocalDataError> {
        let mut err = None;
        let filled = BiSeries::from_fn(2 * order, |k, l| {
            if k > order || l > order {
                return S::zero();
            }
            match self.bhat(i, k, j, l) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    S::zero()
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(filled),
        }
    }

    /// `(uv/(u+v)) (δ_{ij} - Σ_m f_{i,m}(u) f_{j,m}(v))` in `(1/u, 1/v)`, known to
    /// total degree `2 * order`.
    pub fn bcheck_from_f(&self, i: usize, j: usize, order: i64) -> Result<BiSeries<S>, LocalDataError> {
        let t = 2 * order + 1;
        let mut acc = BiSeries::from_fn(t, |a, b| if a == 0 && b == 0 && i == j { S::one() } else { S::zero() });
        for m in 0..self.branchpoints() {
            let fu = BiSeries::from_first(&self.f_series(i, m, t)?, t)?;
            let fv = BiSeries::from_second(&self.f_series(j, m, t)?, t)?;
            acc = acc.sub(&fu.mul(&fv));
        }
        Ok(acc.div_by_sum())
    }

    /// Both computations of `B̌_{i,j}` to bidegree `(order, order)`.
    pub fn bcheck(&self, i: usize, j: usize, order: i64) -> Result<BcheckResult<S>, LocalDataError> {
        let direct = self.bcheck_direct(i, j, order)?;
        let via_f = self.bcheck_from_f(i, j, order)?;
        let mut mismatch = None;
        'outer: for k in 0..=order {
            for l in 0..=order {
                if !direct.get(k, l)?.approx_eq(&via_f.get(k, l)?) {
                    mismatch = Some((k, l));
                    break 'outer;
                }
            }
        }
        Ok(BcheckResult { direct, via_f, order, mismatch })
    }

    /// Rewrite every regular `B_{i,k;j,l}` entry (`i <= j`) through `f`.
    pub fn map_bergman(&self, f: impl Fn(usize, usize, &S) -> S) -> Self {
        let mut out = self.clone();
        for (&(i, j), t) in out.bergman.iter_mut() {
            let mapped = BiSeries::from_fn(t.order(), |a, b| f(i, j, &t.get(a, b).unwrap())).with_pole(t.pole().clone());
            *t = mapped;
        }
        out
    }

    /// Map every scalar through `f`, e.g. to move to a marker ring.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> LocalSpectralData<T> {
        LocalSpectralData {
            name: self.name.clone(),
            points: self
                .points
                .iter()
                .map(|p| PointData {
                    chart: None,
                    u: p.u.iter().map(f).collect(),
                    unit: f(&p.unit),
                    times: p.times.iter().map(f).collect(),
                })
                .collect(),
            bergman: self
                .bergman
                .iter()
                .map(|(k, t)| {
                    let mapped = BiSeries::from_fn(t.order(), |a, b| f(&t.get(a, b).unwrap()));
                    (*k, mapped)
                })
                .collect(),
            orders: self.orders,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcheckResult<S> {
    pub direct: BiSeries<S>,
    pub via_f: BiSeries<S>,
    pub order: i64,
    pub mismatch: Option<(i64, i64)>,
}

impl<S> BcheckResult<S> {
    pub fn verified(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Bernoulli numbers `B_0 .. B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(BigRational::one());
            continue;
        }
        // sum_{k<=m} C(m+1,k) B_k = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// Coefficients `c_j` of `log Γ(u) - (u - 1/2) log u + u - log(2π)/2 = Σ c_j u^{-j}`
/// for `j = 0 ..= order`.
pub fn stirling_log_gamma(order: usize) -> Vec<BigRational> {
    let b = bernoulli_numbers(order + 1);
    let mut out = vec![BigRational::zero(); order + 1];
    let mut k = 1;
    while 2 * k - 1 <= order {
        let denom = BigRational::from_integer(BigInt::from(2 * k * (2 * k - 1)));
        out[2 * k - 1] = b[2 * k].clone() / denom;
        k += 1;
    }
    out
}

/// Times of the framed vertex from the Bernoulli series:
/// `t̂_{2k-1} = B_{2k}/(2k(2k-1)) (1 + f^{1-2k} + (-f-1)^{1-2k})`, even times zero.
pub fn vertex_times<S: Scalar>(f: &S, count: usize) -> Result<Vec<S>, LocalDataError> {
    let f1 = f.add_ref(&S::one());
    if f.is_zero() || f1.is_zero() {
        return Err(LocalDataError::BadFraming);
    }
    let st = stirling_log_gamma(count);
    let mut out = vec![S::zero(); count];
    for j in (1..=count).step_by(2) {
        let e = -(j as i64);
        let bracket = S::one().add_ref(&f.powi(e)?).add_ref(&(-f1.clone()).powi(e)?);
        out[j - 1] = bracket.scale(&st[j]);
    }
    Ok(out)
}

/// Closed form of the Ising row `B̂_{+,0;+,k}`.
pub fn ising_bhat_closed_form(k: i64) -> BigRational {
    let num = df(6 * k + 1);
    let den = BigRational::from_integer(BigInt::from(2u32).pow(4 * (k as u32 + 1)))
        * BigRational::from_integer(BigInt::from(3u32).pow(3 * k as u32 + 2))
        * BigRational::from_integer(factorial(k as u64 + 1))
        * df(2 * k + 1);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rational;

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_numbers(8);
        assert_eq!(b[1], rational(-1, 2));
        assert_eq!(b[2], rational(1, 6));
        assert_eq!(b[4], rational(-1, 30));
        assert_eq!(b[8], rational(-1, 30));
        assert_eq!(b[5], rational(0, 1));
        assert_eq!(stirling_log_gamma(3)[1], rational(1, 12));
        assert_eq!(stirling_log_gamma(3)[3], rational(-1, 360));
    }

    #[test]
    fn vertex_first_time() {
        let t = vertex_times(&rational(1, 1), 4).unwrap();
        assert_eq!(t[0], rational(1, 8));
        assert_eq!(t[1], rational(0, 1));
        assert!(matches!(vertex_times(&rational(-1, 1), 2), Err(LocalDataError::BadFraming)));
    }

    #[test]
    fn times_round_trip() {
        let u = vec![rational(2, 1), rational(1, 3), rational(-5, 7), rational(1, 1)];
        let (unit, t) = times_from_u(&u, 3).unwrap();
        assert_eq!(unit, rational(1, 1));
        assert_eq!(t[0], -rational(3, 2) * rational(1, 3) / rational(2, 1));
        assert_eq!(u_from_times(&unit, &t).unwrap(), u);
    }
}
