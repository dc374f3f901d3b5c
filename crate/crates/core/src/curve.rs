//! Spectral curves on a rational parametrization and their branchpoint charts.

use num_rational::BigRational;
use thiserror::Error;

use crate::poly::RationalFunction;
use crate::ring::{RadicalPolicy, RingError, Scalar};
use crate::series::{BiSeries, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Irregularity {
    NotAZeroOfDx,
    XppZero,
    DyZero,
    DySingular,
}

impl Irregularity {
    pub fn tag(self) -> &'static str {
        match self {
            Irregularity::NotAZeroOfDx => "not_a_zero_of_dx",
            Irregularity::XppZero => "xpp_zero",
            Irregularity::DyZero => "dy_zero",
            Irregularity::DySingular => "dy_singular",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("branchpoint {point} is not regular: {}", reason.tag())]
    NonRegularCurve { point: String, reason: Irregularity },
    #[error("curve has no global involution at branchpoint {0}")]
    NoGlobalInvolution(String),
    #[error("branchpoint index {0} out of range")]
    NoSuchBranchpoint(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A function given either by its values or only through its differential.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec<S> {
    Function(RationalFunction<S>),
    Differential(RationalFunction<S>),
}

impl<S: Scalar> FunctionSpec<S> {
    /// `df/dz`.
    pub fn derivative(&self) -> RationalFunction<S> {
        match self {
            FunctionSpec::Function(f) => f.derivative(),
            FunctionSpec::Differential(d) => d.clone(),
        }
    }

    pub fn value_at(&self, a: &S) -> Option<S> {
        match self {
            FunctionSpec::Function(f) => f.eval(a).ok(),
            FunctionSpec::Differential(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelSpec {
    /// `dz1 dz2 / (z1 - z2)^2`.
    #[default]
    Standard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePresentation<S> {
    pub name: String,
    pub x: FunctionSpec<S>,
    pub y: FunctionSpec<S>,
    pub kernel: KernelSpec,
    pub branchpoints: Vec<S>,
    /// A global rational map with `x(iota(z)) = x(z)` swapping the sheets at
    /// every branchpoint, when one exists.
    pub involution: Option<RationalFunction<S>>,
    pub radicals: RadicalPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchpointReport<S> {
    pub verified: Vec<S>,
    /// Rational zeros of `dx` that were not declared.
    pub undeclared: Vec<BigRational>,
}

pub fn check_branchpoints<S: Scalar>(curve: &CurvePresentation<S>) -> Result<BranchpointReport<S>, CurveError> {
    let dx = curve.x.derivative();
    let dy = curve.y.derivative();
    for a in &curve.branchpoints {
        let fail = |reason| CurveError::NonRegularCurve { point: a.to_text(), reason };
        match dx.order_at(a) {
            1 => {}
            k if k >= 2 => return Err(fail(Irregularity::XppZero)),
            _ => return Err(fail(Irregularity::NotAZeroOfDx)),
        }
        match dy.order_at(a) {
            0 => {}
            k if k > 0 => return Err(fail(Irregularity::DyZero)),
            _ => return Err(fail(Irregularity::DySingular)),
        }
    }
    let undeclared = dx
        .num
        .rational_roots()
        .into_iter()
        .filter(|r| {
            let s = S::from_rational(r);
            !dx.den.eval(&s).is_zero() && !curve.branchpoints.iter().any(|a| a == &s)
        })
        .collect();
    Ok(BranchpointReport { verified: curve.branchpoints.clone(), undeclared })
}

/// Local data at one branchpoint: `z = a + w(zeta)` with
/// `x(z) - x(a) = zeta^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchChart<S> {
    pub point: S,
    pub x_at_point: Option<S>,
    /// `sqrt(x''(a)/2)`, so that `zeta ~ scale * (z - a)`.
    pub scale: S,
    /// `w(zeta) = z(zeta) - a`.
    pub w: TruncatedSeries<S>,
    /// `w(-zeta)`, the deck involution in the chart.
    pub w_bar: TruncatedSeries<S>,
    /// `dw/dzeta`.
    pub dw: TruncatedSeries<S>,
    /// `zeta(w)`, the inverse of `w`.
    pub zeta_of_w: TruncatedSeries<S>,
    /// Odd coefficients: `y(z(zeta)) - y(z(-zeta)) = 2 sum u_k zeta^(2k+1)`.
    pub u: Vec<S>,
    pub order: i64,
}

pub fn extract_chart<S: Scalar>(
    curve: &CurvePresentation<S>,
    index: usize,
    order: i64,
) -> Result<BranchChart<S>, CurveError> {
    let a = curve.branchpoints.get(index).ok_or(CurveError::NoSuchBranchpoint(index))?.clone();
    let order = order.max(2);
    let dx = curve.x.derivative();
    let xp = dx.expand_at(&a, order)?;
    let big_x = xp.integrate()?;
    let c2 = big_x.coeff(2)?;
    if c2.is_zero() {
        return Err(CurveError::NonRegularCurve { point: a.to_text(), reason: Irregularity::XppZero });
    }
    let scale = c2.try_sqrt(&curve.radicals)?;
    let h2 = big_x.shift(-2).scale(&c2.try_inv()?);
    let h = h2.truncate(order - 1).sqrt(&RadicalPolicy::RationalOnly)?;
    let zeta_of_w = h.shift(1).scale(&scale);
    let w = zeta_of_w.revert()?;
    let w_bar = w.reflect();
    let dw = w.differentiate();
    let dy = curve.y.derivative().expand_at(&a, order)?;
    let dy_zeta = dy.compose(&w)?.mul(&dw);
    let y_zeta = dy_zeta.integrate()?;
    let top = y_zeta.order().unwrap_or(order);
    let mut u = Vec::new();
    let mut k = 0;
    while 2 * k < top {
        u.push(y_zeta.coeff(2 * k + 1)?);
        k += 1;
    }
    Ok(BranchChart { x_at_point: curve.x.value_at(&a), point: a, scale, w, w_bar, dw, zeta_of_w, u, order })
}

impl<S: Scalar> BranchChart<S> {
    /// `U(s) = sum u_k s^k`.
    pub fn u_series(&self) -> TruncatedSeries<S> {
        TruncatedSeries::new(0, self.u.clone(), self.u.len() as i64 - 1)
    }
}

/// Regular part of the Bergman kernel in the charts at `ci` and `cj`:
/// `B(z, z') = (delta / (zeta - zeta')^2 + sum B_{k,l} zeta^k zeta'^l) dzeta dzeta'`,
/// known for total degree `<= order`. The charts must be known to order
/// `order + 3`.
pub fn local_bergman<S: Scalar>(
    kernel: KernelSpec,
    ci: &BranchChart<S>,
    cj: &BranchChart<S>,
    same: bool,
    order: i64,
) -> Result<BiSeries<S>, CurveError> {
    let KernelSpec::Standard = kernel;
    if same {
        let t = order + 2;
        let d = BiSeries::difference_quotient(&ci.w, t)?;
        let dp = BiSeries::from_first(&ci.dw, t)?;
        let dq = BiSeries::from_second(&ci.dw, t)?;
        let numer = dp.mul(&dq).sub(&d.mul(&d));
        let reg = numer.div_by_difference().div_by_difference();
        let d2inv = d.mul(&d).truncate(reg.order()).inv()?;
        Ok(reg.mul(&d2inv).truncate(order).with_pole(S::one()))
    } else {
        let gap = ci.point.sub_ref(&cj.point);
        let t = order;
        let wi = BiSeries::from_first(&ci.w, t)?;
        let wj = BiSeries::from_second(&cj.w, t)?;
        let mut diff = wi.sub(&wj);
        diff = diff.add(&BiSeries::from_fn(t, |a, b| if a == 0 && b == 0 { gap.clone() } else { S::zero() }));
        let dinv = diff.inv()?;
        let dp = BiSeries::from_first(&ci.dw, t)?;
        let dq = BiSeries::from_second(&cj.dw, t)?;
        Ok(dp.mul(&dq).mul(&dinv.mul(&dinv)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use crate::ring::{rational, Surd};
    use num_traits::{One, Zero};

    fn poly_curve(x: &[i64], y: &[i64], bps: Vec<Surd>) -> CurvePresentation<Surd> {
        CurvePresentation {
            name: "test".into(),
            x: FunctionSpec::Function(RationalFunction::polynomial(Polynomial::from_ints(x))),
            y: FunctionSpec::Function(RationalFunction::polynomial(Polynomial::from_ints(y))),
            kernel: KernelSpec::Standard,
            branchpoints: bps,
            involution: None,
            radicals: RadicalPolicy::Any,
        }
    }

    #[test]
    fn degenerate_cubic_rejected() {
        let c = poly_curve(&[0, 0, 0, 1], &[0, 1], vec![Surd::zero()]);
        match check_branchpoints(&c) {
            Err(CurveError::NonRegularCurve { reason, .. }) => assert_eq!(reason, Irregularity::XppZero),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undeclared_zero_reported() {
        let c = poly_curve(&[0, -3, 0, 1], &[2, 0, -4, 0, 1], vec![Surd::one()]);
        let r = check_branchpoints(&c).unwrap();
        assert_eq!(r.undeclared, vec![rational(-1, 1)]);
    }

    #[test]
    fn chart_squares_to_x() {
        let c = poly_curve(&[0, -3, 0, 1], &[2, 0, -4, 0, 1], vec![Surd::one(), -Surd::one()]);
        for i in 0..2 {
            let ch = extract_chart(&c, i, 10).unwrap();
            let dx = c.x.derivative().expand_at(&ch.point, 12).unwrap();
            let big_x = dx.integrate().unwrap();
            let back = big_x.compose(&ch.w).unwrap();
            let zeta2 = TruncatedSeries::monomial(Surd::one(), 2, None);
            assert!(back.agrees_with(&zeta2));
            assert!(back.order().unwrap() >= 10);
            // involution is an involution
            let iota = ch.w_bar.compose(&ch.zeta_of_w).unwrap();
            let twice = iota.compose(&iota).unwrap();
            assert!(twice.agrees_with(&TruncatedSeries::var(None)));
        }
    }

    #[test]
    fn airy_chart_is_trivial() {
        let c: CurvePresentation<Surd> = poly_curve(&[0, 0, 1], &[0, 1], vec![Surd::zero()]);
        let ch = extract_chart(&c, 0, 8).unwrap();
        assert!(ch.w.agrees_with(&TruncatedSeries::var(None)));
        assert_eq!(ch.u[0], Surd::one());
        assert!(ch.u[1..].iter().all(|u| u.is_zero()));
        let b = local_bergman(KernelSpec::Standard, &ch, &ch, true, 5).unwrap();
        assert_eq!(b.first_difference(&BiSeries::zero(5)), None);
    }
}
