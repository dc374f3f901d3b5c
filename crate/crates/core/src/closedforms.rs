//! Closed-form coefficient sequences for the builtin curves, compared with
//! what the engine extracts from the charts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::builtins::{self, BuiltinError};
use crate::localdata::{ising_bhat_closed_form, vertex_times, LocalDataError, LocalSpectralData, Orders};
use crate::ring::{double_factorial, factorial, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error(transparent)]
    LocalData(#[from] LocalDataError),
    #[error("no closed forms recorded for {0:?}")]
    NoClosedForms(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub index: i64,
    pub engine: String,
    pub expected: String,
    pub equal: bool,
}

/// One coefficient sequence checked entry by entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableCheck {
    pub name: String,
    pub entries: Vec<TableEntry>,
    /// Ratio `engine / expected` per entry, when the check fails.
    pub ratios: Option<Vec<String>>,
    /// For identities that hold up to the branch of a chart square root:
    /// the constant fourth root of unity relating the two sides.
    pub phase: Option<String>,
}

impl TableCheck {
    pub fn passes(&self) -> bool {
        self.entries.iter().all(|e| e.equal)
    }

    fn build<S: Scalar>(name: &str, rows: Vec<(i64, S, S)>) -> Self {
        let entries: Vec<TableEntry> = rows
            .iter()
            .map(|(k, a, b)| TableEntry { index: *k, engine: a.to_text(), expected: b.to_text(), equal: a.approx_eq(b) })
            .collect();
        let ratios = if entries.iter().all(|e| e.equal) {
            None
        } else {
            rows.iter()
                .map(|(_, a, b)| a.try_div(b).ok().map(|r| r.to_text()))
                .collect::<Option<Vec<_>>>()
        };
        TableCheck { name: name.to_string(), entries, ratios, phase: None }
    }

    /// Like [`TableCheck::build`], but the sides may differ by one constant
    /// `φ` with `φ^4 = 1`, read off the first nonzero expected entry.
    fn build_up_to_phase<S: Scalar>(name: &str, rows: Vec<(i64, S, S)>) -> Self {
        let phase = rows
            .iter()
            .find(|(_, _, b)| !b.is_zero())
            .and_then(|(_, a, b)| a.try_div(b).ok())
            .filter(|p| p.powi(4).is_ok_and(|p4| p4.approx_eq(&S::one())));
        match phase {
            Some(p) => {
                let scaled = rows.into_iter().map(|(k, a, b)| (k, a, b.mul_ref(&p))).collect();
                let mut check = Self::build(name, scaled);
                check.phase = Some(p.to_text());
                check
            }
            None => Self::build(name, rows),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormReport {
    pub curve: String,
    pub order: usize,
    pub checks: Vec<TableCheck>,
    /// Facts established about failing checks, e.g. a global sign.
    pub notes: Vec<String>,
}

impl ClosedFormReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.passes())
    }

    pub fn check(&self, name: &str) -> Option<&TableCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn q(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn pow_int(b: u32, e: u32) -> BigRational {
    q(BigInt::from(b).pow(e))
}

/// Ising `f_{+,+}` coefficient of `u^{-k}`, `k >= 1`, as recorded.
pub fn ising_fpp_closed_form(k: i64) -> BigRational {
    -q(double_factorial(6 * k - 5)) / (pow_int(2, 4 * k as u32) * pow_int(3, 3 * k as u32 - 1) * q(factorial(k as u64)) * q(double_factorial(2 * k - 1)))
}

/// Ising `B̂_{-,0;+,k}` as recorded.
pub fn ising_cross_closed_form(k: i64) -> BigRational {
    q(double_factorial(6 * k + 1)) / (pow_int(2, 4 * k as u32 + 3) * pow_int(3, 3 * k as u32 + 1) * q(factorial(k as u64)) * q(double_factorial(2 * k - 1)))
}

/// The quadratic recursion for the P¹ times, solved from `t̂_1`:
/// `-4k t̂_k = k(k-1) t̂_{k-1} + Σ_{j=2}^{k-1} (j-1)(k-j) t̂_{j-1} t̂_{k-j}`.
/// Returns the residuals `lhs - rhs` for `k = 2..=order` on a given sequence.
pub fn p1_recursion_residuals<S: Scalar>(t: &[S], order: usize) -> Vec<(i64, S)> {
    let at = |k: usize| if k == 0 { S::zero() } else { t[k - 1].clone() };
    (2..=order.min(t.len()))
        .map(|k| {
            let ki = k as i64;
            let lhs = at(k).scale(&q(BigInt::from(-4 * ki)));
            let mut rhs = at(k - 1).scale(&q(BigInt::from(ki * (ki - 1))));
            for j in 2..k {
                let c = q(BigInt::from((j as i64 - 1) * (ki - j as i64)));
                rhs = rhs.add_ref(&at(j - 1).mul_ref(&at(k - j)).scale(&c));
            }
            (ki, lhs.sub_ref(&rhs))
        })
        .collect()
}

/// The recorded P¹ times `t̂_1, t̂_2, t̂_3`.
pub fn p1_recorded_times() -> [BigRational; 3] {
    [BigRational::new((-1).into(), 16.into()), BigRational::new(1.into(), 64.into()), BigRational::new((-25).into(), 3072.into())]
}

fn ising<S: Scalar>(order: usize, notes: &mut Vec<String>) -> Result<Vec<TableCheck>, ClosedFormError> {
    let k_max = order as i64;
    let data = LocalSpectralData::from_curve(&builtins::ising::<S>(), Orders { bergman: 2 * k_max + 4, times: 2 })?;
    let mut checks = Vec::new();
    let row = (0..=k_max)
        .map(|k| Ok((k, data.bhat(0, 0, 0, k)?, S::from_rational(&ising_bhat_closed_form(k)))))
        .collect::<Result<Vec<_>, LocalDataError>>()?;
    let odd: Vec<(i64, S, S)> = row.iter().map(|(k, a, b)| (*k, a.clone(), b.scale(&q(BigInt::from(2 * k + 1))))).collect();
    if odd.iter().all(|(_, a, b)| a.approx_eq(b)) {
        notes.push("bhat_row: engine = recorded row times (2k+1), i.e. (2k-1)!! in place of (2k+1)!!".into());
    }
    checks.push(TableCheck::build("bhat_row", row));
    let f = data.f_series(0, 0, k_max + 1)?;
    let fpp = (1..=k_max + 1)
        .map(|k| Ok((k, f.coeff(k)?, S::from_rational(&ising_fpp_closed_form(k)))))
        .collect::<Result<Vec<_>, crate::series::SeriesError>>()
        .map_err(LocalDataError::from)?;
    checks.push(TableCheck::build("f_pp", fpp));
    // our ζ_- carries the branch of sqrt(x''(a_-)/2), so the cross row is
    // fixed up to a constant phase
    let cross = (0..=k_max)
        .map(|k| Ok((k, data.bhat(1, 0, 0, k)?, S::from_rational(&ising_cross_closed_form(k)))))
        .collect::<Result<Vec<_>, LocalDataError>>()?;
    checks.push(TableCheck::build_up_to_phase("bhat_cross_row", cross));
    checks.push(reflection(&data, k_max / 2)?);
    Ok(checks)
}

/// `B̂_{-,k;-,l}` against `B̂_{+,k;+,l}` under `ζ_-(z) = ρ ζ_+(-z)`, which
/// rescales each entry by `ρ^{-2k-2l-2}`.
fn reflection<S: Scalar>(data: &LocalSpectralData<S>, k_max: i64) -> Result<TableCheck, LocalDataError> {
    let rho = data.points[1].unit.try_div(&data.points[0].unit)?;
    let rho2 = rho.mul_ref(&rho);
    let mut rows = Vec::new();
    for k in 0..=k_max {
        for l in 0..=k_max - k {
            let factor = rho2.powi(-(k + l + 1))?;
            rows.push((k * (k_max + 1) + l, data.bhat(1, k, 1, l)?, data.bhat(0, k, 0, l)?.mul_ref(&factor)));
        }
    }
    Ok(TableCheck::build("reflection", rows))
}

fn p1<S: Scalar>(order: usize, notes: &mut Vec<String>) -> Result<Vec<TableCheck>, ClosedFormError> {
    let data = LocalSpectralData::from_curve(&builtins::p1::<S>(), Orders { bergman: 2 * order as i64 + 4, times: order })?;
    let times = &data.points[0].times;
    let recorded = p1_recorded_times();
    let mut checks = vec![TableCheck::build(
        "times",
        (0..3).map(|k| (k as i64 + 1, times[k].clone(), S::from_rational(&recorded[k]))).collect(),
    )];
    let rows = p1_recursion_residuals(times, order).into_iter().map(|(k, r)| (k, r, S::zero())).collect();
    checks.push(TableCheck::build("times_recursion", rows));
    let negated: Vec<S> = times.iter().map(|t| -t.clone()).collect();
    if (0..3).all(|k| negated[k].approx_eq(&S::from_rational(&recorded[k]))) {
        notes.push("times: the recorded values are the engine's with t -> -t".into());
    }
    if p1_recursion_residuals(&negated, order).iter().all(|(_, r)| r.is_zero()) {
        notes.push(format!("times_recursion: holds for the negated engine sequence up to k = {order}"));
    }
    let fpp = data.f_series(0, 0, order as i64)?;
    let fpm = data.f_series(0, 1, order as i64)?;
    // -2u d/du (c u^{-k}) = 2k c u^{-k}
    let rows = (0..=order as i64)
        .map(|k| Ok((k, fpm.coeff(k)?, fpp.coeff(k)?.scale(&q(BigInt::from(2 * k))))))
        .collect::<Result<Vec<_>, crate::series::SeriesError>>()
        .map_err(LocalDataError::from)?;
    checks.push(TableCheck::build_up_to_phase("f_pm_identity", rows));
    Ok(checks)
}

fn vertex<S: Scalar>(f: &S, order: usize, notes: &mut Vec<String>) -> Result<Vec<TableCheck>, ClosedFormError> {
    let data = LocalSpectralData::from_curve(&builtins::vertex(f)?, Orders { bergman: 6, times: order })?;
    let formula = vertex_times(f, order)?;
    let rows: Vec<(i64, S, S)> = (0..order).map(|k| (k as i64 + 1, data.points[0].times[k].clone(), formula[k].clone())).collect();
    if rows.iter().all(|(_, a, b)| a.approx_eq(&-b.clone())) && rows.iter().any(|(_, a, _)| !a.is_zero()) {
        notes.push("times: the Bernoulli formula gives the engine's times with t -> -t".into());
    }
    // e^{t̂_0} = 1/unit squares to 2f(f+1)
    let inv = data.points[0].unit.try_inv().map_err(LocalDataError::from)?;
    let two_f_f1 = f.mul_ref(&f.add_ref(&S::one())).scale(&q(BigInt::from(2)));
    Ok(vec![TableCheck::build("times", rows), TableCheck::build("unit", vec![(0, inv.mul_ref(&inv), two_f_f1)])])
}

fn airy<S: Scalar>(order: usize) -> Result<Vec<TableCheck>, ClosedFormError> {
    let data = LocalSpectralData::from_curve(&builtins::airy::<S>(), Orders { bergman: 2 * order as i64, times: order })?;
    let mut rows = vec![(0, data.points[0].unit.clone(), S::from_ratio(1, 2))];
    for k in 0..order {
        rows.push((k as i64 + 1, data.points[0].times[k].clone(), S::zero()));
    }
    let bh = (0..=order as i64).map(|k| Ok((k, data.bhat(0, k, 0, order as i64 - k)?, S::zero()))).collect::<Result<Vec<_>, LocalDataError>>()?;
    Ok(vec![TableCheck::build("unit_and_times", rows), TableCheck::build("bhat_antidiagonal", bh)])
}

/// Compare the engine's tables for a builtin with the recorded closed forms
/// up to `order`. Parameters `f` (vertex) are read from `params`.
pub fn closed_form_check<S: Scalar>(
    name: &str,
    params: &BTreeMap<String, S>,
    order: usize,
) -> Result<ClosedFormReport, ClosedFormError> {
    let mut notes = Vec::new();
    let checks = match name {
        "airy" => airy::<S>(order)?,
        "ising" => ising::<S>(order, &mut notes)?,
        "p1" | "p1_norbury_scott" => p1::<S>(order, &mut notes)?,
        "vertex" => {
            let f = params.get("f").cloned().ok_or_else(|| BuiltinError::BadParameters {
                name: "vertex".into(),
                reason: "missing parameter f".into(),
            })?;
            vertex(&f, order, &mut notes)?
        }
        other => return Err(ClosedFormError::NoClosedForms(other.to_string())),
    };
    Ok(ClosedFormReport { curve: name.to_string(), order, checks, notes })
}
