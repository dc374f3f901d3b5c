//! Built-in spectral curves.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::curve::{CurvePresentation, FunctionSpec, KernelSpec};
use crate::poly::{Polynomial, RationalFunction};
use crate::ring::{RadicalPolicy, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuiltinError {
    #[error("unknown builtin curve {0:?}")]
    Unknown(String),
    #[error("bad parameters for {name}: {reason}")]
    BadParameters { name: String, reason: String },
}

pub const NAMES: [&str; 6] = ["airy", "ising", "p1_norbury_scott", "lambert", "vertex", "conifold"];

fn poly<S: Scalar>(c: &[i64]) -> Polynomial<S> {
    Polynomial::from_ints(c)
}

fn rf<S: Scalar>(num: Polynomial<S>, den: Polynomial<S>) -> RationalFunction<S> {
    RationalFunction::new(num, den).expect("nonzero denominator")
}

fn curve<S: Scalar>(name: &str, x: FunctionSpec<S>, y: FunctionSpec<S>, bps: Vec<S>) -> CurvePresentation<S> {
    CurvePresentation {
        name: name.to_string(),
        x,
        y,
        kernel: KernelSpec::Standard,
        branchpoints: bps,
        involution: None,
        radicals: RadicalPolicy::Any,
    }
}

/// `x = z^2, y = z`.
pub fn airy<S: Scalar>() -> CurvePresentation<S> {
    let mut c = curve(
        "airy",
        FunctionSpec::Function(RationalFunction::polynomial(poly(&[0, 0, 1]))),
        FunctionSpec::Function(RationalFunction::polynomial(poly(&[0, 1]))),
        vec![S::zero()],
    );
    c.involution = Some(RationalFunction::polynomial(poly(&[0, -1])));
    c
}

/// `x = z^3 - 3z, y = z^4 - 4z^2 + 2`, branchpoints `+1, -1`.
pub fn ising<S: Scalar>() -> CurvePresentation<S> {
    curve(
        "ising",
        FunctionSpec::Function(RationalFunction::polynomial(poly(&[0, -3, 0, 1]))),
        FunctionSpec::Function(RationalFunction::polynomial(poly(&[2, 0, -4, 0, 1]))),
        vec![S::one(), -S::one()],
    )
}

/// `x = z + 1/z, y = ln z`, branchpoints `+1, -1`, involution `z -> 1/z`.
pub fn p1<S: Scalar>() -> CurvePresentation<S> {
    let mut c = curve(
        "p1_norbury_scott",
        FunctionSpec::Function(rf(poly(&[1, 0, 1]), poly(&[0, 1]))),
        FunctionSpec::Differential(rf(poly(&[1]), poly(&[0, 1]))),
        vec![S::one(), -S::one()],
    );
    c.involution = Some(rf(poly(&[1]), poly(&[0, 1])));
    c
}

/// `e^x = y e^{-y}`: `x = ln z - z, y = z`, branchpoint `1`.
pub fn lambert<S: Scalar>() -> CurvePresentation<S> {
    curve(
        "lambert",
        FunctionSpec::Differential(rf(poly(&[1, -1]), poly(&[0, 1]))),
        FunctionSpec::Function(RationalFunction::polynomial(poly(&[0, 1]))),
        vec![S::one()],
    )
}

/// Framed vertex `X = Y^f (1 - Y)`: `x = -f ln z - ln(1-z), y = -ln z`.
pub fn vertex<S: Scalar>(f: &S) -> Result<CurvePresentation<S>, BuiltinError> {
    let f1 = f.add_ref(&S::one());
    if f.is_zero() || f1.is_zero() {
        return Err(BuiltinError::BadParameters { name: "vertex".into(), reason: "framing f must avoid 0 and -1".into() });
    }
    // dx = ((1+f) z - f) / (z (1 - z))
    let num = Polynomial::new(vec![-f.clone(), f1.clone()]);
    let den = poly(&[0, 1, -1]);
    let a = f.try_div(&f1).expect("f + 1 nonzero");
    Ok(curve(
        "vertex",
        FunctionSpec::Differential(rf(num, den)),
        FunctionSpec::Differential(rf(poly(&[-1]), poly(&[0, 1]))),
        vec![a],
    ))
}

/// Resolved conifold `X = Y^f (1 - Y)/(1 - Y/Q)`:
/// `dx = (-f/z + 1/(1-z) - 1/(Q-z)) dz`, `y = -ln z`. The two branchpoints
/// must be rational.
pub fn conifold<S: Scalar>(f: &S, q: &S) -> Result<CurvePresentation<S>, BuiltinError> {
    let bad = |reason: &str| BuiltinError::BadParameters { name: "conifold".into(), reason: reason.into() };
    if f.is_zero() || f.add_ref(&S::one()).is_zero() {
        return Err(bad("framing f must avoid 0 and -1"));
    }
    if q.is_zero() || q.sub_ref(&S::one()).is_zero() {
        return Err(bad("Q must avoid 0 and 1"));
    }
    let z = poly::<S>(&[0, 1]);
    let one_minus_z = poly::<S>(&[1, -1]);
    let q_minus_z = Polynomial::new(vec![q.clone(), -S::one()]);
    let t1 = rf(Polynomial::constant(-f.clone()), z);
    let t2 = rf(poly(&[1]), one_minus_z);
    let t3 = rf(poly(&[-1]), q_minus_z);
    let dx = t1.add(&t2).add(&t3);
    let roots = dx.num.rational_roots();
    let bps: Vec<S> = roots
        .iter()
        .map(S::from_rational)
        .filter(|r| !dx.den.eval(r).is_zero())
        .collect();
    if bps.len() != 2 {
        return Err(bad("branchpoints are not rational for these parameters"));
    }
    // a_+ first: the larger root
    let mut bps = bps;
    bps.reverse();
    Ok(curve(
        "conifold",
        FunctionSpec::Differential(dx),
        FunctionSpec::Differential(rf(poly(&[-1]), poly(&[0, 1]))),
        bps,
    ))
}

/// Look up a builtin by name; `params` holds `f` and `Q` where needed.
pub fn builtin<S: Scalar>(name: &str, params: &BTreeMap<String, S>) -> Result<CurvePresentation<S>, BuiltinError> {
    let get = |key: &str| {
        params.get(key).cloned().ok_or_else(|| BuiltinError::BadParameters {
            name: name.to_string(),
            reason: format!("missing parameter {key}"),
        })
    };
    match name {
        "airy" => Ok(airy()),
        "ising" => Ok(ising()),
        "p1" | "p1_norbury_scott" => Ok(p1()),
        "lambert" => Ok(lambert()),
        "vertex" => vertex(&get("f")?),
        "conifold" => conifold(&get("f")?, &get("Q")?),
        other => Err(BuiltinError::Unknown(other.to_string())),
    }
}
