//! Runs the requested commands over one scalar backend and assembles the
//! report. Checks that fail still produce their report section; the first
//! failing section is returned alongside the report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Value};
use spectral_core::builtins;
use spectral_core::closedforms::closed_form_check;
use spectral_core::curve::{CurvePresentation, FunctionSpec, KernelSpec};
use spectral_core::intersect::{kappa_exp_correlator, psi_correlator};
use spectral_core::localdata::LocalSpectralData;
use spectral_core::poly::{Polynomial, RationalFunction};
use spectral_core::recursion::{dimension, fg, Recursion};
use spectral_core::report::{self, key_text, type_text, Report};
use spectral_core::ring::{RadicalPolicy, Scalar};
use spectral_core::stablegraphs::{enumerate, BhatTable};
use spectral_core::verify::{calibrate, theorem_check, VerifyError};

use crate::spec::{Command, Field, Fraction, Number, Resolved, Source, SpecError};

#[derive(Debug)]
pub enum Failure {
    Spec(SpecError),
    Compute { section: &'static str, message: String },
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Spec(e)
    }
}

fn compute(section: &'static str) -> impl Fn(&dyn std::fmt::Display) -> Failure {
    move |e| Failure::Compute { section, message: e.to_string() }
}

pub struct Outcome {
    pub report: Report,
    pub first_failure: Option<&'static str>,
}

fn policy(field: &Field) -> RadicalPolicy {
    match field {
        Field::Rational => RadicalPolicy::RationalOnly,
        Field::Quadratic(m) => RadicalPolicy::Allow(vec![*m]),
        Field::Surd | Field::Float(_) => RadicalPolicy::Any,
    }
}

fn scalar<S: Scalar>(n: &Number) -> Result<S, SpecError> {
    S::from_text(&n.text()).map_err(|e| SpecError(format!("bad scalar {:?}: {e}", n.text())))
}

fn poly<S: Scalar>(c: &[Number]) -> Result<Polynomial<S>, SpecError> {
    Ok(Polynomial::new(c.iter().map(scalar).collect::<Result<_, _>>()?))
}

fn fraction<S: Scalar>(f: &Fraction) -> Result<RationalFunction<S>, SpecError> {
    let num = poly(&f.num)?;
    let den = match &f.den {
        Some(d) => poly(d)?,
        None => Polynomial::one(),
    };
    RationalFunction::new(num, den).map_err(|e| SpecError(format!("bad rational function: {e}")))
}

fn params<S: Scalar>(p: &BTreeMap<String, Number>) -> Result<BTreeMap<String, S>, SpecError> {
    p.iter().map(|(k, v)| Ok((k.clone(), scalar(v)?))).collect()
}

pub fn curve<S: Scalar>(spec: &Resolved) -> Result<CurvePresentation<S>, SpecError> {
    let mut c = match &spec.source {
        Source::Builtin(b) => builtins::builtin::<S>(&b.name, &params(&b.params)?).map_err(|e| SpecError(e.to_string()))?,
        Source::Parametric(p) => {
            let side = |f: &Option<Fraction>, d: &Option<Fraction>| -> Result<FunctionSpec<S>, SpecError> {
                match (f, d) {
                    (Some(f), _) => Ok(FunctionSpec::Function(fraction(f)?)),
                    (_, Some(d)) => Ok(FunctionSpec::Differential(fraction(d)?)),
                    _ => unreachable!("checked during resolution"),
                }
            };
            CurvePresentation {
                name: spec.name.clone(),
                x: side(&p.x, &p.dx)?,
                y: side(&p.y, &p.dy)?,
                kernel: KernelSpec::Standard,
                branchpoints: p.branchpoints.iter().map(scalar).collect::<Result<_, _>>()?,
                involution: p.involution.as_ref().map(fraction).transpose()?,
                radicals: RadicalPolicy::Any,
            }
        }
    };
    c.radicals = policy(&spec.field);
    Ok(c)
}

/// Nondecreasing degree tuples of length `n` with sum at most `budget`.
fn degree_tuples(n: usize, budget: i64) -> Vec<Vec<i64>> {
    fn go(n: usize, from: i64, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let left = (n - cur.len()) as i64;
        let mut d = from;
        while d * left <= budget {
            cur.push(d);
            go(n, d, budget - d, cur, out);
            cur.pop();
            d += 1;
        }
    }
    let mut out = Vec::new();
    go(n, 0, budget, &mut Vec::new(), &mut out);
    out
}

fn degree_text(d: &[i64]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

struct Run<'s, S> {
    spec: &'s Resolved,
    curve: CurvePresentation<S>,
    data: Option<LocalSpectralData<S>>,
    report: Report,
    first_failure: Option<&'static str>,
}

impl<S: Scalar> Run<'_, S> {
    fn data(&mut self) -> Result<&LocalSpectralData<S>, Failure> {
        if self.data.is_none() {
            let d = LocalSpectralData::from_curve(&self.curve, self.spec.orders).map_err(|e| compute("local_data")(&e))?;
            self.data = Some(d);
        }
        Ok(self.data.as_ref().expect("just built"))
    }

    fn fail(&mut self, section: &'static str) {
        self.first_failure.get_or_insert(section);
    }

    fn max_dimension(&self) -> i64 {
        self.spec.targets.iter().map(|&(g, n)| dimension(g, n)).max().unwrap_or(1).max(1)
    }

    fn local_data(&mut self) -> Result<(), Failure> {
        let d = self.data()?;
        let v = report::local_data(d, d.bhat_order());
        self.report.put("local_data", &[], v);
        Ok(())
    }

    fn invariants(&mut self) -> Result<(), Failure> {
        let targets = self.spec.targets.clone();
        let d = self.data()?;
        let rec = Recursion::new(d).map_err(|e| compute("tensors")(&e))?;
        let mut out = Vec::new();
        for (g, n) in targets {
            let v = if n == 0 {
                let f = fg(&rec, g).map_err(|e| compute("tensors")(&e))?;
                json!({ key_text(&[]): report::scalar(&f) })
            } else {
                report::tensor(&*rec.invariants(g, n).map_err(|e| compute("tensors")(&e))?)
            };
            out.push((type_text(g, n), v));
        }
        for (k, v) in out {
            self.report.put("tensors", &[&k], v);
        }
        Ok(())
    }

    fn intersection(&mut self) -> Result<(), Failure> {
        let targets = self.spec.targets.clone();
        let d = self.data()?;
        let mut out = Vec::new();
        for (g, n) in targets {
            let dim = dimension(g, n);
            let mut psi = serde_json::Map::new();
            let mut points = Vec::new();
            for p in &d.points {
                let mut m = serde_json::Map::new();
                for t in degree_tuples(n, dim) {
                    let c = kappa_exp_correlator(g, &t, &p.times).map_err(|e| compute("intersection")(&e))?;
                    m.insert(degree_text(&t), report::scalar(&c.value));
                }
                points.push(Value::Object(m));
            }
            for t in degree_tuples(n, dim).into_iter().filter(|t| t.iter().sum::<i64>() == dim) {
                psi.insert(degree_text(&t), json!(psi_correlator(g, &t).to_string()));
            }
            out.push((type_text(g, n), json!({ "psi": psi, "kappa_exp": points })));
        }
        for (k, v) in out {
            self.report.put("intersection", &[&k], v);
        }
        Ok(())
    }

    fn graphs(&mut self) {
        let beta = self.curve.branchpoints.len();
        for &(g, n) in &self.spec.targets {
            let list = enumerate(g, n, beta);
            self.report.put("graphs", &[&type_text(g, n)], json!({ "count": list.len(), "graphs": report::graphs(&list) }));
        }
    }

    fn theorem_check(&mut self) -> Result<(), Failure> {
        let order = 2 * self.max_dimension();
        let targets = self.spec.targets.clone();
        let d = self.data()?;
        let bhat = BhatTable::from_data(d, order).map_err(|e| compute("theorem_check")(&e))?;
        let cal = match calibrate(d, &bhat) {
            Ok(c) => c,
            Err(VerifyError::CalibrationFailure { residuals }) => {
                let r: Vec<Value> = residuals
                    .iter()
                    .map(|r| {
                        json!({
                            "fixture": r.fixture,
                            "sign": r.normalization.sign,
                            "prefactor": format!("{:?}", r.normalization.prefactor),
                            "type": type_text(r.g, r.n),
                            "key": key_text(&r.key),
                            "recursion": r.recursion,
                            "theorem": r.theorem,
                        })
                    })
                    .collect();
                self.report.put("calibration", &[], json!({ "passes": false, "residuals": r }));
                self.fail("calibration");
                return Ok(());
            }
            Err(e) => return Err(compute("calibration")(&e)),
        };
        let rec = Recursion::new(d).map_err(|e| compute("theorem_check")(&e))?;
        let th = theorem_check(&rec, &bhat, &cal, &targets).map_err(|e| compute("theorem_check")(&e))?;
        let ok = th.all_equal();
        self.report.put("calibration", &[], report::calibration(&cal));
        self.report.put("theorem_check", &[], report::theorem(&th));
        if !ok {
            self.fail("theorem_check");
        }
        Ok(())
    }

    fn closed_form_check(&mut self) -> Result<(), Failure> {
        let Source::Builtin(b) = &self.spec.source else {
            return Err(Failure::Compute {
                section: "closed_form_checks",
                message: "closed forms are recorded for builtin curves only".into(),
            });
        };
        let p = params::<S>(&b.params)?;
        let r = closed_form_check::<S>(&b.name, &p, self.spec.table_order).map_err(|e| compute("closed_form_checks")(&e))?;
        self.report.put("closed_form_checks", &[&b.name], report::closed_forms(&r));
        if !r.passes() {
            self.fail("closed_form_checks");
        }
        Ok(())
    }
}

/// Run every command of `spec` over the scalar type `S`.
pub fn run<S: Scalar>(spec: &Resolved) -> Result<Outcome, Failure> {
    let curve = curve::<S>(spec)?;
    let mut run = Run { spec, curve, data: None, report: Report::new(), first_failure: None };
    run.report.put(
        "spec",
        &[],
        json!({
            "name": spec.name,
            "curve": run.curve.name,
            "backend": S::backend_name(),
            "orders": { "bergman": spec.orders.bergman, "times": spec.orders.times, "chart": spec.orders.chart() },
            "targets": spec.targets.iter().map(|&(g, n)| type_text(g, n)).collect::<Vec<_>>(),
            "commands": spec.commands.iter().map(|c| c.name()).collect::<Vec<_>>(),
        }),
    );
    for &cmd in &spec.commands {
        let start = Instant::now();
        match cmd {
            Command::LocalData => run.local_data()?,
            Command::Invariants => run.invariants()?,
            Command::Intersection => run.intersection()?,
            Command::Graphs => run.graphs(),
            Command::TheoremCheck => run.theorem_check()?,
            Command::ClosedFormCheck => run.closed_form_check()?,
        }
        run.report.record_time(cmd.name(), start.elapsed());
    }
    Ok(Outcome { report: run.report, first_failure: run.first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples() {
        assert_eq!(degree_tuples(2, 1), vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(degree_tuples(0, 3), vec![Vec::<i64>::new()]);
        assert_eq!(degree_tuples(3, 0).len(), 1);
    }
}
