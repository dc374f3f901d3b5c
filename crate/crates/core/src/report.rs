//! JSON report assembly. Scalars are written as exact strings; maps are
//! ordered, so a report is a deterministic function of its inputs apart from
//! the `timing` section.

use std::collections::BTreeMap;
use std::time::Duration;

use serde_json::{json, Map, Value};

use crate::closedforms::ClosedFormReport;
use crate::localdata::LocalSpectralData;
use crate::recursion::{InvariantTensor, Slot};
use crate::ring::Scalar;
use crate::stablegraphs::{ColoredStableGraph, Prefactor};
use crate::verify::{CalibrationRecord, FormCheck, StructureReport, TheoremReport};

pub const SECTIONS: [&str; 9] =
    ["spec", "local_data", "tensors", "intersection", "graphs", "theorem_check", "calibration", "closed_form_checks", "timing"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    sections: BTreeMap<String, Value>,
    timing: BTreeMap<String, f64>,
}

pub fn key_text(key: &[Slot]) -> String {
    key.iter().map(|(i, d)| format!("({i},{d})")).collect::<Vec<_>>().join(",")
}

pub fn type_text(g: usize, n: usize) -> String {
    format!("{g},{n}")
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert `value` at `path` inside `section`, creating objects on the way.
    pub fn put(&mut self, section: &str, path: &[&str], value: Value) {
        let mut slot = self.sections.entry(section.to_string()).or_insert_with(|| Value::Object(Map::new()));
        for p in path {
            if !slot.is_object() {
                *slot = Value::Object(Map::new());
            }
            slot = slot.as_object_mut().unwrap().entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
        }
        *slot = value;
    }

    pub fn section(&self, name: &str) -> Option<&Value> {
        self.sections.get(name)
    }

    pub fn record_time(&mut self, label: &str, elapsed: Duration) {
        *self.timing.entry(label.to_string()).or_default() += elapsed.as_secs_f64() * 1e3;
    }

    pub fn to_value(&self, with_timing: bool) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.sections {
            m.insert(k.clone(), v.clone());
        }
        if with_timing {
            let t: Map<String, Value> = self.timing.iter().map(|(k, v)| (k.clone(), json!(format!("{v:.3} ms")))).collect();
            m.insert("timing".into(), Value::Object(t));
        }
        Value::Object(m)
    }

    /// Pretty JSON including the timing section.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value(true)).expect("serializable") + "\n"
    }

    /// Pretty JSON without timing: the part that must be byte-stable.
    pub fn to_json_without_timing(&self) -> String {
        serde_json::to_string_pretty(&self.to_value(false)).expect("serializable") + "\n"
    }
}

pub fn scalar<S: Scalar>(s: &S) -> Value {
    Value::String(s.to_text())
}

pub fn local_data<S: Scalar>(data: &LocalSpectralData<S>, bhat_order: i64) -> Value {
    let beta = data.branchpoints();
    let points: Vec<Value> = data
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut m = Map::new();
            m.insert("index".into(), json!(i));
            if let Some(ch) = &p.chart {
                m.insert("point".into(), scalar(&ch.point));
                // the branch of sqrt(x''(a)/2) fixes every sign below
                m.insert("root_branch".into(), scalar(&ch.scale));
            }
            m.insert("unit".into(), scalar(&p.unit));
            m.insert("times".into(), Value::Array(p.times.iter().map(scalar).collect()));
            Value::Object(m)
        })
        .collect();
    let mut bh = Map::new();
    let order = bhat_order.min(data.bhat_order());
    for i in 0..beta {
        for j in i..beta {
            for k in 0..=order {
                for l in 0..=order - k {
                    if let Ok(v) = data.bhat(i, k, j, l) {
                        bh.insert(format!("({i},{k};{j},{l})"), scalar(&v));
                    }
                }
            }
        }
    }
    json!({
        "name": data.name,
        "backend": S::backend_name(),
        "orders": { "bergman": data.orders.bergman, "times": data.orders.times },
        "points": points,
        "bhat": bh,
    })
}

pub fn tensor<S: Scalar>(t: &InvariantTensor<S>) -> Value {
    let m: Map<String, Value> = t.entries().map(|(k, v)| (key_text(k), scalar(v))).collect();
    Value::Object(m)
}

pub fn calibration(record: &CalibrationRecord) -> Value {
    json!({
        "sign": record.normalization.sign,
        "prefactor": match record.normalization.prefactor {
            Prefactor::Stated => "2^(3g-3+n)",
            Prefactor::QuarterPerVertex => "2^(3g-3+n) 4^-(2g-2+n)",
        },
        "prefactor_as_stated": record.prefactor_as_stated(),
        "fixtures": record.fixtures,
        "validated_on": record.validated_on,
    })
}

pub fn theorem<S: Scalar>(report: &TheoremReport<S>) -> Value {
    let mut targets = Map::new();
    for t in &report.targets {
        let keys: Map<String, Value> = t
            .keys
            .iter()
            .map(|k| {
                (
                    key_text(&k.key),
                    json!({ "recursion": k.recursion.to_text(), "theorem": k.theorem.to_text(), "equal": k.equal }),
                )
            })
            .collect();
        targets.insert(
            type_text(t.g, t.n),
            json!({ "graphs": t.graphs, "all_equal": t.all_equal(), "keys": keys }),
        );
    }
    json!({ "all_equal": report.all_equal(), "targets": targets })
}

pub fn structure(r: &StructureReport) -> Value {
    json!({
        "dimension": r.dimension,
        "max_degree_sum": r.max_degree_sum,
        "violations": r.violations.iter().map(|k| key_text(k)).collect::<Vec<_>>(),
        "bhat_degree": r.bhat_degree,
        "specializes": r.specializes,
        "passes": r.passes(),
    })
}

pub fn closed_forms(r: &ClosedFormReport) -> Value {
    let checks: Map<String, Value> = r
        .checks
        .iter()
        .map(|c| {
            let entries: Vec<Value> = c
                .entries
                .iter()
                .map(|e| json!({ "index": e.index, "engine": e.engine, "expected": e.expected, "equal": e.equal }))
                .collect();
            let mut m = Map::new();
            m.insert("passes".into(), json!(c.passes()));
            m.insert("entries".into(), Value::Array(entries));
            if let Some(p) = &c.phase {
                m.insert("phase".into(), json!(p));
            }
            if let Some(r) = &c.ratios {
                m.insert("ratios".into(), json!(r));
            }
            (c.name.clone(), Value::Object(m))
        })
        .collect();
    json!({ "order": r.order, "passes": r.passes(), "checks": checks, "notes": r.notes })
}

pub fn form_checks<S: Scalar>(checks: &[FormCheck<S>]) -> Value {
    let m: Map<String, Value> = checks
        .iter()
        .map(|c| {
            let mism: Vec<Value> = c
                .mismatches
                .iter()
                .map(|(k, a, b)| json!({ "key": key_text(k), "engine": a.to_text(), "closed_form": b.to_text() }))
                .collect();
            (c.name.clone(), json!({ "entries": c.entries, "passes": c.passes(), "mismatches": mism }))
        })
        .collect();
    Value::Object(m)
}

pub fn graphs(list: &[ColoredStableGraph]) -> Value {
    Value::Array(
        list.iter()
            .map(|g| {
                json!({
                    "vertices": g.vertices.iter().map(|v| json!({ "genus": v.genus, "color": v.color, "legs": v.legs })).collect::<Vec<_>>(),
                    "edges": g.edges.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
                    "aut": g.aut,
                })
            })
            .collect(),
    )
}
