use std::collections::BTreeMap;

use spectral_core::closedforms::{closed_form_check, ClosedFormError, ClosedFormReport};
use spectral_core::localdata::{LocalSpectralData, Orders};
use spectral_core::recursion::Recursion;
use spectral_core::report::{self, Report};
use spectral_core::ring::Scalar;
use spectral_core::stablegraphs::BhatTable;
use spectral_core::verify::{calibrate, theorem_check};
use spectral_core::{builtins, Exact};

fn run(name: &str, params: &[(&str, i64)]) -> ClosedFormReport {
    let p: BTreeMap<String, Exact> = params.iter().map(|(k, v)| (k.to_string(), Exact::from_int(*v))).collect();
    closed_form_check::<Exact>(name, &p, 6).unwrap()
}

fn passes(r: &ClosedFormReport, name: &str) -> bool {
    r.check(name).unwrap_or_else(|| panic!("no check {name}")).passes()
}

#[test]
fn airy_tables() {
    let r = run("airy", &[]);
    assert!(r.passes());
}

#[test]
fn ising_tables() {
    let r = run("ising", &[]);
    assert!(passes(&r, "reflection"));
    assert!(passes(&r, "bhat_cross_row"));
    assert!(r.check("bhat_cross_row").unwrap().phase.is_some());
    // the recorded row differs from the engine by 2k+1
    let row = r.check("bhat_row").unwrap();
    assert!(!row.passes());
    let ratios = row.ratios.as_ref().unwrap();
    for (k, ratio) in ratios.iter().enumerate() {
        assert_eq!(*ratio, (2 * k + 1).to_string());
    }
}

#[test]
fn p1_tables() {
    let r = run("p1", &[]);
    assert!(!passes(&r, "times"));
    assert!(r.notes.iter().any(|n| n.contains("t -> -t")));
    assert!(passes(&r, "f_pm_identity"));
}

#[test]
fn vertex_tables() {
    let r = run("vertex", &[("f", 2)]);
    assert!(passes(&r, "unit"));
    assert!(!passes(&r, "times"));
    let missing = closed_form_check::<Exact>("vertex", &BTreeMap::new(), 3);
    assert!(missing.is_err());
    assert!(matches!(closed_form_check::<Exact>("lambert", &BTreeMap::new(), 3), Err(ClosedFormError::NoClosedForms(_))));
}

#[test]
fn report_is_deterministic_and_sectioned() {
    let build = || {
        let d = LocalSpectralData::from_curve(&builtins::ising::<Exact>(), Orders::for_dimension(1)).unwrap();
        let bhat = BhatTable::for_type(&d, 1, 1).unwrap();
        let cal = calibrate(&d, &bhat).unwrap();
        let rec = Recursion::new(&d).unwrap();
        let th = theorem_check(&rec, &bhat, &cal, &[(0, 3), (1, 1)]).unwrap();
        let mut r = Report::new();
        r.put("local_data", &[], report::local_data(&d, 2));
        r.put("tensors", &["0,3"], report::tensor(&rec.invariants(0, 3).unwrap()));
        r.put("calibration", &[], report::calibration(&cal));
        r.put("theorem_check", &[], report::theorem(&th));
        r.record_time("theorem_check", std::time::Duration::from_millis(3));
        r
    };
    let a = build();
    let b = build();
    assert_eq!(a.to_json_without_timing(), b.to_json_without_timing());
    let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert!(v.get("timing").is_some());
    assert_eq!(v["theorem_check"]["all_equal"], true);
    assert_eq!(v["calibration"]["sign"], -1);
    assert_eq!(v["local_data"]["bhat"]["(0,0;0,0)"], "1/144");
    assert!(a.to_json_without_timing().find("timing").is_none());
}
