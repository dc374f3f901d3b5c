//! Acceptance run: one line per criterion. Criteria listed in `KNOWN_RED`
//! are expected to fail for the reasons printed with them; the run exits
//! nonzero if anything else fails or a known-red criterion starts passing.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use spectral_core::builtins;
use spectral_core::closedforms::closed_form_check;
use spectral_core::intersect::psi_correlator;
use spectral_core::localdata::{LocalSpectralData, Orders};
use spectral_core::recursion::oracle::GlobalOracle;
use spectral_core::recursion::{dimension, InvariantTensor, Recursion};
use spectral_core::report::{self, Report};
use spectral_core::ring::Scalar;
use spectral_core::stablegraphs::{enumerate, enumerate_brute, BhatTable};
use spectral_core::verify::{
    calibrate, calibrate_fixtures, perturbed_structure_check, structure_check, symmetry_check, theorem_check,
    worked_forms_check, CalibrationRecord,
};
use spectral_core::{Exact, ExactData};

const KNOWN_RED: [usize; 1] = [6];

const AIRY_TARGETS: [(usize, usize); 6] = [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (2, 1)];
const ISING_TARGETS: [(usize, usize); 3] = [(0, 3), (0, 4), (1, 1)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn data(name: &str, dim: i64) -> ExactData {
    let curve = builtins::builtin::<Exact>(name, &BTreeMap::new()).unwrap();
    LocalSpectralData::from_curve(&curve, Orders::for_dimension(dim)).unwrap()
}

fn max_dim(targets: &[(usize, usize)]) -> i64 {
    targets.iter().map(|&(g, n)| dimension(g, n)).max().unwrap()
}

/// The criterion-1 pipeline rendered as a report without timing.
fn theorem_report(cal: &CalibrationRecord) -> (Report, bool) {
    let mut rep = Report::new();
    let mut ok = true;
    rep.put("calibration", &[], report::calibration(cal));
    for (name, targets) in [("airy", &AIRY_TARGETS[..]), ("ising", &ISING_TARGETS[..])] {
        let dim = max_dim(targets);
        let d = data(name, dim);
        let bhat = BhatTable::from_data(&d, 2 * dim).unwrap();
        let rec = Recursion::new(&d).unwrap();
        let t = theorem_check(&rec, &bhat, cal, targets).unwrap();
        ok &= t.all_equal();
        rep.put("theorem_check", &[name], report::theorem(&t));
        for &(g, n) in targets {
            rep.put("tensors", &[name, &report::type_text(g, n)], report::tensor(&rec.invariants(g, n).unwrap()));
        }
        rep.put("local_data", &[name], report::local_data(&d, 2));
    }
    (rep, ok)
}

fn criterion1(cal: &CalibrationRecord) -> Outcome {
    let start = Instant::now();
    let (_, ok) = theorem_report(cal);
    let secs = start.elapsed().as_secs_f64();
    let n = &cal.normalization;
    Outcome {
        pass: ok && secs < 300.0,
        detail: format!(
            "airy {:?} and ising {:?} equal entry for entry in {secs:.2}s; sign {}, prefactor {}",
            AIRY_TARGETS,
            ISING_TARGETS,
            n.sign,
            if cal.prefactor_as_stated() { "as stated" } else { "flagged: 2^(3g-3+n) 4^-(2g-2+n)" }
        ),
    }
}

fn criterion2(cal: &CalibrationRecord) -> Outcome {
    let checks = worked_forms_check(cal).unwrap();
    let pass = checks.iter().all(|c| c.passes());
    let detail = checks.iter().map(|c| format!("{} {} keys, {} mismatches", c.name, c.entries, c.mismatches.len())).collect::<Vec<_>>().join("; ");
    Outcome { pass, detail }
}

fn oracle_types() -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for chi in 1..=4usize {
        for g in 0..=(chi + 2) / 2 {
            if chi + 2 >= 2 * g {
                let n = chi + 2 - 2 * g;
                if n >= 1 {
                    v.push((g, n));
                }
            }
        }
    }
    v
}

struct OracleStats {
    equal: bool,
    poles_ok: bool,
    residue_free: bool,
    in_span: bool,
    cases: usize,
    tensors: Vec<InvariantTensor<Exact>>,
}

fn oracle_run() -> OracleStats {
    let types = oracle_types();
    let dim = max_dim(&types);
    let mut st = OracleStats { equal: true, poles_ok: true, residue_free: true, in_span: true, cases: 0, tensors: Vec::new() };
    for name in ["airy", "p1"] {
        let curve = builtins::builtin::<Exact>(name, &BTreeMap::new()).unwrap();
        let d = LocalSpectralData::from_curve(&curve, Orders::for_dimension(dim)).unwrap();
        let rec = Recursion::new(&d).unwrap();
        let mut oracle = GlobalOracle::new(&curve, dim).unwrap();
        for &(g, n) in &types {
            let t = rec.invariants(g, n).unwrap();
            let o = oracle.evaluate(g, n).unwrap();
            st.equal &= t.first_difference(&o.tensor).is_none();
            st.poles_ok &= o.max_pole <= 6 * g as i64 + 2 * n as i64 - 4;
            st.residue_free &= o.residue_free;
            st.in_span &= o.outside_span.is_none();
            st.cases += 1;
            st.tensors.push((*t).clone());
        }
    }
    st
}

fn criterion3(st: &OracleStats) -> Outcome {
    Outcome {
        pass: st.equal && st.in_span,
        detail: format!("{} cases on airy and p1 with 2g-2+n <= 4; projection reproduces every oracle form: {}", st.cases, st.in_span),
    }
}

fn criterion4() -> Outcome {
    let d = data("airy", 2);
    let rec = Recursion::new(&d).unwrap();
    let mut bad = Vec::new();
    let mut keys = 0;
    for (g, n) in [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2)] {
        let t = rec.invariants(g, n).unwrap();
        for key in spectral_core::recursion::all_keys(1, n, dimension(g, n)) {
            let degs: Vec<i64> = key.iter().map(|s| s.1).collect();
            // recorded convention: A = 2^{g-1} <prod tau>
            let scale = if g == 0 { BigRational::new(1.into(), 2.into()) } else { BigRational::from_integer((1i64 << (g - 1)).into()) };
            let want = Exact::from_rational(&(psi_correlator(g, &degs) * scale));
            keys += 1;
            if t.get(&key) != want {
                bad.push(report::key_text(&key));
            }
        }
    }
    let w11 = rec.invariants(1, 1).unwrap().get(&[(0, 1)]);
    let abs_ok = w11 == Exact::from_ratio(1, 24) || w11 == Exact::from_ratio(-1, 24);
    Outcome {
        pass: bad.is_empty() && abs_ok,
        detail: format!("{keys} keys equal 2^(g-1) <prod tau_d> from DVV, mismatches {bad:?}; A(1,1;(0,1)) = {}", w11.to_text()),
    }
}

fn criterion5() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["airy", "ising", "p1", "lambert"] {
        let curve = builtins::builtin::<Exact>(name, &BTreeMap::new()).unwrap();
        let d = LocalSpectralData::from_curve(&curve, Orders { bergman: 36, times: 2 }).unwrap();
        let beta = d.branchpoints();
        let mut ok = true;
        for i in 0..beta {
            for j in 0..beta {
                ok &= d.bcheck(i, j, 8).map(|r| r.verified() && r.order >= 8).unwrap_or(false);
            }
        }
        pass &= ok;
        parts.push(format!("{name} {}", if ok { "ok" } else { "mismatch" }));
    }
    Outcome { pass, detail: format!("bi-order (8,8), every pair: {}", parts.join(", ")) }
}

fn criterion6() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut run = |label: &str, name: &str, params: BTreeMap<String, Exact>, order: usize, checks: &[&str]| {
        let r = closed_form_check::<Exact>(name, &params, order).unwrap();
        for c in checks {
            let tc = r.check(c).unwrap();
            pass &= tc.passes();
            let mut s = format!("{label}.{c} {}", if tc.passes() { "ok" } else { "FAIL" });
            if let Some(p) = &tc.phase {
                s += &format!(" (phase {p})");
            }
            lines.push(s);
        }
        for n in &r.notes {
            lines.push(format!("{label} note: {n}"));
        }
    };
    run("ising", "ising", BTreeMap::new(), 10, &["bhat_row"]);
    run("p1", "p1", BTreeMap::new(), 8, &["times", "times_recursion", "f_pm_identity"]);
    for (label, f) in [("vertex f=1", Exact::from_int(1)), ("vertex f=2", Exact::from_int(2)), ("vertex f=1/2", Exact::from_ratio(1, 2))] {
        run(label, "vertex", [("f".to_string(), f)].into_iter().collect(), 4, &["times"]);
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn criterion7(st: &OracleStats, cal: &CalibrationRecord) -> Outcome {
    let mut tensors = st.tensors.clone();
    let mut symmetric = true;
    for (name, targets) in [("airy", &AIRY_TARGETS[..]), ("ising", &ISING_TARGETS[..])] {
        let d = data(name, max_dim(targets));
        let rec = Recursion::new(&d).unwrap();
        for &(g, n) in targets {
            tensors.push((*rec.invariants(g, n).unwrap()).clone());
            symmetric &= symmetry_check(&rec, g, n).unwrap();
        }
    }
    let vanishing = tensors.iter().all(|t| structure_check(t).passes());
    let ising = data("ising", 1);
    let perturbed = perturbed_structure_check(&ising, 0, 4).unwrap();
    let mut faulty = InvariantTensor::<Exact>::new(0, 4);
    faulty.insert(&[(0, 1), (0, 1), (0, 0), (0, 0)], Exact::from_int(1));
    let fault_caught = !structure_check(&faulty).passes();
    // fault injection on the calibration side as well
    let corrupt = BhatTable::from_data(&ising, 2).unwrap().with_entry(0, 0, 0, 0, Exact::from_int(7));
    let calib_caught = calibrate(&ising, &corrupt).is_err();
    let _ = cal;
    let pass = vanishing && st.poles_ok && st.residue_free && symmetric && perturbed.passes() && perturbed.bhat_degree == Some(1) && fault_caught && calib_caught;
    Outcome {
        pass,
        detail: format!(
            "{} tensors vanish beyond 3g-3+n: {vanishing}; oracle poles <= 6g+2n-4: {}; residue free: {}; root-independent: {symmetric}; ising (0,4) bhat degree {:?}; injected faults caught: {}",
            tensors.len(),
            st.poles_ok,
            st.residue_free,
            perturbed.bhat_degree,
            fault_caught && calib_caught
        ),
    }
}

fn criterion8() -> Outcome {
    let g03 = enumerate(0, 3, 2).len();
    let g04 = enumerate(0, 4, 2);
    let smooth = g04.iter().filter(|g| g.is_smooth()).count();
    let nodal = g04.len() - smooth;
    let agree05 = enumerate(0, 5, 1) == enumerate_brute(0, 5, 1);
    let agree12 = enumerate(1, 2, 1) == enumerate_brute(1, 2, 1);
    Outcome {
        pass: g03 == 2 && smooth == 2 && nodal == 12 && agree05 && agree12,
        detail: format!(
            "(0,3,2): {g03}; (0,4,2): {smooth} smooth + {nodal} nodal; brute force agrees at (0,5,1): {agree05} ({} graphs), (1,2,1): {agree12} ({} graphs)",
            enumerate(0, 5, 1).len(),
            enumerate(1, 2, 1).len()
        ),
    }
}

fn criterion9(cal: &CalibrationRecord) -> Outcome {
    let render = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| theorem_report(cal).0.to_json_without_timing())
    };
    let one = render(1);
    let outs: Vec<(usize, bool)> = [2, 4, 8].iter().map(|&t| (t, render(t) == one)).collect();
    Outcome {
        pass: outs.iter().all(|(_, same)| *same),
        detail: format!("{} bytes with 1 thread; identical with {:?}", one.len(), outs),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cal = calibrate_fixtures::<Exact>().expect("calibration");
    let oracle = oracle_run();
    let results = [
        (1, "theorem equality", criterion1(&cal)),
        (2, "worked W3/W4 forms", criterion2(&cal)),
        (3, "local engine vs global oracle", criterion3(&oracle)),
        (4, "Witten-Kontsevich via DVV", criterion4()),
        (5, "B-check lemma", criterion5()),
        (6, "closed-form coefficient tables", criterion6()),
        (7, "structural properties", criterion7(&oracle, &cal)),
        (8, "stable graph counts", criterion8()),
        (9, "determinism across thread counts", criterion9(&cal)),
    ];
    let mut unexpected = Vec::new();
    for (i, name, o) in &results {
        let known = KNOWN_RED.contains(i);
        println!("criterion {i} [{name}]: {}{} | {}", if o.pass { "PASS" } else { "FAIL" }, if known && !o.pass { " (known, see notes)" } else { "" }, o.detail);
        if o.pass == known {
            unexpected.push(*i);
        }
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
