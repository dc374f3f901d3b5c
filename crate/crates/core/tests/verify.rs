use num_traits::{One, Zero};
use proptest::prelude::*;
use spectral_core::builtins;
use spectral_core::localdata::{LocalSpectralData, Orders};
use spectral_core::recursion::{dimension, fg, Recursion};
use spectral_core::ring::{ComplexFloat, Scalar};
use spectral_core::stablegraphs::{enumerate, theorem_rhs, BhatTable, Prefactor};
use spectral_core::verify::{
    calibrate, calibrate_fixtures, perturbed_structure_check, structure_check, symmetry_check, theorem_check,
    worked_forms_check, VerifyError,
};
use spectral_core::Exact;

fn data(name: &str, dim: i64) -> LocalSpectralData<Exact> {
    let c = match name {
        "ising" => builtins::ising(),
        "p1" => builtins::p1(),
        "lambert" => builtins::lambert(),
        "vertex1" => builtins::vertex(&Exact::one()).unwrap(),
        "vertex2" => builtins::vertex(&Exact::from_int(2)).unwrap(),
        _ => builtins::airy(),
    };
    LocalSpectralData::from_curve(&c, Orders::for_dimension(dim)).unwrap()
}

#[test]
fn calibration_picks_the_flagged_record() {
    let r = calibrate_fixtures::<Exact>().unwrap();
    assert_eq!(r.sign(), -1);
    assert_eq!(r.normalization.prefactor, Prefactor::QuarterPerVertex);
    assert!(!r.prefactor_as_stated());
    assert_eq!(r.fixtures, vec!["airy".to_string(), "airy_scaled".to_string()]);
}

#[test]
fn corrupted_bhat_fails_calibration() {
    let d = data("ising", 1);
    let bhat = BhatTable::for_type(&d, 1, 1).unwrap();
    let bad = bhat.get(0, 0, 0, 0).unwrap().add_ref(&Exact::one());
    let corrupt = bhat.clone().with_entry(0, 0, 0, 0, bad);
    match calibrate(&d, &corrupt) {
        Err(VerifyError::CalibrationFailure { residuals }) => assert!(!residuals.is_empty()),
        other => panic!("expected CalibrationFailure, got {other:?}"),
    }
    assert!(calibrate(&d, &bhat).is_ok());
}

#[test]
fn structure_fault_is_detected() {
    let d = data("ising", 1);
    let rec = Recursion::new(&d).unwrap();
    let t = rec.invariants(0, 3).unwrap();
    assert!(structure_check(&t).passes());
    let mut bad = (*t).clone();
    bad.insert(&[(0, 0), (0, 0), (0, 1)], Exact::one());
    let r = structure_check(&bad);
    assert!(!r.passes());
    assert_eq!(r.violations.len(), 1);
}

#[test]
fn bhat_degree_is_bounded() {
    let d = data("ising", 1);
    let r = perturbed_structure_check(&d, 0, 4).unwrap();
    assert_eq!(r.bhat_degree, Some(1));
    assert_eq!(r.specializes, Some(true));
    assert!(r.passes());
}

#[test]
fn theorem_holds_on_several_curves() {
    for name in ["p1", "lambert", "vertex1", "vertex2"] {
        let d = data(name, 2);
        let bhat = BhatTable::for_type(&d, 1, 2).unwrap();
        let cal = calibrate(&d, &bhat).unwrap();
        let rec = Recursion::new(&d).unwrap();
        let rep = theorem_check(&rec, &bhat, &cal, &[(0, 3), (1, 1), (0, 4)]).unwrap();
        assert!(rep.all_equal(), "{name}");
    }
}

#[test]
fn free_energy_matches_graph_sum() {
    let d = data("ising", dimension(2, 0));
    let bhat = BhatTable::for_type(&d, 2, 0).unwrap();
    let cal = calibrate_fixtures::<Exact>().unwrap();
    let rec = Recursion::new(&d).unwrap();
    let lhs = fg(&rec, 2).unwrap();
    let rhs = theorem_rhs(&d, &bhat, &enumerate(2, 0, 2), 2, &[], cal.normalization).unwrap();
    assert_eq!(lhs, rhs);
    assert!(!lhs.is_zero());
}

#[test]
fn float_backend_agrees() {
    let d = data("ising", 1).map(|s| ComplexFloat(s.to_complex()));
    let bhat = BhatTable::for_type(&d, 1, 1).unwrap();
    let cal = calibrate(&d, &bhat).unwrap();
    let rec = Recursion::new(&d).unwrap();
    assert!(theorem_check(&rec, &bhat, &cal, &[(0, 3), (1, 1)]).unwrap().all_equal());
}

#[test]
fn worked_forms_reproduce() {
    let cal = calibrate_fixtures::<Exact>().unwrap();
    for c in worked_forms_check(&cal).unwrap() {
        assert!(c.passes(), "{}", c.name);
        assert!(c.entries > 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn root_choice_is_irrelevant(pick in 0usize..3) {
        let (g, n) = [(0, 4), (1, 2), (0, 3)][pick];
        let d = data("ising", dimension(g, n));
        let rec = Recursion::new(&d).unwrap();
        prop_assert!(symmetry_check(&rec, g, n).unwrap());
    }
}
