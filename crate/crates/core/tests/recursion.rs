use std::collections::BTreeMap;

use num_traits::Zero;
use proptest::prelude::*;
use spectral_core::builtins;
use spectral_core::localdata::{LocalSpectralData, Orders};
use spectral_core::recursion::oracle::GlobalOracle;
use spectral_core::recursion::{all_keys, dimension, fg, Recursion, RecursionError};
use spectral_core::ring::Scalar;
use spectral_core::{Exact, ExactData};

fn data(name: &str, dim: i64) -> ExactData {
    let c = builtins::builtin::<Exact>(name, &BTreeMap::new()).unwrap();
    LocalSpectralData::from_curve(&c, Orders::for_dimension(dim)).unwrap()
}

#[test]
fn airy_small_values() {
    let d = data("airy", 2);
    let rec = Recursion::new(&d).unwrap();
    assert_eq!(rec.invariants(0, 3).unwrap().get(&[(0, 0); 3]), Exact::from_ratio(1, 2));
    let w11 = rec.invariants(1, 1).unwrap();
    assert_eq!(w11.get(&[(0, 1)]), Exact::from_ratio(1, 24));
    assert_eq!(w11.get(&[(0, 0)]), Exact::from_int(0));
    // (0,4): only Σd <= 1
    let w04 = rec.invariants(0, 4).unwrap();
    assert_eq!(w04.max_degree_sum(), Some(1));
    assert_eq!(w04.len(), 1);
}

#[test]
fn unstable_requests() {
    let d = data("airy", 1);
    let rec = Recursion::new(&d).unwrap();
    assert!(matches!(rec.invariants(0, 2), Err(RecursionError::UnstableRequest { g: 0, n: 2 })));
    assert!(matches!(rec.invariants(0, 1), Err(RecursionError::UnstableRequest { .. })));
    assert!(matches!(fg(&rec, 1), Err(RecursionError::UnstableRequest { .. })));
}

#[test]
fn short_data_reports_sufficient_orders() {
    let c = builtins::ising::<Exact>();
    let full = LocalSpectralData::from_curve(&c, Orders::for_dimension(dimension(1, 2))).unwrap();
    let expected = Recursion::new(&full).unwrap().invariants(1, 2).unwrap();
    let mut errors = 0;
    for bergman in 0..=6 {
        for times in 0..=3 {
            let d = LocalSpectralData::from_curve(&c, Orders { bergman, times }).unwrap();
            let got = Recursion::new(&d).and_then(|r| r.invariants(1, 2));
            match got {
                Ok(t) => assert_eq!(*t, *expected, "silent change at {bergman}, {times}"),
                Err(RecursionError::InsufficientTruncation { suffices, .. }) => {
                    assert_eq!(suffices, Orders::for_dimension(dimension(1, 2)));
                    errors += 1;
                }
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }
    assert!(errors > 0);
}

#[test]
fn free_energies() {
    let airy = data("airy", 3);
    assert_eq!(fg(&Recursion::new(&airy).unwrap(), 2).unwrap(), Exact::from_int(0));
    let ising = data("ising", 3);
    let f2 = fg(&Recursion::new(&ising).unwrap(), 2).unwrap();
    assert!(!f2.is_zero());
}

#[test]
fn oracle_matches_engine_small() {
    for name in ["airy", "p1"] {
        let c = builtins::builtin::<Exact>(name, &BTreeMap::new()).unwrap();
        let d = LocalSpectralData::from_curve(&c, Orders::for_dimension(2)).unwrap();
        let rec = Recursion::new(&d).unwrap();
        let mut o = GlobalOracle::new(&c, 2).unwrap();
        for (g, n) in [(0, 3), (1, 1), (0, 4), (1, 2)] {
            let r = o.evaluate(g, n).unwrap();
            assert_eq!(rec.invariants(g, n).unwrap().first_difference(&r.tensor), None, "{name} ({g},{n})");
            assert!(r.residue_free);
            assert!(r.max_pole <= 6 * g as i64 + 2 * n as i64 - 4);
        }
    }
}

#[test]
fn oracle_needs_involution() {
    let c = builtins::ising::<Exact>();
    assert!(GlobalOracle::new(&c, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn any_root_gives_the_same_coefficient(idx in 0usize..1000, root in 0usize..4, which in 0usize..3) {
        let (name, g, n) = [("ising", 0, 4), ("ising", 1, 2), ("p1", 0, 4)][which];
        let d = data(name, dimension(g, n));
        let rec = Recursion::new(&d).unwrap();
        let keys = all_keys(d.branchpoints(), n, dimension(g, n));
        let key = &keys[idx % keys.len()];
        let root = root % n;
        let want = rec.invariants(g, n).unwrap().get(key);
        prop_assert_eq!(rec.coefficient_rooted(g, key, root).unwrap(), want);
    }

    #[test]
    fn vanishing_beyond_dimension(idx in 0usize..1000, root in 0usize..3) {
        let d = data("ising", 3);
        let rec = Recursion::new(&d).unwrap();
        let (g, n) = (1, 3);
        let keys: Vec<_> = all_keys(2, n, dimension(g, n) + 2).into_iter().filter(|k| k.iter().map(|s| s.1).sum::<i64>() > dimension(g, n)).collect();
        let key = &keys[idx % keys.len()];
        prop_assert!(rec.coefficient_rooted(g, key, root % n).unwrap().is_zero());
    }
}
