use proptest::prelude::*;
use spectral_core::builtins;
use spectral_core::localdata::{LocalSpectralData, Orders};
use spectral_core::stablegraphs::{enumerate, enumerate_brute, theorem_rhs, BhatTable, Normalization, Prefactor};
use spectral_core::Exact;

#[test]
fn spec_counts() {
    assert_eq!(enumerate(0, 3, 2).len(), 2);
    let g04 = enumerate(0, 4, 2);
    assert_eq!(g04.iter().filter(|g| g.is_smooth()).count(), 2);
    assert_eq!(g04.iter().filter(|g| !g.is_smooth()).count(), 12);
    let g11 = enumerate(1, 1, 1);
    assert_eq!(g11.len(), 2);
    assert_eq!(g11.iter().find(|g| !g.is_smooth()).unwrap().aut, 2);
}

#[test]
fn classical_counts() {
    // strata of M_{0,5}, M_{1,2}, M_{2,0}, M_{2,1} bar
    assert_eq!(enumerate(0, 5, 1).len(), 26);
    assert_eq!(enumerate(1, 2, 1).len(), 5);
    assert_eq!(enumerate(2, 0, 1).len(), 7);
    assert_eq!(enumerate(2, 1, 1).len(), 16);
}

#[test]
fn generators_agree_colored() {
    for (g, n, b) in [(0, 5, 1), (1, 2, 1), (0, 4, 2), (1, 2, 2), (2, 0, 2)] {
        assert_eq!(enumerate(g, n, b), enumerate_brute(g, n, b), "({g},{n},{b})");
    }
}

#[test]
fn unstable_types_are_empty() {
    assert!(enumerate(0, 2, 1).is_empty());
    assert!(enumerate(1, 0, 1).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graphs_are_stable_and_have_right_genus(g in 0usize..3, n in 0usize..4, beta in 1usize..3) {
        prop_assume!(2 * g + n >= 3 && 3 * g + n <= 6);
        for gr in enumerate(g, n, beta) {
            prop_assert_eq!(gr.genus(), g);
            for v in 0..gr.vertices.len() {
                prop_assert!(2 * gr.vertices[v].genus + gr.valence(v) >= 3);
                prop_assert!(gr.vertices[v].color < beta);
            }
            let legs: usize = gr.vertices.iter().map(|v| v.legs.len()).sum();
            prop_assert_eq!(legs, n);
            prop_assert!(gr.aut >= 1);
        }
    }

    #[test]
    fn graph_sum_symmetric_in_legs(key in prop::collection::vec((0usize..2, 0i64..2), 4), shift in 0usize..4) {
        let data = LocalSpectralData::from_curve(&builtins::ising::<Exact>(), Orders::for_dimension(1)).unwrap();
        let bhat = BhatTable::for_type(&data, 0, 4).unwrap();
        let graphs = enumerate(0, 4, 2);
        let norm = Normalization { sign: -1, prefactor: Prefactor::QuarterPerVertex };
        let mut rotated = key.clone();
        rotated.rotate_left(shift);
        let a = theorem_rhs(&data, &bhat, &graphs, 0, &key, norm).unwrap();
        let b = theorem_rhs(&data, &bhat, &graphs, 0, &rotated, norm).unwrap();
        prop_assert_eq!(a, b);
    }
}
