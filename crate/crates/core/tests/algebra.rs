use proptest::prelude::*;
use spectral_core::ring::{rational, RadicalPolicy, Scalar, Surd};
use spectral_core::series::TruncatedSeries;
use spectral_core::Exact;

fn q(a: i64, b: i64) -> Exact {
    Exact::from_rational(&rational(a, b))
}

fn surd(a: i64, b: i64, c: i64) -> Exact {
    q(a, 1).add_ref(&Surd::sqrt_int(2).mul_ref(&q(b, 1))).add_ref(&Surd::sqrt_int(3).mul_ref(&q(c, 1)))
}

fn series(c: &[i64], order: i64) -> TruncatedSeries<Exact> {
    TruncatedSeries::new(0, c.iter().map(|&x| q(x, 1)).collect(), order)
}

proptest! {
    #[test]
    fn surd_field_inverse(a in -6i64..6, b in -6i64..6, c in -6i64..6) {
        prop_assume!(a != 0 || b != 0 || c != 0);
        let x = surd(a, b, c);
        prop_assert_eq!(x.mul_ref(&x.try_inv().unwrap()), Exact::from_int(1));
    }

    #[test]
    fn surd_text_round_trip(a in -9i64..9, b in -9i64..9, c in -9i64..9, d in 1i64..7) {
        let x = surd(a, b, c).try_div(&Exact::from_int(d)).unwrap();
        prop_assert_eq!(Exact::from_text(&x.to_text()).unwrap(), x);
    }

    #[test]
    fn surd_sqrt_squares_back(n in 1i64..50, d in 1i64..9) {
        let r = q(n, d);
        let s = r.try_sqrt(&RadicalPolicy::Any).unwrap();
        prop_assert_eq!(s.mul_ref(&s), r);
        prop_assert!(q(2, 1).try_sqrt(&RadicalPolicy::RationalOnly).is_err());
    }

    #[test]
    fn series_inverse(c in prop::collection::vec(-5i64..5, 1..6)) {
        let mut c = c;
        c[0] = 1;
        let f = series(&c, 8);
        let one = f.mul(&f.inv().unwrap());
        for d in 0..=8 {
            prop_assert_eq!(one.coeff(d).unwrap(), Exact::from_int(i64::from(d == 0)));
        }
    }

    #[test]
    fn series_exp_log(c in prop::collection::vec(-4i64..4, 1..5)) {
        let mut c = c;
        c[0] = 0;
        let f = series(&c, 7);
        let back = f.exp().unwrap().log().unwrap();
        prop_assert!(back.agrees_with(&f));
    }

    #[test]
    fn series_reversion(c in prop::collection::vec(-4i64..4, 0..5)) {
        let mut coeffs = vec![0, 1];
        coeffs.extend(c);
        let f = series(&coeffs, 7);
        let g = f.revert().unwrap();
        let id = f.compose(&g).unwrap();
        prop_assert!(id.agrees_with(&TruncatedSeries::var(Some(7))));
    }

    #[test]
    fn series_sqrt(c in prop::collection::vec(-4i64..4, 0..5)) {
        let mut coeffs = vec![1];
        coeffs.extend(c);
        let f = series(&coeffs, 6);
        let s = f.sqrt(&RadicalPolicy::Any).unwrap();
        prop_assert!(s.mul(&s).agrees_with(&f));
    }
}

#[test]
fn truncation_is_reported() {
    let f = series(&[1, 2], 3);
    assert!(f.coeff(3).is_ok());
    assert!(f.coeff(4).is_err());
    assert_eq!(f.mul(&series(&[1], 1)).order(), Some(1));
}
