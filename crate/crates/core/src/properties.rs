//! Randomized invariants across modules.

use proptest::prelude::*;

use crate::energy::{rate_energy, tail_energy};
use crate::mle::{rate_mle, tail_mle};
use crate::model::{exact_lt, gen_fn_terms, in_domain_delta, GenFnPoint, ModelParams};
use crate::tail::TailSide;
use crate::validate::{ks_statistic, ks_two_sample, legendre_oracle, normal_cdf, Target};

fn model() -> impl Strategy<Value = ModelParams> {
    (-3.0f64..-0.2, 0.51f64..0.99).prop_map(|(t, h)| ModelParams::new(t, h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_rate_is_nonnegative_and_convex(p in model(), c in 0.02f64..20.0, d in 0.001f64..0.5) {
        let c = c / p.theta().abs();
        let (lo, mid, hi) = (rate_energy(&p, c), rate_energy(&p, c + d), rate_energy(&p, c + 2.0 * d));
        prop_assert!(lo >= 0.0 && mid >= 0.0 && hi >= 0.0);
        prop_assert!(mid <= 0.5 * (lo + hi) + 1e-12 * (1.0 + lo.abs() + hi.abs()));
        prop_assert!(rate_energy(&p, -0.5 / p.theta()).abs() < 1e-15);
    }

    #[test]
    fn mle_rate_is_nonnegative_and_vanishes_at_theta(p in model(), c in -10.0f64..3.0) {
        prop_assume!(c.abs() > 1e-6);
        prop_assert!(rate_mle(&p, c) >= -1e-15);
        prop_assert!(rate_mle(&p, p.theta()).abs() < 1e-15);
    }

    #[test]
    fn legendre_oracle_agrees(p in model(), c in 0.05f64..6.0, m in -2.5f64..0.9) {
        let e = legendre_oracle(&p, Target::Energy, c / p.theta().abs()).unwrap();
        prop_assert!(e.abs_err < 1e-6 * (1.0 + e.rhs.abs()), "{e:?}");
        let m = legendre_oracle(&p, Target::Mle, m * p.theta().abs()).unwrap();
        prop_assert!(m.abs_err < 1e-6 * (1.0 + m.rhs.abs()), "{m:?}");
    }

    #[test]
    fn four_term_and_determinant_forms_agree(p in model(), u in -0.9f64..0.9, v in -1.0f64..0.45, t in 0.5f64..80.0) {
        let th = p.theta().abs();
        let (a, b) = (u * th, v * p.theta() * p.theta());
        prop_assume!(in_domain_delta(&p, a, b));
        let point = GenFnPoint::new(a, b, t);
        if let (Ok(x), Ok(terms)) = (exact_lt(&p, point), gen_fn_terms(&p, point)) {
            let y = terms.reassemble(t);
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn tails_are_probabilities_at_long_horizons(p in model(), c in 0.05f64..10.0, m in -3.0f64..1.0) {
        let t = 400.0;
        let c = c / p.theta().abs();
        prop_assume!((c + 0.5 / p.theta()).abs() > 0.05 / p.theta().abs());
        if let Ok(e) = tail_energy(&p, c, t, false) {
            prop_assert!(e.leading() >= 0.0 && e.leading() < 1.0);
            prop_assert_eq!(e.side == TailSide::Upper, c > -0.5 / p.theta());
        }
        let m = m * p.theta().abs();
        prop_assume!((m - p.theta()).abs() > 0.05 * p.theta().abs());
        if let Ok(r) = tail_mle(&p, m, t) {
            prop_assert!(r.value() >= 0.0 && r.value() < 1.0);
        }
    }

    #[test]
    fn ks_statistics_are_bounded_and_symmetric(
        a in prop::collection::vec(-5.0f64..5.0, 5..60),
        b in prop::collection::vec(-5.0f64..5.0, 5..60),
    ) {
        let d = ks_statistic(&a, normal_cdf);
        prop_assert!((0.0..=1.0).contains(&d));
        let ab = ks_two_sample(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - ks_two_sample(&b, &a)).abs() < 1e-15);
        prop_assert!(ks_two_sample(&a, &a) == 0.0);
    }
}
