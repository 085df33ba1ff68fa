use attrest::population::MAX_MOMENT_ORDER;
use attrest::{
    design_coefficients, moments, point_estimate, EstimatorSpec, Family, Population, SampleStats,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn population_strategy() -> impl Strategy<Value = Population> {
    (4usize..40)
        .prop_flat_map(|size| {
            (
                prop::collection::vec(0.5f64..50.0, size),
                prop::collection::vec(any::<bool>(), size),
            )
        })
        .prop_filter_map("attribute must be non-degenerate", |(y, phi)| {
            Population::new(y, phi).ok()
        })
}

/// Population with attribute proportion exactly `tenths / 10`.
fn population_with_tenths() -> impl Strategy<Value = Population> {
    (1usize..=9, 1usize..6).prop_flat_map(|(tenths, scale)| {
        let size = 10 * scale;
        prop::collection::vec(-20.0f64..80.0, size).prop_filter_map("nonzero mean", move |y| {
            let phi: Vec<bool> = (0..size).map(|i| i % 10 < tenths).collect();
            Population::new(y, phi).ok()
        })
    })
}

fn spec_strategy() -> impl Strategy<Value = EstimatorSpec> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|alpha| EstimatorSpec::Chakrabarty { alpha }),
        (-3.0f64..3.0, -2.0f64..2.0)
            .prop_map(|(g, beta)| EstimatorSpec::KhoshnevisanRatio { g, beta }),
        (-3.0f64..3.0).prop_map(|w| EstimatorSpec::SahaiRay { w }),
        (-3.0f64..3.0, -3.0f64..3.0)
            .prop_map(|(lambda, delta)| EstimatorSpec::Solanki { lambda, delta }),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn low_order_moments_are_trivial(pop in population_strategy()) {
        let ms = moments(&pop);
        prop_assert!((ms.c(0, 0) - 1.0).abs() < 1e-12);
        prop_assert!(ms.c(1, 0).abs() < 1e-12);
        prop_assert!(ms.c(0, 1).abs() < 1e-12);
        prop_assert!(ms.c(2, 0) >= 0.0 && ms.c(0, 2) >= 0.0);
        prop_assert!(ms.c(1, 1).powi(2) <= ms.c(2, 0) * ms.c(0, 2) * (1.0 + 1e-12));
    }

    #[test]
    fn binary_closed_forms(pop in population_with_tenths()) {
        let ms = moments(&pop);
        let p = pop.proportion();
        prop_assert!(rel(ms.c(2, 0), (1.0 - p) / p) < 1e-12);
        let c30 = (1.0 - p) * (1.0 - 2.0 * p) / (p * p);
        if c30 == 0.0 {
            prop_assert!(ms.c(3, 0).abs() < 1e-12);
        } else {
            prop_assert!(rel(ms.c(3, 0), c30) < 1e-12, "C30 {} vs {}", ms.c(3, 0), c30);
        }
        let c40 = (1.0 - p) * (1.0 - 3.0 * p + 3.0 * p * p) / p.powi(3);
        prop_assert!(rel(ms.c(4, 0), c40) < 1e-12);
    }

    #[test]
    fn design_coefficients_are_correctly_rounded(big_n in 4usize..=10_000, frac in 0.0f64..1.0) {
        let n = 1 + ((big_n - 2) as f64 * frac) as usize;
        let dc = design_coefficients(big_n, n).unwrap();
        let big = |v: usize| BigInt::from(v);
        let (nn, ss) = (big(big_n), big(n));
        let one = BigInt::from(1);
        let two = BigInt::from(2);
        let three = BigInt::from(3);
        let six = BigInt::from(6);
        let den3 = (&nn - &one) * (&nn - &two) * (&nn - &three) * &ss * &ss * &ss;
        let l1 = BigRational::new(&nn - &ss, (&nn - &one) * &ss);
        let l2 = BigRational::new(
            (&nn - &ss) * (&nn - &two * &ss),
            (&nn - &one) * (&nn - &two) * &ss * &ss,
        );
        let l3 = BigRational::new(
            (&nn - &ss) * (&nn * &nn + &nn - &six * &ss * &nn + &six * &ss * &ss),
            den3.clone(),
        );
        let l4 = BigRational::new(&nn * (&nn - &ss) * (&nn - &ss - &one) * (&ss - &one), den3);
        prop_assert_eq!(dc.l1, l1.to_f64().unwrap());
        prop_assert_eq!(dc.l2, l2.to_f64().unwrap());
        prop_assert_eq!(dc.l3, l3.to_f64().unwrap());
        prop_assert_eq!(dc.l4, l4.to_f64().unwrap());
        prop_assert!(dc.l1 >= 0.0);
    }

    #[test]
    fn matching_proportion_returns_sample_mean(spec in spec_strategy(), ybar in -50.0f64..50.0, big_p in 0.01f64..0.99) {
        let stats = SampleStats { n: 10, ybar, p: big_p };
        prop_assert_eq!(point_estimate(&spec, &stats, big_p).unwrap(), ybar);
    }

    #[test]
    fn neutral_parameters_return_sample_mean(ybar in -50.0f64..50.0, p in 0.0f64..=1.0, big_p in 0.01f64..0.99) {
        let stats = SampleStats { n: 10, ybar, p };
        for family in Family::ALL {
            prop_assert_eq!(point_estimate(&EstimatorSpec::neutral(family), &stats, big_p).unwrap(), ybar);
        }
    }

    #[test]
    fn classical_ratio_forms_agree(ybar in 0.1f64..50.0, p in 0.01f64..=1.0, big_p in 0.01f64..0.99) {
        let stats = SampleStats { n: 10, ybar, p };
        let a = point_estimate(&EstimatorSpec::Chakrabarty { alpha: 1.0 }, &stats, big_p).unwrap();
        let b = point_estimate(&EstimatorSpec::KhoshnevisanRatio { g: 1.0, beta: 1.0 }, &stats, big_p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn shape_is_one_at_one(spec in spec_strategy()) {
        prop_assert_eq!(spec.shape(1.0).unwrap(), 1.0);
    }

    #[test]
    fn moment_table_entries_stay_within_order(pop in population_strategy()) {
        let ms = moments(&pop);
        for order in 0..=MAX_MOMENT_ORDER {
            for p in 0..=order {
                prop_assert!(ms.c(p, order - p).is_finite());
            }
        }
    }
}
