use gapcert::bounds::{best_bound, exact_ball_gap, GridSpec};
use gapcert::validate::{product_gap, radial_gap};
use gapcert::{Body, Potential};
use proptest::prelude::*;

fn small_grid() -> GridSpec {
    GridSpec { radial_points: 512, boundary_samples: 512, volume_samples: 20_000, seed: 0 }
}

fn uniform_body() -> impl Strategy<Value = Body> {
    prop_oneof![
        (0.2f64..5.0, 2usize..8).prop_map(|(r, d)| Body::ball(r, d).unwrap()),
        (0.2f64..5.0, 2usize..8).prop_map(|(r, d)| Body::cube(r, d).unwrap()),
        (2.0f64..8.0, 0.2f64..5.0, 2usize..5).prop_map(|(p, r, d)| Body::lp_ball(p, r, d).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn uniform_bounds_scale_as_inverse_square(body in uniform_body(), c in 0.25f64..4.0) {
        let g = small_grid();
        let a = best_bound(&Potential::Uniform, &body, &g);
        let b = best_bound(&Potential::Uniform, &body.scaled(c).unwrap(), &g);
        prop_assert_eq!(a.len(), b.len());
        for x in &a {
            let y = b.iter().find(|y| y.method == x.method).unwrap();
            prop_assert_eq!(x.assumptions_ok, y.assumptions_ok);
            if x.assumptions_ok {
                let want = x.value / (c * c);
                prop_assert!((y.value - want).abs() <= 1e-9 * want.abs().max(1e-300), "{:?}: {} vs {}", x.method, y.value, want);
            }
        }
    }

    #[test]
    fn every_certified_lower_bound_sits_below_the_exact_value(d in 2usize..40, r in 0.1f64..10.0) {
        let body = Body::ball(r, d).unwrap();
        let exact = exact_ball_gap(d, r).unwrap().value;
        for b in best_bound(&Potential::Uniform, &body, &small_grid()) {
            if b.is_certified_lower() {
                prop_assert!(b.value <= exact * (1.0 + 1e-12), "{:?} {} > {}", b.method, b.value, exact);
            }
        }
    }

    #[test]
    fn numeric_gaps_scale_as_inverse_square(d in 2usize..12, c in 0.25f64..4.0) {
        let ball = Body::ball(1.0, d).unwrap();
        let a = radial_gap(&Potential::Uniform, &ball, 400, None).unwrap().value;
        let b = radial_gap(&Potential::Uniform, &ball.scaled(c).unwrap(), 400, None).unwrap().value;
        prop_assert!((b * c * c - a).abs() <= 1e-9 * a);
        let cube = Body::cube(1.0, d).unwrap();
        let a = product_gap(&Potential::Uniform, &cube, 400).unwrap().value;
        let b = product_gap(&Potential::Uniform, &cube.scaled(c).unwrap(), 400).unwrap().value;
        prop_assert!((b * c * c - a).abs() <= 1e-9 * a);
    }
}
