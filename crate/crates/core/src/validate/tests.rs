use super::*;
use crate::bounds::{exact_ball_gap, gaussian_complement_bound};
use crate::geometry::{Body, OneDimConvexFn};
use crate::measures::{moment_bracket, Potential};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn sturm_matches_bessel_on_uniform_balls() {
    for d in [2usize, 3, 5, 10] {
        let exact = exact_ball_gap(d, 1.0).unwrap().value;
        let g = radial_gap(&Potential::Uniform, &Body::ball(1.0, d).unwrap(), 4000, None).unwrap();
        assert_eq!(g.sector, Sector::L1);
        assert!(rel(g.value, exact) < 1e-4, "d={d}: {} vs {exact}", g.value);
        assert!(rel(g.l1.coarse, exact) < 1e-4);
    }
}

#[test]
fn l1_sector_wins_on_uniform_balls() {
    for d in 2..=20 {
        let g = radial_gap(&Potential::Uniform, &Body::ball(1.0, d).unwrap(), 400, None).unwrap();
        assert!(g.l1.extrapolated <= g.l0.extrapolated, "d={d}");
    }
}

#[test]
fn sturm_converges_at_second_order() {
    let mk = |n| SturmProblem {
        dim: 3,
        pot: Potential::Uniform,
        r_min: 0.0,
        r_max: 1.0,
        sector: Sector::L1,
        n,
        grading: Grading::Power(1.5),
    };
    let exact = exact_ball_gap(3, 1.0).unwrap().value;
    let consts: Vec<f64> = [500usize, 1000, 2000]
        .iter()
        .map(|&n| {
            let e = sturm_gap(&mk(n)).unwrap();
            (e.coarse - e.fine).abs() * (n * n) as f64
        })
        .collect();
    for c in &consts {
        assert!((c - consts[0]).abs() < 0.05 * consts[0], "{consts:?}");
    }
    let e = sturm_gap(&mk(2000)).unwrap();
    assert!(rel(e.extrapolated, exact) < 1e-9, "{} vs {exact}", e.extrapolated);
}

#[test]
fn sturm_rejects_bad_input() {
    let p = SturmProblem {
        dim: 3,
        pot: Potential::Product(vec![]),
        r_min: 0.0,
        r_max: 1.0,
        sector: Sector::L0,
        n: 100,
        grading: Grading::Uniform,
    };
    assert!(sturm_gap(&p).is_err());
    let p = SturmProblem { pot: Potential::Uniform, n: 8, ..p };
    assert!(sturm_gap(&p).is_err());
}

#[test]
fn gaussian_ball_inside_moment_bracket() {
    for (d, r) in [(10usize, 1.0), (3, 2.0), (6, 4.0)] {
        let body = Body::ball(r, d).unwrap();
        let g = radial_gap(&Potential::gaussian(), &body, 2000, None).unwrap();
        let (lo, hi) = moment_bracket(&Potential::gaussian(), &body, None).unwrap();
        assert!(g.value >= lo - 1e-6 && g.value <= hi + 1e-6, "d={d}: {lo} <= {} <= {hi}", g.value);
    }
}

#[test]
fn gaussian_complement_above_obstacle_bound() {
    let body = Body::ball_complement(1.0, 10).unwrap();
    let g = radial_gap(&Potential::gaussian(), &body, 2000, Some(12.0)).unwrap();
    let closed = gaussian_complement_bound(10, 1.0).unwrap().value;
    assert!(g.value >= closed - 1e-6, "{}", g.value);
    assert!(g.doubled.is_some());
    assert!(radial_gap(&Potential::gaussian(), &body, 2000, Some(0.5)).is_err());
    // truncation far too short to converge
    let e = radial_gap(&Potential::gaussian(), &Body::ball_complement(1.0, 3).unwrap(), 400, Some(1.5));
    assert!(matches!(e, Err(crate::GapError::Truncation { .. })));
}

#[test]
fn product_gap_examples() {
    let pi2 = std::f64::consts::PI.powi(2);
    let g = product_gap(&Potential::Uniform, &Body::cube(1.0, 7).unwrap(), 2000).unwrap();
    assert!((g.value - pi2 / 4.0).abs() < 1e-6);
    let g = product_gap(&Potential::Uniform, &Body::cube(2.0, 3).unwrap(), 2000).unwrap();
    assert!((g.value - pi2 / 16.0).abs() < 1e-6);
    let v = OneDimConvexFn::new("x^2/2", |x| 0.5 * x * x, |x| x, |_| 1.0);
    let g = product_gap(&Potential::Product(vec![v; 3]), &Body::cube(10.0, 3).unwrap(), 4000).unwrap();
    assert!((g.value - 1.0).abs() < 1e-3, "{}", g.value);
    let g2 = product_gap(&Potential::gaussian(), &Body::cube(10.0, 3).unwrap(), 4000).unwrap();
    assert_eq!(g.value, g2.value);
    assert!(product_gap(&Potential::Uniform, &Body::ball(1.0, 2).unwrap(), 100).is_err());
}

#[test]
fn product_gap_matches_radial_route_in_one_dimension() {
    // d = 1 radial problem on [0, 2] is the interval problem on [−1, 1] shifted
    let p = SturmProblem {
        dim: 1,
        pot: Potential::Uniform,
        r_min: 0.0,
        r_max: 2.0,
        sector: Sector::L0,
        n: 2000,
        grading: Grading::Uniform,
    };
    let a = sturm_gap(&p).unwrap().extrapolated;
    let b = product_gap(&Potential::Uniform, &Body::cube(1.0, 2).unwrap(), 2000).unwrap().value;
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn galerkin_linear_test_gives_d_plus_two() {
    for d in [2usize, 3, 7] {
        let g = galerkin_upper(&GalerkinProblem::new(Body::ball(1.0, d).unwrap(), Potential::Uniform, 1)).unwrap();
        assert!((g.value - (d as f64 + 2.0)).abs() < 1e-12, "d={d}: {}", g.value);
        assert_eq!(g.std_error, 0.0);
    }
}

#[test]
fn galerkin_converges_monotonically() {
    let exact = exact_ball_gap(2, 1.0).unwrap().value;
    let pi2 = std::f64::consts::PI.powi(2);
    let mut prev_ball = f64::INFINITY;
    let mut prev_box = f64::INFINITY;
    for k in 1..=9 {
        let ball =
            galerkin_upper(&GalerkinProblem::new(Body::ball(1.0, 2).unwrap(), Potential::Uniform, k)).unwrap().value;
        let cube =
            galerkin_upper(&GalerkinProblem::new(Body::cube(1.0, 2).unwrap(), Potential::Uniform, k)).unwrap().value;
        assert!(ball <= prev_ball * (1.0 + 1e-10) && cube <= prev_box * (1.0 + 1e-10), "k={k}");
        assert!(ball >= exact * (1.0 - 1e-10) && cube >= pi2 / 4.0 * (1.0 - 1e-10), "k={k}");
        prev_ball = ball;
        prev_box = cube;
        if k == 7 {
            assert!((ball - exact).abs() < 1e-3, "{ball}");
        }
    }
    assert!((prev_box - pi2 / 4.0).abs() < 1e-3, "{prev_box}");
}

#[test]
fn galerkin_monte_carlo_brackets_exact_moments() {
    let body = Body::lp_ball(3.0, 1.0, 2).unwrap();
    let exact = galerkin_upper(&GalerkinProblem::new(body.clone(), Potential::Uniform, 3)).unwrap();
    let mc = galerkin_upper(&GalerkinProblem {
        body,
        pot: Potential::Uniform,
        degree: 3,
        quadrature: Quadrature::MonteCarlo { samples: 400_000, seed: 1, batches: 10 },
    })
    .unwrap();
    assert!(mc.std_error > 0.0);
    assert!(
        (mc.value - exact.value).abs() < 5.0 * mc.std_error + 1e-3,
        "{} vs {} ± {}",
        mc.value,
        exact.value,
        mc.std_error
    );
}

#[test]
fn galerkin_gaussian_ball_within_radial_reference() {
    let body = Body::ball(2.0, 3).unwrap();
    let g = galerkin_upper(&GalerkinProblem::new(body.clone(), Potential::gaussian(), 5)).unwrap();
    let r = radial_gap(&Potential::gaussian(), &body, 2000, None).unwrap();
    assert!(g.value >= r.value * (1.0 - 1e-8));
    assert!(rel(g.value, r.value) < 1e-3, "{} vs {}", g.value, r.value);
}
