use attrest::optimizer::{
    second_order_objective, second_order_optimum_with, solanki_grid_optimum, SearchAxis,
    SearchOptions, DEFAULT_BRACKET, DEFAULT_TOLERANCE,
};
use attrest::{
    design_coefficients, moments, second_order_optimum, synthesize, DesignCoefficients, Error,
    Family, MomentSet, Population, SynthParams,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tiny() -> (MomentSet, DesignCoefficients) {
    let pop = Population::from_bits(vec![1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]).unwrap();
    (moments(&pop), design_coefficients(4, 2).unwrap())
}

fn random_case(rng: &mut ChaCha8Rng) -> (MomentSet, DesignCoefficients) {
    let size = rng.random_range(40..400);
    let p = rng.random_range(0.15..0.85);
    let rho = rng.random_range(0.2..0.9);
    let params = SynthParams::from_targets(size, p, 10.0, 0.5, rho).unwrap();
    let pop = synthesize(&params, rng.random()).unwrap();
    let n = rng.random_range(5..size / 3);
    (moments(&pop), design_coefficients(size, n).unwrap())
}

fn brute_force(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    for i in 1..points {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best.0
}

#[test]
fn tiny_population_matches_brute_force_grid() {
    let (ms, dc) = tiny();
    let opt = second_order_optimum(Family::SahaiRay, &ms, &dc, (-3.0, 3.0), 1e-8).unwrap();
    let objective = second_order_objective(Family::SahaiRay, &ms, &dc, 1.0);
    let points = 1_000_000;
    let spacing = 6.0 / (points - 1) as f64;
    let grid = brute_force(&objective, -3.0, 3.0, points);
    // A grid point can only resolve the minimum to half its spacing (3e-6).
    assert!(
        (opt.theta_star - grid).abs() <= spacing / 2.0,
        "{} vs {grid}",
        opt.theta_star
    );
    assert!(opt.mse_at_optimum <= objective(grid));
    // A second brute-force pass over the neighbouring cells resolves 1e-6.
    let fine = brute_force(&objective, grid - spacing, grid + spacing, points);
    assert!(
        (opt.theta_star - fine).abs() <= 1e-6,
        "{} vs {fine}",
        opt.theta_star
    );
}

#[test]
fn returned_point_is_locally_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let (ms, dc) = random_case(&mut rng);
        for family in Family::ALL {
            let opt =
                second_order_optimum(family, &ms, &dc, DEFAULT_BRACKET, DEFAULT_TOLERANCE).unwrap();
            let f = second_order_objective(family, &ms, &dc, 1.0);
            let x = SearchAxis::new(family, 1.0)
                .coordinate_of_slope(opt.theta_star)
                .unwrap();
            // Probes closer than ~1e-7 only compare rounding noise in f.
            assert!(opt.mse_at_optimum <= f(x + 1e-5));
            assert!(opt.mse_at_optimum <= f(x - 1e-5));
        }
    }
}

#[test]
fn bracket_centred_on_the_first_order_optimum_still_refines() {
    // The first-order optimum then coincides with a scan grid point.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let (ms, dc) = random_case(&mut rng);
        for family in Family::ALL {
            let axis = SearchAxis::new(family, 1.0);
            let theta = attrest::first_order_optimum(family, &ms, &dc)
                .unwrap()
                .theta_star;
            let centre = axis.coordinate_of_slope(theta).unwrap();
            let (lo, hi) = (centre - 0.75, centre + 0.75);
            let opt = second_order_optimum(family, &ms, &dc, (lo, hi), DEFAULT_TOLERANCE).unwrap();
            let x = axis.coordinate_of_slope(opt.theta_star).unwrap();
            let f = second_order_objective(family, &ms, &dc, 1.0);
            let grid = brute_force(&f, x - 0.01, x + 0.01, 20_001);
            assert!(
                (x - grid).abs() <= 1e-6,
                "{family}: search {x} vs grid {grid}"
            );
        }
    }
}

#[test]
fn never_worse_than_the_first_order_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..10 {
        let (ms, dc) = random_case(&mut rng);
        for family in Family::ALL {
            let opt =
                second_order_optimum(family, &ms, &dc, DEFAULT_BRACKET, DEFAULT_TOLERANCE).unwrap();
            let f = second_order_objective(family, &ms, &dc, 1.0);
            assert!(opt.mse_at_optimum <= f(ms.regression_slope()));
            assert_eq!(opt.order, 2);
            assert_eq!(opt.bracket_used, Some(DEFAULT_BRACKET));
        }
    }
}

#[test]
fn fixed_g_searches_beta() {
    let (ms, dc) = tiny();
    let options = SearchOptions {
        g: 2.0,
        ..SearchOptions::default()
    };
    let opt = second_order_optimum_with(
        Family::KhoshnevisanRatio,
        &ms,
        &dc,
        (-3.0, 3.0),
        1e-9,
        options,
    )
    .unwrap();
    match opt.spec {
        attrest::EstimatorSpec::KhoshnevisanRatio { g, beta } => {
            assert_eq!(g, 2.0);
            assert_eq!(opt.theta_star, g * beta);
        }
        other => panic!("unexpected spec {other:?}"),
    }
}

#[test]
fn results_are_deterministic() {
    let (ms, dc) = tiny();
    for family in Family::ALL {
        let a = second_order_optimum(family, &ms, &dc, DEFAULT_BRACKET, DEFAULT_TOLERANCE).unwrap();
        let b = second_order_optimum(family, &ms, &dc, DEFAULT_BRACKET, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.theta_star.to_bits(), b.theta_star.to_bits());
    }
}

#[test]
fn monotone_bracket_reports_the_boundary() {
    let (ms, dc) = tiny();
    match second_order_optimum(Family::SahaiRay, &ms, &dc, (3.0, 4.0), 1e-8) {
        Err(Error::NoInteriorMinimum { at, .. }) => assert_eq!(at, 3.0),
        other => panic!("expected boundary verdict, got {other:?}"),
    }
}

#[test]
fn rejects_bad_search_settings() {
    let (ms, dc) = tiny();
    assert!(matches!(
        second_order_optimum(Family::SahaiRay, &ms, &dc, (1.0, -1.0), 1e-8),
        Err(Error::InvalidBracket { .. })
    ));
    assert!(matches!(
        second_order_optimum(Family::SahaiRay, &ms, &dc, (-1.0, 1.0), 0.0),
        Err(Error::InvalidTolerance(_))
    ));
}

#[test]
fn two_parameter_search_is_at_least_as_good_as_the_slice() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..3 {
        let (ms, dc) = random_case(&mut rng);
        let slice = second_order_optimum(
            Family::Solanki,
            &ms,
            &dc,
            DEFAULT_BRACKET,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        // With both parameters free the truncated objective may keep falling
        // towards the bracket edge; either verdict must beat the δ = 0 slice.
        let best = match solanki_grid_optimum(&ms, &dc, DEFAULT_BRACKET, DEFAULT_TOLERANCE, 81) {
            Ok(plane) => plane.mse_at_optimum,
            Err(Error::NoInteriorMinimum { objective, .. }) => objective,
            Err(e) => panic!("unexpected error {e}"),
        };
        assert!(
            best <= slice.mse_at_optimum * (1.0 + 1e-9),
            "{best} vs {}",
            slice.mse_at_optimum
        );
    }
}
