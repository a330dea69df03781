use tauber::brownian::{chain_log_functional, condbb_rate, exact_log_laplace, BoxFamily, TimeGrid};
use tauber::estimators::{
    chernoff_log_bound, laplace_rate_window, mc_laplace, smallball_rate_window, TailGrid,
};
use tauber::exponents::{r_from_s, s_from_r, RateValue};
use tauber::numerics::{geometric_grid, SeedSpec};
use tauber::verify::{run_suite, Suite};
use tauber::{ExponentPair32, ExponentPair64, LatticeDistribution64, QuadratureConfig64};

#[test]
fn lattice_small_ball_window_sits_on_both_limits() {
    let d = LatticeDistribution64::new(0.5, -1.0, 1.0).unwrap();
    let eps = geometric_grid(0.5, d.support(30), 200).unwrap();
    let points = eps.iter().map(|&e| (e, d.log_cdf(e).unwrap())).collect();
    let est = smallball_rate_window(&TailGrid::from_log_values(points).unwrap(), 1.0, 0.5).unwrap();
    // the lower limit s and the upper limit q^beta s are both approached
    assert!(est.window_inf < -0.95 && est.window_inf >= -1.0);
    assert!(est.window_sup > -0.52 && est.window_sup <= -0.5);
}

#[test]
fn laplace_window_agrees_with_monte_carlo_at_moderate_lambda() {
    let d = LatticeDistribution64::new(0.5, -1.0, 1.0).unwrap();
    let exact = d.laplace(3.0, 1e-14).unwrap();
    let mc = mc_laplace(&d, 3.0, 200_000, SeedSpec::new(5, 0)).unwrap();
    assert!((mc.estimate - exact).abs() < 4.0 * mc.std_error);
    let lambdas = geometric_grid(1e2, 1e6, 64).unwrap();
    let pts = lambdas
        .iter()
        .map(|&l| (l, d.log_laplace(l, 1e-14).unwrap()))
        .collect();
    let est = laplace_rate_window(&TailGrid::from_log_values(pts).unwrap(), 0.5, 0.5).unwrap();
    assert!(est.window_inf <= est.window_sup);
}

#[test]
fn chernoff_bound_of_exact_brownian_transform() {
    // log P(X <= eps) <= min over lambda of lambda eps - 1/2 log cosh(sqrt(2 lambda))
    let lambdas = geometric_grid(1.0, 1e4, 200).unwrap();
    let bound = chernoff_log_bound(
        |l: f64| exact_log_laplace((2.0 * l).sqrt(), 1.0),
        0.05,
        &lambdas,
    )
    .unwrap();
    // the leading-order small-ball exponent is -1/(8 eps) = -2.5
    assert!(bound < 0.0 && bound > -2.5);
}

#[test]
fn conversions_in_single_precision() {
    let pair = ExponentPair32::from_alpha(0.5).unwrap();
    let s = s_from_r(RateValue::new(-2.0f32).unwrap(), pair);
    assert_eq!(s.value(), -1.0);
    let pair = ExponentPair64::from_beta(3.0).unwrap();
    let r = r_from_s(RateValue::new(-0.2).unwrap(), pair);
    assert!((s_from_r(r, pair).value() + 0.2).abs() < 1e-15);
}

#[test]
fn chain_and_rate_on_two_times() {
    let quad = QuadratureConfig64::default();
    let grid = TimeGrid::new(1.0, vec![0.5, 1.0]).unwrap();
    let boxes: BoxFamily<f64> = "0.2:0.6,:".parse().unwrap();
    let v = chain_log_functional(0.0, &grid, &boxes, 3.0, &quad).unwrap();
    assert!(v < exact_log_laplace(3.0, 1.0));
    assert_eq!(
        condbb_rate(&grid, &boxes).unwrap(),
        -(1.0f64 + 0.08).powi(2) / 8.0 + 0.125
    );
}

#[test]
fn verify_reports_are_reproducible() {
    let a = run_suite(Suite::Lattice, 9, None).unwrap();
    let b = run_suite(Suite::Lattice, 9, Some(1)).unwrap();
    assert!(a.pass);
    assert_eq!(a.checks, b.checks);
    assert_eq!(a.config, b.config);
}
