//! Numerical verification suites with machine-readable reports.
//!
//! Every check records what was expected, what was observed and the
//! tolerance it was held to. Reports are deterministic given the seed, apart
//! from `wall_time`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::brownian::{
    bsqr_asymptotic_rate, chain_log_functional, condbb_rate, essinf_quadratic, exact_log_laplace,
    log_kernel, mc_conditional, mc_l2_laplace, mc_smallball_many, rate_i_finite, BoxFamily,
    Interval, KernelParams, PathSampleConfig, TimeGrid,
};
use crate::estimators::{laplace_rate_window, TailGrid};
use crate::exponents::{
    entropy_h, identity_residual, pair_from_alpha, r_from_s, rlower_band_from_slower, s_from_r,
    slower_band_from_rlower, RateValue,
};
use crate::lattice::LatticeDistribution;
use crate::numerics::{
    geometric_grid, integrate_1d, log_add_exp, minimize_power_sum, QuadratureConfig, SeedSpec,
};
use crate::{Error, Result};

/// A float serialized with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(format_num(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

/// `{:.16e}`: 17 significant digits, round-trips any `f64`.
pub fn format_num(x: f64) -> String {
    // adding 0.0 maps -0.0 to 0.0
    format!("{:.16e}", x + 0.0)
}

/// A configuration value recorded in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Param {
    Int(u64),
    Real(Num),
    Reals(Vec<Num>),
    Text(String),
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param::Real(Num(x))
    }
}

impl From<usize> for Param {
    fn from(x: usize) -> Self {
        Param::Int(x as u64)
    }
}

impl From<&[f64]> for Param {
    fn from(x: &[f64]) -> Self {
        Param::Reals(x.iter().copied().map(Num).collect())
    }
}

impl From<&str> for Param {
    fn from(x: &str) -> Self {
        Param::Text(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Num,
    pub observed: Num,
    pub tolerance: Num,
    /// How `observed` is compared with `expected` and `tolerance`.
    pub criterion: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Core,
    Lattice,
    Brownian,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Lattice => "lattice",
            Suite::Brownian => "brownian",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Suite::Core),
            "lattice" => Ok(Suite::Lattice),
            "brownian" => Ok(Suite::Brownian),
            "all" => Ok(Suite::All),
            _ => Err(Error::Parse {
                what: "suite",
                input: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite_name: String,
    pub seed: SeedSpec,
    pub config: BTreeMap<String, Param>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time: Num,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs `suite` with all randomness derived from `seed`. `threads` only
/// affects speed.
pub fn run_suite(suite: Suite, seed: u64, threads: Option<usize>) -> Result<VerifyReport> {
    let start = Instant::now();
    let root = SeedSpec::new(seed, 0);
    let mut ctx = Ctx {
        checks: Vec::new(),
        config: BTreeMap::new(),
        root,
        threads,
    };
    ctx.config.insert("suite".into(), suite.name().into());
    if matches!(suite, Suite::Core | Suite::All) {
        core_suite(&mut ctx)?;
    }
    if matches!(suite, Suite::Lattice | Suite::All) {
        lattice_suite(&mut ctx)?;
    }
    if matches!(suite, Suite::Brownian | Suite::All) {
        brownian_suite(&mut ctx)?;
    }
    let pass = ctx.checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        suite_name: suite.name().to_string(),
        seed: root,
        config: ctx.config,
        checks: ctx.checks,
        pass,
        wall_time: Num(start.elapsed().as_secs_f64()),
    })
}

struct Ctx {
    checks: Vec<Check>,
    config: BTreeMap<String, Param>,
    root: SeedSpec,
    threads: Option<usize>,
}

const STREAM_CORE: u64 = 1;
const STREAM_LATTICE: u64 = 2;
const STREAM_BROWNIAN_LAPLACE: u64 = 3;
const STREAM_BROWNIAN_SMALLBALL: u64 = 4;
const STREAM_BROWNIAN_CONDITIONAL: u64 = 5;
const STREAM_RATES: u64 = 6;

impl Ctx {
    fn param(&mut self, key: &str, value: impl Into<Param>) {
        self.config.insert(key.to_string(), value.into());
    }

    /// `|observed - expected| <= tolerance`.
    fn abs(&mut self, name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) {
        let pass = (observed - expected).abs() <= tolerance;
        self.push(name, expected, observed, tolerance, "abs", pass);
    }

    /// `|observed - expected| <= tolerance * |expected|`.
    fn rel(&mut self, name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) {
        let pass = (observed - expected).abs() <= tolerance * expected.abs();
        self.push(name, expected, observed, tolerance, "rel", pass);
    }

    /// `observed <= expected + tolerance`.
    fn at_most(&mut self, name: impl Into<String>, bound: f64, observed: f64, tolerance: f64) {
        let pass = observed <= bound + tolerance;
        self.push(name, bound, observed, tolerance, "upper_bound", pass);
    }

    /// A yes/no property: expected 1, observed 1 on success.
    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.push(name, 1.0, if ok { 1.0 } else { 0.0 }, 0.0, "boolean", ok);
    }

    fn push(
        &mut self,
        name: impl Into<String>,
        expected: f64,
        observed: f64,
        tolerance: f64,
        criterion: &'static str,
        pass: bool,
    ) {
        self.checks.push(Check {
            name: name.into(),
            expected: Num(expected),
            observed: Num(observed),
            tolerance: Num(tolerance),
            criterion,
            pass: pass && observed.is_finite(),
        });
    }
}

fn rv(x: f64) -> RateValue<f64> {
    RateValue::new(x).expect("rate values in the suites are <= 0")
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn core_suite(ctx: &mut Ctx) -> Result<()> {
    let n = 200;
    ctx.param("core.random_pairs", n);
    let mut rng = ctx.root.child(STREAM_CORE).rng();
    let mut identity = 0.0f64;
    let mut round_trip = 0.0f64;
    let mut dual = 0.0f64;
    for _ in 0..n {
        let alpha = rng.random_range(0.05..0.95);
        let s = -(rng.random_range(-5.0..5.0f64)).exp();
        let pair = pair_from_alpha(alpha)?;
        let r = r_from_s(rv(s), pair);
        identity = identity.max(identity_residual(r, rv(s), pair));
        round_trip = round_trip.max(rel_err(s_from_r(r, pair).value(), s));
        let r2 = -(rng.random_range(-5.0..5.0f64)).exp();
        round_trip = round_trip.max(rel_err(r_from_s(s_from_r(rv(r2), pair), pair).value(), r2));
        // r as minus the minimum of |s| v^-beta + v
        let (_, m) = minimize_power_sum(-s, pair.beta())?;
        dual = dual.max(rel_err(-m, r.value()));
    }
    ctx.abs("core.identity_residual_max", 0.0, identity, 1e-12);
    ctx.abs("core.round_trip_rel_err_max", 0.0, round_trip, 1e-12);
    ctx.abs("core.laplace_principle_rel_err_max", 0.0, dual, 1e-12);

    let half = pair_from_alpha(0.5)?;
    ctx.abs(
        "core.half.s_from_r(-2)",
        -1.0,
        s_from_r(rv(-2.0), half).value(),
        0.0,
    );
    ctx.abs(
        "core.half.r_from_s(-1)",
        -2.0,
        r_from_s(rv(-1.0), half).value(),
        0.0,
    );

    let band = slower_band_from_rlower(rv(-1.0), half);
    ctx.abs("core.band.half.lower", -1.0, band.lower(), 1e-12);
    ctx.abs("core.band.half.upper", -0.25, band.upper(), 1e-12);
    ctx.abs(
        "core.entropy.half_exp",
        2.0,
        entropy_h(0.5f64)?.exp(),
        1e-12,
    );

    let mut inversion = 0.0f64;
    let mut entropy_identity = 0.0f64;
    for i in 1..10 {
        let alpha = i as f64 / 10.0;
        let pair = pair_from_alpha(alpha)?;
        let s = -0.8;
        let rb = rlower_band_from_slower(rv(s), pair);
        inversion = inversion.max(rel_err(
            slower_band_from_rlower(rv(rb.upper()), pair).lower(),
            s,
        ));
        inversion = inversion.max(rel_err(
            slower_band_from_rlower(rv(rb.lower()), pair).upper(),
            s,
        ));
        let lhs = entropy_h(alpha)?.exp() * alpha;
        entropy_identity = entropy_identity.max(rel_err(lhs, pair.beta().powf(1.0 - alpha)));
    }
    ctx.abs("core.band_inversion_rel_err_max", 0.0, inversion, 1e-12);
    ctx.abs(
        "core.entropy_identity_rel_err_max",
        0.0,
        entropy_identity,
        1e-12,
    );
    Ok(())
}

fn lattice_suite(ctx: &mut Ctx) -> Result<()> {
    let (q, s, beta) = (0.5, -1.0, 1.0);
    ctx.param("lattice.q", q);
    ctx.param("lattice.s", s);
    ctx.param("lattice.beta", beta);
    let d = LatticeDistribution::new(q, s, beta)?;
    let pair = pair_from_alpha(0.5)?;
    let rates = d.theoretic_rates(pair)?;

    let mut at_points = 0.0f64;
    let mut below_points = 0.0f64;
    for n in 2..=20 {
        let eps = d.support(n);
        at_points = at_points.max((eps.powf(beta) * d.log_cdf(eps)? - q.powf(beta) * s).abs());
        let eps = d.support(n - 1) * (1.0 - 1e-9);
        below_points = below_points.max((eps.powf(beta) * d.log_cdf(eps)? - s).abs());
    }
    ctx.abs(
        "lattice.oscillation_at_support_max_err",
        0.0,
        at_points,
        0.0,
    );
    ctx.abs(
        "lattice.oscillation_below_support_max_err",
        0.0,
        below_points,
        1e-8,
    );

    // the upper small-ball limit is q^beta s, visible for beta != 1
    let d2 = LatticeDistribution::new(0.5f64, -1.0, 2.0)?;
    let eps = d2.support(12);
    ctx.rel(
        "lattice.upper_limit_beta2",
        -0.25,
        eps.powi(2) * d2.log_cdf(eps)?,
        1e-12,
    );
    ctx.rel("lattice.rates.s_upper", -0.5, rates.s_upper, 1e-15);
    ctx.rel("lattice.rates.r_upper", -2f64.sqrt(), rates.r_upper, 1e-15);
    ctx.rel(
        "lattice.rates.r_lower_band.lower",
        -1.5,
        rates.r_lower_band.lower(),
        1e-15,
    );
    ctx.rel(
        "lattice.rates.r_lower_band.upper",
        -1.0,
        rates.r_lower_band.upper(),
        1e-15,
    );

    // empirical cdf
    let n_samples = 1_000_000;
    ctx.param("lattice.samples", n_samples);
    let sample = d.sample(n_samples, ctx.root.child(STREAM_LATTICE));
    let n_max = d.max_index() as usize;
    let mut counts = vec![0usize; n_max + 2];
    for &x in &sample.values {
        counts[d.support_index(x)? as usize] += 1;
    }
    // F_n(q^k) counts draws with index >= k
    let mut ks = 0.0f64;
    let mut tail = n_samples;
    for (k, &count) in counts.iter().enumerate().take(n_max + 1).skip(1) {
        let emp = tail as f64 / n_samples as f64;
        ks = ks.max((emp - d.cdf(d.support(k as u32))?).abs());
        tail -= count;
    }
    ctx.at_most("lattice.kolmogorov_distance", 0.003, ks, 0.0);
    ctx.abs("lattice.sample_clamped", 0.0, sample.clamped as f64, 0.0);

    // Laplace rates on a geometric lambda grid
    let lambdas = geometric_grid(1e2, 1e6, 64)?;
    ctx.param(
        "lattice.lambda_grid",
        "geometric 1e2..1e6, 64 points, window 0.5",
    );
    let points = lambdas
        .iter()
        .map(|&l| Ok((l, d.log_laplace(l, 1e-14)?)))
        .collect::<Result<Vec<_>>>()?;
    let est = laplace_rate_window(&TailGrid::from_log_values(points)?, 0.5, 0.5)?;
    ctx.rel(
        "lattice.laplace_window_sup",
        rates.r_upper,
        est.window_sup,
        0.05,
    );
    let (lo, hi) = (rates.r_lower_band.lower(), rates.r_lower_band.upper());
    ctx.push(
        "lattice.laplace_window_inf_in_band",
        (lo + hi) / 2.0,
        est.window_inf,
        0.05,
        "in [lower (1 + tol), upper (1 - tol)]",
        est.window_inf >= lo * 1.05 && est.window_inf <= hi * 0.95,
    );

    // Chernoff and sandwich dominance on 20 x 20 grids
    let lambda_grid = geometric_grid(1.0, 1e6, 20)?;
    let eps_grid = geometric_grid(d.support(20), q, 20)?;
    let log_l = lambda_grid
        .iter()
        .map(|&l| d.log_laplace(l, 1e-14))
        .collect::<Result<Vec<_>>>()?;
    let mut chernoff_violations = 0usize;
    let mut sandwich_violations = 0usize;
    for &eps in &eps_grid {
        let log_cdf = d.log_cdf(eps)?;
        let mut bound = f64::INFINITY;
        for (&l, &ll) in lambda_grid.iter().zip(&log_l) {
            bound = bound.min(l * eps + ll);
            let upper = log_add_exp(log_cdf, -l * eps);
            sandwich_violations += (ll > upper + 1e-12 * upper.abs()) as usize;
        }
        chernoff_violations += (log_cdf > bound + 1e-12 * bound.abs()) as usize;
    }
    ctx.abs(
        "lattice.chernoff_violations",
        0.0,
        chernoff_violations as f64,
        0.0,
    );
    ctx.abs(
        "lattice.sandwich_violations",
        0.0,
        sandwich_violations as f64,
        0.0,
    );
    Ok(())
}

fn brownian_suite(ctx: &mut Ctx) -> Result<()> {
    let quad = QuadratureConfig::<f64>::default();
    let unit = TimeGrid::new(1.0, vec![1.0])?;
    let whole = BoxFamily::whole_line(1);

    for gamma in [1.0, 5.0, 20.0] {
        let v = chain_log_functional(0.0, &unit, &whole, gamma, &quad)?;
        ctx.abs(
            format!("brownian.chain_whole_line.gamma={gamma}"),
            exact_log_laplace(gamma, 1.0),
            v,
            1e-6,
        );
    }

    let mut ck = 0.0f64;
    for &(g, t1, t2, x, z) in &[
        (1.0, 0.3, 0.7, 0.2, -0.5),
        (5.0, 0.5, 0.5, 1.0, 0.8),
        (20.0, 0.25, 1.0, -0.3, 0.1),
    ] {
        let p1 = KernelParams::new(g, t1)?;
        let p2 = KernelParams::new(g, t2)?;
        let lhs = integrate_1d(
            |y| log_kernel(x, y, &p1) + log_kernel(y, z, &p2),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &quad,
        )?;
        ck = ck.max((lhs - log_kernel(x, z, &KernelParams::new(g, t1 + t2)?)).abs());
    }
    ctx.abs("brownian.chapman_kolmogorov_max_err", 0.0, ck, 1e-6);

    let mass = integrate_1d(
        |z| {
            log_kernel(
                0.0,
                z,
                &KernelParams {
                    gamma: 1e-6,
                    t: 1.0,
                },
            )
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        &quad,
    )?;
    ctx.abs("brownian.undamped_mass", 1.0, mass.exp(), 1e-5);

    // gamma -> infinity limit of the chain
    let b12: BoxFamily<f64> = BoxFamily::new(vec![Interval::new(1.0, 2.0)?]);
    let target = bsqr_asymptotic_rate(0.0, &unit, &b12)?;
    let gammas = [25.0, 50.0, 100.0, 200.0];
    let seq = gammas
        .iter()
        .map(|&g| Ok(chain_log_functional(0.0, &unit, &b12, g, &quad)? / g))
        .collect::<Result<Vec<f64>>>()?;
    ctx.param("brownian.bsqr_gammas", &gammas[..]);
    ctx.holds(
        "brownian.bsqr_monotone_toward_limit",
        seq.windows(2)
            .all(|w| (w[1] - target).abs() < (w[0] - target).abs()),
    );
    ctx.rel("brownian.bsqr_gamma=200", target, seq[3], 0.05);

    // Monte Carlo Laplace transform against 1/sqrt(cosh gamma)
    let steps = 2000;
    let paths = 200_000;
    ctx.param("brownian.laplace_mc.steps", steps);
    ctx.param("brownian.laplace_mc.paths", paths);
    let cfg = PathSampleConfig::new(steps, paths, ctx.root.child(STREAM_BROWNIAN_LAPLACE))?
        .with_threads(ctx.threads);
    let gs = [1.0, 2.0, 5.0];
    let est = mc_l2_laplace(&gs, &cfg, 1.0)?;
    for (e, g) in est.iter().zip(gs) {
        let exact = exact_log_laplace(g, 1.0).exp();
        ctx.abs(
            format!("brownian.laplace_mc.gamma={g}"),
            exact,
            e.estimate,
            3.0 * e.std_error + 0.005 * exact,
        );
    }

    // small-ball exponent: eps log p rises towards -1/8 from below
    let sb_paths = 400_000;
    let sb_steps = 500;
    let eps = [0.05, 0.03, 0.02];
    ctx.param("brownian.smallball.paths", sb_paths);
    ctx.param("brownian.smallball.steps", sb_steps);
    ctx.param("brownian.smallball.epsilons", &eps[..]);
    let cfg = PathSampleConfig::new(
        sb_steps,
        sb_paths,
        ctx.root.child(STREAM_BROWNIAN_SMALLBALL),
    )?
    .with_threads(ctx.threads);
    let sb = mc_smallball_many(&eps, &cfg, 1.0)?;
    let exps: Vec<f64> = sb.iter().zip(eps).map(|(p, e)| e * p.p_hat.ln()).collect();
    ctx.holds("brownian.smallball.reliable", sb.iter().all(|p| p.reliable));
    ctx.holds(
        "brownian.smallball.exponent_increasing_as_eps_decreases",
        exps.windows(2).all(|w| w[1] > w[0]),
    );
    for (e, x) in eps.iter().zip(&exps) {
        ctx.at_most(
            format!("brownian.smallball.eps={e}.below_limit"),
            -0.125,
            *x,
            0.0,
        );
    }

    // conditional skeleton probability
    let c_paths = 200_000;
    ctx.param("brownian.conditional.paths", c_paths);
    let cfg = PathSampleConfig::new(
        sb_steps,
        c_paths,
        ctx.root.child(STREAM_BROWNIAN_CONDITIONAL),
    )?
    .with_threads(ctx.threads);
    let box_far: BoxFamily<f64> = BoxFamily::new(vec![Interval::new(0.5, 1.0)?]);
    let rate = condbb_rate(&unit, &box_far)?;
    let cond = [0.1, 0.05]
        .iter()
        .map(|&e| Ok(e * mc_conditional(&unit, &box_far, e, &cfg)?.p_hat.ln()))
        .collect::<Result<Vec<f64>>>()?;
    ctx.holds(
        "brownian.conditional.trend_toward_rate",
        (cond[1] - rate).abs() < (cond[0] - rate).abs(),
    );
    ctx.at_most(
        "brownian.conditional.eps=0.05.below_rate",
        rate,
        cond[1],
        0.0,
    );
    // a box around zero captures more of the conditioned paths as eps shrinks
    let half_grid = TimeGrid::new(1.0, vec![0.5])?;
    let near_zero: BoxFamily<f64> = BoxFamily::new(vec![Interval::new(-0.1, 0.1)?]);
    let p_wide = mc_conditional(&half_grid, &near_zero, 0.1, &cfg)?.p_hat;
    let p_narrow = mc_conditional(&half_grid, &near_zero, 0.05, &cfg)?.p_hat;
    ctx.holds(
        "brownian.conditional.zero_rate_box_gains_mass",
        p_narrow > p_wide,
    );

    rate_checks(ctx)
}

fn rate_checks(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.root.child(STREAM_RATES).rng();
    let mut agreement = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=4usize);
        let at_horizon = rng.random_bool(0.5);
        let denom = n as f64 + if at_horizon { 0.0 } else { 1.0 };
        let grid = TimeGrid::new(1.0, (1..=n).map(|i| i as f64 / denom).collect())?;
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let points = BoxFamily::new(z.iter().map(|&v| Interval::point(v)).collect());
        let lhs = rate_i_finite(&z, &grid)?;
        agreement = agreement.max((lhs + condbb_rate(&grid, &points)?).abs() / (1.0 + lhs.abs()));
    }
    ctx.abs("rates.finite_vs_condbb_max_err", 0.0, agreement, 1e-12);
    let grid = TimeGrid::new(1.0, vec![0.4, 1.0])?;
    ctx.abs(
        "rates.I_at_zero",
        0.0,
        rate_i_finite(&[0.0, 0.0], &grid)?,
        0.0,
    );

    let mut brute = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=4usize);
        let mut boxes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for _ in 0..n {
            let a: f64 = rng.random_range(-5.0..5.0);
            let b: f64 = rng.random_range(-5.0..5.0);
            let (mut lo, mut hi) = (a.min(b), a.max(b));
            match rng.random_range(0..4) {
                0 => lo = f64::NEG_INFINITY,
                1 => hi = f64::INFINITY,
                _ => {}
            }
            boxes.push(Interval::new(lo, hi)?);
            weights.push(if rng.random_bool(0.5) { 2.0 } else { 1.0 });
        }
        let (value, _) = essinf_quadratic(&BoxFamily::new(boxes.clone()), &weights)?;
        brute = brute.max((value - brute_force_quadratic(&boxes, &weights)).abs());
    }
    ctx.abs("rates.essinf_vs_dense_grid_max_err", 0.0, brute, 1e-9);
    Ok(())
}

/// Dense-grid minimum of `sum w_i z_i^2`, coordinate by coordinate (the
/// objective is separable), with unbounded sides cut at 10.
fn brute_force_quadratic(boxes: &[Interval<f64>], weights: &[f64]) -> f64 {
    const POINTS: usize = 1_000_000;
    boxes
        .iter()
        .zip(weights)
        .map(|(b, &w)| {
            let lo = b.lo.max(-10.0);
            let hi = b.hi.min(10.0);
            let h = (hi - lo) / POINTS as f64;
            (0..=POINTS)
                .map(|k| {
                    let z = if k == POINTS { hi } else { lo + k as f64 * h };
                    w * z * z
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}
