//! Small `L^2`-norm problem for Brownian motion.
//!
//! With `X = int_0^t B_s^2 ds` and `lambda = gamma^2 / 2`, the damped
//! transition density
//!
//! ```text
//! phi(x; t, z) = sqrt(gamma) / sqrt(2 pi sinh(t gamma))
//!              * exp(-((x^2 + z^2) gamma cosh(t gamma) - 2 x z gamma) / (2 sinh(t gamma)))
//! ```
//!
//! gives `E_x[exp(-lambda X); B_t in dz] = phi(x; t, z) dz`. Chaining kernels
//! over `0 < t_1 < ... < t_n = t` yields the Laplace functional restricted to
//! `B_{t_i} in A_i`. This module evaluates those chains by nested log-space
//! quadrature, provides their `gamma -> inf` limits and the rate functions of
//! the conditioned skeletons, and a path sampler for Monte Carlo checks.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::estimators::{mc_laplace_many, McEstimate, NonNegativeSampler};
use crate::numerics::{integrate_1d_hinted, run_chunked, QuadratureConfig, SeedSpec, StreamRng};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams<T> {
    pub gamma: T,
    pub t: T,
}

impl<T: Real> KernelParams<T> {
    pub fn new(gamma: T, t: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(Error::domain("gamma", gamma.as_f64(), "finite and > 0"));
        }
        if !(t > T::zero() && t.is_finite()) {
            return Err(Error::domain("t", t.as_f64(), "finite and > 0"));
        }
        Ok(Self { gamma, t })
    }
}

/// `log sinh(u)` for `u > 0`, as `u - log 2 + log(1 - exp(-2u))`.
pub fn log_sinh<T: Real>(u: T) -> T {
    u - T::LN_2() + (-(-T::lit(2.0) * u).exp_m1()).ln()
}

/// `log cosh(u)`, as `|u| - log 2 + log(1 + exp(-2|u|))`.
pub fn log_cosh<T: Real>(u: T) -> T {
    let a = u.abs();
    a - T::LN_2() + (-T::lit(2.0) * a).exp().ln_1p()
}

/// `log phi(x; t, z)`, finite for all arguments up to at least `t gamma = 500`.
///
/// The quadratic form is evaluated as
/// `(x - z)^2 / sinh(u) + (x^2 + z^2) tanh(u / 2)`, which equals
/// `(x^2 + z^2) coth(u) - 2xz / sinh(u)` without cancellation for small `u`.
pub fn log_kernel<T: Real>(x: T, z: T, params: &KernelParams<T>) -> T {
    let g = params.gamma;
    let u = params.t * g;
    let two = T::lit(2.0);
    let ls = log_sinh(u);
    let csch = (-ls).exp();
    let d = x - z;
    let quad = d * d * csch + (x * x + z * z) * (u / two).tanh();
    (g.ln() - (two * T::PI()).ln() - ls) / two - g * quad / two
}

/// `-1/2 log cosh(gamma t)`, the log Laplace transform of `X` at
/// `lambda = gamma^2 / 2` started from 0.
pub fn exact_log_laplace<T: Real>(gamma: T, t: T) -> T {
    -log_cosh(gamma * t) / T::lit(2.0)
}

/// Observation times `0 < t_1 < ... < t_n <= horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid<T> {
    horizon: T,
    times: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, times: Vec<T>) -> Result<Self> {
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::domain("horizon", horizon.as_f64(), "finite and > 0"));
        }
        if times.is_empty() {
            return Err(Error::Empty("time grid"));
        }
        if !(times[0] > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "first time {} is not positive",
                times[0]
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "times are not strictly increasing".into(),
            ));
        }
        let last = *times.last().expect("non-empty");
        if last > horizon * (T::one() + Self::tol()) {
            return Err(Error::InvalidGrid(format!(
                "last time {last} exceeds the horizon {horizon}"
            )));
        }
        Ok(Self { horizon, times })
    }

    fn tol() -> T {
        T::lit(1e-12).max(T::epsilon() * T::lit(8.0))
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Whether the last observation time is the horizon.
    pub fn ends_at_horizon(&self) -> bool {
        let last = *self.times.last().expect("non-empty");
        (last - self.horizon).abs() <= Self::tol() * self.horizon
    }
}

/// A closed interval, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == T::infinity() || hi == T::neg_infinity() {
            return Err(Error::EmptyBox {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn point(z: T) -> Self {
        Self { lo: z, hi: z }
    }

    pub fn contains(&self, z: T) -> bool {
        self.lo <= z && z <= self.hi
    }

    pub fn is_real_line(&self) -> bool {
        self.lo == T::neg_infinity() && self.hi == T::infinity()
    }

    /// The point of the interval closest to zero.
    pub fn nearest_to_zero(&self) -> Result<T> {
        if self.lo > self.hi {
            return Err(Error::EmptyBox {
                lo: self.lo.as_f64(),
                hi: self.hi.as_f64(),
            });
        }
        Ok(if self.lo > T::zero() {
            self.lo
        } else if self.hi < T::zero() {
            self.hi
        } else {
            T::zero()
        })
    }
}

impl<T: Real> FromStr for Interval<T> {
    type Err = Error;

    /// `a:b`, `:b`, `a:` or `:`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "interval",
            input: s.to_string(),
        };
        let (a, b) = s.trim().split_once(':').ok_or_else(err)?;
        let bound = |text: &str, default: T| -> Result<T> {
            let text = text.trim();
            if text.is_empty() {
                Ok(default)
            } else {
                text.parse::<f64>().map(T::lit).map_err(|_| err())
            }
        };
        Interval::new(bound(a, T::neg_infinity())?, bound(b, T::infinity())?)
    }
}

impl<T: Real> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo.is_finite() {
            write!(f, "{}", self.lo)?;
        }
        write!(f, ":")?;
        if self.hi.is_finite() {
            write!(f, "{}", self.hi)?;
        }
        Ok(())
    }
}

/// One interval per observation time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxFamily<T>(pub Vec<Interval<T>>);

impl<T: Real> BoxFamily<T> {
    pub fn new(boxes: Vec<Interval<T>>) -> Self {
        Self(boxes)
    }

    pub fn whole_line(n: usize) -> Self {
        Self(vec![Interval::real_line(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval<T>> {
        self.0.iter()
    }

    pub fn contains(&self, z: &[T]) -> bool {
        self.0.len() == z.len() && self.0.iter().zip(z).all(|(b, &v)| b.contains(v))
    }
}

impl<T: Real> FromStr for BoxFamily<T> {
    type Err = Error;

    /// Comma-separated intervals, e.g. `1:2,:`.
    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(str::parse)
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

fn check_dims<T>(grid: &TimeGrid<T>, boxes: &BoxFamily<T>) -> Result<()> {
    if grid.times.len() != boxes.0.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.times.len(),
            found: boxes.0.len(),
        });
    }
    Ok(())
}

/// Appends `(horizon, R)` when the last time is before the horizon.
fn close_at_horizon<T: Real>(
    grid: &TimeGrid<T>,
    boxes: &BoxFamily<T>,
) -> (Vec<T>, Vec<Interval<T>>) {
    let mut times = grid.times.clone();
    let mut ivs = boxes.0.clone();
    if !grid.ends_at_horizon() {
        times.push(grid.horizon);
        ivs.push(Interval::real_line());
    }
    (times, ivs)
}

/// `log E_x0[exp(-gamma^2/2 int_0^t B^2) prod 1_{A_i}(B_{t_i})]`.
///
/// Backward recursion `h_n = 1`, `h_{k-1}(z) = int_{A_k} phi(z; t_k - t_{k-1}, y) h_k(y) dy`,
/// each level a 1-D adaptive quadrature in log space. If the last time is
/// before the horizon, a final observation with box `R` is appended.
pub fn chain_log_functional<T: Real>(
    x0: T,
    grid: &TimeGrid<T>,
    boxes: &BoxFamily<T>,
    gamma: T,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    check_dims(grid, boxes)?;
    quad.validate()?;
    let (times, ivs) = close_at_horizon(grid, boxes);
    let mut params = Vec::with_capacity(times.len());
    let mut prev = T::zero();
    for &t in &times {
        params.push(KernelParams::new(gamma, t - prev)?);
        prev = t;
    }
    let chain = Chain {
        params: &params,
        boxes: &ivs,
        quad,
    };
    chain.log_h(0, x0)
}

struct Chain<'a, T> {
    params: &'a [KernelParams<T>],
    boxes: &'a [Interval<T>],
    quad: &'a QuadratureConfig<T>,
}

impl<T: Real> Chain<'_, T> {
    /// `log h_k(z)`: integral over the remaining boxes `k..` started at `z`.
    fn log_h(&self, k: usize, z: T) -> Result<T> {
        if k == self.params.len() {
            return Ok(T::zero());
        }
        let p = &self.params[k];
        let iv = self.boxes[k];
        if iv.lo == iv.hi {
            // point box: Lebesgue-null
            return Ok(T::neg_infinity());
        }
        let u = p.gamma * p.t;
        let centre = z / u.cosh().max(T::one());
        let scale = (u.tanh() / p.gamma).sqrt();
        let failure = RefCell::new(None);
        let value = integrate_1d_hinted(
            |y| {
                let inner = match self.log_h(k + 1, y) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        T::neg_infinity()
                    }
                };
                log_kernel(z, y, p) + inner
            },
            iv.lo,
            iv.hi,
            centre,
            scale,
            self.quad,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => value,
        }
    }
}

/// `inf over z in A_1 x ... x A_n of sum w_i z_i^2` and the minimizer,
/// taking each coordinate at its point nearest zero.
pub fn essinf_quadratic<T: Real>(boxes: &BoxFamily<T>, weights: &[T]) -> Result<(T, Vec<T>)> {
    if boxes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: boxes.len(),
            found: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= T::zero())) {
        return Err(Error::domain("weight", w.as_f64(), ">= 0"));
    }
    let argmin = boxes
        .iter()
        .map(Interval::nearest_to_zero)
        .collect::<Result<Vec<_>>>()?;
    let value = argmin
        .iter()
        .zip(weights)
        .fold(T::zero(), |acc, (&z, &w)| acc + w * z * z);
    Ok((value, argmin))
}

/// `-(t/2 + x0^2/2 + inf (z_1^2 + ... + z_{n-1}^2 + z_n^2 / 2))`, the limit of
/// `(1/gamma) chain_log_functional` as `gamma -> inf`.
pub fn bsqr_asymptotic_rate<T: Real>(x0: T, grid: &TimeGrid<T>, boxes: &BoxFamily<T>) -> Result<T> {
    check_dims(grid, boxes)?;
    let (_, ivs) = close_at_horizon(grid, boxes);
    let n = ivs.len();
    let weights: Vec<T> = (0..n)
        .map(|i| if i + 1 == n { T::lit(0.5) } else { T::one() })
        .collect();
    let (m, _) = essinf_quadratic(&BoxFamily(ivs), &weights)?;
    let two = T::lit(2.0);
    Ok(-(grid.horizon / two + x0 * x0 / two + m))
}

/// Weights `(2, ..., 2, 1)` when the last time is the horizon, else all 2.
fn rate_weights<T: Real>(grid: &TimeGrid<T>) -> Vec<T> {
    let n = grid.len();
    let final_weight = if grid.ends_at_horizon() {
        T::one()
    } else {
        T::lit(2.0)
    };
    (0..n)
        .map(|i| {
            if i + 1 == n {
                final_weight
            } else {
                T::lit(2.0)
            }
        })
        .collect()
}

/// `lim eps log P(B_{t_i} in A_i for all i | X <= eps) = -(t + m)^2/8 + t^2/8`
/// with `m` the weighted quadratic infimum over the boxes.
pub fn condbb_rate<T: Real>(grid: &TimeGrid<T>, boxes: &BoxFamily<T>) -> Result<T> {
    check_dims(grid, boxes)?;
    let (m, _) = essinf_quadratic(boxes, &rate_weights(grid))?;
    let t = grid.horizon;
    let eight = T::lit(8.0);
    Ok(-(t + m) * (t + m) / eight + t * t / eight)
}

/// `I_{t_1..t_n}(z) = ((t + sum w_i z_i^2)^2 - t^2) / 8`.
pub fn rate_i_finite<T: Real>(z: &[T], grid: &TimeGrid<T>) -> Result<T> {
    if z.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: z.len(),
        });
    }
    let q = z
        .iter()
        .zip(rate_weights(grid))
        .fold(T::zero(), |acc, (&v, w)| acc + w * v * v);
    let t = grid.horizon;
    Ok(((t + q) * (t + q) - t * t) / T::lit(8.0))
}

/// Rate function of a path known on a finite skeleton of `(time, value)`
/// pairs in `(0, horizon]`.
///
/// Every interior point adds `2 w^2` and the value at the horizon (zero if
/// absent) adds `w^2`; adding terms never decreases the expression, so the
/// supremum over subsets of the skeleton uses all of it.
pub fn rate_i_path<T: Real>(skeleton: &[(T, T)], horizon: T) -> Result<T> {
    if !(horizon > T::zero()) {
        return Err(Error::domain("horizon", horizon.as_f64(), "> 0"));
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) * horizon;
    let mut times: Vec<T> = Vec::with_capacity(skeleton.len());
    let mut q = T::zero();
    for &(time, w) in skeleton {
        if !(time > T::zero() && time <= horizon + tol) {
            return Err(Error::domain(
                "skeleton time",
                time.as_f64(),
                "0 < time <= horizon",
            ));
        }
        if times.contains(&time) {
            return Err(Error::InvalidGrid(format!(
                "duplicate skeleton time {time}"
            )));
        }
        times.push(time);
        let weight = if (time - horizon).abs() <= tol {
            T::one()
        } else {
            T::lit(2.0)
        };
        q = q + weight * w * w;
    }
    Ok(((horizon + q) * (horizon + q) - horizon * horizon) / T::lit(8.0))
}

/// Discretization of Wiener measure on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSampleConfig {
    pub steps: usize,
    pub n_paths: usize,
    pub seed: SeedSpec,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl PathSampleConfig {
    pub fn new(steps: usize, n_paths: usize, seed: SeedSpec) -> Result<Self> {
        if steps < 2 {
            return Err(Error::domain("steps", steps as f64, ">= 2"));
        }
        if n_paths < 1 {
            return Err(Error::domain("n_paths", n_paths as f64, ">= 1"));
        }
        Ok(Self {
            steps,
            n_paths,
            seed,
            threads: None,
        })
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }
}

const PATH_CHUNK: usize = 1024;

/// Simulates one path with Gaussian increments, writes the skeleton values
/// at `idx` into `skeleton` and returns the trapezoid `int B^2`.
fn simulate_path(
    rng: &mut StreamRng,
    steps: usize,
    dt: f64,
    idx: &[usize],
    skeleton: &mut [f64],
) -> f64 {
    let sd = dt.sqrt();
    let mut b = 0.0f64;
    let mut sum = 0.0f64;
    let mut next = 0;
    for i in 1..=steps {
        let z: f64 = StandardNormal.sample(rng);
        b += sd * z;
        sum += if i == steps { 0.5 * b * b } else { b * b };
        while next < idx.len() && idx[next] == i {
            skeleton[next] = b;
            next += 1;
        }
    }
    sum * dt
}

fn skeleton_indices(times: &[f64], steps: usize, horizon: f64) -> Result<Vec<usize>> {
    let dt = horizon / steps as f64;
    let mut idx = Vec::with_capacity(times.len());
    for &t in times {
        if !(t > 0.0 && t <= horizon * (1.0 + 1e-12)) {
            return Err(Error::domain("skeleton time", t, "0 < time <= horizon"));
        }
        idx.push(((t / dt).round() as usize).clamp(1, steps));
    }
    if idx.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid(
            "skeleton times must be increasing".into(),
        ));
    }
    Ok(idx)
}

fn fold_paths<A, F>(
    config: &PathSampleConfig,
    horizon: f64,
    times: &[f64],
    init: impl Fn() -> A + Sync,
    visit: F,
) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut A, f64, &[f64]) + Sync,
{
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain("horizon", horizon, "finite and > 0"));
    }
    let idx = skeleton_indices(times, config.steps, horizon)?;
    let dt = horizon / config.steps as f64;
    Ok(run_chunked(
        config.n_paths,
        PATH_CHUNK,
        config.seed,
        config.threads,
        |range, rng| {
            let mut acc = init();
            let mut skeleton = vec![0.0; idx.len()];
            for _ in range {
                let integral = simulate_path(rng, config.steps, dt, &idx, &mut skeleton);
                visit(&mut acc, integral, &skeleton);
            }
            acc
        },
    ))
}

/// One simulated path: trapezoid `int B^2` and the values at the requested times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub integral: f64,
    pub skeleton: Vec<f64>,
}

/// Simulates `config.n_paths` paths; skeleton values are taken at the grid
/// points nearest to `skeleton_times`.
pub fn sample_l2_functional(
    config: &PathSampleConfig,
    horizon: f64,
    skeleton_times: &[f64],
) -> Result<Vec<PathSample>> {
    let chunks = fold_paths(
        config,
        horizon,
        skeleton_times,
        Vec::new,
        |acc, integral, sk| {
            acc.push(PathSample {
                integral,
                skeleton: sk.to_vec(),
            })
        },
    )?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Binomial estimate with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionEstimate {
    pub p_hat: f64,
    pub ci_halfwidth: f64,
    pub hits: usize,
    pub trials: usize,
    /// False when fewer than [`MIN_RELIABLE_HITS`] hits were observed.
    pub reliable: bool,
}

pub const MIN_RELIABLE_HITS: usize = 30;

impl ProportionEstimate {
    fn from_counts(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            p_hat: p,
            ci_halfwidth: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            hits,
            trials,
            reliable: hits >= MIN_RELIABLE_HITS,
        }
    }
}

/// Fraction of paths with `int_0^t B^2 <= eps`, one estimate per `eps`,
/// all from the same set of paths.
pub fn mc_smallball_many(
    epsilons: &[f64],
    config: &PathSampleConfig,
    horizon: f64,
) -> Result<Vec<ProportionEstimate>> {
    if let Some(&e) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::domain("epsilon", e, "> 0"));
    }
    let m = epsilons.len();
    let counts = fold_paths(
        config,
        horizon,
        &[],
        || vec![0usize; m],
        |acc, integral, _| {
            for (c, &e) in acc.iter_mut().zip(epsilons) {
                *c += (integral <= e) as usize;
            }
        },
    )?;
    Ok((0..m)
        .map(|j| {
            let hits = counts.iter().map(|c| c[j]).sum();
            ProportionEstimate::from_counts(hits, config.n_paths)
        })
        .collect())
}

/// Fraction of paths with `int_0^t B^2 <= eps`.
pub fn mc_smallball(
    epsilon: f64,
    config: &PathSampleConfig,
    horizon: f64,
) -> Result<ProportionEstimate> {
    Ok(mc_smallball_many(&[epsilon], config, horizon)?[0])
}

/// Leading-order expected number of hits, `n exp(-t^2 / (8 eps))`.
pub fn smallball_expected_hits(epsilon: f64, n_paths: usize, horizon: f64) -> f64 {
    n_paths as f64 * (-horizon * horizon / (8.0 * epsilon)).exp()
}

/// Among paths with `int B^2 <= eps`, the fraction whose skeleton lies in the boxes.
pub fn mc_conditional(
    grid: &TimeGrid<f64>,
    boxes: &BoxFamily<f64>,
    epsilon: f64,
    config: &PathSampleConfig,
) -> Result<ProportionEstimate> {
    check_dims(grid, boxes)?;
    if !(epsilon > 0.0) {
        return Err(Error::domain("epsilon", epsilon, "> 0"));
    }
    let counts = fold_paths(
        config,
        grid.horizon(),
        grid.times(),
        || (0usize, 0usize),
        |acc, integral, sk| {
            if integral <= epsilon {
                acc.0 += 1;
                acc.1 += boxes.contains(sk) as usize;
            }
        },
    )?;
    let (conditioned, hits) = counts.iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
    if conditioned == 0 {
        return Err(Error::EmptyConditioning);
    }
    Ok(ProportionEstimate::from_counts(hits, conditioned))
}

/// Sampler of the discretized `int_0^t B^2`, for [`mc_laplace_many`].
#[derive(Debug, Clone, Copy)]
pub struct L2Sampler {
    pub steps: usize,
    pub horizon: f64,
}

impl NonNegativeSampler for L2Sampler {
    fn draw(&self, rng: &mut StreamRng) -> Option<f64> {
        Some(simulate_path(
            rng,
            self.steps,
            self.horizon / self.steps as f64,
            &[],
            &mut [],
        ))
    }
}

/// Monte Carlo `E[exp(-gamma^2/2 int_0^t B^2)]` for each gamma.
pub fn mc_l2_laplace(
    gammas: &[f64],
    config: &PathSampleConfig,
    horizon: f64,
) -> Result<Vec<McEstimate>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain("horizon", horizon, "finite and > 0"));
    }
    let lambdas: Vec<f64> = gammas.iter().map(|g| g * g / 2.0).collect();
    let sampler = L2Sampler {
        steps: config.steps,
        horizon,
    };
    mc_laplace_many(
        &sampler,
        &lambdas,
        config.n_paths,
        config.seed,
        config.threads,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_1d, log_add_exp};
    use approx::assert_relative_eq;

    fn grid(h: f64, times: &[f64]) -> TimeGrid<f64> {
        TimeGrid::new(h, times.to_vec()).unwrap()
    }

    fn boxes(s: &str) -> BoxFamily<f64> {
        s.parse().unwrap()
    }

    #[test]
    fn kernel_examples() {
        let p = KernelParams::new(3.0, 1.0).unwrap();
        assert!((log_kernel(0.3f64, -1.2, &p) - log_kernel(-1.2, 0.3, &p)).abs() < 1e-14);
        let p = KernelParams::new(1e-6, 1.0).unwrap();
        assert!((log_kernel(0.0f64, 0.0, &p) + 0.918939).abs() < 1e-6);
        let p = KernelParams::new(1.0, 1.0).unwrap();
        let oracle = -0.5 * (2.0 * std::f64::consts::PI * 1f64.sinh()).ln();
        assert_relative_eq!(log_kernel(0.0, 0.0, &p), oracle, max_relative = 1e-14);
        assert!((oracle + 0.999658214).abs() < 1e-9);
    }

    #[test]
    fn kernel_matches_textbook_form() {
        for &(g, t, x, z) in &[
            (2.0, 0.7, 0.4, -0.3),
            (0.5, 2.0, 1.5, 1.1),
            (4.0, 0.3, -0.2, 0.9),
        ] {
            let u: f64 = g * t;
            let direct = (g.sqrt() / (2.0 * std::f64::consts::PI * u.sinh()).sqrt()).ln()
                - ((x * x + z * z) * g * u.cosh() - 2.0 * x * z * g) / (2.0 * u.sinh());
            let p = KernelParams::new(g, t).unwrap();
            assert_relative_eq!(log_kernel(x, z, &p), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn kernel_finite_at_large_damping() {
        let p = KernelParams::new(500.0, 1.0).unwrap();
        for &(x, z) in &[(0.0, 0.0), (3.0, -4.0), (10.0, 10.0)] {
            assert!(log_kernel::<f64>(x, z, &p).is_finite());
        }
        assert!(exact_log_laplace(500.0f64, 1.0).is_finite());
        let p = KernelParams::new(1e-9, 1e-3).unwrap();
        assert!(log_kernel(5.0f64, 5.0, &p).is_finite());
    }

    #[test]
    fn kernel_mass_defect() {
        let cfg = QuadratureConfig::default();
        for g in [0.5, 2.0, 7.0] {
            let p = KernelParams::new(g, 1.0).unwrap();
            let mass = integrate_1d(
                |z| log_kernel(0.4, z, &p),
                f64::NEG_INFINITY,
                f64::INFINITY,
                &cfg,
            )
            .unwrap();
            assert!(mass < 0.0);
        }
        let p = KernelParams::new(1e-6, 1.0).unwrap();
        let mass = integrate_1d(
            |z| log_kernel(0.0, z, &p),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &cfg,
        )
        .unwrap();
        assert!(mass.exp() <= 1.0 && (mass.exp() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn trapezoid_oracle_for_whole_line_chain() {
        // independent route: plain trapezoid of exp(log_kernel) on [-12, 12]
        let p = KernelParams::new(2.0, 1.0).unwrap();
        let h = 1e-4;
        let mut sum = 0.0;
        let n = (24.0 / h) as usize;
        for i in 0..=n {
            let z = -12.0 + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += w * log_kernel(0.0, z, &p).exp();
        }
        let trapezoid = (sum * h).ln();
        let chain = chain_log_functional(
            0.0,
            &grid(1.0, &[1.0]),
            &boxes(":"),
            2.0,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((chain - trapezoid).abs() < 1e-8);
        assert!((chain + 0.662501374).abs() < 1e-8);
        assert_relative_eq!(chain, exact_log_laplace(2.0, 1.0), max_relative = 1e-10);
    }

    #[test]
    fn undamped_chain_is_gaussian_probability() {
        let v = chain_log_functional(
            0.0,
            &grid(1.0, &[1.0]),
            &boxes("1:2"),
            1e-6,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((v.exp() - 0.135905).abs() < 1e-6);
    }

    #[test]
    fn chain_monotone_in_box() {
        let cfg = QuadratureConfig::default();
        let g = grid(1.0, &[1.0]);
        let narrow = chain_log_functional(0.0, &g, &boxes("1:2"), 2.0, &cfg).unwrap();
        let wide = chain_log_functional(0.0, &g, &boxes(":"), 2.0, &cfg).unwrap();
        assert!(narrow < wide);
    }

    #[test]
    fn chain_whole_line_matches_cosh_formula() {
        let cfg = QuadratureConfig::default();
        for &(g, t) in &[(0.3, 1.0), (1.0, 2.0), (5.0, 1.0), (10.0, 2.0)] {
            let v = chain_log_functional(0.0, &grid(t, &[t]), &boxes(":"), g, &cfg).unwrap();
            assert!((v - exact_log_laplace(g, t)).abs() < 1e-6, "g={g} t={t}");
        }
        // two unconstrained steps give the same functional
        let v =
            chain_log_functional(0.0, &grid(1.0, &[0.4, 1.0]), &boxes(":,:"), 3.0, &cfg).unwrap();
        assert!((v - exact_log_laplace(3.0, 1.0)).abs() < 1e-6);
    }

    #[test]
    fn chain_appends_final_time() {
        let cfg = QuadratureConfig::default();
        let short =
            chain_log_functional(0.0, &grid(1.0, &[0.5]), &boxes("0.2:1"), 2.0, &cfg).unwrap();
        let explicit =
            chain_log_functional(0.0, &grid(1.0, &[0.5, 1.0]), &boxes("0.2:1,:"), 2.0, &cfg)
                .unwrap();
        assert_relative_eq!(short, explicit, max_relative = 1e-12);
    }

    #[test]
    fn chain_splits_over_adjacent_boxes() {
        let cfg = QuadratureConfig::default();
        let g = grid(1.0, &[0.5, 1.0]);
        let whole = chain_log_functional(0.3, &g, &boxes("-1:2,:"), 2.5, &cfg).unwrap();
        let left = chain_log_functional(0.3, &g, &boxes("-1:0.5,:"), 2.5, &cfg).unwrap();
        let right = chain_log_functional(0.3, &g, &boxes("0.5:2,:"), 2.5, &cfg).unwrap();
        assert!((whole - log_add_exp(left, right)).abs() < 1e-9);
    }

    #[test]
    fn chapman_kolmogorov() {
        let cfg = QuadratureConfig::default();
        for &(g, t1, t2, x, z) in &[
            (1.0, 0.3, 0.7, 0.2, -0.5),
            (5.0, 0.5, 0.5, 1.0, 0.8),
            (20.0, 0.25, 1.0, -0.3, 0.1),
        ] {
            let p1 = KernelParams::new(g, t1).unwrap();
            let p2 = KernelParams::new(g, t2).unwrap();
            let lhs = integrate_1d(
                |y| log_kernel(x, y, &p1) + log_kernel(y, z, &p2),
                f64::NEG_INFINITY,
                f64::INFINITY,
                &cfg,
            )
            .unwrap();
            let rhs = log_kernel(x, z, &KernelParams::new(g, t1 + t2).unwrap());
            assert!((lhs - rhs).abs() < 1e-6, "g={g}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn bsqr_limit_approached_from_below() {
        let cfg = QuadratureConfig::default();
        let g = grid(1.0, &[1.0]);
        let b = boxes("1:2");
        let target = bsqr_asymptotic_rate(0.0, &g, &b).unwrap();
        assert_eq!(target, -1.0);
        let seq: Vec<f64> = [25.0, 50.0, 100.0, 200.0]
            .iter()
            .map(|&gamma| chain_log_functional(0.0, &g, &b, gamma, &cfg).unwrap() / gamma)
            .collect();
        for w in seq.windows(2) {
            assert!(w[1] > w[0] && w[1] < target + 1e-12, "{seq:?}");
        }
        assert!((seq[3] - target).abs() < 0.05);
    }

    #[test]
    fn essinf_examples() {
        let (v, arg) = essinf_quadratic(&boxes("1:2,-3:-2"), &[2.0, 2.0]).unwrap();
        assert_eq!(v, 10.0);
        assert_eq!(arg, vec![1.0, -2.0]);
        let (v, _) = essinf_quadratic(&boxes("-1:4"), &[7.0]).unwrap();
        assert_eq!(v, 0.0);
        let (v, arg) = essinf_quadratic(&boxes("5:"), &[1.0]).unwrap();
        assert_eq!((v, arg[0]), (25.0, 5.0));
        let bad = BoxFamily(vec![Interval { lo: 2.0, hi: 1.0 }]);
        assert!(matches!(
            essinf_quadratic(&bad, &[1.0]),
            Err(Error::EmptyBox { .. })
        ));
        assert!(essinf_quadratic(&boxes(":"), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn bsqr_examples() {
        assert_eq!(
            bsqr_asymptotic_rate(0.0, &grid(1.0, &[1.0]), &boxes("1:2")).unwrap(),
            -1.0
        );
        assert_relative_eq!(
            bsqr_asymptotic_rate(0.7, &grid(2.0, &[0.5, 2.0]), &boxes(":,:")).unwrap(),
            -1.245,
            max_relative = 1e-15
        );
        assert_eq!(
            bsqr_asymptotic_rate(1.0, &grid(2.0, &[1.0, 2.0]), &boxes("1:2,-3:-2")).unwrap(),
            -4.5
        );
    }

    #[test]
    fn condbb_examples() {
        assert_eq!(
            condbb_rate(&grid(1.0, &[1.0]), &boxes("1:2")).unwrap(),
            -0.375
        );
        assert_eq!(
            condbb_rate(&grid(1.0, &[0.3, 1.0]), &boxes("-1:1,-0.5:2")).unwrap(),
            0.0
        );
        assert_eq!(
            condbb_rate(&grid(1.0, &[0.5]), &boxes("1:2")).unwrap(),
            -1.0
        );
        assert_eq!(
            condbb_rate(&grid(1.0, &[1.0]), &boxes("0.5:1")).unwrap(),
            -0.0703125
        );
    }

    #[test]
    fn rate_finite_examples() {
        let g = grid(1.0, &[0.2, 0.6]);
        assert_eq!(rate_i_finite(&[0.0, 0.0], &g).unwrap(), 0.0);
        assert_eq!(rate_i_finite(&[1.0], &grid(1.0, &[1.0])).unwrap(), 0.375);
        assert_eq!(rate_i_finite(&[1.0], &grid(1.0, &[0.5])).unwrap(), 1.0);
        assert!(rate_i_finite(&[1.0], &g).is_err());
    }

    #[test]
    fn rate_path_examples() {
        assert_eq!(rate_i_path(&[(0.3, 0.0), (1.0, 0.0)], 1.0).unwrap(), 0.0);
        assert_eq!(rate_i_path(&[(0.5, 1.0)], 1.0).unwrap(), 1.0);
        assert_eq!(rate_i_path(&[(0.5, 1.0), (1.0, 0.0)], 1.0).unwrap(), 1.0);
        assert_eq!(rate_i_path(&[(1.0, 1.0)], 1.0).unwrap(), 0.375);
        assert!(rate_i_path(&[(1.5, 1.0)], 1.0).is_err());
        assert!(rate_i_path(&[(0.0, 1.0)], 1.0).is_err());
        assert!(rate_i_path(&[(0.5, 1.0), (0.5, 2.0)], 1.0).is_err());
    }

    #[test]
    fn interval_parsing() {
        let iv: Interval<f64> = "1:2".parse().unwrap();
        assert_eq!((iv.lo, iv.hi), (1.0, 2.0));
        let iv: Interval<f64> = ":-1.5".parse().unwrap();
        assert_eq!((iv.lo, iv.hi), (f64::NEG_INFINITY, -1.5));
        let iv: Interval<f64> = "3:".parse().unwrap();
        assert_eq!((iv.lo, iv.hi), (3.0, f64::INFINITY));
        assert!("  :  ".parse::<Interval<f64>>().unwrap().is_real_line());
        assert!("2:1".parse::<Interval<f64>>().is_err());
        assert!("x:1".parse::<Interval<f64>>().is_err());
        assert!("12".parse::<Interval<f64>>().is_err());
        let fam: BoxFamily<f64> = "1:2,:,-1:".parse().unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(fam.0[1].to_string(), ":");
        assert_eq!(fam.0[0].to_string(), "1:2");
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(1.0, vec![]).is_err());
        assert!(TimeGrid::new(1.0, vec![0.0, 1.0]).is_err());
        assert!(TimeGrid::new(1.0, vec![0.5, 0.5]).is_err());
        assert!(TimeGrid::new(1.0, vec![0.5, 1.5]).is_err());
        assert!(TimeGrid::new(0.0, vec![0.5]).is_err());
        assert!(TimeGrid::new(1.0, vec![0.5, 1.0])
            .unwrap()
            .ends_at_horizon());
        assert!(!TimeGrid::new(1.0, vec![0.5]).unwrap().ends_at_horizon());
    }

    #[test]
    fn path_samples_deterministic_and_nonnegative() {
        let cfg = PathSampleConfig::new(200, 3000, SeedSpec::new(7, 0)).unwrap();
        let a = sample_l2_functional(&cfg, 1.0, &[0.5, 1.0]).unwrap();
        let b = sample_l2_functional(&cfg.with_threads(Some(2)), 1.0, &[0.5, 1.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3000);
        assert!(a.iter().all(|p| p.integral >= 0.0 && p.skeleton.len() == 2));
    }

    #[test]
    fn path_mean_of_l2_functional() {
        let cfg = PathSampleConfig::new(200, 100_000, SeedSpec::new(1, 0)).unwrap();
        let xs: Vec<f64> = sample_l2_functional(&cfg, 1.0, &[])
            .unwrap()
            .into_iter()
            .map(|p| p.integral)
            .collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.5).abs() < 3.0 * (var / n).sqrt(), "mean {mean}");
    }

    #[test]
    fn smallball_mc_basics() {
        let cfg = PathSampleConfig::new(100, 20_000, SeedSpec::new(2, 0)).unwrap();
        let est = mc_smallball_many(&[10.0, 0.5, 0.1, 0.05], &cfg, 1.0).unwrap();
        assert!(est[0].p_hat > 0.999);
        for w in est.windows(2) {
            assert!(w[1].p_hat <= w[0].p_hat);
        }
        let tiny = mc_smallball(0.005, &cfg, 1.0).unwrap();
        assert!(!tiny.reliable);
        assert!(mc_smallball(0.0, &cfg, 1.0).is_err());
    }

    #[test]
    fn conditional_mc_basics() {
        let cfg = PathSampleConfig::new(100, 20_000, SeedSpec::new(3, 0)).unwrap();
        let g = grid(1.0, &[0.5]);
        let all = mc_conditional(&g, &boxes(":"), 0.2, &cfg).unwrap();
        assert_eq!(all.p_hat, 1.0);
        let near_zero = mc_conditional(&g, &boxes("-0.1:0.1"), 0.05, &cfg).unwrap();
        let far = mc_conditional(&g, &boxes("0.5:1"), 0.05, &cfg).unwrap();
        assert!(near_zero.p_hat > far.p_hat);
        assert_eq!(
            mc_conditional(&g, &boxes(":"), 1e-6, &cfg),
            Err(Error::EmptyConditioning)
        );
    }

    #[test]
    fn l2_laplace_mc_small_run() {
        let cfg = PathSampleConfig::new(200, 20_000, SeedSpec::new(4, 0)).unwrap();
        let est = mc_l2_laplace(&[1.0, 2.0], &cfg, 1.0).unwrap();
        for (e, g) in est.iter().zip([1.0f64, 2.0]) {
            let exact = exact_log_laplace(g, 1.0).exp();
            assert!((e.estimate - exact).abs() < 4.0 * e.std_error + 0.005 * exact);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rate_finite_is_minus_condbb_on_points(
                z in prop::collection::vec(-3.0f64..3.0, 1..5),
                at_horizon in any::<bool>(),
            ) {
                let n = z.len();
                let h = 1.0;
                let times: Vec<f64> = (1..=n).map(|i| i as f64 / (n as f64 + if at_horizon { 0.0 } else { 1.0 })).collect();
                let g = TimeGrid::new(h, times).unwrap();
                let pts = BoxFamily(z.iter().map(|&v| Interval::point(v)).collect());
                let lhs = rate_i_finite(&z, &g).unwrap();
                let rhs = -condbb_rate(&g, &pts).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
                prop_assert!(lhs >= 0.0);
                prop_assert_eq!(lhs == 0.0, z.iter().all(|&v| v == 0.0));
            }

            #[test]
            fn adding_skeleton_points_never_lowers_rate(
                pts in prop::collection::vec((0.01f64..0.99, -2.0f64..2.0), 1..6),
                extra in (0.01f64..0.99, -2.0f64..2.0),
            ) {
                let mut uniq: Vec<(f64, f64)> = Vec::new();
                for p in pts { if uniq.iter().all(|q| q.0 != p.0) { uniq.push(p); } }
                let base = rate_i_path(&uniq, 1.0).unwrap();
                if uniq.iter().all(|q| q.0 != extra.0) {
                    uniq.push(extra);
                    prop_assert!(rate_i_path(&uniq, 1.0).unwrap() >= base);
                }
            }
        }
    }
}
