//! Shared numerical machinery: log-space accumulation and quadrature,
//! unimodal minimization, geometric grids and reproducible random streams.

use std::ops::Range;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Real, Result};

/// `log(sum(exp(v)))` evaluated as `m + log(sum(exp(v - m)))`.
pub fn log_sum_exp<T: Real>(values: &[T]) -> Result<T> {
    let m = values
        .iter()
        .copied()
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(Error::Empty("log_sum_exp input"))?;
    if m == T::neg_infinity() || m == T::infinity() {
        return Ok(m);
    }
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + (v - m).exp());
    Ok(m + sum.ln())
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == T::neg_infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Minimizer and minimum of `v -> c v^-beta + v` over `v > 0`.
///
/// Closed form: `v* = (beta c)^(1/(beta+1))`,
/// `min = c^(1/(beta+1)) beta^(-beta/(beta+1)) (1 + beta)`.
pub fn minimize_power_sum<T: Real>(c: T, beta: T) -> Result<(T, T)> {
    check_power_sum(c, beta)?;
    let e = (beta + T::one()).recip();
    let argmin = (beta * c).powf(e);
    let min = c.powf(e) * beta.powf(-beta * e) * (T::one() + beta);
    Ok((argmin, min))
}

/// Golden-section evaluation of the same minimization, independent of the
/// closed form: a coarse scan in `log v` brackets the minimum, then the
/// bracket is narrowed by golden sections.
pub fn minimize_power_sum_golden<T: Real>(c: T, beta: T) -> Result<(T, T)> {
    check_power_sum(c, beta)?;
    let g = |u: T| {
        let v = u.exp();
        c * (-beta * u).exp() + v
    };
    let step = T::lit(0.25);
    let lo = T::lit(-60.0);
    let n = 481;
    let mut best = (0usize, T::infinity());
    for i in 0..n {
        let u = lo + step * T::lit(i as f64);
        let val = g(u);
        if val < best.1 {
            best = (i, val);
        }
    }
    let a = lo + step * T::lit(best.0.saturating_sub(1) as f64);
    let b = lo + step * T::lit((best.0 + 1).min(n - 1) as f64);
    let (u, val) = golden_section_min(g, a, b, T::epsilon().sqrt() * T::lit(1e-2));
    Ok((u.exp(), val))
}

fn check_power_sum<T: Real>(c: T, beta: T) -> Result<()> {
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::domain("c", c.as_f64(), "c > 0"));
    }
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(Error::domain("beta", beta.as_f64(), "beta > 0"));
    }
    Ok(())
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section_min<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let invphi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `n` points from `lo` to `hi` (inclusive) equally spaced in `log`.
/// Descending when `lo > hi`.
pub fn geometric_grid<T: Real>(lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    if !(lo > T::zero() && hi > T::zero() && lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(
            "grid endpoint",
            lo.min(hi).as_f64(),
            "finite and > 0",
        ));
    }
    if n < 2 {
        return Ok(vec![lo]);
    }
    let (la, lb) = (lo.ln(), hi.ln());
    let den = T::lit((n - 1) as f64);
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (la + (lb - la) * T::lit(i as f64) / den).exp()
            }
        })
        .collect())
}

/// Tolerances for [`integrate_1d`].
///
/// Both tolerances bound the error of the returned *log*-value, which is
/// the relative error of the integral: refinement stops once the estimated
/// relative error is below `max(abs_tol, rel_tol * |log I|)`.
/// `truncation_log_tol` sets where unbounded domains are cut: the integrand's
/// log-value must fall below its running maximum plus this (negative) amount.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_depth: usize,
    pub truncation_log_tol: T,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-12),
            max_depth: 50,
            truncation_log_tol: T::lit(-40.0),
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) {
            return Err(Error::domain("abs_tol", self.abs_tol.as_f64(), "> 0"));
        }
        if !(self.rel_tol > T::zero()) {
            return Err(Error::domain("rel_tol", self.rel_tol.as_f64(), "> 0"));
        }
        if self.max_depth < 1 {
            return Err(Error::domain("max_depth", self.max_depth as f64, ">= 1"));
        }
        if !(self.truncation_log_tol < T::zero()) {
            return Err(Error::domain(
                "truncation_log_tol",
                self.truncation_log_tol.as_f64(),
                "< 0",
            ));
        }
        Ok(())
    }
}

const PANEL_ORDER: usize = 15;
const INITIAL_PANELS: usize = 8;
const MAX_PANELS: usize = 20_000;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64); PANEL_ORDER] {
    static RULE: OnceLock<[(f64, f64); PANEL_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = PANEL_ORDER;
        let mut rule = [(0.0, 0.0); PANEL_ORDER];
        for (i, node) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *node = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

fn panel_log_estimate<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let log_half = half.ln();
    let mut terms = [T::neg_infinity(); PANEL_ORDER];
    for (t, &(x, w)) in terms.iter_mut().zip(gauss_legendre().iter()) {
        *t = f(mid + half * T::lit(x)) + T::lit(w).ln() + log_half;
    }
    log_sum_exp(&terms).expect("fixed-size rule")
}

struct Panel<T> {
    a: T,
    b: T,
    left: T,
    right: T,
    est: T,
    err: T,
    depth: usize,
}

impl<T: Real> Panel<T> {
    fn build<F: Fn(T) -> T>(f: &F, a: T, b: T, whole: T, depth: usize) -> Self {
        let m = (a + b) / T::lit(2.0);
        let left = panel_log_estimate(f, a, m);
        let right = panel_log_estimate(f, m, b);
        let est = log_add_exp(left, right);
        let err = if est == T::neg_infinity() {
            if whole == T::neg_infinity() {
                T::neg_infinity()
            } else {
                whole
            }
        } else {
            est + (whole - est).exp_m1().abs().ln()
        };
        Self {
            a,
            b,
            left,
            right,
            est,
            err,
            depth,
        }
    }
}

/// `log` of the integral of `exp(log_f)` over `[lower, upper]`.
///
/// Adaptive bisection of order-15 Gauss-Legendre panels, all in log space.
/// Infinite endpoints are truncated by an outward doubling search from the
/// finite endpoint (or 0) with unit initial step; see [`integrate_1d_hinted`]
/// to supply a location and scale for sharply peaked integrands.
pub fn integrate_1d<T: Real, F: Fn(T) -> T>(
    log_f: F,
    lower: T,
    upper: T,
    config: &QuadratureConfig<T>,
) -> Result<T> {
    let anchor = if lower.is_finite() {
        lower
    } else if upper.is_finite() {
        upper
    } else {
        T::zero()
    };
    integrate_1d_hinted(log_f, lower, upper, anchor, T::one(), config)
}

/// [`integrate_1d`] with a hint: `anchor` near the bulk of the integrand and
/// `scale` its approximate width. Only used to truncate infinite endpoints.
///
/// The integrand is assumed unimodal beyond the anchor on unbounded sides
/// (true for the log-concave kernel chains in [`crate::brownian`]).
pub fn integrate_1d_hinted<T: Real, F: Fn(T) -> T>(
    log_f: F,
    lower: T,
    upper: T,
    anchor: T,
    scale: T,
    config: &QuadratureConfig<T>,
) -> Result<T> {
    config.validate()?;
    if lower.is_nan() || upper.is_nan() || !(lower < upper) {
        return Err(Error::domain("lower", lower.as_f64(), "lower < upper"));
    }
    let anchor = anchor.max(lower).min(upper);
    let scale = if scale > T::zero() && scale.is_finite() {
        scale
    } else {
        T::one()
    };
    let a = if lower.is_finite() {
        lower
    } else {
        truncation_point(&log_f, anchor, -T::one(), scale, config.truncation_log_tol)?
    };
    let b = if upper.is_finite() {
        upper
    } else {
        truncation_point(&log_f, anchor, T::one(), scale, config.truncation_log_tol)?
    };
    if a == b {
        return Ok(T::neg_infinity());
    }
    adaptive(&log_f, a, b, config)
}

fn truncation_point<T: Real, F: Fn(T) -> T>(
    log_f: &F,
    anchor: T,
    dir: T,
    scale: T,
    tol: T,
) -> Result<T> {
    let mut fmax = log_f(anchor);
    let mut prev = fmax;
    let mut step = scale;
    for _ in 0..2000 {
        let x = anchor + dir * step;
        let v = log_f(x);
        if v.is_nan() {
            break;
        }
        if v > fmax {
            fmax = v;
        }
        if v <= prev && (v == T::neg_infinity() || v < fmax + tol) {
            return Ok(x);
        }
        prev = v;
        step = step * T::lit(1.5);
        if !step.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        depth: 0,
        estimated_error: f64::INFINITY,
    })
}

fn adaptive<T: Real, F: Fn(T) -> T>(
    log_f: &F,
    a: T,
    b: T,
    config: &QuadratureConfig<T>,
) -> Result<T> {
    let width = (b - a) / T::lit(INITIAL_PANELS as f64);
    let mut panels: Vec<Panel<T>> = (0..INITIAL_PANELS)
        .map(|i| {
            let pa = a + width * T::lit(i as f64);
            let pb = if i + 1 == INITIAL_PANELS {
                b
            } else {
                a + width * T::lit((i + 1) as f64)
            };
            let whole = panel_log_estimate(log_f, pa, pb);
            Panel::build(log_f, pa, pb, whole, 1)
        })
        .collect();

    loop {
        let ests: Vec<T> = panels.iter().map(|p| p.est).collect();
        let errs: Vec<T> = panels.iter().map(|p| p.err).collect();
        let total = log_sum_exp(&ests)?;
        if total == T::neg_infinity() {
            return Ok(total);
        }
        let total_err = log_sum_exp(&errs)?;
        let rel_err = (total_err - total).exp();
        let target = config.abs_tol.max(config.rel_tol * total.abs());
        if rel_err <= target {
            return Ok(total);
        }
        let (worst, _) =
            panels
                .iter()
                .enumerate()
                .fold((0usize, T::neg_infinity()), |acc, (i, p)| {
                    if p.err > acc.1 {
                        (i, p.err)
                    } else {
                        acc
                    }
                });
        let p = panels.swap_remove(worst);
        if p.depth >= config.max_depth || panels.len() >= MAX_PANELS {
            return Err(Error::NonConvergence {
                depth: p.depth,
                estimated_error: rel_err.as_f64(),
            });
        }
        let m = (p.a + p.b) / T::lit(2.0);
        panels.push(Panel::build(log_f, p.a, m, p.left, p.depth + 1));
        panels.push(Panel::build(log_f, m, p.b, p.right, p.depth + 1));
    }
}

/// Root seed plus stream index. Equal specs give identical sequences;
/// distinct stream indices give independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct SeedSpec {
    pub root_seed: u64,
    pub stream_index: u64,
}

/// Random stream type handed out by [`SeedSpec::rng`].
pub type StreamRng = ChaCha8Rng;

impl SeedSpec {
    pub fn new(root_seed: u64, stream_index: u64) -> Self {
        Self {
            root_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Deterministic sub-stream `k` of this stream.
    pub fn child(&self, k: u64) -> Self {
        Self {
            root_seed: self.root_seed,
            stream_index: splitmix64(self.stream_index ^ splitmix64(k.wrapping_add(1))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splits `0..n` into fixed chunks, runs `work` on each with the chunk's own
/// sub-stream of `seed`, and returns the results in chunk order. The output
/// does not depend on the number of worker threads.
pub fn run_chunked<A, W>(
    n: usize,
    chunk: usize,
    seed: SeedSpec,
    threads: Option<usize>,
    work: W,
) -> Vec<A>
where
    A: Send,
    W: Fn(Range<usize>, &mut StreamRng) -> A + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let job = || {
        (0..n_chunks)
            .into_par_iter()
            .map(|k| {
                let range = k * chunk..((k + 1) * chunk).min(n);
                let mut rng = seed.child(k as u64).rng();
                work(range, &mut rng)
            })
            .collect::<Vec<A>>()
    };
    match threads {
        Some(t) if t > 0 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        _ => job(),
    }
}
