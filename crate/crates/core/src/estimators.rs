//! Finite-window surrogates for the upper and lower limits of Laplace and
//! small-ball rates, Monte Carlo Laplace transforms, and the Chernoff and
//! sandwich bounds that connect the two sides.
//!
//! Grids hold log-values: at desk-scale parameters the transforms themselves
//! (for example `exp(-1414)`) are below the smallest `f64`.

use serde::Serialize;

use crate::numerics::{log_add_exp, run_chunked, SeedSpec, StreamRng};
use crate::{Error, Real, Result};

/// Direction of a [`TailGrid`]'s abscissae.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridOrder {
    Increasing,
    Decreasing,
}

/// Sampled `(abscissa, log value)` pairs with strictly monotone abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct TailGrid<T> {
    points: Vec<(T, T)>,
    order: GridOrder,
}

impl<T: Real> TailGrid<T> {
    /// From probabilities or transform values in `(0, 1]`.
    pub fn from_values(points: Vec<(T, T)>) -> Result<Self> {
        let logged = points
            .into_iter()
            .map(|(x, v)| {
                if v == T::zero() {
                    Err(Error::ZeroProbability {
                        abscissa: x.as_f64(),
                    })
                } else if !(v > T::zero() && v <= T::one()) {
                    Err(Error::domain("value", v.as_f64(), "0 < value <= 1"))
                } else {
                    Ok((x, v.ln()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_log_values(logged)
    }

    /// From log-values in `(-inf, 0]`.
    pub fn from_log_values(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("tail grid"));
        }
        for &(x, lv) in &points {
            if !(x > T::zero() && x.is_finite()) {
                return Err(Error::domain("abscissa", x.as_f64(), "finite and > 0"));
            }
            if lv == T::neg_infinity() {
                return Err(Error::ZeroProbability {
                    abscissa: x.as_f64(),
                });
            }
            if !(lv <= T::zero()) {
                return Err(Error::domain("log value", lv.as_f64(), "<= 0"));
            }
        }
        let order = if points.len() < 2 || points[1].0 > points[0].0 {
            GridOrder::Increasing
        } else {
            GridOrder::Decreasing
        };
        let ok = points.windows(2).all(|w| match order {
            GridOrder::Increasing => w[1].0 > w[0].0,
            GridOrder::Decreasing => w[1].0 < w[0].0,
        });
        if !ok {
            return Err(Error::NotMonotone("monotone"));
        }
        Ok(Self { points, order })
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn order(&self) -> GridOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sup and inf of the transformed values over the trailing window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate<T> {
    pub window_sup: T,
    pub window_inf: T,
    /// `(abscissa, transformed value)` for every grid point.
    pub grid: Vec<(T, T)>,
    pub window_fraction: T,
}

fn window_estimate<T: Real>(
    transformed: Vec<(T, T)>,
    window_fraction: T,
) -> Result<RateEstimate<T>> {
    if !(window_fraction > T::zero() && window_fraction <= T::one()) {
        return Err(Error::domain(
            "window_fraction",
            window_fraction.as_f64(),
            "0 < fraction <= 1",
        ));
    }
    let n = transformed.len();
    let k = (window_fraction * T::lit(n as f64))
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .min(n);
    if k == 0 {
        return Err(Error::Empty("rate window"));
    }
    let window = &transformed[n - k..];
    let window_sup = window.iter().map(|p| p.1).fold(T::neg_infinity(), T::max);
    let window_inf = window.iter().map(|p| p.1).fold(T::infinity(), T::min);
    Ok(RateEstimate {
        window_sup,
        window_inf,
        grid: transformed,
        window_fraction,
    })
}

/// `lambda^-alpha log L(lambda)` over an increasing lambda-grid; the window
/// is the largest-lambda fraction of the points.
pub fn laplace_rate_window<T: Real>(
    grid: &TailGrid<T>,
    alpha: T,
    window_fraction: T,
) -> Result<RateEstimate<T>> {
    if grid.order() != GridOrder::Increasing {
        return Err(Error::NotMonotone("increasing"));
    }
    let transformed = grid
        .points()
        .iter()
        .map(|&(lambda, lv)| (lambda, lambda.powf(-alpha) * lv))
        .collect();
    window_estimate(transformed, window_fraction)
}

/// `eps^beta log P(X <= eps)` over a decreasing eps-grid; the window is the
/// smallest-eps fraction of the points.
pub fn smallball_rate_window<T: Real>(
    grid: &TailGrid<T>,
    beta: T,
    window_fraction: T,
) -> Result<RateEstimate<T>> {
    if grid.order() != GridOrder::Decreasing && grid.len() > 1 {
        return Err(Error::NotMonotone("decreasing"));
    }
    let transformed = grid
        .points()
        .iter()
        .map(|&(eps, lv)| (eps, eps.powf(beta) * lv))
        .collect();
    window_estimate(transformed, window_fraction)
}

/// Draws from a nonnegative distribution of total mass at most one.
pub trait NonNegativeSampler: Sync {
    /// `None` stands for the missing mass of a sub-probability law.
    fn draw(&self, rng: &mut StreamRng) -> Option<f64>;
}

impl<F> NonNegativeSampler for F
where
    F: Fn(&mut StreamRng) -> Option<f64> + Sync,
{
    fn draw(&self, rng: &mut StreamRng) -> Option<f64> {
        self(rng)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

const MC_CHUNK: usize = 4096;

/// Monte Carlo `E[exp(-lambda X)]` for each lambda, reusing one set of draws.
pub fn mc_laplace_many<S: NonNegativeSampler + ?Sized>(
    sampler: &S,
    lambdas: &[f64],
    n: usize,
    seed: SeedSpec,
    threads: Option<usize>,
) -> Result<Vec<McEstimate>> {
    if n < 2 {
        return Err(Error::domain("n", n as f64, "n >= 2"));
    }
    if let Some(&l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::domain("lambda", l, "finite and >= 0"));
    }
    let m = lambdas.len();
    let partial = run_chunked(n, MC_CHUNK, seed, threads, |range, rng| {
        let mut sums = vec![(0.0f64, 0.0f64); m];
        for _ in range {
            if let Some(x) = sampler.draw(rng) {
                for (acc, &lambda) in sums.iter_mut().zip(lambdas) {
                    let v = (-lambda * x).exp();
                    acc.0 += v;
                    acc.1 += v * v;
                }
            }
        }
        sums
    });
    let nf = n as f64;
    Ok((0..m)
        .map(|j| {
            let (s, s2) = partial
                .iter()
                .fold((0.0, 0.0), |acc, p| (acc.0 + p[j].0, acc.1 + p[j].1));
            let mean = s / nf;
            let var = ((s2 - s * mean) / (nf - 1.0)).max(0.0);
            McEstimate {
                estimate: mean,
                std_error: (var / nf).sqrt(),
            }
        })
        .collect())
}

/// Monte Carlo `E[exp(-lambda X)]`, deterministic given `seed`.
pub fn mc_laplace<S: NonNegativeSampler + ?Sized>(
    sampler: &S,
    lambda: f64,
    n: usize,
    seed: SeedSpec,
) -> Result<McEstimate> {
    Ok(mc_laplace_many(sampler, &[lambda], n, seed, None)?[0])
}

/// `min over the grid of exp(lambda eps) L(lambda)`, an upper bound on
/// `P(X <= eps)` by the exponential Markov inequality.
pub fn chernoff_smallball_bound<T: Real, L: Fn(T) -> T>(
    laplace: L,
    epsilon: T,
    lambda_grid: &[T],
) -> Result<T> {
    let log_laplace = |lambda: T| laplace(lambda).ln();
    Ok(chernoff_log_bound(log_laplace, epsilon, lambda_grid)?.exp())
}

/// Log-space form of [`chernoff_smallball_bound`]:
/// `min over the grid of lambda eps + log L(lambda)`.
pub fn chernoff_log_bound<T: Real, L: Fn(T) -> T>(
    log_laplace: L,
    epsilon: T,
    lambda_grid: &[T],
) -> Result<T> {
    if !(epsilon > T::zero()) {
        return Err(Error::domain("epsilon", epsilon.as_f64(), "> 0"));
    }
    if lambda_grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    Ok(lambda_grid
        .iter()
        .map(|&lambda| lambda * epsilon + log_laplace(lambda))
        .fold(T::infinity(), T::min))
}

/// `P(X <= eps) + exp(-lambda eps)`, an upper bound on `E[exp(-lambda X)]`.
pub fn sandwich_upper<T: Real>(cdf_at_eps: T, lambda: T, epsilon: T) -> T {
    cdf_at_eps + (-lambda * epsilon).exp()
}

/// Log-space form of [`sandwich_upper`].
pub fn sandwich_log_upper<T: Real>(log_cdf_at_eps: T, lambda: T, epsilon: T) -> T {
    log_add_exp(log_cdf_at_eps, -lambda * epsilon)
}
