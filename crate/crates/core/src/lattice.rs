//! The discrete distribution on `{q^n : n >= 1}` whose small-ball rate
//! oscillates between `s` and `q^beta s`.
//!
//! `P(X = q^n) = exp(-|s| q^(-beta (n-1))) - exp(-|s| q^(-beta n))` with the
//! convention `q^0 = inf`, so `P(X <= eps) = exp(-|s| eps_(n(eps)-1)^-beta)`
//! where `n(eps)` is the first index with `q^n <= eps`. Its lower small-ball
//! limit is `s`, while the lower Laplace limit can be pushed towards the
//! tight edge of the admissible band by taking `q` small.
//!
//! Note: for `eps_n = q^n` the upper small-ball limit is
//! `s * liminf (eps_n / eps_(n-1))^beta = q^beta s`. This equals `q s` only
//! when `beta = 1`; the implementation uses `q^beta s`.

use serde::Serialize;

use crate::estimators::NonNegativeSampler;
use crate::exponents::{r_from_s, rlower_band_from_slower, ExponentPair, RateBand, RateValue};
use crate::numerics::{log_add_exp, SeedSpec, StreamRng};
use crate::{Error, Real, Result};

/// Support indices beyond this are clamped when sampling.
pub const MAX_SUPPORT_INDEX: u32 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeDistribution<T> {
    q: T,
    s: T,
    beta: T,
}

/// Limits of the lattice distribution's rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeRates<T> {
    pub s_lower: T,
    pub s_upper: T,
    pub r_upper: T,
    pub r_lower_band: RateBand<T>,
}

/// Draws plus the number of draws clamped to the last support index.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSample {
    pub values: Vec<f64>,
    pub clamped: usize,
}

impl<T: Real> LatticeDistribution<T> {
    pub fn new(q: T, s: T, beta: T) -> Result<Self> {
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::domain("q", q.as_f64(), "0 < q < 1"));
        }
        if !(s < T::zero() && s.is_finite()) {
            return Err(Error::domain("s", s.as_f64(), "finite and < 0"));
        }
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::domain("beta", beta.as_f64(), "beta > 0"));
        }
        Ok(Self { q, s, beta })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Support point `eps_n = q^n`.
    #[inline]
    pub fn support(&self, n: u32) -> T {
        self.q.powi(n as i32)
    }

    /// Largest index whose support point is a normal float, capped at
    /// [`MAX_SUPPORT_INDEX`].
    pub fn max_index(&self) -> u32 {
        let limit = (T::min_positive_value().ln() / self.q.ln()).floor();
        limit
            .to_u32()
            .unwrap_or(MAX_SUPPORT_INDEX)
            .clamp(1, MAX_SUPPORT_INDEX)
    }

    /// `|s| eps_k^-beta`, with `eps_0 = inf` giving zero.
    fn scaled_inverse_power(&self, k: u32) -> T {
        if k == 0 {
            T::zero()
        } else {
            -self.s / self.support(k).powf(self.beta)
        }
    }

    /// `log P(X = q^n)`.
    pub fn log_pmf(&self, n: u32) -> Result<T> {
        if n == 0 {
            return Err(Error::domain("n", 0.0, "n >= 1"));
        }
        let head = -self.scaled_inverse_power(n - 1);
        // exponent gap |s| (eps_n^-beta - eps_(n-1)^-beta); eps_0^-beta = 0
        let gap = if n == 1 {
            self.scaled_inverse_power(1)
        } else {
            let one_minus_qb = -(self.beta * self.q.ln()).exp_m1();
            self.scaled_inverse_power(n) * one_minus_qb
        };
        Ok(head + (-(-gap).exp_m1()).ln())
    }

    pub fn pmf(&self, n: u32) -> Result<T> {
        Ok(self.log_pmf(n)?.exp())
    }

    /// `n(eps) = min { n >= 1 : q^n <= eps }`.
    pub fn support_index(&self, epsilon: T) -> Result<u32> {
        if !(epsilon > T::zero()) {
            return Err(Error::domain("epsilon", epsilon.as_f64(), "> 0"));
        }
        if epsilon >= self.q {
            return Ok(1);
        }
        let guess = (epsilon.ln() / self.q.ln())
            .ceil()
            .to_u32()
            .unwrap_or(u32::MAX / 2)
            .max(1);
        let mut n = guess.min(i32::MAX as u32 - 2);
        while self.support(n) > epsilon {
            n += 1;
        }
        while n > 1 && self.support(n - 1) <= epsilon {
            n -= 1;
        }
        Ok(n)
    }

    /// `log P(X <= eps) = -|s| eps_(n(eps)-1)^-beta`.
    pub fn log_cdf(&self, epsilon: T) -> Result<T> {
        let n = self.support_index(epsilon)?;
        Ok(-self.scaled_inverse_power(n - 1))
    }

    pub fn cdf(&self, epsilon: T) -> Result<T> {
        Ok(self.log_cdf(epsilon)?.exp())
    }

    /// `eps^beta log P(X <= eps) = -|s| (eps / eps_(n(eps)-1))^beta`.
    pub fn eps_beta_log_cdf(&self, epsilon: T) -> Result<T> {
        let n = self.support_index(epsilon)?;
        if n == 1 {
            return Ok(T::zero());
        }
        Ok(self.s * (epsilon / self.support(n - 1)).powf(self.beta))
    }

    /// `log E[exp(-lambda X)]` by summing the series in log space.
    ///
    /// The mass beyond index `N` is `exp(-|s| q^(-beta N))`, which bounds the
    /// truncated tail; summation stops once it is below `rel_tol` times the
    /// running sum.
    pub fn log_laplace(&self, lambda: T, rel_tol: T) -> Result<T> {
        if !(lambda >= T::zero() && lambda.is_finite()) {
            return Err(Error::domain("lambda", lambda.as_f64(), "finite and >= 0"));
        }
        if !(rel_tol > T::zero()) {
            return Err(Error::domain("rel_tol", rel_tol.as_f64(), "> 0"));
        }
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        let log_tol = rel_tol.ln();
        let mut acc = T::neg_infinity();
        for n in 1..=self.max_index() {
            let term = -lambda * self.support(n) + self.log_pmf(n)?;
            acc = log_add_exp(acc, term);
            let log_remaining = -self.scaled_inverse_power(n);
            if log_remaining < log_tol + acc {
                break;
            }
        }
        Ok(acc)
    }

    pub fn laplace(&self, lambda: T, rel_tol: T) -> Result<T> {
        Ok(self.log_laplace(lambda, rel_tol)?.exp())
    }

    /// Rate limits: `s_lower = s`, `s_upper = q^beta s`, `r_upper` from the
    /// upper-limit identity, and the lower Laplace limit band obtained by
    /// intersecting the general band with the explicit lattice bound
    /// `-(1 + max(q, q^beta)) |s|^(1-alpha)`.
    pub fn theoretic_rates(&self, pair: ExponentPair<T>) -> Result<LatticeRates<T>> {
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * self.beta;
        if (pair.beta() - self.beta).abs() > tol {
            return Err(Error::domain(
                "pair.beta",
                pair.beta().as_f64(),
                "equal to the distribution's beta",
            ));
        }
        let s_lower = RateValue::new(self.s)?;
        let s_upper = RateValue::new(self.q.powf(self.beta) * self.s)?;
        let r_upper = r_from_s(s_upper, pair);
        let general = rlower_band_from_slower(s_lower, pair);
        let spread = T::one() + self.q.max(self.q.powf(self.beta));
        let explicit = -spread * (-self.s).powf(T::one() - pair.alpha());
        let r_lower_band = RateBand::new(
            RateValue::new(explicit.max(general.lower()))?,
            RateValue::new(general.upper())?,
        )?;
        Ok(LatticeRates {
            s_lower: s_lower.value(),
            s_upper: s_upper.value(),
            r_upper: r_upper.value(),
            r_lower_band,
        })
    }
}

impl LatticeDistribution<f64> {
    /// Support index for a uniform draw `u` in `(0, 1]` by inverting the cdf:
    /// the largest `n` with `u <= P(X <= q^n)`.
    fn inverse_index(&self, u: f64) -> (u32, bool) {
        let w = -u.ln();
        let holds = |k: u32| w >= self.scaled_inverse_power(k);
        let n_max = self.max_index();
        let mut k = if w > -self.s {
            ((w / -self.s).ln() / (self.beta * -self.q.ln()))
                .floor()
                .max(0.0)
                .min((n_max - 1) as f64) as u32
        } else {
            0
        };
        while k + 1 < n_max && holds(k + 1) {
            k += 1;
        }
        while k > 0 && !holds(k) {
            k -= 1;
        }
        let clamped = k + 1 == n_max && holds(n_max);
        (k + 1, clamped)
    }

    pub fn sample_one(&self, rng: &mut StreamRng) -> (f64, bool) {
        let u = 1.0 - rand::Rng::random::<f64>(rng);
        let (n, clamped) = self.inverse_index(u);
        (self.support(n), clamped)
    }

    /// `n` independent draws, deterministic given `seed`.
    pub fn sample(&self, n: usize, seed: SeedSpec) -> LatticeSample {
        let mut rng = seed.rng();
        let mut clamped = 0;
        let values = (0..n)
            .map(|_| {
                let (x, c) = self.sample_one(&mut rng);
                clamped += c as usize;
                x
            })
            .collect();
        LatticeSample { values, clamped }
    }
}

impl NonNegativeSampler for LatticeDistribution<f64> {
    fn draw(&self, rng: &mut StreamRng) -> Option<f64> {
        Some(self.sample_one(rng).0)
    }
}
