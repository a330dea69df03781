//! Conjugate exponents, rate conversions and the bands relating upper and
//! lower limits of Laplace and small-ball rates.
//!
//! Throughout, `alpha` is the Laplace exponent (`lambda^alpha`) and `beta` the
//! small-ball exponent (`eps^-beta`), tied by `1/alpha = 1/beta + 1`. Rates are
//! nonpositive and finite; super-exponential decay (`-inf`) is rejected.

use crate::{Error, Real, Result};

/// Conjugate pair `(alpha, beta)` with `1/alpha = 1/beta + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair<T> {
    alpha: T,
    beta: T,
}

impl<T: Real> ExponentPair<T> {
    /// Builds a pair from both exponents, checking conjugacy.
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        check_alpha(alpha)?;
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::domain("beta", beta.as_f64(), "beta > 0"));
        }
        let lhs = alpha.recip();
        let rhs = beta.recip() + T::one();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) * lhs.max(T::one());
        if (lhs - rhs).abs() > tol {
            return Err(Error::domain("beta", beta.as_f64(), "1/alpha = 1/beta + 1"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_alpha(alpha: T) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            beta: alpha / (T::one() - alpha),
        })
    }

    pub fn from_beta(beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::domain("beta", beta.as_f64(), "beta > 0"));
        }
        Ok(Self {
            alpha: beta / (T::one() + beta),
            beta,
        })
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> T {
        self.beta
    }

    fn is_half(&self) -> bool {
        self.alpha == T::lit(0.5)
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::domain("alpha", alpha.as_f64(), "0 < alpha < 1"))
    }
}

/// Returns the pair `(alpha, alpha / (1 - alpha))`.
pub fn pair_from_alpha<T: Real>(alpha: T) -> Result<ExponentPair<T>> {
    ExponentPair::from_alpha(alpha)
}

/// A finite, nonpositive exponential rate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RateValue<T>(T);

impl<T: Real> RateValue<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_finite() && value <= T::zero() {
            Ok(Self(value))
        } else {
            Err(Error::domain("rate", value.as_f64(), "finite and <= 0"))
        }
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    /// `|rate|`.
    #[inline]
    pub fn magnitude(self) -> T {
        self.0.abs()
    }
}

/// Interval `[lower, upper]` of admissible rates, `lower <= upper <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBand<T> {
    lower: RateValue<T>,
    upper: RateValue<T>,
}

impl<T: Real> RateBand<T> {
    pub fn new(lower: RateValue<T>, upper: RateValue<T>) -> Result<Self> {
        if lower.value() <= upper.value() {
            Ok(Self { lower, upper })
        } else {
            Err(Error::domain(
                "band lower edge",
                lower.value().as_f64(),
                "lower <= upper",
            ))
        }
    }

    #[inline]
    pub fn lower(&self) -> T {
        self.lower.value()
    }

    #[inline]
    pub fn upper(&self) -> T {
        self.upper.value()
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    /// Intersection with another band, `None` when disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lower = self.lower.value().max(other.lower.value());
        let upper = self.upper.value().min(other.upper.value());
        (lower <= upper).then_some(Self {
            lower: RateValue(lower),
            upper: RateValue(upper),
        })
    }
}

/// `|x|^p` evaluated as `exp(p log|x|)`, with `0^p = 0` for `p > 0`.
#[inline]
pub(crate) fn abs_pow<T: Real>(x: T, p: T) -> T {
    let a = x.abs();
    if a == T::zero() {
        T::zero()
    } else {
        (p * a.ln()).exp()
    }
}

/// Binary entropy `H(a) = -a log a - (1-a) log(1-a)`, in `(0, log 2]`.
pub fn entropy_h<T: Real>(alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    let c = T::one() - alpha;
    Ok(-alpha * alpha.ln() - c * c.ln())
}

/// Small-ball rate `s` matching the Laplace rate `r`:
/// `s = -|alpha r|^(beta/alpha) / beta`.
pub fn s_from_r<T: Real>(r: RateValue<T>, pair: ExponentPair<T>) -> RateValue<T> {
    let r = r.value();
    if pair.is_half() {
        return RateValue(-(r * r) / T::lit(4.0));
    }
    let a = pair.alpha();
    let b = pair.beta();
    RateValue(-abs_pow(a * r, b / a) / b)
}

/// Laplace rate `r` matching the small-ball rate `s`:
/// `r = -|beta s|^(alpha/beta) / alpha`.
pub fn r_from_s<T: Real>(s: RateValue<T>, pair: ExponentPair<T>) -> RateValue<T> {
    let s = s.value();
    if pair.is_half() {
        return RateValue(-T::lit(2.0) * s.abs().sqrt());
    }
    let a = pair.alpha();
    let b = pair.beta();
    RateValue(-abs_pow(b * s, a / b) / a)
}

/// Relative residual of `|alpha r|^(1/alpha) = |beta s|^(1/beta)`.
pub fn identity_residual<T: Real>(r: RateValue<T>, s: RateValue<T>, pair: ExponentPair<T>) -> T {
    let a = pair.alpha();
    let b = pair.beta();
    let lhs = abs_pow(a * r.value(), a.recip());
    let rhs = abs_pow(b * s.value(), b.recip());
    let scale = lhs.abs().max(rhs.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Admissible lower small-ball limits for a given lower Laplace limit:
/// `|alpha r| ^(1/alpha) <= |beta s|^(1/beta) <= |e^H alpha r|^(1/alpha)`.
pub fn slower_band_from_rlower<T: Real>(
    r_lower: RateValue<T>,
    pair: ExponentPair<T>,
) -> RateBand<T> {
    let h = entropy_h(pair.alpha()).expect("pair holds a valid alpha");
    let widened = RateValue(h.exp() * r_lower.value());
    RateBand {
        lower: s_from_r(widened, pair),
        upper: s_from_r(r_lower, pair),
    }
}

/// Admissible lower Laplace limits for a given lower small-ball limit:
/// `-|beta s|^(1-alpha)/alpha <= r <= -|s|^(1-alpha)`.
pub fn rlower_band_from_slower<T: Real>(
    s_lower: RateValue<T>,
    pair: ExponentPair<T>,
) -> RateBand<T> {
    let upper = -abs_pow(s_lower.value(), T::one() - pair.alpha());
    RateBand {
        lower: r_from_s(s_lower, pair),
        upper: RateValue(upper),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rv(x: f64) -> RateValue<f64> {
        RateValue::new(x).unwrap()
    }

    #[test]
    fn pair_examples() {
        let p = pair_from_alpha(0.5).unwrap();
        assert_eq!((p.alpha(), p.beta()), (0.5, 1.0));
        let p = pair_from_alpha(2.0 / 3.0).unwrap();
        assert_relative_eq!(p.beta(), 2.0, max_relative = 1e-14);
        let p = pair_from_alpha(0.999999).unwrap();
        assert!(p.beta() > 9.9e5 && p.beta() < 1.1e6);
        let back = ExponentPair::from_beta(p.beta()).unwrap();
        assert!((back.alpha() - 0.999999f64).abs() < 1e-9);
    }

    #[test]
    fn pair_rejects_bad_input() {
        assert!(pair_from_alpha(0.0).is_err());
        assert!(pair_from_alpha(1.0).is_err());
        assert!(pair_from_alpha(f64::NAN).is_err());
        assert!(ExponentPair::new(0.5, 2.0).is_err());
        assert!(ExponentPair::new(0.5, 1.0).is_ok());
        assert!(ExponentPair::from_beta(-1.0).is_err());
    }

    #[test]
    fn rate_value_rejects_positive_and_infinite() {
        assert!(RateValue::new(0.1).is_err());
        assert!(RateValue::new(f64::NEG_INFINITY).is_err());
        assert!(RateValue::new(f64::NAN).is_err());
        assert!(RateValue::new(-3.0).is_ok());
    }

    #[test]
    fn entropy_examples() {
        assert_relative_eq!(entropy_h(0.5).unwrap(), 2f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(
            entropy_h(0.3).unwrap(),
            entropy_h(0.7).unwrap(),
            max_relative = 1e-15
        );
        let expected = 3f64.ln() - (2.0 / 3.0) * 2f64.ln();
        assert_relative_eq!(
            entropy_h(1.0 / 3.0).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert!((entropy_h(1.0f64 / 3.0).unwrap() - 0.636514).abs() < 1e-6);
        assert!(entropy_h(1.5).is_err());
    }

    #[test]
    fn entropy_concave_with_max_at_half() {
        let xs: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let hs: Vec<f64> = xs.iter().map(|&x| entropy_h(x).unwrap()).collect();
        for w in hs.windows(3) {
            assert!(w[0] + w[2] <= 2.0 * w[1] + 1e-15);
        }
        let imax = hs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(xs[imax], 0.5);
    }

    #[test]
    fn conversions_for_half() {
        let p = pair_from_alpha(0.5).unwrap();
        assert_eq!(s_from_r(rv(-2.0), p).value(), -1.0);
        assert_eq!(r_from_s(rv(-1.0), p).value(), -2.0);
        assert_eq!(s_from_r(rv(0.0), p).value(), 0.0);
        assert_eq!(r_from_s(rv(0.0), p).value(), 0.0);
        for r in [-0.1, -1.7, -12.5] {
            assert_relative_eq!(
                s_from_r(rv(r), p).value(),
                -r * r / 4.0,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn conversion_two_thirds_matches_identity() {
        let p = pair_from_alpha(2.0 / 3.0).unwrap();
        let s = s_from_r(rv(-1.0), p);
        // |alpha r|^(1/alpha) = (2/3)^(3/2); |beta s|^(1/beta) = sqrt(2|s|)
        let lhs = (2.0f64 / 3.0).powf(1.5);
        let s_oracle = -lhs * lhs / 2.0;
        assert_relative_eq!(s.value(), s_oracle, max_relative = 1e-13);
        assert!((s.value() + 4.0 / 27.0).abs() < 1e-12);
        assert!(identity_residual(rv(-1.0), s, p) < 1e-12);
    }

    #[test]
    fn round_trip_generic_alpha() {
        let p = pair_from_alpha(0.4).unwrap();
        let s = rv(-0.37);
        let back = s_from_r(r_from_s(s, p), p);
        assert_relative_eq!(back.value(), -0.37, max_relative = 1e-12);
    }

    #[test]
    fn band_from_rlower_examples() {
        let p = pair_from_alpha(0.5).unwrap();
        let band = slower_band_from_rlower(rv(-1.0), p);
        assert_relative_eq!(band.lower(), -1.0, max_relative = 1e-12);
        assert_relative_eq!(band.upper(), -0.25, max_relative = 1e-12);
        let zero = slower_band_from_rlower(rv(0.0), p);
        assert_eq!((zero.lower(), zero.upper()), (0.0, 0.0));

        let p = pair_from_alpha(2.0 / 3.0).unwrap();
        let band = slower_band_from_rlower(rv(-1.0), p);
        let (a, b) = (p.alpha(), p.beta());
        let h = -a * a.ln() - (1.0 - a) * (1.0 - a).ln();
        let lo_side = (a * 1.0f64).powf(1.0 / a);
        let hi_side = (h.exp() * a).powf(1.0 / a);
        let edge = |s: f64| (b * s.abs()).powf(1.0 / b);
        assert_relative_eq!(edge(band.upper()), lo_side, max_relative = 1e-12);
        assert_relative_eq!(edge(band.lower()), hi_side, max_relative = 1e-12);
    }

    #[test]
    fn band_from_slower_examples() {
        let p = pair_from_alpha(0.5).unwrap();
        let band = rlower_band_from_slower(rv(-1.0), p);
        assert_relative_eq!(band.lower(), -2.0, max_relative = 1e-15);
        assert_relative_eq!(band.upper(), -1.0, max_relative = 1e-15);
        let zero = rlower_band_from_slower(rv(0.0), p);
        assert_eq!((zero.lower(), zero.upper()), (0.0, 0.0));
    }

    #[test]
    fn band_edges_invert_each_other() {
        for i in 1..10 {
            let p = pair_from_alpha(i as f64 / 10.0).unwrap();
            let s = rv(-0.8);
            let rb = rlower_band_from_slower(s, p);
            assert!(rb.lower() <= rb.upper());
            // s is the widened edge of the band generated by r = rb.upper
            let sb = slower_band_from_rlower(rv(rb.upper()), p);
            assert_relative_eq!(sb.lower(), -0.8, max_relative = 1e-12);
            // and the tight edge of the band generated by r = rb.lower
            let sb = slower_band_from_rlower(rv(rb.lower()), p);
            assert_relative_eq!(sb.upper(), -0.8, max_relative = 1e-12);
        }
    }

    #[test]
    fn band_intersection() {
        let a = RateBand::new(rv(-2.0), rv(-1.0)).unwrap();
        let b = RateBand::new(rv(-1.5), rv(-0.5)).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!((c.lower(), c.upper()), (-1.5, -1.0));
        let d = RateBand::new(rv(-0.2), rv(0.0)).unwrap();
        assert!(a.intersect(&d).is_none());
        assert!(RateBand::new(rv(-1.0), rv(-2.0)).is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        let p = ExponentPair::<f32>::from_alpha(0.25).unwrap();
        let s = RateValue::new(-0.5f32).unwrap();
        let r = r_from_s(s, p);
        assert!(identity_residual(r, s, p) < 1e-5);
        assert!((s_from_r(r, p).value() + 0.5).abs() < 1e-5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn identity_holds(alpha in 0.05f64..0.95, s in -50.0f64..0.0) {
                let p = pair_from_alpha(alpha).unwrap();
                let s = rv(s);
                let r = r_from_s(s, p);
                prop_assert!(identity_residual(r, s, p) < 1e-12);
                let back = s_from_r(r, p).value();
                prop_assert!((back - s.value()).abs() <= 1e-12 * s.value().abs().max(1e-300));
            }

            #[test]
            fn conversions_monotone(alpha in 0.05f64..0.95, a in -20.0f64..0.0, b in -20.0f64..0.0) {
                let p = pair_from_alpha(alpha).unwrap();
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(r_from_s(rv(lo), p).value() <= r_from_s(rv(hi), p).value());
                prop_assert!(s_from_r(rv(lo), p).value() <= s_from_r(rv(hi), p).value());
            }
        }
    }
}
