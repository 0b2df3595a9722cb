//! Scalar float math, routed through libm.
//!
//! `core` only provides arithmetic and comparisons for `f64`; the
//! transcendental methods live in `std`. Routing everything through libm
//! keeps the crate `no_std`-compatible and, just as importantly, makes
//! results bit-identical across the `std`/`no_std` configurations, which
//! the determinism guarantees rely on.

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Round half away from zero, like `f64::round`.
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

/// Natural log of the absolute gamma function.
#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Complementary error function; basis for the normal CDF tails.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Numerically stable softplus: ln(1 + e^x) without overflow for large x.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + ln_1p(exp(-x))
    } else {
        ln_1p(exp(x))
    }
}

/// Logistic sigmoid, the derivative of softplus.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for i in -40..=40 {
            let x = i as f64 * 0.5;
            let naive = ln(1.0 + exp(x));
            assert!(abs(softplus(x) - naive) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn softplus_survives_extremes() {
        assert!(softplus(800.0).is_finite());
        assert!(abs(softplus(800.0) - 800.0) < 1e-9);
        assert!(softplus(-800.0) >= 0.0);
        assert!(softplus(-800.0) < 1e-300);
    }

    #[test]
    fn sigmoid_is_softplus_derivative() {
        let h = 1e-6;
        for i in -10..=10 {
            let x = i as f64 * 0.7;
            let fd = (softplus(x + h) - softplus(x - h)) / (2.0 * h);
            assert!(abs(sigmoid(x) - fd) < 1e-8, "x={x}");
        }
    }
}
