//! Standard normal distribution helpers.
//!
//! The jump-integral blocks multiply huge exponentials by tiny tail
//! probabilities. [`tilted_tail`] evaluates those products through the scaled
//! complementary error function so that neither factor is formed on its own.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Low part of `1/√2`: `FRAC_1_SQRT_2 + FRAC_1_SQRT_2_LO` is exact to ~1e-33.
const FRAC_1_SQRT_2_LO: f64 = -4.833_646_656_726_457e-17;

/// Standard normal cumulative distribution function.
///
/// In the lower tail the rounding of `x/√2` would cost `x²·ε` relative
/// accuracy; the lost low part is fed back through `d ln erfc(z)/dz ≈ −2z`.
#[inline]
pub fn cdf(x: f64) -> f64 {
    let z = -x * FRAC_1_SQRT_2;
    let value = 0.5 * libm::erfc(z);
    if z > 1.0 {
        let lo = libm::fma(-x, FRAC_1_SQRT_2, -z) - x * FRAC_1_SQRT_2_LO;
        value * (1.0 - 2.0 * z * lo)
    } else {
        value
    }
}

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 * exp_sq(x) - erfcx(-x);
    }
    if x < 26.0 {
        return exp_sq(x) * libm::erfc(x);
    }
    // Asymptotic series; at x >= 26 the terms fall below 1e-17 by n = 8.
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..10 {
        term *= -((2 * n - 1) as f64) * inv2x2;
        sum += term;
    }
    sum / (x * libm::sqrt(PI))
}

/// `exp(x²)` with the rounding error of `x²` carried separately.
#[inline]
fn exp_sq(x: f64) -> f64 {
    let hi = x * x;
    let lo = libm::fma(x, x, -hi);
    libm::exp(hi) * (1.0 + lo)
}

/// `exp(x²/2)·N(−x)`, the normal tail scaled by the inverse density kernel.
#[inline]
pub fn scaled_tail(x: f64) -> f64 {
    0.5 * erfcx(x * FRAC_1_SQRT_2)
}

/// `exp(a·b + b²/2)·N(−a − b)`.
///
/// Every exponential-tilted term of the jump integrals has this shape. For
/// `a + b > 0` it is rewritten as `exp(−a²/2)·exp((a+b)²/2)·N(−(a+b))`, which
/// stays finite however large `b` grows.
#[inline]
pub fn tilted_tail(a: f64, b: f64) -> f64 {
    let x = a + b;
    if x > 0.0 {
        libm::exp(-0.5 * a * a) * scaled_tail(x)
    } else {
        libm::exp(a * b + 0.5 * b * b) * cdf(-x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        // Values from a 30-digit evaluation.
        let cases = [
            (0.0, 0.5),
            (1.0, 0.841_344_746_068_542_9),
            (-1.96, 0.024_997_895_148_220_435),
            (-8.0, 6.220_960_574_271_785e-16),
            (-20.0, 2.753_624_118_606_233_6e-89),
        ];
        for (x, want) in cases {
            let got = cdf(x);
            assert!(((got - want) / want).abs() < 1e-14, "cdf({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn erfcx_matches_direct_form_and_asymptotics() {
        for &x in &[0.0, 0.3, 1.0, 5.0, 12.0, 25.9] {
            let direct = libm::exp(x * x) * libm::erfc(x);
            assert!(((erfcx(x) - direct) / direct).abs() < 1e-12, "x = {x}");
        }
        // Both sides of the series switch against 40-digit values.
        for (x, want) in [(26.0 - 1e-9, 0.021_683_584_851_395_66), (26.0, 0.021_683_584_850_562_907)] {
            assert!(((erfcx(x) - want) / want).abs() < 1e-14, "x = {x}");
        }
        // erfcx(x) ~ 1/(x sqrt(pi)) for large x.
        let x = 1e8;
        assert!((erfcx(x) * x * libm::sqrt(PI) - 1.0).abs() < 1e-15);
        // Negative arguments use the reflection identity.
        let x = -1.5;
        let direct = libm::exp(x * x) * libm::erfc(x);
        assert!(((erfcx(x) - direct) / direct).abs() < 1e-13);
    }

    #[test]
    fn tilted_tail_agrees_with_naive_product_where_both_are_finite() {
        for &(a, b) in &[(0.2, 1.0), (-1.0, 3.0), (2.5, 0.7), (-4.0, 1.0), (0.15, 10.0)] {
            let naive = libm::exp(a * b + 0.5 * b * b) * cdf(-a - b);
            let got = tilted_tail(a, b);
            assert!(((got - naive) / naive).abs() < 1e-12, "a={a} b={b}: {got} vs {naive}");
        }
    }

    #[test]
    fn tilted_tail_survives_huge_tilts() {
        // b = 1e5 would overflow exp(b²/2); the product tends to exp(-a²/2)/(b·sqrt(2π)).
        let (a, b) = (0.25, 1e5);
        let want = libm::exp(-0.5 * a * a) * FRAC_1_SQRT_2PI / (a + b);
        let got = tilted_tail(a, b);
        assert!(got.is_finite());
        assert!(((got - want) / want).abs() < 1e-9);
    }
}
