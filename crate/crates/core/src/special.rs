//! Scalar special functions shared across modules.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// 1/√(2π).
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Distance, in standard deviations, beyond which a Gaussian factor falls
/// below 1e-16 of its peak: √(2·ln 1e16).
pub const GAUSS_CUTOFF: f64 = 8.581_722_788_328_42;

pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail, accurate far into the tail.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function e^{x²}·erfc(x).
pub fn erfcx(x: f64) -> f64 {
    if x < 26.0 {
        if x < -26.0 {
            return f64::INFINITY;
        }
        (x * x).exp() * libm::erfc(x)
    } else {
        let r = 1.0 / (x * x);
        (1.0 - 0.5 * r * (1.0 - 1.5 * r * (1.0 - 2.5 * r))) / (x * PI.sqrt())
    }
}

/// sinh(z)/z with the removable singularity filled in.
pub fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0 * (1.0 + z2 / 72.0)))
    } else {
        z.sinh() / z
    }
}

/// ln(sinh(z)/z), finite for every real z.
pub fn ln_sinhc(z: f64) -> f64 {
    let a = z.abs();
    if a < 20.0 {
        sinhc(z).ln()
    } else {
        a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2 - a.ln()
    }
}

/// Gaussian truncated moments ∫_lo^hi x^k e^{-(x-m)²/(2σ²)} dx for k = 0, 1, 2.
pub fn gauss_moments(m: f64, sigma: f64, lo: f64, hi: f64) -> [f64; 3] {
    let zl = (lo - m) / sigma;
    let zh = (hi - m) / sigma;
    let mass = if zl > 0.0 {
        norm_sf(zl) - norm_sf(zh)
    } else {
        norm_cdf(zh) - norm_cdf(zl)
    };
    let scale = sigma * (2.0 * PI).sqrt();
    let pl = if zl.is_finite() { norm_pdf(zl) } else { 0.0 };
    let ph = if zh.is_finite() { norm_pdf(zh) } else { 0.0 };
    let zpl = if zl.is_finite() { zl * pl } else { 0.0 };
    let zph = if zh.is_finite() { zh * ph } else { 0.0 };
    // Moments of the standardized variable on [zl, zh].
    let e0 = mass;
    let e1 = pl - ph;
    let e2 = mass + zpl - zph;
    [
        scale * e0,
        scale * (m * e0 + sigma * e1),
        scale * (m * m * e0 + 2.0 * m * sigma * e1 + sigma * sigma * e2),
    ]
}

pub(crate) const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
pub(crate) const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_and_tail_agree() {
        for &x in &[-3.0, -0.5, 0.0, 0.7, 4.0] {
            assert!((norm_cdf(x) + norm_sf(x) - 1.0).abs() < 1e-15);
        }
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn erfcx_is_continuous_at_switch() {
        let a = (26.0f64 * 26.0).exp() * libm::erfc(26.0);
        let b = erfcx(26.0);
        assert!(((a - b) / a).abs() < 1e-9, "{a} {b}");
        assert!((erfcx(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sinhc_branches_meet() {
        let z = 0.999_9e-4;
        assert!((sinhc(z) - z.sinh() / z).abs() < 1e-15);
        assert!((ln_sinhc(20.0) - sinhc(20.0).ln()).abs() < 1e-12);
        assert!((ln_sinhc(-25.0) - (25.0f64.sinh() / 25.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn truncated_moments_match_full_line() {
        let [k0, k1, k2] = gauss_moments(1.5, 0.7, f64::NEG_INFINITY, f64::INFINITY);
        let full = 0.7 * (2.0 * PI).sqrt();
        assert!((k0 - full).abs() < 1e-13);
        assert!((k1 - 1.5 * full).abs() < 1e-13);
        assert!((k2 - (1.5 * 1.5 + 0.49) * full).abs() < 1e-12);
    }
}
