//! Closed-form laws of the maximum, the Bessel(3) marginal and the joint law
//! of `(X_v, S_v)`, together with the density and penalty types.

mod density;
mod kennedy;
mod penalty;

pub use density::{DensitySpec, Table};
pub use kennedy::{kennedy_transforms, KennedyProfile, KennedyTransforms};
pub use penalty::{fbar, fbar_numeric, phi_from_f, BivariatePenalty, FBar, Grid1, Grid2};
pub(crate) use penalty::{penalty_normalizer, SupportBox};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::special::{erf, SQRT_2_OVER_PI};

/// Density of `S_r` at `z`.
pub fn p_max(r: f64, z: f64) -> Result<f64> {
    check_time(r)?;
    Ok(if z > 0.0 { SQRT_2_OVER_PI / r.sqrt() * (-z * z / (2.0 * r)).exp() } else { 0.0 })
}

/// `P(S_r < z)`.
pub fn h_cdf(r: f64, z: f64) -> Result<f64> {
    check_time(r)?;
    if z < 0.0 || z.is_nan() {
        return domain(format!("level must be nonnegative, got {z}"));
    }
    if z == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(erf(z / (2.0 * r).sqrt()))
}

/// Joint density of `(X_v, S_v)` at `(a, y)`.
pub fn p_joint(v: f64, a: f64, y: f64) -> Result<f64> {
    check_time(v)?;
    Ok(p_joint_unchecked(v, a, y))
}

#[inline]
pub(crate) fn p_joint_unchecked(v: f64, a: f64, y: f64) -> f64 {
    if y > a.max(0.0) {
        let w = 2.0 * y - a;
        SQRT_2_OVER_PI / (v * v.sqrt()) * w * (-w * w / (2.0 * v)).exp()
    } else {
        0.0
    }
}

/// Density of a Bessel(3) process started at 0, observed at time `r`.
pub fn p_bessel3(r: f64, z: f64) -> Result<f64> {
    check_time(r)?;
    Ok(if z > 0.0 { SQRT_2_OVER_PI / (r * r.sqrt()) * z * z * (-z * z / (2.0 * r)).exp() } else { 0.0 })
}

/// Distribution function of the Bessel(3) marginal, the chi law with three
/// degrees of freedom scaled by `√r`.
pub fn bessel3_cdf(r: f64, z: f64) -> Result<f64> {
    check_time(r)?;
    if z <= 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(1.0);
    }
    let x = z / r.sqrt();
    Ok(erf(x / std::f64::consts::SQRT_2) - SQRT_2_OVER_PI * x * (-0.5 * x * x).exp())
}

/// Distribution function of the first passage time of level `y > 0`.
pub fn hitting_time_cdf(y: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        crate::special::erfc(y / (2.0 * t).sqrt())
    }
}

/// `P^μ(S_∞ > x)` for Brownian motion with negative drift `μ`.
pub fn drift_max_tail(mu: f64, x: f64) -> Result<f64> {
    if !(mu < 0.0) {
        return domain(format!("drift must be negative for a finite overall maximum, got {mu}"));
    }
    if x < 0.0 || x.is_nan() {
        return domain(format!("level must be nonnegative, got {x}"));
    }
    Ok((2.0 * mu * x).exp())
}

fn check_time(r: f64) -> Result<()> {
    if r > 0.0 {
        Ok(())
    } else {
        domain(format!("time must be positive, got {r}"))
    }
}

/// Limit-law type of the exponential penalty `e^{λS_t + μX_t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    R1,
    R2,
    R3,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::R1 => "R1",
            Regime::R2 => "R2",
            Regime::R3 => "R3",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Partition of the `(λ, μ)` plane. The inequalities are taken literally, so
/// boundary points land in exactly one region. NaN input ends up in `R3`.
pub fn classify_region(lambda: f64, mu: f64) -> Regime {
    let nu = lambda + mu;
    if nu < 0.0 && mu >= 0.0 {
        Regime::R1
    } else if lambda + 2.0 * mu >= 0.0 && nu >= 0.0 {
        Regime::R2
    } else {
        Regime::R3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, Tolerance};

    #[test]
    fn point_values() {
        assert!((p_max(1.0, 1.0).unwrap() - 0.483_941_449_0).abs() < 1e-9);
        assert_eq!(p_max(1.0, -0.5).unwrap(), 0.0);
        assert!((p_max(4.0, 0.001).unwrap() - 0.398_942).abs() < 1e-5);
        assert!((h_cdf(1.0, 1.0).unwrap() - 0.682_689_492_1).abs() < 1e-9);
        assert_eq!(h_cdf(2.0, 0.0).unwrap(), 0.0);
        assert_eq!(h_cdf(1.0, f64::INFINITY).unwrap(), 1.0);
        assert!((p_joint(1.0, 0.0, 1.0).unwrap() - 0.215_963_866_5).abs() < 1e-9);
        assert_eq!(p_joint(1.0, 2.0, 1.0).unwrap(), 0.0);
        assert!((p_bessel3(1.0, 1.0).unwrap() - 0.483_941_449_0).abs() < 1e-9);
        assert_eq!(p_bessel3(1.0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn bad_inputs_are_domain_errors() {
        assert!(p_max(0.0, 1.0).is_err());
        assert!(h_cdf(1.0, -1.0).is_err());
        assert!(p_joint(-1.0, 0.0, 1.0).is_err());
        assert!(p_bessel3(0.0, 1.0).is_err());
        assert!(drift_max_tail(0.0, 1.0).is_err());
    }

    #[test]
    fn drift_tail_values() {
        assert_eq!(drift_max_tail(-1.0, 0.0).unwrap(), 1.0);
        assert!((drift_max_tail(-1.0, std::f64::consts::LN_2 / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((drift_max_tail(-0.5, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn regions_match_examples() {
        assert_eq!(classify_region(-1.0, 0.5), Regime::R1);
        assert_eq!(classify_region(1.0, 1.0), Regime::R2);
        assert_eq!(classify_region(0.0, -1.0), Regime::R3);
        // Boundary points.
        assert_eq!(classify_region(0.0, 0.0), Regime::R2);
        assert_eq!(classify_region(-1.0, 0.0), Regime::R1);
        assert_eq!(classify_region(2.0, -1.0), Regime::R2);
    }

    #[test]
    fn bessel_cdf_integrates_density() {
        for &z in &[0.3, 1.0, 2.5] {
            let q = integrate(|x| p_bessel3(1.7, x).unwrap(), 0.0, z, Tolerance::tight()).value;
            assert!((q - bessel3_cdf(1.7, z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn max_density_marginalizes_joint() {
        let tol = Tolerance::tight();
        for &(v, y) in &[(1.0, 0.4), (2.5, 1.3), (0.3, 0.05)] {
            let m = integrate(|a| p_joint(v, a, y).unwrap(), f64::NEG_INFINITY, y, tol).value;
            assert!((m - p_max(v, y).unwrap()).abs() < 1e-8);
        }
        let total = integrate(|z| p_max(3.0, z).unwrap(), 0.0, f64::INFINITY, tol).value;
        assert!((total - 1.0).abs() < 1e-8);
        for &z in &[0.5, 2.0] {
            let h = integrate(|x| p_max(3.0, x).unwrap(), 0.0, z, tol).value;
            assert!((h - h_cdf(3.0, z).unwrap()).abs() < 1e-8);
        }
    }
}
