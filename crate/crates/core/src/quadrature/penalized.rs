//! Finite-horizon penalized probabilities `Q_t(Γ_u)` by conditioning on `F_u`.
//!
//! Both models are evaluated as an excess over their `t → ∞` limit so the
//! `O(1/t)` (resp. `O(e^{−λ²t/2} t^{−3/2})`) correction is computed directly
//! rather than as a difference of two nearly equal numbers.

use serde::Serialize;

use super::{rect_expectation, ExpectOpts, RectEvent};
use crate::error::{domain, Result};
use crate::exact_laws::{DensitySpec, KennedyProfile};
use crate::integrate::{integrate_with_breaks, Tolerance};
use crate::martingales::{m_kennedy_raw, m_phi_raw};
use crate::special::{erf, erfcx, SQRT_PI_OVER_2};

/// One horizon of a penalized-probability series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: f64,
    /// `Q_∞(Γ)`.
    pub limit: f64,
    /// `Q_t(Γ) − Q_∞(Γ)`.
    pub excess: f64,
}

impl SeriesPoint {
    pub fn value(&self) -> f64 {
        self.limit + self.excess
    }
}

fn series_tol() -> Tolerance {
    Tolerance { abs: 1e-15, rel: 1e-10, max_intervals: 4000 }
}

/// `∫_0^d e^{−z²/2r}dz − d`, via its
/// Taylor series when `d ≪ √r`.
fn gauss_window_excess(d: f64, r: f64) -> f64 {
    let x = d / (2.0 * r).sqrt();
    if x.abs() < 0.5 {
        let x2 = x * x;
        let (mut term, mut sum) = (1.0, 0.0);
        for n in 1..40 {
            term *= -x2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        d * sum
    } else {
        SQRT_PI_OVER_2 * r.sqrt() * erf(x) - d
    }
}

/// `ĝ(a, y, r) − M^φ(a, y)`, where `√(2/(πr))·ĝ = E[φ(S_t) | X_u = a, S_u = y]`
/// and `r = t − u`.
pub fn phi_ghat_excess(a: f64, y: f64, r: f64, phi: &DensitySpec) -> f64 {
    let near = phi.pdf(y) * gauss_window_excess(y - a, r);
    let far = integrate_with_breaks(
        |v| (-(v - a).powi(2) / (2.0 * r)).exp_m1() * phi.pdf(v),
        y,
        phi.support_end(),
        &phi.breakpoints(),
        series_tol(),
    )
    .value;
    near + far
}

/// `Q_t(Γ)` for the penalty `φ(S_t)` at horizon `t > u`.
pub fn phi_series_point(phi: &DensitySpec, ev: &RectEvent, t: f64) -> Result<SeriesPoint> {
    if !(t > ev.u) {
        return domain(format!("horizon t = {t} must exceed u = {}", ev.u));
    }
    let r = t - ev.u;
    let opts = ExpectOpts { s_breaks: phi.breakpoints(), growth: 0.0, tol: series_tol() };
    let limit = rect_expectation(ev, |x, s| m_phi_raw(x, s, phi), &opts);
    let e_delta = rect_expectation(ev, |x, s| phi_ghat_excess(x, s, r, phi), &opts);
    let d00 = phi_ghat_excess(0.0, 0.0, t, phi);
    let km1 = (-0.5 * (-ev.u / t).ln_1p()).exp_m1();
    let excess = ((1.0 + km1) * e_delta + km1 * limit - limit * d00) / (1.0 + d00);
    Ok(SeriesPoint { t, limit, excess })
}

/// `1/√r − λ√(π/2)·erfcx((λr − z)/√(2r))`.
fn kennedy_b(z: f64, r: f64, lambda: f64) -> f64 {
    1.0 / r.sqrt() - lambda * SQRT_PI_OVER_2 * erfcx((lambda * r - z) / (2.0 * r).sqrt())
}

/// Transient part of `E[ψ(S_t)e^{λ(S_t − X_t)} | X_u = a, S_u = y]`.
///
/// The conditional expectation equals
/// `√(2/π)·e^{λ²r/2}·[λ√(2π)·G₀(a, y) + e^{−λ²r/2}·G₁(a, y, r)]`, where
/// `e^{−λ²u/2}G₀` is the Kennedy martingale; this returns `G₁`.
pub fn kennedy_g1s(a: f64, y: f64, r: f64, psi: &KennedyProfile) -> f64 {
    let l = psi.lambda();
    let d = y - a;
    let base = psi.base();
    let tol = series_tol();
    let near = if d > 0.0 && psi.psi(y) != 0.0 {
        let inner = integrate_with_breaks(
            |z| (l * (d - z) - z * z / (2.0 * r)).exp() * kennedy_b(z, r, l),
            0.0,
            d,
            &[],
            tol,
        )
        .value;
        psi.psi(y) * inner
    } else {
        0.0
    };
    let far = integrate_with_breaks(
        |v| psi.psi(v) * (-(v - a).powi(2) / (2.0 * r)).exp() * kennedy_b(v - a, r, l),
        y,
        base.support_end(),
        &base.breakpoints(),
        tol,
    )
    .value;
    near + far
}

/// `Q_t(Γ)` for the discounted penalty `ψ(S_t)e^{λ(S_t − X_t)}`.
///
/// The excess is returned unscaled; it decays like `e^{−λ²t/2} t^{−3/2}`.
pub fn kennedy_series_point(psi: &KennedyProfile, ev: &RectEvent, t: f64) -> Result<SeriesPoint> {
    if !(t > ev.u) {
        return domain(format!("horizon t = {t} must exceed u = {}", ev.u));
    }
    let l = psi.lambda();
    let r = t - ev.u;
    let opts = ExpectOpts { s_breaks: psi.base().breakpoints(), growth: l, tol: series_tol() };
    let limit = rect_expectation(ev, |x, s| m_kennedy_raw(x, s, ev.u, psi), &opts);
    let e_g = rect_expectation(ev, |x, s| kennedy_g1s(x, s, r, psi), &opts);
    let g00 = kennedy_g1s(0.0, 0.0, t, psi);
    let damp = (-0.5 * l * l * t).exp();
    let scaled = (e_g - limit * g00) / (l * (2.0 * std::f64::consts::PI).sqrt() + damp * g00);
    Ok(SeriesPoint { t, limit, excess: damp * scaled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingales::{f1_lambda_phi_raw, f1_phi_raw};
    use crate::exact_laws::kennedy_transforms;
    use crate::special::SQRT_2_OVER_PI;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn window_excess_branches_agree() {
        for &(d, r) in &[(0.7, 0.98), (0.71, 1.0), (1.0, 2.0)] {
            let series = gauss_window_excess(d, r);
            let direct = integrate_with_breaks(|z| (-z * z / (2.0 * r)).exp_m1(), 0.0, d, &[], Tolerance::tight()).value;
            assert!((series - direct).abs() < 1e-14, "{d} {r}");
        }
    }

    #[test]
    fn phi_conditional_expectation_matches_direct() {
        let phi = DensitySpec::uniform(1.0).unwrap();
        for &(a, y, r) in &[(0.0, 0.3, 0.5), (-0.4, 0.6, 2.0), (0.2, 1.2, 1.0)] {
            let ev = RectEvent::full(r);
            let direct = rect_expectation(&ev, |_, s| phi.pdf(y.max(a + s)), &ExpectOpts { s_breaks: vec![1.0 - a, y - a], ..ExpectOpts::default() });
            let formula = SQRT_2_OVER_PI / r.sqrt() * (m_phi_raw(a, y, &phi) + phi_ghat_excess(a, y, r, &phi));
            assert!((direct - formula).abs() < 1e-8, "{a} {y} {r}: {direct} {formula}");
        }
    }

    #[test]
    fn kennedy_conditional_expectation_matches_direct() {
        let psi = KennedyProfile::indicator(1.0, 1.0).unwrap();
        for &(a, y, r) in &[(0.0, 0.3, 0.5), (-0.4, 0.6, 1.5), (0.2, 0.9, 0.3)] {
            let l = 1.0;
            let ev = RectEvent::full(r);
            let opts = ExpectOpts { s_breaks: vec![1.0 - a, y - a], growth: l, ..ExpectOpts::default() };
            let direct = rect_expectation(&ev, |x, s| {
                let m = y.max(a + s);
                psi.psi(m) * (l * (m - a - x)).exp()
            }, &opts);
            let g0 = m_kennedy_raw(a, y, 0.0, &psi);
            let formula = SQRT_2_OVER_PI
                * (0.5 * l * l * r).exp()
                * (l * (2.0 * std::f64::consts::PI).sqrt() * g0 + (-0.5 * l * l * r).exp() * kennedy_g1s(a, y, r, &psi));
            assert!((direct - formula).abs() < 1e-7 * formula, "{a} {y} {r}: {direct} {formula}");
        }
    }

    #[test]
    fn full_space_series_is_flat() {
        let phi = DensitySpec::uniform(1.0).unwrap();
        let p = phi_series_point(&phi, &RectEvent::full(1.0), 8.0).unwrap();
        assert!((p.limit - 1.0).abs() < 1e-9 && p.excess.abs() < 1e-9, "{p:?}");
        let psi = KennedyProfile::indicator(1.0, 1.0).unwrap();
        let p = kennedy_series_point(&psi, &RectEvent::full(1.0), 4.0).unwrap();
        assert!((p.limit - 1.0).abs() < 1e-8 && p.excess.abs() < 1e-9, "{p:?}");
    }

    #[test]
    fn phi_excess_times_t_tends_to_first_coefficient() {
        let phi = DensitySpec::uniform(1.0).unwrap();
        let ev = RectEvent::new(1.0, 0.0, 0.5).unwrap();
        let opts = ExpectOpts { s_breaks: phi.breakpoints(), ..ExpectOpts::default() };
        let c1 = rect_expectation(&ev, |x, s| f1_phi_raw(x, s, 1.0, &phi), &opts);
        let p = phi_series_point(&phi, &ev, 4096.0).unwrap();
        let scaled = p.excess * 4096.0;
        assert!((scaled - c1).abs() < 0.01 * c1.abs().max(1e-3), "{scaled} vs {c1}");
    }

    #[test]
    fn kennedy_excess_tends_to_first_coefficient() {
        let psi = KennedyProfile::indicator(1.0, 1.0).unwrap();
        let k = kennedy_transforms(&psi).unwrap();
        // {S_u ≤ 1} is certain under every Q_t here, so use a smaller cap.
        let ev = RectEvent::new(1.0, INF, 0.5).unwrap();
        let opts = ExpectOpts { s_breaks: vec![1.0], growth: 1.0, ..ExpectOpts::default() };
        let c1 = rect_expectation(&ev, |x, s| f1_lambda_phi_raw(x, s, 1.0, &k), &opts);
        let t: f64 = 512.0;
        let p = kennedy_series_point(&psi, &ev, t).unwrap();
        let scaled = p.excess * (0.5 * t).exp() * t.powf(1.5);
        assert!((scaled - c1).abs() < 0.01 * c1.abs(), "{scaled} vs {c1}");
    }
}
