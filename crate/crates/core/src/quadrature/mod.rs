//! Deterministic oracle for rectangle events `{X_u ≤ b, S_u ≤ c}`.
//!
//! Every two-dimensional integral over the joint density of `(X_u, S_u)`
//! is written in the variables `s` and `w = 2s − x`, where the density is
//! `√(2/(πu³))·w·e^{−w²/2u}`. Whenever the integrand allows it the `w`
//! integral is done in closed form, leaving a single adaptive integral.

mod penalized;

pub use penalized::{kennedy_g1s, kennedy_series_point, phi_ghat_excess, phi_series_point, SeriesPoint};

use serde::Serialize;

use crate::error::{domain, precondition, Result};
use crate::exact_laws::{p_joint_unchecked, DensitySpec};
use crate::integrate::{integrate_with_breaks, Tolerance};
use crate::martingales::m_phi_raw;
use crate::special::{erf, gauss_moments, norm_cdf, norm_sf, GAUSS_CUTOFF, INV_SQRT_2PI, SQRT_2_OVER_PI};

/// The event `{X_u ≤ b} ∩ {S_u ≤ c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RectEvent {
    pub u: f64,
    pub b: f64,
    pub c: f64,
}

impl RectEvent {
    pub fn new(u: f64, b: f64, c: f64) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return domain(format!("event time must be positive, got {u}"));
        }
        if b.is_nan() || b == f64::NEG_INFINITY {
            return domain(format!("bound on X_u must be real or +∞, got {b}"));
        }
        if !(c > 0.0) {
            return domain(format!("bound on S_u must be positive, got {c}"));
        }
        Ok(Self { u, b, c })
    }

    /// The whole space, observed at time `u`.
    pub fn full(u: f64) -> Self {
        Self { u, b: f64::INFINITY, c: f64::INFINITY }
    }

    pub fn is_full(&self) -> bool {
        self.b == f64::INFINITY && self.c == f64::INFINITY
    }

    pub fn contains(&self, x: f64, s: f64) -> bool {
        x <= self.b && s <= self.c
    }

    fn with_c(&self, c: f64) -> Self {
        Self { c, ..*self }
    }

    pub fn label(&self) -> String {
        format!("u={},b={},c={}", self.u, self.b, self.c)
    }
}

/// Options for [`rect_expectation`].
#[derive(Debug, Clone)]
pub struct ExpectOpts {
    /// Kinks of the integrand in `s`.
    pub s_breaks: Vec<f64>,
    /// Exponential growth rate of the integrand in `w`; widens the cutoff.
    pub growth: f64,
    pub tol: Tolerance,
}

impl Default for ExpectOpts {
    fn default() -> Self {
        Self { s_breaks: Vec::new(), growth: 0.0, tol: Tolerance::tight() }
    }
}

fn w_cutoff(u: f64, growth: f64) -> f64 {
    GAUSS_CUTOFF * u.sqrt() + 2.0 * growth * u
}

fn joint_const(u: f64) -> f64 {
    SQRT_2_OVER_PI / (u * u.sqrt())
}

/// `∫_{w0}^∞ w e^{−w²/2u} dw` and `∫_{w0}^∞ w² e^{−w²/2u} dw`.
fn w_moments(u: f64, w0: f64) -> (f64, f64) {
    let g = (-w0 * w0 / (2.0 * u)).exp();
    let i1 = u * g;
    let i2 = u * w0 * g + u * (2.0 * std::f64::consts::PI * u).sqrt() * norm_sf(w0 / u.sqrt());
    (i1, i2)
}

/// `E₀[1_Γ k(X_u, S_u)]` by two nested adaptive integrals.
pub fn rect_expectation<K: Fn(f64, f64) -> f64>(ev: &RectEvent, k: K, opts: &ExpectOpts) -> f64 {
    let u = ev.u;
    let cap = w_cutoff(u, opts.growth);
    let s_hi = ev.c.min(cap);
    let cst = joint_const(u);
    let mut breaks = opts.s_breaks.clone();
    breaks.push(ev.b);
    let inner_tol = Tolerance { abs: opts.tol.abs * 1e-2, rel: opts.tol.rel * 1e-1, ..opts.tol };
    integrate_with_breaks(
        |s| {
            let w0 = 2.0 * s - ev.b.min(s);
            if w0 >= cap {
                return 0.0;
            }
            integrate_with_breaks(
                |w| k(2.0 * s - w, s) * cst * w * (-w * w / (2.0 * u)).exp(),
                w0,
                cap,
                &[],
                inner_tol,
            )
            .value
        },
        0.0,
        s_hi,
        &breaks,
        opts.tol,
    )
    .value
}

/// `P₀(X_u ≤ b, S_u ≤ c)` with the `w` integral in closed form.
pub fn rect_prob(ev: &RectEvent) -> f64 {
    let u = ev.u;
    let s_hi = ev.c.min(w_cutoff(u, 0.0));
    let pre = SQRT_2_OVER_PI / u.sqrt();
    let r = integrate_with_breaks(
        |s| {
            let w0 = 2.0 * s - ev.b.min(s);
            pre * (-w0 * w0 / (2.0 * u)).exp()
        },
        0.0,
        s_hi,
        &[ev.b],
        Tolerance::tight(),
    );
    r.value.min(1.0)
}

/// Reflection-principle closed form of [`rect_prob`], used as a test oracle.
pub fn rect_prob_closed(ev: &RectEvent) -> f64 {
    let su = ev.u.sqrt();
    let b = ev.b.min(ev.c);
    if ev.c == f64::INFINITY {
        return if b == f64::INFINITY { 1.0 } else { norm_cdf(b / su) };
    }
    norm_cdf(b / su) - norm_cdf((b - 2.0 * ev.c) / su)
}

/// `∫_{−∞}^{min(b,y)} (y − a) p_joint(u, a, y) da`.
fn at_max_term(u: f64, b: f64, y: f64) -> f64 {
    let w0 = 2.0 * y - b.min(y);
    let (i1, i2) = w_moments(u, w0);
    joint_const(u) * (i2 - y * i1)
}

fn check_level(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        domain(format!("level must be positive and finite, got {y}"))
    }
}

/// `Q^{(y)}(Γ)`: the law of Brownian motion run until it hits `y`, followed
/// by `y` minus a Bessel(3) process.
pub fn q_y_limit(y: f64, ev: &RectEvent) -> Result<f64> {
    check_level(y)?;
    Ok(q_y_limit_raw(y, ev))
}

pub(crate) fn q_y_limit_raw(y: f64, ev: &RectEvent) -> f64 {
    let first = if ev.c >= y { at_max_term(ev.u, ev.b, y) } else { 0.0 };
    first + rect_prob(&ev.with_c(ev.c.min(y)))
}

/// `P₀(Γ_u | S_t = y)` for finite `t > u`.
pub fn q_y_finite(y: f64, ev: &RectEvent, t: f64) -> Result<f64> {
    check_level(y)?;
    if !(t > ev.u) {
        return domain(format!("horizon t = {t} must exceed u = {}", ev.u));
    }
    let (u, r) = (ev.u, t - ev.u);
    let tol = Tolerance::tight();
    let cap = w_cutoff(u, 0.0);
    let first = if ev.c >= y {
        let x_lo = 2.0 * y - cap;
        let x_hi = ev.b.min(y);
        if x_hi > x_lo {
            integrate_with_breaks(
                |x| p_joint_unchecked(u, x, y) * erf((y - x) / (2.0 * r).sqrt()),
                x_lo,
                x_hi,
                &[],
                tol,
            )
            .value
        } else {
            0.0
        }
    } else {
        0.0
    };
    let sig = (u * r / (u + r)).sqrt();
    let pre = joint_const(u) * SQRT_2_OVER_PI / r.sqrt();
    let s_hi = ev.c.min(y);
    let second = integrate_with_breaks(
        |s| {
            let m = (2.0 * s * r + y * u) / (u + r);
            let k = (2.0 * s - y).powi(2) / (2.0 * (u + r));
            let [k0, k1, _] = gauss_moments(0.0, sig, f64::NEG_INFINITY, ev.b.min(s) - m);
            pre * (-k).exp() * ((2.0 * s - m) * k0 - k1)
        },
        0.0,
        s_hi,
        &[ev.b],
        tol,
    )
    .value;
    let norm = SQRT_2_OVER_PI / t.sqrt() * (-y * y / (2.0 * t)).exp();
    Ok((first + second) / norm)
}

fn check_pair(a: f64, y: f64) -> Result<()> {
    if !(y > a.max(0.0)) || !y.is_finite() || !a.is_finite() {
        return domain(format!("need y > a₊, got a = {a}, y = {y}"));
    }
    Ok(())
}

/// `Q^{a,y}(Γ)`, from the density-ratio form of the bridge limit.
pub fn q_ay_limit(a: f64, y: f64, ev: &RectEvent) -> Result<f64> {
    check_pair(a, y)?;
    Ok(q_ay_limit_raw(a, y, ev))
}

fn q_ay_limit_raw(a: f64, y: f64, ev: &RectEvent) -> f64 {
    let u = ev.u;
    let q = 2.0 * y - a;
    let at_max = if ev.c >= y { (y - a) * at_max_term(u, ev.b, y) } else { 0.0 };
    let cst = joint_const(u);
    let below = integrate_with_breaks(
        |s| {
            let w0 = 2.0 * s - ev.b.min(s);
            let (i1, i2) = w_moments(u, w0);
            cst * ((q - 2.0 * s) * i1 + i2)
        },
        0.0,
        ev.c.min(y),
        &[ev.b],
        Tolerance::tight(),
    )
    .value;
    (at_max + below) / q
}

/// `Q^{a,y}(Γ)` as the mixture `[(y − a)Q^{(y)} + ∫₀^y Q^{(z)} dz]/(2y − a)`.
pub fn q_ay_limit_mixture(a: f64, y: f64, ev: &RectEvent) -> Result<f64> {
    check_pair(a, y)?;
    let mix = integrate_with_breaks(|z| q_y_limit_raw(z, ev), 0.0, y, &[ev.c, ev.b], Tolerance::tight()).value;
    Ok(((y - a) * q_y_limit_raw(y, ev) + mix) / (2.0 * y - a))
}

/// `P₀(Γ_u | X_t = a, S_t = y)` for finite `t > u`.
pub fn q_ay_finite(a: f64, y: f64, ev: &RectEvent, t: f64) -> Result<f64> {
    check_pair(a, y)?;
    if !(t > ev.u) {
        return domain(format!("horizon t = {t} must exceed u = {}", ev.u));
    }
    let (u, r) = (ev.u, t - ev.u);
    let tol = Tolerance::tight();
    let cap = w_cutoff(u, 0.0);
    let q = 2.0 * y - a;
    let first = if ev.c >= y {
        let x_lo = 2.0 * y - cap;
        let x_hi = ev.b.min(y);
        if x_hi > x_lo {
            let pre = INV_SQRT_2PI / r.sqrt();
            integrate_with_breaks(
                |x| {
                    let stay = (-(a - x).powi(2) / (2.0 * r)).exp() - (-(q - x).powi(2) / (2.0 * r)).exp();
                    p_joint_unchecked(u, x, y) * pre * stay
                },
                x_lo,
                x_hi,
                &[],
                tol,
            )
            .value
        } else {
            0.0
        }
    } else {
        0.0
    };
    let sig = (u * r / (u + r)).sqrt();
    let pre = joint_const(u) * joint_const(r);
    let second = integrate_with_breaks(
        |s| {
            let m = (2.0 * s * r + q * u) / (u + r);
            let k = (2.0 * s - q).powi(2) / (2.0 * (u + r));
            let [k0, k1, k2] = gauss_moments(0.0, sig, f64::NEG_INFINITY, ev.b.min(s) - m);
            let (pa, pb) = (2.0 * s - m, q - m);
            pre * (-k).exp() * (pa * pb * k0 - (pa + pb) * k1 + k2)
        },
        0.0,
        ev.c.min(y),
        &[ev.b],
        tol,
    )
    .value;
    Ok((first + second) / p_joint_unchecked(t, a, y))
}

fn check_first_moment(phi: &DensitySpec) -> Result<()> {
    if !phi.moment(1).is_finite() {
        return precondition("∫(1 + x)φ(x)dx diverges");
    }
    Ok(())
}

/// `Q^{a,φ}(Γ) = ∫(2y − a)φ(y) Q^{a,y}(Γ) dy / ∫(2y − a)φ(y) dy`.
pub fn q_a_phi_limit(a: f64, phi: &DensitySpec, ev: &RectEvent) -> Result<f64> {
    Ok(q_a_phi_limit_routes(a, phi, ev)?.0)
}

/// Both the bridge-mixture and the `Q^{(y)}`-mixture forms of
/// [`q_a_phi_limit`], in that order.
pub fn q_a_phi_limit_routes(a: f64, phi: &DensitySpec, ev: &RectEvent) -> Result<(f64, f64)> {
    check_first_moment(phi)?;
    if !a.is_finite() {
        return domain("bridge endpoint must be finite");
    }
    let ap = a.max(0.0);
    let den = 2.0 * phi.tail_moment(1, ap) - a * phi.tail_moment(0, ap);
    if !(den > 0.0) {
        return precondition(format!("φ puts no mass above a₊ = {ap}"));
    }
    let tol = Tolerance::new(1e-12, 1e-10);
    let mut brks = phi.breakpoints();
    brks.extend([ev.c, ev.b]);
    let hi = phi.support_end();
    let bridge = integrate_with_breaks(
        |y| if y > ap { (2.0 * y - a) * phi.pdf(y) * q_ay_limit_raw(a, y, ev) } else { 0.0 },
        ap,
        hi,
        &brks,
        tol,
    )
    .value
        / den;
    let atoms = integrate_with_breaks(|y| (y - a) * phi.pdf(y) * q_y_limit_raw(y, ev), ap, hi, &brks, tol).value;
    let mut zbrks = brks.clone();
    zbrks.push(ap);
    let spread = integrate_with_breaks(|z| phi.sf(z.max(ap)) * q_y_limit_raw(z, ev), 0.0, hi, &zbrks, tol).value;
    Ok((bridge, (atoms + spread) / den))
}

/// `Q^φ(Γ) = ∫ Q^{(y)}(Γ) φ(y) dy`.
pub fn q_phi_limit(phi: &DensitySpec, ev: &RectEvent) -> f64 {
    let mut brks = phi.breakpoints();
    brks.extend([ev.c, ev.b]);
    integrate_with_breaks(|y| q_y_limit_raw(y, ev) * phi.pdf(y), 0.0, phi.support_end(), &brks, Tolerance::tight())
        .value
}

/// `E₀[1_Γ M^φ_u]`, the martingale side of [`q_phi_limit`].
pub fn q_phi_limit_direct(phi: &DensitySpec, ev: &RectEvent) -> f64 {
    let opts = ExpectOpts { s_breaks: phi.breakpoints(), ..ExpectOpts::default() };
    rect_expectation(ev, |x, s| m_phi_raw(x, s, phi), &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_laws::{h_cdf, p_max};
    use crate::integrate::integrate;

    fn ev(u: f64, b: f64, c: f64) -> RectEvent {
        RectEvent::new(u, b, c).unwrap()
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn rect_prob_examples_and_closed_form() {
        assert!((rect_prob(&ev(1.0, INF, 1.0)) - h_cdf(1.0, 1.0).unwrap()).abs() < 1e-12);
        assert!((rect_prob(&RectEvent::full(1.0)) - 1.0).abs() < 1e-12);
        assert!((rect_prob(&ev(1.0, 0.0, INF)) - 0.5).abs() < 1e-12);
        for &(u, b, c) in &[(1.0, 0.0, 0.5), (2.0, -0.3, 1.0), (0.5, 0.4, 0.2), (3.0, 1.0, INF)] {
            let e = ev(u, b, c);
            assert!((rect_prob(&e) - rect_prob_closed(&e)).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn rect_expectation_of_one() {
        let e = ev(1.5, 0.2, 0.9);
        let v = rect_expectation(&e, |_, _| 1.0, &ExpectOpts::default());
        assert!((v - rect_prob_closed(&e)).abs() < 1e-11);
    }

    #[test]
    fn full_space_mass_is_one() {
        let full = RectEvent::full(1.0);
        for &y in &[0.2, 1.0, 3.0] {
            assert!((q_y_limit(y, &full).unwrap() - 1.0).abs() < 1e-10);
            for &t in &[1.5, 10.0, 500.0] {
                assert!((q_y_finite(y, &full, t).unwrap() - 1.0).abs() < 1e-9, "y={y} t={t}");
            }
        }
        for &(a, y) in &[(0.0, 1.0), (-1.0, 0.5), (0.7, 1.0)] {
            assert!((q_ay_limit(a, y, &full).unwrap() - 1.0).abs() < 1e-10);
            assert!((q_ay_limit_mixture(a, y, &full).unwrap() - 1.0).abs() < 1e-9);
            for &t in &[2.0, 40.0] {
                assert!((q_ay_finite(a, y, &full, t).unwrap() - 1.0).abs() < 1e-9, "a={a} y={y} t={t}");
            }
        }
        let u1 = DensitySpec::uniform(1.0).unwrap();
        assert!((q_phi_limit(&u1, &full) - 1.0).abs() < 1e-10);
        let (r1, r2) = q_a_phi_limit_routes(0.0, &u1, &full).unwrap();
        assert!((r1 - 1.0).abs() < 1e-9 && (r2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn q_y_drops_first_term_below_level() {
        let e = ev(1.0, INF, 0.5);
        assert!((q_y_limit(1.0, &e).unwrap() - rect_prob(&e)).abs() < 1e-15);
    }

    #[test]
    fn at_max_term_matches_quadrature() {
        for &(u, b, y) in &[(1.0, 0.0, 1.0), (2.0, INF, 0.7), (0.5, -0.2, 0.3)] {
            let num = integrate(|a| (y - a) * p_joint_unchecked(u, a, y), f64::NEG_INFINITY, f64::min(b, y), Tolerance::tight())
                .value;
            assert!((num - at_max_term(u, b, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_routes_agree() {
        for e in [ev(1.0, 0.0, 0.5), ev(1.0, 0.3, 2.0), ev(2.0, -0.5, INF)] {
            for &(a, y) in &[(0.0, 1.0), (-0.8, 0.6), (0.9, 1.0)] {
                let r1 = q_ay_limit(a, y, &e).unwrap();
                let r2 = q_ay_limit_mixture(a, y, &e).unwrap();
                assert!((r1 - r2).abs() < 1e-9, "{e:?} a={a} y={y}: {r1} {r2}");
            }
        }
    }

    #[test]
    fn bridge_boundary_a_equals_y() {
        let e = ev(1.0, 0.0, 0.5);
        let y = 1.0;
        let mix = integrate_with_breaks(|z| q_y_limit_raw(z, &e), 0.0, y, &[0.5, 0.0], Tolerance::tight()).value / y;
        assert!((q_ay_limit_mixture(y - 1e-12, y, &e).unwrap() - mix).abs() < 1e-9);
    }

    #[test]
    fn phi_routes_agree() {
        let phis = [DensitySpec::uniform(1.0).unwrap(), DensitySpec::exponential(1.0).unwrap()];
        for phi in &phis {
            for e in [ev(1.0, 0.0, 0.5), ev(1.0, INF, 1.0), ev(2.0, 0.5, 1.5)] {
                let a = q_phi_limit(phi, &e);
                let b = q_phi_limit_direct(phi, &e);
                assert!((a - b).abs() < 1e-9, "{phi:?} {e:?}: {a} {b}");
                let (r1, r2) = q_a_phi_limit_routes(0.0, phi, &e).unwrap();
                assert!((r1 - r2).abs() < 1e-8, "{r1} {r2}");
            }
        }
    }

    #[test]
    fn a_phi_at_zero_is_phi_law() {
        // With a = 0 the weights (2y)φ(y) tilt the Q^{0,y} mixture back into Q^φ.
        let u1 = DensitySpec::uniform(1.0).unwrap();
        let e = ev(1.0, 0.0, 0.5);
        let den = 2.0 * u1.tail_moment(1, 0.0);
        assert!((den - 1.0).abs() < 1e-15);
        let (r1, _) = q_a_phi_limit_routes(0.0, &u1, &e).unwrap();
        assert!((r1 - q_phi_limit(&u1, &e)).abs() < 1e-8);
    }

    #[test]
    fn uniform_phi_is_averaged_q_z() {
        let e = ev(1.0, 0.0, 0.5);
        let y0 = 0.8;
        let phi = DensitySpec::uniform(y0).unwrap();
        let avg = integrate_with_breaks(|z| q_y_limit_raw(z, &e), 0.0, y0, &[0.5, 0.0], Tolerance::tight()).value / y0;
        assert!((q_phi_limit(&phi, &e) - avg).abs() < 1e-12);
    }

    #[test]
    fn tower_property_recovers_rect_prob() {
        let e = ev(1.0, 0.0, 0.5);
        for &t in &[2.0f64, 8.0] {
            let v = integrate_with_breaks(
                |y| if y > 0.0 { q_y_finite(y, &e, t).unwrap() * p_max(t, y).unwrap() } else { 0.0 },
                0.0,
                GAUSS_CUTOFF * t.sqrt(),
                &[0.5],
                Tolerance::new(1e-12, 1e-10),
            )
            .value;
            assert!((v - rect_prob(&e)).abs() < 1e-6, "t={t}: {v}");
        }
    }

    #[test]
    fn bridge_baseline_is_wiener() {
        // P(Γ | X_t = a) = ∫ q_ay_finite p_joint(t,a,y) dy / p_X(t, a); for
        // Γ = {X_u ≤ b} the finite-t answer is a Gaussian bridge probability.
        let e = ev(1.0, 0.2, INF);
        let a = 0.3;
        for &t in &[3.0f64, 50.0, 2000.0] {
            let num = integrate(
                |y| if y > a { q_ay_finite(a, y, &e, t).unwrap() * p_joint_unchecked(t, a, y) } else { 0.0 },
                a,
                a + GAUSS_CUTOFF * t.sqrt(),
                Tolerance::new(1e-13, 1e-10),
            )
            .value;
            let px = INV_SQRT_2PI / t.sqrt() * (-a * a / (2.0 * t)).exp();
            let bridge = norm_cdf((0.2 - a * 1.0 / t) / (1.0 * (t - 1.0) / t).sqrt());
            assert!((num / px - bridge).abs() < 1e-7, "t={t}: {} vs {bridge}", num / px);
        }
        assert!((norm_cdf((0.2 - 0.3 / 2000.0) / (1999.0f64 / 2000.0).sqrt()) - rect_prob(&e)).abs() < 1e-3);
    }

    #[test]
    fn finite_t_approaches_limit() {
        let e = ev(1.0, 0.0, 0.5);
        let lim = q_y_limit(1.0, &e).unwrap();
        let mut prev = f64::INFINITY;
        for &t in &[4.0, 16.0, 64.0, 256.0, 1024.0] {
            let d = (q_y_finite(1.0, &e, t).unwrap() - lim).abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-3);
        let lim = q_ay_limit(0.0, 1.0, &e).unwrap();
        let mut prev = f64::INFINITY;
        for &t in &[4.0, 16.0, 64.0, 256.0] {
            let d = (q_ay_finite(0.0, 1.0, &e, t).unwrap() - lim).abs();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn short_horizon_conditioning_forces_max() {
        let e = ev(1.0, INF, 0.5);
        assert!(q_y_finite(1.0, &e, 1.0 + 1e-6).unwrap() < 1e-10);
    }

    #[test]
    fn continuity_in_bridge_endpoint() {
        let e = ev(1.0, 0.0, 0.5);
        let base = q_ay_finite(0.0, 1.0, &e, 16.0).unwrap();
        let da = q_ay_finite(1e-4, 1.0, &e, 16.0).unwrap();
        let dy = q_ay_finite(0.0, 1.0 + 1e-4, &e, 16.0).unwrap();
        assert!((da - base).abs() < 1e-3 && (dy - base).abs() < 1e-3);
    }

    #[test]
    fn monotone_in_bounds() {
        let mut prev = 0.0;
        for &b in &[-1.0, -0.2, 0.0, 0.4, 1.0] {
            let v = q_y_limit(1.0, &ev(1.0, b, 0.7)).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
        let mut prev = 0.0;
        for &c in &[0.2, 0.5, 0.99, 1.0, 1.5] {
            let v = q_ay_limit(0.0, 1.0, &ev(1.0, 0.0, c)).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn domain_errors() {
        assert!(RectEvent::new(0.0, 1.0, 1.0).is_err());
        assert!(RectEvent::new(1.0, 1.0, 0.0).is_err());
        assert!(q_y_limit(0.0, &RectEvent::full(1.0)).is_err());
        assert!(q_y_finite(1.0, &RectEvent::full(1.0), 1.0).is_err());
        assert!(q_ay_limit(1.0, 1.0, &RectEvent::full(1.0)).is_err());
    }
}
