//! Weight martingales and first-order expansion coefficients evaluated at a
//! path state `(X_u, S_u, u)`.

use serde::Serialize;

use crate::error::{domain, precondition, Error, Result};
use crate::exact_laws::{
    classify_region, penalty_normalizer, BivariatePenalty, DensitySpec, KennedyProfile, KennedyTransforms, Regime,
};
use crate::integrate::{integrate_with_breaks, Tolerance};
use crate::special::{ln_sinhc, sinhc};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Position, running maximum and elapsed time of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathState {
    pub x: f64,
    pub s: f64,
    pub u: f64,
}

impl PathState {
    pub fn new(x: f64, s: f64, u: f64) -> Result<Self> {
        let st = Self { x, s, u };
        st.validate()?;
        Ok(st)
    }

    pub const fn origin() -> Self {
        Self { x: 0.0, s: 0.0, u: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s >= self.x && self.s >= 0.0 && self.u >= 0.0) || !self.x.is_finite() || !self.s.is_finite() {
            return domain(format!("invalid path state (x={}, s={}, u={})", self.x, self.s, self.u));
        }
        Ok(())
    }
}

/// `M^φ = φ(S)(S − X) + 1 − Φ(S)`.
pub fn m_phi(state: PathState, phi: &DensitySpec) -> Result<f64> {
    state.validate()?;
    Ok(m_phi_raw(state.x, state.s, phi))
}

#[inline]
pub(crate) fn m_phi_raw(x: f64, s: f64, phi: &DensitySpec) -> f64 {
    phi.pdf(s) * (s - x) + phi.sf(s)
}

/// The exponential-penalty limit martingale, one formula per regime.
pub fn m_mu_lambda(state: PathState, lambda: f64, mu: f64) -> Result<f64> {
    state.validate()?;
    Ok(ln_m_mu_lambda(state.x, state.s, state.u, lambda, mu).exp())
}

/// Logarithm of [`m_mu_lambda`], finite where the value would overflow.
pub(crate) fn ln_m_mu_lambda(x: f64, s: f64, u: f64, lambda: f64, mu: f64) -> f64 {
    let nu = lambda + mu;
    match classify_region(lambda, mu) {
        Regime::R1 => nu * s + (1.0 - nu * (s - x)).ln(),
        Regime::R2 => nu * x - 0.5 * nu * nu * u,
        Regime::R3 => {
            let pre = nu * s - 0.5 * mu * mu * u;
            let d = mu * (s - x);
            if d.abs() <= 30.0 {
                pre + (d.cosh() - nu * (s - x) * sinhc(d)).ln()
            } else {
                let a = d.abs();
                let e = (-2.0 * a).exp();
                let k = nu / mu;
                let bracket = (1.0 + e) - d.signum() * k * (1.0 - e);
                pre + a - std::f64::consts::LN_2 + bracket.ln()
            }
        }
    }
}

/// Kennedy martingale for a normalized profile `ψ`.
pub fn m_kennedy(state: PathState, psi: &KennedyProfile) -> Result<f64> {
    state.validate()?;
    Ok(m_kennedy_raw(state.x, state.s, state.u, psi))
}

#[inline]
pub(crate) fn m_kennedy_raw(x: f64, s: f64, u: f64, psi: &KennedyProfile) -> f64 {
    let l = psi.lambda();
    let d = s - x;
    let core = psi.psi(s) * d * sinhc(l * d) + (-l * d).exp() * psi.scaled_tail(s);
    core * (-0.5 * l * l * u).exp()
}

/// Which form the Bessel(3) limit martingale takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BarBranch {
    /// `λ + μ < 0` and `μ ≤ 0`: the weight is constant.
    Constant,
    /// `λ ≥ 0` and `λ + μ ≥ 0`.
    Sum,
    /// `λ < 0` and `μ > 0`.
    Mu,
}

pub fn bar_branch(lambda: f64, mu: f64) -> Result<BarBranch> {
    let nu = lambda + mu;
    if nu < 0.0 && mu <= 0.0 {
        Ok(BarBranch::Constant)
    } else if lambda >= 0.0 && nu >= 0.0 {
        Ok(BarBranch::Sum)
    } else if lambda < 0.0 && mu > 0.0 {
        Ok(BarBranch::Mu)
    } else {
        Err(Error::Unsupported(format!("(λ, μ) = ({lambda}, {mu}) matches no Bessel(3) branch")))
    }
}

/// Limit martingale for Bessel(3) penalized by `e^{μX_t + λJ_t}`; only
/// `state.x` and `state.u` are read.
pub fn m_bar(state: PathState, lambda: f64, mu: f64) -> Result<f64> {
    if !(state.x >= 0.0 && state.u >= 0.0) {
        return domain(format!("Bessel(3) state needs x ≥ 0 and u ≥ 0, got ({}, {})", state.x, state.u));
    }
    Ok(ln_m_bar(state.x, state.u, lambda, mu, bar_branch(lambda, mu)?).exp())
}

pub(crate) fn ln_m_bar(x: f64, u: f64, lambda: f64, mu: f64, branch: BarBranch) -> f64 {
    let rate = match branch {
        BarBranch::Constant => return 0.0,
        BarBranch::Sum => lambda + mu,
        BarBranch::Mu => mu,
    };
    -0.5 * rate * rate * u + ln_sinhc(rate * x)
}

/// `f⋆ ∫da ∫_{a₊}^∞ (2y − a) f(a + X, S ∨ (y + X)) dy` by nested quadrature.
pub fn m_phi_from_f(state: PathState, f: &BivariatePenalty) -> Result<f64> {
    state.validate()?;
    let fs = penalty_normalizer(f)?;
    let PathState { x, s, .. } = state;
    let (a_lo, a_hi) = f.a_range();
    let y_top = f.y_max();
    if s > y_top {
        return Ok(0.0);
    }
    let kink = s - x;
    let mut outer_breaks: Vec<f64> = f.a_breaks().iter().map(|b| b - x).collect();
    outer_breaks.push(0.0);
    outer_breaks.push(kink);
    let mut inner_breaks: Vec<f64> = f.y_breaks().iter().map(|b| b - x).collect();
    inner_breaks.push(kink);
    let outer_tol = Tolerance::new(1e-11, 1e-9);
    let inner_tol = Tolerance::new(1e-13, 1e-11);
    let v = integrate_with_breaks(
        |a| {
            let lo = a.max(0.0);
            let hi = y_top - x;
            if lo >= hi {
                return 0.0;
            }
            integrate_with_breaks(|y| (2.0 * y - a) * f.value(a + x, s.max(y + x)), lo, hi, &inner_breaks, inner_tol)
                .value
        },
        a_lo - x,
        (a_hi - x).min(y_top - x),
        &outer_breaks,
        outer_tol,
    )
    .value;
    Ok(fs * v)
}

fn check_fifth_moment(phi: &DensitySpec) -> Result<()> {
    let m5 = phi.moment(5);
    if !m5.is_finite() {
        return precondition("∫y⁵φ(y)dy diverges");
    }
    Ok(())
}

/// First-order coefficient of the `1/t` development for the penalty `φ(S_t)`:
///
/// `F₁ = ½(u + ∫v²φ)·M^φ − φ(S)(S − X)³/6 − ½∫_S^∞ (v − X)² φ(v) dv`.
///
/// This is a martingale vanishing at the origin, as the full-space series
/// `Q_t(Ω) ≡ 1` requires.
pub fn f1_phi(state: PathState, phi: &DensitySpec) -> Result<f64> {
    state.validate()?;
    check_fifth_moment(phi)?;
    Ok(f1_phi_raw(state.x, state.s, state.u, phi))
}

pub(crate) fn f1_phi_raw(x: f64, s: f64, u: f64, phi: &DensitySpec) -> f64 {
    let d = s - x;
    let t0 = phi.tail_moment(0, s);
    let t1 = phi.tail_moment(1, s);
    let t2 = phi.tail_moment(2, s);
    let sq_tail = t2 - 2.0 * x * t1 + x * x * t0;
    0.5 * (u + phi.moment(2)) * m_phi_raw(x, s, phi) - phi.pdf(s) * d * d * d / 6.0 - 0.5 * sq_tail
}

/// The same coefficient written with a cubic tail,
/// `(u + ∫y²φ)·M^φ − φ(S)(S − X)³/6 − ½∫_S^∞ (v − X)³ φ(v) dv`.
///
/// Kept for comparison: it is not a martingale and is nonzero at the origin.
pub fn f1_phi_printed(state: PathState, phi: &DensitySpec) -> Result<f64> {
    state.validate()?;
    check_fifth_moment(phi)?;
    let PathState { x, s, u } = state;
    let d = s - x;
    let t: Vec<f64> = (0..4).map(|k| phi.tail_moment(k, s)).collect();
    let cube_tail = t[3] - 3.0 * x * t[2] + 3.0 * x * x * t[1] - x * x * x * t[0];
    let tilde = phi.pdf(s) * d * d * d / 6.0 + 0.5 * cube_tail;
    Ok(-tilde + (u + phi.moment(2)) * m_phi_raw(x, s, phi))
}

/// First-order coefficient of the Kennedy development,
/// `c/(λ³√(2π))·(M^{φ₁} − M^{λ,φ})`.
pub fn f1_lambda_phi(state: PathState, k: &KennedyTransforms) -> Result<f64> {
    state.validate()?;
    Ok(f1_lambda_phi_raw(state.x, state.s, state.u, k))
}

pub(crate) fn f1_lambda_phi_raw(x: f64, s: f64, u: f64, k: &KennedyTransforms) -> f64 {
    let l = k.profile.lambda();
    let pre = k.c / (l * l * l * SQRT_2PI);
    pre * (m_phi_raw(x, s, &k.phi1) - m_kennedy_raw(x, s, u, &k.profile))
}
