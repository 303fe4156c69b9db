//! Weighted Monte Carlo for the finite-horizon penalized laws.
//!
//! Samples are drawn in fixed chunks of [`CHUNK`] paths, each chunk with its
//! own forked stream, and reduced in chunk order. The result therefore does
//! not depend on the number of worker threads.
//!
//! Rectangle events and functionals of `(X_u, S_u)` only need the exact
//! joint draws of `(X_u, S_u)` and of the increment over `[u, t]`, so no
//! grid is involved. Exponential weights are handled by a Girsanov drift
//! chosen per family, which keeps the weights of order one at large `t`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exact_laws::{
    bessel3_cdf, classify_region, p_bessel3, BivariatePenalty, DensitySpec, KennedyProfile, Regime,
};
use crate::integrate::{integrate_with_breaks, Tolerance};
use crate::martingales::{bar_branch, ln_m_bar, ln_m_mu_lambda, m_kennedy_raw, m_phi_raw, BarBranch};
use crate::quadrature::{q_ay_finite, q_ay_limit, rect_expectation, ExpectOpts, RectEvent};
use crate::special::ln_sinhc;
use crate::samplers::{bm_path, endpoint_and_max, pitman_transform, Crossing, RngStream};

/// Paths per chunk.
pub const CHUNK: usize = 4096;

/// The weight process `F_t` as a function of `(X_t, S_t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyKind {
    PhiOfMax(DensitySpec),
    BivariateF(BivariatePenalty),
    ExpLinear { lambda: f64, mu: f64 },
    KennedyWeight(KennedyProfile),
}

impl PenaltyKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PenaltyKind::ExpLinear { lambda, mu } if !(lambda.is_finite() && mu.is_finite()) => {
                domain("exponential penalty parameters must be finite")
            }
            _ => Ok(()),
        }
    }

    /// `ln F(x, s)`, `−∞` where the weight vanishes.
    pub fn log_weight(&self, x: f64, s: f64) -> f64 {
        match *self {
            PenaltyKind::PhiOfMax(ref phi) => phi.pdf(s).ln(),
            PenaltyKind::BivariateF(ref f) => f.log_value(x, s),
            PenaltyKind::ExpLinear { lambda, mu } => lambda * s + mu * x,
            PenaltyKind::KennedyWeight(ref p) => p.psi(s).ln() + p.lambda() * (s - x),
        }
    }

    /// Drift of the sampling measure.
    pub fn tilt(&self) -> f64 {
        let exp_tilt = |lambda: f64, mu: f64| match classify_region(lambda, mu) {
            Regime::R1 => 0.0,
            Regime::R2 => lambda + mu,
            Regime::R3 => mu,
        };
        match *self {
            PenaltyKind::ExpLinear { lambda, mu } => exp_tilt(lambda, mu),
            PenaltyKind::BivariateF(BivariatePenalty::ExponentialBivariate { lambda, mu }) => exp_tilt(lambda, mu),
            PenaltyKind::KennedyWeight(ref p) => -p.lambda(),
            _ => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            PenaltyKind::PhiOfMax(ref phi) => format!("phi:{}", phi.label()),
            PenaltyKind::BivariateF(ref f) => format!("f:{f:?}"),
            PenaltyKind::ExpLinear { lambda, mu } => format!("exp:{lambda}:{mu}"),
            PenaltyKind::KennedyWeight(ref p) => format!("kennedy:{}:{}", p.lambda(), p.base().label()),
        }
    }
}

/// A ratio estimate with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    /// Kish effective sample size of the weights.
    pub ess: f64,
    pub seed: RngStream,
}

/// Shifted weighted sums of one chunk.
#[derive(Debug, Clone, Copy)]
struct Acc {
    n: usize,
    shift: f64,
    w: f64,
    wg: f64,
    w2: f64,
    w2g: f64,
    w2g2: f64,
}

impl Acc {
    fn from_samples(samples: &[(f64, f64)]) -> Self {
        let shift = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let mut a = Acc { n: samples.len(), shift, w: 0.0, wg: 0.0, w2: 0.0, w2g: 0.0, w2g2: 0.0 };
        if shift == f64::NEG_INFINITY {
            return a;
        }
        for &(lw, g) in samples {
            let w = (lw - shift).exp();
            let w2 = w * w;
            a.w += w;
            a.wg += w * g;
            a.w2 += w2;
            a.w2g += w2 * g;
            a.w2g2 += w2 * g * g;
        }
        a
    }

    fn merge(self, o: Acc) -> Acc {
        if o.shift == f64::NEG_INFINITY {
            return Acc { n: self.n + o.n, ..self };
        }
        if self.shift == f64::NEG_INFINITY {
            return Acc { n: self.n + o.n, ..o };
        }
        let shift = self.shift.max(o.shift);
        let (f1, f2) = ((self.shift - shift).exp(), (o.shift - shift).exp());
        let (q1, q2) = (f1 * f1, f2 * f2);
        Acc {
            n: self.n + o.n,
            shift,
            w: self.w * f1 + o.w * f2,
            wg: self.wg * f1 + o.wg * f2,
            w2: self.w2 * q1 + o.w2 * q2,
            w2g: self.w2g * q1 + o.w2g * q2,
            w2g2: self.w2g2 * q1 + o.w2g2 * q2,
        }
    }

    fn estimate(&self, seed: RngStream) -> Result<Estimate> {
        if !(self.w > 0.0) || self.shift == f64::NEG_INFINITY {
            return Err(Error::DegenerateWeights);
        }
        let v = self.wg / self.w;
        let ss = (self.w2g2 - 2.0 * v * self.w2g + v * v * self.w2).max(0.0);
        let n = self.n as f64;
        let stderr = (ss * n / (n - 1.0)).sqrt() / self.w;
        Ok(Estimate { value: v, stderr, n: self.n, ess: self.w * self.w / self.w2, seed })
    }
}

/// Run `n` draws of `(log-weight, value)` in chunks and reduce in chunk order
/// into a self-normalized estimate of `E[w g] / E[w]`.
pub fn ratio_mc<F>(n: usize, stream: RngStream, draw: F) -> Result<Estimate>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> (f64, f64) + Sync,
{
    if n < 2 {
        return domain("need at least two samples");
    }
    let chunks = n.div_ceil(CHUNK);
    let accs: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK.min(n - i * CHUNK);
            let mut rng = stream.fork(i as u64).rng();
            let samples: Vec<(f64, f64)> = (0..len).map(|_| draw(&mut rng)).collect();
            Acc::from_samples(&samples)
        })
        .collect();
    let total = accs.into_iter().reduce(Acc::merge).expect("at least one chunk");
    total.estimate(stream)
}

fn check_horizon(u: f64, t: f64) -> Result<()> {
    if !(u > 0.0 && t > u && t.is_finite()) {
        return domain(format!("need 0 < u < t, got u = {u}, t = {t}"));
    }
    Ok(())
}

/// `E₀[g(X_u, S_u) F_t] / E₀[F_t]`.
pub fn penalized_estimate<G>(pen: &PenaltyKind, u: f64, g: G, t: f64, n: usize, stream: RngStream) -> Result<Estimate>
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    pen.validate()?;
    check_horizon(u, t)?;
    let theta = pen.tilt();
    let r = t - u;
    // The constant θ²t/2 of the likelihood ratio cancels in the ratio.
    ratio_mc(n, stream, |rng| {
        let (xu, su) = endpoint_and_max(u, theta, rng);
        let (y, m) = endpoint_and_max(r, theta, rng);
        let (xt, st) = (xu + y, su.max(xu + m));
        (pen.log_weight(xt, st) - theta * xt, g(xu, su))
    })
}

/// [`penalized_estimate`] for the indicator of a rectangle event.
pub fn penalized_event(pen: &PenaltyKind, ev: &RectEvent, t: f64, n: usize, stream: RngStream) -> Result<Estimate> {
    let e = *ev;
    penalized_estimate(pen, ev.u, move |x, s| if e.contains(x, s) { 1.0 } else { 0.0 }, t, n, stream)
}

/// Default band width `max(0.005, 2 n^{−1/3} sd(S_u))`.
pub fn default_band(n: usize, u: f64) -> f64 {
    let sd = (u * (1.0 - 2.0 / std::f64::consts::PI)).sqrt();
    f64::max(0.005, 2.0 * (n as f64).powf(-1.0 / 3.0) * sd)
}

/// `E[g(X_u, S_u) | S_u ∈ (y − ε, y]]`, a surrogate for conditioning on `S_u = y`.
pub fn band_conditional<G>(g: G, y: f64, eps: f64, u: f64, n: usize, stream: RngStream) -> Result<Estimate>
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    if !(eps > 0.0 && y - eps > 0.0 && u > 0.0) {
        return domain(format!("need ε > 0 and y − ε > 0, got y = {y}, ε = {eps}"));
    }
    ratio_mc(n, stream, |rng| {
        let (x, s) = endpoint_and_max(u, 0.0, rng);
        let inside = s > y - eps && s <= y;
        (if inside { 0.0 } else { f64::NEG_INFINITY }, g(x, s))
    })
    .map_err(|e| match e {
        Error::DegenerateWeights => Error::InsufficientData(format!("no samples in the band ({}, {y}]", y - eps)),
        e => e,
    })
}

/// One row of a convergence report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckRow {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
}

impl CheckRow {
    /// Discrepancy in units of the standard error.
    pub fn z(&self) -> f64 {
        (self.estimate - self.target) / self.stderr.max(1e-300)
    }
}

/// `E₀[1_Γ M_u^{μ,λ}]` by quadrature.
pub fn regime_target(lambda: f64, mu: f64, ev: &RectEvent) -> f64 {
    let opts = ExpectOpts { growth: lambda.abs() + mu.abs(), ..ExpectOpts::default() };
    let u = ev.u;
    rect_expectation(ev, |x, s| ln_m_mu_lambda(x, s, u, lambda, mu).exp(), &opts)
}

/// Penalized estimates for `e^{λS_t + μX_t}` against the regime-specific limit.
pub fn regime_limit_check(
    lambda: f64,
    mu: f64,
    events: &[RectEvent],
    t_list: &[f64],
    n: usize,
    stream: RngStream,
) -> Result<Vec<(RectEvent, CheckRow)>> {
    check_increasing(t_list)?;
    let pen = PenaltyKind::ExpLinear { lambda, mu };
    let mut rows = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        let target = regime_target(lambda, mu, ev);
        for (j, &t) in t_list.iter().enumerate() {
            let e = penalized_event(&pen, ev, t, n, stream.fork((i * t_list.len() + j) as u64))?;
            rows.push((*ev, CheckRow { t, estimate: e.value, stderr: e.stderr, target }));
        }
    }
    Ok(rows)
}

fn check_increasing(t_list: &[f64]) -> Result<()> {
    if t_list.is_empty() || t_list.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("t list must be nonempty and strictly increasing");
    }
    Ok(())
}

/// Weight on a Bessel(3) path through `(X_t, J_t)`, with `J_t` the future infimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BesselWeight {
    /// `e^{μX_t + λJ_t}`.
    ExpLinear { lambda: f64, mu: f64 },
    /// `(1 + X_t)^{−k}`, `k > 2`; integrable over `{b > y > 0}`.
    PowerDecay { k: f64 },
}

impl BesselWeight {
    fn log_weight(&self, x: f64, j: f64) -> f64 {
        match *self {
            BesselWeight::ExpLinear { lambda, mu } => mu * x + lambda * j,
            BesselWeight::PowerDecay { k } => -k * x.ln_1p(),
        }
    }

    fn validate(&self) -> Result<Option<BarBranch>> {
        match *self {
            BesselWeight::ExpLinear { lambda, mu } => bar_branch(lambda, mu).map(Some),
            BesselWeight::PowerDecay { k } if k > 2.0 => Ok(None),
            BesselWeight::PowerDecay { k } => domain(format!("power decay needs k > 2, got {k}")),
        }
    }
}

fn norm3<R: Rng + ?Sized>(base: f64, scale: f64, rng: &mut R) -> f64 {
    let z: [f64; 3] = [rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal)];
    let a = base + scale * z[0];
    (a * a + scale * scale * (z[1] * z[1] + z[2] * z[2])).sqrt()
}

/// `E^{(3)}[1_{X_u ≤ b} M̄_u]`, or the plain Bessel(3) probability for weights
/// that do not change the limit.
pub fn bessel_target(w: &BesselWeight, u: f64, b: f64) -> Result<f64> {
    let branch = w.validate()?;
    match (w, branch) {
        (BesselWeight::ExpLinear { lambda, mu }, Some(br)) if br != BarBranch::Constant => Ok(integrate_with_breaks(
            |x| p_bessel3(u, x).unwrap_or(0.0) * ln_m_bar(x, u, *lambda, *mu, br).exp(),
            0.0,
            b,
            &[],
            Tolerance::tight(),
        )
        .value),
        _ => bessel3_cdf(u, b),
    }
}

/// Log density of a Bessel(3) process at `z` after time `r`, started at `x`.
fn ln_bessel3_transition(x: f64, z: f64, r: f64) -> f64 {
    (2.0 * z * z / (r * (std::f64::consts::TAU * r).sqrt())).ln() - (z * z + x * x) / (2.0 * r) + ln_sinhc(x * z / r)
}

/// Bessel(3) penalized by `w(X_t, J_t)` on the event `{X_u ≤ b}`.
///
/// `J_t` is drawn from its exact law given `X_t`, uniform on `[0, X_t]`.
/// For [`BesselWeight::PowerDecay`] the weight lives on `X_t = O(1)` while
/// `X_t` itself is of order `√t`, so `X_t` is drawn from the Beta-prime(3, 1)
/// density `3z²/(1 + z)⁴` and reweighted by the exact transition density.
pub fn bessel_penalization_check(
    w: &BesselWeight,
    u: f64,
    b: f64,
    t_list: &[f64],
    n: usize,
    stream: RngStream,
) -> Result<Vec<CheckRow>> {
    check_increasing(t_list)?;
    let target = bessel_target(w, u, b)?;
    let mut rows = Vec::new();
    for (j, &t) in t_list.iter().enumerate() {
        check_horizon(u, t)?;
        let r = t - u;
        let e = ratio_mc(n, stream.fork(j as u64), |rng| {
            let xu = norm3(0.0, u.sqrt(), rng);
            let g = if xu <= b { 1.0 } else { 0.0 };
            if let BesselWeight::PowerDecay { .. } = w {
                let beta = (1.0 - rng.random::<f64>()).cbrt();
                let z = beta / (1.0 - beta);
                if !(z > 0.0 && z.is_finite()) {
                    return (f64::NEG_INFINITY, g);
                }
                let ln_q = 3f64.ln() + 2.0 * z.ln() - 4.0 * z.ln_1p();
                return (w.log_weight(z, 0.0) + ln_bessel3_transition(xu, z, r) - ln_q, g);
            }
            let xt = norm3(xu, r.sqrt(), rng);
            let jt = xt * rng.random::<f64>();
            (w.log_weight(xt, jt), g)
        })?;
        rows.push(CheckRow { t, estimate: e.value, stderr: e.stderr, target });
    }
    Ok(rows)
}

/// One horizon of the three-way bridge comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeRow {
    pub t: f64,
    pub quadrature: f64,
    pub band: f64,
    pub band_stderr: f64,
    pub limit: f64,
}

/// Bridge conditioning on `X_t = a, S_t = y` by quadrature and by an
/// `ε`-band Monte Carlo, next to the `t → ∞` limit.
pub fn bridge_convergence_check(
    a: f64,
    y: f64,
    ev: &RectEvent,
    t_list: &[f64],
    eps: f64,
    n: usize,
    stream: RngStream,
) -> Result<Vec<BridgeRow>> {
    check_increasing(t_list)?;
    if !(eps > 0.0 && y - eps > a.max(0.0)) {
        return domain("band must leave y − ε above a₊");
    }
    let limit = q_ay_limit(a, y, ev)?;
    let (u, e) = (ev.u, *ev);
    let mut rows = Vec::new();
    for (j, &t) in t_list.iter().enumerate() {
        let quadrature = q_ay_finite(a, y, ev, t)?;
        let est = ratio_mc(n, stream.fork(j as u64), |rng| {
            let (xu, su) = endpoint_and_max(u, 0.0, rng);
            let (dx, m) = endpoint_and_max(t - u, 0.0, rng);
            let (xt, st) = (xu + dx, su.max(xu + m));
            let inside = (xt - a).abs() <= eps && st > y - eps && st <= y;
            (if inside { 0.0 } else { f64::NEG_INFINITY }, if e.contains(xu, su) { 1.0 } else { 0.0 })
        })
        .map_err(|err| match err {
            Error::DegenerateWeights => Error::InsufficientData(format!("no samples in the band at t = {t}")),
            err => err,
        })?;
        rows.push(BridgeRow { t, quadrature, band: est.value, band_stderr: est.stderr, limit });
    }
    Ok(rows)
}

/// A weight martingale observed at time `u`.
#[derive(Debug, Clone, PartialEq)]
pub enum MartingaleKind {
    Phi(DensitySpec),
    Kennedy(KennedyProfile),
    MuLambda { lambda: f64, mu: f64 },
}

impl MartingaleKind {
    pub fn eval(&self, x: f64, s: f64, u: f64) -> f64 {
        match *self {
            MartingaleKind::Phi(ref phi) => m_phi_raw(x, s, phi),
            MartingaleKind::Kennedy(ref p) => m_kennedy_raw(x, s, u, p),
            MartingaleKind::MuLambda { lambda, mu } => ln_m_mu_lambda(x, s, u, lambda, mu).exp(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MartingaleKind::Phi(ref phi) => format!("m_phi[{}]", phi.label()),
            MartingaleKind::Kennedy(ref p) => format!("m_kennedy[λ={}]", p.lambda()),
            MartingaleKind::MuLambda { lambda, mu } => format!("m_mu_lambda[{lambda},{mu}]"),
        }
    }
}

/// Sample mean of `M_u` over simulated paths with step `δ` (continuous
/// maximum drawn across each step).
pub fn martingale_mean(m: &MartingaleKind, u: f64, step: f64, n: usize, stream: RngStream) -> Result<Estimate> {
    if !(u > 0.0) {
        return domain("u must be positive");
    }
    bm_path(u, step, 0.0, Crossing::Bridge, &mut stream.rng())?;
    ratio_mc(n, stream, |rng| {
        let p = bm_path(u, step, 0.0, Crossing::Bridge, rng).expect("grid checked above");
        (0.0, m.eval(p.value_at(u), p.max_at(u), u))
    })
}

/// One bin of the conditional-mean regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PitmanBin {
    pub r: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Binned estimate of `E[S_t | 2S_t − X_t = r]` from Pitman-transformed paths.
///
/// Within a bin of half-width `h` around `r` the estimate is `r` times the
/// mean of `S/R`, which removes the first-order effect of the bin width.
pub fn pitman_regression(t: f64, r_list: &[f64], h: f64, step: f64, n: usize, stream: RngStream) -> Result<Vec<PitmanBin>> {
    if !(h > 0.0) || r_list.iter().any(|&r| !(r > h)) {
        return domain("bins must have positive width and lie in (0, ∞)");
    }
    bm_path(t, step, 0.0, Crossing::Bridge, &mut stream.rng())?;
    let k = r_list.len();
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<(usize, f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK.min(n - i * CHUNK);
            let mut rng = stream.fork(i as u64).rng();
            let mut acc = vec![(0usize, 0.0, 0.0); k];
            for _ in 0..len {
                let p = bm_path(t, step, 0.0, Crossing::Bridge, &mut rng).expect("grid checked above");
                let rr = pitman_transform(&p).value_at(t);
                let s = p.max_at(t);
                for (b, &r) in r_list.iter().enumerate() {
                    if (rr - r).abs() <= h {
                        let q = s / rr;
                        acc[b].0 += 1;
                        acc[b].1 += q;
                        acc[b].2 += q * q;
                    }
                }
            }
            acc
        })
        .collect();
    let mut tot = vec![(0usize, 0.0, 0.0); k];
    for part in parts {
        for (b, v) in part.into_iter().enumerate() {
            tot[b].0 += v.0;
            tot[b].1 += v.1;
            tot[b].2 += v.2;
        }
    }
    r_list
        .iter()
        .zip(tot)
        .map(|(&r, (c, s1, s2))| {
            if c < 2 {
                return Err(Error::InsufficientData(format!("bin around r = {r} has {c} samples")));
            }
            let cf = c as f64;
            let mean = s1 / cf;
            let var = (s2 / cf - mean * mean).max(0.0) * cf / (cf - 1.0);
            Ok(PitmanBin { r, estimate: r * mean, stderr: r * (var / cf).sqrt(), count: c })
        })
        .collect()
}
