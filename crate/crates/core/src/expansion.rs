//! Extraction of `1/t` coefficients from penalized-probability series.

use serde::Serialize;

use crate::error::{domain, precondition, Error, Result};
use crate::exact_laws::{kennedy_transforms, DensitySpec, KennedyProfile};
use crate::martingales::{f1_lambda_phi_raw, f1_phi_raw, f1_phi_printed, PathState};
use crate::penalized_mc::{penalized_event, PenaltyKind};
use crate::quadrature::{kennedy_series_point, phi_series_point, rect_expectation, ExpectOpts, RectEvent};
use crate::samplers::RngStream;

/// Default fit window.
pub const DEFAULT_WINDOW: [f64; 6] = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];

/// Relative accuracy attributed to deterministic series points.
pub const QUADRATURE_REL_ERR: f64 = 1e-9;

/// Which decay the correction term follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateModel {
    /// `q + c/t`.
    Polynomial,
    /// `q + c·e^{−λ²t/2} t^{−3/2}`.
    Discounted { lambda: f64 },
}

impl RateModel {
    pub fn regressor(&self, t: f64) -> f64 {
        match *self {
            RateModel::Polynomial => 1.0 / t,
            RateModel::Discounted { lambda } => (-0.5 * lambda * lambda * t).exp() / (t * t.sqrt()),
        }
    }
}

/// One point of a series, `value ± stderr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSample {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub model: RateModel,
    pub q_limit: f64,
    pub c1: f64,
    pub q_limit_stderr: f64,
    pub c1_stderr: f64,
    /// Largest absolute residual over the window.
    pub residual: f64,
    /// Largest residual in units of the point's standard error.
    pub scaled_residual: f64,
    pub window: Vec<f64>,
    /// Leading points removed by the transient guard.
    pub dropped: Vec<f64>,
}

impl RateFit {
    pub fn model_value(&self, t: f64) -> f64 {
        self.q_limit + self.c1 * self.model.regressor(t)
    }
}

/// Euclidean norm without overflow of the squares.
fn norm(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(0.0, |a: f64, x| a.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * xs.map(|x| (x / m).powi(2)).sum::<f64>().sqrt()
}

/// Weighted least squares of `value` on `[1, regressor(t)]`.
fn wls(series: &[SeriesSample], model: RateModel, baseline: f64) -> Result<RateFit> {
    wls_impl(series, model, baseline, false)
}

/// With `rank_deficient_ok`, a regressor that is numerically collinear with
/// the constant gets coefficient zero instead of an error.
fn wls_impl(series: &[SeriesSample], model: RateModel, baseline: f64, rank_deficient_ok: bool) -> Result<RateFit> {
    let rows: Vec<(f64, f64, f64)> = series
        .iter()
        .map(|p| {
            let w = 1.0 / p.stderr;
            (w, w * model.regressor(p.t), w * p.value)
        })
        .collect();
    // Modified Gram–Schmidt on column-equilibrated data; the discounted
    // regressor spans hundreds of orders of magnitude.
    let n0 = norm(rows.iter().map(|r| r.0));
    let n1 = norm(rows.iter().map(|r| r.1));
    if !(n0 > 0.0 && n1 > 0.0 && n0.is_finite() && n1.is_finite()) {
        return Err(Error::Fit("design has a zero or non-finite column".into()));
    }
    let q0: Vec<f64> = rows.iter().map(|r| r.0 / n0).collect();
    let a1: Vec<f64> = rows.iter().map(|r| r.1 / n1).collect();
    let r01: f64 = q0.iter().zip(&a1).map(|(a, b)| a * b).sum();
    let v1: Vec<f64> = a1.iter().zip(&q0).map(|(a, q)| a - r01 * q).collect();
    let r11 = v1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b0: f64 = q0.iter().zip(&rows).map(|(q, r)| q * r.2).sum();
    let (beta0, beta1, var0, var1) = if r11 > 1e-10 {
        let q1: Vec<f64> = v1.iter().map(|v| v / r11).collect();
        let b1: f64 = q1.iter().zip(&rows).map(|(q, r)| q * r.2).sum();
        let y1 = b1 / r11;
        let y0 = b0 - r01 * y1;
        // (RᵀR)⁻¹ in the scaled coordinates, then unscaled.
        let var1 = 1.0 / (r11 * r11);
        ((y0 / n0), (y1 / n1), 1.0 + r01 * r01 * var1, var1)
    } else if rank_deficient_ok {
        (b0 / n0, 0.0, 1.0, f64::INFINITY)
    } else {
        return Err(Error::Fit("singular design: regressor is collinear with the constant".into()));
    };
    let mut residual: f64 = 0.0;
    let mut scaled: f64 = 0.0;
    for p in series {
        let r = p.value - beta0 - beta1 * model.regressor(p.t);
        residual = residual.max(r.abs());
        scaled = scaled.max((r / p.stderr).abs());
    }
    Ok(RateFit {
        model,
        q_limit: baseline + beta0,
        c1: beta1,
        q_limit_stderr: var0.sqrt() / n0,
        c1_stderr: var1.sqrt() / n1,
        residual,
        scaled_residual: scaled,
        window: series.iter().map(|p| p.t).collect(),
        dropped: Vec::new(),
    })
}

fn check_series(series: &[SeriesSample]) -> Result<()> {
    if series.len() >= 2 && series.windows(2).all(|w| w[0].t == w[1].t) {
        return Err(Error::Fit("singular design: all t are equal".into()));
    }
    if series.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return domain("t must be strictly increasing");
    }
    if series.iter().any(|p| !(p.value.is_finite() && p.stderr > 0.0 && p.stderr.is_finite() && p.t > 0.0)) {
        return domain("series needs finite values, positive t and positive standard errors");
    }
    if series.len() < 4 || series[series.len() - 1].t < 8.0 * series[0].t {
        return Err(Error::InsufficientData("window needs at least 4 points spanning a factor of 8".into()));
    }
    Ok(())
}

fn window_ok(series: &[SeriesSample]) -> bool {
    series.len() >= 4 && series[series.len() - 1].t >= 8.0 * series[0].t
}

/// Fit `value = q + c·regressor(t)`.
pub fn fit_rate(series: &[SeriesSample], model: RateModel) -> Result<RateFit> {
    fit_rate_excess(series, 0.0, model)
}

/// Fit a series given as excess over a known `baseline`; `q_limit` includes
/// the baseline. A leading point is dropped when its residual against the
/// fit of the later points exceeds three times that fit's own largest
/// residual (floored at one standard error), as long as the remaining
/// window stays admissible.
pub fn fit_rate_excess(series: &[SeriesSample], baseline: f64, model: RateModel) -> Result<RateFit> {
    check_series(series)?;
    let mut start = 0;
    let mut fit = wls(series, model, baseline)?;
    while window_ok(&series[start + 1..]) {
        let later = wls(&series[start + 1..], model, baseline)?;
        let p = series[start];
        let r0 = ((p.value - (later.q_limit - baseline) - later.c1 * model.regressor(p.t)) / p.stderr).abs();
        if r0 > 3.0 * later.scaled_residual.max(1.0) {
            start += 1;
            fit = later;
        } else {
            break;
        }
    }
    fit.dropped = series[..start].iter().map(|p| p.t).collect();
    Ok(fit)
}

/// Least-squares slope of `ln|d|` against `ln t`.
pub fn loglog_slope(ts: &[f64], ds: &[f64]) -> Result<f64> {
    if ts.len() < 2 || ts.len() != ds.len() || ds.iter().any(|&d| !(d != 0.0 && d.is_finite())) {
        return domain("log-log slope needs at least two nonzero finite differences");
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ds.iter().map(|d| d.abs().ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("log-log slope needs distinct t".into()));
    }
    Ok(sxy / sxx)
}

/// How the series `Q_t(Γ)` is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesSource {
    Quadrature,
    MonteCarlo { n: usize, stream: RngStream },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Report {
    /// `E₀[1_Γ F₁^φ(X_u, S_u, u)]`.
    pub target: f64,
    /// The same expectation for the printed coefficient formula.
    pub target_printed: f64,
    /// Full-space expectations of both formulas.
    pub full_space: f64,
    pub full_space_printed: f64,
    pub fit: RateFit,
    pub rel_error: f64,
    /// Residual of the early half-window fit over that of the late one.
    pub residual_ratio: f64,
    pub series: Vec<SeriesSample>,
    pub limit: f64,
}

fn half_window_ratio(series: &[SeriesSample], baseline: f64, model: RateModel) -> Result<f64> {
    let k = series.len() / 2 + 1;
    if k < 4 || series.len() < 6 {
        return Ok(f64::NAN);
    }
    let early = wls(&series[..k], model, baseline)?;
    let late = wls(&series[series.len() - k..], model, baseline)?;
    Ok(early.residual / late.residual)
}

/// `E₀[1_Γ F₁^φ]` by quadrature, for the implemented and printed formulas.
pub fn f1_phi_target(phi: &DensitySpec, ev: &RectEvent) -> (f64, f64) {
    let opts = ExpectOpts { s_breaks: phi.breakpoints(), ..ExpectOpts::default() };
    let u = ev.u;
    let derived = rect_expectation(ev, |x, s| f1_phi_raw(x, s, u, phi), &opts);
    let printed = rect_expectation(
        ev,
        |x, s| f1_phi_printed(PathState { x, s, u }, phi).unwrap_or(f64::NAN),
        &opts,
    );
    (derived, printed)
}

/// Fit the `1/t` coefficient of `Q_t^φ(Γ)` and compare it to `E₀[1_Γ F₁^φ]`.
pub fn f1_coefficient_check(phi: &DensitySpec, ev: &RectEvent, t_list: &[f64], source: SeriesSource) -> Result<F1Report> {
    if !phi.moment(5).is_finite() {
        return precondition("∫y⁵φ(y)dy diverges");
    }
    let (target, target_printed) = f1_phi_target(phi, ev);
    let (full_space, full_space_printed) = f1_phi_target(phi, &RectEvent::full(ev.u));
    let (series, limit) = match source {
        SeriesSource::Quadrature => {
            let pts = t_list.iter().map(|&t| phi_series_point(phi, ev, t)).collect::<Result<Vec<_>>>()?;
            let limit = pts.first().map_or(f64::NAN, |p| p.limit);
            let series = pts
                .iter()
                .map(|p| SeriesSample { t: p.t, value: p.excess, stderr: QUADRATURE_REL_ERR * p.excess.abs().max(1e-12) })
                .collect();
            (series, limit)
        }
        SeriesSource::MonteCarlo { n, stream } => {
            let limit = phi_series_point(phi, ev, t_list[0].max(ev.u * 2.0))?.limit;
            let pen = PenaltyKind::PhiOfMax(phi.clone());
            let series = t_list
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let e = penalized_event(&pen, ev, t, n, stream.fork(i as u64))?;
                    Ok(SeriesSample { t, value: e.value - limit, stderr: e.stderr.max(1e-12) })
                })
                .collect::<Result<Vec<_>>>()?;
            (series, limit)
        }
    };
    let fit = fit_rate_excess(&series, limit, RateModel::Polynomial)?;
    let residual_ratio = half_window_ratio(&series, limit, RateModel::Polynomial)?;
    let rel_error = (fit.c1 - target).abs() / target.abs();
    Ok(F1Report { target, target_printed, full_space, full_space_printed, fit, rel_error, residual_ratio, series, limit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KennedyReport {
    /// `c(λ, φ)`.
    pub c: f64,
    /// `E₀[1_Γ F₁^{λ,φ}]`.
    pub target: f64,
    pub fit: RateFit,
    pub rel_error: f64,
    /// Both models fitted on the full window without the transient guard.
    pub right_full: RateFit,
    /// The polynomial model on the same data, for contrast; its design is
    /// typically rank-deficient in floating point.
    pub wrong_model: RateFit,
    /// `wrong_model.scaled_residual / right_full.scaled_residual`.
    pub model_residual_ratio: f64,
    pub series: Vec<SeriesSample>,
    pub limit: f64,
}

/// Fit the discounted coefficient of the Kennedy series by quadrature.
pub fn f1_kennedy_check(psi: &KennedyProfile, ev: &RectEvent, t_list: &[f64]) -> Result<KennedyReport> {
    let k = kennedy_transforms(psi)?;
    let l = psi.lambda();
    let u = ev.u;
    let opts = ExpectOpts { s_breaks: psi.base().breakpoints(), growth: l, ..ExpectOpts::default() };
    let target = rect_expectation(ev, |x, s| f1_lambda_phi_raw(x, s, u, &k), &opts);
    let pts = t_list.iter().map(|&t| kennedy_series_point(psi, ev, t)).collect::<Result<Vec<_>>>()?;
    let limit = pts.first().map_or(f64::NAN, |p| p.limit);
    let series: Vec<SeriesSample> = pts
        .iter()
        .map(|p| SeriesSample { t: p.t, value: p.excess, stderr: QUADRATURE_REL_ERR * p.excess.abs().max(f64::MIN_POSITIVE) })
        .collect();
    let fit = fit_rate_excess(&series, limit, RateModel::Discounted { lambda: l })?;
    let right_full = wls(&series, RateModel::Discounted { lambda: l }, limit)?;
    let wrong_model = wls_impl(&series, RateModel::Polynomial, limit, true)?;
    let model_residual_ratio = wrong_model.scaled_residual / right_full.scaled_residual;
    let rel_error = (fit.c1 - target).abs() / target.abs();
    Ok(KennedyReport { c: k.c, target, fit, rel_error, right_full, wrong_model, model_residual_ratio, series, limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngStream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn synth(f: impl Fn(f64) -> f64, ts: &[f64], se: f64) -> Vec<SeriesSample> {
        ts.iter().map(|&t| SeriesSample { t, value: f(t), stderr: se }).collect()
    }

    #[test]
    fn exact_model_recovery() {
        let s = synth(|t| 0.3 + 1.0 / t, &DEFAULT_WINDOW, 1e-6);
        let f = fit_rate(&s, RateModel::Polynomial).unwrap();
        assert!((f.q_limit - 0.3).abs() < 1e-12 && (f.c1 - 1.0).abs() < 1e-9, "{f:?}");
        assert!(f.residual < 1e-12);
        let m = RateModel::Discounted { lambda: 1.0 };
        let s: Vec<SeriesSample> = DEFAULT_WINDOW
            .iter()
            .map(|&t| {
                let v = 0.7 * m.regressor(t);
                SeriesSample { t, value: v, stderr: 1e-9 * v }
            })
            .collect();
        let f = fit_rate(&s, m).unwrap();
        assert!((f.c1 - 0.7).abs() < 1e-9 && f.residual < 1e-12, "{f:?}");
    }

    #[test]
    fn noisy_recovery_within_stderr() {
        let mut r = RngStream::new(3, 0).rng();
        let mut hits = 0;
        for _ in 0..200 {
            let s: Vec<SeriesSample> = DEFAULT_WINDOW
                .iter()
                .map(|&t| SeriesSample { t, value: 0.3 + 2.0 / t + 1e-3 * r.sample::<f64, _>(StandardNormal), stderr: 1e-3 })
                .collect();
            let f = fit_rate(&s, RateModel::Polynomial).unwrap();
            if (f.c1 - 2.0).abs() < 3.0 * f.c1_stderr && (f.q_limit - 0.3).abs() < 3.0 * f.q_limit_stderr {
                hits += 1;
            }
        }
        assert!(hits >= 185, "{hits}");
    }

    #[test]
    fn singular_and_short_windows() {
        let s: Vec<SeriesSample> = (0..5).map(|_| SeriesSample { t: 10.0, value: 1.0, stderr: 1.0 }).collect();
        assert!(matches!(fit_rate(&s, RateModel::Polynomial), Err(Error::Fit(_))));
        let s = synth(|t| 1.0 / t, &[1.0, 2.0, 4.0, 6.0], 1.0);
        assert!(matches!(fit_rate(&s, RateModel::Polynomial), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn transient_point_is_dropped() {
        let ts = [4.0, 32.0, 64.0, 128.0, 256.0, 512.0];
        let s = synth(|t| 0.3 + 1.0 / t + if t < 10.0 { 0.05 } else { 0.0 }, &ts, 1e-6);
        let f = fit_rate(&s, RateModel::Polynomial).unwrap();
        assert_eq!(f.dropped, vec![4.0], "{f:?}");
        assert!((f.c1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let ts = [32.0, 64.0, 128.0];
        let ds: Vec<f64> = ts.iter().map(|t: &f64| 3.0 * t.powf(-1.0)).collect();
        assert!((loglog_slope(&ts, &ds).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn f1_full_space_is_constant_in_u() {
        let phi = DensitySpec::uniform(1.0).unwrap();
        let vals: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&u| f1_phi_target(&phi, &RectEvent::full(u)).0).collect();
        for v in &vals {
            assert!(v.abs() < 1e-6, "{vals:?}");
        }
    }

    #[test]
    fn moment_precondition() {
        let t = DensitySpec::tabulated(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(f1_coefficient_check(&t, &RectEvent::full(1.0), &[1.0], SeriesSource::Quadrature).is_err());
    }
}
