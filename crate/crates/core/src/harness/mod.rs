//! Verdicts, goodness-of-fit tests and experiment configuration.

mod config;
pub mod suite;

pub use config::ExperimentConfig;

use serde::Serialize;

use crate::error::{domain, Result};

/// Where a target value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Quadrature,
    ClosedForm,
    McOracle,
}

/// One pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Verdict {
    /// Pass iff `|observed − target| ≤ tolerance`.
    pub fn within(name: impl Into<String>, observed: f64, target: f64, tolerance: f64, provenance: Provenance) -> Self {
        let pass = (observed - target).abs() <= tolerance;
        Self { name: name.into(), observed, target, tolerance, pass, provenance, note: String::new() }
    }

    /// Pass iff `observed ≥ target`; used for p-values and ratios.
    pub fn at_least(name: impl Into<String>, observed: f64, target: f64, provenance: Provenance) -> Self {
        Self { name: name.into(), observed, target, tolerance: 0.0, pass: observed >= target, provenance, note: String::new() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Kolmogorov–Smirnov statistic and its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS test of sorted `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    let n = samples.len();
    if n < 100 {
        return domain(format!("KS test needs at least 100 samples, got {n}"));
    }
    if samples.windows(2).any(|w| !(w[0] <= w[1])) {
        return domain("KS samples must be sorted and free of NaN");
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let sq = nf.sqrt();
    let p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    Ok(KsResult { n, statistic: d, p_value: p })
}

/// KS verdict: passes iff the p-value exceeds `level`.
pub fn ks_test<F: Fn(f64) -> f64>(name: impl Into<String>, samples: &[f64], cdf: F, level: f64) -> Result<Verdict> {
    let r = ks_statistic(samples, cdf)?;
    Ok(Verdict {
        name: name.into(),
        observed: r.p_value,
        target: level,
        tolerance: level,
        pass: r.p_value > level,
        provenance: Provenance::ClosedForm,
        note: format!("D = {:.5}, n = {}, pass iff p > {level}", r.statistic, r.n),
    })
}

/// Two-sample KS test; both inputs sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 100 || b.len() < 100 {
        return domain("two-sample KS needs at least 100 samples on each side");
    }
    if a.windows(2).chain(b.windows(2)).any(|w| !(w[0] <= w[1])) {
        return domain("KS samples must be sorted and free of NaN");
    }
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    Ok(KsResult { n: n.min(m), statistic: d, p_value: kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d) })
}
