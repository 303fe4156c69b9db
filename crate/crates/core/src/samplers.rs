//! Seeded path simulation and exact samplers for the limit laws.
//!
//! Brownian paths carry two running maxima: `runmax` over the grid values,
//! and `sup`, the continuous-time maximum obtained by drawing the maximum of
//! the Brownian bridge across each step. `sup` is exact in law at grid times.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, precondition, Error, Result};
use crate::exact_laws::{fbar, BivariatePenalty, DensitySpec, SupportBox};

/// Identifies a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream_id);
        r
    }

    /// A derived stream for sub-task `i`, e.g. one Monte Carlo chunk.
    pub fn fork(&self, i: u64) -> Self {
        Self { seed: self.seed, stream_id: splitmix64(self.stream_id ^ splitmix64(i.wrapping_add(1))) }
    }
}

/// A simulated path on the grid `0, δ, 2δ, …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub step: f64,
    pub values: Vec<f64>,
    pub runmax: Vec<f64>,
    /// Continuous-time running maximum at grid times, when simulated.
    pub sup: Option<Vec<f64>>,
    /// Level the path was conditioned to reach, if any.
    pub level: Option<f64>,
    /// First grid index at or after the passage of `level`.
    pub hit_index: Option<usize>,
    /// First passage time of `level`, possibly past the simulated horizon.
    pub hit_time: Option<f64>,
}

impl Path {
    fn from_values(step: f64, values: Vec<f64>) -> Self {
        let runmax = running_max(&values);
        Self { step, values, runmax, sup: None, level: None, hit_index: None, hit_time: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    pub fn index_at(&self, t: f64) -> usize {
        ((t / self.step).round() as usize).min(self.values.len() - 1)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.values[self.index_at(t)]
    }

    /// Running maximum at time `t`: continuous when available, else grid.
    pub fn max_at(&self, t: f64) -> f64 {
        let k = self.index_at(t);
        self.sup.as_ref().map_or(self.runmax[k], |s| s[k])
    }

    pub fn overall_max(&self) -> f64 {
        self.max_at(self.horizon())
    }

    /// Write `t,x,s` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,s")?;
        for k in 0..self.values.len() {
            let s = self.sup.as_ref().map_or(self.runmax[k], |s| s[k]);
            writeln!(w, "{},{},{}", k as f64 * self.step, self.values[k], s)?;
        }
        Ok(())
    }
}

fn running_max(values: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            m = m.max(v);
            m
        })
        .collect()
}

fn grid_len(horizon: f64, step: f64) -> Result<usize> {
    if !(horizon > 0.0 && horizon.is_finite() && step > 0.0 && step <= horizon) {
        return domain(format!("need horizon > 0 and 0 < δ ≤ horizon, got horizon {horizon}, δ {step}"));
    }
    let n = (horizon / step - 1e-9).ceil() as usize;
    Ok(n.max(1) + 1)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform on `(0, 1]`, safe for logarithms.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Maximum over a step of length `dt` of a Brownian bridge from `x0` to `x1`.
pub fn bridge_max<R: Rng + ?Sized>(x0: f64, x1: f64, dt: f64, rng: &mut R) -> f64 {
    let d = x1 - x0;
    0.5 * (x0 + x1 + (d * d - 2.0 * dt * open_unit(rng).ln()).sqrt())
}

/// Exact draw of `(X_t, S_t)` for Brownian motion with the given drift.
pub fn endpoint_and_max<R: Rng + ?Sized>(t: f64, drift: f64, rng: &mut R) -> (f64, f64) {
    let x = drift * t + t.sqrt() * normal(rng);
    (x, bridge_max(0.0, x, t, rng))
}

/// Whether to draw the continuous maximum across each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    GridOnly,
    Bridge,
}

pub fn bm_path<R: Rng + ?Sized>(horizon: f64, step: f64, drift: f64, crossing: Crossing, rng: &mut R) -> Result<Path> {
    let n = grid_len(horizon, step)?;
    if !drift.is_finite() {
        return domain("drift must be finite");
    }
    let sd = step.sqrt();
    let mut values = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(if crossing == Crossing::Bridge { n } else { 0 });
    let (mut x, mut m) = (0.0, 0.0);
    values.push(0.0);
    if crossing == Crossing::Bridge {
        sup.push(0.0);
    }
    for _ in 1..n {
        let x1 = x + drift * step + sd * normal(rng);
        if crossing == Crossing::Bridge {
            m = f64::max(m, bridge_max(x, x1, step, rng));
            sup.push(m);
        }
        values.push(x1);
        x = x1;
    }
    let mut p = Path::from_values(step, values);
    if crossing == Crossing::Bridge {
        p.sup = Some(sup);
    }
    Ok(p)
}

fn norm3<R: Rng + ?Sized>(base: f64, scale: f64, rng: &mut R) -> f64 {
    let (a, b, c) = (base + scale * normal(rng), scale * normal(rng), scale * normal(rng));
    (a * a + b * b + c * c).sqrt()
}

/// Bessel(3) from 0 as the norm of a three-dimensional Brownian motion.
pub fn bessel3_path<R: Rng + ?Sized>(horizon: f64, step: f64, rng: &mut R) -> Result<Path> {
    let n = grid_len(horizon, step)?;
    let sd = step.sqrt();
    let mut v = [0.0f64; 3];
    let mut values = Vec::with_capacity(n);
    values.push(0.0);
    for _ in 1..n {
        for c in v.iter_mut() {
            *c += sd * normal(rng);
        }
        values.push((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
    }
    Ok(Path::from_values(step, values))
}

/// Euler scheme for `dR = dt/R + dB`, reflected at 0, with the drift
/// evaluated at `max(R, √δ)`.
pub fn bessel3_sde_path<R: Rng + ?Sized>(horizon: f64, step: f64, rng: &mut R) -> Result<Path> {
    let n = grid_len(horizon, step)?;
    let sd = step.sqrt();
    let mut values = Vec::with_capacity(n);
    let mut r: f64 = 0.0;
    values.push(0.0);
    for _ in 1..n {
        r = (r + step / r.max(sd) + sd * normal(rng)).abs();
        values.push(r);
    }
    Ok(Path::from_values(step, values))
}

/// `|Z|` conditioned on `|Z| ≥ z0`.
fn abs_normal_tail<R: Rng + ?Sized>(z0: f64, rng: &mut R) -> f64 {
    if z0 < 1.0 {
        loop {
            let z = normal(rng).abs();
            if z >= z0 {
                return z;
            }
        }
    }
    loop {
        let x = -open_unit(rng).ln() / z0;
        let y = -open_unit(rng).ln();
        if 2.0 * y > x * x {
            return z0 + x;
        }
    }
}

/// Options for [`sample_q_y`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QyOptions {
    pub crossing: Crossing,
    /// Reject draws whose passage time exceeds this cap.
    pub cap: Option<f64>,
}

impl Default for QyOptions {
    fn default() -> Self {
        Self { crossing: Crossing::Bridge, cap: None }
    }
}

/// A path of `Q^{(y)}`: Brownian motion until `T_y`, then `y` minus an
/// independent Bessel(3) process.
///
/// With [`Crossing::Bridge`] a passage inside a step is detected through the
/// bridge maximum, the passage time is drawn exactly from `T_a | T_a ≤ δ`,
/// and the Bessel(3) segment starts at that time. When the level is not
/// reached on the grid, `hit_time` is completed exactly past the horizon.
pub fn sample_q_y<R: Rng + ?Sized>(y: f64, horizon: f64, step: f64, opts: QyOptions, rng: &mut R) -> Result<Path> {
    if !(y > 0.0 && y.is_finite()) {
        return domain(format!("level must be positive, got {y}"));
    }
    let n = grid_len(horizon, step)?;
    let sd = step.sqrt();
    let bridge = opts.crossing == Crossing::Bridge;
    let mut values = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n);
    values.push(0.0);
    sup.push(0.0);
    let (mut x, mut m) = (0.0f64, 0.0f64);
    let mut hit: Option<(usize, f64)> = None;
    let mut k = 1;
    while k < n {
        let x1 = x + sd * normal(rng);
        let top = if bridge { bridge_max(x, x1, step, rng) } else { x1 };
        if top < y {
            m = m.max(top);
            values.push(x1);
            sup.push(m);
            x = x1;
            k += 1;
            continue;
        }
        if bridge {
            let a = y - x;
            let z = abs_normal_tail(a / sd, rng);
            let tau = (a / z).powi(2).min(step);
            values.push(y - norm3(0.0, (step - tau).sqrt(), rng));
            hit = Some((k, (k - 1) as f64 * step + tau));
        } else {
            values.push(y);
            hit = Some((k, k as f64 * step));
        }
        sup.push(y);
        k += 1;
        break;
    }
    if hit.is_some() {
        let mut r = y - values[values.len() - 1];
        while k < n {
            r = norm3(r, sd, rng);
            values.push(y - r);
            sup.push(y);
            k += 1;
        }
    }
    let hit_time = match hit {
        Some((_, t)) => t,
        None => {
            let a = y - x;
            let z = normal(rng);
            (values.len() - 1) as f64 * step + (a / z).powi(2)
        }
    };
    if let Some(cap) = opts.cap {
        if hit_time > cap {
            return Err(Error::RareEvent { level: y, cap, attempts: (n - 1) as u64 });
        }
    }
    let mut p = Path::from_values(step, values);
    p.level = Some(y);
    p.hit_index = hit.map(|(k, _)| k);
    p.hit_time = Some(hit_time);
    if bridge {
        p.sup = Some(sup);
    }
    Ok(p)
}

/// A path of `Q^{a,y}`: the atom `Q^{(y)}` with probability `(y − a)/(2y − a)`,
/// otherwise `Q^{(z)}` with `z` uniform on `[0, y]`.
pub fn sample_q_ay<R: Rng + ?Sized>(a: f64, y: f64, horizon: f64, step: f64, opts: QyOptions, rng: &mut R) -> Result<Path> {
    if !(y > a.max(0.0) && y.is_finite() && a.is_finite()) {
        return domain(format!("need y > a₊, got a = {a}, y = {y}"));
    }
    let atom = (y - a) / (2.0 * y - a);
    let level = if rng.random::<f64>() < atom { y } else { y * open_unit(rng) };
    sample_q_y(level, horizon, step, opts, rng)
}

/// A path of `Q^φ`: draw the overall maximum from `φ`, then follow `Q^{(y)}`.
pub fn sample_q_phi<R: Rng + ?Sized>(phi: &DensitySpec, horizon: f64, step: f64, opts: QyOptions, rng: &mut R) -> Result<Path> {
    let y = phi.quantile(open_unit(rng).min(1.0 - 1e-16));
    sample_q_y(y.max(f64::MIN_POSITIVE), horizon, step, opts, rng)
}

#[derive(Debug, Clone)]
enum PairLaw {
    /// Density `∝ (y + w) e^{−νy − μw}` in `(y, w = y − a)`, a two-component
    /// gamma/exponential mixture.
    Exponential { nu: f64, mu: f64, p_first: f64 },
    Boxed { f: BivariatePenalty, bx: SupportBox, bound: f64, efficiency: f64 },
}

/// Sampler for the pair `(a, y)` with density `f⋆ (2y − a) f(a, y)` on `{y > a₊}`.
#[derive(Debug, Clone)]
pub struct QfSampler {
    law: PairLaw,
}

/// Acceptance rates below this are treated as a configuration error.
pub const MIN_EFFICIENCY: f64 = 1e-6;

impl QfSampler {
    pub fn new(f: &BivariatePenalty) -> Result<Self> {
        let Some(fb) = fbar(f).finite() else {
            return precondition("f̄ is infinite; the penalty does not normalize");
        };
        let law = match *f {
            BivariatePenalty::ExponentialBivariate { lambda, mu } => {
                let nu = -(lambda + mu);
                PairLaw::Exponential { nu, mu, p_first: mu / (mu + nu) }
            }
            _ => {
                let bx = f.support_box().expect("bounded family");
                let y_lo = bx.y_lo.max(0.0);
                let area = (bx.a_hi - bx.a_lo) * (bx.y_hi - y_lo);
                let bound = (2.0 * bx.y_hi - bx.a_lo) * bx.f_max;
                let efficiency = fb / (area * bound);
                if !(efficiency >= MIN_EFFICIENCY) {
                    return Err(Error::Config(format!("rejection efficiency {efficiency:.3e} is below {MIN_EFFICIENCY:e}")));
                }
                PairLaw::Boxed { f: f.clone(), bx: SupportBox { y_lo, ..bx }, bound, efficiency }
            }
        };
        Ok(Self { law })
    }

    /// Expected acceptance rate of one proposal.
    pub fn efficiency(&self) -> f64 {
        match self.law {
            PairLaw::Exponential { .. } => 1.0,
            PairLaw::Boxed { efficiency, .. } => efficiency,
        }
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.law {
            PairLaw::Exponential { nu, mu, p_first } => {
                let e = |r: &mut R| -open_unit(r).ln();
                let (y, w) = if rng.random::<f64>() < p_first {
                    ((e(rng) + e(rng)) / nu, e(rng) / mu)
                } else {
                    (e(rng) / nu, (e(rng) + e(rng)) / mu)
                };
                (y - w, y)
            }
            PairLaw::Boxed { ref f, bx, bound, .. } => loop {
                let a = bx.a_lo + (bx.a_hi - bx.a_lo) * rng.random::<f64>();
                let y = bx.y_lo + (bx.y_hi - bx.y_lo) * rng.random::<f64>();
                let dens = if y > a.max(0.0) { (2.0 * y - a) * f.value(a, y) } else { 0.0 };
                if rng.random::<f64>() * bound < dens {
                    return (a, y);
                }
            },
        }
    }
}

/// A path of the limit law for the penalty `f(X_t, S_t)`.
pub fn sample_q_f<R: Rng + ?Sized>(sampler: &QfSampler, horizon: f64, step: f64, opts: QyOptions, rng: &mut R) -> Result<Path> {
    let (a, y) = sampler.sample_pair(rng);
    sample_q_ay(a, y, horizon, step, opts, rng)
}

/// `2S − X`, using the continuous maximum when the path carries one.
pub fn pitman_transform(p: &Path) -> Path {
    let m = p.sup.as_ref().unwrap_or(&p.runmax);
    let values = p.values.iter().zip(m).map(|(&x, &s)| 2.0 * s - x).collect();
    Path::from_values(p.step, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_laws::{h_cdf, hitting_time_cdf};
    use crate::harness::ks_statistic;

    fn rng(id: u64) -> ChaCha8Rng {
        RngStream::new(7, id).rng()
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let a = bm_path(1.0, 0.01, 0.0, Crossing::Bridge, &mut rng(1)).unwrap();
        let b = bm_path(1.0, 0.01, 0.0, Crossing::Bridge, &mut rng(1)).unwrap();
        let c = bm_path(1.0, 0.01, 0.0, Crossing::Bridge, &mut rng(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        let s = RngStream::new(7, 1);
        assert_ne!(s.fork(0), s.fork(1));
        assert_eq!(s.fork(3), s.fork(3));
    }

    #[test]
    fn path_invariants() {
        let p = bm_path(2.0, 0.01, 0.3, Crossing::Bridge, &mut rng(3)).unwrap();
        assert_eq!(p.len(), 201);
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.runmax[0], 0.0);
        let sup = p.sup.as_ref().unwrap();
        for k in 1..p.len() {
            assert!(p.runmax[k] >= p.runmax[k - 1] && p.runmax[k] >= p.values[k]);
            assert!(sup[k] >= sup[k - 1] && sup[k] >= p.runmax[k]);
        }
        assert!(bm_path(1.0, 0.0, 0.0, Crossing::Bridge, &mut rng(3)).is_err());
        assert!(bm_path(1.0, 2.0, 0.0, Crossing::Bridge, &mut rng(3)).is_err());
    }

    #[test]
    fn drifted_mean() {
        let mut r = rng(4);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| bm_path(1.0, 0.05, 0.7, Crossing::GridOnly, &mut r).unwrap().value_at(1.0)).sum::<f64>() / n as f64;
        assert!((mean - 0.7).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn exact_maximum_law() {
        let mut r = rng(5);
        let mut s: Vec<f64> = (0..5000).map(|_| endpoint_and_max(1.0, 0.0, &mut r).1).collect();
        s.sort_by(f64::total_cmp);
        let ks = ks_statistic(&s, |y| h_cdf(1.0, y).unwrap()).unwrap();
        assert!(ks.p_value > 1e-3, "{ks:?}");
    }

    #[test]
    fn bessel_paths_are_nonnegative() {
        for p in [bessel3_path(1.0, 0.01, &mut rng(6)).unwrap(), bessel3_sde_path(1.0, 0.01, &mut rng(6)).unwrap()] {
            assert_eq!(p.values[0], 0.0);
            assert!(p.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn q_y_never_exceeds_level_after_hit() {
        let mut r = rng(8);
        for _ in 0..200 {
            let p = sample_q_y(0.5, 3.0, 0.01, QyOptions::default(), &mut r).unwrap();
            assert!(p.hit_time.is_some());
            let sup = p.sup.as_ref().unwrap();
            assert!(sup.iter().all(|&s| s <= 0.5));
            if let Some(k) = p.hit_index {
                assert_eq!(sup[k], 0.5);
                assert!(p.values[k..].iter().all(|&v| v <= 0.5));
            }
        }
        let p = sample_q_y(0.5, 3.0, 0.01, QyOptions { crossing: Crossing::GridOnly, cap: None }, &mut r).unwrap();
        assert!(p.values.iter().all(|&v| v <= 0.5));
    }

    #[test]
    fn q_y_passage_time_law() {
        let mut r = rng(9);
        let mut t: Vec<f64> = (0..3000)
            .map(|_| sample_q_y(1.0, 2.0, 0.01, QyOptions::default(), &mut r).unwrap().hit_time.unwrap())
            .collect();
        t.sort_by(f64::total_cmp);
        let ks = ks_statistic(&t, |s| hitting_time_cdf(1.0, s)).unwrap();
        assert!(ks.p_value > 1e-3, "{ks:?}");
    }

    #[test]
    fn q_y_cap_raises_rare_event() {
        let opts = QyOptions { cap: Some(1e-6), ..QyOptions::default() };
        let e = sample_q_y(5.0, 1.0, 0.01, opts, &mut rng(10)).unwrap_err();
        assert!(matches!(e, Error::RareEvent { .. }));
    }

    #[test]
    fn q_ay_at_a_equals_y_has_no_atom() {
        let mut r = rng(11);
        for _ in 0..500 {
            let p = sample_q_ay(1.0 - 1e-15, 1.0, 0.5, 0.05, QyOptions::default(), &mut r).unwrap();
            assert!(p.level.unwrap() < 1.0);
        }
    }

    #[test]
    fn tail_normal_sampler() {
        let mut r = rng(12);
        for &z0 in &[0.3, 1.0, 4.0] {
            let n = 20_000;
            let xs: Vec<f64> = (0..n).map(|_| abs_normal_tail(z0, &mut r)).collect();
            assert!(xs.iter().all(|&x| x >= z0));
            // Mean of |Z| beyond z0 is pdf(z0)/sf(z0).
            let want = crate::special::norm_pdf(z0) / crate::special::norm_sf(z0);
            let mean = xs.iter().sum::<f64>() / n as f64;
            assert!((mean - want).abs() < 0.02, "{z0}: {mean} vs {want}");
        }
    }

    #[test]
    fn pair_sampler_exponential_marginal() {
        let f = BivariatePenalty::ExponentialBivariate { lambda: -2.0, mu: 1.0 };
        let s = QfSampler::new(&f).unwrap();
        let mut r = rng(13);
        let ys: Vec<f64> = (0..5000).map(|_| s.sample_pair(&mut r).1).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        // E[y] = p₁·2/ν + p₂/ν with ν = μ = 1 and p₁ = 1/2.
        assert!((mean - 1.5).abs() < 0.06, "{mean}");
    }

    #[test]
    fn pair_sampler_rejects_divergent_and_inefficient() {
        let f = BivariatePenalty::ExponentialBivariate { lambda: 1.0, mu: 1.0 };
        assert!(matches!(QfSampler::new(&f), Err(Error::Precondition(_))));
        let g = crate::exact_laws::Grid2::new(
            vec![-1000.0, -0.001, 0.0],
            vec![0.0, 0.001, 1000.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(QfSampler::new(&BivariatePenalty::TabulatedGrid(g)), Err(Error::Config(_))));
    }

    #[test]
    fn pitman_output_nonnegative() {
        let p = bm_path(1.0, 0.01, 0.0, Crossing::Bridge, &mut rng(14)).unwrap();
        let q = pitman_transform(&p);
        assert_eq!(q.values[0], 0.0);
        assert!(q.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn csv_dump() {
        let p = bm_path(0.02, 0.01, 0.0, Crossing::Bridge, &mut rng(15)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("t,x,s\n0,0,0\n"));
    }
}
