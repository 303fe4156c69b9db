use crate::error::{domain, Result};
use crate::integrate::{integrate_with_breaks, Tolerance};

/// A density on `[0, ∞)`: either a closed-form family or a tabulation.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Exponential { rate: f64 },
    Uniform { upper: f64 },
    Tabulated(Table),
}

/// Piecewise-linear function on a strictly increasing grid, zero outside it.
///
/// Tail moments `∫_y^∞ v^k φ(v) dv` for `k ≤ 5` are exact for the
/// interpolant and precomputed as suffix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    ys: Vec<f64>,
    vals: Vec<f64>,
    tails: Vec<[f64; 6]>,
}

const BINOM: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0, 0.0],
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0],
];

/// `∫_{y0}^{y0+h} v^k ℓ(v) dv` where ℓ is linear from `p0` to `p1`.
fn segment_moment(k: usize, y0: f64, h: f64, p0: f64, p1: f64) -> f64 {
    let mut acc = 0.0;
    let mut hp = h;
    for j in 0..=k {
        let jf = j as f64;
        let inner = p0 / ((jf + 1.0) * (jf + 2.0)) + p1 / (jf + 2.0);
        acc += BINOM[k][j] * y0.powi((k - j) as i32) * hp * inner;
        hp *= h;
    }
    acc
}

impl Table {
    /// Nonnegative tabulation, renormalized to unit trapezoidal mass.
    pub fn new(ys: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        if vals.iter().any(|&v| v < 0.0) {
            return domain("tabulated density has negative values");
        }
        Self::build(ys, vals)
    }

    /// Tabulation of a signed function with unit integral, renormalized the
    /// same way. Used for first-order expansion densities.
    pub fn new_signed(ys: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        Self::build(ys, vals)
    }

    fn build(ys: Vec<f64>, mut vals: Vec<f64>) -> Result<Self> {
        if ys.len() < 2 || ys.len() != vals.len() {
            return domain("tabulation needs at least two (y, value) pairs of equal length");
        }
        if ys[0] < 0.0 {
            return domain("tabulated density must live on [0, ∞)");
        }
        if ys.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("tabulation grid must be strictly increasing");
        }
        if vals.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return domain("tabulation contains non-finite entries");
        }
        let mass: f64 = ys.windows(2).zip(vals.windows(2)).map(|(y, v)| 0.5 * (y[1] - y[0]) * (v[0] + v[1])).sum();
        if !(mass > 0.0) {
            return domain("tabulation has no positive mass");
        }
        for v in &mut vals {
            *v /= mass;
        }
        let n = ys.len();
        let mut tails = vec![[0.0; 6]; n];
        for i in (0..n - 1).rev() {
            let h = ys[i + 1] - ys[i];
            for k in 0..6 {
                tails[i][k] = tails[i + 1][k] + segment_moment(k, ys[i], h, vals[i], vals[i + 1]);
            }
        }
        Ok(Self { ys, vals, tails })
    }

    pub fn knots(&self) -> &[f64] {
        &self.ys
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Index `i` with `ys[i] <= y < ys[i+1]`, for `y` inside the grid.
    fn segment(&self, y: f64) -> usize {
        let i = self.ys.partition_point(|&k| k <= y);
        i.saturating_sub(1).min(self.ys.len() - 2)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let n = self.ys.len();
        if y < self.ys[0] || y > self.ys[n - 1] || y.is_nan() {
            return 0.0;
        }
        let i = self.segment(y);
        let w = (y - self.ys[i]) / (self.ys[i + 1] - self.ys[i]);
        self.vals[i] + w * (self.vals[i + 1] - self.vals[i])
    }

    pub fn tail_moment(&self, k: usize, y: f64) -> f64 {
        let n = self.ys.len();
        if y <= self.ys[0] {
            return self.tails[0][k];
        }
        if y >= self.ys[n - 1] {
            return 0.0;
        }
        let i = self.segment(y);
        segment_moment(k, y, self.ys[i + 1] - y, self.eval(y), self.vals[i + 1]) + self.tails[i + 1][k]
    }

    fn quantile(&self, p: f64) -> f64 {
        // Upper tail mass left to consume, found by bisection over knots.
        let target = 1.0 - p;
        let n = self.ys.len();
        let i = self.tails.partition_point(|t| t[0] > target).saturating_sub(1).min(n - 2);
        let need = self.tails[i][0] - target;
        let (y0, h) = (self.ys[i], self.ys[i + 1] - self.ys[i]);
        let p0 = self.vals[i];
        let slope = (self.vals[i + 1] - p0) / h;
        let disc = (p0 * p0 + 2.0 * slope * need).max(0.0);
        let denom = p0 + disc.sqrt();
        let x = if denom > 0.0 { 2.0 * need / denom } else { 0.0 };
        (y0 + x.clamp(0.0, h)).min(self.ys[n - 1])
    }
}

impl DensitySpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return domain(format!("exponential rate must be positive, got {rate}"));
        }
        Ok(DensitySpec::Exponential { rate })
    }

    pub fn uniform(upper: f64) -> Result<Self> {
        if !(upper > 0.0 && upper.is_finite()) {
            return domain(format!("uniform upper bound must be positive, got {upper}"));
        }
        Ok(DensitySpec::Uniform { upper })
    }

    pub fn tabulated(ys: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        Ok(DensitySpec::Tabulated(Table::new(ys, vals)?))
    }

    pub fn pdf(&self, y: f64) -> f64 {
        match *self {
            DensitySpec::Exponential { rate } => {
                if y >= 0.0 { rate * (-rate * y).exp() } else { 0.0 }
            }
            DensitySpec::Uniform { upper } => {
                if (0.0..=upper).contains(&y) { 1.0 / upper } else { 0.0 }
            }
            DensitySpec::Tabulated(ref t) => t.eval(y),
        }
    }

    /// `∫_y^∞ v^k φ(v) dv` for `k ≤ 5`.
    pub fn tail_moment(&self, k: usize, y: f64) -> f64 {
        assert!(k <= 5, "tail moments are provided up to order 5");
        match *self {
            DensitySpec::Exponential { rate } => {
                let y = y.max(0.0);
                // e^{-δy} Σ_j k!/j! y^j δ^{j-k}
                let mut acc = 0.0;
                let mut fact_ratio = 1.0;
                for j in (0..=k).rev() {
                    acc += fact_ratio * y.powi(j as i32) * rate.powi(j as i32 - k as i32);
                    fact_ratio *= j as f64;
                }
                acc * (-rate * y).exp()
            }
            DensitySpec::Uniform { upper } => {
                let y = y.max(0.0);
                if y >= upper {
                    0.0
                } else {
                    let kp = (k + 1) as f64;
                    (upper.powi(k as i32 + 1) - y.powi(k as i32 + 1)) / (kp * upper)
                }
            }
            DensitySpec::Tabulated(ref t) => t.tail_moment(k, y),
        }
    }

    /// `1 − Φ(y)`.
    pub fn sf(&self, y: f64) -> f64 {
        self.tail_moment(0, y)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        match *self {
            DensitySpec::Exponential { rate } => {
                if y > 0.0 { -(-rate * y).exp_m1() } else { 0.0 }
            }
            _ => 1.0 - self.sf(y),
        }
    }

    pub fn moment(&self, k: usize) -> f64 {
        self.tail_moment(k, 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            DensitySpec::Exponential { rate } => -(-p).ln_1p() / rate,
            DensitySpec::Uniform { upper } => p * upper,
            DensitySpec::Tabulated(ref t) => t.quantile(p),
        }
    }

    /// Right end of the support (infinite for the exponential family).
    pub fn support_end(&self) -> f64 {
        match *self {
            DensitySpec::Exponential { .. } => f64::INFINITY,
            DensitySpec::Uniform { upper } => upper,
            DensitySpec::Tabulated(ref t) => *t.ys.last().expect("nonempty grid"),
        }
    }

    /// Points where the density has kinks or jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            DensitySpec::Exponential { .. } => Vec::new(),
            DensitySpec::Uniform { upper } => vec![upper],
            DensitySpec::Tabulated(ref t) if t.ys.len() <= 64 => t.ys.clone(),
            DensitySpec::Tabulated(ref t) => vec![t.ys[0], *t.ys.last().unwrap()],
        }
    }

    /// `∫_lo^∞ g(v) φ(v) dv` by adaptive quadrature.
    pub fn integrate_from<G: FnMut(f64) -> f64>(&self, lo: f64, mut g: G, tol: Tolerance) -> f64 {
        let lo = lo.max(0.0);
        let hi = self.support_end();
        if lo >= hi {
            return 0.0;
        }
        let brks = self.breakpoints();
        integrate_with_breaks(|v| g(v) * self.pdf(v), lo, hi, &brks, tol).value
    }

    pub fn label(&self) -> String {
        match *self {
            DensitySpec::Exponential { rate } => format!("exponential:{rate}"),
            DensitySpec::Uniform { upper } => format!("uniform:{upper}"),
            DensitySpec::Tabulated(ref t) => format!("tabulated:{}", t.ys.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate;

    fn numeric_tail(d: &DensitySpec, k: usize, y: f64) -> f64 {
        d.integrate_from(y, |v| v.powi(k as i32), Tolerance::tight())
    }

    #[test]
    fn closed_form_tails_match_quadrature() {
        let specs = [DensitySpec::exponential(1.3).unwrap(), DensitySpec::uniform(2.0).unwrap()];
        for d in &specs {
            for k in 0..=5 {
                for &y in &[0.0, 0.4, 1.7] {
                    let a = d.tail_moment(k, y);
                    let b = numeric_tail(d, k, y);
                    assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{d:?} k={k} y={y}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn tabulated_is_renormalized_and_exact() {
        let d = DensitySpec::tabulated(vec![0.0, 0.5, 2.0, 3.0], vec![1.0, 3.0, 0.5, 0.0]).unwrap();
        assert!((d.sf(0.0) - 1.0).abs() < 1e-14);
        for k in 0..=5 {
            for &y in &[0.0, 0.2, 0.5, 1.1, 2.9] {
                let a = d.tail_moment(k, y);
                let b = integrate_with_breaks(|v| v.powi(k as i32) * d.pdf(v), y, 3.0, &[0.5, 2.0], Tolerance::tight()).value;
                assert!((a - b).abs() < 1e-12, "k={k} y={y}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let specs = [
            DensitySpec::exponential(0.7).unwrap(),
            DensitySpec::uniform(3.0).unwrap(),
            DensitySpec::tabulated(vec![0.0, 0.5, 2.0, 3.0], vec![0.0, 3.0, 0.5, 0.2]).unwrap(),
        ];
        for d in &specs {
            for &p in &[1e-6, 0.1, 0.5, 0.93, 0.999] {
                let q = d.quantile(p);
                assert!((d.cdf(q) - p).abs() < 1e-12, "{d:?} p={p}");
            }
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(DensitySpec::tabulated(vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(DensitySpec::tabulated(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(DensitySpec::tabulated(vec![-1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Table::new_signed(vec![0.0, 1.0], vec![-1.0, 3.0]).is_ok());
    }

    #[test]
    fn uniform_mass_one() {
        let d = DensitySpec::uniform(1.0).unwrap();
        let m = integrate(|v| d.pdf(v), 0.0, 1.0, Tolerance::tight()).value;
        assert!((m - 1.0).abs() < 1e-14);
    }
}
