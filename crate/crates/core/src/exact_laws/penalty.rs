use super::density::DensitySpec;
use crate::error::{domain, precondition, Result};
use crate::integrate::{integrate_with_breaks, Tolerance};

/// Piecewise-linear nonnegative function of one variable, zero off-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1 {
    xs: Vec<f64>,
    vals: Vec<f64>,
}

impl Grid1 {
    pub fn new(xs: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != vals.len() {
            return domain("grid needs at least two points and matching values");
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("grid must be strictly increasing");
        }
        if vals.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return domain("grid values must be finite and nonnegative");
        }
        Ok(Self { xs, vals })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if !(x >= self.xs[0] && x <= self.xs[n - 1]) {
            return 0.0;
        }
        let i = self.xs.partition_point(|&k| k <= x).saturating_sub(1).min(n - 2);
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.vals[i] + w * (self.vals[i + 1] - self.vals[i])
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn max_value(&self) -> f64 {
        self.vals.iter().copied().fold(0.0, f64::max)
    }
}

/// Bilinear nonnegative function on a rectangular `(a, y)` grid, zero off-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    a: Vec<f64>,
    y: Vec<f64>,
    /// Row-major in `a`: `vals[i * y.len() + j] = f(a[i], y[j])`.
    vals: Vec<f64>,
}

impl Grid2 {
    pub fn new(a: Vec<f64>, y: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        if a.len() < 2 || y.len() < 2 || vals.len() != a.len() * y.len() {
            return domain("grid needs at least 2x2 points and a full value table");
        }
        if a.windows(2).any(|w| !(w[1] > w[0])) || y.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("grid axes must be strictly increasing");
        }
        if y[0] < 0.0 {
            return domain("maximum axis must start at or above 0");
        }
        if vals.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return domain("grid values must be finite and nonnegative");
        }
        Ok(Self { a, y, vals })
    }

    pub fn eval(&self, a: f64, y: f64) -> f64 {
        let (na, ny) = (self.a.len(), self.y.len());
        if !(a >= self.a[0] && a <= self.a[na - 1] && y >= self.y[0] && y <= self.y[ny - 1]) {
            return 0.0;
        }
        let i = self.a.partition_point(|&k| k <= a).saturating_sub(1).min(na - 2);
        let j = self.y.partition_point(|&k| k <= y).saturating_sub(1).min(ny - 2);
        let wa = (a - self.a[i]) / (self.a[i + 1] - self.a[i]);
        let wy = (y - self.y[j]) / (self.y[j + 1] - self.y[j]);
        let v = |ii: usize, jj: usize| self.vals[ii * ny + jj];
        (1.0 - wa) * ((1.0 - wy) * v(i, j) + wy * v(i, j + 1)) + wa * ((1.0 - wy) * v(i + 1, j) + wy * v(i + 1, j + 1))
    }
}

/// Penalty `f(X_t, S_t)` evaluated on `{y ≥ a₊}`.
#[derive(Debug, Clone, PartialEq)]
pub enum BivariatePenalty {
    /// `f(a, y) = e^{λy + μa}`.
    ExponentialBivariate { lambda: f64, mu: f64 },
    /// `f(a, y) = f₁(a)·1_[0,A](y)` with `f₁` supported on `(−∞, A]`.
    SeparableIndicator { f1: Grid1, cutoff: f64 },
    TabulatedGrid(Grid2),
}

/// Extended-real result of [`fbar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FBar {
    Finite(f64),
    Infinite,
}

impl FBar {
    pub fn finite(self) -> Option<f64> {
        match self {
            FBar::Finite(v) => Some(v),
            FBar::Infinite => None,
        }
    }
}

/// Rectangle `[a_lo, a_hi] × [y_lo, y_hi]` containing the support, with a
/// bound on `f` over it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SupportBox {
    pub a_lo: f64,
    pub a_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub f_max: f64,
}

impl BivariatePenalty {
    pub fn separable(f1: Grid1, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return domain("cutoff must be positive");
        }
        if *f1.knots().last().unwrap() > cutoff {
            return domain("f₁ must be supported on (−∞, A]");
        }
        Ok(BivariatePenalty::SeparableIndicator { f1, cutoff })
    }

    /// `f(a, y)`; points outside `{y ≥ a₊}` are rejected.
    pub fn eval(&self, a: f64, y: f64) -> Result<f64> {
        if !(y >= a.max(0.0)) {
            return domain(format!("({a}, {y}) lies outside {{y ≥ a₊}}"));
        }
        Ok(self.value(a, y))
    }

    /// `f(a, y)` with zero off the domain.
    pub fn value(&self, a: f64, y: f64) -> f64 {
        if !(y >= a.max(0.0)) {
            return 0.0;
        }
        match *self {
            BivariatePenalty::ExponentialBivariate { lambda, mu } => (lambda * y + mu * a).exp(),
            BivariatePenalty::SeparableIndicator { ref f1, cutoff } => {
                if y <= cutoff { f1.eval(a) } else { 0.0 }
            }
            BivariatePenalty::TabulatedGrid(ref g) => g.eval(a, y),
        }
    }

    /// `ln f(a, y)`, or `−∞` where `f` vanishes.
    pub fn log_value(&self, a: f64, y: f64) -> f64 {
        match *self {
            BivariatePenalty::ExponentialBivariate { lambda, mu } if y >= a.max(0.0) => lambda * y + mu * a,
            _ => self.value(a, y).ln(),
        }
    }

    pub(crate) fn a_range(&self) -> (f64, f64) {
        match *self {
            BivariatePenalty::ExponentialBivariate { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            BivariatePenalty::SeparableIndicator { ref f1, .. } => (f1.xs[0], *f1.xs.last().unwrap()),
            BivariatePenalty::TabulatedGrid(ref g) => (g.a[0], *g.a.last().unwrap()),
        }
    }

    pub(crate) fn y_max(&self) -> f64 {
        match *self {
            BivariatePenalty::ExponentialBivariate { .. } => f64::INFINITY,
            BivariatePenalty::SeparableIndicator { cutoff, .. } => cutoff,
            BivariatePenalty::TabulatedGrid(ref g) => *g.y.last().unwrap(),
        }
    }

    pub(crate) fn a_breaks(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        match *self {
            BivariatePenalty::SeparableIndicator { ref f1, .. } if f1.xs.len() <= 64 => b.extend(&f1.xs),
            BivariatePenalty::TabulatedGrid(ref g) if g.a.len() <= 64 => b.extend(&g.a),
            _ => {}
        }
        b
    }

    pub(crate) fn y_breaks(&self) -> Vec<f64> {
        match *self {
            BivariatePenalty::TabulatedGrid(ref g) if g.y.len() <= 64 => g.y.clone(),
            BivariatePenalty::SeparableIndicator { cutoff, .. } => vec![cutoff],
            _ => Vec::new(),
        }
    }

    pub(crate) fn support_box(&self) -> Option<SupportBox> {
        match *self {
            BivariatePenalty::ExponentialBivariate { .. } => None,
            BivariatePenalty::SeparableIndicator { ref f1, cutoff } => Some(SupportBox {
                a_lo: f1.xs[0],
                a_hi: *f1.xs.last().unwrap(),
                y_lo: 0.0,
                y_hi: cutoff,
                f_max: f1.max_value(),
            }),
            BivariatePenalty::TabulatedGrid(ref g) => Some(SupportBox {
                a_lo: g.a[0],
                a_hi: *g.a.last().unwrap(),
                y_lo: g.y[0],
                y_hi: *g.y.last().unwrap(),
                f_max: g.vals.iter().copied().fold(0.0, f64::max),
            }),
        }
    }

    /// `∫da ∫_{max(y_min, a₊)}^{y_max} w(a, η) f(a, η) dη` over an optional
    /// window `a ∈ [a_lo, a_hi]`.
    pub(crate) fn integrate2<W: Fn(f64, f64) -> f64>(
        &self,
        y_min: f64,
        window: (f64, f64),
        w: W,
        tol: Tolerance,
    ) -> f64 {
        let (mut a_lo, mut a_hi) = self.a_range();
        a_lo = a_lo.max(window.0);
        a_hi = a_hi.min(window.1);
        let y_top = self.y_max();
        a_hi = a_hi.min(y_top);
        if !(a_hi > a_lo) {
            return 0.0;
        }
        let y_breaks = self.y_breaks();
        let mut a_breaks = self.a_breaks();
        if y_min > 0.0 {
            a_breaks.push(y_min);
        }
        let inner_tol = Tolerance { abs: tol.abs * 1e-2, rel: tol.rel * 1e-2, ..tol };
        integrate_with_breaks(
            |a| {
                let lo = y_min.max(a.max(0.0));
                if lo >= y_top {
                    return 0.0;
                }
                integrate_with_breaks(|eta| w(a, eta) * self.value(a, eta), lo, y_top, &y_breaks, inner_tol).value
            },
            a_lo,
            a_hi,
            &a_breaks,
            tol,
        )
        .value
    }
}

/// `f̄ = ∫da ∫_{a₊}^∞ (2y − a) f(a, y) dy`, or infinite.
pub fn fbar(f: &BivariatePenalty) -> FBar {
    match *f {
        BivariatePenalty::ExponentialBivariate { lambda, mu } => {
            let nu = lambda + mu;
            if mu > 0.0 && nu < 0.0 {
                FBar::Finite(-lambda / (mu * mu * nu * nu))
            } else {
                FBar::Infinite
            }
        }
        BivariatePenalty::SeparableIndicator { ref f1, cutoff } => {
            let brks = f1.xs.clone();
            let lo = f1.xs[0];
            let v = integrate_with_breaks(|a| (cutoff - a) * f1.eval(a), lo, cutoff, &brks, Tolerance::tight()).value;
            FBar::Finite(cutoff * v)
        }
        BivariatePenalty::TabulatedGrid(_) => fbar_numeric(f),
    }
}

/// Adaptive evaluation of `f̄` on growing boxes `[−L, L]²`; divergence is
/// declared once a partial value exceeds 1e12.
pub fn fbar_numeric(f: &BivariatePenalty) -> FBar {
    let tol = Tolerance::new(1e-11, 1e-10);
    let mut prev: Option<f64> = None;
    let mut l: f64 = 1.0;
    for _ in 0..12 {
        let y_cap = l.min(f.y_max());
        let v = truncated_fbar(f, l, y_cap, tol);
        if !(v <= 1e12) {
            return FBar::Infinite;
        }
        if let Some(p) = prev {
            if (v - p).abs() <= 1e-10 * v.abs().max(1e-300) {
                return if v > 0.0 { FBar::Finite(v) } else { FBar::Infinite };
            }
        }
        prev = Some(v);
        l *= 2.0;
    }
    FBar::Infinite
}

fn truncated_fbar(f: &BivariatePenalty, l: f64, y_cap: f64, tol: Tolerance) -> f64 {
    let (a_lo, a_hi) = f.a_range();
    let (a_lo, a_hi) = (a_lo.max(-l), a_hi.min(l).min(y_cap));
    if !(a_hi > a_lo) {
        return 0.0;
    }
    let y_breaks = f.y_breaks();
    integrate_with_breaks(
        |a| {
            let lo = a.max(0.0);
            integrate_with_breaks(|y| (2.0 * y - a) * f.value(a, y), lo, y_cap, &y_breaks, tol).value
        },
        a_lo,
        a_hi,
        &f.a_breaks(),
        tol,
    )
    .value
}

fn f_star(f: &BivariatePenalty) -> Result<f64> {
    match fbar(f) {
        FBar::Finite(v) if v > 0.0 => Ok(1.0 / v),
        FBar::Finite(v) => precondition(format!("f̄ = {v} is not positive")),
        FBar::Infinite => precondition("f̄ is infinite"),
    }
}

pub(crate) fn penalty_normalizer(f: &BivariatePenalty) -> Result<f64> {
    f_star(f)
}

/// Reduced density of the overall maximum, tabulated on an adaptive grid
/// whose midpoints reproduce linear interpolation to 2e-7.
pub fn phi_from_f(f: &BivariatePenalty) -> Result<DensitySpec> {
    let fs = f_star(f)?;
    let tol = Tolerance::new(1e-12, 1e-10);
    let phi = |y: f64| -> f64 {
        let first = f.integrate2(y, (f64::NEG_INFINITY, f64::INFINITY), |_, _| 1.0, tol);
        let (a_lo, _) = f.a_range();
        let mut brks = f.a_breaks();
        brks.retain(|&b| b < y);
        let second = integrate_with_breaks(|a| f.value(a, y) * (y - a), a_lo, y, &brks, tol).value;
        (fs * (first + second)).max(0.0)
    };
    let tail = |y: f64| fs * f.integrate2(y, (f64::NEG_INFINITY, f64::INFINITY), |a, eta| 2.0 * eta - a - y, tol);

    let mut top = f.y_max();
    if !top.is_finite() {
        top = 1.0;
        while tail(top) > 1e-10 {
            top *= 1.5;
            if top > 1e6 {
                return precondition("reduced density has no effective support below 1e6");
            }
        }
    }

    let mut anchors: Vec<f64> = (0..=64).map(|i| top * i as f64 / 64.0).collect();
    anchors.extend(f.y_breaks().into_iter().filter(|&b| b > 0.0 && b < top));
    anchors.sort_by(f64::total_cmp);
    anchors.dedup();

    let mut ys = vec![anchors[0]];
    let mut vs = vec![phi(anchors[0])];
    for w in anchors.windows(2) {
        refine(&phi, w[0], *vs.last().unwrap(), w[1], phi(w[1]), &mut ys, &mut vs, 0);
    }
    // Knots approached from the right of a jump keep the left limit.
    Ok(DensitySpec::Tabulated(super::density::Table::new(ys, vs)?))
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    phi: &F,
    l: f64,
    fl: f64,
    r: f64,
    fr: f64,
    ys: &mut Vec<f64>,
    vs: &mut Vec<f64>,
    depth: u32,
) {
    let m = 0.5 * (l + r);
    let fm = phi(m);
    if depth < 40 && r - l > 1e-7 && (fm - 0.5 * (fl + fr)).abs() > 2e-7 {
        refine(phi, l, fl, m, fm, ys, vs, depth + 1);
        refine(phi, m, fm, r, fr, ys, vs, depth + 1);
    } else {
        ys.push(m);
        vs.push(fm);
        ys.push(r);
        vs.push(fr);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_fbar_closed_form() {
        let f = BivariatePenalty::ExponentialBivariate { lambda: -2.0, mu: 1.0 };
        assert_eq!(fbar(&f), FBar::Finite(2.0));
        let g = BivariatePenalty::ExponentialBivariate { lambda: 0.0, mu: -1.0 };
        assert_eq!(fbar(&g), FBar::Infinite);
    }

    #[test]
    fn numeric_fbar_agrees_on_exponential_family() {
        for &(l, m) in &[(-2.0, 1.0), (-3.0, 0.5), (-1.5, 1.0)] {
            let f = BivariatePenalty::ExponentialBivariate { lambda: l, mu: m };
            let exact = fbar(&f).finite().unwrap();
            let num = fbar_numeric(&f).finite().unwrap();
            assert!((num - exact).abs() < 1e-7 * exact, "({l},{m}) {num} vs {exact}");
        }
        for &(l, m) in &[(0.0, -1.0), (1.0, 1.0), (-1.0, 2.0)] {
            let f = BivariatePenalty::ExponentialBivariate { lambda: l, mu: m };
            assert_eq!(fbar_numeric(&f), FBar::Infinite, "({l},{m})");
        }
    }

    #[test]
    fn separable_fbar_and_reduction() {
        let f1 = Grid1::new(vec![-1.0, 0.0, 0.5], vec![0.2, 1.0, 0.4]).unwrap();
        let f = BivariatePenalty::separable(f1.clone(), 0.8).unwrap();
        let fb = fbar(&f).finite().unwrap();
        let num = fbar_numeric(&f).finite().unwrap();
        assert!((fb - num).abs() < 1e-9, "{fb} vs {num}");
        let phi = phi_from_f(&f).unwrap();
        for &y in &[0.0, 0.1, 0.4, 0.79] {
            assert!((phi.pdf(y) - 1.0 / 0.8).abs() < 1e-6, "y={y}: {}", phi.pdf(y));
        }
        assert_eq!(phi.pdf(0.9), 0.0);
    }

    #[test]
    fn evaluation_outside_domain_is_an_error() {
        let f = BivariatePenalty::ExponentialBivariate { lambda: -2.0, mu: 1.0 };
        assert!(f.eval(1.0, 0.5).is_err());
        assert!(f.eval(-1.0, -0.1).is_err());
        assert!((f.eval(0.5, 0.8).unwrap() - (-1.6f64 + 0.5).exp()).abs() < 1e-15);
    }
}
