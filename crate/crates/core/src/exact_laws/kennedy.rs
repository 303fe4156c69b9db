use super::density::{DensitySpec, Table};
use crate::error::{domain, precondition, Error, Result};

/// A nonnegative profile `ψ = factor · base` with `∫ψ(z)e^{-λz}dz = 1`.
///
/// The scaled tail `T̃(y) = ∫_y^∞ ψ(z) e^{-λ(z-y)} dz` is what the Kennedy
/// martingale needs; it is closed-form for the parametric families and a
/// precomputed suffix recursion over the knots for tabulations.
#[derive(Debug, Clone, PartialEq)]
pub struct KennedyProfile {
    base: DensitySpec,
    factor: f64,
    lambda: f64,
    knot_tails: Vec<f64>,
}

/// `∫_0^d ℓ(s) e^{-λs} ds` for ℓ linear from `p0` to `p1`.
fn linear_exp(lambda: f64, d: f64, p0: f64, p1: f64) -> f64 {
    let x = lambda * d;
    let e1 = -(-x).exp_m1() / lambda;
    let e2 = if x < 0.05 {
        d * d * (0.5 - x / 3.0 + x * x / 8.0 - x.powi(3) / 30.0 + x.powi(4) / 144.0 - x.powi(5) / 840.0)
    } else {
        (-(-x).exp_m1() - x * (-x).exp()) / (lambda * lambda)
    };
    p0 * e1 + (p1 - p0) / d * e2
}

impl KennedyProfile {
    /// Scale `base` so that the exponential normalization holds exactly.
    pub fn normalized(base: DensitySpec, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let mut p = Self { base, factor: 1.0, lambda, knot_tails: Vec::new() };
        p.build_tails();
        let z = p.scaled_tail(0.0);
        p.factor = 1.0 / z;
        p.build_tails();
        Ok(p)
    }

    /// Use `factor · base` as given, checking the normalization to 1e-6.
    pub fn new(base: DensitySpec, factor: f64, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(factor > 0.0 && factor.is_finite()) {
            return domain(format!("profile factor must be positive, got {factor}"));
        }
        let mut p = Self { base, factor, lambda, knot_tails: Vec::new() };
        p.build_tails();
        let z = p.scaled_tail(0.0);
        if (z - 1.0).abs() > 1e-6 {
            return precondition(format!("∫ψ(z)e^(-λz)dz = {z}, expected 1"));
        }
        Ok(p)
    }

    /// `ψ = c₀·1_[0,A]` with `c₀ = λ/(1 − e^{-λA})`.
    pub fn indicator(upper: f64, lambda: f64) -> Result<Self> {
        Self::normalized(DensitySpec::uniform(upper)?, lambda)
    }

    fn build_tails(&mut self) {
        if let DensitySpec::Tabulated(ref t) = self.base {
            let (ys, vs) = (t.knots(), t.values());
            let n = ys.len();
            let mut tails = vec![0.0; n];
            for i in (0..n - 1).rev() {
                let h = ys[i + 1] - ys[i];
                let seg = self.factor * linear_exp(self.lambda, h, vs[i], vs[i + 1]);
                tails[i] = seg + (-self.lambda * h).exp() * tails[i + 1];
            }
            self.knot_tails = tails;
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn base(&self) -> &DensitySpec {
        &self.base
    }

    pub fn psi(&self, y: f64) -> f64 {
        self.factor * self.base.pdf(y)
    }

    /// `∫_y^∞ ψ(z) dz`.
    pub fn tail_mass(&self, y: f64) -> f64 {
        self.factor * self.base.sf(y)
    }

    /// `T̃(y) = e^{λy} ∫_y^∞ ψ(z) e^{-λz} dz`.
    pub fn scaled_tail(&self, y: f64) -> f64 {
        let l = self.lambda;
        if y < 0.0 {
            return (l * y).exp() * self.scaled_tail(0.0);
        }
        match self.base {
            DensitySpec::Exponential { rate } => self.factor * rate * (-rate * y).exp() / (rate + l),
            DensitySpec::Uniform { upper } => {
                if y >= upper {
                    0.0
                } else {
                    self.factor / upper * (-(-l * (upper - y)).exp_m1()) / l
                }
            }
            DensitySpec::Tabulated(ref t) => {
                let ys = t.knots();
                let n = ys.len();
                if y >= ys[n - 1] {
                    return 0.0;
                }
                if y <= ys[0] {
                    return (-l * (ys[0] - y)).exp() * self.knot_tails[0];
                }
                let i = ys.partition_point(|&k| k <= y) - 1;
                let d = ys[i + 1] - y;
                self.factor * linear_exp(l, d, t.eval(y), t.values()[i + 1]) + (-l * d).exp() * self.knot_tails[i + 1]
            }
        }
    }

    /// `∫_y^∞ ψ(z) e^{-λz} dz`.
    pub fn tail_exp(&self, y: f64) -> f64 {
        (-self.lambda * y).exp() * self.scaled_tail(y)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        domain(format!("λ must be positive, got {lambda}"))
    }
}

/// Quantities derived from a Kennedy profile.
#[derive(Debug, Clone)]
pub struct KennedyTransforms {
    pub profile: KennedyProfile,
    /// `c(λ, φ) = ∫ψ(x)(1 − λx) dx`.
    pub c: f64,
    /// Unit-mass density of the first-order correction.
    pub phi1: DensitySpec,
}

impl KennedyTransforms {
    /// `Φ(y) = 1 − e^{λy} ∫_y^∞ ψ e^{-λz} dz`.
    pub fn big_phi(&self, y: f64) -> f64 {
        1.0 - self.profile.scaled_tail(y)
    }

    /// `φ = Φ'`.
    pub fn varphi(&self, y: f64) -> f64 {
        self.profile.psi(y) - self.profile.lambda * self.profile.scaled_tail(y)
    }
}

pub fn kennedy_transforms(profile: &KennedyProfile) -> Result<KennedyTransforms> {
    let l = profile.lambda;
    let z = profile.scaled_tail(0.0);
    if (z - 1.0).abs() > 1e-6 {
        return precondition(format!("∫ψ(z)e^(-λz)dz = {z}, expected 1"));
    }
    let f = profile.factor;
    let c = f * (1.0 - l * profile.base.mean());
    if c.abs() < 1e-12 {
        return Err(Error::Degenerate(c));
    }
    let phi1 = match profile.base {
        // (ψ − λ∫ψ)/c collapses back onto the same exponential law.
        DensitySpec::Exponential { rate } => DensitySpec::Exponential { rate },
        DensitySpec::Uniform { upper } => {
            let s = f / (c * upper);
            DensitySpec::Tabulated(Table::new_signed(vec![0.0, upper], vec![s * (1.0 - l * upper), s])?)
        }
        DensitySpec::Tabulated(ref t) => {
            // The tail mass is quadratic between knots; refine each segment.
            let ys = t.knots();
            let refine = (65_536 / ys.len()).clamp(8, 1024);
            let mut grid = Vec::with_capacity(refine * ys.len());
            for w in ys.windows(2) {
                for j in 0..refine {
                    grid.push(w[0] + (w[1] - w[0]) * j as f64 / refine as f64);
                }
            }
            grid.push(*ys.last().unwrap());
            let vals: Vec<f64> = grid.iter().map(|&y| (profile.psi(y) - l * profile.tail_mass(y)) / c).collect();
            let mass: f64 = grid.windows(2).zip(vals.windows(2)).map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1])).sum();
            if (mass - 1.0).abs() > 1e-6 {
                return precondition(format!("first-order density has mass {mass}"));
            }
            DensitySpec::Tabulated(Table::new_signed(grid, vals)?)
        }
    };
    Ok(KennedyTransforms { profile: profile.clone(), c, phi1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, Tolerance};

    fn c0() -> f64 {
        1.0 / (1.0 - (-1.0f64).exp())
    }

    #[test]
    fn indicator_profile_constants() {
        let p = KennedyProfile::indicator(1.0, 1.0).unwrap();
        assert!((p.factor() - c0()).abs() < 1e-14);
        let k = kennedy_transforms(&p).unwrap();
        assert!((k.c - c0() / 2.0).abs() < 1e-12);
        for &y in &[0.0, 0.25, 0.5, 0.99, 1.0] {
            assert!((k.phi1.pdf(y) - 2.0 * y).abs() < 1e-12);
        }
        assert_eq!(k.phi1.pdf(1.5), 0.0);
        assert!(k.big_phi(0.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_profile_is_degenerate() {
        let p = KennedyProfile::new(DensitySpec::exponential(1.0).unwrap(), 2.0, 1.0).unwrap();
        assert!(matches!(kennedy_transforms(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn normalization_is_checked() {
        assert!(KennedyProfile::new(DensitySpec::uniform(1.0).unwrap(), 1.0, 1.0).is_err());
    }

    #[test]
    fn varphi_is_derivative_of_big_phi() {
        let profiles = [
            KennedyProfile::indicator(1.0, 1.0).unwrap(),
            KennedyProfile::normalized(DensitySpec::exponential(3.0).unwrap(), 0.5).unwrap(),
            KennedyProfile::normalized(
                DensitySpec::tabulated(vec![0.0, 0.4, 1.0, 2.0], vec![0.5, 2.0, 1.0, 0.0]).unwrap(),
                0.5,
            )
            .unwrap(),
        ];
        for p in &profiles {
            let k = kennedy_transforms(p).unwrap();
            for &y in &[0.1, 0.3, 0.7, 1.5] {
                let h = 1e-5;
                let num = (k.big_phi(y + h) - k.big_phi(y - h)) / (2.0 * h);
                assert!((num - k.varphi(y)).abs() < 1e-5, "{p:?} y={y}");
            }
        }
    }

    #[test]
    fn scaled_tail_matches_quadrature() {
        let p = KennedyProfile::normalized(
            DensitySpec::tabulated(vec![0.0, 0.4, 1.0, 2.0], vec![0.5, 2.0, 1.0, 0.0]).unwrap(),
            0.5,
        )
        .unwrap();
        for &y in &[0.0, 0.2, 0.4, 1.7] {
            let q = integrate(|z| p.psi(z) * (-0.5 * (z - y)).exp(), y, 2.0, Tolerance::tight()).value;
            assert!((q - p.scaled_tail(y)).abs() < 1e-12);
        }
        let k = kennedy_transforms(&p).unwrap();
        assert!((k.phi1.sf(0.0) - 1.0).abs() < 1e-12);
    }
}
