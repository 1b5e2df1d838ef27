use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Smooth approximation of the characteristic function of `[1, ∞)`.
///
/// The profile is the quintic smoothstep `10u³ − 15u⁴ + 6u⁵`, `u = x − 1`,
/// clamped to `[0, 1]`: zero for `x ≤ 1`, one for `x ≥ 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cutoff;

impl Cutoff {
    pub fn profile(&self, x: f64) -> f64 {
        let u = (x - 1.0).clamp(0.0, 1.0);
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }

    /// First derivative of the profile, supported in `[1, 2]`.
    pub fn profile_derivative(&self, x: f64) -> f64 {
        if x <= 1.0 || x >= 2.0 {
            return 0.0;
        }
        let u = x - 1.0;
        30.0 * u * u * (1.0 - u) * (1.0 - u)
    }

    /// `χ_δ(τ) = profile(|τ|/δ)` together with the `dτ̄` coefficient of `∂̄χ_δ`.
    pub fn eval(&self, delta: f64, tau: Complex64) -> (f64, Complex64) {
        let r = tau.norm();
        let x = r / delta;
        let value = self.profile(x);
        let d = self.profile_derivative(x);
        if d == 0.0 || r == 0.0 {
            return (value, Complex64::new(0.0, 0.0));
        }
        (value, tau * (d / (2.0 * r * delta)))
    }
}

/// `cutoff_eval`: value of `χ_δ` at `τ` and the `dτ̄` coefficient of `∂̄χ_δ`.
pub fn cutoff_eval(c: &Cutoff, delta: f64, tau: Complex64) -> (f64, Complex64) {
    c.eval(delta, tau)
}

/// Radial bump built from the cutoff profile: `≡ 1` for `r ≤ inner`,
/// `≡ 0` for `r ≥ outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub inner: f64,
    pub outer: f64,
}

impl Bump {
    pub fn new(inner: f64, outer: f64) -> Self {
        assert!(
            inner > 0.0 && outer > inner,
            "bump needs 0 < inner < outer (got {inner}, {outer})"
        );
        Bump { inner, outer }
    }

    /// The bump `1 − profile(2r/R)` of support radius `R`, flat on `r ≤ R/2`.
    pub fn with_support(support_radius: f64) -> Self {
        Bump::new(0.5 * support_radius, support_radius)
    }

    fn x(&self, r: f64) -> f64 {
        1.0 + (r - self.inner) / (self.outer - self.inner)
    }

    pub fn at_radius(&self, r: f64) -> f64 {
        1.0 - Cutoff.profile(self.x(r))
    }

    /// `d/dr` of the bump.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        -Cutoff.profile_derivative(self.x(r)) / (self.outer - self.inner)
    }

    pub fn value(&self, tau: Complex64) -> f64 {
        self.at_radius(tau.norm())
    }

    /// `∂/∂τ̄` of the bump as a function of `|τ|`.
    pub fn dbar(&self, tau: Complex64) -> Complex64 {
        let r = tau.norm();
        let d = self.radial_derivative(r);
        if d == 0.0 || r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        tau * (d / (2.0 * r))
    }

    pub fn breaks(&self) -> [f64; 2] {
        [self.inner, self.outer]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_points() {
        let c = Cutoff;
        assert_eq!(
            cutoff_eval(&c, 0.1, Complex64::new(0.05, 0.0)),
            (0.0, Complex64::new(0.0, 0.0))
        );
        assert_eq!(
            cutoff_eval(&c, 0.1, Complex64::new(0.3, 0.0)),
            (1.0, Complex64::new(0.0, 0.0))
        );
        let (v, d) = cutoff_eval(&c, 0.1, Complex64::new(0.15, 0.0));
        // u = 0.5: smoothstep gives exactly 1/2; derivative 30/16 = 1.875
        assert!((v - 0.5).abs() < 1e-15);
        let expected = 1.875 * 0.15 / (2.0 * 0.15 * 0.1);
        assert!((d.re - expected).abs() < 1e-12 && d.im.abs() < 1e-15);
    }

    #[test]
    fn derivative_integrates_to_one() {
        // Simpson on [1,2]
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * Cutoff.profile_derivative(1.0 + k as f64 * h);
        }
        assert!((s * h / 3.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &x in &[1.1, 1.37, 1.5, 1.9] {
            let h = 1e-6;
            let fd = (Cutoff.profile(x + h) - Cutoff.profile(x - h)) / (2.0 * h);
            assert!((fd - Cutoff.profile_derivative(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn bump_is_flat_then_vanishes() {
        let b = Bump::with_support(1.0);
        assert_eq!(b.at_radius(0.2), 1.0);
        assert_eq!(b.at_radius(1.2), 0.0);
        assert!(b.at_radius(0.75) > 0.0 && b.at_radius(0.75) < 1.0);
        let t = Complex64::new(0.5, 0.4);
        let h = 1e-6;
        let dx = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
        let dy =
            (b.value(t + Complex64::new(0.0, h)) - b.value(t - Complex64::new(0.0, h))) / (2.0 * h);
        let dbar = Complex64::new(0.5 * dx, 0.5 * dy);
        assert!((dbar - b.dbar(t)).norm() < 1e-8);
    }
}
