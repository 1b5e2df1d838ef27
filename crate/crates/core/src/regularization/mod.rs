//! Cutoff regularization, principal-value quadrature on the parameter disc
//! and extrapolation of regularized limits `δ → 0`.

mod cutoff;
mod extrapolate;
mod gauss;
mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cutoff::{cutoff_eval, Bump, Cutoff};
pub use extrapolate::limit_extrapolate;
pub use gauss::GaussLegendre;
pub use quadrature::{pv_integrate, Region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularizationError {
    #[error("principal value at {center} does not converge: exclusion increments {increments:?}")]
    NonConvergent {
        center: Complex64,
        increments: Vec<f64>,
    },
    #[error("regularized values grow like δ^-{exponent:.3}")]
    Diverging {
        exponent: f64,
        trace: Vec<(f64, Complex64)>,
    },
    #[error("extrapolation needs {needed} trace points, got {got}")]
    TraceTooShort { needed: usize, got: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
}

/// Geometric sequence `δ_j = delta_max · ratio^j`, `j < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationSchedule {
    pub delta_max: f64,
    pub ratio: f64,
    pub count: usize,
    pub extrapolation_order: usize,
}

impl RegularizationSchedule {
    /// Default schedule for a parameter disc of the given radius.
    pub fn for_disc(disc_radius: f64) -> Self {
        RegularizationSchedule {
            delta_max: 0.2 * disc_radius,
            ratio: 0.5,
            count: 8,
            extrapolation_order: 2,
        }
    }

    pub fn validate(&self) -> Result<(), RegularizationError> {
        let bad = |m: &str| Err(RegularizationError::InvalidSchedule(m.to_string()));
        if !(self.delta_max > 0.0 && self.delta_max.is_finite()) {
            return bad("delta_max must be positive");
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return bad("ratio must lie in (0, 1)");
        }
        if self.count < 4 {
            return bad("count must be at least 4");
        }
        if self.extrapolation_order < 1 {
            return bad("extrapolation_order must be at least 1");
        }
        if self.count < self.extrapolation_order + 2 {
            return bad("count must exceed extrapolation_order + 1");
        }
        Ok(())
    }

    pub fn deltas(&self) -> Vec<f64> {
        (0..self.count)
            .map(|j| self.delta_max * self.ratio.powi(j as i32))
            .collect()
    }

    /// Evaluate `f` along the schedule and extrapolate to `δ = 0`.
    pub fn limit<F>(&self, f: F) -> Result<CurrentValue, RegularizationError>
    where
        F: Fn(f64) -> Result<Complex64, RegularizationError>,
    {
        self.validate()?;
        let trace = self
            .deltas()
            .into_iter()
            .map(|d| f(d).map(|v| (d, v)))
            .collect::<Result<Vec<_>, _>>()?;
        limit_extrapolate(&trace, self.extrapolation_order)
    }
}

/// Where symmetric exclusion discs shrink to zero during principal-value
/// integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum ExclusionPolicy {
    /// Only at the parameter origin, and only if it is listed as singular.
    #[default]
    None,
    AroundParameterOrigin,
    AroundTarget {
        re: f64,
        im: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per radial panel.
    pub radial_points: usize,
    /// Trapezoid points per circle; must be even.
    pub angular_points: usize,
    pub adaptive_tolerance: f64,
    pub exclusion_radius_policy: ExclusionPolicy,
    /// Grid doublings tried before giving up on `adaptive_tolerance`.
    #[serde(default = "default_refinements")]
    pub max_refinements: usize,
}

fn default_refinements() -> usize {
    2
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_points: 16,
            angular_points: 64,
            adaptive_tolerance: 1e-10,
            exclusion_radius_policy: ExclusionPolicy::None,
            max_refinements: 2,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), RegularizationError> {
        let bad = |m: &str| Err(RegularizationError::InvalidQuadrature(m.to_string()));
        if self.radial_points < 2 {
            return bad("radial_points must be at least 2");
        }
        if self.angular_points < 4 || self.angular_points % 2 != 0 {
            return bad("angular_points must be even and at least 4");
        }
        if !(self.adaptive_tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        Ok(())
    }

    pub fn with_policy(mut self, p: ExclusionPolicy) -> Self {
        self.exclusion_radius_policy = p;
        self
    }
}

/// A regularized limit: value, error estimate and the trace it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub trace: Vec<(f64, Complex64)>,
}

impl CurrentValue {
    pub fn exact(value: Complex64) -> Self {
        CurrentValue {
            value,
            error_estimate: 0.0,
            trace: Vec::new(),
        }
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        self.value *= c;
        self.error_estimate *= c.norm();
        for (_, v) in &mut self.trace {
            *v *= c;
        }
        self
    }
}

#[derive(Serialize, Deserialize)]
struct CurrentValueRecord {
    value_re: f64,
    value_im: f64,
    error: f64,
    trace: Vec<[f64; 3]>,
}

impl Serialize for CurrentValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CurrentValueRecord {
            value_re: self.value.re,
            value_im: self.value.im,
            error: self.error_estimate,
            trace: self.trace.iter().map(|(d, v)| [*d, v.re, v.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CurrentValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CurrentValueRecord::deserialize(d)?;
        Ok(CurrentValue {
            value: Complex64::new(r.value_re, r.value_im),
            error_estimate: r.error,
            trace: r
                .trace
                .into_iter()
                .map(|[d, re, im]| (d, Complex64::new(re, im)))
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert!(RegularizationSchedule::for_disc(1.0).validate().is_ok());
        let mut s = RegularizationSchedule::for_disc(1.0);
        s.count = 3;
        assert!(s.validate().is_err());
        s.count = 8;
        s.ratio = 1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn current_value_round_trips_through_json() {
        let cv = CurrentValue {
            value: Complex64::new(1.5, -2.0),
            error_estimate: 1e-9,
            trace: vec![(0.1, Complex64::new(1.0, 0.5))],
        };
        let s = serde_json::to_string(&cv).unwrap();
        assert!(s.contains("\"value_re\":1.5"));
        let back: CurrentValue = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cv);
    }

    #[test]
    fn odd_angular_points_rejected() {
        let q = QuadratureSpec {
            angular_points: 63,
            ..Default::default()
        };
        assert!(q.validate().is_err());
    }
}
