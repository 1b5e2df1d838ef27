use num_complex::Complex64;

use super::{CurrentValue, RegularizationError};

/// Richardson (Neville) extrapolation of a regularized trace to `δ = 0`.
///
/// Assumes `value(δ) = L + c₁δ + … + c_k δᵏ + O(δᵏ⁺¹)` with `k = order`, fitting
/// the last `k + 1` points. The error estimate combines the spread between the
/// last two fitting windows with the change from order `k − 1` to `k`.
pub fn limit_extrapolate(
    trace: &[(f64, Complex64)],
    order: usize,
) -> Result<CurrentValue, RegularizationError> {
    let order = order.max(1);
    if trace.len() < order + 2 {
        return Err(RegularizationError::TraceTooShort {
            needed: order + 2,
            got: trace.len(),
        });
    }
    if let Some(exponent) = divergence_exponent(trace) {
        return Err(RegularizationError::Diverging {
            exponent,
            trace: trace.to_vec(),
        });
    }
    let n = trace.len();
    let last = &trace[n - order - 1..];
    let prev = &trace[n - order - 2..n - 1];
    let value = neville_at_zero(last);
    let window_spread = (value - neville_at_zero(prev)).norm();
    let order_spread = (value - neville_at_zero(&last[1..])).norm();
    Ok(CurrentValue {
        value,
        error_estimate: window_spread.max(order_spread.min(window_spread * 10.0)),
        trace: trace.to_vec(),
    })
}

/// Value at `δ = 0` of the interpolating polynomial through `pts`.
pub(crate) fn neville_at_zero(pts: &[(f64, Complex64)]) -> Complex64 {
    let mut p: Vec<Complex64> = pts.iter().map(|(_, v)| *v).collect();
    let x: Vec<f64> = pts.iter().map(|(d, _)| *d).collect();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            // interpolant on x[i..=i+k] evaluated at 0
            p[i] = (p[i + 1] * x[i] - p[i] * x[i + k]) / (x[i] - x[i + k]);
        }
    }
    p[0]
}

/// Growth exponent `p` of `|value| ~ δ^{-p}` if the last three points grow
/// consistently as `δ` shrinks.
fn divergence_exponent(trace: &[(f64, Complex64)]) -> Option<f64> {
    let n = trace.len();
    if n < 3 {
        return None;
    }
    let rate = |a: &(f64, Complex64), b: &(f64, Complex64)| {
        let (ma, mb) = (a.1.norm(), b.1.norm());
        if ma <= f64::MIN_POSITIVE || mb <= f64::MIN_POSITIVE || a.0 == b.0 {
            return 0.0;
        }
        (mb / ma).ln() / (a.0 / b.0).ln()
    };
    let p1 = rate(&trace[n - 3], &trace[n - 2]);
    let p2 = rate(&trace[n - 2], &trace[n - 1]);
    if p1 > 0.5 && p2 > 0.5 && trace[n - 1].1.norm() > 1e-12 {
        Some(p2)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(f: impl Fn(f64) -> Complex64) -> Vec<(f64, Complex64)> {
        (0..8)
            .map(|j| {
                let d = 0.2 * 0.5f64.powi(j);
                (d, f(d))
            })
            .collect()
    }

    #[test]
    fn linear_trace_is_exact() {
        let cv = limit_extrapolate(&geometric(|d| Complex64::new(3.0 + d, 0.0)), 2).unwrap();
        assert!((cv.value - Complex64::new(3.0, 0.0)).norm() < 1e-13);
        assert!(cv.error_estimate < 1e-12);
    }

    #[test]
    fn reciprocal_trace_diverges() {
        match limit_extrapolate(&geometric(|d| Complex64::new(1.0 / d, 0.0)), 2) {
            Err(RegularizationError::Diverging { exponent, .. }) => {
                assert!((exponent - 1.0).abs() < 1e-9)
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_trace_with_complex_limit() {
        let l = Complex64::new(-1.0, 2.0);
        let cv = limit_extrapolate(
            &geometric(|d| l + Complex64::new(0.3, 0.1) * d - 5.0 * d * d),
            2,
        )
        .unwrap();
        assert!((cv.value - l).norm() < 1e-12);
    }

    #[test]
    fn short_trace_rejected() {
        let t = geometric(|d| Complex64::new(d, 0.0));
        assert!(matches!(
            limit_extrapolate(&t[..3], 2),
            Err(RegularizationError::TraceTooShort { .. })
        ));
    }
}
