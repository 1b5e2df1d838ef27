//! Principal-value area quadrature on polar grids.
//!
//! The disc or annulus is covered by one polar grid centred at the parameter
//! origin plus a small polar patch around every singular point `s ≠ 0`.
//! A smooth partition of unity `Ψ(|τ − s|/ρ_s)` hands the neighbourhood of
//! `s` to its patch, where the area element `ρ dρ dθ` absorbs a Cauchy pole.
//! Circles are integrated with the offset trapezoid rule before the radial
//! Gauss–Legendre sum, so angular-mean-zero modes `e^{imθ}/ρᵖ` cancel on
//! every circle. Around exclusion centres the inner disc is replaced by a
//! sequence of rings `ε_{j+1} ≤ ρ ≤ ε_j`; a Cauchy test on the ring
//! contributions detects integrands without a principal value.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use super::{
    limit_extrapolate, CurrentValue, ExclusionPolicy, GaussLegendre, QuadratureSpec,
    RegularizationError,
};

const EXCLUSION_STEPS: usize = 6;
const PATCH_BAND_ANGULAR_FACTOR: usize = 8;

/// Annulus `inner ≤ |τ| ≤ outer` (a disc when `inner = 0`) with radii where
/// the integrand is only finitely smooth.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub inner: f64,
    pub outer: f64,
    pub breaks: Vec<f64>,
}

impl Region {
    pub fn disc(radius: f64) -> Self {
        Region::annulus(0.0, radius)
    }

    pub fn annulus(inner: f64, outer: f64) -> Self {
        Region {
            inner,
            outer,
            breaks: Vec::new(),
        }
    }

    pub fn with_breaks(mut self, b: impl IntoIterator<Item = f64>) -> Self {
        self.breaks.extend(b);
        self
    }

    fn radii(&self) -> Vec<f64> {
        let mut r = vec![self.inner, self.outer];
        r.extend(
            self.breaks
                .iter()
                .copied()
                .filter(|b| *b > self.inner && *b < self.outer),
        );
        sort_dedup(r)
    }
}

fn sort_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    v
}

/// Partition profile: 1 on `[0, 0.3]`, 0 on `[1, ∞)`, `C^∞` in between.
fn psi(x: f64) -> f64 {
    if x <= 0.3 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let y = (1.0 - x) / 0.7;
    let a = (-1.0 / y).exp();
    let b = (-1.0 / (1.0 - y)).exp();
    a / (a + b)
}

#[derive(Clone, Copy, Debug)]
struct Patch {
    center: Complex64,
    radius: f64,
    exclude: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Group {
    Plain,
    /// Ring `j` of the exclusion sequence around centre `c` (`c = 0` is the
    /// origin, `c = k + 1` is patch `k`).
    Ring(usize, usize),
}

#[derive(Clone, Copy, Debug)]
struct Circle {
    center: Complex64,
    r: f64,
    weight: f64,
    /// `Some(k)`: patch circle, weight already includes `Ψ_k`.
    patch: Option<usize>,
    group: Group,
}

/// Principal value of `∫ f dA` over `region` (`dA` the Euclidean area).
///
/// `singular_set` lists points where `f` is singular; the origin gets an
/// exclusion sequence when listed (or when the policy asks for it), other
/// points get a local polar patch. The returned trace holds the partial
/// values along the exclusion sequence of the first excluded centre.
pub fn pv_integrate<F>(
    f: &F,
    region: &Region,
    quad: &QuadratureSpec,
    singular_set: &[Complex64],
) -> Result<CurrentValue, RegularizationError>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    quad.validate()?;
    if !(region.outer > region.inner && region.inner >= 0.0) {
        return Err(RegularizationError::InvalidQuadrature(format!(
            "empty region [{}, {}]",
            region.inner, region.outer
        )));
    }
    let tiny = 1e-12 * region.outer;
    let origin_singular = singular_set.iter().any(|s| s.norm() <= tiny)
        || quad.exclusion_radius_policy == ExclusionPolicy::AroundParameterOrigin;
    let origin_excluded = origin_singular && region.inner == 0.0;
    let patches = build_patches(region, quad, singular_set, tiny)?;

    let mut levels: Vec<(Complex64, f64, Vec<(f64, Complex64)>)> = Vec::new();
    let mut refine_err = f64::INFINITY;
    for level in 0..=quad.max_refinements {
        let n_r = quad.radial_points + 4 * level;
        let n_t = quad.angular_points << level;
        let lv = integrate_level(f, region, &patches, origin_excluded, n_r, n_t)?;
        if let Some(prev) = levels.last() {
            refine_err = (lv.0 - prev.0).norm();
            let done = refine_err <= quad.adaptive_tolerance * lv.0.norm().max(1.0);
            levels.push(lv);
            if done {
                break;
            }
        } else {
            levels.push(lv);
        }
    }
    let (value, extrap_err, trace) = levels.pop().expect("at least one level");
    let refine_err = if refine_err.is_finite() {
        refine_err
    } else {
        0.0
    };
    Ok(CurrentValue {
        value,
        error_estimate: refine_err.max(extrap_err),
        trace,
    })
}

fn build_patches(
    region: &Region,
    quad: &QuadratureSpec,
    singular_set: &[Complex64],
    tiny: f64,
) -> Result<Vec<Patch>, RegularizationError> {
    let radii = region.radii();
    let inside: Vec<Complex64> = singular_set
        .iter()
        .copied()
        .filter(|s| s.norm() > tiny && s.norm() > region.inner && s.norm() < region.outer)
        .collect();
    let excluded_target = match quad.exclusion_radius_policy {
        ExclusionPolicy::AroundTarget { re, im } => Some(Complex64::new(re, im)),
        _ => None,
    };
    let mut patches = Vec::new();
    for (k, s) in inside.iter().enumerate() {
        if inside[..k].iter().any(|o| (o - s).norm() <= tiny) {
            continue;
        }
        let mut r = 0.5 * s.norm();
        for (j, o) in inside.iter().enumerate() {
            if j != k && (o - s).norm() > tiny {
                r = r.min(0.45 * (o - s).norm());
            }
        }
        // region boundaries bound the patch; interior breaks only shrink it
        // to a quarter, below which the main grid cannot resolve the pole
        for b in [region.inner, region.outer].iter().filter(|b| **b > 0.0) {
            r = r.min(0.9 * (s.norm() - b).abs());
        }
        let floor = 0.25 * r;
        for b in radii
            .iter()
            .filter(|b| **b > region.inner && **b < region.outer)
        {
            r = r.min((0.9 * (s.norm() - b).abs()).max(floor));
        }
        if r <= tiny {
            return Err(RegularizationError::InvalidQuadrature(format!(
                "singular point {s} lies on a break circle"
            )));
        }
        let exclude = excluded_target.is_some_and(|t| (t - s).norm() <= tiny);
        patches.push(Patch {
            center: *s,
            radius: r,
            exclude,
        });
    }
    Ok(patches)
}

/// Radial panels `[a, b]` for one centre, with the inner disc either
/// integrated directly or split into an exclusion sequence.
fn push_panels(
    out: &mut Vec<Circle>,
    gl: &GaussLegendre,
    center: Complex64,
    radii: &[f64],
    exclusion: Option<usize>,
    patch: Option<(usize, f64)>,
) {
    let push = |out: &mut Vec<Circle>, a: f64, b: f64, group: Group| {
        for (r, w) in gl.on(a, b) {
            let (weight, pk) = match patch {
                Some((k, rad)) => (w * psi(r / rad), Some(k)),
                None => (w, None),
            };
            if weight != 0.0 {
                out.push(Circle {
                    center,
                    r,
                    weight,
                    patch: pk,
                    group,
                });
            }
        }
    };
    for win in radii.windows(2) {
        let (a, b) = (win[0], win[1]);
        match exclusion {
            Some(c) if a == 0.0 => {
                let eps0 = 0.25 * b;
                push(out, 2.0 * eps0, b, Group::Plain);
                push(out, eps0, 2.0 * eps0, Group::Plain);
                let mut e = eps0;
                for j in 0..EXCLUSION_STEPS {
                    push(out, 0.5 * e, e, Group::Ring(c, j));
                    e *= 0.5;
                }
            }
            _ => push(out, a, b, Group::Plain),
        }
    }
}

fn integrate_level<F>(
    f: &F,
    region: &Region,
    patches: &[Patch],
    origin_excluded: bool,
    n_r: usize,
    n_t: usize,
) -> Result<(Complex64, f64, Vec<(f64, Complex64)>), RegularizationError>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let gl = GaussLegendre::new(n_r);
    let mut circles = Vec::new();

    let mut radii = region.radii();
    for p in patches {
        let m = p.center.norm();
        for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let r = m + x * p.radius;
            if r > region.inner && r < region.outer {
                radii.push(r);
            }
        }
    }
    if region.inner == 0.0 && !origin_excluded {
        // geometric grading towards the origin for weakly singular integrands
        let b1 = radii
            .iter()
            .copied()
            .filter(|r| *r > 0.0)
            .fold(f64::INFINITY, f64::min);
        radii.extend([0.25 * b1, 0.5 * b1]);
    }
    let radii = sort_dedup(radii);
    push_panels(
        &mut circles,
        &gl,
        Complex64::zero(),
        &radii,
        origin_excluded.then_some(0),
        None,
    );
    for (k, p) in patches.iter().enumerate() {
        let pr = [0.0, 0.3, 0.55, 0.8, 1.0].map(|x| x * p.radius);
        push_panels(
            &mut circles,
            &gl,
            p.center,
            &pr,
            p.exclude.then_some(k + 1),
            Some((k, p.radius)),
        );
    }

    // circles crossing a patch carry the sharp angular profile of `1 − Ψ`
    let rots = |n: usize| -> Vec<Complex64> {
        let dt = 2.0 * PI / n as f64;
        (0..n)
            .map(|j| Complex64::from_polar(1.0, (j as f64 + 0.5) * dt))
            .collect()
    };
    let coarse = rots(n_t);
    let fine = rots(PATCH_BAND_ANGULAR_FACTOR * n_t);
    let sums: Vec<Complex64> = circles
        .par_iter()
        .map(|c| {
            let crosses = c.patch.is_none()
                && patches
                    .iter()
                    .any(|p| (c.r - p.center.norm()).abs() < p.radius);
            let grid = if crosses { &fine } else { &coarse };
            let dtheta = 2.0 * PI / grid.len() as f64;
            let mut s = Complex64::zero();
            for u in grid {
                let tau = c.center + u * c.r;
                let mut weight = 1.0;
                if c.patch.is_none() {
                    for p in patches {
                        let d = (tau - p.center).norm();
                        if d < p.radius {
                            weight -= psi(d / p.radius);
                        }
                    }
                    if weight == 0.0 {
                        continue;
                    }
                }
                s += f(tau) * weight;
            }
            s * (c.weight * c.r * dtheta)
        })
        .collect();

    let n_centers = 1 + patches.len();
    let mut plain = Complex64::zero();
    let mut rings = vec![vec![Complex64::zero(); EXCLUSION_STEPS]; n_centers];
    for (c, s) in circles.iter().zip(&sums) {
        match c.group {
            Group::Plain => plain += s,
            Group::Ring(k, j) => rings[k][j] += s,
        }
    }

    let mut value = plain;
    let mut err = 0.0;
    let mut trace: Vec<(f64, Complex64)> = Vec::new();
    let scale_of = |k: usize| {
        if k == 0 {
            let b1 = radii.iter().copied().find(|r| *r > 0.0).unwrap_or(1.0);
            (Complex64::zero(), 0.25 * b1)
        } else {
            let p = patches[k - 1];
            (p.center, 0.075 * p.radius)
        }
    };
    for (k, ring) in rings.iter().enumerate() {
        let active = (k == 0 && origin_excluded) || (k > 0 && patches[k - 1].exclude);
        if !active {
            continue;
        }
        let (center, eps0) = scale_of(k);
        check_cauchy(center, ring, plain.norm())?;
        let mut partial = Vec::with_capacity(EXCLUSION_STEPS + 1);
        let mut acc = Complex64::zero();
        partial.push((eps0, acc));
        for (j, v) in ring.iter().enumerate() {
            acc += v;
            partial.push((eps0 * 0.5f64.powi(j as i32 + 1), acc));
        }
        // the disc left inside ε only contributes even powers of ε
        let squared: Vec<(f64, Complex64)> = partial.iter().map(|(e, v)| (e * e, *v)).collect();
        let cv = limit_extrapolate(&squared, 2)?;
        value += cv.value;
        err += cv.error_estimate;
        if trace.is_empty() {
            trace = partial.iter().map(|(e, v)| (*e, plain + v)).collect();
        }
    }
    Ok((value, err, trace))
}

/// Ring contributions must shrink geometrically (or be negligible); a
/// persistent constant increment is the signature of a `c/ρ²` term.
fn check_cauchy(
    center: Complex64,
    ring: &[Complex64],
    scale: f64,
) -> Result<(), RegularizationError> {
    let inc: Vec<f64> = ring.iter().map(|v| v.norm()).collect();
    let total: f64 = inc.iter().sum();
    let floor = 1e-13 * (scale + total).max(1.0);
    let n = inc.len();
    let ok = |i: usize| inc[i] <= floor || inc[i] <= 0.75 * inc[i - 1];
    if ok(n - 1) && ok(n - 2) {
        Ok(())
    } else {
        Err(RegularizationError::NonConvergent {
            center,
            increments: inc,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn smooth_polynomial_over_disc() {
        // ∫_{|τ|<1} |τ|² dA = π/2
        let v = pv_integrate(
            &|t: Complex64| c(t.norm_sqr(), 0.0),
            &Region::disc(1.0),
            &q(),
            &[],
        )
        .unwrap();
        assert!((v.value - c(PI / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reciprocal_tau_is_zero() {
        let v = pv_integrate(
            &|t: Complex64| 1.0 / t,
            &Region::disc(1.0),
            &q(),
            &[Complex64::zero()],
        )
        .unwrap();
        assert!(v.value.norm() < 1e-12);
    }

    #[test]
    fn mean_zero_double_pole_is_zero() {
        let f = |t: Complex64| {
            let r = t.norm();
            Complex64::from_polar(1.0, 2.0 * t.arg()) / (r * r)
        };
        let v = pv_integrate(&f, &Region::disc(1.0), &q(), &[Complex64::zero()]).unwrap();
        assert!(v.value.norm() < 1e-12);
    }

    #[test]
    fn radial_double_pole_has_no_principal_value() {
        let f = |t: Complex64| c(1.0 / t.norm_sqr(), 0.0);
        let r = pv_integrate(&f, &Region::disc(1.0), &q(), &[Complex64::zero()]);
        assert!(matches!(r, Err(RegularizationError::NonConvergent { .. })));
    }

    #[test]
    fn cauchy_transform_of_constant() {
        // ∫_{|τ|<1} dA/(τ − s) = −π s̄ for |s| < 1
        let s = c(0.3, 0.2);
        let f = move |t: Complex64| 1.0 / (t - s);
        let v = pv_integrate(&f, &Region::disc(1.0), &q(), &[s]).unwrap();
        assert!((v.value + PI * s.conj()).norm() < 1e-10, "{}", v.value);
    }

    #[test]
    fn excluded_target_matches_patch() {
        let s = c(-0.4, 0.25);
        let f = move |t: Complex64| t.conj() / (t - s);
        let a = pv_integrate(&f, &Region::disc(1.0), &q(), &[s]).unwrap();
        let qx = q().with_policy(ExclusionPolicy::AroundTarget { re: s.re, im: s.im });
        let b = pv_integrate(&f, &Region::disc(1.0), &qx, &[s]).unwrap();
        assert!((a.value - b.value).norm() < 1e-9);
        assert_eq!(b.trace.len(), EXCLUSION_STEPS + 1);
    }

    #[test]
    fn annulus_with_breaks() {
        // ∫_{1/2<|τ|<1} τ̄τ dA = π(1 − 1/16)/2
        let v = pv_integrate(
            &|t: Complex64| c(t.norm_sqr(), 0.0),
            &Region::annulus(0.5, 1.0).with_breaks([0.7]),
            &q(),
            &[],
        )
        .unwrap();
        assert!((v.value.re - PI * (1.0 - 1.0 / 16.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn partition_profile_is_monotone() {
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = psi(k as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert_eq!(psi(0.3), 1.0);
        assert_eq!(psi(1.0), 0.0);
    }
}
