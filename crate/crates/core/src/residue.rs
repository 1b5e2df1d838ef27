//! Principal-value and residue currents in one variable, Coleff–Herrera
//! products of two monomials, and the standard extension property, each
//! with an exact Taylor-coefficient oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::form::{FormDegree, TestForm};
use crate::poly::{AmbientPoly, QI};
use crate::regularization::{
    pv_integrate, Bump, CurrentValue, Cutoff, GaussLegendre, QuadratureSpec, Region,
    RegularizationError, RegularizationSchedule,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResidueError {
    #[error(transparent)]
    Regularization(#[from] RegularizationError),
    #[error("test form needs compact support (a bump)")]
    NoSupport,
    #[error("expected a function (degree 0 test form)")]
    WrongDegree,
    #[error("pole order must be at least 1")]
    BadOrder,
    #[error("largest δ = {delta} does not fit the support radius {support}")]
    ScheduleTooCoarse { delta: f64, support: f64 },
}

fn support_of(psi: &TestForm, m: u32) -> Result<f64, ResidueError> {
    if m == 0 {
        return Err(ResidueError::BadOrder);
    }
    if psi.degree != FormDegree::Zero {
        return Err(ResidueError::WrongDegree);
    }
    psi.support_radius().ok_or(ResidueError::NoSupport)
}

fn check_schedule(s: &RegularizationSchedule, support: f64) -> Result<(), ResidueError> {
    s.validate()?;
    if 2.0 * s.delta_max >= support {
        return Err(ResidueError::ScheduleTooCoarse {
            delta: s.delta_max,
            support,
        });
    }
    Ok(())
}

/// `⟨1/τᵐ, ψ dA⟩ = lim_δ ∫ χ_δ ψ/τᵐ dA`.
pub fn pv_pair(
    m: u32,
    psi: &TestForm,
    schedule: &RegularizationSchedule,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, ResidueError> {
    let support = support_of(psi, m)?;
    check_schedule(schedule, support)?;
    let v = schedule.limit(|delta| {
        let region = Region::annulus(delta, support)
            .with_breaks([2.0 * delta].into_iter().chain(psi.breaks()));
        let f = |t: Complex64| {
            let (chi, _) = Cutoff.eval(delta, t);
            psi.eval(t) * chi / t.powu(m)
        };
        pv_integrate(&f, &region, quad, &[]).map(|cv| cv.value)
    })?;
    Ok(v)
}

/// `⟨1/τᵐ, ψ dA⟩` as a principal value with symmetric exclusion discs,
/// without any cutoff function.
pub fn pv_pair_excluded(
    m: u32,
    psi: &TestForm,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, ResidueError> {
    let support = support_of(psi, m)?;
    let region = Region::disc(support).with_breaks(psi.breaks());
    let f = |t: Complex64| psi.eval(t) / t.powu(m);
    Ok(pv_integrate(&f, &region, quad, &[Complex64::zero()])?)
}

/// `⟨∂̄(1/τᵐ), ψ dτ⟩ = lim_δ ∫ ∂̄χ_δ ∧ ψ dτ/τᵐ`.
///
/// With `dτ̄∧dτ = 2i dA` the integrand is `2i ∂χ_δ/∂τ̄ · ψ/τᵐ` on the
/// annulus `δ ≤ |τ| ≤ 2δ`.
pub fn residue_pair(
    m: u32,
    psi: &TestForm,
    schedule: &RegularizationSchedule,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, ResidueError> {
    let support = support_of(psi, m)?;
    check_schedule(schedule, support)?;
    let v = schedule.limit(|delta| annulus_pairing(delta, quad, |t| psi.eval(t) / t.powu(m)))?;
    Ok(v)
}

/// `∫ ∂̄χ_δ ∧ g dτ = 2i ∫_{δ≤|τ|≤2δ} (∂χ_δ/∂τ̄) g dA`.
pub(crate) fn annulus_pairing<G>(
    delta: f64,
    quad: &QuadratureSpec,
    g: G,
) -> Result<Complex64, RegularizationError>
where
    G: Fn(Complex64) -> Complex64 + Sync,
{
    let f = |t: Complex64| {
        let (_, d) = Cutoff.eval(delta, t);
        d * g(t)
    };
    let region = Region::annulus(delta, 2.0 * delta);
    let v = pv_integrate(&f, &region, quad, &[])?.value;
    let mag = pv_integrate(&|t| Complex64::from(f(t).norm()), &region, quad, &[])?
        .value
        .re;
    Ok(snap(v, mag) * Complex64::new(0.0, 2.0))
}

/// Results below this fraction of `∫|integrand|` are cancellation noise.
const CANCELLATION_FLOOR: f64 = 1e-13;

/// `v`, or zero when it is at the roundoff level of an integral whose
/// absolute value integrates to `mag`.
pub(crate) fn snap(v: Complex64, mag: f64) -> Complex64 {
    if v.norm() <= CANCELLATION_FLOOR * mag {
        Complex64::zero()
    } else {
        v
    }
}

/// `(2πi/(m−1)!) ∂^{m−1}ψ/∂τ^{m−1}(0)`, read off the Taylor polynomial.
pub fn residue_oracle(m: u32, psi: &TestForm) -> Complex64 {
    assert!(m >= 1, "pole order must be at least 1");
    let c = psi.germ_at_origin().coeff(&[m - 1, 0]);
    Complex64::new(0.0, 2.0 * PI) * c.to_c64()
}

/// Test function on `C²`: polynomial in `(ζ₁, ζ̄₁, ζ₂, ζ̄₂)` times a bump in
/// `|ζ|`.
#[derive(Clone, Debug)]
pub struct AmbientTest {
    pub poly: AmbientPoly<QI>,
    pub bump: Bump,
    dense: Vec<([u32; 4], Complex64)>,
}

impl AmbientTest {
    pub fn new(poly: AmbientPoly<QI>, bump: Bump) -> Self {
        let dense = poly.terms().map(|(e, c)| (*e, c.to_c64())).collect();
        AmbientTest { poly, bump, dense }
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let b = self.bump.at_radius((z1.norm_sqr() + z2.norm_sqr()).sqrt());
        if b == 0.0 {
            return Complex64::zero();
        }
        let v = [z1, z1.conj(), z2, z2.conj()];
        let s: Complex64 = self
            .dense
            .iter()
            .map(|(e, c)| {
                let mut t = *c;
                for (x, k) in v.iter().zip(e) {
                    if *k > 0 {
                        t *= x.powu(*k);
                    }
                }
                t
            })
            .sum();
        s * b
    }
}

/// `(2πi)²/((p−1)!(q−1)!) ∂^{p+q−2}ψ/∂ζ₁^{p−1}∂ζ₂^{q−1}(0)`.
pub fn ch_tensor_oracle(p: u32, q: u32, psi: &AmbientTest) -> Complex64 {
    assert!(p >= 1 && q >= 1, "exponents must be positive");
    let c = psi.poly.coeff(&[p - 1, 0, q - 1, 0]);
    let tpi = Complex64::new(0.0, 2.0 * PI);
    tpi * tpi * c.to_c64()
}

/// `⟨∂̄(1/ζ₂^q) ∧ ∂̄(1/ζ₁ᵖ), ψ dζ₁∧dζ₂⟩` by iterated cutoffs: the inner
/// current at scale `δ`, the outer one at `δ′ = δ²`.
///
/// `dζ̄₂∧dζ̄₁∧dζ₁∧dζ₂ = (2i)² dA₁ dA₂`, so each δ gives a product-annulus
/// integral of `(∂χ_{δ′}/∂ζ̄₂)(∂χ_δ/∂ζ̄₁) ψ/(ζ₁ᵖζ₂^q)`.
pub fn ch_product_pair(
    p: u32,
    q: u32,
    psi: &AmbientTest,
    schedule: &RegularizationSchedule,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, ResidueError> {
    if p == 0 || q == 0 {
        return Err(ResidueError::BadOrder);
    }
    check_schedule(schedule, psi.bump.outer)?;
    let ring = |delta: f64| -> Vec<(Complex64, Complex64)> {
        // nodes ζ with weight (∂χ_δ/∂ζ̄)·dA
        let gl = GaussLegendre::new(quad.radial_points);
        let n = quad.angular_points;
        let dth = 2.0 * PI / n as f64;
        let mut out = Vec::with_capacity(quad.radial_points * n);
        for (r, w) in gl.on(delta, 2.0 * delta) {
            for j in 0..n {
                let z = Complex64::from_polar(r, (j as f64 + 0.5) * dth);
                let (_, d) = Cutoff.eval(delta, z);
                out.push((z, d * (w * r * dth)));
            }
        }
        out
    };
    let v = schedule.limit(|delta| {
        let inner = ring(delta);
        let outer = ring(delta * delta);
        let parts: Vec<(Complex64, f64)> = outer
            .par_iter()
            .map(|(z2, w2)| {
                let mut s = Complex64::zero();
                let mut mag = 0.0;
                let base = w2 / z2.powu(q);
                for (z1, w1) in &inner {
                    let term = psi.eval(*z1, *z2) * w1 / z1.powu(p);
                    s += term;
                    mag += term.norm();
                }
                (s * base, mag * base.norm())
            })
            .collect();
        let total: Complex64 = parts.iter().map(|p| p.0).sum();
        let mag: f64 = parts.iter().map(|p| p.1).sum();
        Ok(snap(total, mag) * Complex64::new(-4.0, 0.0))
    })?;
    Ok(v)
}

/// `⟨1_{0}(1/τᵐ), ψ⟩ = ⟨1/τᵐ, ψ⟩ − lim_δ ⟨χ_δ/τᵐ, ψ⟩`; the principal value
/// is taken with exclusion discs, the restriction with the cutoff.
pub fn sep_restrict(
    m: u32,
    psi: &TestForm,
    schedule: &RegularizationSchedule,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, ResidueError> {
    let full = pv_pair_excluded(m, psi, quad)?;
    let cut = pv_pair(m, psi, schedule, quad)?;
    Ok(CurrentValue {
        value: full.value - cut.value,
        error_estimate: full.error_estimate + cut.error_estimate,
        trace: cut
            .trace
            .iter()
            .map(|(d, v)| (*d, full.value - v))
            .collect(),
    })
}

/// `⟨1_{0}∂̄(1/τᵐ), ψ dτ⟩ = ⟨∂̄(1/τᵐ), ψ dτ⟩ − lim_δ ⟨∂̄(1/τᵐ), χ_δ ψ dτ⟩`.
///
/// The second pairing is regularized at the inner scale `δ²`, where `χ_δ`
/// vanishes, so the restriction keeps the whole residue.
pub fn sep_restrict_residue(
    m: u32,
    psi: &TestForm,
    schedule: &RegularizationSchedule,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, ResidueError> {
    let support = support_of(psi, m)?;
    let full = residue_pair(m, psi, schedule, quad)?;
    check_schedule(schedule, support)?;
    let outside = schedule.limit(|delta| {
        annulus_pairing(delta * delta, quad, |t| {
            let (chi, _) = Cutoff.eval(delta, t);
            chi * psi.eval(t) / t.powu(m)
        })
    })?;
    Ok(CurrentValue {
        value: full.value - outside.value,
        error_estimate: full.error_estimate + outside.error_estimate,
        trace: outside
            .trace
            .iter()
            .map(|(d, v)| (*d, full.value - v))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly, VarTable};

    fn bump() -> Bump {
        Bump::with_support(0.8)
    }

    fn sched() -> RegularizationSchedule {
        RegularizationSchedule::for_disc(0.8)
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn tpi() -> Complex64 {
        Complex64::new(0.0, 2.0 * PI)
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            residue_oracle(1, &TestForm::monomial(0, 0, Some(bump()))),
            tpi()
        );
        assert_eq!(
            residue_oracle(4, &TestForm::monomial(3, 0, Some(bump()))),
            tpi() * 6.0 / 6.0
        );
        assert_eq!(
            residue_oracle(2, &TestForm::monomial(1, 1, Some(bump()))),
            Complex64::zero()
        );
    }

    #[test]
    fn residue_pair_examples() {
        let one = TestForm::monomial(0, 0, Some(bump()));
        let v = residue_pair(1, &one, &sched(), &q()).unwrap();
        assert!((v.value - tpi()).norm() < 1e-10);
        let t2 = TestForm::monomial(2, 0, Some(bump()));
        let v = residue_pair(3, &t2, &sched(), &q()).unwrap();
        assert!((v.value - tpi()).norm() < 1e-10);
        let tb = TestForm::monomial(0, 1, Some(bump()));
        let v = residue_pair(2, &tb, &sched(), &q()).unwrap();
        assert!(v.value.norm() < 1e-10);
    }

    #[test]
    fn pv_pair_examples() {
        // τ/τ = 1: the pairing is the integral of the bump itself
        let t = TestForm::monomial(1, 0, Some(bump()));
        let v = pv_pair(1, &t, &sched(), &q()).unwrap();
        let b = bump();
        let plain = pv_integrate(
            &|z: Complex64| Complex64::new(b.value(z), 0.0),
            &Region::disc(0.8).with_breaks(b.breaks()),
            &q(),
            &[],
        )
        .unwrap();
        assert!((v.value - plain.value).norm() < 1e-9);
        let tb = TestForm::monomial(0, 1, Some(bump()));
        assert!(pv_pair(1, &tb, &sched(), &q()).unwrap().value.norm() < 1e-10);
        let one = TestForm::monomial(0, 0, Some(bump()));
        assert!(pv_pair(2, &one, &sched(), &q()).unwrap().value.norm() < 1e-10);
    }

    #[test]
    fn ch_examples() {
        let b = Bump::with_support(0.8);
        let s = RegularizationSchedule {
            delta_max: 0.1,
            ..sched()
        };
        let qq = QuadratureSpec {
            radial_points: 8,
            angular_points: 16,
            ..q()
        };
        for (p, qexp, src) in [
            (1, 1, "1"),
            (2, 1, "z1"),
            (1, 1, "zb1"),
            (2, 2, "z1*w + 2*zb2"),
        ] {
            let psi = AmbientTest::new(parse_poly(src, &VarTable::ambient()).unwrap(), b);
            let v = ch_product_pair(p, qexp, &psi, &s, &qq).unwrap();
            let o = ch_tensor_oracle(p, qexp, &psi);
            assert!(
                (v.value - o).norm() < 1e-9 * o.norm().max(1.0),
                "{src}: {} vs {o}",
                v.value
            );
        }
    }

    #[test]
    fn sep_examples() {
        for (m, a, b) in [(1, 0, 0), (1, 2, 1), (3, 2, 0), (2, 0, 0)] {
            let psi = TestForm::monomial(a, b, Some(bump()));
            let v = sep_restrict(m, &psi, &sched(), &q()).unwrap();
            assert!(v.value.norm() < 1e-8, "m={m} ({a},{b}): {}", v.value);
        }
        let one = TestForm::monomial(0, 0, Some(bump()));
        let v = sep_restrict_residue(1, &one, &sched(), &q()).unwrap();
        assert!((v.value - tpi()).norm() < 1e-10);
    }
}
