//! The operators `K` and `P` on a curve, the Koppelman-identity check, the
//! boundary-condition test for `Dom ∂̄_X`, and the `∂̄`-solver that removes
//! the residue a solution picks up at the singular point.
//!
//! With `φ = φ̂ dτ̄` on the parameter disc and `dτ∧dτ̄ = −2i dA`:
//!
//! ```text
//! Kφ(t) = −(1/π) ∫ χ(τ) F(τ,t) φ̂(τ) dA,    Pψ(t) = −(1/π) ∫ ∂χ/∂τ̄ F(τ,t) ψ(τ) dA.
//! ```

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{Parametrization, StructureForm};
use crate::form::{FormDegree, TestForm};
use crate::kernels::{KernelError, KernelRole, KernelSpec};
use crate::poly::{Dense1, Poly1, QI};
use crate::regularization::{
    limit_extrapolate, pv_integrate, CurrentValue, Cutoff, GaussLegendre, QuadratureSpec, Region,
    RegularizationError, RegularizationSchedule,
};
use crate::residue::annulus_pairing;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("at t = {t}: {source}")]
    AtTarget {
        t: Complex64,
        source: RegularizationError,
    },
    #[error(transparent)]
    Regularization(#[from] RegularizationError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("expected a {expected:?} form")]
    WrongDegree { expected: FormDegree },
    #[error("kernel role {0:?} does not match the operator")]
    WrongRole(KernelRole),
    #[error("test form has no closed-form ∂̄")]
    NoDbar,
    #[error("target {0} lies outside the weight's flat region")]
    BadTarget(Complex64),
}

/// A value of an operator at a target point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: Complex64,
    pub value: Complex64,
    pub error: f64,
}

fn at(t: Complex64) -> impl Fn(RegularizationError) -> OperatorError {
    move |source| OperatorError::AtTarget { t, source }
}

fn kernel_singularities(kernel: &KernelSpec, t: Complex64) -> Vec<Complex64> {
    let mut s = Vec::new();
    if kernel.origin_pole_order() > 0 {
        s.push(Complex64::zero());
    }
    if t != Complex64::zero() || s.is_empty() {
        s.push(t);
    }
    s
}

/// `Kφ(t)` for one target.
pub fn k_value(
    kernel: &KernelSpec,
    phi: &TestForm,
    t: Complex64,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, OperatorError> {
    if phi.is_zero() {
        return Ok(CurrentValue::exact(Complex64::zero()));
    }
    let w = kernel.weight.cutoff;
    let outer = phi.support_radius().map_or(w.outer, |r| r.min(w.outer));
    let region = Region::disc(outer).with_breaks(
        w.breaks()
            .into_iter()
            .chain(phi.breaks())
            .filter(|b| *b < outer),
    );
    let f = |tau: Complex64| {
        let chi = w.value(tau);
        if chi == 0.0 {
            return Complex64::zero();
        }
        kernel.factor(tau, t) * phi.eval(tau) * chi
    };
    let v = pv_integrate(&f, &region, quad, &kernel_singularities(kernel, t)).map_err(at(t))?;
    Ok(v.scale(Complex64::new(-1.0 / PI, 0.0)))
}

/// `Pψ(t)` for one target inside the weight's flat region.
pub fn p_value(
    kernel: &KernelSpec,
    psi: &TestForm,
    t: Complex64,
    quad: &QuadratureSpec,
) -> Result<CurrentValue, OperatorError> {
    let w = kernel.weight.cutoff;
    if t.norm() >= w.inner {
        return Err(OperatorError::BadTarget(t));
    }
    if psi.is_zero() {
        return Ok(CurrentValue::exact(Complex64::zero()));
    }
    let region = Region::annulus(w.inner, w.outer).with_breaks(
        psi.breaks()
            .into_iter()
            .filter(|b| *b > w.inner && *b < w.outer),
    );
    let f = |tau: Complex64| kernel.factor(tau, t) * psi.eval(tau) * w.dbar(tau);
    let v = pv_integrate(&f, &region, quad, &[]).map_err(at(t))?;
    Ok(v.scale(Complex64::new(-1.0 / PI, 0.0)))
}

fn samples<F>(targets: &[Complex64], f: F) -> Result<Vec<Sample>, OperatorError>
where
    F: Fn(Complex64) -> Result<CurrentValue, OperatorError> + Sync,
{
    targets
        .par_iter()
        .map(|&t| {
            f(t).map(|v| Sample {
                t,
                value: v.value,
                error: v.error_estimate,
            })
        })
        .collect()
}

/// `Kφ` at each target; `φ` a `(0,1)` form.
pub fn apply_k(
    kernel: &KernelSpec,
    phi: &TestForm,
    targets: &[Complex64],
    quad: &QuadratureSpec,
) -> Result<Vec<Sample>, OperatorError> {
    if kernel.role != KernelRole::SolutionK {
        return Err(OperatorError::WrongRole(kernel.role));
    }
    if phi.degree != FormDegree::One {
        return Err(OperatorError::WrongDegree {
            expected: FormDegree::One,
        });
    }
    samples(targets, |t| k_value(kernel, phi, t, quad))
}

/// `Pψ` at each target; `ψ` a function.
pub fn apply_p(
    kernel: &KernelSpec,
    psi: &TestForm,
    targets: &[Complex64],
    quad: &QuadratureSpec,
) -> Result<Vec<Sample>, OperatorError> {
    if kernel.role != KernelRole::ProjectionP {
        return Err(OperatorError::WrongRole(kernel.role));
    }
    if psi.degree != FormDegree::Zero {
        return Err(OperatorError::WrongDegree {
            expected: FormDegree::Zero,
        });
    }
    samples(targets, |t| p_value(kernel, psi, t, quad))
}

/// Finite-difference step for `∂/∂t̄` of quadrature output.
pub fn fd_step(quad: &QuadratureSpec) -> f64 {
    quad.adaptive_tolerance.sqrt().max(1e-3)
}

/// `∂f/∂t̄ ≈ ½(∂ₓ + i∂_y) f` by central differences.
pub fn dbar_fd<F, E>(f: F, t: Complex64, h: f64) -> Result<Complex64, E>
where
    F: Fn(Complex64) -> Result<Complex64, E>,
{
    let dx = (f(t + h)? - f(t - h)?) / (2.0 * h);
    let ih = Complex64::new(0.0, h);
    let dy = (f(t + ih)? - f(t - ih)?) / (2.0 * h);
    Ok(0.5 * (dx + Complex64::i() * dy))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KoppelmanRow {
    pub t: Complex64,
    pub phi: Complex64,
    pub dbar_k: Complex64,
    pub k_dbar: Complex64,
    pub p: Complex64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KoppelmanReport {
    pub rows: Vec<KoppelmanRow>,
    pub max_residual: f64,
}

/// `|φ − ∂̄Kφ − K∂̄φ − Pφ|` at each target. For `(0,1)` forms on a curve
/// `∂̄φ = 0` and `P` does not act, so only `∂̄Kφ` is computed.
pub fn verify_koppelman(
    kernel: &KernelSpec,
    phi: &TestForm,
    targets: &[Complex64],
    quad: &QuadratureSpec,
) -> Result<KoppelmanReport, OperatorError> {
    let h = fd_step(quad);
    let rows: Vec<KoppelmanRow> = targets
        .par_iter()
        .map(|&t| -> Result<KoppelmanRow, OperatorError> {
            let zero = Complex64::zero();
            let (dbar_k, k_dbar, p) = match phi.degree {
                FormDegree::One => {
                    let d = dbar_fd(|s| k_value(kernel, phi, s, quad).map(|v| v.value), t, h)?;
                    (d, zero, zero)
                }
                FormDegree::Zero => {
                    let d = phi.dbar().ok_or(OperatorError::NoDbar)?;
                    let kd = k_value(kernel, &d, t, quad)?.value;
                    let p = p_value(kernel, phi, t, quad)?.value;
                    (zero, kd, p)
                }
            };
            let value = phi.eval(t);
            Ok(KoppelmanRow {
                t,
                phi: value,
                dbar_k,
                k_dbar,
                p,
                residual: (value - dbar_k - k_dbar - p).norm(),
            })
        })
        .collect::<Result<_, _>>()?;
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(KoppelmanReport { rows, max_residual })
}

/// A holomorphic test function `γ*(ζ₁ᵃζ₂ᵇ)` or `τʲ`.
#[derive(Clone, Debug)]
pub struct PairingTest {
    pub label: String,
    /// Vanishing order at the origin.
    pub order: u32,
    poly: Poly1<QI>,
    dense: Dense1,
}

impl PairingTest {
    fn from_poly(label: String, poly: Poly1<QI>) -> Self {
        PairingTest {
            label,
            order: poly.order().unwrap_or(0),
            dense: Dense1::from_poly(&poly),
            poly,
        }
    }

    pub fn power(j: u32) -> Self {
        PairingTest::from_poly(format!("t^{j}"), Poly1::monomial([j], QI::one()))
    }

    pub fn eval(&self, tau: Complex64) -> Complex64 {
        self.dense.eval(tau)
    }

    /// Taylor coefficients of `g·f/h` up to `τⁿ`, where `ω̃ = C f/h dτ/τᵏ`.
    fn weighted_series(&self, omega: &StructureForm, n: usize) -> Vec<Complex64> {
        let num = &self.poly * &omega.numerator;
        let den = &omega.denominator;
        let d0 = den.coeff(&[0]).inv().expect("unit denominator");
        let mut out: Vec<QI> = Vec::with_capacity(n + 1);
        for l in 0..=n {
            let mut v = num.coeff(&[l as u32]);
            for (i, o) in out.iter().enumerate() {
                let dl = den.coeff(&[(l - i) as u32]);
                if !dl.is_zero() {
                    v = v - dl * o.clone();
                }
            }
            out.push(v * d0.clone());
        }
        out.iter().map(QI::to_c64).collect()
    }
}

/// Pullbacks `γ*(ζ₁ᵃζ₂ᵇ)` with vanishing order at most `max_order`.
pub fn pullback_tests(param: &Parametrization, max_order: u32) -> Vec<PairingTest> {
    let o = |p: &Poly1<QI>| p.order().unwrap_or(0).max(1);
    let (o1, o2) = (o(&param.map[0]), o(&param.map[1]));
    let mut out = Vec::new();
    for a in 0..=max_order / o1 {
        for b in 0..=(max_order - a * o1) / o2 {
            let poly = &param.map[0].pow(a) * &param.map[1].pow(b);
            out.push(PairingTest::from_poly(format!("z1^{a} z2^{b}"), poly));
        }
    }
    out.sort_by_key(|t| t.order);
    out
}

/// Something whose regularized pairing `∫ ∂̄χ_δ ∧ u ω̃ g` can be evaluated.
pub trait Pairable: Sync {
    fn pairing_at(
        &self,
        delta: f64,
        omega: &StructureForm,
        g: &PairingTest,
        quad: &QuadratureSpec,
    ) -> Result<Complex64, RegularizationError>;
}

/// A function given by point evaluation; pairings use annulus quadrature.
pub struct Sampled<F>(pub F);

impl<F: Fn(Complex64) -> Complex64 + Sync> Pairable for Sampled<F> {
    fn pairing_at(
        &self,
        delta: f64,
        omega: &StructureForm,
        g: &PairingTest,
        quad: &QuadratureSpec,
    ) -> Result<Complex64, RegularizationError> {
        annulus_pairing(delta, quad, |tau| {
            (self.0)(tau) * omega.coefficient(tau) * g.eval(tau)
        })
    }
}

/// `u − ũ₂`: the correction's pairing is exact, `2πi Σ cⱼ [τʲ]g`.
pub struct Corrected<'a, P: ?Sized> {
    pub base: &'a P,
    pub correction: &'a Correction,
}

impl<P: Pairable + ?Sized> Pairable for Corrected<'_, P> {
    fn pairing_at(
        &self,
        delta: f64,
        omega: &StructureForm,
        g: &PairingTest,
        quad: &QuadratureSpec,
    ) -> Result<Complex64, RegularizationError> {
        let base = self.base.pairing_at(delta, omega, g, quad)?;
        let k = omega.pole_order as i64;
        let tpi = Complex64::new(0.0, 2.0 * PI);
        let exact: Complex64 = self
            .correction
            .terms
            .iter()
            .filter(|(e, _)| k - 1 - e >= 0)
            .map(|(e, c)| c * g.poly.coeff(&[(k - 1 - e) as u32]).to_c64() * tpi)
            .sum();
        Ok(base - exact)
    }
}

#[derive(Clone, Debug)]
pub struct MembershipOptions {
    pub schedule: RegularizationSchedule,
    pub quad: QuadratureSpec,
    /// Largest test order; `None` means pole order + 5.
    pub j_max: Option<u32>,
    /// Absolute tolerance on the limits, in units of `|constant_factor|`.
    pub tolerance: f64,
}

impl MembershipOptions {
    /// Schedule with `2δ_max` inside the given radius.
    pub fn within(radius: f64) -> Self {
        MembershipOptions {
            schedule: RegularizationSchedule {
                delta_max: 0.4 * radius,
                ratio: 0.5,
                count: 8,
                extrapolation_order: 2,
            },
            quad: QuadratureSpec::default(),
            j_max: None,
            tolerance: 1e-6,
        }
    }

    pub fn j_max(&self, omega: &StructureForm) -> u32 {
        self.j_max.unwrap_or(omega.pole_order + 5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    Pass,
    /// Tests whose pairing does not tend to zero, with their limits.
    Fail {
        limits: Vec<(String, Complex64)>,
    },
    Diverging {
        test: String,
        exponent: f64,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "Pass"),
            Verdict::Fail { limits } => {
                write!(f, "Fail(")?;
                for (i, (l, v)) in limits.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{l}: {:.3e}{:+.3e}i", v.re, v.im)?;
                }
                write!(f, ")")
            }
            Verdict::Diverging { test, exponent } => {
                write!(f, "Diverging({test}, δ^-{exponent:.2})")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TestPairing {
    pub label: String,
    pub value: Option<CurrentValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub verdict: Verdict,
    /// Pairings with pullback test functions, which decide the verdict.
    pub tests: Vec<TestPairing>,
    /// Pairings with `τʲ`, `j = 0..=J_max`.
    pub moments: Vec<TestPairing>,
}

impl MembershipReport {
    /// The pairing with the constant test function.
    pub fn constant_trace(&self) -> &[(f64, Complex64)] {
        self.tests
            .first()
            .and_then(|t| t.value.as_ref())
            .map_or(&[], |v| v.trace.as_slice())
    }
}

/// `I(δ)` along the schedule, extrapolated to `δ = 0`.
fn pairing<U: Pairable + ?Sized>(
    u: &U,
    omega: &StructureForm,
    g: &PairingTest,
    opts: &MembershipOptions,
) -> Result<CurrentValue, RegularizationError> {
    opts.schedule.validate()?;
    let trace = opts
        .schedule
        .deltas()
        .into_iter()
        .map(|d| u.pairing_at(d, omega, g, &opts.quad).map(|v| (d, v)))
        .collect::<Result<Vec<_>, _>>()?;
    limit_extrapolate(&trace, opts.schedule.extrapolation_order)
}

/// Whether `∂̄χ_δ ∧ u ω̃ → 0`, tested against pullbacks of ambient
/// holomorphic monomials (and `τʲ` for diagnostics).
pub fn membership_test<U: Pairable + ?Sized>(
    u: &U,
    omega: &StructureForm,
    param: &Parametrization,
    opts: &MembershipOptions,
) -> Result<MembershipReport, OperatorError> {
    let j_max = opts.j_max(omega);
    let scale = opts.tolerance * omega.constant_factor.norm();
    let run = |t: &PairingTest| -> Result<(TestPairing, Option<Verdict>), OperatorError> {
        match pairing(u, omega, t, opts) {
            Ok(v) => {
                let limit = v.value;
                let bad = limit.norm() > scale;
                Ok((
                    TestPairing {
                        label: t.label.clone(),
                        value: Some(v),
                    },
                    bad.then(|| Verdict::Fail {
                        limits: vec![(t.label.clone(), limit)],
                    }),
                ))
            }
            Err(RegularizationError::Diverging { exponent, .. }) => Ok((
                TestPairing {
                    label: t.label.clone(),
                    value: None,
                },
                Some(Verdict::Diverging {
                    test: t.label.clone(),
                    exponent,
                }),
            )),
            Err(e) => Err(e.into()),
        }
    };
    let tests = pullback_tests(param, j_max);
    let results: Vec<_> = tests.par_iter().map(run).collect::<Result<_, _>>()?;
    let moments: Vec<_> = (0..=j_max)
        .into_par_iter()
        .map(|j| run(&PairingTest::power(j)).map(|(p, _)| p))
        .collect::<Result<_, _>>()?;
    let mut verdict = Verdict::Pass;
    let mut tests_out = Vec::new();
    for (p, v) in results {
        match (v, &mut verdict) {
            (Some(d @ Verdict::Diverging { .. }), Verdict::Pass | Verdict::Fail { .. }) => {
                verdict = d
            }
            (Some(Verdict::Fail { limits }), Verdict::Pass) => verdict = Verdict::Fail { limits },
            (Some(Verdict::Fail { limits }), Verdict::Fail { limits: all }) => all.extend(limits),
            _ => {}
        }
        tests_out.push(p);
    }
    Ok(MembershipReport {
        verdict,
        tests: tests_out,
        moments,
    })
}

/// Coefficients of `ν = Σ cⱼ ∂̄(1/τ^{j+1}) ∧ dτ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueCoefficients {
    pub c: Vec<Complex64>,
    pub j_max: u32,
    /// `true` where `cⱼ` was below tolerance and set to zero.
    pub tolerance_mask: Vec<bool>,
    pub moments: Vec<CurrentValue>,
    pub warning: Option<String>,
}

/// `cⱼ = Mⱼ/(2πi)` from the moments `Mⱼ = lim ∫ ∂̄χ_δ ∧ u ω̃ τʲ`.
pub fn extract_residue_coeffs<U: Pairable + ?Sized>(
    u: &U,
    omega: &StructureForm,
    j_max: u32,
    opts: &MembershipOptions,
) -> Result<ResidueCoefficients, OperatorError> {
    let moments: Vec<CurrentValue> = (0..=j_max)
        .into_par_iter()
        .map(|j| pairing(u, omega, &PairingTest::power(j), opts))
        .collect::<Result<_, _>>()?;
    let tpi = Complex64::new(0.0, 2.0 * PI);
    let mut c = Vec::new();
    let mut mask = Vec::new();
    for m in &moments {
        let v = m.value / tpi;
        let small = v.norm() <= opts.tolerance;
        mask.push(small);
        c.push(if small { Complex64::zero() } else { v });
    }
    let warning = (!mask[j_max as usize]).then(|| {
        format!("moment {j_max} is above tolerance: the residue may have order beyond J_max, increase it")
    });
    Ok(ResidueCoefficients {
        c,
        j_max,
        tolerance_mask: mask,
        moments,
        warning,
    })
}

/// `ũ₂ = Σ cⱼ τ^{k−j−1} / (C·f(τ))` where `ω̃ = C f dτ/τᵏ`; then
/// `∂̄(ũ₂ω̃) = ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correction {
    /// `(k − j − 1, cⱼ)` for the unmasked coefficients.
    pub terms: Vec<(i64, Complex64)>,
    pub omega: StructureForm,
}

impl Correction {
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::zero();
        }
        let s: Complex64 = self
            .terms
            .iter()
            .map(|(e, c)| c * tau.powi(*e as i32))
            .sum();
        s / (self.omega.constant_factor * self.omega.unit(tau))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_pole(&self) -> bool {
        self.terms.iter().any(|(e, _)| *e < 0)
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        write!(f, "[")?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6e}{:+.6e}i)·τ^{e}", c.re, c.im)?;
        }
        write!(f, "] · τ^k dτ / ω̃,  ω̃ = {}", self.omega)
    }
}

pub fn correct_solution(coeffs: &ResidueCoefficients, omega: &StructureForm) -> Correction {
    let k = omega.pole_order as i64;
    let terms = coeffs
        .c
        .iter()
        .enumerate()
        .filter(|(j, c)| !coeffs.tolerance_mask[*j] && **c != Complex64::zero())
        .map(|(j, c)| (k - j as i64 - 1, *c))
        .collect();
    Correction {
        terms,
        omega: omega.clone(),
    }
}

/// Polar fit `u(ρe^{iθ}) ≈ Σ_p e^{ipθ} Σ_n a_{p,n} ρ^{|p|+2n}` of a function
/// real-analytic near the origin, from samples on circles.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarSurrogate {
    pub radius: f64,
    /// `(p, [a_{p,0}, a_{p,1}, …])` with `ρ` scaled by `radius`.
    pub modes: Vec<(i32, Vec<Complex64>)>,
    /// The samples the fit was built from.
    pub samples: Vec<Sample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurrogateSpec {
    pub radius: f64,
    pub circles: usize,
    pub angles: usize,
    pub radial_terms: usize,
}

impl SurrogateSpec {
    pub fn new(radius: f64) -> Self {
        SurrogateSpec {
            radius,
            circles: 8,
            angles: 64,
            radial_terms: 4,
        }
    }

    /// Circle radii, clustered in `[radius/2, radius]` where low-order
    /// coefficients are best conditioned.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.circles;
        (0..n)
            .map(|i| {
                let x = 0.5 * (1.0 - ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos());
                self.radius * (0.5 + 0.5 * x)
            })
            .collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        let m = self.angles;
        self.radii()
            .into_iter()
            .flat_map(|r| {
                (0..m).map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64))
            })
            .collect()
    }
}

impl PolarSurrogate {
    /// Fit from samples at `spec.points()` (in that order).
    pub fn fit(spec: &SurrogateSpec, samples: Vec<Sample>) -> Self {
        let radii = spec.radii();
        let m = spec.angles;
        let nt = spec.radial_terms.min(spec.circles);
        let half = (m / 2) as i32;
        let mut modes = Vec::new();
        for p in (1 - half)..half {
            // discrete Fourier coefficient of mode p on each circle
            let data: Vec<Complex64> = radii
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let row = &samples[i * m..(i + 1) * m];
                    row.iter()
                        .enumerate()
                        .map(|(j, s)| {
                            s.value
                                * Complex64::from_polar(
                                    1.0,
                                    -2.0 * PI * (p as f64) * j as f64 / m as f64,
                                )
                        })
                        .sum::<Complex64>()
                        / m as f64
                })
                .collect();
            let basis: Vec<Vec<f64>> = radii
                .iter()
                .map(|r| {
                    let x = r / spec.radius;
                    (0..nt).map(|n| x.powi(p.abs() + 2 * n as i32)).collect()
                })
                .collect();
            modes.push((p, least_squares(&basis, &data)));
        }
        PolarSurrogate {
            radius: spec.radius,
            modes,
            samples,
        }
    }

    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let x = tau.norm() / self.radius;
        let th = tau.arg();
        self.modes
            .iter()
            .map(|(p, a)| {
                let mut s = Complex64::zero();
                let mut xp = x.powi(p.abs());
                for c in a {
                    s += c * xp;
                    xp *= x * x;
                }
                s * Complex64::from_polar(1.0, *p as f64 * th)
            })
            .sum()
    }

    /// Coefficient of `τˡ` in the holomorphic part.
    pub fn holomorphic_coefficient(&self, l: u32) -> Complex64 {
        self.modes
            .iter()
            .find(|(p, _)| *p == l as i32)
            .map_or(Complex64::zero(), |(_, a)| {
                a[0] / self.radius.powi(l as i32)
            })
    }
}

/// Exact angular integration of each Fourier mode: only the mode
/// `p = k − 1 − l` meets the `τˡ` coefficient of `g f/h`, and the radial
/// integrand `U_p(r) r^{−p}` has no negative powers, so small `δ` costs no
/// accuracy.
impl Pairable for PolarSurrogate {
    fn pairing_at(
        &self,
        delta: f64,
        omega: &StructureForm,
        g: &PairingTest,
        quad: &QuadratureSpec,
    ) -> Result<Complex64, RegularizationError> {
        let k = omega.pole_order as i32;
        let p_min = self.modes.iter().map(|m| m.0).min().unwrap_or(0);
        let n = (k - 1 - p_min).max(0) as usize;
        let h = g.weighted_series(omega, n);
        let gl = GaussLegendre::new(2 * quad.radial_points);
        let nodes: Vec<(f64, f64)> = gl
            .on(delta, 2.0 * delta)
            .map(|(r, w)| {
                let (_, d) = Cutoff.eval(delta, Complex64::new(r, 0.0));
                (r, 2.0 * d.re * w)
            })
            .collect();
        let mut sum = Complex64::zero();
        for (p, a) in &self.modes {
            let l = k - 1 - p;
            if l < 0 || h[l as usize] == Complex64::zero() {
                continue;
            }
            let radial: Complex64 = nodes
                .iter()
                .map(|&(r, w)| {
                    let x = r / self.radius;
                    let lead = if *p >= 0 {
                        self.radius.powi(-p)
                    } else {
                        x.powi(-p) * r.powi(-p)
                    };
                    let mut v = Complex64::zero();
                    let mut x2n = 1.0;
                    for c in a {
                        v += c * x2n;
                        x2n *= x * x;
                    }
                    v * lead * w
                })
                .sum();
            sum += h[l as usize] * radial;
        }
        Ok(sum * omega.constant_factor * Complex64::new(0.0, 2.0 * PI))
    }
}

/// Least squares `min ‖B x − d‖` by modified Gram–Schmidt (real `B`).
fn least_squares(b: &[Vec<f64>], d: &[Complex64]) -> Vec<Complex64> {
    let rows = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut q: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| b[i][j]).collect())
        .collect();
    let mut r = vec![vec![0.0; cols]; cols];
    for j in 0..cols {
        for k in 0..j {
            let dot: f64 = (0..rows).map(|i| q[k][i] * q[j][i]).sum();
            r[k][j] = dot;
            for i in 0..rows {
                q[j][i] -= dot * q[k][i];
            }
        }
        let norm = (0..rows).map(|i| q[j][i] * q[j][i]).sum::<f64>().sqrt();
        r[j][j] = norm;
        if norm > 0.0 {
            for i in 0..rows {
                q[j][i] /= norm;
            }
        }
    }
    let qtd: Vec<Complex64> = (0..cols)
        .map(|j| (0..rows).map(|i| d[i] * q[j][i]).sum())
        .collect();
    let mut x = vec![Complex64::zero(); cols];
    for j in (0..cols).rev() {
        let mut s = qtd[j];
        for k in j + 1..cols {
            s -= x[k] * r[j][k];
        }
        x[j] = if r[j][j] > 1e-300 {
            s / r[j][j]
        } else {
            Complex64::zero()
        };
    }
    x
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub quad: QuadratureSpec,
    pub surrogate: SurrogateSpec,
    pub membership: MembershipOptions,
    /// Regular points where `∂̄u − μ` is checked.
    pub residual_targets: Vec<Complex64>,
}

impl SolveOptions {
    /// Defaults for a kernel and a right-hand side: the surrogate sits well
    /// inside the region where both the weight and `μ`'s bump are flat.
    pub fn for_problem(kernel: &KernelSpec, mu: &TestForm) -> Self {
        let flat = mu.bump.map_or(kernel.weight.cutoff.inner, |b| {
            b.inner.min(kernel.weight.cutoff.inner)
        });
        let surrogate = SurrogateSpec::new(0.6 * flat);
        let rho = kernel.disc_radius;
        let residual_targets = (0..8)
            .map(|i| {
                let r = 0.2 + (0.6 * rho - 0.2) * (i % 4) as f64 / 3.0;
                Complex64::from_polar(r.min(0.9 * flat), 0.3 + 0.785 * i as f64)
            })
            .collect();
        SolveOptions {
            // one refinement already resolves Kμ to about 1e-9
            quad: QuadratureSpec {
                max_refinements: 1,
                ..QuadratureSpec::default()
            },
            membership: MembershipOptions::within(surrogate.radius),
            surrogate,
            residual_targets,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// `u₁ = Kμ` on the surrogate grid.
    pub raw_solution_samples: Vec<Sample>,
    pub surrogate: PolarSurrogate,
    pub coefficients: ResidueCoefficients,
    pub correction: Correction,
    pub membership_before: MembershipReport,
    pub membership_after: MembershipReport,
    /// `(t, |∂̄u − μ̂|(t))`.
    pub dbar_residuals: Vec<(Complex64, f64)>,
}

impl SolveReport {
    /// `u = u₁ − ũ₂` near the origin (inside the surrogate radius).
    pub fn solution_near_origin(&self, tau: Complex64) -> Complex64 {
        self.surrogate.eval(tau) - self.correction.eval(tau)
    }

    pub fn max_dbar_residual(&self) -> f64 {
        self.dbar_residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

/// `u₁ = Kμ`, its residue at the singular point, and the corrected
/// `u = u₁ − ũ₂` with `∂̄u = μ` and `u ∈ Dom ∂̄_X`.
pub fn solve_dbar(
    kernel: &KernelSpec,
    mu: &TestForm,
    opts: &SolveOptions,
) -> Result<SolveReport, OperatorError> {
    let kernel = kernel.clone().with_role(KernelRole::SolutionK);
    let param = kernel.param.as_ref().ok_or_else(|| {
        KernelError::Curve(crate::curve::CurveError::Unsupported(
            "solve_dbar needs a curve kernel".into(),
        ))
    })?;
    let omega = kernel
        .structure
        .clone()
        .expect("curve kernel has a structure form");
    let raw = apply_k(&kernel, mu, &opts.surrogate.points(), &opts.quad)?;
    let surrogate = PolarSurrogate::fit(&opts.surrogate, raw.clone());
    let membership_before = membership_test(&surrogate, &omega, param, &opts.membership)?;
    let j_max = opts.membership.j_max(&omega);
    let coefficients = extract_residue_coeffs(&surrogate, &omega, j_max, &opts.membership)?;
    let correction = correct_solution(&coefficients, &omega);
    let u = Corrected {
        base: &surrogate,
        correction: &correction,
    };
    let membership_after = membership_test(&u, &omega, param, &opts.membership)?;
    let h = fd_step(&opts.quad);
    let dbar_residuals = opts
        .residual_targets
        .par_iter()
        .map(|&t| {
            let d = dbar_fd(
                |s| k_value(&kernel, mu, s, &opts.quad).map(|v| v.value - correction.eval(s)),
                t,
                h,
            )?;
            let chi = kernel.weight.cutoff.value(t);
            Ok((t, (d - chi * mu.eval(t)).norm()))
        })
        .collect::<Result<Vec<_>, OperatorError>>()?;
    Ok(SolveReport {
        raw_solution_samples: raw,
        surrogate,
        coefficients,
        correction,
        membership_before,
        membership_after,
        dbar_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_cusp, normalize, pullback_form, structure_form};
    use crate::kernels::{curve_kernel_assemble, smooth_disc_kernel, WeightSpec};
    use crate::parse::{parse_poly, VarTable};
    use crate::poly::AmbientPoly;
    use crate::regularization::Bump;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn amb(s: &str) -> AmbientPoly<crate::poly::QI> {
        parse_poly(s, &VarTable::ambient()).unwrap()
    }

    #[test]
    fn cauchy_transform_on_disc() {
        let k = smooth_disc_kernel(1.0, WeightSpec::for_disc(1.0), KernelRole::SolutionK);
        let b = Bump::new(0.4, 0.7);
        let psi = TestForm::parse("conj(t)", Some(b)).unwrap();
        let phi = psi.dbar().unwrap();
        let q = QuadratureSpec::default();
        let t = c(0.2, 0.1);
        // inside the flat region Kφ = ψ since ψ has compact support
        let v = k_value(&k, &phi, t, &q).unwrap();
        assert!((v.value - t.conj()).norm() < 1e-9, "{}", v.value);
    }

    #[test]
    fn cusp_k_and_identity() {
        let spec = make_cusp(2, 3, 1.0).unwrap();
        let param = normalize(&spec).unwrap();
        let w = WeightSpec::for_disc(param.disc_radius);
        let k = curve_kernel_assemble(&spec, w, KernelRole::SolutionK).unwrap();
        // pullback of dζ̄₂ = 2τ̄ dτ̄; Kφ = τ̄² where the bump is flat
        let phi = pullback_form(&param, &amb("0"), &amb("1"), Some(Bump::new(0.4, 0.6)));
        let q = QuadratureSpec::default();
        let t = c(0.3, 0.1);
        let v = k_value(&k, &phi, t, &q).unwrap();
        assert!((v.value - t.conj().powu(2)).norm() < 1e-8);
        let rep = verify_koppelman(&k, &phi, &[c(0.3, 0.1), c(-0.2, 0.25)], &q).unwrap();
        assert!(rep.max_residual < 1e-6);
        assert!(apply_p(&k, &phi, &[t], &q).is_err());
    }

    #[test]
    fn planted_pole_is_recovered() {
        let spec = make_cusp(2, 3, 1.0).unwrap();
        let param = normalize(&spec).unwrap();
        let omega = structure_form(&spec).unwrap();
        let planted = c(0.25, -0.5);
        let f = |t: Complex64| t.conj() * t * t + planted / t;
        let u = Sampled(f);
        let opts = MembershipOptions::within(0.3);
        let rep = membership_test(&u, &omega, &param, &opts).unwrap();
        assert!(!rep.verdict.is_pass());
        let co = extract_residue_coeffs(&u, &omega, 7, &opts).unwrap();
        let corr = correct_solution(&co, &omega);
        assert_eq!(corr.terms.len(), 1);
        let t = c(0.1, 0.2);
        assert!((corr.eval(t) - planted / t).norm() < 1e-6);
        let fixed = Sampled(|t: Complex64| f(t) - corr.eval(t));
        let rep = membership_test(&fixed, &omega, &param, &opts).unwrap();
        assert!(rep.verdict.is_pass(), "{}", rep.verdict);
        let fixed = Corrected {
            base: &u,
            correction: &corr,
        };
        let rep = membership_test(&fixed, &omega, &param, &opts).unwrap();
        assert!(rep.verdict.is_pass(), "{}", rep.verdict);
    }

    #[test]
    fn surrogate_fits_polynomial() {
        let spec = SurrogateSpec::new(0.3);
        let f = |t: Complex64| 1.0 + t * 2.0 + t.conj() * t * t + t.powu(9) * 0.5;
        let s: Vec<Sample> = spec
            .points()
            .into_iter()
            .map(|t| Sample {
                t,
                value: f(t),
                error: 0.0,
            })
            .collect();
        let sur = PolarSurrogate::fit(&spec, s);
        for t in [c(0.01, 0.0), c(0.1, -0.05), c(0.0, 0.25)] {
            assert!((sur.eval(t) - f(t)).norm() < 1e-12);
        }
        assert!((sur.holomorphic_coefficient(9) - 0.5).norm() < 1e-6);
    }

    #[test]
    fn solve_on_intro_curve() {
        let t3 = parse_poly::<1>("t^3", &VarTable::univariate()).unwrap();
        let t78 = parse_poly::<1>("t^7+t^8", &VarTable::univariate()).unwrap();
        let spec = crate::curve::make_map(t3, t78, 1.0).unwrap();
        let param = normalize(&spec).unwrap();
        let w = WeightSpec::for_disc(param.disc_radius);
        let k = curve_kernel_assemble(&spec, w, KernelRole::SolutionK).unwrap();
        // w̄ dz̄ = 3(τ̄⁹ + τ̄¹⁰) dτ̄
        let mu = pullback_form(&param, &amb("zb2"), &amb("0"), Some(Bump::new(0.4, 0.6)));
        let rep = solve_dbar(&k, &mu, &SolveOptions::for_problem(&k, &mu)).unwrap();
        assert!(
            rep.membership_after.verdict.is_pass(),
            "{}",
            rep.membership_after.verdict
        );
        assert!(rep.max_dbar_residual() < 1e-4);
        // the antiholomorphic primitive survives near the origin
        let t = c(0.05, 0.03);
        let expect = t.conj().powu(10) * 0.3 + t.conj().powu(11) * (3.0 / 11.0);
        let hol = rep.solution_near_origin(t) - expect;
        assert!(hol.norm() < 1e-6, "{hol}");
    }

    fn cusp23() -> (KernelSpec, Parametrization) {
        let spec = make_cusp(2, 3, 1.0).unwrap();
        let param = normalize(&spec).unwrap();
        let w = WeightSpec::for_disc(param.disc_radius);
        (
            curve_kernel_assemble(&spec, w, KernelRole::SolutionK).unwrap(),
            param,
        )
    }

    #[test]
    fn solve_exact_right_hand_side() {
        let (k, param) = cusp23();
        let psi = crate::curve::pullback_function(
            &param,
            &amb("zb2 + z1*zb1"),
            Some(Bump::new(0.4, 0.6)),
        );
        let mu = psi.dbar().unwrap();
        let rep = solve_dbar(&k, &mu, &SolveOptions::for_problem(&k, &mu)).unwrap();
        assert!(rep.membership_before.verdict.is_pass());
        assert!(rep.correction.is_zero());
        assert!(rep.membership_after.verdict.is_pass());
        assert!(rep.max_dbar_residual() < 1e-4);
    }

    #[test]
    fn solve_with_nontrivial_correction() {
        let (k, param) = cusp23();
        // ζ₂ dζ̄₂ pulls back to 2τ²τ̄ dτ̄; Kμ picks up a constant, which the
        // τ moments see even though it is strongly holomorphic
        let mu = pullback_form(&param, &amb("0"), &amb("z2"), Some(Bump::new(0.4, 0.6)));
        let rep = solve_dbar(&k, &mu, &SolveOptions::for_problem(&k, &mu)).unwrap();
        assert!(rep.membership_before.verdict.is_pass());
        assert_eq!(rep.correction.terms.len(), 1);
        assert_eq!(rep.correction.terms[0].0, 0);
        assert!(
            rep.membership_after.verdict.is_pass(),
            "{}",
            rep.membership_after.verdict
        );
        assert!(rep.max_dbar_residual() < 1e-4);
    }
}
