//! Integrand data for the solution operator `K` and the projection `P`:
//! Hefer divided differences, the Bochner–Martinelli form, the
//! compact-support weight and the kernels on curves.
//!
//! On a curve with normalization `γ`, both operators are area integrals on
//! the parameter disc against the scalar factor
//!
//! ```text
//! F(τ, t) = g₁(γ(τ), γ(t)) / (γ₂(τ) − γ₂(t)) · γ₂′(τ) / (∂a/∂ζ₁)(γ(τ)),
//! ```
//!
//! which is `1/(τ − t)` plus a function holomorphic in `t` with a pole of
//! order `k` at `τ = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::curve::{
    normalize, structure_form, CurveError, CurveKind, CurveSpec, Parametrization, PlanePoly,
    StructureForm,
};
use crate::poly::{Poly, Poly1, QI};
use crate::regularization::{Bump, QuadratureSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel evaluated on the diagonal")]
    PoleAtDiagonal,
    #[error("weight denominator |ζ|² − ζ̄·z vanishes")]
    DenominatorVanishes,
    #[error("Hefer branches disagree at τ = {tau}, t = {t}: {a} vs {b}")]
    InconsistentBranches {
        tau: Complex64,
        t: Complex64,
        a: Complex64,
        b: Complex64,
    },
    #[error("ambient dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Polynomial in `(ζ₁, ζ₂, z₁, z₂)`.
pub type HeferPoly = Poly<QI, 4>;

/// `g₁, g₂` with `(ζ₁ − z₁)g₁ + (ζ₂ − z₂)g₂ = a(ζ) − a(z)`. The Hefer form
/// is `h = normalization · Σ gⱼ dηⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeferData {
    pub a: PlanePoly,
    pub g1: HeferPoly,
    pub g2: HeferPoly,
    pub normalization: Complex64,
}

/// Telescoping divided differences of every monomial `ζ₁^α ζ₂^β`.
pub fn hefer(a: &PlanePoly) -> HeferData {
    let mut g1 = HeferPoly::zero();
    let mut g2 = HeferPoly::zero();
    for (e, c) in a.terms() {
        let (al, be) = (e[0], e[1]);
        // (ζ₁^α − z₁^α) ζ₂^β = (ζ₁ − z₁) Σ_{i<α} ζ₁^i z₁^{α−1−i} ζ₂^β
        for i in 0..al {
            g1.add_term([i, be, al - 1 - i, 0], c.clone());
        }
        // z₁^α (ζ₂^β − z₂^β) = (ζ₂ − z₂) z₁^α Σ_{j<β} ζ₂^j z₂^{β−1−j}
        for j in 0..be {
            g2.add_term([0, j, al, be - 1 - j], c.clone());
        }
    }
    HeferData {
        a: a.clone(),
        g1,
        g2,
        normalization: Complex64::new(0.0, -1.0 / (2.0 * PI)),
    }
}

impl HeferData {
    /// `(ζ₁−z₁)g₁ + (ζ₂−z₂)g₂ − a(ζ) + a(z)`, exactly.
    pub fn identity_defect(&self) -> HeferPoly {
        let v = |i: usize| HeferPoly::var(i);
        let a_zeta = self.a.compose(&[v(0), v(1)]);
        let a_z = self.a.compose(&[v(2), v(3)]);
        let lhs = &(&(&v(0) - &v(2)) * &self.g1) + &(&(&v(1) - &v(3)) * &self.g2);
        &(&lhs - &a_zeta) + &a_z
    }
}

/// Components of the Bochner–Martinelli form at `(ζ, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BochnerMartinelli {
    /// `B₁ = Σ η̄ⱼ dηⱼ / (2πi |η|²)`: coefficients of `dη₁, …, dη_N`.
    pub b1: Vec<Complex64>,
    /// For `N = 2`: `B₂ = s∧∂̄s/((2πi)²|η|⁴)`, coefficients of
    /// `dη₁∧dη̄₂∧dη₂` and `dη₂∧dη̄₁∧dη₁`.
    pub b2: Vec<Complex64>,
}

pub fn bm_form_eval(
    n: usize,
    zeta: &[Complex64],
    z: &[Complex64],
) -> Result<BochnerMartinelli, KernelError> {
    if !(1..=2).contains(&n) || zeta.len() != n || z.len() != n {
        return Err(KernelError::BadDimension(n));
    }
    let eta: Vec<Complex64> = zeta.iter().zip(z).map(|(a, b)| a - b).collect();
    let r2: f64 = eta.iter().map(|e| e.norm_sqr()).sum();
    if r2 == 0.0 {
        return Err(KernelError::PoleAtDiagonal);
    }
    let tpi = Complex64::new(0.0, 2.0 * PI);
    let b1 = eta.iter().map(|e| e.conj() / (tpi * r2)).collect();
    let b2 = if n == 2 {
        let d = tpi * tpi * r2 * r2;
        vec![eta[0].conj() / d, eta[1].conj() / d]
    } else {
        Vec::new()
    };
    Ok(BochnerMartinelli { b1, b2 })
}

/// Compactly supported weight `g = χ − ∂̄χ ∧ Σ σ∧(∂̄σ)^{k−1}`,
/// `σ = ζ̄·dη / (2πi(|ζ|² − ζ̄·z))`, holomorphic in `z`.
///
/// In ambient evaluations the cutoff acts on `|ζ|`; curve kernels apply the
/// same profile to the parameter radius `|τ|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec {
    pub ambient_dimension: usize,
    pub cutoff: Bump,
    pub holomorphic_in_z: bool,
}

impl WeightSpec {
    pub fn new(ambient_dimension: usize, cutoff: Bump) -> Self {
        WeightSpec {
            ambient_dimension,
            cutoff,
            holomorphic_in_z: true,
        }
    }

    /// Default weight on a parameter disc: flat on `|τ| ≤ 0.75ρ`, zero
    /// beyond `ρ`.
    pub fn for_disc(disc_radius: f64) -> Self {
        WeightSpec::new(2, Bump::new(0.75 * disc_radius, disc_radius))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightComponents {
    /// `g₀ = χ(ζ)`.
    pub g0: f64,
    /// `∂χ/∂ζ̄ⱼ`.
    pub dbar_chi: Vec<Complex64>,
    /// `σ = Σ σⱼ dηⱼ`.
    pub sigma: Vec<Complex64>,
}

pub fn weight_vikt_eval(
    w: &WeightSpec,
    zeta: &[Complex64],
    z: &[Complex64],
) -> Result<WeightComponents, KernelError> {
    let n = w.ambient_dimension;
    if !(1..=2).contains(&n) || zeta.len() != n || z.len() != n {
        return Err(KernelError::BadDimension(n));
    }
    let r = zeta.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let g0 = w.cutoff.at_radius(r);
    let dr = w.cutoff.radial_derivative(r);
    let dbar_chi = zeta
        .iter()
        .map(|x| {
            if r == 0.0 || dr == 0.0 {
                Complex64::zero()
            } else {
                x * (dr / (2.0 * r))
            }
        })
        .collect();
    let den: Complex64 = zeta
        .iter()
        .zip(z)
        .map(|(a, b)| a.norm_sqr() - a.conj() * b)
        .sum();
    if den.norm() <= 1e-300 {
        return Err(KernelError::DenominatorVanishes);
    }
    let tpi = Complex64::new(0.0, 2.0 * PI);
    let sigma = zeta.iter().map(|x| x.conj() / (tpi * den)).collect();
    Ok(WeightComponents {
        g0,
        dbar_chi,
        sigma,
    })
}

/// Closed-form cusp factor `F(τ,t) = Q(τ,t)/((τ−t)τᴰ)`, `D = (r−1)(s−1)`,
/// with `Q = (τ^{rs}−t^{rs})(τ−t)/((τˢ−tˢ)(τʳ−tʳ))` homogeneous of degree
/// `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspKernel {
    pub r: u32,
    pub s: u32,
    pub d: u32,
    /// `Q(τ, t) = Σ q[k] τᵏ t^{D−k}`.
    pub q: Vec<f64>,
}

impl CuspKernel {
    pub fn new(r: u32, s: u32) -> Self {
        let x = Poly1::<QI>::var(0);
        let one = Poly1::<QI>::one();
        let num = &(&x.pow(r * s) - &one) * &(&x - &one);
        let den = &(&x.pow(s) - &one) * &(&x.pow(r) - &one);
        let (quot, rem) = num.div_rem(&den).expect("nonzero divisor");
        assert!(rem.is_zero(), "cyclotomic quotient is exact");
        let d = (r - 1) * (s - 1);
        let q = (0..=d).map(|k| quot.coeff(&[k]).to_c64().re).collect();
        CuspKernel { r, s, d, q }
    }

    /// `Q(τ,t)/τᴰ`; equals 1 on the diagonal.
    pub fn residue_coefficient(&self, tau: Complex64, t: Complex64) -> Complex64 {
        let ratio = t / tau;
        // Σ q[k] (t/τ)^{D−k}
        self.q
            .iter()
            .enumerate()
            .fold(Complex64::zero(), |acc, (k, c)| {
                acc + c * ratio.powu(self.d - k as u32)
            })
    }

    pub fn factor(&self, tau: Complex64, t: Complex64) -> Complex64 {
        self.residue_coefficient(tau, t) / (tau - t)
    }
}

/// `(τ^{rs}−t^{rs})/((τˢ−tˢ)(τʳ−tʳ)) / τ^{(r−1)(s−1)}`; falls back to the
/// factored form when the direct quotient is ill-conditioned.
pub fn cusp_kernel_factor(
    r: u32,
    s: u32,
    tau: Complex64,
    t: Complex64,
) -> Result<Complex64, KernelError> {
    if tau == t || tau == Complex64::zero() {
        return Err(KernelError::PoleAtDiagonal);
    }
    let scale = tau.norm().max(t.norm());
    let ds = tau.powu(s) - t.powu(s);
    let dr = tau.powu(r) - t.powu(r);
    let ok = |d: Complex64, k: u32| d.norm() > 1e-3 * scale.powi(k as i32);
    if ok(ds, s) && ok(dr, r) {
        let d = (r - 1) * (s - 1);
        Ok((tau.powu(r * s) - t.powu(r * s)) / (ds * dr) / tau.powu(d))
    } else {
        Ok(CuspKernel::new(r, s).factor(tau, t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelVariant {
    CuspClosedForm,
    GeneralCodimOne,
    SmoothDisc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelRole {
    SolutionK,
    ProjectionP,
}

#[derive(Clone, Debug)]
struct Dense4(Vec<([u32; 4], Complex64)>);

impl Dense4 {
    fn new(p: &HeferPoly) -> Self {
        Dense4(p.terms().map(|(e, c)| (*e, c.to_c64())).collect())
    }

    fn eval(&self, x: [Complex64; 4]) -> Complex64 {
        self.0
            .iter()
            .map(|(e, c)| {
                let mut v = *c;
                for (xi, k) in x.iter().zip(e) {
                    if *k > 0 {
                        v *= xi.powu(*k);
                    }
                }
                v
            })
            .sum()
    }
}

/// Assembled kernel on a curve (or on a disc in `C`).
#[derive(Clone, Debug)]
pub struct KernelSpec {
    pub curve: Option<CurveSpec>,
    pub param: Option<Parametrization>,
    pub hefer: Option<HeferData>,
    pub weight: WeightSpec,
    pub structure: Option<StructureForm>,
    pub variant: KernelVariant,
    pub role: KernelRole,
    /// Radius of the parameter disc carrying the integrals.
    pub disc_radius: f64,
    cusp: Option<CuspKernel>,
    g1: Option<Dense4>,
    g2: Option<Dense4>,
}

/// Branch threshold on `|η|` below which a divided difference is avoided.
const BRANCH_THRESHOLD: f64 = 1e-3;

impl KernelSpec {
    /// The scalar factor `F(τ, t)`.
    pub fn factor(&self, tau: Complex64, t: Complex64) -> Complex64 {
        match self.variant {
            KernelVariant::SmoothDisc => 1.0 / (tau - t),
            KernelVariant::CuspClosedForm => self.cusp.as_ref().expect("cusp data").factor(tau, t),
            KernelVariant::GeneralCodimOne => self.general_factor(tau, t).0,
        }
    }

    /// General factor and which Hefer branch produced it (1 or 2).
    fn general_factor(&self, tau: Complex64, t: Complex64) -> (Complex64, u8) {
        let (a, b) = self.branches(tau, t);
        let s = self.structure_unit(tau);
        match (a, b) {
            (Some(a), _) => (a * s, 1),
            (None, Some(b)) => (b * s, 2),
            (None, None) => {
                // both differences tiny: take the larger one
                let p = self.param.as_ref().expect("curve kernel");
                let (zt, zz) = (p.gamma(tau), p.gamma(t));
                let x = [zt[0], zt[1], zz[0], zz[1]];
                let (e1, e2) = (zt[0] - zz[0], zt[1] - zz[1]);
                if e2.norm() >= e1.norm() {
                    (self.g1.as_ref().unwrap().eval(x) / e2 * s, 1)
                } else {
                    (-self.g2.as_ref().unwrap().eval(x) / e1 * s, 2)
                }
            }
        }
    }

    /// `g₁/η₂` and `−g₂/η₁` where their denominators are well conditioned.
    fn branches(&self, tau: Complex64, t: Complex64) -> (Option<Complex64>, Option<Complex64>) {
        let p = self.param.as_ref().expect("curve kernel");
        let (zt, zz) = (p.gamma(tau), p.gamma(t));
        let x = [zt[0], zt[1], zz[0], zz[1]];
        let e1 = zt[0] - zz[0];
        let e2 = zt[1] - zz[1];
        let a = (e2.norm() > BRANCH_THRESHOLD).then(|| self.g1.as_ref().unwrap().eval(x) / e2);
        let b = (e1.norm() > BRANCH_THRESHOLD).then(|| -self.g2.as_ref().unwrap().eval(x) / e1);
        (a, b)
    }

    /// `γ₂′/(∂a/∂ζ₁)∘γ = ω̃/(−2πi dτ)`.
    fn structure_unit(&self, tau: Complex64) -> Complex64 {
        let sf = self.structure.as_ref().expect("structure form");
        sf.coefficient(tau) / Complex64::new(0.0, -2.0 * PI)
    }

    /// Weight value `χ(τ)` and `∂χ/∂τ̄`.
    pub fn chi(&self, tau: Complex64) -> (f64, Complex64) {
        (self.weight.cutoff.value(tau), self.weight.cutoff.dbar(tau))
    }

    /// Pole order of `F(·, t)` at the parameter origin.
    pub fn origin_pole_order(&self) -> u32 {
        match self.variant {
            KernelVariant::SmoothDisc => 0,
            _ => self.structure.as_ref().map_or(0, |s| s.pole_order),
        }
    }

    pub fn with_role(mut self, role: KernelRole) -> Self {
        self.role = role;
        self
    }

    /// Largest disagreement of the two Hefer branches on sampled pairs of
    /// curve points where both are well conditioned.
    pub fn branch_consistency(&self, samples: usize) -> Result<f64, KernelError> {
        if self.param.is_none() {
            return Ok(0.0);
        }
        let rho = self.disc_radius;
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let tau = Complex64::from_polar(
                rho * (0.2 + 0.7 * frac(i, 0.618)),
                std::f64::consts::TAU * frac(i, 0.414),
            );
            let t = Complex64::from_polar(
                rho * (0.2 + 0.6 * frac(i, 0.732)),
                std::f64::consts::TAU * frac(i, 0.236),
            );
            if let (Some(a), Some(b)) = self.branches(tau, t) {
                let d = (a - b).norm() / a.norm().max(b.norm()).max(1.0);
                if d > 1e-10 {
                    return Err(KernelError::InconsistentBranches { tau, t, a, b });
                }
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }
}

fn frac(i: usize, alpha: f64) -> f64 {
    ((i as f64 + 1.0) * alpha).fract()
}

/// Cauchy kernel `χ dζ/(2πi(ζ − z))` on a disc in `C`.
pub fn smooth_disc_kernel(disc_radius: f64, weight: WeightSpec, role: KernelRole) -> KernelSpec {
    KernelSpec {
        curve: None,
        param: None,
        hefer: None,
        weight,
        structure: None,
        variant: KernelVariant::SmoothDisc,
        role,
        disc_radius,
        cusp: None,
        g1: None,
        g2: None,
    }
}

/// Kernel of a curve: the closed cusp form for monomial cusps, otherwise
/// the Hefer construction.
pub fn curve_kernel_assemble(
    spec: &CurveSpec,
    weight: WeightSpec,
    role: KernelRole,
) -> Result<KernelSpec, KernelError> {
    let variant = match spec.kind {
        CurveKind::MonomialCusp { .. } => KernelVariant::CuspClosedForm,
        _ => KernelVariant::GeneralCodimOne,
    };
    assemble_variant(spec, weight, role, variant)
}

/// As [`curve_kernel_assemble`] with an explicit variant (the general
/// construction is valid for every curve).
pub fn assemble_variant(
    spec: &CurveSpec,
    weight: WeightSpec,
    role: KernelRole,
    variant: KernelVariant,
) -> Result<KernelSpec, KernelError> {
    let param = normalize(spec)?;
    let a = spec.defining_polynomial()?;
    let h = hefer(&a);
    let structure = structure_form(spec)?;
    let cusp = match (variant, &spec.kind) {
        (KernelVariant::CuspClosedForm, CurveKind::MonomialCusp { r, s }) => {
            Some(CuspKernel::new(*r, *s))
        }
        (KernelVariant::CuspClosedForm, _) => {
            return Err(CurveError::Unsupported("closed form needs a monomial cusp".into()).into())
        }
        _ => None,
    };
    let k = KernelSpec {
        curve: Some(spec.clone()),
        disc_radius: param.disc_radius,
        g1: Some(Dense4::new(&h.g1)),
        g2: Some(Dense4::new(&h.g2)),
        param: Some(param),
        hefer: Some(h),
        weight,
        structure: Some(structure),
        variant,
        role,
        cusp,
    };
    k.branch_consistency(64)?;
    Ok(k)
}

/// Reproduction of a strongly holomorphic `φ` by the boundary integral
/// `(1/2πi) ∮_{|τ|=ρ} F(τ,t) φ(γ(τ)) dτ` over the circle where `γ` meets
/// the sphere of the ball radius.
pub fn stout_boundary_kernel(
    spec: &CurveSpec,
    phi: &PlanePoly,
    t: Complex64,
    quad: &QuadratureSpec,
) -> Result<Complex64, KernelError> {
    let w = WeightSpec::for_disc(1.0);
    let k = assemble_variant(
        spec,
        w,
        KernelRole::ProjectionP,
        KernelVariant::GeneralCodimOne,
    )?;
    let p = k.param.as_ref().expect("curve");
    let rho = p.disc_radius;
    let phi_c = Poly::<Complex64, 2>::from_terms(phi.terms().map(|(e, c)| (*e, c.to_c64())));
    let n = quad.angular_points.max(4) << quad.max_refinements;
    let mut s = Complex64::zero();
    let dth = 2.0 * PI / n as f64;
    for j in 0..n {
        let u = Complex64::from_polar(1.0, (j as f64 + 0.5) * dth);
        let tau = u * rho;
        let g = p.gamma(tau);
        let dtau = Complex64::i() * tau * dth;
        s += k.factor(tau, t) * phi_c.eval(&g) * dtau;
    }
    Ok(s / Complex64::new(0.0, 2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_cusp, make_map};
    use crate::parse::{parse_poly, VarTable};
    use num_traits::One;

    fn plane(s: &str) -> PlanePoly {
        parse_poly(s, &VarTable::plane()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hefer_examples() {
        let h = hefer(&plane("z1^2"));
        assert!(h.g2.is_zero());
        assert_eq!(h.g1.len(), 2);
        assert!(h.identity_defect().is_zero());
        let h = hefer(&plane("z1^2 - z2^3"));
        assert!(h.identity_defect().is_zero());
        // g₂ = −(ζ₂² + ζ₂z₂ + z₂²)
        assert_eq!(h.g2.coeff(&[0, 2, 0, 0]), -QI::one());
        assert_eq!(h.g2.coeff(&[0, 1, 0, 1]), -QI::one());
        assert_eq!(h.g2.coeff(&[0, 0, 0, 2]), -QI::one());
        let h = hefer(&plane("0"));
        assert!(h.g1.is_zero() && h.g2.is_zero());
        assert!((h.normalization * Complex64::new(0.0, 2.0 * PI) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn bm_examples() {
        let b = bm_form_eval(1, &[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert!((b.b1[0] - 1.0 / c(0.0, 2.0 * PI)).norm() < 1e-15);
        let b = bm_form_eval(1, &[c(0.0, 2.0)], &[c(0.0, 1.0)]).unwrap();
        assert!((b.b1[0] - c(-1.0 / (2.0 * PI), 0.0)).norm() < 1e-15);
        assert_eq!(
            bm_form_eval(1, &[c(0.5, 0.0)], &[c(0.5, 0.0)]),
            Err(KernelError::PoleAtDiagonal)
        );
    }

    #[test]
    fn weight_examples() {
        let w = WeightSpec::new(1, Bump::new(0.5, 1.0));
        let g = weight_vikt_eval(&w, &[c(0.3, 0.1)], &[c(0.0, 0.0)]).unwrap();
        assert_eq!(g.g0, 1.0);
        assert!(g.dbar_chi[0].norm() == 0.0);
        let g = weight_vikt_eval(&w, &[c(0.9, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert!((g.sigma[0] - 1.0 / (c(0.0, 2.0 * PI) * 0.9)).norm() < 1e-15);
        assert_eq!(
            weight_vikt_eval(&w, &[c(0.0, 0.0)], &[c(0.2, 0.0)]),
            Err(KernelError::DenominatorVanishes)
        );
    }

    #[test]
    fn cusp_factor_examples() {
        assert!(
            (cusp_kernel_factor(2, 3, c(2.0, 0.0), c(1.0, 0.0)).unwrap() - 0.75).norm() < 1e-15
        );
        assert!((cusp_kernel_factor(2, 3, c(1.0, 0.0), c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        let k = CuspKernel::new(2, 3);
        assert_eq!(k.q, vec![1.0, -1.0, 1.0]);
        let z = c(0.4, 0.3);
        assert!((k.residue_coefficient(z, z) - 1.0).norm() < 1e-15);
        // guarded branch near a nontrivial coincidence τ³ = t³
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let t = c(0.5, 0.1);
        let tau = t * w + 1e-9;
        let guarded = cusp_kernel_factor(2, 3, tau, t).unwrap();
        assert!((guarded - k.factor(tau, t)).norm() < 1e-9);
    }

    #[test]
    fn general_kernel_matches_cusp_closed_form() {
        for (r, s) in [(2, 3), (2, 5), (3, 4)] {
            let spec = make_cusp(r, s, 1.0).unwrap();
            let w = WeightSpec::for_disc(1.0);
            let g = assemble_variant(
                &spec,
                w,
                KernelRole::SolutionK,
                KernelVariant::GeneralCodimOne,
            )
            .unwrap();
            let k = curve_kernel_assemble(&spec, w, KernelRole::SolutionK).unwrap();
            for (tau, t) in [
                (c(0.5, 0.2), c(-0.3, 0.1)),
                (c(2.0, 0.0), c(1.0, 0.0)),
                (c(0.1, -0.4), c(0.35, 0.0)),
            ] {
                let (a, b) = (g.factor(tau, t), k.factor(tau, t));
                assert!(
                    (a - b).norm() < 1e-10 * b.norm().max(1.0),
                    "({r},{s}) {a} {b}"
                );
            }
        }
    }

    #[test]
    fn intro_kernel_is_consistent() {
        let t3 = parse_poly::<1>("t^3", &VarTable::univariate()).unwrap();
        let t78 = parse_poly::<1>("t^7+t^8", &VarTable::univariate()).unwrap();
        let spec = make_map(t3, t78, 1.0).unwrap();
        let k =
            curve_kernel_assemble(&spec, WeightSpec::for_disc(0.5), KernelRole::SolutionK).unwrap();
        assert!(k.branch_consistency(200).unwrap() < 1e-10);
        // Cauchy pole with unit residue
        let t = c(0.3, 0.2);
        let e = 1e-6;
        let res = k.factor(t + e, t) * e;
        assert!((res - 1.0).norm() < 1e-4);
    }

    #[test]
    fn stout_reproduces_strongly_holomorphic() {
        let spec = make_cusp(2, 3, 1.0).unwrap();
        let q = QuadratureSpec::default();
        let t = c(0.3, 0.0);
        let one = stout_boundary_kernel(&spec, &plane("1"), t, &q).unwrap();
        assert!((one - 1.0).norm() < 1e-10);
        let v = stout_boundary_kernel(&spec, &plane("z2"), t, &q).unwrap();
        assert!((v - 0.09).norm() < 1e-10);
        let t = c(0.4, 0.1);
        let v = stout_boundary_kernel(&spec, &plane("z1*z2"), t, &q).unwrap();
        assert!((v - t.powu(3) * t.powu(2)).norm() < 1e-10);
    }
}
