//! Singular plane curves, their normalizations and structure forms.
//!
//! Every supported curve is irreducible at the origin, singular at most
//! there, and comes with a polynomial normalization `γ` from a parameter
//! disc. The structure form is kept on the parameter side as
//! `ω̃ = c · f(τ)/g(τ) · dτ/τᵏ` with `f(0) ≠ 0 ≠ g(0)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::form::{FormDegree, Smoothness, TestForm};
use crate::linalg::null_space;
use crate::poly::{AmbientPoly, Dense1, ParamPoly, Poly, Poly1, QI};
use crate::regularization::Bump;

/// Polynomial in the ambient coordinates `(z₁, z₂)`.
pub type PlanePoly = Poly<QI, 2>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("cusp exponents need 1 <= r < s, got ({r}, {s})")]
    BadExponents { r: u32, s: u32 },
    #[error("gcd({r}, {s}) = {g}: the curve z1^{r} = z2^{s} is not reduced and irreducible")]
    NotCoprime { r: u32, s: u32, g: u32 },
    #[error("ball radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("parametrization must vanish at the origin")]
    NotCentered,
    #[error("parametrization is constant")]
    Constant,
    #[error("parametrization is not generically injective (covers its image {0} times)")]
    NotInjective(usize),
    #[error("defining polynomial is not square-free")]
    NotSquareFree,
    #[error("defining polynomial does not vanish at the origin")]
    NotThroughOrigin,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("could not find a defining equation for the parametrization")]
    Implicitization,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind {
    MonomialCusp {
        r: u32,
        s: u32,
    },
    ParametrizedMap {
        gamma1: Poly1<QI>,
        gamma2: Poly1<QI>,
    },
    Implicit {
        a: PlanePoly,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub ball_radius: f64,
    /// `true` when the curve has no singular point.
    pub smooth: bool,
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CurveKind::MonomialCusp { r, s } => write!(f, "cusp({r},{s})"),
            CurveKind::ParametrizedMap { gamma1, gamma2 } => {
                write!(f, "map({}, {})", gamma1.named(["t"]), gamma2.named(["t"]))
            }
            CurveKind::Implicit { a } => write!(f, "implicit({})", a.named(["z1", "z2"])),
        }
    }
}

pub fn make_cusp(r: u32, s: u32, ball_radius: f64) -> Result<CurveSpec, CurveError> {
    if r < 1 || r >= s {
        return Err(CurveError::BadExponents { r, s });
    }
    let g = r.gcd(&s);
    if g != 1 {
        return Err(CurveError::NotCoprime { r, s, g });
    }
    check_radius(ball_radius)?;
    Ok(CurveSpec {
        kind: CurveKind::MonomialCusp { r, s },
        ball_radius,
        smooth: r == 1,
    })
}

pub fn make_map(
    gamma1: Poly1<QI>,
    gamma2: Poly1<QI>,
    ball_radius: f64,
) -> Result<CurveSpec, CurveError> {
    check_radius(ball_radius)?;
    if !gamma1.coeff(&[0]).is_zero() || !gamma2.coeff(&[0]).is_zero() {
        return Err(CurveError::NotCentered);
    }
    if gamma1.is_zero() && gamma2.is_zero() {
        return Err(CurveError::Constant);
    }
    let sheets = covering_degree(&gamma1, &gamma2);
    if sheets != 1 {
        return Err(CurveError::NotInjective(sheets));
    }
    let smooth = gamma1.order() == Some(1) || gamma2.order() == Some(1);
    Ok(CurveSpec {
        kind: CurveKind::ParametrizedMap { gamma1, gamma2 },
        ball_radius,
        smooth,
    })
}

pub fn make_implicit(a: PlanePoly, ball_radius: f64) -> Result<CurveSpec, CurveError> {
    check_radius(ball_radius)?;
    if !a.coeff(&[0, 0]).is_zero() {
        return Err(CurveError::NotThroughOrigin);
    }
    if !square_free_on_lines(&a) {
        return Err(CurveError::NotSquareFree);
    }
    let smooth = !a.coeff(&[1, 0]).is_zero() || !a.coeff(&[0, 1]).is_zero();
    Ok(CurveSpec {
        kind: CurveKind::Implicit { a },
        ball_radius,
        smooth,
    })
}

fn check_radius(r: f64) -> Result<(), CurveError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(CurveError::BadRadius(r))
    }
}

/// Restrictions of `a` to two generic lines are square-free.
fn square_free_on_lines(a: &PlanePoly) -> bool {
    let c = QI::from_ratio(7, 13);
    let t = Poly1::<QI>::var(0);
    for subs in [
        [t.clone(), Poly1::constant(c.clone())],
        [Poly1::constant(c.clone()), t.clone()],
        [
            t.clone(),
            &t.scale(&QI::from_ratio(3, 5)) + &Poly1::constant(c.clone()),
        ],
    ] {
        let p = a.compose(&subs);
        if p.total_degree().unwrap_or(0) < 2 {
            continue;
        }
        let g = p.gcd(&p.derivative(0));
        if g.total_degree().unwrap_or(0) > 0 {
            return false;
        }
    }
    true
}

/// `z₁ʳ − z₂ˢ` up to a nonzero scalar, as `(r, s)`.
fn as_monomial_cusp(a: &PlanePoly) -> Option<(u32, u32)> {
    if a.len() != 2 {
        return None;
    }
    let mut pure1 = None;
    let mut pure2 = None;
    for (e, c) in a.terms() {
        match (e[0], e[1]) {
            (r, 0) if r > 0 => pure1 = Some((r, c.clone())),
            (0, s) if s > 0 => pure2 = Some((s, c.clone())),
            _ => return None,
        }
    }
    let ((r, c1), (s, c2)) = (pure1?, pure2?);
    (c1 + c2).is_zero().then_some((r, s))
}

impl CurveSpec {
    /// Defining polynomial `a(z₁, z₂)`, normalized so the pure `z₂` power
    /// has coefficient `−1` (for cusps `a = z₁ʳ − z₂ˢ`).
    pub fn defining_polynomial(&self) -> Result<PlanePoly, CurveError> {
        match &self.kind {
            CurveKind::MonomialCusp { r, s } => {
                Ok(&PlanePoly::monomial([*r, 0], QI::one())
                    - &PlanePoly::monomial([0, *s], QI::one()))
            }
            CurveKind::ParametrizedMap { gamma1, gamma2 } => implicitize(gamma1, gamma2),
            CurveKind::Implicit { a } => Ok(a.clone()),
        }
    }
}

/// Unique (up to scale) polynomial with `a(γ₁, γ₂) ≡ 0` and
/// `deg_{z₁} a ≤ deg γ₂`, `deg_{z₂} a ≤ deg γ₁`.
pub fn implicitize(g1: &Poly1<QI>, g2: &Poly1<QI>) -> Result<PlanePoly, CurveError> {
    let d1 = g1.degree_in(0).unwrap_or(0);
    let d2 = g2.degree_in(0).unwrap_or(0);
    let mut monos = Vec::new();
    let mut images = Vec::new();
    for i in 0..=d2 {
        for j in 0..=d1 {
            if i == 0 && j == 0 {
                continue;
            }
            monos.push([i, j]);
            images.push(&g1.pow(i) * &g2.pow(j));
        }
    }
    let max_deg = images
        .iter()
        .filter_map(|p| p.degree_in(0))
        .max()
        .unwrap_or(0);
    let rows: Vec<Vec<QI>> = (0..=max_deg)
        .map(|k| images.iter().map(|p| p.coeff(&[k])).collect())
        .collect();
    let ns = null_space(&rows, monos.len());
    if ns.len() != 1 {
        return Err(CurveError::Implicitization);
    }
    let mut a = PlanePoly::zero();
    for (m, c) in monos.iter().zip(&ns[0]) {
        a.add_term(*m, c.clone());
    }
    let lead = a
        .terms()
        .filter(|(e, _)| e[0] == 0)
        .map(|(_, c)| c.clone())
        .next()
        .or_else(|| a.terms().next().map(|(_, c)| c.clone()))
        .ok_or(CurveError::Implicitization)?;
    let k = (-lead).inv().ok_or(CurveError::Implicitization)?;
    Ok(a.scale(&k))
}

/// Number of parameter values over a generic image point.
fn covering_degree(g1: &Poly1<QI>, g2: &Poly1<QI>) -> usize {
    let (p, q) = if g1.degree_in(0).unwrap_or(0) >= 1 {
        (g1, g2)
    } else {
        (g2, g1)
    };
    let dp = Dense1::from_poly(p);
    let dq = Dense1::from_poly(q);
    let t0 = Complex64::new(0.317, 0.211);
    let mut shifted = dp.clone();
    shifted.coeffs[0] -= dp.eval(t0);
    let roots = poly_roots(&shifted.coeffs);
    let target = dq.eval(t0);
    let scale = 1.0 + target.norm();
    roots
        .iter()
        .filter(|r| (dq.eval(**r) - target).norm() < 1e-7 * scale)
        .count()
        .max(1)
}

/// All roots of `Σ cₖ xᵏ` by Aberth iteration.
pub(crate) fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let bound = 1.0 + c[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    let eval = |x: Complex64| {
        let mut p = Complex64::zero();
        let mut d = Complex64::zero();
        for a in c.iter().rev() {
            d = d * x + p;
            p = p * x + a;
        }
        (p, d)
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, d) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / d;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    z
}

/// Normalization `γ` of a curve on the parameter disc `|τ| ≤ disc_radius`.
#[derive(Clone, Debug)]
pub struct Parametrization {
    pub map: [Poly1<QI>; 2],
    pub disc_radius: f64,
    pub smooth: bool,
    g: [Dense1; 2],
    dg: [Dense1; 2],
    radial: bool,
}

impl Parametrization {
    pub fn new(map: [Poly1<QI>; 2], ball_radius: f64, smooth: bool) -> Self {
        let g = [Dense1::from_poly(&map[0]), Dense1::from_poly(&map[1])];
        let dg = [g[0].derivative(), g[1].derivative()];
        let radial = map.iter().all(|p| p.len() <= 1);
        let mut p = Parametrization {
            map,
            disc_radius: 0.0,
            smooth,
            g,
            dg,
            radial,
        };
        p.disc_radius = p.radius_for(ball_radius);
        p
    }

    pub fn gamma(&self, t: Complex64) -> [Complex64; 2] {
        [self.g[0].eval(t), self.g[1].eval(t)]
    }

    pub fn dgamma(&self, t: Complex64) -> [Complex64; 2] {
        [self.dg[0].eval(t), self.dg[1].eval(t)]
    }

    /// `|γ(τ)|` is a function of `|τ|` alone (monomial components).
    pub fn is_radial(&self) -> bool {
        self.radial
    }

    /// `max_{|τ| = ρ} |γ(τ)|`.
    pub fn max_on_circle(&self, rho: f64) -> f64 {
        let norm = |t: Complex64| {
            let [a, b] = self.gamma(t);
            (a.norm_sqr() + b.norm_sqr()).sqrt()
        };
        if self.radial {
            return norm(Complex64::new(rho, 0.0));
        }
        let n = 720;
        let mut best = (0.0, 0.0);
        for k in 0..n {
            let th = 2.0 * PI * k as f64 / n as f64;
            let v = norm(Complex64::from_polar(rho, th));
            if v > best.0 {
                best = (v, th);
            }
        }
        // golden-section polish around the best sample
        let h = 2.0 * PI / n as f64;
        let (mut a, mut b) = (best.1 - h, best.1 + h);
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - gr * (b - a);
            let d = a + gr * (b - a);
            if norm(Complex64::from_polar(rho, c)) > norm(Complex64::from_polar(rho, d)) {
                b = d;
            } else {
                a = c;
            }
        }
        best.0.max(norm(Complex64::from_polar(rho, 0.5 * (a + b))))
    }

    /// Radius `ρ` with `max_{|τ|=ρ} |γ| = ball_radius`, by bisection.
    fn radius_for(&self, ball_radius: f64) -> f64 {
        let mut hi = 1.0;
        while self.max_on_circle(hi) < ball_radius {
            hi *= 2.0;
            if hi > 1e6 {
                return hi;
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.max_on_circle(mid) < ball_radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Distance from `γ(t)` to the singular point, `+∞` on smooth curves.
    pub fn sing_distance(&self, t: Complex64) -> f64 {
        if self.smooth {
            return f64::INFINITY;
        }
        let [a, b] = self.gamma(t);
        (a.norm_sqr() + b.norm_sqr()).sqrt()
    }
}

pub fn normalize(spec: &CurveSpec) -> Result<Parametrization, CurveError> {
    let map = match &spec.kind {
        CurveKind::MonomialCusp { r, s } => cusp_map(*r, *s),
        CurveKind::ParametrizedMap { gamma1, gamma2 } => [gamma1.clone(), gamma2.clone()],
        CurveKind::Implicit { a } => match as_monomial_cusp(a) {
            Some((r, s)) if r < s && r.gcd(&s) == 1 => cusp_map(r, s),
            Some((r, s)) if s < r && r.gcd(&s) == 1 => [
                Poly1::monomial([1], QI::one()).pow(s),
                Poly1::monomial([1], QI::one()).pow(r),
            ],
            _ => {
                return Err(CurveError::Unsupported(
                    "normalization of implicit curves other than z1^r - z2^s".into(),
                ))
            }
        },
    };
    Ok(Parametrization::new(map, spec.ball_radius, spec.smooth))
}

fn cusp_map(r: u32, s: u32) -> [Poly1<QI>; 2] {
    [
        Poly1::monomial([s], QI::one()),
        Poly1::monomial([r], QI::one()),
    ]
}

pub fn sing_distance(param: &Parametrization, t: Complex64) -> f64 {
    param.sing_distance(t)
}

/// `ω̃ = constant_factor · numerator(τ)/denominator(τ) · dτ/τ^{pole_order}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureForm {
    pub numerator: Poly1<QI>,
    /// Unit at the origin; `1` for monomial cusps.
    pub denominator: Poly1<QI>,
    pub pole_order: u32,
    pub constant_factor: Complex64,
    num: Dense1,
    den: Dense1,
}

impl StructureForm {
    pub fn new(
        numerator: Poly1<QI>,
        denominator: Poly1<QI>,
        pole_order: u32,
        constant_factor: Complex64,
    ) -> Self {
        let num = Dense1::from_poly(&numerator);
        let den = Dense1::from_poly(&denominator);
        StructureForm {
            numerator,
            denominator,
            pole_order,
            constant_factor,
            num,
            den,
        }
    }

    /// The `dτ` coefficient of `ω̃` at `τ ≠ 0`.
    pub fn coefficient(&self, tau: Complex64) -> Complex64 {
        self.constant_factor * self.unit(tau) / tau.powu(self.pole_order)
    }

    /// `f(τ)/g(τ)`, holomorphic and nonvanishing near 0.
    pub fn unit(&self, tau: Complex64) -> Complex64 {
        self.num.eval(tau) / self.den.eval(tau)
    }

    pub fn is_monomial(&self) -> bool {
        self.numerator == Poly1::one() && self.denominator == Poly1::one()
    }
}

impl fmt::Display for StructureForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.constant_factor;
        write!(f, "({}{:+}i)", c.re, c.im)?;
        if !self.is_monomial() {
            write!(f, " ({:?})/({:?})", self.numerator, self.denominator)?;
        }
        write!(f, " dτ/τ^{}", self.pole_order)
    }
}

/// Pullback of `−2πi dζ₂/(∂a/∂ζ₁)` (equivalently `2πi dζ₁/(∂a/∂ζ₂)`) to
/// the normalization.
pub fn structure_form(spec: &CurveSpec) -> Result<StructureForm, CurveError> {
    let c = Complex64::new(0.0, -2.0 * PI);
    if let CurveKind::MonomialCusp { r, s } = spec.kind {
        return Ok(StructureForm::new(
            Poly1::one(),
            Poly1::one(),
            (r - 1) * (s - 1),
            c,
        ));
    }
    let a = spec.defining_polynomial()?;
    let param = normalize(spec)?;
    let [g1, g2] = &param.map;
    let subs = [g1.clone(), g2.clone()];
    let d1 = a.derivative(0).compose(&subs);
    let (num, den, sign) = if !d1.is_zero() {
        (g2.derivative(0), d1, 1)
    } else {
        (g1.derivative(0), a.derivative(1).compose(&subs), -1)
    };
    if den.is_zero() || num.is_zero() {
        return Err(CurveError::Unsupported("degenerate structure form".into()));
    }
    let g = num.gcd(&den);
    let (num, _) = num.div_rem(&g).expect("gcd divides");
    let (den, _) = den.div_rem(&g).expect("gcd divides");
    let (kn, num) = num.split_order();
    let (kd, den) = den.split_order();
    if kn > kd {
        return Err(CurveError::Unsupported("structure form with a zero".into()));
    }
    // normalize the unit so that its denominator is 1 at the origin
    let d0 = den.coeff(&[0]);
    let inv = d0.inv().expect("unit at origin");
    let num = num.scale(&inv);
    let den = den.scale(&inv);
    Ok(StructureForm::new(num, den, kd - kn, c * sign as f64))
}

/// Pullback of the ambient `(0,1)` form `P dζ̄₁ + Q dζ̄₂` times a bump.
///
/// `P`, `Q` are polynomials in `(ζ₁, ζ̄₁, ζ₂, ζ̄₂)`.
pub fn pullback_form(
    param: &Parametrization,
    p: &AmbientPoly<QI>,
    q: &AmbientPoly<QI>,
    bump: Option<Bump>,
) -> TestForm {
    let [d1, d2] = [
        conj_param(&param.map[0].derivative(0)),
        conj_param(&param.map[1].derivative(0)),
    ];
    let coeff = &(&pull_ambient(param, p) * &d1) + &(&pull_ambient(param, q) * &d2);
    TestForm::new(coeff, bump, FormDegree::One, Smoothness::AmbientPullback)
}

/// Pullback `f∘γ` of an ambient function, times a bump.
pub fn pullback_function(
    param: &Parametrization,
    f: &AmbientPoly<QI>,
    bump: Option<Bump>,
) -> TestForm {
    TestForm::new(
        pull_ambient(param, f),
        bump,
        FormDegree::Zero,
        Smoothness::AmbientPullback,
    )
}

/// `f(γ(τ), conj γ(τ))` as a polynomial in `(τ, τ̄)`.
pub fn pull_ambient(param: &Parametrization, f: &AmbientPoly<QI>) -> ParamPoly<QI> {
    let hol = |p: &Poly1<QI>| -> ParamPoly<QI> {
        ParamPoly::from_terms(p.terms().map(|(e, c)| ([e[0], 0], c.clone())))
    };
    let subs = [
        hol(&param.map[0]),
        conj_param(&param.map[0]),
        hol(&param.map[1]),
        conj_param(&param.map[1]),
    ];
    f.compose(&subs)
}

/// `conj(p(τ))` as a polynomial in `τ̄`.
fn conj_param(p: &Poly1<QI>) -> ParamPoly<QI> {
    ParamPoly::from_terms(p.terms().map(|(e, c)| ([0, e[0]], c.conj())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly, VarTable};

    fn t_poly(s: &str) -> Poly1<QI> {
        parse_poly::<1>(s, &VarTable::univariate()).unwrap()
    }

    #[test]
    fn cusp_construction() {
        let c = make_cusp(2, 3, 1.0).unwrap();
        assert!(!c.smooth);
        let a = c.defining_polynomial().unwrap();
        assert_eq!(a.coeff(&[2, 0]), QI::one());
        assert_eq!(a.coeff(&[0, 3]), -QI::one());
        assert!(make_cusp(1, 2, 1.0).unwrap().smooth);
        assert_eq!(
            make_cusp(2, 4, 1.0),
            Err(CurveError::NotCoprime { r: 2, s: 4, g: 2 })
        );
        assert!(make_cusp(3, 2, 1.0).is_err());
    }

    #[test]
    fn cusp_disc_radius() {
        let p = normalize(&make_cusp(2, 3, 1.0).unwrap()).unwrap();
        let r = p.disc_radius;
        assert!((r.powi(6) + r.powi(4) - 1.0).abs() < 1e-11);
        // ρ² is the real root of x³ + x² = 1
        assert!((r - 0.868837).abs() < 1e-6);
    }

    #[test]
    fn parametrization_annihilates_defining_polynomial() {
        for (r, s) in [(2, 3), (2, 5), (3, 4), (3, 5), (4, 7)] {
            let spec = make_cusp(r, s, 1.0).unwrap();
            let p = normalize(&spec).unwrap();
            let a = spec.defining_polynomial().unwrap();
            assert!(a.compose(&[p.map[0].clone(), p.map[1].clone()]).is_zero());
        }
    }

    #[test]
    fn intro_curve_implicitization() {
        let spec = make_map(t_poly("t^3"), t_poly("t^7+t^8"), 1.0).unwrap();
        let a = spec.defining_polynomial().unwrap();
        let expected =
            parse_poly::<2>("z1^7 + z1^8 + 3*z1^5*z2 - z2^3", &VarTable::plane()).unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn non_injective_map_rejected() {
        assert_eq!(
            make_map(t_poly("t^2"), t_poly("t^4"), 1.0),
            Err(CurveError::NotInjective(2))
        );
        assert_eq!(
            make_map(t_poly("t+1"), t_poly("t"), 1.0),
            Err(CurveError::NotCentered)
        );
    }

    #[test]
    fn structure_forms() {
        for ((r, s), k) in [((2, 3), 2), ((1, 2), 0), ((3, 4), 6), ((2, 5), 4)] {
            let sf = structure_form(&make_cusp(r, s, 1.0).unwrap()).unwrap();
            assert_eq!(sf.pole_order, k);
            assert!(sf.is_monomial());
            assert_eq!(sf.constant_factor, Complex64::new(0.0, -2.0 * PI));
        }
    }

    #[test]
    fn generic_structure_form_matches_cusp() {
        // the same cusp through the parametrized route
        let spec = make_map(t_poly("t^3"), t_poly("t^2"), 1.0).unwrap();
        let sf = structure_form(&spec).unwrap();
        assert_eq!(sf.pole_order, 2);
        let z = Complex64::new(0.3, 0.1);
        let cusp = structure_form(&make_cusp(2, 3, 1.0).unwrap()).unwrap();
        assert!((sf.coefficient(z) - cusp.coefficient(z)).norm() < 1e-12);
    }

    #[test]
    fn intro_structure_form() {
        let spec = make_map(t_poly("t^3"), t_poly("t^7+t^8"), 1.0).unwrap();
        let sf = structure_form(&spec).unwrap();
        assert_eq!(sf.pole_order, 12);
        assert_eq!(sf.numerator, Poly1::one());
        assert_eq!(sf.denominator, t_poly("1 + t + t^2"));
        assert_eq!(sf.constant_factor, Complex64::new(0.0, -2.0 * PI));
    }

    #[test]
    fn intro_pullback_form() {
        let spec = make_map(t_poly("t^3"), t_poly("t^7+t^8"), 1.0).unwrap();
        let p = normalize(&spec).unwrap();
        let w_bar = parse_poly::<4>("wb", &VarTable::ambient()).unwrap();
        let f = pullback_form(&p, &w_bar, &AmbientPoly::zero(), None);
        let expected = parse_poly::<2>("3*(tb^9 + tb^10)", &VarTable::parameter()).unwrap();
        assert_eq!(f.germ_at_origin(), expected);
    }

    #[test]
    fn sing_distance_examples() {
        let p = normalize(&make_cusp(2, 3, 1.0).unwrap()).unwrap();
        assert_eq!(p.sing_distance(Complex64::zero()), 0.0);
        let d = p.sing_distance(Complex64::new(0.5, 0.0));
        assert!((d - (0.125f64.powi(2) + 0.25f64.powi(2)).sqrt()).abs() < 1e-15);
        let smooth = normalize(&make_cusp(1, 2, 1.0).unwrap()).unwrap();
        assert_eq!(
            smooth.sing_distance(Complex64::new(0.5, 0.0)),
            f64::INFINITY
        );
    }

    #[test]
    fn implicit_cusp_normalizes() {
        let a = parse_poly::<2>("z1^2 - z2^3", &VarTable::plane()).unwrap();
        let spec = make_implicit(a, 1.0).unwrap();
        let p = normalize(&spec).unwrap();
        assert_eq!(p.map[0], t_poly("t^3"));
        let sq = parse_poly::<2>("(z1^2 - z2^3)^2", &VarTable::plane()).unwrap();
        assert_eq!(make_implicit(sq, 1.0), Err(CurveError::NotSquareFree));
        let other = parse_poly::<2>("z1^2 - z2^3 + z1*z2^2", &VarTable::plane()).unwrap();
        assert!(matches!(
            normalize(&make_implicit(other, 1.0).unwrap()),
            Err(CurveError::Unsupported(_))
        ));
    }
}
