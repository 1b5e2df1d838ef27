//! Test forms on the parameter disc: polynomials in `(τ, τ̄)` times a radial
//! bump (or its `∂/∂τ̄`).

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::parse::{parse_poly, ParseError, VarTable};
use crate::poly::{Dense2, ParamPoly, QI};
use crate::regularization::Bump;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormDegree {
    /// A function `ψ`.
    Zero,
    /// A form `ψ dτ̄`.
    One,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    /// Restriction of a smooth ambient form.
    AmbientPullback,
    /// Smooth on the parameter disc only.
    IntrinsicSmooth,
}

/// Radial factor multiplying a polynomial term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpFactor {
    One,
    Value,
    /// `∂/∂τ̄` of the bump.
    Dbar,
}

#[derive(Clone, Debug)]
pub struct TestForm {
    terms: Vec<(ParamPoly<QI>, BumpFactor)>,
    dense: Vec<(Dense2, BumpFactor)>,
    pub bump: Option<Bump>,
    pub degree: FormDegree,
    pub smoothness: Smoothness,
}

impl PartialEq for TestForm {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
            && self.bump == o.bump
            && self.degree == o.degree
            && self.smoothness == o.smoothness
    }
}

impl TestForm {
    pub fn zero(degree: FormDegree) -> Self {
        TestForm {
            terms: Vec::new(),
            dense: Vec::new(),
            bump: None,
            degree,
            smoothness: Smoothness::AmbientPullback,
        }
    }

    /// `p · bump` (or plain `p` without a bump).
    pub fn new(
        p: ParamPoly<QI>,
        bump: Option<Bump>,
        degree: FormDegree,
        smoothness: Smoothness,
    ) -> Self {
        let factor = if bump.is_some() {
            BumpFactor::Value
        } else {
            BumpFactor::One
        };
        let mut f = TestForm {
            terms: Vec::new(),
            dense: Vec::new(),
            bump,
            degree,
            smoothness,
        };
        f.push(p, factor);
        f
    }

    /// Function `p(τ, τ̄)·bump` from an expression in `t`, `tb`/`conj(t)`.
    pub fn parse(src: &str, bump: Option<Bump>) -> Result<Self, ParseError> {
        let p = parse_poly::<2>(src, &VarTable::parameter())?;
        Ok(TestForm::new(
            p,
            bump,
            FormDegree::Zero,
            Smoothness::IntrinsicSmooth,
        ))
    }

    /// Monomial `τᵃ τ̄ᵇ · bump`.
    pub fn monomial(a: u32, b: u32, bump: Option<Bump>) -> Self {
        TestForm::new(
            ParamPoly::monomial([a, b], QI::one()),
            bump,
            FormDegree::Zero,
            Smoothness::IntrinsicSmooth,
        )
    }

    fn push(&mut self, p: ParamPoly<QI>, factor: BumpFactor) {
        if p.is_zero() {
            return;
        }
        if let Some(slot) = self.terms.iter_mut().position(|(_, f)| *f == factor) {
            let q = &self.terms[slot].0 + &p;
            self.terms[slot].0 = q;
            self.dense[slot].0 = Dense2::from_poly(&self.terms[slot].0, QI::to_c64);
        } else {
            self.dense.push((Dense2::from_poly(&p, QI::to_c64), factor));
            self.terms.push((p, factor));
        }
    }

    pub fn terms(&self) -> &[(ParamPoly<QI>, BumpFactor)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(p, _)| p.is_zero())
    }

    pub fn with_degree(mut self, d: FormDegree) -> Self {
        self.degree = d;
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.bump.map(|b| b.outer)
    }

    /// Radii where the coefficient is only finitely smooth.
    pub fn breaks(&self) -> Vec<f64> {
        self.bump.map(|b| b.breaks().to_vec()).unwrap_or_default()
    }

    /// The coefficient `ψ(τ)`.
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let mut s = Complex64::zero();
        for (d, f) in &self.dense {
            let w = match (f, &self.bump) {
                (BumpFactor::One, _) => Complex64::one(),
                (BumpFactor::Value, Some(b)) => Complex64::new(b.value(tau), 0.0),
                (BumpFactor::Dbar, Some(b)) => b.dbar(tau),
                (_, None) => Complex64::one(),
            };
            if w != Complex64::zero() {
                s += d.eval(tau) * w;
            }
        }
        s
    }

    /// Coefficient near the origin, where the bump is identically one.
    pub fn germ_at_origin(&self) -> ParamPoly<QI> {
        let mut p = ParamPoly::zero();
        for (q, f) in &self.terms {
            if *f != BumpFactor::Dbar {
                p = &p + q;
            }
        }
        p
    }

    /// `∂ᵏψ/∂τᵏ` at the origin.
    pub fn holomorphic_derivative_at_origin(&self, k: u32) -> QI {
        let c = self.germ_at_origin().coeff(&[k, 0]);
        let fact: i64 = (1..=k as i64).product();
        c * QI::from_int(fact)
    }

    /// `∂ψ/∂τ̄` as a `(0,1)` form. Available for functions built from
    /// polynomial and bump-value terms.
    pub fn dbar(&self) -> Option<TestForm> {
        if self.degree != FormDegree::Zero {
            return None;
        }
        let mut out = TestForm::zero(FormDegree::One);
        out.bump = self.bump;
        out.smoothness = self.smoothness;
        for (p, f) in &self.terms {
            match f {
                BumpFactor::One => out.push(p.derivative(1), BumpFactor::One),
                BumpFactor::Value => {
                    out.push(p.derivative(1), BumpFactor::Value);
                    out.push(p.clone(), BumpFactor::Dbar);
                }
                BumpFactor::Dbar => return None,
            }
        }
        Some(out)
    }

    /// Multiply the polynomial part by `q(τ, τ̄)`.
    pub fn mul_poly(&self, q: &ParamPoly<QI>) -> TestForm {
        let mut out = TestForm {
            terms: Vec::new(),
            dense: Vec::new(),
            ..self.clone()
        };
        for (p, f) in &self.terms {
            out.push(p * q, *f);
        }
        out
    }

    pub fn scale(&self, c: &QI) -> TestForm {
        self.mul_poly(&ParamPoly::constant(c.clone()))
    }

    /// Sum of two forms sharing degree and bump.
    pub fn add(&self, o: &TestForm) -> Option<TestForm> {
        if self.degree != o.degree {
            return None;
        }
        let bump = match (self.bump, o.bump) {
            (Some(a), Some(b)) if a != b => return None,
            (a, b) => a.or(b),
        };
        let mut out = self.clone();
        out.bump = bump;
        if o.smoothness == Smoothness::IntrinsicSmooth {
            out.smoothness = Smoothness::IntrinsicSmooth;
        }
        for (p, f) in &o.terms {
            out.push(p.clone(), *f);
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_one_near_origin() {
        let f = TestForm::parse("t^2 + 3*tb", Some(Bump::with_support(0.6))).unwrap();
        let z = Complex64::new(0.1, 0.05);
        let exact = z * z + 3.0 * z.conj();
        assert!((f.eval(z) - exact).norm() < 1e-15);
        assert_eq!(f.eval(Complex64::new(0.7, 0.0)), Complex64::zero());
        assert_eq!(f.holomorphic_derivative_at_origin(2), QI::from_int(2));
        assert_eq!(f.holomorphic_derivative_at_origin(1), QI::zero());
    }

    #[test]
    fn dbar_matches_finite_difference() {
        let f = TestForm::parse("t*tb^2 + i*t^3", Some(Bump::with_support(0.8))).unwrap();
        let d = f.dbar().unwrap();
        for z in [
            Complex64::new(0.5, 0.2),
            Complex64::new(-0.3, 0.55),
            Complex64::new(0.1, 0.1),
        ] {
            let h = 1e-5;
            let dx = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            let dy = (f.eval(z + Complex64::new(0.0, h)) - f.eval(z - Complex64::new(0.0, h)))
                / (2.0 * h);
            let fd = 0.5 * (dx + Complex64::i() * dy);
            assert!((fd - d.eval(z)).norm() < 1e-8, "{z}");
        }
    }
}
