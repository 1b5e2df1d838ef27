//! Exact jet systems deciding whether a `∂̄`-equation on a parametrized
//! curve has a solution that is the restriction of a smooth ambient
//! function.
//!
//! If `f` is smooth near the origin of `C²` and `∂̄(f∘γ) = μ`, then
//! `f∘γ = ψ + h` with `ψ` a fixed particular solution and `h` holomorphic.
//! Taylor's formula writes `f = T_D f + O(|ζ|^{D+1})`, and the remainder
//! pulls back to `O(|τ|^{(D+1)·m})` where `m` is the smaller vanishing order
//! of the components of `γ`. Once `(D+1)·m` exceeds the target degree `D′`,
//! the jets of order `≤ D′` of both sides depend only on the coefficients of
//! `T_D f` and of `h`, linearly. If that finite linear system has no
//! solution, no smooth `f` exists.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::curve::Parametrization;
use crate::linalg::{solve, Solvability};
use crate::poly::{AmbientPoly, ParamPoly, Poly1, QI};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObstructionError {
    #[error(
        "ambient order {given} is too small for target degree {target}; need at least {required}"
    )]
    OrderTooSmall {
        given: u32,
        required: u32,
        target: u32,
    },
    #[error("right-hand side must be a polynomial in τ, τ̄")]
    BadRightHandSide,
}

/// A column of the jet matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum JetColumn {
    /// `ζ₁ᵃ ζ̄₁ᵇ ζ₂ᶜ ζ̄₂ᵈ`.
    Ambient([u32; 4]),
    /// A free holomorphic direction `τᵐ`.
    Holomorphic(u32),
}

impl fmt::Display for JetColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetColumn::Ambient(e) => {
                let m = AmbientPoly::<QI>::monomial(*e, QI::one());
                write!(f, "{}", m.named(AMBIENT_NAMES))
            }
            JetColumn::Holomorphic(m) => write!(f, "t^{m}"),
        }
    }
}

pub const AMBIENT_NAMES: [&str; 4] = ["z1", "zb1", "z2", "zb2"];
pub const PARAM_NAMES: [&str; 2] = ["t", "tb"];

#[derive(Clone, Debug)]
pub struct JetSystem {
    pub map: Parametrization,
    pub ambient_order: u32,
    pub parameter_order: u32,
    /// Row `(m, n)` is the coefficient of `τᵐ τ̄ⁿ`, `m + n ≤ D′`.
    pub rows: Vec<(u32, u32)>,
    pub columns: Vec<JetColumn>,
    /// `rows × columns`, exact.
    pub matrix: Vec<Vec<QI>>,
    pub target: Vec<QI>,
    /// The particular solution whose jet is the target.
    pub particular: ParamPoly<QI>,
}

/// Termwise antiholomorphic primitive: `τᵐτ̄ⁿ ↦ τᵐτ̄ⁿ⁺¹/(n+1)`.
pub fn dbar_primitive(mu: &ParamPoly<QI>) -> ParamPoly<QI> {
    ParamPoly::from_terms(mu.terms().map(|(e, c)| {
        let n = e[1] + 1;
        ([e[0], n], c.clone() * QI::from_ratio(1, n as i64))
    }))
}

fn mul_trunc(a: &ParamPoly<QI>, b: &ParamPoly<QI>, d: u32) -> ParamPoly<QI> {
    let mut out = ParamPoly::zero();
    for (ea, ca) in a.terms() {
        for (eb, cb) in b.terms() {
            let e = [ea[0] + eb[0], ea[1] + eb[1]];
            if e[0] + e[1] <= d {
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
    }
    out
}

fn powers(p: &ParamPoly<QI>, n: u32, d: u32) -> Vec<ParamPoly<QI>> {
    let mut out = vec![ParamPoly::one()];
    for _ in 0..n {
        let next = mul_trunc(out.last().unwrap(), p, d);
        out.push(next);
    }
    out
}

fn smaller_order(param: &Parametrization) -> u32 {
    param
        .map
        .iter()
        .filter_map(|p| p.order())
        .min()
        .unwrap_or(1)
        .max(1)
}

/// Smallest ambient order for which infeasibility at target degree `d′`
/// is conclusive.
pub fn required_order(param: &Parametrization, target_degree: u32) -> u32 {
    let m = smaller_order(param);
    (target_degree + 1).div_ceil(m).saturating_sub(1)
}

pub fn build_jet_system(
    param: &Parametrization,
    mu: &ParamPoly<QI>,
    ambient_order: u32,
) -> Result<JetSystem, ObstructionError> {
    let particular = dbar_primitive(mu);
    let dp = particular.total_degree().unwrap_or(0);
    let required = required_order(param, dp);
    if ambient_order < required {
        return Err(ObstructionError::OrderTooSmall {
            given: ambient_order,
            required,
            target: dp,
        });
    }
    let hol = |p: &Poly1<QI>| ParamPoly::from_terms(p.terms().map(|(e, c)| ([e[0], 0], c.clone())));
    let conj = |p: &Poly1<QI>| ParamPoly::from_terms(p.terms().map(|(e, c)| ([0, e[0]], c.conj())));
    let d = ambient_order;
    let g1 = powers(&hol(&param.map[0]), d, dp);
    let g1b = powers(&conj(&param.map[0]), d, dp);
    let g2 = powers(&hol(&param.map[1]), d, dp);
    let g2b = powers(&conj(&param.map[1]), d, dp);

    let rows: Vec<(u32, u32)> = (0..=dp)
        .flat_map(|s| (0..=s).map(move |n| (s - n, n)))
        .collect();
    let row_of = |e: &[u32; 2]| rows.iter().position(|r| *r == (e[0], e[1])).expect("row");

    let mut columns = Vec::new();
    let mut cols: Vec<ParamPoly<QI>> = Vec::new();
    for total in 0..=d {
        for a in 0..=total {
            for b in 0..=total - a {
                for c in 0..=total - a - b {
                    let dd = total - a - b - c;
                    let p = mul_trunc(
                        &mul_trunc(&g1[a as usize], &g1b[b as usize], dp),
                        &mul_trunc(&g2[c as usize], &g2b[dd as usize], dp),
                        dp,
                    );
                    columns.push(JetColumn::Ambient([a, b, c, dd]));
                    cols.push(p);
                }
            }
        }
    }
    for m in 0..=dp {
        columns.push(JetColumn::Holomorphic(m));
        cols.push(ParamPoly::monomial([m, 0], QI::one()));
    }
    let mut matrix = vec![vec![QI::zero(); cols.len()]; rows.len()];
    for (j, p) in cols.iter().enumerate() {
        for (e, c) in p.terms() {
            matrix[row_of(e)][j] = c.clone();
        }
    }
    let mut target = vec![QI::zero(); rows.len()];
    for (e, c) in particular.terms() {
        target[row_of(e)] = c.clone();
    }
    Ok(JetSystem {
        map: param.clone(),
        ambient_order,
        parameter_order: dp,
        rows,
        columns,
        matrix,
        target,
        particular,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// `f` with `f∘γ − ψ` holomorphic, checked exactly on the full
    /// polynomials.
    Feasible {
        witness: AmbientPoly<QI>,
        holomorphic: ParamPoly<QI>,
    },
    /// `y` with `yᵀA = 0` and `yᵀb = 1`, indexed by rows.
    Infeasible { certificate: Vec<QI> },
    /// The jets match to order `D′` but the polynomial witness does not
    /// solve the equation beyond it.
    Inconclusive { witness: AmbientPoly<QI> },
}

impl Feasibility {
    pub fn label(&self) -> &'static str {
        match self {
            Feasibility::Feasible { .. } => "Feasible",
            Feasibility::Infeasible { .. } => "Infeasible",
            Feasibility::Inconclusive { .. } => "Inconclusive",
        }
    }
}

pub fn feasibility(sys: &JetSystem) -> Feasibility {
    match solve(&sys.matrix, &sys.target, sys.columns.len()) {
        Solvability::Unsolvable(y) => Feasibility::Infeasible { certificate: y },
        Solvability::Solvable(x) => {
            let mut witness = AmbientPoly::zero();
            for (col, v) in sys.columns.iter().zip(&x) {
                if let (JetColumn::Ambient(e), false) = (col, v.is_zero()) {
                    witness.add_term(*e, v.clone());
                }
            }
            let pulled = crate::curve::pull_ambient(&sys.map, &witness);
            let rest = &pulled - &sys.particular;
            if rest.terms().all(|(e, _)| e[1] == 0) {
                Feasibility::Feasible {
                    witness,
                    holomorphic: rest,
                }
            } else {
                Feasibility::Inconclusive { witness }
            }
        }
    }
}

impl JetSystem {
    /// `yᵀ v` for a jet vector `v` indexed like the rows.
    pub fn pair(&self, y: &[QI], v: &[QI]) -> QI {
        y.iter()
            .zip(v)
            .fold(QI::zero(), |s, (a, b)| s + a.clone() * b.clone())
    }

    /// Jet vector of a polynomial in `(τ, τ̄)`, truncated to the rows.
    pub fn jet(&self, p: &ParamPoly<QI>) -> Vec<QI> {
        self.rows.iter().map(|(m, n)| p.coeff(&[*m, *n])).collect()
    }

    /// `yᵀ A`, one entry per column.
    pub fn left_product(&self, y: &[QI]) -> Vec<QI> {
        (0..self.columns.len())
            .map(|j| {
                self.matrix
                    .iter()
                    .zip(y)
                    .fold(QI::zero(), |s, (r, v)| s + r[j].clone() * v.clone())
            })
            .collect()
    }

    /// Certificate entries that are nonzero, labelled by their rows.
    pub fn certificate_terms(&self, y: &[QI]) -> Vec<(String, QI)> {
        self.rows
            .iter()
            .zip(y)
            .filter(|(_, v)| !v.is_zero())
            .map(|((m, n), v)| {
                let mono = ParamPoly::<QI>::monomial([*m, *n], QI::one());
                (mono.named(PARAM_NAMES).to_string(), v.clone())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_map, normalize};
    use crate::parse::{parse_poly, VarTable};

    fn map(a: &str, b: &str) -> Parametrization {
        let u = VarTable::univariate();
        let spec = make_map(parse_poly(a, &u).unwrap(), parse_poly(b, &u).unwrap(), 1.0).unwrap();
        normalize(&spec).unwrap()
    }

    fn param_poly(s: &str) -> ParamPoly<QI> {
        parse_poly(s, &VarTable::parameter()).unwrap()
    }

    #[test]
    fn intro_example_is_infeasible() {
        let p = map("t^3", "t^7+t^8");
        let mu = param_poly("3*(conj(t)^9+conj(t)^10)");
        let sys = build_jet_system(&p, &mu, 12).unwrap();
        let idx = |m: u32, n: u32| sys.rows.iter().position(|r| *r == (m, n)).unwrap();
        assert_eq!(sys.target[idx(0, 10)], QI::from_ratio(3, 10));
        assert_eq!(sys.target[idx(0, 11)], QI::from_ratio(3, 11));
        match feasibility(&sys) {
            Feasibility::Infeasible { certificate } => {
                assert!(sys.left_product(&certificate).iter().all(|v| v.is_zero()));
                assert_eq!(sys.pair(&certificate, &sys.target), QI::one());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cusp_control_is_feasible() {
        let p = map("t^2", "t^3");
        let sys = build_jet_system(&p, &param_poly("2*tb"), 2).unwrap();
        match feasibility(&sys) {
            Feasibility::Feasible {
                witness,
                holomorphic,
            } => {
                assert_eq!(witness, AmbientPoly::monomial([0, 1, 0, 0], QI::one()));
                assert!(holomorphic.is_zero());
                assert_eq!(witness.named(AMBIENT_NAMES).to_string(), "zb1");
            }
            other => panic!("{other:?}"),
        }
        let sys = build_jet_system(&p, &ParamPoly::zero(), 2).unwrap();
        assert!(matches!(feasibility(&sys), Feasibility::Feasible { .. }));
    }

    #[test]
    fn order_too_small() {
        let p = map("t^3", "t^7+t^8");
        let mu = param_poly("3*(conj(t)^9+conj(t)^10)");
        assert_eq!(
            build_jet_system(&p, &mu, 2).unwrap_err(),
            ObstructionError::OrderTooSmall {
                given: 2,
                required: 3,
                target: 11
            }
        );
    }
}
