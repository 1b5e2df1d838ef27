use koppelman::curve::{
    make_cusp, make_map, normalize, pull_ambient, pullback_form, Parametrization, PlanePoly,
};
use koppelman::kernels::{curve_kernel_assemble, hefer, KernelRole, KernelSpec, WeightSpec};
use koppelman::obstruction::{build_jet_system, feasibility, Feasibility};
use koppelman::operators::k_value;
use koppelman::parse::{parse_poly, VarTable};
use koppelman::poly::{AmbientPoly, ParamPoly, Poly1, QI};
use koppelman::regularization::{Bump, Cutoff, QuadratureSpec};
use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;
use std::sync::OnceLock;

fn intro() -> &'static Parametrization {
    static P: OnceLock<Parametrization> = OnceLock::new();
    P.get_or_init(|| {
        let u = VarTable::univariate();
        let spec = make_map(
            parse_poly("t^3", &u).unwrap(),
            parse_poly("t^7+t^8", &u).unwrap(),
            1.0,
        )
        .unwrap();
        normalize(&spec).unwrap()
    })
}

fn cusp_kernel() -> &'static (KernelSpec, Parametrization) {
    static K: OnceLock<(KernelSpec, Parametrization)> = OnceLock::new();
    K.get_or_init(|| {
        let spec = make_cusp(2, 3, 1.0).unwrap();
        let param = normalize(&spec).unwrap();
        let k = curve_kernel_assemble(
            &spec,
            WeightSpec::for_disc(param.disc_radius),
            KernelRole::SolutionK,
        )
        .unwrap();
        (k, param)
    })
}

fn small_int() -> impl Strategy<Value = QI> {
    (-4i64..=4).prop_map(QI::from_int)
}

fn plane_poly(max_deg: u32) -> impl Strategy<Value = PlanePoly> {
    prop::collection::vec(((0..=max_deg), (0..=max_deg), small_int()), 1..6)
        .prop_map(|terms| PlanePoly::from_terms(terms.into_iter().map(|(a, b, c)| ([a, b], c))))
}

fn ambient_poly(max_deg: u32) -> impl Strategy<Value = AmbientPoly<QI>> {
    prop::collection::vec((prop::array::uniform4(0..=max_deg), small_int()), 0..6)
        .prop_map(AmbientPoly::from_terms)
}

fn antiholomorphic(max_deg: u32) -> impl Strategy<Value = ParamPoly<QI>> {
    prop::collection::vec(((0..=max_deg), small_int()), 1..4)
        .prop_map(|terms| ParamPoly::from_terms(terms.into_iter().map(|(b, c)| ([0, b], c))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hefer_identity_holds_for_any_polynomial(a in plane_poly(4)) {
        prop_assert!(hefer(&a).identity_defect().is_zero());
    }

    #[test]
    fn cutoff_is_a_monotone_step(delta in 0.01f64..0.3, r in 0.0f64..1.0, th in 0.0f64..6.3) {
        let tau = Complex64::from_polar(r, th);
        let (chi, d) = Cutoff.eval(delta, tau);
        prop_assert!((0.0..=1.0).contains(&chi));
        if r <= delta { prop_assert_eq!(chi, 0.0); }
        if r >= 2.0 * delta { prop_assert_eq!(chi, 1.0); }
        let (outer, _) = Cutoff.eval(delta, tau * 1.01);
        prop_assert!(outer >= chi);
        // ∂χ/∂τ̄ against a central difference
        let h = 1e-6 * delta;
        let fd = |z: Complex64| Cutoff.eval(delta, z).0;
        let dx = (fd(tau + h) - fd(tau - h)) / (2.0 * h);
        let dy = (fd(tau + Complex64::new(0.0, h)) - fd(tau - Complex64::new(0.0, h))) / (2.0 * h);
        let expect = Complex64::new(0.5 * dx, 0.5 * dy);
        prop_assert!((d - expect).norm() <= 1e-5 / delta, "{d} vs {expect}");
    }

    #[test]
    fn certificate_annihilates_pullback_jets(f in ambient_poly(4), m in 0u32..12, c in small_int()) {
        let mu = parse_poly("3*(conj(t)^9+conj(t)^10)", &VarTable::parameter()).unwrap();
        let sys = build_jet_system(intro(), &mu, 12).unwrap();
        let Feasibility::Infeasible { certificate } = feasibility(&sys) else {
            panic!("intro example must be infeasible");
        };
        let hol = ParamPoly::monomial([m, 0], c);
        let jet = sys.jet(&(&pull_ambient(intro(), &f) + &hol));
        prop_assert!(sys.pair(&certificate, &jet).is_zero());
    }

    #[test]
    fn raising_the_order_never_loses_feasibility(mu in antiholomorphic(4), cusp in any::<bool>()) {
        let param = if cusp {
            let u = VarTable::univariate();
            let spec = make_map(parse_poly("t^2", &u).unwrap(), parse_poly("t^3", &u).unwrap(), 1.0).unwrap();
            normalize(&spec).unwrap()
        } else {
            intro().clone()
        };
        let d = koppelman::obstruction::required_order(&param, 5);
        let lo = build_jet_system(&param, &mu, d).map(|s| feasibility(&s));
        let hi = build_jet_system(&param, &mu, d + 1).map(|s| feasibility(&s));
        if let (Ok(lo), Ok(hi)) = (lo, hi) {
            if !matches!(lo, Feasibility::Infeasible { .. }) {
                prop_assert!(!matches!(hi, Feasibility::Infeasible { .. }), "{} then {}", lo.label(), hi.label());
            }
        }
    }

    #[test]
    fn named_display_parses_back(f in ambient_poly(3), g in plane_poly(3)) {
        let names = ["z1", "zb1", "z2", "zb2"];
        let back: AmbientPoly<QI> = parse_poly(&f.named(names).to_string(), &VarTable::ambient()).unwrap();
        prop_assert_eq!(back, f);
        let h: Poly1<QI> = Poly1::from_terms(g.terms().map(|(e, c)| ([e[0] + e[1]], c.clone() * QI::from_ratio(1, 3))));
        let back: Poly1<QI> = parse_poly(&h.named(["t"]).to_string(), &VarTable::univariate()).unwrap();
        prop_assert_eq!(back, h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn k_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, r in 0.2f64..0.5, th in 0.0f64..6.3) {
        let (k, param) = cusp_kernel();
        let amb = |s: &str| parse_poly(s, &VarTable::ambient()).unwrap();
        let bump = Some(Bump::new(0.4, 0.6));
        let phi1 = pullback_form(param, &amb("0"), &amb("1"), bump);
        let phi2 = pullback_form(param, &amb("z1"), &amb("zb2"), bump);
        let (qa, qb) = (QI::from_ratio((a * 64.0).round() as i64, 64), QI::from_ratio((b * 64.0).round() as i64, 64));
        let combo = phi1.scale(&qa).add(&phi2.scale(&qb)).unwrap();
        let t = Complex64::from_polar(r, th);
        let q = QuadratureSpec::default();
        let v = |p| k_value(k, p, t, &q).unwrap().value;
        let lhs = v(&combo);
        let rhs = v(&phi1) * qa.to_c64() + v(&phi2) * qb.to_c64();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }
}
