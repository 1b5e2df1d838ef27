//! `K` on cusp(2,3) against committed values from a double-resolution run.

use std::path::PathBuf;

use koppelman::curve::{make_cusp, normalize, pullback_form};
use koppelman::kernels::{curve_kernel_assemble, KernelRole, KernelSpec, WeightSpec};
use koppelman::operators::apply_k;
use koppelman::parse::{parse_poly, VarTable};
use koppelman::regularization::{Bump, QuadratureSpec};
use koppelman::selftest::spiral_targets;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Agreement of the double-resolution run with itself at the next level.
const GOLDEN_TOL: f64 = 1e-9;

#[derive(Serialize, Deserialize)]
struct Golden {
    form: String,
    t: [f64; 2],
    value: [f64; 2],
}

fn path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/cusp23_apply_k.json")
}

fn setup() -> (KernelSpec, Vec<(String, koppelman::form::TestForm)>) {
    let spec = make_cusp(2, 3, 1.0).unwrap();
    let param = normalize(&spec).unwrap();
    let k = curve_kernel_assemble(
        &spec,
        WeightSpec::for_disc(param.disc_radius),
        KernelRole::SolutionK,
    )
    .unwrap();
    let amb = |s: &str| parse_poly(s, &VarTable::ambient()).unwrap();
    let forms = [
        ("dzb2", "0", "1"),
        ("z1 dzb1 + zb2 dzb2", "z1", "zb2"),
        ("zb1 dzb1", "zb1", "0"),
    ]
    .into_iter()
    .map(|(n, p, q)| {
        (
            n.to_string(),
            pullback_form(&param, &amb(p), &amb(q), Some(Bump::new(0.4, 0.6))),
        )
    })
    .collect();
    (k, forms)
}

fn targets(k: &KernelSpec) -> Vec<Complex64> {
    spiral_targets(10, 0.2, 0.6 * k.disc_radius)
}

#[test]
#[ignore = "rewrites tests/data; run with --ignored to regenerate"]
fn regenerate_golden() {
    let (k, forms) = setup();
    let fine = QuadratureSpec {
        radial_points: 32,
        angular_points: 128,
        max_refinements: 3,
        ..QuadratureSpec::default()
    };
    let mut out = Vec::new();
    for (name, phi) in &forms {
        for s in apply_k(&k, phi, &targets(&k), &fine).unwrap() {
            assert!(s.error < GOLDEN_TOL, "{name} at {}: {}", s.t, s.error);
            out.push(Golden {
                form: name.clone(),
                t: [s.t.re, s.t.im],
                value: [s.value.re, s.value.im],
            });
        }
    }
    std::fs::write(path(), serde_json::to_string_pretty(&out).unwrap()).unwrap();
}

#[test]
fn apply_k_matches_golden() {
    let golden: Vec<Golden> =
        serde_json::from_str(&std::fs::read_to_string(path()).unwrap()).unwrap();
    let (k, forms) = setup();
    let q = QuadratureSpec::default();
    let mut checked = 0;
    for (name, phi) in &forms {
        let rows: Vec<&Golden> = golden.iter().filter(|g| &g.form == name).collect();
        let ts: Vec<Complex64> = rows
            .iter()
            .map(|g| Complex64::new(g.t[0], g.t[1]))
            .collect();
        for (s, g) in apply_k(&k, phi, &ts, &q).unwrap().iter().zip(&rows) {
            let expect = Complex64::new(g.value[0], g.value[1]);
            let d = (s.value - expect).norm();
            assert!(
                d <= 10.0 * GOLDEN_TOL,
                "{name} at {}: {} vs {expect} ({d:.2e})",
                s.t,
                s.value
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 30);
}
