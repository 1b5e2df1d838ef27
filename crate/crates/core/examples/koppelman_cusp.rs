//! `∂̄_t Kφ = φ` on the regular part of the cusp for pulled-back `(0,1)`
//! forms.
//!
//! ```text
//! cargo run --release --example koppelman_cusp
//! ```

use koppelman::curve::{make_cusp, normalize, pullback_form};
use koppelman::kernels::{curve_kernel_assemble, KernelRole, WeightSpec};
use koppelman::operators::verify_koppelman;
use koppelman::parse::{parse_poly, VarTable};
use koppelman::regularization::{Bump, QuadratureSpec};
use koppelman::selftest::spiral_targets;

fn main() {
    let spec = make_cusp(2, 3, 1.0).expect("valid cusp");
    let param = normalize(&spec).expect("normalizable");
    let k = curve_kernel_assemble(
        &spec,
        WeightSpec::for_disc(param.disc_radius),
        KernelRole::SolutionK,
    )
    .expect("cusp kernel");
    let q = QuadratureSpec::default();
    let targets = spiral_targets(8, 0.2, 0.6 * param.disc_radius);
    let amb = |s: &str| parse_poly(s, &VarTable::ambient()).expect("valid polynomial");

    for (p, qq) in [("0", "1"), ("z1", "zb2"), ("zb1", "z2*zb2")] {
        let phi = pullback_form(&param, &amb(p), &amb(qq), Some(Bump::new(0.4, 0.6)));
        let report = verify_koppelman(&k, &phi, &targets, &q).expect("Koppelman check");
        println!(
            "φ = ({p}) dzb1 + ({qq}) dzb2: max residual {:.2e}",
            report.max_residual
        );
        for row in &report.rows {
            println!(
                "    t = {:.3}  φ = {:.6}  ∂̄Kφ = {:.6}",
                row.t, row.phi, row.dbar_k
            );
        }
    }
}
