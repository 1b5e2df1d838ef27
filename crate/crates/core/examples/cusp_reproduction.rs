//! Holomorphic reproduction on the cusp `z1^2 = z2^3`, through the weighted
//! projection and through the boundary integral formula.
//!
//! ```text
//! cargo run --release --example cusp_reproduction
//! ```

use koppelman::curve::{make_cusp, normalize};
use koppelman::form::TestForm;
use koppelman::kernels::{curve_kernel_assemble, stout_boundary_kernel, KernelRole, WeightSpec};
use koppelman::operators::apply_p;
use koppelman::parse::{parse_poly, VarTable};
use koppelman::regularization::QuadratureSpec;
use koppelman::selftest::spiral_targets;

fn main() {
    let spec = make_cusp(2, 3, 1.0).expect("valid cusp");
    let param = normalize(&spec).expect("normalizable");
    println!("parameter disc radius {:.6}", param.disc_radius);
    let p = curve_kernel_assemble(
        &spec,
        WeightSpec::for_disc(param.disc_radius),
        KernelRole::ProjectionP,
    )
    .expect("cusp kernel");
    let q = QuadratureSpec::default();
    let targets = spiral_targets(4, 0.2, 0.6);

    // z1 = t^3, z2 = t^2 on the curve
    for (k, src) in [(0, "1"), (2, "z2"), (3, "z1"), (4, "z2^2")] {
        let psi = TestForm::monomial(k, 0, None);
        let proj = apply_p(&p, &psi, &targets, &q).expect("projection");
        let phi = parse_poly(src, &VarTable::plane()).expect("valid polynomial");
        println!("{src}:");
        for s in proj {
            let stout = stout_boundary_kernel(&spec, &phi, s.t, &q).expect("boundary formula");
            let exact = s.t.powu(k);
            println!(
                "  t = {:.3}  |P - exact| {:.1e}  |boundary - exact| {:.1e}",
                s.t,
                (s.value - exact).norm(),
                (stout - exact).norm()
            );
        }
    }
}
