//! The Coleff-Herrera product `∂̄(1/z1^p) ∧ ∂̄(1/z2^q)` against ambient
//! test functions, compared with the tensor of one-variable residues.
//!
//! ```text
//! cargo run --release --example coleff_herrera
//! ```

use koppelman::obstruction::AMBIENT_NAMES;
use koppelman::parse::{parse_poly, VarTable};
use koppelman::regularization::{Bump, QuadratureSpec, RegularizationSchedule};
use koppelman::residue::{ch_product_pair, ch_tensor_oracle, AmbientTest};

fn main() {
    let sched = RegularizationSchedule {
        delta_max: 0.1,
        ..RegularizationSchedule::for_disc(0.8)
    };
    let q = QuadratureSpec {
        radial_points: 8,
        angular_points: 16,
        ..QuadratureSpec::default()
    };
    let bump = Bump::with_support(0.8);
    for src in ["1", "z1*z2", "z1^2*z2 + 3*z2", "z1*zb2"] {
        let poly = parse_poly(src, &VarTable::ambient()).expect("valid polynomial");
        let name = poly.named(AMBIENT_NAMES).to_string();
        let psi = AmbientTest::new(poly, bump);
        for (p, qq) in [(1, 1), (2, 1), (2, 2)] {
            let v = ch_product_pair(p, qq, &psi, &sched, &q).expect("product pairing");
            let exact = ch_tensor_oracle(p, qq, &psi);
            println!(
                "p={p} q={qq} {name:<16} {:>30} exact {:>30} |diff| {:.2e}",
                format!("{:.6}", v.value),
                format!("{:.6}", exact),
                (v.value - exact).norm()
            );
        }
    }
}
