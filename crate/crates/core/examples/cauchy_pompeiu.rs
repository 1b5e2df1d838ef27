//! The smooth-disc case: the projection reproduces holomorphic functions
//! and the Koppelman formula holds for a compactly supported function.
//!
//! ```text
//! cargo run --release --example cauchy_pompeiu
//! ```

use koppelman::form::TestForm;
use koppelman::kernels::{smooth_disc_kernel, KernelRole, WeightSpec};
use koppelman::operators::{apply_p, verify_koppelman};
use koppelman::regularization::{Bump, QuadratureSpec};
use koppelman::selftest::spiral_targets;

fn main() {
    let q = QuadratureSpec::default();
    let p = smooth_disc_kernel(1.0, WeightSpec::for_disc(1.0), KernelRole::ProjectionP);
    let targets = spiral_targets(5, 0.1, 0.55);
    for k in 0..=3 {
        let psi = TestForm::monomial(k, 0, None);
        let v = apply_p(&p, &psi, &targets, &q).expect("projection");
        let worst = v
            .iter()
            .map(|s| (s.value - s.t.powu(k)).norm())
            .fold(0.0, f64::max);
        println!("P(z^{k}): worst error {worst:.2e} over {} targets", v.len());
    }

    let psi = TestForm::parse("conj(t)", Some(Bump::new(0.3, 0.6))).expect("valid form");
    let report = verify_koppelman(&p, &psi, &targets, &q).expect("Koppelman check");
    println!(
        "\nψ = zb * bump: max |ψ − K∂̄ψ − Pψ| = {:.2e}",
        report.max_residual
    );
}
