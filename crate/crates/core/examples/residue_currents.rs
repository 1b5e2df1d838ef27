//! Principal value and residue currents of `1/t^m` in the plane, compared
//! with their closed forms.
//!
//! ```text
//! cargo run --release --example residue_currents
//! ```

use koppelman::form::TestForm;
use koppelman::regularization::{Bump, QuadratureSpec, RegularizationSchedule};
use koppelman::residue::{pv_pair, residue_oracle, residue_pair};

fn main() {
    let bump = Bump::with_support(0.8);
    let sched = RegularizationSchedule::for_disc(0.8);
    let q = QuadratureSpec::default();

    println!(
        "{:>2} {:>10} {:>28} {:>28} {:>10}",
        "m", "psi", "numerical", "closed form", "rel err"
    );
    for m in 1..=4 {
        for (a, b) in [(m - 1, 0), (m, 1), (m + 1, 0)] {
            let psi = TestForm::monomial(a, b, Some(bump));
            let v = residue_pair(m, &psi, &sched, &q).expect("residue pairing");
            let exact = residue_oracle(m, &psi);
            let err = (v.value - exact).norm() / exact.norm().max(1.0);
            println!(
                "{m:>2} {:>10} {:>28} {:>28} {err:>10.2e}",
                format!("t^{a} tb^{b}"),
                format!("{:.8}", v.value),
                format!("{:.8}", exact),
            );
        }
    }

    // the principal value against a radial test function; only the
    // balanced monomial t^m survives the angular integration
    let psi = TestForm::monomial(2, 0, Some(bump));
    let v = pv_pair(2, &psi, &sched, &q).expect("pv pairing");
    println!(
        "\n<1/t^2, t^2 bump dA> = {:.8} (error estimate {:.1e})",
        v.value, v.error_estimate
    );
    println!("regularization trace:");
    for (delta, x) in &v.trace {
        println!("  delta = {delta:.4}  {x:.10}");
    }
}
