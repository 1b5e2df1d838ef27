//! Solving `∂̄u = μ` on the cusp: the raw solution `Kμ` carries a residue
//! at the singular point, which the correction removes.
//!
//! ```text
//! cargo run --release --example solve_dbar
//! ```

use koppelman::curve::{make_cusp, normalize, pullback_function};
use koppelman::kernels::{curve_kernel_assemble, KernelRole, WeightSpec};
use koppelman::operators::{solve_dbar, SolveOptions};
use koppelman::parse::{parse_poly, VarTable};
use koppelman::regularization::Bump;
use num_complex::Complex64;

fn main() {
    let spec = make_cusp(2, 3, 1.0).expect("valid cusp");
    let param = normalize(&spec).expect("normalizable");
    let k = curve_kernel_assemble(
        &spec,
        WeightSpec::for_disc(param.disc_radius),
        KernelRole::SolutionK,
    )
    .expect("cusp kernel");
    let f = parse_poly("zb2 + z1*zb1", &VarTable::ambient()).expect("valid polynomial");
    let psi = pullback_function(&param, &f, Some(Bump::new(0.4, 0.6)));
    let mu = psi.dbar().expect("closed-form dbar");

    let report = solve_dbar(&k, &mu, &SolveOptions::for_problem(&k, &mu)).expect("solve");
    println!(
        "membership of Kμ:        {}",
        report.membership_before.verdict
    );
    let nonzero = report
        .coefficients
        .c
        .iter()
        .filter(|c| c.norm() > 0.0)
        .count();
    println!(
        "residue coefficients:    {nonzero} of {} nonzero",
        report.coefficients.c.len()
    );
    println!("correction terms:        {:?}", report.correction.terms);
    println!(
        "membership after fixing: {}",
        report.membership_after.verdict
    );
    println!(
        "max |∂̄u − μ|:            {:.2e}",
        report.max_dbar_residual()
    );
    for r in [0.05, 0.1, 0.2] {
        let t = Complex64::from_polar(r, 0.7);
        println!("u({t:.3}) = {:.6}", report.solution_near_origin(t));
    }
}
