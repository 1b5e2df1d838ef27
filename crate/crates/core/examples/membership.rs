//! Membership in the domain of `∂̄` on the cusp, and correction of a
//! function with a planted `1/τ` tail.
//!
//! ```text
//! cargo run --release --example membership
//! ```

use koppelman::curve::{make_cusp, normalize, pullback_function, structure_form};
use koppelman::operators::{
    correct_solution, extract_residue_coeffs, membership_test, Corrected, MembershipOptions,
    Sampled,
};
use koppelman::parse::{parse_poly, VarTable};
use num_complex::Complex64;

fn main() {
    let spec = make_cusp(2, 3, 1.0).expect("valid cusp");
    let param = normalize(&spec).expect("normalizable");
    let omega = structure_form(&spec).expect("structure form");
    let opts = MembershipOptions::within(0.3);

    let f = parse_poly("z1*zb2 + z2*zb1", &VarTable::ambient()).expect("valid polynomial");
    let u = pullback_function(&param, &f, None);
    let smooth = Sampled(|t: Complex64| u.eval(t));
    let rep = membership_test(&smooth, &omega, &param, &opts).expect("membership");
    println!("pullback of z1*zb2 + z2*zb1: {}", rep.verdict);

    let planted = Complex64::new(0.25, -0.5);
    let tail = Sampled(|t: Complex64| t.conj() * t * t + planted / t);
    let rep = membership_test(&tail, &omega, &param, &opts).expect("membership");
    println!("with a planted tail:         {}", rep.verdict);

    let coeffs = extract_residue_coeffs(&tail, &omega, opts.j_max(&omega), &opts).expect("moments");
    let corr = correct_solution(&coeffs, &omega);
    for (e, c) in &corr.terms {
        println!("  correction term τ^{e}: {:.6}", c / omega.constant_factor);
    }
    let fixed = Corrected {
        base: &tail,
        correction: &corr,
    };
    let rep = membership_test(&fixed, &omega, &param, &opts).expect("membership");
    println!("after correction:            {}", rep.verdict);
}
