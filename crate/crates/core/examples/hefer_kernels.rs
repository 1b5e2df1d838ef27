//! Hefer decompositions of plane curve equations and the closed-form
//! kernel factor on a monomial cusp.
//!
//! ```text
//! cargo run --example hefer_kernels
//! ```

use koppelman::kernels::{hefer, CuspKernel};
use koppelman::parse::{parse_poly, VarTable};
use num_complex::Complex64;

fn main() {
    let names = ["w1", "w2", "z1", "z2"];
    for src in ["z1^2 - z2^3", "z1^3 - z2^4", "z1^2 - z2^5 + z1*z2"] {
        let a = parse_poly(src, &VarTable::plane()).expect("valid curve equation");
        let h = hefer(&a);
        println!("a = {src}");
        println!("  g1 = {}", h.g1.named(names));
        println!("  g2 = {}", h.g2.named(names));
        println!(
            "  identity defect is zero: {}",
            h.identity_defect().is_zero()
        );
    }

    for (r, s) in [(2, 3), (2, 5), (3, 4)] {
        let k = CuspKernel::new(r, s);
        println!("\ncusp ({r},{s}): D = {}, Q coefficients {:?}", k.d, k.q);
        let t = Complex64::new(0.3, 0.1);
        for tau in [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.4),
            t * 1.001,
        ] {
            println!("  F({tau:.4}, {t:.4}) = {:.6}", k.factor(tau, t));
        }
    }
}
