//! The polynomial obstruction on the curve `t -> (t^3, t^7 + t^8)`: no
//! ambient polynomial `f` has `∂̄(f∘γ) = μ dtb` for `μ = 3(tb^9 + tb^10)`,
//! and the certificate proves it. On the ordinary cusp the same question has a
//! polynomial answer.
//!
//! ```text
//! cargo run --example obstruction
//! ```

use koppelman::curve::{make_map, normalize};
use koppelman::obstruction::{
    build_jet_system, feasibility, required_order, Feasibility, AMBIENT_NAMES,
};
use koppelman::parse::{parse_poly, VarTable};

fn main() {
    let u = VarTable::univariate();
    let cases = [
        ("t^3", "t^7+t^8", "3*(conj(t)^9+conj(t)^10)"),
        ("t^2", "t^3", "2*tb"),
        ("t^2", "t^3", "3*tb^2"),
    ];
    for (g1, g2, mu_src) in cases {
        let spec = make_map(
            parse_poly(g1, &u).unwrap(),
            parse_poly(g2, &u).unwrap(),
            1.0,
        )
        .expect("valid map");
        let param = normalize(&spec).expect("normalizable");
        let mu = parse_poly(mu_src, &VarTable::parameter()).expect("valid right-hand side");
        let order = required_order(&param, 10).max(12);
        let sys = build_jet_system(&param, &mu, order).expect("jet system");
        print!("curve ({g1}, {g2}), μ = {mu_src}, order {order}: ");
        match feasibility(&sys) {
            Feasibility::Feasible {
                witness,
                holomorphic,
            } => println!(
                "feasible, f = {} (holomorphic part {})",
                witness.named(AMBIENT_NAMES),
                holomorphic.named(["t", "tb"])
            ),
            Feasibility::Infeasible { certificate } => {
                let support: Vec<_> = certificate
                    .iter()
                    .enumerate()
                    .filter(|(_, y)| !num_traits::Zero::is_zero(*y))
                    .map(|(i, y)| format!("y[{i}] = {y}"))
                    .collect();
                println!("infeasible, certificate {}", support.join(", "));
            }
            Feasibility::Inconclusive { witness } => {
                println!("inconclusive, jet witness {}", witness.named(AMBIENT_NAMES))
            }
        }
    }
}
