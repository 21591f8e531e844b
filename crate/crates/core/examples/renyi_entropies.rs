//! Conditional Rényi entropies of a noisy Bell pair, both divergence types
//! and both arrows, plus the duality residual on a random pure state.

use decoupling::entropy::{duality_check, h_cond, Arrow, DivergenceType, RenyiParams};
use decoupling::qmat::{mes, CMat, DensityOp, SubsystemSpace};
use decoupling::twirl::{random_pure, RngSeed};

fn main() -> decoupling::Result<()> {
    let phi = mes(2, "A", "R")?.projector();
    let rho = DensityOp::from_mat(phi.space().clone(), phi.op().mat().scale(0.8) + CMat::identity(4, 4).scale(0.05))?;

    println!("{:>6} {:>11} {:>15} {:>10}", "alpha", "type", "arrow", "H(A|R)");
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        for dtype in [DivergenceType::Old, DivergenceType::Sandwiched] {
            for arrow in [Arrow::Optimized, Arrow::FixedMarginal] {
                let h = h_cond(&rho, &["R"], &RenyiParams::new(alpha, dtype, arrow)?)?;
                println!("{alpha:>6} {:>11} {:>15} {:>10.6}", format!("{dtype:?}"), format!("{arrow:?}"), h.value);
            }
        }
    }

    let abc = SubsystemSpace::new(&["A", "B", "C"], &[2, 2, 2])?;
    let psi = random_pure(&abc, RngSeed::new(4))?.projector();
    for alpha in [1.25, 2.0] {
        let d = duality_check(&psi, &["A"], &["B"], &["C"], alpha)?;
        println!("duality residual at α = {alpha}: {:.2e}", d.residual);
    }
    Ok(())
}
