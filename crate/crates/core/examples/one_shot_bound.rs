//! One-shot decoupling: the Rényi bound next to a Monte Carlo estimate of
//! E‖T(U·ρ) − ω⊗ρ_R‖₁ for a compressive map on a random state.

use decoupling::channels::KrausMap;
use decoupling::decouple::{mc_lhs, thm1_rhs, DecouplingInstance};
use decoupling::entropy::DivergenceType;
use decoupling::qmat::{PartialIsom, SubsystemSpace};
use decoupling::twirl::{random_density, RngSeed};

fn main() -> decoupling::Result<()> {
    let rho = random_density(&SubsystemSpace::new(&["A", "R"], &[3, 2])?, 2, RngSeed::new(3))?;
    let a = SubsystemSpace::single("A", 3)?;
    println!("{:>3} {:>5} {:>11} {:>9} {:>9} {:>9}", "|B|", "alpha", "type", "rhs", "lhs", "stderr");
    for db in [1usize, 2, 3] {
        let t = KrausMap::compressive(&PartialIsom::truncation(a.clone(), SubsystemSpace::single("B", db)?))?;
        for alpha in [1.25, 1.5, 2.0] {
            for dtype in [DivergenceType::Old, DivergenceType::Sandwiched] {
                let inst = DecouplingInstance::new(rho.clone(), &["A"], t.clone(), alpha, dtype)?;
                let b = thm1_rhs(&inst)?;
                let lhs = mc_lhs(&inst, 2000, RngSeed::new(7))?;
                println!("{db:>3} {alpha:>5} {:>11} {:>9.4} {:>9.4} {:>9.4}", format!("{dtype:?}"), b.rhs, lhs.mean, lhs.stderr);
            }
        }
    }
    Ok(())
}
