//! n-copy decoupling bound for partial trace on a mixed A: the per-copy
//! exponent turns negative and the bound decays once log(n+1) terms are paid.

use decoupling::channels::KrausMap;
use decoupling::decouple::{n_copy_space, thm1_rhs_iid, DecouplingInstance};
use decoupling::entropy::DivergenceType;
use decoupling::qmat::{maximally_mixed, SubsystemSpace};
use decoupling::twirl::{random_density, RngSeed};

fn main() -> decoupling::Result<()> {
    let r = random_density(&SubsystemSpace::single("R", 2)?, 2, RngSeed::new(2))?;
    let rho = maximally_mixed(2, "A")?.tensor(&r)?;
    println!("{:>2} {:>12} {:>12} {:>10} {:>12}", "n", "|R|log(n+1)", "-nH(A|R)", "Θ", "rhs");
    for n in 1..=6 {
        let t = KrausMap::full_trace(n_copy_space(&SubsystemSpace::single("A", 2)?, n));
        let inst = DecouplingInstance::iid(rho.clone(), &["A"], n, t, 1.5, DivergenceType::Sandwiched)?;
        let b = thm1_rhs_iid(&inst)?;
        println!("{n:>2} {:>12.4} {:>12.4} {:>10.4} {:>12.4e}", b.terms.log_nu, b.terms.d_alpha_term, b.terms.theta, b.rhs);
    }
    Ok(())
}
