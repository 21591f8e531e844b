//! Schumacher compression of a biased qubit source at a rate 0.15 bits
//! above H_α̃(A): measured error against the bound as n grows.

use decoupling::protocols::{schumacher_dim_for_rate, schumacher_run, source_entropies, ProtocolOptions};
use decoupling::qmat::{purify, DensityOp, SubsystemSpace};
use decoupling::twirl::RngSeed;

fn main() -> decoupling::Result<()> {
    let rho = DensityOp::diag(SubsystemSpace::single("A", 2)?, &[0.9, 0.1])?;
    let psi = purify(&rho, "R")?;
    let opts = ProtocolOptions::default();
    let h = source_entropies(&psi.projector(), "A", "R", opts.alpha)?.h_tilde;
    println!("H_α̃(A) = {h:.4}, rate = {:.4}", h + 0.15);
    println!("{:>2} {:>4} {:>12} {:>12}", "n", "|B|", "error", "bound");
    for n in 1..=6 {
        let db = schumacher_dim_for_rate(h + 0.15, n, 2);
        let r = schumacher_run(&psi, n, db, RngSeed::new(n as u64), &opts)?;
        println!("{n:>2} {db:>4} {:>12.4e} {:>12.4e}", r.measured_error, r.bound);
    }
    Ok(())
}
