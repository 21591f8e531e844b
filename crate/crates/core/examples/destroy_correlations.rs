//! Destroying correlations of a maximally correlated classical pair with
//! M Heisenberg–Weyl unitaries.

use decoupling::protocols::{destroy_sweep, ProtocolOptions};
use decoupling::qmat::{DensityOp, SubsystemSpace};
use decoupling::twirl::RngSeed;

fn main() -> decoupling::Result<()> {
    let rho = DensityOp::diag(SubsystemSpace::new(&["A", "R"], &[2, 2])?, &[0.5, 0.0, 0.0, 0.5])?;
    for n in [1usize, 2] {
        let ms: Vec<usize> = (0..=2 * n).map(|k| 1 << k).collect();
        for r in destroy_sweep(&rho, n, &ms, RngSeed::new(3), &ProtocolOptions::default())? {
            println!(
                "n={n} M={:>2}  log M/n={:.2}  error {:.3e}  bound {:.3}",
                r.details["m"], r.rates["randomness_rate"], r.measured_error, r.bound
            );
        }
    }
    Ok(())
}
