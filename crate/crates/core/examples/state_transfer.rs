//! Fully quantum Slepian–Wolf and state merging on a GHZ source.

use decoupling::protocols::{fqsw_run, merge_run, MergeConfig, ProtocolOptions};
use decoupling::qmat::{linalg, CVec, PureState, SubsystemSpace};
use decoupling::twirl::RngSeed;

fn main() -> decoupling::Result<()> {
    let mut amp = CVec::zeros(8);
    amp[0] = linalg::r(0.5f64.sqrt());
    amp[7] = linalg::r(0.5f64.sqrt());
    let ghz = PureState::new(SubsystemSpace::new(&["A", "B", "R"], &[2, 2, 2])?, amp)?;
    let opts = ProtocolOptions::default();

    for (n, a1, a2) in [(1, 1, 2), (2, 1, 2), (2, 1, 4), (2, 2, 2)] {
        let r = fqsw_run(&ghz, n, a1, a2, RngSeed::new(1), &opts)?;
        println!(
            "fqsw  n={n} |A1|={a1} |A2|={a2}: error {:.4}  bound {:.4}  Q={:.3}",
            r.measured_error, r.bound, r.rates["quantum_communication"]
        );
    }
    for (n, e) in [(1, 2), (2, 2), (2, 4)] {
        let cfg = MergeConfig::new(1, 1, e)?;
        let r = merge_run(&ghz, n, &cfg, RngSeed::new(2), &opts)?;
        println!(
            "merge n={n} |E|={e}: error {:.4}  bound {:.4}  classical {:.3} bits/copy",
            r.measured_error, r.bound, r.rates["classical_cost"]
        );
    }
    Ok(())
}
