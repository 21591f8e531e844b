//! Θ for the named maps, against the identity and trace extremes.

use decoupling::cli::build_map;
use decoupling::qmat::SubsystemSpace;
use decoupling::twirl::RngSeed;

fn main() -> decoupling::Result<()> {
    let maps = ["identity", "trace", "t_w(2)", "compressive(2)", "measurement(2)", "depolarizing(0.5)", "randomizing", "random_cptp(2,3)"];
    for d in [2usize, 4] {
        println!("|A| = {d}  (log|A| = {})", (d as f64).log2());
        let a = SubsystemSpace::single("A", d)?;
        for spec in maps {
            match build_map(spec, &a, "B", RngSeed::new(1)).and_then(|t| t.theta()) {
                Ok(th) => println!("  {spec:<18} Θ = {:>9.5}  closed form: {}", th.theta, th.closed_form_used),
                Err(e) => println!("  {spec:<18} -- {e}"),
            }
        }
    }
    Ok(())
}
