//! Drive the experiment runner from code: parse a config, run the grid and
//! print the CSV the `decoupling` binary would write.

use decoupling::cli::{parse_config, run};

const CONFIG: &str = "
[run]
kind = decouple
seed = 2024

[fixture]
state = werner(0.8)
map = compressive(1)

[grid]
alpha = 1.25, 1.5, 2
n = 1, 2
dtype = both

[mc]
samples = 500
";

fn main() -> decoupling::Result<()> {
    let cfg = parse_config(CONFIG)?;
    let report = run(&cfg)?;
    print!("{}", report.csv_string()?);
    eprintln!("{} rows, {:.2}s", report.rows.len(), report.wall_time);
    Ok(())
}
