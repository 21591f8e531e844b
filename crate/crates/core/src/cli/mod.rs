//! Declarative experiment runner behind the `decoupling` binary.
//!
//! A config names a kind, a fixture and grids; [`run`] evaluates every grid
//! point and [`emit`] writes the rows as CSV and/or JSON. Reruns with the
//! same config and seed give byte-identical CSV whatever the thread count.

mod config;
mod defaults;
mod fixtures;
mod report;
mod run;

pub use config::{parse_config, parse_config_with, DtypeChoice, Ensemble, ExperimentConfig, Format, Kind, Overrides, ProtocolName};
pub use defaults::default_config;
pub use fixtures::{as_pure, build_map, build_map_power, load_state};
pub use report::{emit, fmt_f64, Cell, RunReport};
pub use run::run;

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "DECOUPLING_THREADS";

#[cfg(test)]
mod tests {
    use super::*;

    fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
    }

    #[test]
    fn decouple_grid_has_one_row_per_point() {
        let text = "[run]\nkind = decouple\nseed = 11\n[fixture]\nstate = random(2,2,2)\nmap = compressive(1)\n\
                    [grid]\nalpha = 1.25, 1.5, 2\nn = 1, 2, 3, 4\n[mc]\nsamples = 40\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        assert_eq!(rep.rows.len(), 12);
        assert_eq!(
            rep.columns,
            ["alpha", "n", "dtype", "log_nu_or_dimlog", "d_alpha", "theta", "rhs", "lhs_mean", "lhs_stderr", "slack", "error"]
        );
        let err = rep.col("error").unwrap();
        assert!(rep.rows.iter().all(|r| r[err] == Cell::Na), "{:?}", rep.rows);
        for (lhs, se, rhs) in rep.floats("lhs_mean").iter().zip(rep.floats("lhs_stderr")).zip(rep.floats("rhs")).map(|((a, b), c)| (*a, b, c)) {
            assert!(lhs <= rhs + 3.0 * se);
        }
    }

    #[test]
    fn same_seed_same_bytes_any_thread_count() {
        let text = "[run]\nkind = decouple\nseed = 5\n[fixture]\nstate = werner(0.6)\nmap = depolarizing(0.5)\n\
                    [grid]\nalpha = 1.5, 2\nn = 1, 2\ndtype = both\n[mc]\nsamples = 64\n";
        let cfg = parse_config(text).unwrap();
        let a = in_pool(1, || run(&cfg).unwrap().csv_string().unwrap());
        let b = in_pool(4, || run(&cfg).unwrap().csv_string().unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn failing_points_do_not_stop_the_sweep() {
        // α = 0.5 is a fine entropy order but outside the decoupling range
        let text = "[run]\nkind = sweep\nseed = 1\n[fixture]\nstate = werner(0.9)\nmap = trace\n[grid]\nalpha = 0.5, 1.5\nn = 1, 2\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        assert_eq!(rep.rows.len(), 4);
        let e = rep.col("error").unwrap();
        assert!(matches!(&rep.rows[0][e], Cell::S(s) if s.contains("α")));
        assert_eq!(rep.rows[2][e], Cell::Na);
        assert!(rep.floats("rhs")[3].is_finite());
    }

    #[test]
    fn entropy_and_theta_tables() {
        let text = "[run]\nkind = entropy\nseed = 2\n[fixture]\nstate = mes(2)\n[grid]\nalpha = 1.5, 2\ndtype = both\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        assert_eq!(rep.rows.len(), 8);
        for h in rep.floats("h_cond") {
            assert!((h + 1.0).abs() < 1e-6, "{h}");
        }
        let text = "[run]\nkind = theta\nseed = 2\n[fixture]\nmap = identity\n[grid]\ndim = 2, 3, 4\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        for (t, l) in rep.floats("theta").iter().zip(rep.floats("log2_dim")) {
            assert!((t - l).abs() < 1e-9);
        }
    }

    #[test]
    fn twirl_check_rows() {
        let text = "[run]\nkind = twirl_check\nseed = 2\n[grid]\ndim = 2, 3\nensemble = clifford, haar\n[mc]\nsamples = 400\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert!(rep.floats("max_abs_dev")[0] < 1e-12);
        // no qubit-only ensemble at dim 3
        assert!(matches!(&rep.rows[1][rep.col("error").unwrap()], Cell::S(_)));
        assert!(rep.floats("z")[2] < 5.0 && rep.floats("z")[3] < 5.0);
    }

    #[test]
    fn protocol_rows_embed_bound_and_measurement() {
        let text = "[run]\nkind = protocol\nseed = 3\nformat = csv, json\n[fixture]\nstate = source(0.9)\n\
                    [grid]\nn = 1, 2, 3\n[protocol]\nname = schumacher\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        assert_eq!(rep.rows.len(), 3);
        for (e, b) in rep.floats("measured_error").iter().zip(rep.floats("bound")) {
            assert!(*e <= b);
        }
        assert_eq!(rep.results.len(), 3);
        assert_eq!(rep.results[0]["protocol"], "schumacher");

        let text = "[run]\nkind = protocol\nseed = 3\n[fixture]\nstate = classical_pair\n[grid]\nn = 2\nm = 1, 4, 16\n[protocol]\nname = destroy\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        let errs = rep.floats("measured_error");
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{errs:?}");
    }

    #[test]
    fn emit_writes_requested_files() {
        let dir = std::env::temp_dir().join(format!("decoupling-emit-{}", std::process::id()));
        let prefix = dir.join("theta").to_string_lossy().into_owned();
        let text = "[run]\nkind = theta\nseed = 2\n[fixture]\nmap = trace\n";
        let rep = run(&parse_config(text).unwrap()).unwrap();
        let paths = emit(&rep, &prefix, &[Format::Csv, Format::Json]).unwrap();
        assert_eq!(paths.len(), 2);
        let csv_text = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(csv_text, rep.csv_string().unwrap());
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert!((json["rows"][0]["theta"].as_f64().unwrap() + 1.0).abs() < 1e-9);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
