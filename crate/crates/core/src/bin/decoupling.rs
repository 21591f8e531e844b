use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decoupling::cli::{self, Format, Kind, Overrides, ProtocolName, THREADS_ENV};

/// Rényi decoupling experiments: entropies, Θ, twirls, bounds and protocols.
#[derive(Parser)]
#[command(name = "decoupling", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Config file (sectioned key = value); a builtin default is used otherwise.
    #[arg(long)]
    config: Option<String>,
    /// Master seed; overrides the config's.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix; CSV goes to stdout when neither this nor the config names one.
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated formats: csv, json.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Conditional Rényi entropies of a state over α, type and arrow.
    Entropy(Common),
    /// Θ of a map over input dimensions.
    Theta(Common),
    /// Twirl moments against their closed form.
    TwirlCheck(Common),
    /// Decoupling bound and its Monte Carlo left-hand side.
    Decouple(Common),
    /// A protocol run: schumacher, fqsw, merge or destroy.
    Protocol {
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Bound and per-copy exponent curves, no sampling.
    Sweep(Common),
}

fn go(cli: Cli) -> decoupling::Result<()> {
    let (kind, common, protocol) = match cli.cmd {
        Cmd::Entropy(c) => (Kind::Entropy, c, None),
        Cmd::Theta(c) => (Kind::Theta, c, None),
        Cmd::TwirlCheck(c) => (Kind::TwirlCheck, c, None),
        Cmd::Decouple(c) => (Kind::Decouple, c, None),
        Cmd::Sweep(c) => (Kind::Sweep, c, None),
        Cmd::Protocol { name, common } => {
            let p = name.map(|n| n.parse::<ProtocolName>().map_err(|e| decoupling::Error::Config(vec![e]))).transpose()?;
            (Kind::Protocol, common, p)
        }
    };
    let formats = common
        .format
        .map(|v| v.iter().map(|f| f.parse::<Format>()).collect::<Result<Vec<_>, _>>())
        .transpose()
        .map_err(|e| decoupling::Error::Config(vec![e]))?;
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => cli::default_config(kind, protocol),
    };
    let ov = Overrides { kind: Some(kind), seed: common.seed, output: common.out, formats, protocol };
    let cfg = cli::parse_config_with(&text, &ov)?;
    let report = cli::run(&cfg)?;
    match &cfg.output {
        Some(prefix) => {
            for p in cli::emit(&report, prefix, &cfg.formats)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => report.write_csv(std::io::stdout().lock())?,
    }
    eprintln!("{} rows in {:.2}s", report.rows.len(), report.wall_time);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    match go(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(decoupling::Error::Config(v)) => {
            eprintln!("invalid config:");
            for e in v {
                eprintln!("  {e}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
