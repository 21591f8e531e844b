//! Experiment configs as flat `[section]` / `key = value` text.
//!
//! ```text
//! [run]
//! kind = decouple
//! seed = 7
//!
//! [fixture]
//! state = werner(0.8)
//! map = compressive(1)
//!
//! [grid]
//! alpha = 1.25, 1.5, 2
//! n = 1, 2
//! dtype = both
//!
//! [mc]
//! samples = 2000
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::entropy::{Arrow, DivergenceType};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Entropy,
    Theta,
    TwirlCheck,
    Decouple,
    Protocol,
    Sweep,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::Entropy, Kind::Theta, Kind::TwirlCheck, Kind::Decouple, Kind::Protocol, Kind::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Entropy => "entropy",
            Kind::Theta => "theta",
            Kind::TwirlCheck => "twirl_check",
            Kind::Decouple => "decouple",
            Kind::Protocol => "protocol",
            Kind::Sweep => "sweep",
        }
    }

    fn uses_mc(self) -> bool {
        matches!(self, Kind::TwirlCheck | Kind::Decouple)
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.replace('-', "_");
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown kind `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DtypeChoice {
    Old,
    Sandwiched,
    Both,
}

impl DtypeChoice {
    pub fn types(self) -> Vec<DivergenceType> {
        match self {
            DtypeChoice::Old => vec![DivergenceType::Old],
            DtypeChoice::Sandwiched => vec![DivergenceType::Sandwiched],
            DtypeChoice::Both => vec![DivergenceType::Old, DivergenceType::Sandwiched],
        }
    }

    fn name(self) -> &'static str {
        match self {
            DtypeChoice::Old => "old",
            DtypeChoice::Sandwiched => "sandwiched",
            DtypeChoice::Both => "both",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolName {
    Schumacher,
    Fqsw,
    Merge,
    Destroy,
}

impl ProtocolName {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolName::Schumacher => "schumacher",
            ProtocolName::Fqsw => "fqsw",
            ProtocolName::Merge => "merge",
            ProtocolName::Destroy => "destroy",
        }
    }
}

impl FromStr for ProtocolName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [ProtocolName::Schumacher, ProtocolName::Fqsw, ProtocolName::Merge, ProtocolName::Destroy]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown protocol `{s}` (schumacher, fqsw, merge, destroy)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Haar,
    Clifford,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Haar => "haar",
            Ensemble::Clifford => "clifford",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (csv, json)")),
        }
    }
}

pub(crate) fn arrow_name(a: Arrow) -> &'static str {
    match a {
        Arrow::Optimized => "optimized",
        Arrow::FixedMarginal => "fixed_marginal",
    }
}

pub(crate) fn dtype_name(d: DivergenceType) -> &'static str {
    match d {
        DivergenceType::Old => "old",
        DivergenceType::Sandwiched => "sandwiched",
    }
}

/// A validated experiment. Grids left out of the text are `None` and take
/// the runner's defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub output: Option<String>,
    pub formats: Vec<Format>,

    /// Builtin name like `werner(0.8)` or a path to an operator JSON file.
    pub state: Option<String>,
    /// Map keyword applied to each copy of the system.
    pub map: Option<String>,
    pub system: Vec<String>,
    pub cond: Vec<String>,

    pub alpha: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub dim: Option<Vec<usize>>,
    pub m: Option<Vec<usize>>,
    pub rate_gap: Option<Vec<f64>>,
    pub arrow: Option<Vec<Arrow>>,
    pub ensemble: Option<Vec<Ensemble>>,
    pub dtype: DtypeChoice,

    pub samples: usize,

    pub protocol: Option<ProtocolName>,
    pub delta1: f64,
    pub delta2: f64,
    pub tries: usize,
    pub dim_a0: Option<usize>,
    pub dim_a1: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub formats: Option<Vec<Format>>,
    pub protocol: Option<ProtocolName>,
}

const DEFAULT_SAMPLES: usize = 1000;

const KEYS: &[(&str, &[&str])] = &[
    ("run", &["kind", "seed", "output", "format"]),
    ("fixture", &["state", "map", "system", "cond"]),
    ("grid", &["alpha", "n", "dim", "m", "rate_gap", "arrow", "ensemble", "dtype"]),
    ("mc", &["samples"]),
    ("protocol", &["name", "delta1", "delta2", "tries", "dim_a0", "dim_a1"]),
];

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn parse_arrow(s: &str) -> std::result::Result<Arrow, String> {
    match s {
        "optimized" | "up" => Ok(Arrow::Optimized),
        "fixed_marginal" | "down" => Ok(Arrow::FixedMarginal),
        _ => Err(format!("unknown arrow `{s}` (optimized, fixed_marginal)")),
    }
}

fn parse_ensemble(s: &str) -> std::result::Result<Ensemble, String> {
    match s {
        "haar" => Ok(Ensemble::Haar),
        "clifford" => Ok(Ensemble::Clifford),
        _ => Err(format!("unknown ensemble `{s}` (haar, clifford)")),
    }
}

fn parse_dtype(s: &str) -> std::result::Result<DtypeChoice, String> {
    match s {
        "old" | "petz" => Ok(DtypeChoice::Old),
        "sandwiched" => Ok(DtypeChoice::Sandwiched),
        "both" => Ok(DtypeChoice::Both),
        _ => Err(format!("unknown dtype `{s}` (old, sandwiched, both)")),
    }
}

fn words(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Grids each kind iterates over; any other grid in the file is an error.
fn grids_for(kind: Kind, protocol: Option<ProtocolName>) -> &'static [&'static str] {
    match kind {
        Kind::Entropy => &["alpha", "dtype", "arrow"],
        Kind::Theta => &["dim"],
        Kind::TwirlCheck => &["dim", "ensemble"],
        Kind::Decouple | Kind::Sweep => &["alpha", "n", "dtype"],
        Kind::Protocol => match protocol {
            Some(ProtocolName::Schumacher) => &["alpha", "n", "dim", "rate_gap"],
            Some(ProtocolName::Destroy) => &["alpha", "n", "dim", "m"],
            _ => &["alpha", "n", "dim"],
        },
    }
}

/// [`parse_config_with`] without overrides.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, &Overrides::default())
}

/// Parse and validate; every violation found is reported, each with its line.
pub fn parse_config_with(text: &str, ov: &Overrides) -> Result<ExperimentConfig> {
    let mut errs = Vec::new();
    let mut entries: Vec<Entry> = Vec::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            if !KEYS.iter().any(|(sec, _)| *sec == name) {
                errs.push(format!("line {line}: unknown section [{name}]"));
            }
            section = name.to_string();
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            errs.push(format!("line {line}: expected `key = value`"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        match KEYS.iter().find(|(sec, _)| *sec == section) {
            None if section.is_empty() => {
                errs.push(format!("line {line}: `{k}` appears before any [section]"));
                continue;
            }
            None => continue,
            Some((_, keys)) if !keys.contains(&k) => {
                errs.push(format!("line {line}: unknown key `{k}` in [{section}]"));
                continue;
            }
            _ => {}
        }
        if let Some(prev) = entries.iter().find(|e| e.section == section && e.key == k) {
            errs.push(format!("line {line}: duplicate key `{k}` in [{section}] (first on line {})", prev.line));
            continue;
        }
        entries.push(Entry { line, section: section.clone(), key: k.to_string(), value: v.to_string() });
    }

    let get = |sec: &str, key: &str| entries.iter().find(|e| e.section == sec && e.key == key);
    let at = |e: &Entry| format!("line {} ([{}] {})", e.line, e.section, e.key);

    macro_rules! field {
        ($sec:expr, $key:expr, $parse:expr) => {
            match get($sec, $key) {
                None => None,
                Some(e) => match $parse(e.value.as_str()) {
                    Ok(v) => Some(v),
                    Err(msg) => {
                        errs.push(format!("{}: {}", at(e), msg));
                        None
                    }
                },
            }
        };
    }
    macro_rules! grid {
        ($key:expr, $parse:expr) => {
            match get("grid", $key) {
                None => None,
                Some(e) => match $parse(e.value.as_str()) {
                    Ok(v) if v.is_empty() => {
                        errs.push(format!("{}: grid is empty", at(e)));
                        None
                    }
                    Ok(v) => Some(v),
                    Err(msg) => {
                        errs.push(format!("{}: {}", at(e), msg));
                        None
                    }
                },
            }
        };
    }

    let kind: Option<Kind> = field!("run", "kind", |v: &str| v.parse::<Kind>());
    let kind = match (ov.kind, kind) {
        (Some(k), Some(f)) if k != f => {
            errs.push(format!("config kind `{}` does not match the `{}` subcommand", f.name(), k.name()));
            None
        }
        (Some(k), _) => Some(k),
        (None, Some(f)) => Some(f),
        (None, None) => {
            errs.push("missing [run] kind".into());
            None
        }
    };
    let seed: Option<u64> = field!("run", "seed", |v: &str| v.parse::<u64>().map_err(|e| e.to_string()));
    let seed = ov.seed.or(seed);
    if seed.is_none() {
        errs.push("missing [run] seed (runs are never seeded from the clock)".into());
    }
    let output = ov.output.clone().or_else(|| get("run", "output").map(|e| e.value.clone()));
    let formats: Option<Vec<Format>> = field!("run", "format", list::<Format>);
    let formats = ov.formats.clone().or(formats).unwrap_or_else(|| vec![Format::Csv]);

    let state = get("fixture", "state").map(|e| e.value.clone());
    let map = get("fixture", "map").map(|e| e.value.clone());
    let system = get("fixture", "system").map(|e| words(&e.value)).unwrap_or_else(|| vec!["A".into()]);
    let cond = get("fixture", "cond").map(|e| words(&e.value)).unwrap_or_else(|| vec!["R".into()]);

    let alpha: Option<Vec<f64>> = grid!("alpha", list::<f64>);
    if let (Some(a), Some(e)) = (&alpha, get("grid", "alpha")) {
        for x in a.iter().filter(|x| !(**x > 0.0 && **x <= 2.0)) {
            errs.push(format!("{}: α = {x} violates the constraint α ∈ (0, 2]", at(e)));
        }
    }
    let n: Option<Vec<usize>> = grid!("n", list::<usize>);
    if let (Some(v), Some(e)) = (&n, get("grid", "n")) {
        if v.contains(&0) {
            errs.push(format!("{}: copies must be at least 1", at(e)));
        }
    }
    let dim: Option<Vec<usize>> = grid!("dim", list::<usize>);
    if let (Some(v), Some(e)) = (&dim, get("grid", "dim")) {
        if v.contains(&0) {
            errs.push(format!("{}: dimensions must be at least 1", at(e)));
        }
    }
    let m: Option<Vec<usize>> = grid!("m", list::<usize>);
    let rate_gap: Option<Vec<f64>> = grid!("rate_gap", list::<f64>);
    let arrow: Option<Vec<Arrow>> = grid!("arrow", |v: &str| words(v).iter().map(|s| parse_arrow(s)).collect::<std::result::Result<Vec<_>, _>>());
    let ensemble: Option<Vec<Ensemble>> =
        grid!("ensemble", |v: &str| words(v).iter().map(|s| parse_ensemble(s)).collect::<std::result::Result<Vec<_>, _>>());
    let dtype = field!("grid", "dtype", parse_dtype).unwrap_or(DtypeChoice::Sandwiched);

    let samples = field!("mc", "samples", |v: &str| v.parse::<usize>().map_err(|e| e.to_string())).unwrap_or(DEFAULT_SAMPLES);
    let protocol: Option<ProtocolName> = field!("protocol", "name", |v: &str| v.parse::<ProtocolName>());
    let protocol = ov.protocol.or(protocol);
    let real = |v: &str| v.parse::<f64>().map_err(|e| e.to_string());
    let count = |v: &str| v.parse::<usize>().map_err(|e| e.to_string());
    let delta1 = field!("protocol", "delta1", real).unwrap_or(0.1);
    let delta2 = field!("protocol", "delta2", real).unwrap_or(0.1);
    let tries = field!("protocol", "tries", count).unwrap_or(32);
    let dim_a0 = field!("protocol", "dim_a0", count);
    let dim_a1 = field!("protocol", "dim_a1", count);

    if let Some(k) = kind {
        if k.uses_mc() && samples < 2 {
            let loc = get("mc", "samples").map(at).unwrap_or_else(|| "[mc] samples".into());
            errs.push(format!("{loc}: Monte Carlo kinds need N >= 2, got {samples}"));
        }
        let used = grids_for(k, protocol);
        for e in entries.iter().filter(|e| e.section == "grid") {
            if !used.contains(&e.key.as_str()) {
                errs.push(format!("{}: grid `{}` is not used by kind `{}`", at(e), e.key, k.name()));
            }
        }
        let needs_state = matches!(k, Kind::Entropy | Kind::Decouple | Kind::Sweep | Kind::Protocol);
        if needs_state && state.is_none() {
            errs.push(format!("kind `{}` needs [fixture] state", k.name()));
        }
        let needs_map = matches!(k, Kind::Theta | Kind::Decouple | Kind::Sweep);
        if needs_map && map.is_none() {
            errs.push(format!("kind `{}` needs [fixture] map", k.name()));
        }
        if k == Kind::Protocol {
            match protocol {
                None => errs.push("kind `protocol` needs [protocol] name".into()),
                Some(ProtocolName::Schumacher) if dim.is_some() && rate_gap.is_some() => {
                    errs.push("[grid] give either `dim` or `rate_gap` for schumacher, not both".into())
                }
                Some(ProtocolName::Destroy) if m.is_none() => errs.push("destroy needs a [grid] m list".into()),
                _ => {}
            }
            if tries == 0 {
                errs.push("[protocol] tries must be positive".into());
            }
        }
    }

    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    Ok(ExperimentConfig {
        kind: kind.expect("checked"),
        seed: seed.expect("checked"),
        output,
        formats,
        state,
        map,
        system,
        cond,
        alpha,
        n,
        dim,
        m,
        rate_gap,
        arrow,
        ensemble,
        dtype,
        samples,
        protocol,
        delta1,
        delta2,
        tries,
        dim_a0,
        dim_a1,
    })
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    /// Canonical text; `parse_config(cfg.to_text())` gives `cfg` back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]\nkind = {}\nseed = {}", self.kind.name(), self.seed);
        if let Some(o) = &self.output {
            let _ = writeln!(s, "output = {o}");
        }
        let fmts: Vec<&str> = self.formats.iter().map(|f| if *f == Format::Csv { "csv" } else { "json" }).collect();
        let _ = writeln!(s, "format = {}", fmts.join(", "));

        let _ = writeln!(s, "\n[fixture]");
        if let Some(st) = &self.state {
            let _ = writeln!(s, "state = {st}");
        }
        if let Some(m) = &self.map {
            let _ = writeln!(s, "map = {m}");
        }
        let _ = writeln!(s, "system = {}\ncond = {}", self.system.join(", "), self.cond.join(", "));

        let _ = writeln!(s, "\n[grid]");
        if let Some(v) = &self.alpha {
            let _ = writeln!(s, "alpha = {}", join(v));
        }
        if let Some(v) = &self.n {
            let _ = writeln!(s, "n = {}", join(v));
        }
        if let Some(v) = &self.dim {
            let _ = writeln!(s, "dim = {}", join(v));
        }
        if let Some(v) = &self.m {
            let _ = writeln!(s, "m = {}", join(v));
        }
        if let Some(v) = &self.rate_gap {
            let _ = writeln!(s, "rate_gap = {}", join(v));
        }
        if let Some(v) = &self.arrow {
            let _ = writeln!(s, "arrow = {}", v.iter().map(|a| arrow_name(*a)).collect::<Vec<_>>().join(", "));
        }
        if let Some(v) = &self.ensemble {
            let _ = writeln!(s, "ensemble = {}", v.iter().map(|e| e.name()).collect::<Vec<_>>().join(", "));
        }
        if grids_for(self.kind, self.protocol).contains(&"dtype") {
            let _ = writeln!(s, "dtype = {}", self.dtype.name());
        }

        let _ = writeln!(s, "\n[mc]\nsamples = {}", self.samples);
        let _ = writeln!(s, "\n[protocol]");
        if let Some(p) = self.protocol {
            let _ = writeln!(s, "name = {}", p.name());
        }
        let _ = writeln!(s, "delta1 = {}\ndelta2 = {}\ntries = {}", self.delta1, self.delta2, self.tries);
        if let Some(d) = self.dim_a0 {
            let _ = writeln!(s, "dim_a0 = {d}");
        }
        if let Some(d) = self.dim_a1 {
            let _ = writeln!(s, "dim_a1 = {d}");
        }
        s
    }
}
