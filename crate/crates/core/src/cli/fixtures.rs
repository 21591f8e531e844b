//! Named builtin states and map keywords, plus operator JSON files.
//!
//! States: `classical_pair`, `mes(d)`, `source(p)`, `werner(p)`, `ghz`,
//! `product(dA,dR)`, `random(dA,dR,rank)`, `random_pure(dA,dB,dR)`, or a path.
//!
//! Maps: `identity`, `trace`, `t_w(k)`, `compressive(k)`, `measurement(k)`,
//! `randomizing`, `depolarizing(p)`, `random_cptp(k,kraus)`.

use crate::channels::{heisenberg_weyl, measurement_map, KrausMap};
use crate::qmat::{copy_label, json, linalg, maximally_mixed, mes, purify, CMat, CVec, DensityOp, PartialIsom, PureState, SubsystemSpace};
use crate::twirl::{random_density, random_pure, RngSeed};
use crate::{domain, Result};

/// `name(a,b)` into `("name", ["a","b"])`.
fn call(spec: &str) -> Result<(&str, Vec<&str>)> {
    let spec = spec.trim();
    match spec.split_once('(') {
        None => Ok((spec, vec![])),
        Some((name, rest)) => {
            let Some(args) = rest.strip_suffix(')') else {
                return domain(format!("unbalanced parentheses in `{spec}`"));
            };
            Ok((name.trim(), args.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()))
        }
    }
}

fn arg<T: std::str::FromStr>(spec: &str, args: &[&str], i: usize) -> Result<T> {
    match args.get(i).map(|s| s.parse::<T>()) {
        Some(Ok(v)) => Ok(v),
        _ => domain(format!("`{spec}`: argument {} missing or malformed", i + 1)),
    }
}

fn sp(labels: &[&str], dims: &[usize]) -> Result<SubsystemSpace> {
    SubsystemSpace::new(labels, dims)
}

/// A state fixture; random builtins draw from `seed`.
pub fn load_state(spec: &str, seed: RngSeed) -> Result<DensityOp> {
    let (name, args) = call(spec)?;
    match name {
        "classical_pair" => DensityOp::diag(sp(&["A", "R"], &[2, 2])?, &[0.5, 0.0, 0.0, 0.5]),
        "mes" => Ok(mes(arg(spec, &args, 0)?, "A", "R")?.projector()),
        "source" => {
            let p: f64 = arg(spec, &args, 0)?;
            if !(0.0..=1.0).contains(&p) {
                return domain(format!("`{spec}`: p outside [0, 1]"));
            }
            let rho = DensityOp::diag(sp(&["A"], &[2])?, &[p, 1.0 - p])?;
            Ok(purify(&rho, "R")?.projector())
        }
        "werner" => {
            let p: f64 = arg(spec, &args, 0)?;
            if !(0.0..=1.0).contains(&p) {
                return domain(format!("`{spec}`: p outside [0, 1]"));
            }
            let phi = mes(2, "A", "R")?.projector();
            DensityOp::from_mat(phi.space().clone(), phi.op().mat().scale(p) + CMat::identity(4, 4).scale((1.0 - p) / 4.0))
        }
        "ghz" => {
            let mut amp = CVec::zeros(8);
            amp[0] = linalg::r(0.5f64.sqrt());
            amp[7] = linalg::r(0.5f64.sqrt());
            Ok(PureState::new(sp(&["A", "B", "R"], &[2, 2, 2])?, amp)?.projector())
        }
        "product" => {
            let (da, dr): (usize, usize) = (arg(spec, &args, 0)?, arg(spec, &args, 1)?);
            let r = random_density(&sp(&["R"], &[dr])?, dr, seed)?;
            maximally_mixed(da, "A")?.tensor(&r)
        }
        "random" => {
            let (da, dr, rank): (usize, usize, usize) = (arg(spec, &args, 0)?, arg(spec, &args, 1)?, arg(spec, &args, 2)?);
            random_density(&sp(&["A", "R"], &[da, dr])?, rank, seed)
        }
        "random_pure" => {
            let dims: [usize; 3] = [arg(spec, &args, 0)?, arg(spec, &args, 1)?, arg(spec, &args, 2)?];
            Ok(random_pure(&sp(&["A", "B", "R"], &dims)?, seed)?.projector())
        }
        _ if args.is_empty() && (spec.ends_with(".json") || std::path::Path::new(spec).exists()) => {
            let text = std::fs::read_to_string(spec)?;
            DensityOp::unit(json::from_json(&text)?)
        }
        _ => domain(format!("unknown state `{spec}`")),
    }
}

/// The pure state a rank-one density operator describes.
pub fn as_pure(rho: &DensityOp) -> Result<PureState> {
    let (vals, vecs) = linalg::eigh(rho.op().mat());
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (top - 1.0).abs() > 1e-9 {
        return domain(format!("state is not pure (largest eigenvalue {top})"));
    }
    let i = vals.iter().position(|&v| v == top).expect("nonempty spectrum");
    PureState::new(rho.space().clone(), vecs.column(i).into_owned())
}

/// Map keyword acting on `input`; new output systems are called `out`.
pub fn build_map(spec: &str, input: &SubsystemSpace, out: &str, seed: RngSeed) -> Result<KrausMap> {
    let (name, args) = call(spec)?;
    let d = input.total_dim();
    match name {
        "identity" => Ok(KrausMap::identity(input.clone())),
        "trace" => Ok(KrausMap::full_trace(input.clone())),
        "t_w" | "compressive" => {
            let k: usize = arg(spec, &args, 0)?;
            let w = PartialIsom::truncation(input.clone(), SubsystemSpace::single(out, k)?);
            if name == "t_w" {
                KrausMap::t_w(&w)
            } else {
                KrausMap::compressive(&w)
            }
        }
        "measurement" => {
            let k: usize = arg(spec, &args, 0)?;
            Ok(measurement_map(input, &SubsystemSpace::single(out, k)?, &format!("X_{out}"))?.map)
        }
        "randomizing" => KrausMap::randomizing(input.clone(), &heisenberg_weyl(d)),
        "depolarizing" => KrausMap::depolarizing(input.clone(), arg(spec, &args, 0)?),
        "random_cptp" => {
            let (k, kraus): (usize, usize) = (arg(spec, &args, 0)?, arg(spec, &args, 1)?);
            KrausMap::random_cptp(input.clone(), SubsystemSpace::single(out, k)?, kraus, seed)
        }
        _ => domain(format!("unknown map `{spec}`")),
    }
}

/// The same map on each of `n` copies of `input`, tensored.
///
/// For `n = 1` the raw labels are kept; otherwise copy `k` acts on `L[k]`
/// and writes `B[k]`.
pub fn build_map_power(spec: &str, input: &SubsystemSpace, n: usize, seed: RngSeed) -> Result<KrausMap> {
    if n == 1 {
        return build_map(spec, input, "B", seed);
    }
    let mut acc: Option<KrausMap> = None;
    for k in 1..=n {
        let labels: Vec<String> = input.labels().iter().map(|l| copy_label(l, k)).collect();
        let copy = SubsystemSpace::new(&labels, input.dims())?;
        let t = build_map(spec, &copy, &copy_label("B", k), seed)?;
        acc = Some(match acc {
            None => t,
            Some(a) => a.tensor(&t)?,
        });
    }
    Ok(acc.expect("n >= 1"))
}
