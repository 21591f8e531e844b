//! Grid runners, one per experiment kind.
//!
//! Every grid point runs independently (in parallel) and yields one row;
//! rows come back in grid order. A failing point fills its value columns
//! with blanks and says why in `error`.

use rayon::prelude::*;

use super::config::{arrow_name, dtype_name, Ensemble, ExperimentConfig, Kind, ProtocolName};
use super::fixtures::{as_pure, build_map, build_map_power, load_state};
use super::report::{Cell, RunReport};
use crate::decouple::{mc_lhs, thm1_rhs, thm1_rhs_iid, BoundReport, DecouplingInstance};
use crate::entropy::{self, Arrow, RenyiParams};
use crate::protocols::{self, MergeConfig, ProtocolOptions, ProtocolResult};
use crate::qmat::{purify, DensityOp, LabeledOperator, PureState, SubsystemSpace};
use crate::twirl::{self, ginibre, RngSeed, UnitaryEnsemble};
use crate::{domain, Result};

const FIXTURE_TAG: u64 = 0xF1;
const MAP_TAG: u64 = 0xA9;

type Computed = Result<(Vec<Cell>, Option<String>)>;

fn row(keys: Vec<Cell>, width: usize, out: Computed) -> Vec<Cell> {
    let mut r = keys;
    match out {
        Ok((vals, err)) => {
            debug_assert_eq!(vals.len(), width);
            r.extend(vals);
            r.push(err.into());
        }
        Err(e) => {
            r.extend(std::iter::repeat_n(Cell::Na, width));
            r.push(e.to_string().into());
        }
    }
    r
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub(crate) struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub results: Vec<serde_json::Value>,
}

/// Dispatch on the config's kind.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = std::time::Instant::now();
    let t = match cfg.kind {
        Kind::Entropy => run_entropy(cfg)?,
        Kind::Theta => run_theta(cfg)?,
        Kind::TwirlCheck => run_twirl_check(cfg)?,
        Kind::Decouple => run_decouple(cfg)?,
        Kind::Sweep => run_sweep(cfg)?,
        Kind::Protocol => run_protocol(cfg)?,
    };
    Ok(RunReport {
        config_echo: cfg.clone(),
        columns: t.columns,
        rows: t.rows,
        results: t.results,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn seed(cfg: &ExperimentConfig) -> RngSeed {
    RngSeed::new(cfg.seed)
}

fn state(cfg: &ExperimentConfig) -> Result<DensityOp> {
    load_state(cfg.state.as_deref().unwrap_or_default(), seed(cfg).derive(FIXTURE_TAG))
}

fn alphas(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.alpha.clone().unwrap_or_else(|| vec![1.5])
}

fn copies(cfg: &ExperimentConfig) -> Vec<usize> {
    cfg.n.clone().unwrap_or_else(|| vec![1])
}

fn run_entropy(cfg: &ExperimentConfig) -> Result<Table> {
    let rho = state(cfg)?;
    let mut keep = cfg.system.clone();
    keep.extend(cfg.cond.iter().cloned());
    let arrows = cfg.arrow.clone().unwrap_or_else(|| vec![Arrow::Optimized, Arrow::FixedMarginal]);
    let mut points = Vec::new();
    for &a in &alphas(cfg) {
        for dt in cfg.dtype.types() {
            for &ar in &arrows {
                points.push((a, dt, ar));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(a, dt, ar)| {
            let keys = vec![a.into(), dtype_name(dt).into(), arrow_name(ar).into()];
            let out = (|| -> Computed {
                let p = RenyiParams::new(a, dt, ar)?;
                let h = entropy::h_cond(&rho.reduce_to(&keep)?, &cfg.cond, &p)?;
                let ha = entropy::renyi_entropy(rho.reduce_to(&cfg.system)?.op(), a)?;
                Ok((vec![h.value.into(), ha.into(), h.iterations.into(), h.converged.into()], None))
            })();
            row(keys, 4, out)
        })
        .collect();
    Ok(Table { columns: cols(&["alpha", "dtype", "arrow", "h_cond", "h_a", "iterations", "converged", "error"]), rows, results: vec![] })
}

fn run_theta(cfg: &ExperimentConfig) -> Result<Table> {
    let spec = cfg.map.clone().unwrap_or_default();
    let dims = cfg.dim.clone().unwrap_or_else(|| vec![2]);
    let rows = dims
        .par_iter()
        .map(|&d| {
            let keys = vec![spec.as_str().into(), d.into()];
            let out = (|| -> Computed {
                let t = build_map(&spec, &SubsystemSpace::single("A", d)?, "B", seed(cfg).derive(MAP_TAG))?;
                let th = t.theta()?;
                let vals = vec![t.out_space().total_dim().into(), th.theta.into(), (d as f64).log2().into(), th.closed_form_used.into()];
                Ok((vals, None))
            })();
            row(keys, 4, out)
        })
        .collect();
    Ok(Table { columns: cols(&["map", "dim", "out_dim", "theta", "log2_dim", "closed_form", "error"]), rows, results: vec![] })
}

fn random_op(space: SubsystemSpace, s: RngSeed) -> Result<LabeledOperator> {
    let d = space.total_dim();
    LabeledOperator::new(space, ginibre(d, d, &mut s.rng()))
}

fn run_twirl_check(cfg: &ExperimentConfig) -> Result<Table> {
    let dims = cfg.dim.clone().unwrap_or_else(|| vec![2]);
    let ens = cfg.ensemble.clone().unwrap_or_else(|| vec![Ensemble::Clifford, Ensemble::Haar]);
    let points: Vec<(Ensemble, usize)> = ens.iter().flat_map(|&e| dims.iter().map(move |&d| (e, d))).collect();
    let rows = points
        .par_iter()
        .map(|&(e, d)| {
            let keys = vec![e.name().into(), d.into()];
            let out = (|| -> Computed {
                let s = seed(cfg).derive(d as u64);
                let a = SubsystemSpace::single("A", d)?;
                let r = SubsystemSpace::single("R", 2)?;
                let ar = a.join(&r)?;
                let sigma = random_op(ar.clone(), s.derive(1))?;
                let x = random_op(a.clone(), s.derive(2))?;
                let w = random_op(r, s.derive(3))?;
                let xw = x.tensor(&w)?.aligned_to(&ar)?;
                let closed = twirl::twirl_moment2(&sigma, &x, &w)?;
                let f = |u: &crate::qmat::CMat| {
                    let rot = sigma.conjugate_local(u, &["A"], &a).and_then(|o| o.aligned_to(&ar)).expect("local rotation");
                    LabeledOperator::new(ar.clone(), rot.mat() * xw.mat() * rot.mat().adjoint()).expect("same space")
                };
                let (mean, n, stderr) = match e {
                    Ensemble::Clifford => {
                        if d != 2 {
                            return domain(format!("the Clifford ensemble is built for qubits only, got dim {d}"));
                        }
                        (twirl::exact_average_op(f, &UnitaryEnsemble::clifford_qubit())?, 24, None)
                    }
                    Ensemble::Haar => {
                        let est = twirl::mc_average_op(f, &UnitaryEnsemble::haar(d), cfg.samples, s.derive(4))?;
                        (est.mean, est.n_samples, Some(est.stderr))
                    }
                };
                let diff = mean.sub(&closed)?;
                let frob = diff.mat().norm();
                let max_abs = mean.max_abs_diff(&closed)?;
                let z = stderr.map(|se| frob / se);
                Ok((vec![n.into(), max_abs.into(), frob.into(), stderr.into(), z.into()], None))
            })();
            row(keys, 5, out)
        })
        .collect();
    Ok(Table { columns: cols(&["ensemble", "dim", "samples", "max_abs_dev", "frob_dev", "stderr", "z", "error"]), rows, results: vec![] })
}

fn instance(cfg: &ExperimentConfig, rho: &DensityOp, a: f64, n: usize, dt: entropy::DivergenceType) -> Result<DecouplingInstance> {
    let space = rho.space().subspace(&cfg.system)?;
    let t = build_map_power(cfg.map.as_deref().unwrap_or_default(), &space, n, seed(cfg).derive(MAP_TAG))?;
    DecouplingInstance::iid(rho.clone(), &cfg.system, n, t, a, dt)
}

/// One-shot form for a single copy, n-copy form otherwise.
fn bound(inst: &DecouplingInstance) -> Result<BoundReport> {
    if inst.n_copies() == 1 {
        thm1_rhs(inst)
    } else {
        thm1_rhs_iid(inst)
    }
}

fn bound_points(cfg: &ExperimentConfig) -> Vec<(f64, usize, entropy::DivergenceType)> {
    let mut points = Vec::new();
    for &a in &alphas(cfg) {
        for &n in &copies(cfg) {
            for dt in cfg.dtype.types() {
                points.push((a, n, dt));
            }
        }
    }
    points
}

fn run_decouple(cfg: &ExperimentConfig) -> Result<Table> {
    let rho = state(cfg)?;
    let points = bound_points(cfg);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, &(a, n, dt))| {
            let keys = vec![a.into(), n.into(), dtype_name(dt).into()];
            let out = (|| -> Computed {
                let inst = instance(cfg, &rho, a, n, dt)?;
                let b = bound(&inst)?;
                let mut vals = vec![b.terms.log_nu.into(), b.terms.d_alpha_term.into(), b.terms.theta.into(), b.rhs.into()];
                match mc_lhs(&inst, cfg.samples, seed(cfg).derive(i as u64)) {
                    Ok(lhs) => {
                        vals.extend([lhs.mean.into(), lhs.stderr.into(), (b.rhs - lhs.mean).into()]);
                        Ok((vals, None))
                    }
                    Err(e) => {
                        vals.extend([Cell::Na, Cell::Na, Cell::Na]);
                        Ok((vals, Some(e.to_string())))
                    }
                }
            })();
            row(keys, 7, out)
        })
        .collect();
    let columns = cols(&[
        "alpha",
        "n",
        "dtype",
        "log_nu_or_dimlog",
        "d_alpha",
        "theta",
        "rhs",
        "lhs_mean",
        "lhs_stderr",
        "slack",
        "error",
    ]);
    Ok(Table { columns, rows, results: vec![] })
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let rho = state(cfg)?;
    let rows = bound_points(cfg)
        .par_iter()
        .map(|&(a, n, dt)| {
            let keys = vec![a.into(), n.into(), dtype_name(dt).into()];
            let out = (|| -> Computed {
                let b = bound(&instance(cfg, &rho, a, n, dt)?)?;
                let vals = vec![
                    b.terms.log_nu.into(),
                    b.terms.d_alpha_term.into(),
                    b.terms.theta.into(),
                    b.rhs.into(),
                    b.per_copy_exponent.into(),
                    b.vacuous.into(),
                ];
                Ok((vals, None))
            })();
            row(keys, 6, out)
        })
        .collect();
    let columns = cols(&["alpha", "n", "dtype", "log_nu_or_dimlog", "d_alpha", "theta", "rhs", "per_copy_exponent", "vacuous", "error"]);
    Ok(Table { columns, rows, results: vec![] })
}

enum Source {
    Pure(PureState),
    Mixed(DensityOp),
}

fn labels_are(rho: &DensityOp, want: &[&str]) -> bool {
    let l = rho.space().labels();
    l.len() == want.len() && want.iter().all(|w| l.iter().any(|x| x == w))
}

/// Bring the fixture into the shape the protocol takes.
fn protocol_source(p: ProtocolName, rho: &DensityOp) -> Result<Source> {
    match p {
        ProtocolName::Schumacher if labels_are(rho, &["A"]) => Ok(Source::Pure(purify(rho, "R")?)),
        ProtocolName::Schumacher => Ok(Source::Pure(as_pure(rho)?)),
        ProtocolName::Fqsw | ProtocolName::Merge if labels_are(rho, &["A", "B"]) => Ok(Source::Pure(purify(rho, "R")?)),
        ProtocolName::Fqsw | ProtocolName::Merge => Ok(Source::Pure(as_pure(rho)?)),
        ProtocolName::Destroy if labels_are(rho, &["A", "R"]) => Ok(Source::Mixed(rho.clone())),
        ProtocolName::Destroy => Ok(Source::Mixed(rho.reduce_to(&["A", "R"])?)),
    }
}

/// The headline rate of each protocol and its theorem counterpart.
fn rate_keys(p: ProtocolName) -> (&'static str, &'static str) {
    match p {
        ProtocolName::Schumacher => ("compression_rate", "theorem_rate"),
        ProtocolName::Fqsw => ("quantum_communication", "theorem_quantum_communication"),
        ProtocolName::Merge => ("classical_cost", "theorem_classical_cost"),
        ProtocolName::Destroy => ("randomness_rate", "theorem_rate"),
    }
}

fn run_protocol(cfg: &ExperimentConfig) -> Result<Table> {
    let p = cfg.protocol.expect("validated protocol config");
    let src = protocol_source(p, &state(cfg)?);
    let dims: Vec<Option<usize>> = match (&cfg.dim, p) {
        (Some(d), _) => d.iter().map(|&x| Some(x)).collect(),
        (None, ProtocolName::Fqsw | ProtocolName::Merge) => vec![Some(1)],
        (None, _) => vec![None],
    };
    let gaps: Vec<Option<f64>> = match (&cfg.rate_gap, p, &cfg.dim) {
        (Some(g), _, _) => g.iter().map(|&x| Some(x)).collect(),
        (None, ProtocolName::Schumacher, None) => vec![Some(0.15)],
        _ => vec![None],
    };
    let ms: Vec<Option<usize>> = cfg.m.as_ref().map_or(vec![None], |v| v.iter().map(|&x| Some(x)).collect());
    let mut points = Vec::new();
    for &a in &alphas(cfg) {
        for &n in &copies(cfg) {
            for &d in &dims {
                for &g in &gaps {
                    for &m in &ms {
                        points.push((a, n, d, g, m));
                    }
                }
            }
        }
    }
    let (rate_key, theorem_key) = rate_keys(p);
    let out: Vec<(Vec<Cell>, serde_json::Value)> = points
        .par_iter()
        .map(|&(a, n, d, g, m)| {
            let keys = vec![p.name().into(), a.into(), n.into()];
            let opts = ProtocolOptions { alpha: a, delta1: cfg.delta1, delta2: cfg.delta2, n_tries: cfg.tries };
            let s = seed(cfg).derive(n as u64);
            let res: Result<ProtocolResult> = match &src {
                Err(e) => domain(e.to_string()),
                Ok(Source::Pure(psi)) => match p {
                    ProtocolName::Schumacher => (|| {
                        let dim_b = match (d, g) {
                            (Some(d), _) => d,
                            (None, Some(g)) => {
                                let ent = protocols::source_entropies(&psi.projector(), "A", "R", a)?;
                                protocols::schumacher_dim_for_rate(ent.h_tilde + g, n, psi.space().dim_of("A")?)
                            }
                            (None, None) => domain("schumacher needs a dim or rate_gap")?,
                        };
                        protocols::schumacher_run(psi, n, dim_b, s, &opts)
                    })(),
                    ProtocolName::Fqsw => protocols::fqsw_run(psi, n, cfg.dim_a1.unwrap_or(1), d.unwrap_or(1), s, &opts),
                    _ => MergeConfig::new(cfg.dim_a0.unwrap_or(1), cfg.dim_a1.unwrap_or(1), d.unwrap_or(1))
                        .and_then(|mc| protocols::merge_run(psi, n, &mc, s, &opts)),
                },
                Ok(Source::Mixed(rho)) => {
                    let m = m.unwrap_or(1);
                    match d {
                        Some(db) => protocols::destroy_run_with(rho, n, m, db, s, &opts),
                        None => protocols::destroy_run(rho, n, m, s, &opts),
                    }
                }
            };
            let mut keys = keys;
            keys.extend([d.into(), g.into(), m.into()]);
            match res {
                Ok(r) => {
                    let eff_dim = r.details.get("dim_b").map(|&x| x as usize).or(d);
                    keys[3] = eff_dim.into();
                    let vals = vec![
                        r.measured_error.into(),
                        r.bound.into(),
                        r.within_bound().into(),
                        r.rates.get(rate_key).copied().into(),
                        r.rates.get(theorem_key).copied().into(),
                        r.witness.tries.into(),
                        r.witness.anomaly.into(),
                    ];
                    let json = serde_json::to_value(&r).unwrap_or(serde_json::Value::Null);
                    (row(keys, 7, Ok((vals, None))), json)
                }
                Err(e) => (row(keys, 7, Err(e)), serde_json::Value::Null),
            }
        })
        .collect();
    let (rows, results) = out.into_iter().unzip();
    let columns = cols(&[
        "protocol",
        "alpha",
        "n",
        "dim",
        "rate_gap",
        "m",
        "measured_error",
        "bound",
        "within_bound",
        "rate",
        "theorem_rate",
        "tries",
        "anomaly",
        "error",
    ]);
    Ok(Table { columns, rows, results })
}
