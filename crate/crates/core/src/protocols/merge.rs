//! State merging with one-way classical communication.

use serde::Serialize;

use crate::channels::{measurement_map, KrausMap};
use crate::qmat::{copy_labels, linalg, mes, CMat, LabeledOperator, LowRank, PartialIsom, PureState, SubsystemSpace};
use crate::twirl::RngSeed;
use crate::{domain, Error, Result};

use super::{
    check_size, exp_bound, ket_from_matrix, log2, require_labels, search, source_entropies, uhlmann_isometry, uhlmann_kets, xi_of,
    ProtocolOptions, ProtocolResult,
};

/// Register sizes for merging: `Aⁿ → E` then a measurement `EA₀ → XA₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MergeConfig {
    pub dim_a0: usize,
    pub dim_a1: usize,
    pub dim_e: usize,
    /// `⌈ζ⌉`, the number of outcomes.
    pub j: usize,
    /// `|E||A₀|/|A₁|`
    pub zeta: f64,
}

impl MergeConfig {
    pub fn new(dim_a0: usize, dim_a1: usize, dim_e: usize) -> Result<Self> {
        if dim_a0 == 0 || dim_a1 == 0 || dim_e == 0 {
            return domain("merge dimensions must be positive");
        }
        if dim_a1 > dim_a0 * dim_e {
            return domain(format!("need |A1| <= |A0||E|, got {dim_a1} > {}", dim_a0 * dim_e));
        }
        let zeta = (dim_e * dim_a0) as f64 / dim_a1 as f64;
        Ok(Self { dim_a0, dim_a1, dim_e, j: (dim_e * dim_a0).div_ceil(dim_a1), zeta })
    }
}

/// Theorem displays: `(entanglement rate, classical cost, log|E|/n)`.
pub fn merge_theorem_rates(h_tilde: f64, h_cond: f64, dim_b: usize, dim_r: usize, n: usize, delta1: f64, delta2: f64) -> (f64, f64, f64) {
    let (nf, l) = (n as f64, log2(n + 1));
    let (b, r) = (dim_b as f64, dim_r as f64);
    // H_α̃(A|B) = −H_α(A|R) on pure states
    let ent = -h_cond + r * l / nf + delta1;
    let cost = h_tilde - h_cond + ((b + 1.0) * r * l + 2.0) / nf + delta1 + delta2;
    let log_e = h_tilde + b * r * l / nf + delta2;
    (ent, cost, log_e)
}

/// Merge `n` copies of `Ψ^{ABR}` (labels `A`, `B`, `R`) to Bob.
///
/// Alice holds `A₀` of a maximally entangled `A₀B₀` pair, compresses
/// `V·(Ψ⊗ⁿ ⊗ Φ)` with `C_W`, measures `{M_x}` and sends `x`; Bob applies
/// `V_x` to `BⁿB₀`. Target `Φ^{A₁B₁} ⊗ (Ψ^{B̃₂B₂R})⊗ⁿ` on labels
/// `A1`, `B1`, `Bt2[k]`, `B2[k]`, `R[k]`.
pub fn merge_run(psi_abr: &PureState, n: usize, cfg: &MergeConfig, seed: RngSeed, opts: &ProtocolOptions) -> Result<ProtocolResult> {
    opts.check()?;
    require_labels(psi_abr.space(), &["A", "B", "R"])?;
    let cfg = MergeConfig::new(cfg.dim_a0, cfg.dim_a1, cfg.dim_e)?;
    if n == 0 {
        return domain("need at least one copy");
    }
    let sp = psi_abr.space();
    let (da, db, dr) = (sp.dim_of("A")?, sp.dim_of("B")?, sp.dim_of("R")?);
    let d = da.pow(n as u32);
    if cfg.dim_e > d {
        return domain(format!("need |E| <= |A|^n = {d}, got {}", cfg.dim_e));
    }
    if cfg.dim_a0 > cfg.dim_a1 * d {
        return domain(format!("decoder needs |A0| <= |A1||A|^n, got {} > {}", cfg.dim_a0, cfg.dim_a1 * d));
    }
    check_size(sp.total_dim().pow(n as u32) * cfg.dim_a0 * cfg.dim_a0)?;

    let a_lab = copy_labels(&["A"], n);
    let r_lab = copy_labels(&["R"], n);
    let input = psi_abr.tensor_power(n)?.tensor(&mes(cfg.dim_a0, "A0", "B0")?)?;
    let mut alice = a_lab.clone();
    alice.push("A0".into());
    let z = input.as_matrix(&alice)?;
    let rest = input.space().without(&alice)?;
    let da0 = cfg.dim_a0;
    let e_a0 = SubsystemSpace::new(&["E", "A0"], &[cfg.dim_e, da0])?;
    let a1 = SubsystemSpace::single("A1", cfg.dim_a1)?;

    let meas = measurement_map(&e_a0, &a1, "X")?;
    if meas.j != cfg.j {
        return Err(Error::Shape(format!("measurement has {} outcomes, expected {}", meas.j, cfg.j)));
    }
    // ω^{XA₁} = E(π^{EA₀}), block x is M_x M_x† / |E||A₀|
    let norm = (cfg.dim_e * da0) as f64;
    let omega: Vec<CMat> = meas.ops.iter().map(|mx| (mx * mx.adjoint()).scale(1.0 / norm)).collect();
    let pi_xa1 = 1.0 / (cfg.j * cfg.dim_a1) as f64;
    let omega_dist: f64 = omega.iter().map(|w| linalg::trace_norm(&(w - CMat::identity(cfg.dim_a1, cfg.dim_a1).scale(pi_xa1)))).sum();
    let two_over_zeta = 2.0 / cfg.zeta;
    if !(omega_dist < two_over_zeta) {
        return Err(Error::Domain(format!("‖ω − π‖₁ = {omega_dist} is not below 2/ζ = {two_over_zeta}")));
    }

    let ent = source_entropies(&psi_abr.projector(), "A", "R", opts.alpha)?;
    let nf = n as f64;
    let l = log2(n + 1);
    let theta_n = exp_bound(8.0, opts.alpha, dr as f64 * l - nf * ent.h_cond - log2(da0) + log2(cfg.dim_a1));
    let eps_n = exp_bound(8.0, opts.alpha, (db * dr) as f64 * l + nf * ent.h_tilde - log2(cfg.dim_e));

    let s = d as f64 / cfg.dim_e as f64;
    // (W ⊗ 1_{A₀}) keeps the first |E||A₀| rows of the AⁿA₀ index
    let ke = cfg.dim_e * da0;
    let compress = |u: &CMat| -> CMat { (u * &z).rows(0, ke).scale(s.sqrt()) };
    let target_rest = z.transpose();
    let mut keep_ar = vec!["A1".to_string()];
    keep_ar.extend(r_lab.iter().cloned());
    let rho_r = input.reduce_to(&r_lab)?;
    let omega_targets: Vec<LabeledOperator> =
        omega.iter().map(|w| LabeledOperator::new(a1.clone(), w.clone())?.tensor(&rho_r)).collect::<Result<_>>()?;

    let witness = search(d * da0, &[theta_n, eps_n], opts, seed, |u| {
        let y = compress(u);
        let mut e_theta = 0.0;
        for (mx, tgt) in meas.ops.iter().zip(&omega_targets) {
            let part = ket_from_matrix(&a1, &rest, &(mx * &y))?.reduce_to(&keep_ar)?;
            e_theta += part.sub(tgt)?.trace_norm();
        }
        Ok(vec![e_theta, linalg::trace_norm_gram_diff(&y.transpose(), &target_rest)])
    })?;
    let u = &witness.unitary;
    let y = compress(u);

    // Alice's V from the ε condition
    let mut xi = CMat::zeros(d * da0, y.ncols());
    xi.view_mut((0, 0), (ke, y.ncols())).copy_from(&y);
    let v = uhlmann_isometry(&xi.transpose(), &target_rest)?.adjoint();

    // Bob's V_x from ξ_x = √J·M_x·√s(W⊗1)U(Ψ⊗Φ)
    let twin = psi_abr.relabel(|l| match l {
        "A" => "Bt2".into(),
        "B" => "B2".into(),
        other => other.into(),
    })?;
    let target = mes(cfg.dim_a1, "A1", "B1")?.tensor(&twin.tensor_power(n)?)?;
    let jf = (cfg.j as f64).sqrt();
    let decoders: Vec<PartialIsom> = meas
        .ops
        .iter()
        .map(|mx| uhlmann_kets(&ket_from_matrix(&a1, &rest, &(mx * &y).scale(jf))?, &target, &keep_ar))
        .collect::<Result<_>>()?;

    // run it: V, C_W, M_x, V_x
    let alice_space = input.space().subspace(&alice)?;
    let after_v = input.apply_local(&v, &alice, &alice_space)?;
    let an = input.space().subspace(&a_lab)?;
    let w = PartialIsom::truncation(an, SubsystemSpace::single("E", cfg.dim_e)?);
    let compressed = KrausMap::compressive(&w)?.apply_low_rank(&after_v.into_low_rank())?;
    let mut out: Option<LowRank> = None;
    for (mx, vx) in meas.ops.iter().zip(&decoders) {
        let branch = compressed.apply_local(mx, &["E", "A0"], &a1)?.apply_local(vx.mat(), vx.domain().labels(), vx.codomain())?;
        out = Some(match out {
            None => branch,
            Some(acc) => acc.add(&branch)?,
        });
    }
    let out = out.expect("J >= 1");
    let err = out.trace_distance(&target.ket().clone().into_low_rank())?;

    let beta = theta_n + two_over_zeta;
    let mut res = ProtocolResult::new("merge", n, seed, &witness);
    res.measured_error = err;
    res.bound = xi_of(eps_n)? + 2.0 * beta.sqrt() + 2f64.sqrt() * beta.powf(0.75) + beta;
    let (te, tc, tl) = merge_theorem_rates(ent.h_tilde, ent.h_cond, db, dr, n, opts.delta1, opts.delta2);
    res.rates.insert("entanglement_rate".into(), (log2(da0) - log2(cfg.dim_a1)) / nf);
    res.rates.insert("classical_cost".into(), log2(cfg.j) / nf);
    res.rates.insert("log_e_rate".into(), log2(cfg.dim_e) / nf);
    res.rates.insert("theorem_entanglement_rate".into(), te);
    res.rates.insert("theorem_classical_cost".into(), tc);
    res.rates.insert("theorem_log_e_rate".into(), tl);
    res.details.insert("eps_n".into(), eps_n);
    res.details.insert("theta_n".into(), theta_n);
    res.details.insert("beta_n".into(), beta);
    res.details.insert("zeta".into(), cfg.zeta);
    res.details.insert("j".into(), cfg.j as f64);
    res.details.insert("omega_distance".into(), omega_dist);
    res.details.insert("two_over_zeta".into(), two_over_zeta);
    res.details.insert("h_tilde".into(), ent.h_tilde);
    res.details.insert("h_cond".into(), ent.h_cond);
    res.operators.insert("U".into(), u.clone());
    res.operators.insert("V".into(), v);
    for (x, vx) in decoders.iter().enumerate() {
        res.operators.insert(format!("V_{x}"), vx.mat().clone());
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{Ket, PureState};

    fn mes_ar_b0() -> PureState {
        let phi = mes(2, "A", "R").unwrap();
        let b = PureState::from_ket(Ket::basis(SubsystemSpace::single("B", 2).unwrap(), 0).unwrap()).unwrap();
        phi.tensor(&b).unwrap()
    }

    #[test]
    fn config_rules() {
        let c = MergeConfig::new(2, 4, 2).unwrap();
        assert_eq!(c.j, 1);
        assert_eq!(c.zeta, 1.0);
        assert!(MergeConfig::new(1, 4, 2).is_err());
        let c = MergeConfig::new(4, 1, 2).unwrap();
        assert_eq!((c.j, c.zeta), (8, 8.0));
        let c = MergeConfig::new(2, 4, 3).unwrap();
        assert!(c.j as f64 - c.zeta < 1.0 && c.j == 2);
    }

    #[test]
    fn single_outcome_has_exact_omega() {
        let cfg = MergeConfig::new(2, 4, 2).unwrap();
        let r = merge_run(&mes_ar_b0(), 1, &cfg, RngSeed::new(1), &ProtocolOptions::default()).unwrap();
        assert_eq!(r.details["omega_distance"], 0.0);
        assert!(r.measured_error <= r.bound);
    }

    #[test]
    fn trivial_a_costs_nothing() {
        let s = SubsystemSpace::new(&["A", "B", "R"], &[1, 2, 2]).unwrap();
        let mut amp = crate::qmat::CVec::zeros(4);
        amp[0] = linalg::r(0.6);
        amp[3] = linalg::r(0.8);
        let psi = PureState::new(s, amp).unwrap();
        let cfg = MergeConfig::new(1, 1, 1).unwrap();
        let r = merge_run(&psi, 1, &cfg, RngSeed::new(2), &ProtocolOptions::default()).unwrap();
        assert!(r.measured_error <= 1e-6, "{}", r.measured_error);
        assert_eq!(r.rates["classical_cost"], 0.0);
    }

    #[test]
    fn mes_source_within_bound() {
        let cfg = MergeConfig::new(1, 1, 2).unwrap();
        let r = merge_run(&mes_ar_b0(), 1, &cfg, RngSeed::new(3), &ProtocolOptions::default()).unwrap();
        assert!(r.measured_error <= r.bound, "{} > {}", r.measured_error, r.bound);
    }

    #[test]
    fn rejects_undecodable_config() {
        let cfg = MergeConfig::new(4, 1, 2).unwrap();
        assert!(merge_run(&mes_ar_b0(), 1, &cfg, RngSeed::new(3), &ProtocolOptions::default()).is_err());
    }
}
