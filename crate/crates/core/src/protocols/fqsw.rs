//! Fully quantum Slepian–Wolf: Alice splits `Aⁿ` into `A₁A₂`, sends `A₂`.

use crate::channels::KrausMap;
use crate::qmat::{copy_labels, linalg, mes, CMat, LowRank, PartialIsom, PureState, SubsystemSpace};
use crate::twirl::RngSeed;
use crate::{domain, Result};

use super::{
    check_size, exp_bound, ket_from_matrix, log2, require_labels, search, source_entropies, uhlmann_isometry, uhlmann_kets, xi_of,
    ProtocolOptions, ProtocolResult,
};

/// Theorem rates `(log|A₂|/n, log|A₁|/n)`.
pub fn fqsw_theorem_rates(h_tilde: f64, h_cond: f64, dim_b: usize, dim_r: usize, n: usize, delta1: f64, delta2: f64) -> (f64, f64) {
    let (nf, l) = (n as f64, log2(n + 1));
    let q = 0.5 * (h_tilde - h_cond) + (dim_b + 1) as f64 * dim_r as f64 * l / (2.0 * nf) + (delta1 + delta2) / 2.0;
    let e = q + h_cond - dim_r as f64 * l / nf - delta2;
    (q, e)
}

/// `n` copies of `Ψ^{ABR}` (labels `A`, `B`, `R`); `W: Aⁿ → A₁A₂` truncates.
///
/// Output labels on Bob's side are `B1`, `Bt3[k]`, `B3[k]` with target
/// `Φ^{A₁B₁} ⊗ (Ψ^{B̃₃B₃R})⊗ⁿ`.
pub fn fqsw_run(
    psi_abr: &PureState,
    n: usize,
    dim_a1: usize,
    dim_a2: usize,
    seed: RngSeed,
    opts: &ProtocolOptions,
) -> Result<ProtocolResult> {
    opts.check()?;
    require_labels(psi_abr.space(), &["A", "B", "R"])?;
    if n == 0 {
        return domain("need at least one copy");
    }
    let sp = psi_abr.space();
    let (da, db, dr) = (sp.dim_of("A")?, sp.dim_of("B")?, sp.dim_of("R")?);
    let d = da.pow(n as u32);
    check_size(sp.total_dim().pow(n as u32))?;
    let d12 = dim_a1 * dim_a2;
    if dim_a1 == 0 || dim_a2 == 0 || d12 > d {
        return domain(format!("need 1 <= |A1||A2| <= {d}, got {dim_a1}x{dim_a2}"));
    }

    let psi_n = psi_abr.tensor_power(n)?;
    let a_lab = copy_labels(&["A"], n);
    let r_lab = copy_labels(&["R"], n);
    let m = psi_n.as_matrix(&a_lab)?;
    let rest = psi_n.space().without(&a_lab)?;
    let a12 = SubsystemSpace::new(&["A1", "A2"], &[dim_a1, dim_a2])?;
    let a1 = SubsystemSpace::single("A1", dim_a1)?;

    let ent = source_entropies(&psi_abr.projector(), "A", "R", opts.alpha)?;
    let nf = n as f64;
    let l = log2(n + 1);
    let eps_n = exp_bound(8.0, opts.alpha, (db * dr) as f64 * l + nf * ent.h_tilde - log2(d12));
    let theta_n = exp_bound(8.0, opts.alpha, dr as f64 * l - nf * ent.h_cond + log2(dim_a1) - log2(dim_a2));

    let s = d as f64 / d12 as f64;
    let target_br = m.transpose();
    let mut keep_ar = vec!["A1".to_string()];
    keep_ar.extend(r_lab.iter().cloned());
    let pi_r = {
        let pi = LowRank::new(a1.clone(), CMat::identity(dim_a1, dim_a1).scale(1.0 / (dim_a1 as f64).sqrt()))?;
        pi.tensor(&psi_n.ket().clone().into_low_rank().reduce_to(&r_lab)?)?
    };
    let compressed = |u: &CMat| -> CMat { (u * &m).rows(0, d12).scale(s.sqrt()) };

    let witness = search(d, &[eps_n, theta_n], opts, seed, |u| {
        let y = compressed(u);
        let e1 = linalg::trace_norm_gram_diff(&y.transpose(), &target_br);
        let k = ket_from_matrix(&a12, &rest, &y)?.into_low_rank().reduce_to(&keep_ar)?;
        let e2 = k.trace_distance(&pi_r)?;
        Ok(vec![e1, e2])
    })?;
    let u = &witness.unitary;

    // Alice: V from the ε condition, V·Ψ ≈ W†·T_W[U·Ψ]
    let y = compressed(u);
    let mut xi = CMat::zeros(d, y.ncols());
    xi.view_mut((0, 0), (d12, y.ncols())).copy_from(&y);
    let v = uhlmann_isometry(&xi.transpose(), &target_br)?.adjoint();

    // Bob: Ũ from the ϑ condition
    let xi_ket = ket_from_matrix(&a12, &rest, &y)?;
    let twin = psi_abr.relabel(|l| match l {
        "A" => "Bt3".into(),
        "B" => "B3".into(),
        other => other.into(),
    })?;
    let target = mes(dim_a1, "A1", "B1")?.tensor(&twin.tensor_power(n)?)?;
    let u_bob = uhlmann_kets(&xi_ket, &target, &keep_ar)?;

    let an = psi_n.space().subspace(&a_lab)?;
    let after_v = psi_n.apply_local(&v, &a_lab, &an)?;
    let w = PartialIsom::truncation(an, a12.clone());
    let sent = KrausMap::compressive(&w)?.apply_low_rank(&after_v.into_low_rank())?;
    let out = sent.apply_local(u_bob.mat(), u_bob.domain().labels(), u_bob.codomain())?;
    let err = out.trace_distance(&target.ket().clone().into_low_rank())?;

    let mut res = ProtocolResult::new("fqsw", n, seed, &witness);
    res.measured_error = err;
    res.bound = xi_of(eps_n)? + xi_of(theta_n)?;
    let (tq, te) = fqsw_theorem_rates(ent.h_tilde, ent.h_cond, db, dr, n, opts.delta1, opts.delta2);
    res.rates.insert("quantum_communication".into(), log2(dim_a2) / nf);
    res.rates.insert("entanglement_gain".into(), log2(dim_a1) / nf);
    res.rates.insert("theorem_quantum_communication".into(), tq);
    res.rates.insert("theorem_entanglement_gain".into(), te);
    res.details.insert("eps_n".into(), eps_n);
    res.details.insert("theta_n".into(), theta_n);
    res.details.insert("h_tilde".into(), ent.h_tilde);
    res.details.insert("h_cond".into(), ent.h_cond);
    res.operators.insert("U".into(), u.clone());
    res.operators.insert("V".into(), v);
    res.operators.insert("U_bob".into(), u_bob.mat().clone());
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{CVec, Ket};
    use crate::twirl::random_pure;

    fn abr() -> SubsystemSpace {
        SubsystemSpace::new(&["A", "B", "R"], &[2, 2, 2]).unwrap()
    }

    fn ghz() -> PureState {
        let mut amp = CVec::zeros(8);
        amp[0] = linalg::r(0.5f64.sqrt());
        amp[7] = linalg::r(0.5f64.sqrt());
        PureState::new(abr(), amp).unwrap()
    }

    #[test]
    fn product_state_needs_nothing_sent() {
        let psi = PureState::from_ket(Ket::basis(abr(), 0).unwrap()).unwrap();
        let r = fqsw_run(&psi, 1, 1, 1, RngSeed::new(1), &ProtocolOptions::default()).unwrap();
        assert!(r.measured_error < 1e-9);
    }

    #[test]
    fn ghz_pair_within_bound() {
        let r = fqsw_run(&ghz(), 2, 1, 2, RngSeed::new(2), &ProtocolOptions::default()).unwrap();
        assert!(r.measured_error <= r.bound, "{} > {}", r.measured_error, r.bound);
    }

    #[test]
    fn sending_everything_is_exact() {
        // |A1| = 1, |A2| = |A|^n: Bob receives the whole of Aⁿ
        let psi = random_pure(&abr(), RngSeed::new(9)).unwrap();
        let r = fqsw_run(&psi, 2, 1, 4, RngSeed::new(3), &ProtocolOptions::default()).unwrap();
        // pure-state distance is a square root of a cancellation
        assert!(r.measured_error < 1e-6, "{}", r.measured_error);
    }

    #[test]
    fn rate_displays() {
        let o = ProtocolOptions::default();
        let (q, e) = fqsw_theorem_rates(0.7, -0.2, 2, 2, 3, o.delta1, o.delta2);
        let l = 4f64.log2();
        assert!((q - (0.45 + 6.0 * l / 6.0 + 0.1)).abs() < 1e-12);
        assert!((e - (q - 0.2 - 2.0 * l / 3.0 - 0.1)).abs() < 1e-12);
    }
}
