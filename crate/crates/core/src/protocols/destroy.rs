//! Destroying correlations with a random-unitary channel on `Aⁿ`.

use crate::channels::heisenberg_weyl;
use crate::entropy;
use crate::qmat::{copy_labels, linalg, purify, CMat, DensityOp, LabeledOperator, SubsystemSpace};
use crate::twirl::RngSeed;
use crate::{domain, Result};

use super::{
    check_size, exp_bound, ket_from_matrix, log2, require_labels, search, source_entropies, uhlmann_isometry, xi_of, ProtocolOptions,
    ProtocolResult,
};

/// `H_α̃(A) − H_α(A|R) + (|E|+1)|R| log(n+1)/n + δ`
pub fn destroy_theorem_rate(h_tilde: f64, h_cond: f64, dim_e: usize, dim_r: usize, n: usize, delta: f64) -> f64 {
    h_tilde - h_cond + (dim_e + 1) as f64 * dim_r as f64 * log2(n + 1) / n as f64 + delta
}

/// [`destroy_run_with`] with `|B| = |A|ⁿ`.
pub fn destroy_run(rho_ar: &DensityOp, n: usize, m: usize, seed: RngSeed, opts: &ProtocolOptions) -> Result<ProtocolResult> {
    let da = rho_ar.space().dim_of("A")?;
    destroy_run_with(rho_ar, n, m, da.pow(n as u32), seed, opts)
}

/// Decorrelate `A` from `R` in `ρ^{AR}` (labels `A`, `R`) with `M` unitaries
/// `V_iU₂`, where `V_i` lifts the first `M` Heisenberg–Weyl operators on `B`.
///
/// Measured: `‖(1/M)Σ(V_iU₂)·ρ⊗ⁿ − (W†·π^B) ⊗ (ρ^R)⊗ⁿ‖₁` against `Ξ(ε_n) + ϑ_n`.
pub fn destroy_run_with(
    rho_ar: &DensityOp,
    n: usize,
    m: usize,
    dim_b: usize,
    seed: RngSeed,
    opts: &ProtocolOptions,
) -> Result<ProtocolResult> {
    opts.check()?;
    require_labels(rho_ar.space(), &["A", "R"])?;
    if n == 0 {
        return domain("need at least one copy");
    }
    let (da, dr) = (rho_ar.space().dim_of("A")?, rho_ar.space().dim_of("R")?);
    let d = da.pow(n as u32);
    if dim_b == 0 || dim_b > d {
        return domain(format!("dim_B must be in 1..={d}, got {dim_b}"));
    }
    if m == 0 || m > dim_b * dim_b {
        return domain(format!("M must be in 1..=|B|^2 = {}, got {m}", dim_b * dim_b));
    }
    let psi = purify(rho_ar, "E")?;
    let de = psi.space().dim_of("E")?;
    check_size((da * dr * de).pow(n as u32))?;

    let psi_n = psi.tensor_power(n)?;
    let a_lab = copy_labels(&["A"], n);
    let r_lab = copy_labels(&["R"], n);
    let z = psi_n.as_matrix(&a_lab)?;
    let rest = psi_n.space().without(&a_lab)?;
    let b = SubsystemSpace::single("B", dim_b)?;
    let mut keep_br = vec!["B".to_string()];
    keep_br.extend(r_lab.iter().cloned());

    let ent = source_entropies(rho_ar, "A", "R", opts.alpha)?;
    let nf = n as f64;
    let l = log2(n + 1);
    let eps_n = exp_bound(8.0, opts.alpha, (dr * de) as f64 * l + nf * ent.h_tilde - log2(dim_b));
    let theta_n = exp_bound(8.0, opts.alpha, dr as f64 * l - nf * ent.h_cond - log2(m) + log2(dim_b));

    let family: Vec<CMat> = heisenberg_weyl(dim_b).into_iter().take(m).collect();
    let rho_r = psi_n.reduce_to(&r_lab)?;
    let pi_b = LabeledOperator::identity(b.clone()).scale(1.0 / dim_b as f64);
    let target_b = pi_b.tensor(&rho_r)?;
    let s = d as f64 / dim_b as f64;
    let compress = |u: &CMat| -> CMat { (u * &z).rows(0, dim_b).scale(s.sqrt()) };
    let target_rest = z.transpose();
    let mixed = |op: &LabeledOperator, on: &[&str], vs: &[CMat]| -> Result<LabeledOperator> {
        let out = op.space().subspace(on)?;
        let mut acc: Option<LabeledOperator> = None;
        for v in vs {
            let t = op.conjugate_local(v, on, &out)?;
            acc = Some(match acc {
                Some(a) => a.add(&t)?,
                None => t,
            });
        }
        let acc = acc.expect("nonempty family");
        Ok(acc.scale(1.0 / vs.len() as f64))
    };

    let witness = search(d, &[eps_n, theta_n], opts, seed, |u| {
        let y = compress(u);
        let e1 = linalg::trace_norm_gram_diff(&y.transpose(), &target_rest);
        let sigma = ket_from_matrix(&b, &rest, &y)?.reduce_to(&keep_br)?;
        let e2 = mixed(&sigma, &["B"], &family)?.sub(&target_b)?.trace_norm();
        Ok(vec![e1, e2])
    })?;
    let u = &witness.unitary;

    // U₂·Ψ ≈ W†·T_W[U·Ψ]
    let y = compress(u);
    let mut xi = CMat::zeros(d, y.ncols());
    xi.view_mut((0, 0), (dim_b, y.ncols())).copy_from(&y);
    let u2 = uhlmann_isometry(&xi.transpose(), &target_rest)?.adjoint();

    // V_i^{Aⁿ} = W†V_iW + (1 − W†W)
    let lifted: Vec<CMat> = family
        .iter()
        .map(|v| {
            let mut big = CMat::identity(d, d);
            big.view_mut((0, 0), (dim_b, dim_b)).copy_from(v);
            big * &u2
        })
        .collect();
    let mut keep_ar = a_lab.clone();
    keep_ar.extend(r_lab.iter().cloned());
    let rho_n = psi_n.reduce_to(&keep_ar)?;
    let a_refs: Vec<&str> = a_lab.iter().map(String::as_str).collect();
    let out = mixed(&rho_n, &a_refs, &lifted)?;
    let w_pi = LabeledOperator::diag(
        rho_n.space().subspace(&a_lab)?,
        &(0..d).map(|i| if i < dim_b { 1.0 / dim_b as f64 } else { 0.0 }).collect::<Vec<_>>(),
    )?;
    let err = out.sub(&w_pi.tensor(&rho_r)?)?.trace_norm();

    let mut res = ProtocolResult::new("destroy", n, seed, &witness);
    res.measured_error = err;
    res.bound = xi_of(eps_n)? + theta_n;
    res.rates.insert("randomness_rate".into(), log2(m) / nf);
    res.rates.insert("theorem_rate".into(), destroy_theorem_rate(ent.h_tilde, ent.h_cond, de, dr, n, opts.delta1));
    let vn = entropy::von_neumann(rho_ar.reduce_to(&["A"])?.op()) + entropy::von_neumann(rho_ar.reduce_to(&["R"])?.op())
        - entropy::von_neumann(rho_ar.op());
    res.rates.insert("mutual_information".into(), vn);
    res.details.insert("eps_n".into(), eps_n);
    res.details.insert("theta_n".into(), theta_n);
    res.details.insert("h_tilde".into(), ent.h_tilde);
    res.details.insert("h_cond".into(), ent.h_cond);
    res.details.insert("m".into(), m as f64);
    res.details.insert("dim_b".into(), dim_b as f64);
    res.details.insert("dim_e".into(), de as f64);
    res.operators.insert("U".into(), u.clone());
    res.operators.insert("U2".into(), u2);
    Ok(res)
}

/// One run per `M`, sharing the seed so the witness candidates coincide.
pub fn destroy_sweep(rho_ar: &DensityOp, n: usize, ms: &[usize], seed: RngSeed, opts: &ProtocolOptions) -> Result<Vec<ProtocolResult>> {
    ms.iter().map(|&m| destroy_run(rho_ar, n, m, seed, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::maximally_mixed;
    use crate::twirl::random_density;

    fn classical_pair() -> DensityOp {
        let s = SubsystemSpace::new(&["A", "R"], &[2, 2]).unwrap();
        DensityOp::diag(s, &[0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn decoupled_input_needs_one_unitary() {
        let r_state = random_density(&SubsystemSpace::single("R", 2).unwrap(), 2, RngSeed::new(1)).unwrap();
        let rho = maximally_mixed(2, "A").unwrap().tensor(&r_state).unwrap();
        let r = destroy_run(&rho, 1, 1, RngSeed::new(2), &ProtocolOptions::default()).unwrap();
        assert!(r.measured_error < 1e-9);
    }

    #[test]
    fn full_pauli_twirl_destroys_classical_correlation() {
        let r = destroy_run(&classical_pair(), 1, 4, RngSeed::new(3), &ProtocolOptions::default()).unwrap();
        assert!(r.measured_error <= 1e-9);
        assert!((r.rates["mutual_information"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_sweep_is_non_increasing() {
        let res = destroy_sweep(&classical_pair(), 2, &[1, 2, 4, 8, 16], RngSeed::new(4), &ProtocolOptions::default()).unwrap();
        for w in res.windows(2) {
            assert!(w[1].measured_error <= w[0].measured_error + 1e-12, "{} then {}", w[0].measured_error, w[1].measured_error);
        }
        assert!(res[4].measured_error < 1e-9);
        for r in &res {
            assert!(r.measured_error <= r.bound);
        }
    }

    #[test]
    fn rejects_oversized_family() {
        assert!(destroy_run(&classical_pair(), 1, 5, RngSeed::new(0), &ProtocolOptions::default()).is_err());
    }

    #[test]
    fn theorem_rate_expression() {
        let rate = destroy_theorem_rate(0.8, 0.1, 2, 2, 4, 0.1);
        assert!((rate - (0.7 + 6.0 * 5f64.log2() / 4.0 + 0.1)).abs() < 1e-12);
    }
}
