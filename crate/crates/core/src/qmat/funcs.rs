use super::linalg::{self, CVec};
#[cfg(test)]
use super::linalg::CMat;
use super::operator::LabeledOperator;
use super::space::SubsystemSpace;
use super::states::{DensityOp, PureState, TraceClass, TRACE_TOL};
use crate::{domain, Error, Result};

pub const DEFAULT_NU_TOL: f64 = 1e-8;

/// `‖√ρ √σ‖₁`; subnormalized inputs allowed.
pub fn fidelity(rho: &LabeledOperator, sigma: &LabeledOperator) -> Result<f64> {
    let s = sigma.aligned_to(rho.space())?;
    let a = linalg::psd_sqrt(rho.mat());
    let b = linalg::psd_sqrt(s.mat());
    Ok((a * b).singular_values().iter().sum())
}

/// PSD power on the support; negative powers give the support inverse.
pub fn mat_power(m: &LabeledOperator, p: f64) -> Result<LabeledOperator> {
    if !m.is_hermitian() {
        return Err(Error::NotHermitian(linalg::asymmetry(m.mat())));
    }
    Ok(LabeledOperator::with_hint(m.space().clone(), linalg::psd_pow(m.mat(), p), Some(true)))
}

/// `{ρ ≥ σ}`: projector onto the non-negative eigenspace of `ρ − σ`.
pub fn positive_part_projector(rho: &LabeledOperator, sigma: &LabeledOperator) -> Result<LabeledOperator> {
    let d = rho.sub(sigma)?;
    let scale = 1.0 + d.mat().norm();
    let (vals, vecs) = linalg::eigh(d.mat());
    let p = linalg::from_spectrum(&vals, &vecs, |l| if l >= -1e-12 * scale { 1.0 } else { 0.0 });
    Ok(LabeledOperator::with_hint(rho.space().clone(), p, Some(true)))
}

/// Group sorted eigenvalues into clusters of (numerically) equal values.
fn clusters(vals: &[f64], rel_tol: f64) -> Vec<std::ops::Range<usize>> {
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > rel_tol * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Number of distinct eigenvalues (zero counts when present).
pub fn distinct_eigs(sigma: &LabeledOperator, rel_tol: f64) -> usize {
    clusters(&sigma.eigvalsh(), rel_tol).len()
}

/// Pinching of `rho` in the eigenbasis of `sigma`.
pub fn pinch(sigma: &LabeledOperator, rho: &LabeledOperator) -> Result<LabeledOperator> {
    let r = rho.aligned_to(sigma.space())?;
    let (vals, vecs) = linalg::eigh(sigma.mat());
    let mut inner = vecs.adjoint() * r.mat() * &vecs;
    let groups = clusters(&vals, DEFAULT_NU_TOL);
    let mut label = vec![0usize; vals.len()];
    for (g, range) in groups.iter().enumerate() {
        for i in range.clone() {
            label[i] = g;
        }
    }
    for j in 0..vals.len() {
        for i in 0..vals.len() {
            if label[i] != label[j] {
                inner[(i, j)] = linalg::r(0.0);
            }
        }
    }
    let out = &vecs * inner * vecs.adjoint();
    Ok(LabeledOperator::with_hint(sigma.space().clone(), out, r.hermitian_hint()))
}

/// Purification `Σ √λᵢ |vᵢ⟩|i⟩` with the reference sized to the rank.
pub fn purify(rho: &DensityOp, ref_label: &str) -> Result<PureState> {
    let tr = rho.trace().re;
    if rho.trace_class() != TraceClass::Unit || (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::BadTrace(tr));
    }
    let (vals, vecs) = linalg::eigh(rho.mat());
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > linalg::EIG_FLOOR).collect();
    let rank = keep.len().max(1);
    let space = rho.space().join(&SubsystemSpace::single(ref_label, rank)?)?;
    let n = rho.dim();
    let mut amp = CVec::zeros(n * rank);
    for (k, &i) in keep.iter().enumerate() {
        let s = vals[i].sqrt();
        for a in 0..n {
            amp[a * rank + k] = vecs[(a, i)] * s;
        }
    }
    let norm = amp.norm();
    PureState::new(space, amp.unscale(norm))
}

/// `d^{-1/2} Σ|i⟩|i⟩` on labels `a`, `b`.
pub fn mes(d: usize, a: &str, b: &str) -> Result<PureState> {
    if d == 0 {
        return domain("maximally entangled state needs d >= 1");
    }
    let space = SubsystemSpace::new(&[a, b], &[d, d])?;
    let mut amp = CVec::zeros(d * d);
    let v = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amp[i * d + i] = linalg::r(v);
    }
    PureState::new(space, amp)
}

pub fn maximally_mixed(d: usize, label: &str) -> Result<DensityOp> {
    if d == 0 {
        return domain("maximally mixed state needs d >= 1");
    }
    DensityOp::diag(SubsystemSpace::single(label, d)?, &vec![1.0 / d as f64; d])
}

/// `Ξ(ε) = √(ε(2 + ε + 2√(1+ε)))`
pub fn xi(eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return domain(format!("xi needs eps >= 0, got {eps}"));
    }
    Ok((eps * (2.0 + eps + 2.0 * (1.0 + eps).sqrt())).sqrt())
}

/// `|A| Tr_A(σσ†) − σ^B σ^B†` where `A` is `traced` and `B` is the rest.
pub fn q_map<S: AsRef<str>>(sigma: &LabeledOperator, traced: &[S]) -> Result<LabeledOperator> {
    let da = sigma.space().dim_of_all(traced)? as f64;
    let sq = LabeledOperator::new(sigma.space().clone(), sigma.mat() * sigma.mat().adjoint())?;
    let first = sq.partial_trace(traced)?.scale(da);
    let sb = sigma.partial_trace(traced)?;
    let second = LabeledOperator::new(sb.space().clone(), sb.mat() * sb.mat().adjoint())?;
    first.sub(&second)
}

/// Convenience: trace distance between two operators on the same labels.
pub fn trace_distance(a: &LabeledOperator, b: &LabeledOperator) -> Result<f64> {
    Ok(a.sub(b)?.trace_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(label: &str, d: usize) -> SubsystemSpace {
        SubsystemSpace::single(label, d).unwrap()
    }

    fn diag(d: &[f64]) -> LabeledOperator {
        LabeledOperator::diag(one("A", d.len()), d).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let rho = diag(&[0.3, 0.7]);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap().abs() < 1e-12);
        for p in [0.1f64, 0.5] {
            let want = (p.sqrt() + (1.0 - p).sqrt()) / 2f64.sqrt();
            assert!((fidelity(&diag(&[0.5, 0.5]), &diag(&[p, 1.0 - p])).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mat_power_examples() {
        let m = mat_power(&diag(&[4.0, 1.0]), 0.5).unwrap();
        assert!(m.max_abs_diff(&diag(&[2.0, 1.0])).unwrap() < 1e-14);
        let inv = mat_power(&diag(&[0.5, 0.0]), -1.0).unwrap();
        assert!(inv.max_abs_diff(&diag(&[2.0, 0.0])).unwrap() < 1e-14);
        let id = mat_power(&diag(&[1.0, 1.0, 1.0]), 0.37).unwrap();
        assert!(id.max_abs_diff(&diag(&[1.0, 1.0, 1.0])).unwrap() < 1e-14);
    }

    #[test]
    fn positive_part_examples() {
        let r = diag(&[0.7, 0.3]);
        let p = positive_part_projector(&r, &r).unwrap();
        assert!(p.max_abs_diff(&diag(&[1.0, 1.0])).unwrap() < 1e-14);
        let p = positive_part_projector(&r, &diag(&[0.5, 0.5])).unwrap();
        assert!(p.max_abs_diff(&diag(&[1.0, 0.0])).unwrap() < 1e-14);
        let p = positive_part_projector(&diag(&[0.0, 0.0]), &diag(&[0.2, 0.8])).unwrap();
        assert!(p.max_abs_diff(&diag(&[0.0, 0.0])).unwrap() < 1e-14);
    }

    #[test]
    fn pinch_examples() {
        let z = diag(&[1.0, -1.0]);
        let x = LabeledOperator::new(
            one("A", 2),
            CMat::from_row_slice(2, 2, &[linalg::r(0.0), linalg::r(1.0), linalg::r(1.0), linalg::r(0.0)]),
        )
        .unwrap();
        assert!(pinch(&z, &x).unwrap().mat().norm() < 1e-14);
        assert!(pinch(&diag(&[1.0, 1.0]), &x).unwrap().max_abs_diff(&x).unwrap() < 1e-14);
    }

    #[test]
    fn distinct_eig_examples() {
        assert_eq!(distinct_eigs(&diag(&[0.25; 4]), DEFAULT_NU_TOL), 1);
        assert_eq!(distinct_eigs(&diag(&[0.6, 0.3, 0.1]), DEFAULT_NU_TOL), 3);
        assert_eq!(distinct_eigs(&diag(&[0.5, 0.5 + 1e-12]), DEFAULT_NU_TOL), 1);
    }

    #[test]
    fn purify_and_mes() {
        let rho = DensityOp::diag(one("A", 2), &[0.9, 0.1]).unwrap();
        let psi = purify(&rho, "R").unwrap();
        let back = psi.reduce_to(&["A"]).unwrap();
        assert!(back.max_abs_diff(&rho).unwrap() < 1e-12);
        let pure = DensityOp::diag(one("A", 2), &[1.0, 0.0]).unwrap();
        assert_eq!(purify(&pure, "R").unwrap().space().dim_of("R").unwrap(), 1);

        let phi = mes(3, "A", "B").unwrap();
        let pi = maximally_mixed(3, "A").unwrap();
        assert!(phi.reduce_to(&["A"]).unwrap().max_abs_diff(&pi).unwrap() < 1e-14);
        assert_eq!(mes(1, "A", "B").unwrap().amp().len(), 1);
        assert!(mes(0, "A", "B").is_err());
    }

    #[test]
    fn xi_values() {
        assert_eq!(xi(0.0).unwrap(), 0.0);
        assert!((xi(3.0).unwrap() - 27f64.sqrt()).abs() < 1e-14);
        for e in [0.01, 0.1, 1.0] {
            assert!(xi(e).unwrap() <= 2.0 * e.sqrt() + 2f64.sqrt() * e.powf(0.75) + e + 1e-15);
        }
        assert!(xi(-1.0).is_err());
    }

    #[test]
    fn q_map_examples() {
        let pi = maximally_mixed(2, "A").unwrap();
        let tau = DensityOp::diag(one("B", 2), &[0.3, 0.7]).unwrap();
        let q = q_map(&pi.tensor(&tau).unwrap(), &["A"]).unwrap();
        assert!(q.mat().norm() < 1e-14);
        // MES: 2·Tr_A Φ − π² = I − I/4
        let phi = mes(2, "A", "B").unwrap().projector();
        let q = q_map(&phi, &["A"]).unwrap();
        let want = LabeledOperator::diag(one("B", 2), &[0.75, 0.75]).unwrap();
        assert!(q.max_abs_diff(&want).unwrap() < 1e-14);
    }
}
