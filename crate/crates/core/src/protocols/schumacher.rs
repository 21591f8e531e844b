//! Schumacher compression through decoupling.

use crate::qmat::{copy_labels, linalg, CMat, PureState};
use crate::twirl::RngSeed;
use crate::{domain, Result};

use super::{check_size, exp_bound, log2, require_labels, search, source_entropies, uhlmann_isometry, xi_of, ProtocolOptions, ProtocolResult};

/// `|R| log(n+1)/n + H_α̃(A) + δ`
pub fn schumacher_theorem_rate(h_tilde: f64, dim_r: usize, n: usize, delta: f64) -> f64 {
    dim_r as f64 * log2(n + 1) / n as f64 + h_tilde + delta
}

/// `min(⌈2^{n·rate}⌉, |A|ⁿ)`: the code dimension for a target rate.
pub fn schumacher_dim_for_rate(rate: f64, n: usize, dim_a: usize) -> usize {
    let d = dim_a.pow(n as u32);
    let want = (n as f64 * rate).exp2();
    if !want.is_finite() || want >= d as f64 {
        return d;
    }
    // absorb rounding in 2^{n·rate} when it lands on an integer
    ((want * (1.0 - 1e-12)).ceil() as usize).clamp(1, d)
}

/// Compress `n` copies of `Ψ^{AR}` (labels `A`, `R`) into `dim_b` dimensions.
///
/// Alice applies `C_{W₂}` with `W₂ = WV`, Bob applies `W₂†`. The reported
/// error is `‖W₂†·C_{W₂}(Ψ⊗ⁿ) − Ψ⊗ⁿ‖₁`, the bound `2Ξ(ε_n)`.
pub fn schumacher_run(psi_ar: &PureState, n: usize, dim_b: usize, seed: RngSeed, opts: &ProtocolOptions) -> Result<ProtocolResult> {
    opts.check()?;
    require_labels(psi_ar.space(), &["A", "R"])?;
    if n == 0 {
        return domain("need at least one copy");
    }
    let da = psi_ar.space().dim_of("A")?;
    let dr = psi_ar.space().dim_of("R")?;
    let d = da.pow(n as u32);
    check_size(d * dr.pow(n as u32))?;
    if dim_b == 0 || dim_b > d {
        return domain(format!("dim_B must be in 1..={d}, got {dim_b}"));
    }

    let psi_n = psi_ar.tensor_power(n)?;
    let psi = psi_n.as_matrix(&copy_labels(&["A"], n))?;
    let ent = source_entropies(&psi_ar.projector(), "A", "R", opts.alpha)?;
    let nf = n as f64;
    let eps_n = exp_bound(4.0, opts.alpha, dr as f64 * log2(n + 1) + nf * ent.h_tilde - log2(dim_b));
    let s = d as f64 / dim_b as f64;
    let target = psi.transpose();

    let witness = search(d, &[eps_n], opts, seed, |u| {
        let kept = (u * &psi).rows(0, dim_b).scale(s.sqrt());
        Ok(vec![linalg::trace_norm_gram_diff(&kept.transpose(), &target)])
    })?;

    let xi = padded(&(&witness.unitary * &psi).rows(0, dim_b).scale(s.sqrt()), d);
    let v0 = uhlmann_isometry(&xi.transpose(), &target)?;
    let q2 = v0.columns(0, dim_b).into_owned();
    let err = schumacher_error(&psi, &q2)?;

    let mut res = ProtocolResult::new("schumacher", n, seed, &witness);
    res.measured_error = err;
    res.bound = 2.0 * xi_of(eps_n)?;
    res.rates.insert("compression_rate".into(), log2(dim_b) / nf);
    res.rates.insert("theorem_rate".into(), schumacher_theorem_rate(ent.h_tilde, dr, n, opts.delta1));
    res.details.insert("eps_n".into(), eps_n);
    res.details.insert("h_tilde".into(), ent.h_tilde);
    res.details.insert("alpha_tilde".into(), ent.alpha_tilde);
    res.details.insert("dim_b".into(), dim_b as f64);
    res.operators.insert("U".into(), witness.unitary.clone());
    res.operators.insert("W2".into(), q2.adjoint());
    Ok(res)
}

fn padded(rows: &CMat, d: usize) -> CMat {
    let mut out = CMat::zeros(d, rows.ncols());
    out.view_mut((0, 0), (rows.nrows(), rows.ncols())).copy_from(rows);
    out
}

/// `ψ` split against the code space `P₂ = Q₂Q₂†`:
/// `a = P₂ψ`, `K = Tr_A[(1−P₂)Ψ(1−P₂)]`, `t² = Tr K`.
struct Split {
    a_norm: f64,
    t2: f64,
    k: CMat,
}

fn split(psi: &CMat, q2: &CMat) -> Split {
    let a = q2 * (q2.adjoint() * psi);
    let m = psi - &a;
    Split { a_norm: a.norm(), t2: m.norm_squared(), k: m.transpose() * m.map(|z| z.conj()) }
}

/// Exact `‖W₂†·C_{W₂}(Ψ) − Ψ‖₁` without forming the `|A|ⁿ|R|ⁿ` operator.
///
/// The difference is `N − t(a m̂† + m̂ a†) − t² m̂m̂†` with `N = (P₂/|B|) ⊗ K ≥ 0`,
/// so it has one negative eigenvalue `λ`, the root in `(−∞, 0)` of
/// `λ + t² + t² Σ |c_k|²/(d_k − λ)`; being traceless its norm is `2|λ|`.
fn schumacher_error(psi: &CMat, q2: &CMat) -> Result<f64> {
    let dim_b = q2.ncols() as f64;
    let sp = split(psi, q2);
    if sp.t2 <= 1e-300 {
        return Ok(0.0);
    }
    let (kv, kvec) = linalg::eigh(&sp.k);
    let c = q2.adjoint() * psi * kvec.map(|z| z.conj());
    let weights: Vec<f64> = (0..c.ncols()).map(|i| c.column(i).norm_squared()).collect();
    let dk: Vec<f64> = kv.iter().map(|&l| l.max(0.0) / dim_b).collect();
    let h = |l: f64| l + sp.t2 + sp.t2 * weights.iter().zip(&dk).map(|(w, d)| w / (d - l)).sum::<f64>();
    let mut lo = -(sp.t2 + sp.t2.sqrt() * sp.a_norm) - 1e-300;
    while h(lo) > 0.0 {
        lo *= 2.0;
    }
    let mut hi = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid >= hi || mid <= lo {
            break;
        }
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(-(lo + hi))
}

/// Dense evaluation of the same error; for cross-checks at small sizes.
pub fn schumacher_error_dense(psi: &CMat, q2: &CMat) -> f64 {
    let dim_b = q2.ncols() as f64;
    let sp = split(psi, q2);
    let vec = |m: &CMat| CMat::from_fn(m.len(), 1, |k, _| m[(k / m.ncols(), k % m.ncols())]);
    let a = vec(&(q2 * (q2.adjoint() * psi)));
    let v = vec(psi);
    let p2 = q2 * q2.adjoint();
    let x = &a * a.adjoint() + linalg::kron(&p2, &sp.k).scale(1.0 / dim_b) - &v * v.adjoint();
    linalg::trace_norm(&x)
}
