//! Rényi divergences (Petz and sandwiched), conditional entropies and the
//! von Neumann quantities. Everything is in bits.

use serde::{Deserialize, Serialize};

use crate::channels::{KrausMap, TpClass};
use crate::qmat::{linalg, CMat, DensityOp, LabeledOperator};
use crate::{domain, Error, Result};

/// Support leakage above this counts as a violation.
const SUPPORT_TOL: f64 = 1e-10;
const FP_MAX_ITERS: usize = 500;
const FP_TOL: f64 = 1e-10;
const MD_MAX_ITERS: usize = 2000;
/// Stationarity residual accepted as converged.
const STATIONARY_TOL: f64 = 1e-7;
/// Looser residual for the descent fallback: the objective is flat near the
/// optimum, so a 1e-5 residual already pins the value to ~1e-10.
const MD_STATIONARY_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceType {
    Old,
    Sandwiched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrow {
    /// `−inf_σ D(ρ^{AB} ‖ 1 ⊗ σ^B)`
    Optimized,
    /// `−D(ρ^{AB} ‖ 1 ⊗ ρ^B)`
    FixedMarginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenyiParams {
    pub alpha: f64,
    pub dtype: DivergenceType,
    pub arrow: Arrow,
}

impl RenyiParams {
    pub fn new(alpha: f64, dtype: DivergenceType, arrow: Arrow) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return domain(format!("α = {alpha} outside (0, 2]"));
        }
        Ok(Self { alpha, dtype, arrow })
    }

    pub fn old(alpha: f64) -> Result<Self> {
        Self::new(alpha, DivergenceType::Old, Arrow::Optimized)
    }

    pub fn sandwiched(alpha: f64) -> Result<Self> {
        Self::new(alpha, DivergenceType::Sandwiched, Arrow::Optimized)
    }

    pub fn with_arrow(self, arrow: Arrow) -> Self {
        Self { arrow, ..self }
    }

    pub fn is_von_neumann(&self) -> bool {
        self.alpha == 1.0
    }

    /// Parameters `p′` with `H_p(A|B) + H_{p′}(A|C) = 0` on pure `ψ^{ABC}`.
    ///
    /// Sandwiched/optimized pairs with itself at `α/(2α−1)`, Petz/fixed with
    /// itself at `2−α`, and the two mixed cases swap type and arrow at `1/α`.
    /// The partner order may leave `(0, 2]`, so it is not range-checked.
    pub fn dual(&self) -> RenyiParams {
        let a = self.alpha;
        use {Arrow::*, DivergenceType::*};
        let (alpha, dtype, arrow) = match (self.dtype, self.arrow) {
            (Sandwiched, Optimized) => (a / (2.0 * a - 1.0), Sandwiched, Optimized),
            (Sandwiched, FixedMarginal) => (1.0 / a, Old, Optimized),
            (Old, Optimized) => (1.0 / a, Sandwiched, FixedMarginal),
            (Old, FixedMarginal) => (2.0 - a, Old, FixedMarginal),
        };
        RenyiParams { alpha, dtype, arrow }
    }

    pub fn dual_alpha(&self) -> f64 {
        self.dual().alpha
    }
}

#[derive(Clone, Debug)]
pub struct CondEntropyResult {
    pub value: f64,
    pub optimizer: Option<DensityOp>,
    pub iterations: usize,
    pub converged: bool,
}

/// `Tr[(1 − Π_σ) ρ]`, the weight of `ρ` outside the support of `σ`.
pub fn support_leak(rho: &CMat, sigma: &CMat) -> f64 {
    let n = sigma.nrows();
    let outside = CMat::identity(n, n) - linalg::support_projector(sigma);
    linalg::trace(&(outside * rho)).re.max(0.0)
}

/// Quasi-entropy `Q_α`; `+∞` when `α > 1` and `supp ρ ⊄ supp σ`.
pub fn q_alpha(rho: &LabeledOperator, sigma: &LabeledOperator, dtype: DivergenceType, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 {
        return domain(format!("quasi-entropy needs α > 0, α ≠ 1; got {alpha}"));
    }
    let s = sigma.aligned_to(rho.space())?;
    Ok(q_raw(rho.mat(), s.mat(), dtype, alpha))
}

fn q_raw(rho: &CMat, sigma: &CMat, dtype: DivergenceType, alpha: f64) -> f64 {
    if alpha > 1.0 && support_leak(rho, sigma) > SUPPORT_TOL {
        return f64::INFINITY;
    }
    match dtype {
        DivergenceType::Old => {
            let a = linalg::psd_pow(rho, alpha);
            let b = linalg::psd_pow(sigma, 1.0 - alpha);
            linalg::trace(&(a * b)).re
        }
        DivergenceType::Sandwiched => {
            let g = linalg::psd_pow(sigma, (1.0 - alpha) / (2.0 * alpha));
            let y = &g * rho * &g;
            linalg::eigvalsh(&y).iter().map(|&l| if l > 0.0 { l.powf(alpha) } else { 0.0 }).sum()
        }
    }
}

/// `Tr ρ (log ρ − log σ)`; `+∞` on support violation.
pub fn relative_entropy(rho: &LabeledOperator, sigma: &LabeledOperator) -> Result<f64> {
    let s = sigma.aligned_to(rho.space())?;
    Ok(rel_ent_raw(rho.mat(), s.mat()))
}

fn rel_ent_raw(rho: &CMat, sigma: &CMat) -> f64 {
    if support_leak(rho, sigma) > SUPPORT_TOL {
        return f64::INFINITY;
    }
    let t = linalg::trace(&(rho * (linalg::psd_log2(rho) - linalg::psd_log2(sigma))));
    t.re
}

/// `D_α(ρ‖σ)` in bits; `α = 1` is the relative entropy.
pub fn d_alpha(rho: &LabeledOperator, sigma: &LabeledOperator, p: &RenyiParams) -> Result<f64> {
    let s = sigma.aligned_to(rho.space())?;
    Ok(d_raw(rho.mat(), s.mat(), p.dtype, p.alpha))
}

fn d_raw(rho: &CMat, sigma: &CMat, dtype: DivergenceType, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return rel_ent_raw(rho, sigma);
    }
    let q = q_raw(rho, sigma, dtype, alpha);
    if q.is_infinite() {
        return f64::INFINITY;
    }
    if q <= 0.0 {
        // disjoint supports with α < 1
        return f64::INFINITY;
    }
    q.log2() / (alpha - 1.0)
}

/// `D_α(ρ^{AB} ‖ 1^A ⊗ σ^B)` with `B` given by `sigma_b`'s labels.
pub fn d_alpha_cond(rho: &LabeledOperator, sigma_b: &LabeledOperator, p: &RenyiParams) -> Result<f64> {
    let a = rho.space().without(sigma_b.space().labels())?;
    let full = LabeledOperator::identity(a).tensor(sigma_b)?;
    d_alpha(rho, &full, p)
}

/// Unconditional `H_α(ρ) = log Tr ρ^α / (1 − α)`; every divergence type agrees here.
pub fn renyi_entropy(rho: &LabeledOperator, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return domain(format!("Rényi entropy needs α > 0, got {alpha}"));
    }
    if alpha == 1.0 {
        return Ok(von_neumann(rho));
    }
    let s: f64 = rho.eigvalsh().iter().filter(|&&l| l > linalg::EIG_FLOOR).map(|l| l.powf(alpha)).sum();
    Ok(s.log2() / (1.0 - alpha))
}

pub fn von_neumann(rho: &LabeledOperator) -> f64 {
    rho.eigvalsh().iter().filter(|&&l| l > linalg::EIG_FLOOR).map(|&l| -l * l.log2()).sum()
}

/// `H(A|B) = H(AB) − H(B)` on the labels `a ∪ b`.
pub fn cond_entropy_vn<S: AsRef<str>>(rho: &LabeledOperator, a: &[S], b: &[S]) -> Result<f64> {
    let ab: Vec<&str> = a.iter().chain(b).map(|s| s.as_ref()).collect();
    let rab = rho.reduce_to(&ab)?;
    let rb = rho.reduce_to(b)?;
    Ok(von_neumann(&rab) - von_neumann(&rb))
}

#[derive(Clone, Debug, Serialize)]
pub struct VonNeumannSuite {
    pub h_a: f64,
    pub h_a_given_b: f64,
    /// `I(A:B|C)`; with `C` empty this is the mutual information.
    pub cmi: f64,
    pub coherent_info: f64,
}

pub fn von_neumann_suite<S: AsRef<str>>(rho: &LabeledOperator, a: &[S], b: &[S], c: &[S]) -> Result<VonNeumannSuite> {
    let h_a = von_neumann(&rho.reduce_to(a)?);
    let h_a_given_b = cond_entropy_vn(rho, a, b)?;
    let bc: Vec<&str> = b.iter().chain(c).map(|s| s.as_ref()).collect();
    let c_only: Vec<&str> = c.iter().map(|s| s.as_ref()).collect();
    let a_only: Vec<&str> = a.iter().map(|s| s.as_ref()).collect();
    let h_a_c = cond_entropy_vn(rho, &a_only, &c_only)?;
    let h_a_bc = cond_entropy_vn(rho, &a_only, &bc)?;
    Ok(VonNeumannSuite { h_a, h_a_given_b, cmi: h_a_c - h_a_bc, coherent_info: -h_a_given_b })
}

/// Conditional Rényi entropy `H_α(A|B)` with `B = cond` and `A` the rest.
pub fn h_cond<S: AsRef<str>>(rho: &DensityOp, cond: &[S], p: &RenyiParams) -> Result<CondEntropyResult> {
    let space = rho.space();
    let a_labels = space.complement(cond);
    let b_space = space.subspace(cond)?;
    let ordered: Vec<&str> = a_labels.iter().map(String::as_str).chain(b_space.labels().iter().map(String::as_str)).collect();
    let r = rho.reorder(&ordered)?;
    let da = space.dim_of_all(&a_labels)?;
    let db = b_space.total_dim();
    let rb = linalg::partial_trace_split(r.mat(), &r.space().split(b_space.labels())?);

    if p.arrow == Arrow::FixedMarginal || p.is_von_neumann() {
        let sig = linalg::kron(&CMat::identity(da, da), &rb);
        let value = -d_raw(r.mat(), &sig, p.dtype, p.alpha);
        let optimizer = if p.arrow == Arrow::Optimized {
            // at α = 1 the marginal is the optimizer
            Some(DensityOp::from_mat(b_space.clone(), linalg::hermitian_part(&rb))?)
        } else {
            None
        };
        return Ok(CondEntropyResult { value, optimizer, iterations: 0, converged: true });
    }

    // restrict B to the support of ρ_B; the optimum lives there
    let (vals, vecs) = linalg::eigh(&rb);
    let keep: Vec<usize> = (0..db).filter(|&i| vals[i] > linalg::EIG_FLOOR).collect();
    let v = CMat::from_fn(db, keep.len(), |i, k| vecs[(i, keep[k])]);
    let k = linalg::kron(&CMat::identity(da, da), &v);
    let rc = k.adjoint() * r.mat() * &k;
    let dk = keep.len();

    let (sig_c, iterations, converged) = match p.dtype {
        DivergenceType::Old => (old_optimizer(&rc, da, dk, p.alpha), 0, true),
        DivergenceType::Sandwiched => sandwiched_optimizer(&rc, da, dk, p.alpha),
    };
    let value = -d_raw(&rc, &linalg::kron(&CMat::identity(da, da), &sig_c), p.dtype, p.alpha);
    let sigma = linalg::hermitian_part(&(&v * &sig_c * v.adjoint()));
    Ok(CondEntropyResult {
        value,
        optimizer: Some(DensityOp::from_mat(b_space, sigma)?),
        iterations,
        converged,
    })
}

/// Split of a `(dA·dB)`-dimensional index space with `B` last.
fn b_split(da: usize, db: usize) -> crate::qmat::space::Split {
    crate::qmat::space::Split { sel: (0..db).collect(), rest: (0..da).map(|a| a * db).collect() }
}

fn tr_a(m: &CMat, da: usize, db: usize) -> CMat {
    linalg::partial_trace_split(m, &b_split(da, db))
}

/// `σ* = X^{1/α} / Tr X^{1/α}` with `X = Tr_A ρ^α`.
fn old_optimizer(rho: &CMat, da: usize, db: usize, alpha: f64) -> CMat {
    let x = tr_a(&linalg::psd_pow(rho, alpha), da, db);
    let root = linalg::psd_pow(&x, 1.0 / alpha);
    let t = linalg::trace(&root).re;
    root.unscale(t)
}

/// `Tr_A[(SρS)^α]` with `S = 1 ⊗ σ^γ`, and `Q` itself.
fn sandwich_map(rho: &CMat, sigma: &CMat, da: usize, db: usize, alpha: f64) -> (CMat, f64) {
    let g = (1.0 - alpha) / (2.0 * alpha);
    let s = linalg::kron(&CMat::identity(da, da), &linalg::psd_pow(sigma, g));
    let y = &s * rho * &s;
    let (vals, vecs) = linalg::eigh(&y);
    let q = vals.iter().map(|&l| if l > 0.0 { l.powf(alpha) } else { 0.0 }).sum();
    let ya = linalg::from_spectrum(&vals, &vecs, |l| if l > 0.0 { l.powf(alpha) } else { 0.0 });
    (tr_a(&ya, da, db), q)
}

fn normalize(m: CMat) -> CMat {
    let h = linalg::hermitian_part(&m);
    let t = linalg::trace(&h).re;
    h.unscale(t)
}

fn ln_pd(m: &CMat) -> CMat {
    linalg::herm_fn(m, |l| l.max(1e-300).ln())
}

fn exp_h(m: &CMat) -> CMat {
    // shift for stability; normalization removes it again
    let (vals, vecs) = linalg::eigh(m);
    let top = vals.last().copied().unwrap_or(0.0);
    linalg::from_spectrum(&vals, &vecs, |l| (l - top).exp())
}

/// Stationarity residual `‖σ − F/Tr F‖₁` of the sandwiched objective.
fn stationarity(rho: &CMat, sigma: &CMat, da: usize, db: usize, alpha: f64) -> f64 {
    let (f, _) = sandwich_map(rho, sigma, da, db, alpha);
    linalg::trace_norm(&(normalize(f) - sigma))
}

/// Optimal `σ^B` for the sandwiched conditional entropy on a full-rank `ρ_B`.
///
/// Fixed point `σ ∝ F(σ)`, log-damped for `α > 1`; falls back to mirror
/// descent when that does not settle.
fn sandwiched_optimizer(rho: &CMat, da: usize, db: usize, alpha: f64) -> (CMat, usize, bool) {
    // minimize sign·Q
    let sign = if alpha > 1.0 { 1.0 } else { -1.0 };
    let mut sigma = normalize(tr_a(rho, da, db));
    let mut best = (sigma.clone(), sign * sandwich_map(rho, &sigma, da, db, alpha).1);
    let mut iters = 0;
    let mut settled = false;
    for it in 0..FP_MAX_ITERS {
        iters = it + 1;
        let (f, q) = sandwich_map(rho, &sigma, da, db, alpha);
        if sign * q < best.1 {
            best = (sigma.clone(), sign * q);
        }
        let next = if alpha > 1.0 {
            normalize(exp_h(&(ln_pd(&sigma).scale(1.0 - 1.0 / alpha) + ln_pd(&f).scale(1.0 / alpha))))
        } else {
            normalize(f)
        };
        let step = linalg::trace_norm(&(&next - &sigma));
        sigma = next;
        if step <= FP_TOL {
            settled = true;
            break;
        }
    }
    if settled && stationarity(rho, &sigma, da, db, alpha) <= STATIONARY_TOL {
        return (sigma, iters, true);
    }
    let q_last = sign * sandwich_map(rho, &sigma, da, db, alpha).1;
    if q_last <= best.1 {
        best = (sigma, q_last);
    }
    let (s, n, ok) = mirror_descent(rho, best.0, da, db, alpha);
    (s, iters + n, ok)
}

/// Gradient of `Q(σ) = Tr(σ^γ ρ σ^γ)^α` with respect to `σ`.
fn q_gradient(rho: &CMat, sigma: &CMat, da: usize, db: usize, alpha: f64) -> (CMat, f64) {
    let g = (1.0 - alpha) / (2.0 * alpha);
    let (lam, v) = linalg::eigh(sigma);
    let sg = linalg::from_spectrum(&lam, &v, |l| l.max(linalg::EIG_FLOOR).powf(g));
    let s = linalg::kron(&CMat::identity(da, da), &sg);
    let y = &s * rho * &s;
    let (yv, yvec) = linalg::eigh(&y);
    let q: f64 = yv.iter().map(|&l| if l > 0.0 { l.powf(alpha) } else { 0.0 }).sum();
    let ya1 = linalg::from_spectrum(&yv, &yvec, |l| if l > linalg::EIG_FLOOR { l.powf(alpha - 1.0) } else { 0.0 });
    let inner = (rho * &s * &ya1 + &ya1 * &s * rho).scale(alpha);
    let z = tr_a(&inner, da, db);
    // Daleckii–Krein: d(σ^γ)[H] = V (Γ ∘ V†HV) V†
    let zt = v.adjoint() * z * &v;
    let n = lam.len();
    let mut gm = zt.clone();
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (lam[i].max(linalg::EIG_FLOOR), lam[j].max(linalg::EIG_FLOOR));
            let gamma = if (li - lj).abs() <= 1e-12 * li.max(lj) {
                g * li.powf(g - 1.0)
            } else {
                (li.powf(g) - lj.powf(g)) / (li - lj)
            };
            gm[(i, j)] = zt[(i, j)] * gamma;
        }
    }
    (linalg::hermitian_part(&(&v * gm * v.adjoint())), q)
}

/// Exponentiated-gradient descent on `sign·Q` with Armijo backtracking.
fn mirror_descent(rho: &CMat, start: CMat, da: usize, db: usize, alpha: f64) -> (CMat, usize, bool) {
    let sign = if alpha > 1.0 { 1.0 } else { -1.0 };
    let mut sigma = start;
    let mut eta = 1.0;
    for it in 0..MD_MAX_ITERS {
        let (grad, q) = q_gradient(rho, &sigma, da, db, alpha);
        let grad = grad.scale(sign);
        let f0 = sign * q;
        let scale = grad.norm().max(1e-300);
        let ln_s = ln_pd(&sigma);
        let mut accepted = None;
        let mut t = eta;
        for _ in 0..60 {
            let cand = normalize(exp_h(&(&ln_s - grad.scale(t / scale))));
            let f1 = sign * sandwich_map(rho, &cand, da, db, alpha).1;
            let decrease = linalg::trace(&(&grad * (&sigma - &cand))).re;
            if f1 <= f0 - 1e-4 * decrease && f1 <= f0 {
                accepted = Some((cand, f1));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, f1)) = accepted else {
            let ok = stationarity(rho, &sigma, da, db, alpha) <= MD_STATIONARY_TOL;
            return (sigma, it + 1, ok);
        };
        let moved = linalg::trace_norm(&(&cand - &sigma));
        sigma = cand;
        eta = (t * 2.0).min(1.0);
        if moved <= FP_TOL || (f0 - f1).abs() <= 1e-15 * f0.abs() {
            let ok = stationarity(rho, &sigma, da, db, alpha) <= MD_STATIONARY_TOL;
            return (sigma, it + 1, ok);
        }
    }
    let ok = stationarity(rho, &sigma, da, db, alpha) <= MD_STATIONARY_TOL;
    (sigma, MD_MAX_ITERS, ok)
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub alpha: f64,
    /// Sandwiched, optimized on both sides, partner order `α/(2α−1)`.
    pub residual: f64,
    /// Sandwiched fixed-marginal at `α` against Petz optimized at `1/α`.
    pub mixed_residual: f64,
    /// Petz fixed-marginal at `α` and `2 − α`.
    pub old_residual: f64,
    /// Sandwiched optimized at `α` and `1/α`; not a true duality.
    pub naive_residual: f64,
}

/// Duality residuals `H_p(A|B) + H_{p′}(A|C)` for a pure tripartite state.
pub fn duality_check<S: AsRef<str>>(psi: &DensityOp, a: &[S], b: &[S], c: &[S], alpha: f64) -> Result<DualityReport> {
    if !((0.5..=2.0).contains(&alpha)) || alpha == 1.0 {
        return domain(format!("duality check needs α ∈ [0.5, 1) ∪ (1, 2], got {alpha}"));
    }
    let purity = linalg::trace(&(psi.mat() * psi.mat())).re;
    if (purity - 1.0).abs() > 1e-9 {
        return domain(format!("duality check needs a pure state, Tr ρ² = {purity}"));
    }
    let ab: Vec<&str> = a.iter().chain(b).map(|s| s.as_ref()).collect();
    let ac: Vec<&str> = a.iter().chain(c).map(|s| s.as_ref()).collect();
    let rab = psi.reduce_to(&ab)?;
    let rac = psi.reduce_to(&ac)?;
    let pair = |p: RenyiParams| -> Result<f64> {
        let q = p.dual();
        Ok(h_cond(&rab, b, &p)?.value + h_cond(&rac, c, &q)?.value)
    };
    use {Arrow::*, DivergenceType::*};
    let sand_up = RenyiParams::new(alpha, Sandwiched, Optimized)?;
    let naive = RenyiParams { alpha: 1.0 / alpha, ..sand_up };
    Ok(DualityReport {
        alpha,
        residual: pair(sand_up)?,
        mixed_residual: pair(RenyiParams::new(alpha, Sandwiched, FixedMarginal)?)?,
        old_residual: pair(RenyiParams::new(alpha, Old, FixedMarginal)?)?,
        naive_residual: h_cond(&rab, b, &sand_up)?.value + h_cond(&rac, c, &naive)?.value,
    })
}

/// `D_α(ρ‖σ) ≥ D_α(E(ρ)‖E(σ)) − 1e-9` for a CPTP `E`.
pub fn dpi_check(rho: &LabeledOperator, sigma: &LabeledOperator, e: &KrausMap, p: &RenyiParams) -> Result<bool> {
    if e.tp_class() != TpClass::Cptp {
        return Err(Error::Domain("data processing needs a CPTP map".into()));
    }
    let before = d_alpha(rho, sigma, p)?;
    let er = e.apply(rho)?;
    let es = e.apply(sigma)?;
    let after = d_alpha(&er, &es, p)?;
    if before.is_infinite() {
        return Ok(true);
    }
    Ok(before >= after - 1e-9)
}
