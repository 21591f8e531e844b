//! End-to-end protocol runs built from decoupling: Schumacher compression,
//! FQSW, state merging and correlation destruction, plus the Uhlmann
//! extension and trace-distance/fidelity checks they rely on.
//!
//! Every run samples a witness unitary, builds the encoder and decoder the
//! achievability argument prescribes, and reports the measured trace distance
//! next to the analytic bound.

mod destroy;
mod fqsw;
mod merge;
mod schumacher;

use std::collections::BTreeMap;

use serde::Serialize;

pub use destroy::{destroy_run, destroy_run_with, destroy_sweep, destroy_theorem_rate};
pub use fqsw::{fqsw_run, fqsw_theorem_rates};
pub use merge::{merge_run, merge_theorem_rates, MergeConfig};
pub use schumacher::{schumacher_dim_for_rate, schumacher_error_dense, schumacher_run, schumacher_theorem_rate};

use crate::decouple::{SearchMode, WitnessReport, MC_DIM_LIMIT};
use crate::entropy::{self, RenyiParams};
use crate::qmat::{fidelity, linalg, xi, CMat, CVec, DensityOp, Ket, LabeledOperator, PartialIsom, PureState, SubsystemSpace};
use crate::twirl::RngSeed;
use crate::{domain, Error, Result};

/// Knobs shared by all runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProtocolOptions {
    pub alpha: f64,
    /// Slack δ₁ (and δ for single-slack rates), bits per copy.
    pub delta1: f64,
    pub delta2: f64,
    /// Haar candidates tried by the witness search.
    pub n_tries: usize,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self { alpha: 1.5, delta1: 0.1, delta2: 0.1, n_tries: 32 }
    }
}

impl ProtocolOptions {
    fn check(&self) -> Result<RenyiParams> {
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return domain(format!("protocol bounds need α in (1, 2], got {}", self.alpha));
        }
        if self.n_tries == 0 {
            return domain("n_tries must be positive");
        }
        RenyiParams::sandwiched(self.alpha)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub tries: usize,
    pub anomaly: bool,
    /// Condition errors of the chosen unitary, in the order of `bounds`.
    pub errors: Vec<f64>,
    pub bounds: Vec<f64>,
}

impl From<&WitnessReport> for WitnessSummary {
    fn from(w: &WitnessReport) -> Self {
        Self { tries: w.tries, anomaly: w.anomaly, errors: w.errors.clone(), bounds: w.bounds.clone() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolResult {
    pub protocol: String,
    pub measured_error: f64,
    pub bound: f64,
    /// Bits per copy; measured rates and the theorem's rate expressions.
    pub rates: BTreeMap<String, f64>,
    /// Intermediate quantities (ε_n, ϑ_n, entropies, ...).
    pub details: BTreeMap<String, f64>,
    pub n: usize,
    pub seed: RngSeed,
    pub witness: WitnessSummary,
    /// Constructed unitaries and isometries by name.
    #[serde(skip)]
    pub operators: BTreeMap<String, CMat>,
}

impl ProtocolResult {
    fn new(protocol: &str, n: usize, seed: RngSeed, witness: &WitnessReport) -> Self {
        Self {
            protocol: protocol.to_string(),
            measured_error: 0.0,
            bound: 0.0,
            rates: BTreeMap::new(),
            details: BTreeMap::new(),
            n,
            seed,
            witness: witness.into(),
            operators: BTreeMap::new(),
        }
    }

    pub fn within_bound(&self) -> bool {
        self.measured_error <= self.bound
    }
}

/// Entropic quantities of the source: `H_α̃(A)` and `H_α(A|R)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SourceEntropies {
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub h_tilde: f64,
    pub h_cond: f64,
}

/// `ρ^{AR}` on labels `a` and `r` (other labels are traced out first).
pub fn source_entropies(rho: &DensityOp, a: &str, r: &str, alpha: f64) -> Result<SourceEntropies> {
    let p = RenyiParams::sandwiched(alpha)?;
    let alpha_tilde = p.dual_alpha();
    let h_tilde = entropy::renyi_entropy(rho.reduce_to(&[a])?.op(), alpha_tilde)?;
    let rho_ar = rho.reduce_to(&[a, r])?;
    let h_cond = entropy::h_cond(&rho_ar, &[r], &p)?.value;
    Ok(SourceEntropies { alpha, alpha_tilde, h_tilde, h_cond })
}

/// `k·2^{((α−1)/2α)·exponent}`
pub(crate) fn exp_bound(k: f64, alpha: f64, exponent: f64) -> f64 {
    k * (crate::decouple::exponent_factor(alpha) * exponent).exp2()
}

pub(crate) fn log2(x: usize) -> f64 {
    (x as f64).log2()
}

/// Ket on `rows ⊗ cols` with coefficient matrix `m`.
pub(crate) fn ket_from_matrix(rows: &SubsystemSpace, cols: &SubsystemSpace, m: &CMat) -> Result<Ket> {
    if m.nrows() != rows.total_dim() || m.ncols() != cols.total_dim() {
        return Err(Error::Shape(format!("{}x{} coefficients for {}x{}", m.nrows(), m.ncols(), rows.total_dim(), cols.total_dim())));
    }
    let nc = m.ncols();
    let amp = CVec::from_fn(m.len(), |k, _| m[(k / nc, k % nc)]);
    Ket::new(rows.join(cols)?, amp)
}

/// Requires `psi` to live on exactly the labels `want`.
pub(crate) fn require_labels(space: &SubsystemSpace, want: &[&str]) -> Result<()> {
    if space.len() != want.len() || want.iter().any(|l| !space.contains(l)) {
        return Err(Error::Shape(format!("expected labels {want:?}, got {:?}", space.labels())));
    }
    Ok(())
}

pub(crate) fn check_size(size: usize) -> Result<()> {
    if size > MC_DIM_LIMIT {
        return Err(Error::TooLarge { size, limit: MC_DIM_LIMIT });
    }
    Ok(())
}

/// Best-of-budget witness: every protocol condition at once.
pub(crate) fn search<F>(dim: usize, bounds: &[f64], opts: &ProtocolOptions, seed: RngSeed, errors: F) -> Result<WitnessReport>
where
    F: Fn(&CMat) -> Result<Vec<f64>> + Sync,
{
    crate::decouple::witness_search(dim, bounds, opts.n_tries, seed, SearchMode::Best, errors)
}

/// `V` (`|C|×|B|`) maximizing `|⟨Ψ|(1⊗V)|ξ⟩|` for coefficient matrices
/// `xi` (`|A|×|B|`) and `psi` (`|A|×|C|`).
pub fn uhlmann_isometry(xi: &CMat, psi: &CMat) -> Result<CMat> {
    if xi.nrows() != psi.nrows() {
        return Err(Error::Shape(format!("kept systems differ: {} vs {}", xi.nrows(), psi.nrows())));
    }
    let (b, c) = (xi.ncols(), psi.ncols());
    if b > c {
        return domain(format!("Uhlmann extension needs |B| <= |C|, got {b} > {c}"));
    }
    // Y = Ψ†Ξ = U s W† (thin), V = conj(U) Wᵀ gives Tr(VᵀY) = Tr s.
    // Both factors are re-orthonormalized, largest s first: the SVD's vectors
    // for (near-)vanishing singular values need not be orthonormal
    let svd = (psi.adjoint() * xi).svd(true, true);
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u = orthonormal_columns(&svd.u.expect("requested u"), &order);
    let w = orthonormal_columns(&svd.v_t.expect("requested v_t").adjoint(), &order);
    Ok(u.map(|z| z.conj()) * w.transpose())
}

/// Gram–Schmidt over the columns of `m` in `order`; a column that collapses
/// is replaced by the basis vector with the largest remainder.
fn orthonormal_columns(m: &CMat, order: &[usize]) -> CMat {
    let c = m.nrows();
    let mut out = CMat::zeros(c, m.ncols());
    let mut done: Vec<usize> = Vec::with_capacity(order.len());
    let residual = |out: &CMat, done: &[usize], mut col: CVec| {
        // two classical passes are as good as modified Gram–Schmidt here
        for _ in 0..2 {
            for &k in done {
                let prev = out.column(k);
                let proj = prev.dotc(&col);
                col -= prev * proj;
            }
        }
        col
    };
    for &i in order {
        let mut col = residual(&out, &done, m.column(i).into_owned());
        if col.norm() < 1e-6 {
            col = (0..c)
                .map(|e| residual(&out, &done, CVec::from_fn(c, |j, _| linalg::r(if j == e { 1.0 } else { 0.0 }))))
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("nonempty basis");
        }
        let nrm = col.norm();
        out.set_column(i, &(col / linalg::r(nrm)));
        done.push(i);
    }
    out
}

/// Uhlmann extension between kets sharing the `kept` labels.
///
/// Returns `V: rest(ξ) → rest(Ψ)`.
pub fn uhlmann_kets<S: AsRef<str>>(xi: &Ket, psi: &Ket, kept: &[S]) -> Result<PartialIsom> {
    let xm = xi.as_matrix(kept)?;
    let pm = psi.as_matrix(kept)?;
    let ks = xi.space().subspace(kept)?;
    if !ks.same_set(&psi.space().subspace(kept)?) {
        return Err(Error::Shape("kept systems have different dimensions".into()));
    }
    let v = uhlmann_isometry(&xm, &pm)?;
    PartialIsom::new(xi.space().without(kept)?, psi.space().without(kept)?, v)
}

/// Largest eigenvector of a rank-one PSD operator, scaled to keep its trace.
fn top_ket(op: &LabeledOperator) -> Result<Ket> {
    let (vals, vecs) = linalg::eigh(op.mat());
    let (i, &l) = vals.iter().enumerate().fold((0, &f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
    if l < -1e-12 {
        return Err(Error::NotPsd(l));
    }
    Ket::new(op.space().clone(), vecs.column(i).scale(l.max(0.0).sqrt()))
}

/// `V^{B→C}` with `‖V·ξ^{AB} − Ψ^{AC}‖₁ ≤ Ξ(ε)` whenever `‖ξ^A − Ψ^A‖₁ ≤ ε`.
///
/// `A` is the set of labels the two operands share. `ξ` must be rank one
/// (a possibly subnormalized pure state).
pub fn uhlmann_extend(xi_ab: &LabeledOperator, psi_ac: &PureState, eps: f64) -> Result<PartialIsom> {
    let kept: Vec<String> = xi_ab.space().labels().iter().filter(|l| psi_ac.space().contains(l)).cloned().collect();
    let xk = top_ket(xi_ab)?;
    let dist = xi_ab.reduce_to(&kept)?.sub(psi_ac.reduce_to(&kept)?.op())?.trace_norm();
    if dist > eps + 1e-9 {
        return domain(format!("marginals are {dist} apart, more than ε = {eps}"));
    }
    uhlmann_kets(&xk, psi_ac, &kept)
}

/// `‖aa† − bb†‖₁ = √((‖a‖² + ‖b‖²)² − 4|⟨a|b⟩|²)`
pub fn pure_trace_distance(a: &Ket, b: &Ket) -> Result<f64> {
    let s = a.norm_sqr() + b.norm_sqr();
    let ov = a.inner(b)?.norm_sqr();
    Ok((s * s - 4.0 * ov).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FvdgReport {
    /// `Tr ρ + Tr σ − 2F`
    pub lower: f64,
    pub trace_distance: f64,
    /// `√((Tr ρ + Tr σ)² − 4F²)`
    pub upper: f64,
}

impl FvdgReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.trace_distance + tol && self.trace_distance <= self.upper + tol
    }
}

/// Fuchs–van de Graaf sandwich for subnormalized PSD operators.
pub fn fuchs_vdg_check(rho: &LabeledOperator, sigma: &LabeledOperator) -> Result<FvdgReport> {
    let s = sigma.aligned_to(rho.space())?;
    for m in [rho, &s] {
        let tr = m.trace().re;
        if tr > 1.0 + 1e-9 {
            return Err(Error::BadTrace(tr));
        }
        if m.min_eig() < -1e-10 {
            return Err(Error::NotPsd(m.min_eig()));
        }
    }
    let f = fidelity(rho, &s)?;
    let t = rho.trace().re + s.trace().re;
    Ok(FvdgReport { lower: t - 2.0 * f, trace_distance: rho.sub(&s)?.trace_norm(), upper: (t * t - 4.0 * f * f).max(0.0).sqrt() })
}

/// `Ξ`, failing only on negative input.
pub(crate) fn xi_of(eps: f64) -> Result<f64> {
    xi(eps)
}
