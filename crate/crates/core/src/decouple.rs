//! Decoupling bounds and their sampled counterparts.
//!
//! One-shot and n-copy right-hand sides, Monte Carlo estimates of
//! `E_U ‖T(U·ρ) − ω_T ⊗ ρ^R‖₁`, simultaneous witness search, the pinching
//! projectors used in the proof, and the classical-quantum variant with its
//! covering bound.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{Class1Verdict, KrausMap, TpClass};
use crate::entropy::{self, Arrow, DivergenceType, RenyiParams};
use crate::qmat::{
    copy_labels, distinct_eigs, linalg, pinch, positive_part_projector, CMat, DensityOp, LabeledOperator, SubsystemSpace,
    DEFAULT_NU_TOL,
};
use crate::twirl::{self, McEstimate, RngSeed, UnitaryEnsemble};
use crate::{domain, Error, Result};

/// Largest matrix dimension the dense Monte Carlo estimators accept.
pub const MC_DIM_LIMIT: usize = 4096;
pub const DEFAULT_SAMPLES: usize = 2000;

/// `(α−1)/(2α)`, the prefactor of every exponent.
pub fn exponent_factor(alpha: f64) -> f64 {
    (alpha - 1.0) / (2.0 * alpha)
}

/// Class-1 certificate without sampling: CPTP, or CP with `Tr T(1) = |A|`.
pub fn class1_certificate(t: &KrausMap) -> Result<Class1Verdict> {
    if t.tp_class() == TpClass::Cptp {
        return Ok(Class1Verdict::YesCptp);
    }
    let ti = t.apply(&LabeledOperator::identity(t.in_space().clone()))?;
    if (ti.trace().re - t.in_space().total_dim() as f64).abs() <= 1e-9 {
        Ok(Class1Verdict::YesTraceCondition)
    } else {
        Ok(Class1Verdict::Unknown)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return domain(format!("decoupling bounds need α in (1, 2], got {alpha}"));
    }
    Ok(())
}

fn certified(t: &KrausMap) -> Result<Class1Verdict> {
    let v = class1_certificate(t)?;
    if v == Class1Verdict::Unknown {
        return domain("map is neither CPTP nor satisfies Tr T(1) = |A|; not certified class-1");
    }
    Ok(v)
}

#[derive(Clone, Debug)]
pub enum SigmaR {
    /// Minimize `D_α(ρ^{AR} ‖ 1 ⊗ σ^R)` over `σ^R`.
    Optimize,
    Given(DensityOp),
}

#[derive(Clone, Debug)]
pub struct DecouplingInstance {
    rho_ar: DensityOp,
    a: Vec<String>,
    t: KrausMap,
    alpha: f64,
    sigma_r: SigmaR,
    n_copies: usize,
    dtype: DivergenceType,
    verdict: Class1Verdict,
}

impl DecouplingInstance {
    /// Single copy; `a` names the labels of `rho_ar` the map acts on.
    pub fn new<S: AsRef<str>>(rho_ar: DensityOp, a: &[S], t: KrausMap, alpha: f64, dtype: DivergenceType) -> Result<Self> {
        Self::iid(rho_ar, a, 1, t, alpha, dtype)
    }

    /// `n` copies of `rho_ar`; `t` must act on the copy labels `A[1..n]`
    /// (or on `A` itself when `n = 1`).
    pub fn iid<S: AsRef<str>>(
        rho_ar: DensityOp,
        a: &[S],
        n: usize,
        t: KrausMap,
        alpha: f64,
        dtype: DivergenceType,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return domain("need at least one copy");
        }
        let a: Vec<String> = a.iter().map(|s| s.as_ref().to_string()).collect();
        for l in &a {
            rho_ar.space().index_of(l)?;
        }
        if a.is_empty() || rho_ar.space().complement(&a).is_empty() {
            return domain("both A and R must be nonempty");
        }
        let an = if n == 1 { a.clone() } else { copy_labels(&a, n) };
        let want = rho_ar.space().subspace(&a)?;
        let want = if n == 1 { want } else { want.copies(n) };
        if !t.in_space().same_set(&want) || an.iter().any(|l| want.dim_of(l).ok() != t.in_space().dim_of(l).ok()) {
            return Err(Error::Shape(format!("map input {:?} does not match {:?}", t.in_space().labels(), an)));
        }
        let verdict = certified(&t)?;
        Ok(Self { rho_ar, a, t, alpha, sigma_r: SigmaR::Optimize, n_copies: n, dtype, verdict })
    }

    /// Use a fixed single-copy `σ^R` instead of the optimizer.
    pub fn with_sigma(mut self, sigma: DensityOp) -> Result<Self> {
        let r = self.rho_ar.space().without(&self.a)?;
        if !sigma.space().same_set(&r) {
            return Err(Error::Shape(format!("σ lives on {:?}, R is {:?}", sigma.space().labels(), r.labels())));
        }
        self.sigma_r = SigmaR::Given(sigma);
        Ok(self)
    }

    pub fn rho_ar(&self) -> &DensityOp {
        &self.rho_ar
    }

    pub fn a_labels(&self) -> &[String] {
        &self.a
    }

    pub fn r_labels(&self) -> Vec<String> {
        self.rho_ar.space().complement(&self.a)
    }

    pub fn map(&self) -> &KrausMap {
        &self.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dtype(&self) -> DivergenceType {
        self.dtype
    }

    pub fn n_copies(&self) -> usize {
        self.n_copies
    }

    pub fn verdict(&self) -> Class1Verdict {
        self.verdict
    }

    pub fn sigma_r(&self) -> &SigmaR {
        &self.sigma_r
    }

    pub fn params(&self) -> RenyiParams {
        RenyiParams { alpha: self.alpha, dtype: self.dtype, arrow: Arrow::Optimized }
    }

    /// `ρ^{⊗n}` with copy labels (or `ρ` itself for one copy).
    pub fn input_state(&self) -> Result<DensityOp> {
        if self.n_copies == 1 {
            Ok(self.rho_ar.clone())
        } else {
            self.rho_ar.tensor_power(self.n_copies)
        }
    }

    /// Largest dense dimension the sampled error would touch.
    pub fn dense_size(&self) -> usize {
        let n = self.n_copies as u32;
        let d = self.rho_ar.dim();
        let dr = d / self.rho_ar.space().dim_of_all(&self.a).unwrap_or(1);
        d.saturating_pow(n).max(dr.saturating_pow(n).saturating_mul(self.t.out_space().total_dim()))
    }

    fn check_size(&self) -> Result<()> {
        let size = self.dense_size();
        if size > MC_DIM_LIMIT {
            return Err(Error::TooLarge { size, limit: MC_DIM_LIMIT });
        }
        Ok(())
    }

    fn resolved_sigma(&self) -> Result<DensityOp> {
        match &self.sigma_r {
            SigmaR::Given(s) => Ok(s.clone()),
            SigmaR::Optimize => entropy::h_cond(&self.rho_ar, &self.r_labels(), &self.params())?
                .optimizer
                .ok_or_else(|| Error::Domain("conditional entropy returned no optimizer".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentTerms {
    /// `log ν_σ`, or `|R| log(n+1)` in the n-copy form.
    pub log_nu: f64,
    /// `D_α(ρ ‖ 1 ⊗ σ)`, or `−n H_α(A|R)`.
    pub d_alpha_term: f64,
    pub theta: f64,
    /// `log M` for the classical-quantum bound, zero otherwise.
    pub log_m: f64,
}

impl ExponentTerms {
    pub fn sum(&self) -> f64 {
        self.log_nu + self.d_alpha_term + self.theta - self.log_m
    }

    /// `4·2^{factor·sum}`
    pub fn bound(&self, factor: f64) -> f64 {
        let s = self.sum();
        if s.is_infinite() && s > 0.0 {
            return f64::INFINITY;
        }
        4.0 * (factor * s).exp2()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub rhs: f64,
    pub factor: f64,
    pub terms: ExponentTerms,
    pub n: usize,
    /// Hilbert dimension of one copy of `R`.
    pub dim_r: usize,
    /// `factor·sum / n`
    pub per_copy_exponent: f64,
    /// Infinite divergence: the bound says nothing.
    pub vacuous: bool,
    pub lhs: Option<McEstimate>,
    pub slack: Option<f64>,
}

impl BoundReport {
    fn from_terms(factor: f64, terms: ExponentTerms, n: usize, dim_r: usize) -> Self {
        let rhs = terms.bound(factor);
        Self {
            rhs,
            factor,
            terms,
            n,
            dim_r,
            per_copy_exponent: factor * terms.sum() / n as f64,
            vacuous: !rhs.is_finite(),
            lhs: None,
            slack: None,
        }
    }

    pub fn with_lhs(mut self, lhs: McEstimate) -> Self {
        self.slack = Some(self.rhs - lhs.mean);
        self.lhs = Some(lhs);
        self
    }
}

/// One-shot bound `4·2^{c[log ν_σ + D_α(ρ‖1⊗σ) + Θ(T)]}`.
pub fn thm1_rhs(inst: &DecouplingInstance) -> Result<BoundReport> {
    if inst.n_copies != 1 {
        return domain("thm1_rhs is the single-copy bound; use thm1_rhs_iid for n copies");
    }
    let sigma = inst.resolved_sigma()?;
    let log_nu = (distinct_eigs(&sigma, DEFAULT_NU_TOL) as f64).log2();
    let d = entropy::d_alpha_cond(&inst.rho_ar, &sigma, &inst.params())?;
    let theta = inst.t.theta()?.theta;
    let terms = ExponentTerms { log_nu, d_alpha_term: d, theta, log_m: 0.0 };
    let dim_r = inst.rho_ar.space().dim_of_all(&inst.r_labels())?;
    Ok(BoundReport::from_terms(exponent_factor(inst.alpha), terms, 1, dim_r))
}

/// n-copy bound `4·2^{c[|R| log(n+1) − n H_α(A|R) + Θ(T)]}`.
///
/// With a fixed `σ^R` the entropy term becomes `n D_α(ρ ‖ 1 ⊗ σ)`.
pub fn thm1_rhs_iid(inst: &DecouplingInstance) -> Result<BoundReport> {
    let n = inst.n_copies;
    let r = inst.r_labels();
    let dim_r = inst.rho_ar.space().dim_of_all(&r)?;
    let d_term = match &inst.sigma_r {
        SigmaR::Optimize => -(n as f64) * entropy::h_cond(&inst.rho_ar, &r, &inst.params())?.value,
        SigmaR::Given(s) => n as f64 * entropy::d_alpha_cond(&inst.rho_ar, s, &inst.params())?,
    };
    let terms = ExponentTerms {
        log_nu: dim_r as f64 * ((n + 1) as f64).log2(),
        d_alpha_term: d_term,
        theta: inst.t.theta()?.theta,
        log_m: 0.0,
    };
    Ok(BoundReport::from_terms(exponent_factor(inst.alpha), terms, n, dim_r))
}

/// `‖T(U·ρ) − ω_T ⊗ ρ^R‖₁` as a function of `U`, with the target cached.
#[derive(Clone, Debug)]
pub struct DecouplingError {
    t: KrausMap,
    state: LabeledOperator,
    target: LabeledOperator,
}

impl DecouplingError {
    /// `state` lives on the map's input plus a reference.
    pub fn new(t: &KrausMap, state: &LabeledOperator) -> Result<Self> {
        let a = t.in_space().labels();
        let out_dim = state.dim() / t.in_space().total_dim() * t.out_space().total_dim();
        let size = state.dim().max(out_dim);
        if size > MC_DIM_LIMIT {
            return Err(Error::TooLarge { size, limit: MC_DIM_LIMIT });
        }
        let da = t.in_space().total_dim() as f64;
        let omega = t.apply(&LabeledOperator::identity(t.in_space().clone()).scale(1.0 / da))?;
        let rho_r = state.partial_trace(a)?;
        let target = rho_r.tensor(&omega)?;
        Ok(Self { t: t.clone(), state: state.clone(), target })
    }

    pub fn eval(&self, u: &CMat) -> Result<f64> {
        let rotated = self.state.conjugate_local(u, self.t.in_space().labels(), self.t.in_space())?;
        let out = self.t.apply(&rotated)?;
        Ok(out.sub(&self.target)?.trace_norm())
    }

    pub fn dim_a(&self) -> usize {
        self.t.in_space().total_dim()
    }
}

/// Haar estimate of `E_U ‖T(U·ρ^{⊗n}) − ω_T ⊗ (ρ^R)^{⊗n}‖₁`.
pub fn mc_lhs(inst: &DecouplingInstance, n_samples: usize, seed: RngSeed) -> Result<McEstimate> {
    inst.check_size()?;
    let err = DecouplingError::new(&inst.t, inst.input_state()?.op())?;
    twirl::mc_average(|u| err.eval(u).expect("shapes fixed at construction"), &UnitaryEnsemble::haar(err.dim_a()), n_samples, seed)
}

/// Average of the decoupling error over the 24 qubit Cliffords.
///
/// The ensemble is a unitary 2-design, so the second moments the bound
/// relies on are exact; the trace norm itself is only a design average.
pub fn clifford_lhs(inst: &DecouplingInstance) -> Result<f64> {
    inst.check_size()?;
    let err = DecouplingError::new(&inst.t, inst.input_state()?.op())?;
    if err.dim_a() != 2 {
        return domain(format!("Clifford averaging needs |A| = 2, got {}", err.dim_a()));
    }
    twirl::exact_average(|u| err.eval(u).expect("shapes fixed at construction"), &UnitaryEnsemble::clifford_qubit())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Stop at the first unitary meeting every bound.
    FirstHit,
    /// Try the whole budget and keep the unitary with the smallest worst ratio.
    Best,
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub unitary: CMat,
    pub errors: Vec<f64>,
    pub bounds: Vec<f64>,
    pub tries: usize,
    /// No sampled unitary met every bound.
    pub anomaly: bool,
}

fn worst_ratio(errors: &[f64], bounds: &[f64]) -> f64 {
    errors
        .iter()
        .zip(bounds)
        .map(|(&e, &b)| {
            if b.is_infinite() {
                0.0
            } else if b > 0.0 {
                e / b
            } else if e > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn meets(errors: &[f64], bounds: &[f64]) -> bool {
    errors.iter().zip(bounds).all(|(e, b)| e <= b)
}

/// Sample Haar unitaries on a `dim`-dimensional space until `errors(U) ≤ bounds`.
pub fn witness_search<F>(dim: usize, bounds: &[f64], n_tries: usize, seed: RngSeed, mode: SearchMode, errors: F) -> Result<WitnessReport>
where
    F: Fn(&CMat) -> Result<Vec<f64>> + Sync,
{
    if n_tries == 0 {
        return domain("witness search needs at least one try");
    }
    let draw = |t: usize| twirl::haar_matrix(dim, &mut seed.derive(t as u64).rng());
    let check = |e: &Vec<f64>| -> Result<()> {
        if e.len() != bounds.len() {
            return Err(Error::Shape(format!("{} errors for {} bounds", e.len(), bounds.len())));
        }
        Ok(())
    };
    match mode {
        SearchMode::FirstHit => {
            let mut best: Option<(f64, CMat, Vec<f64>)> = None;
            for t in 0..n_tries {
                let u = draw(t);
                let e = errors(&u)?;
                check(&e)?;
                if meets(&e, bounds) {
                    return Ok(WitnessReport { unitary: u, errors: e, bounds: bounds.to_vec(), tries: t + 1, anomaly: false });
                }
                let w = worst_ratio(&e, bounds);
                if best.as_ref().is_none_or(|b| w < b.0) {
                    best = Some((w, u, e));
                }
            }
            let (_, u, e) = best.expect("n_tries >= 1");
            Ok(WitnessReport { unitary: u, errors: e, bounds: bounds.to_vec(), tries: n_tries, anomaly: true })
        }
        SearchMode::Best => {
            let all: Vec<Result<(CMat, Vec<f64>)>> = (0..n_tries)
                .into_par_iter()
                .map(|t| {
                    let u = draw(t);
                    let e = errors(&u)?;
                    check(&e)?;
                    Ok((u, e))
                })
                .collect();
            let mut best: Option<(f64, CMat, Vec<f64>)> = None;
            for r in all {
                let (u, e) = r?;
                let w = worst_ratio(&e, bounds);
                if best.as_ref().is_none_or(|b| w < b.0) {
                    best = Some((w, u, e));
                }
            }
            let (_, u, e) = best.expect("n_tries >= 1");
            let anomaly = !meets(&e, bounds);
            Ok(WitnessReport { unitary: u, errors: e, bounds: bounds.to_vec(), tries: n_tries, anomaly })
        }
    }
}

/// One unitary meeting `K` n-copy decoupling conditions at once.
///
/// Each condition gets `4K·2^{c_i[...]}`; by Markov and the union bound a
/// witness exists, so running out of tries is flagged, not an error.
pub fn corollary1_search(instances: &[DecouplingInstance], n_tries: usize, seed: RngSeed) -> Result<WitnessReport> {
    let Some(first) = instances.first() else {
        return domain("corollary search needs at least one instance");
    };
    let space = first.t.in_space();
    for inst in instances {
        if !inst.t.in_space().same_set(space) {
            return Err(Error::Shape("all instances must act on the same A^n".into()));
        }
    }
    let k = instances.len() as f64;
    let bounds: Vec<f64> = instances.iter().map(|i| Ok(k * thm1_rhs_iid(i)?.rhs)).collect::<Result<_>>()?;
    // align every instance to the first one's label order
    let evals: Vec<(DecouplingError, Vec<usize>)> = instances
        .iter()
        .map(|i| {
            i.check_size()?;
            let e = DecouplingError::new(&i.t, i.input_state()?.op())?;
            let perm = space.split(i.t.in_space().labels())?.sel;
            Ok((e, perm))
        })
        .collect::<Result<_>>()?;
    let report = witness_search(space.total_dim(), &bounds, n_tries, seed, SearchMode::FirstHit, |u| {
        evals.iter().map(|(e, perm)| e.eval(&linalg::permute(u, perm))).collect()
    })?;
    debug_assert!(report.anomaly || meets(&report.errors, &report.bounds));
    Ok(report)
}

/// `Π = {M_σ(ρ) ≥ ζσ}` and its complement.
#[derive(Clone, Debug)]
pub struct ProjectorPair {
    pub zeta: f64,
    pub pi: LabeledOperator,
    pub pi_hat: LabeledOperator,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HayashiReport {
    /// `‖Πρ‖₁`
    pub norm_pi_rho: f64,
    /// `ζ^{(1−α)/2} √Q^old_α(ρ‖σ)`
    pub first_bound: f64,
    /// `Tr σ⁻¹ Π̂ ρ² Π̂` with the support inverse.
    pub second_lhs: f64,
    /// `ν_σ ζ`
    pub second_bound: f64,
}

impl HayashiReport {
    pub fn first_slack(&self) -> f64 {
        self.first_bound - self.norm_pi_rho
    }

    pub fn second_slack(&self) -> f64 {
        self.second_bound - self.second_lhs
    }
}

pub fn projector_pair(rho: &DensityOp, sigma: &LabeledOperator, zeta: f64) -> Result<ProjectorPair> {
    if !(zeta > 0.0) {
        return domain(format!("ζ must be positive, got {zeta}"));
    }
    let s = sigma.aligned_to(rho.space())?;
    if s.min_eig() < -1e-10 {
        return Err(Error::NotPsd(s.min_eig()));
    }
    let m = pinch(&s, rho)?;
    let pi = positive_part_projector(&m, &s.scale(zeta))?;
    let pi_hat = LabeledOperator::identity(rho.space().clone()).sub(&pi)?;
    Ok(ProjectorPair { zeta, pi, pi_hat })
}

impl ProjectorPair {
    pub fn hayashi(&self, rho: &DensityOp, sigma: &LabeledOperator, alpha: f64) -> Result<HayashiReport> {
        check_alpha(alpha)?;
        let s = sigma.aligned_to(rho.space())?;
        let norm_pi_rho = linalg::trace_norm(&(self.pi.mat() * rho.mat()));
        let q = entropy::q_alpha(rho, &s, DivergenceType::Old, alpha)?;
        let first_bound = self.zeta.powf((1.0 - alpha) / 2.0) * q.sqrt();
        let inv = linalg::psd_pow(s.mat(), -1.0);
        let ph = self.pi_hat.mat();
        let second_lhs = linalg::trace(&(inv * ph * rho.mat() * rho.mat() * ph)).re;
        let second_bound = distinct_eigs(&s, DEFAULT_NU_TOL) as f64 * self.zeta;
        Ok(HayashiReport { norm_pi_rho, first_bound, second_lhs, second_bound })
    }

    /// Per-sample split used in the proof: returns
    /// `(‖T(U·ρ) − ω⊗ρ^R‖₁, ‖T(U·Πρ) − μ₁‖₁, ‖T(U·Π̂ρ) − μ₂‖₁)`.
    pub fn split_errors(&self, t: &KrausMap, rho: &DensityOp, u: &CMat) -> Result<(f64, f64, f64)> {
        let a = t.in_space().labels();
        let da = t.in_space().total_dim() as f64;
        let omega = t.apply(&LabeledOperator::identity(t.in_space().clone()).scale(1.0 / da))?;
        let piece = |p: &LabeledOperator| -> Result<f64> {
            let pr = p.mul(rho)?;
            let mu = pr.partial_trace(a)?.tensor(&omega)?;
            let out = t.apply(&pr.conjugate_local(u, a, t.in_space())?)?;
            Ok(linalg::trace_norm(out.sub(&mu)?.mat()))
        };
        let whole = LabeledOperator::identity(rho.space().clone());
        Ok((piece(&whole)?, piece(&self.pi)?, piece(&self.pi_hat)?))
    }
}

/// The proof's choice `ζ = (x/y)^{2/α}` for `min_ζ x ζ^{(1−α)/2} + y ζ^{1/2}`.
pub fn zeta_opt(x: f64, y: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(x > 0.0 && y > 0.0) {
        return domain(format!("zeta_opt needs x, y > 0, got {x}, {y}"));
    }
    let zeta = (x / y).powf(2.0 / alpha);
    Ok((zeta, x * zeta.powf((1.0 - alpha) / 2.0) + y * zeta.sqrt()))
}

/// Random coding over `M` pairs `(X_i, U_i)` with `X_i ~ p`.
#[derive(Clone, Debug)]
pub struct CqInstance {
    p: Vec<f64>,
    rho_x: Vec<DensityOp>,
    a: Vec<String>,
    m: usize,
    t: KrausMap,
    alpha: f64,
    dtype: DivergenceType,
    sigma_r: Option<DensityOp>,
    kappa_r: Option<DensityOp>,
}

fn check_distribution(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n || n == 0 {
        return Err(Error::Shape(format!("{} probabilities for {n} states", p.len())));
    }
    if p.iter().any(|&x| !(x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return domain("p must be a probability vector");
    }
    Ok(())
}

fn same_spaces(states: &[DensityOp]) -> Result<()> {
    for s in states {
        if !s.space().same_set(states[0].space()) {
            return Err(Error::Shape("all states must share one space".into()));
        }
        let tr = s.trace().re;
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::BadTrace(tr));
        }
    }
    Ok(())
}

impl CqInstance {
    pub fn new<S: AsRef<str>>(
        p: Vec<f64>,
        rho_x: Vec<DensityOp>,
        a: &[S],
        m: usize,
        t: KrausMap,
        alpha: f64,
        dtype: DivergenceType,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        check_distribution(&p, rho_x.len())?;
        same_spaces(&rho_x)?;
        if m == 0 {
            return domain("M must be at least 1");
        }
        let a: Vec<String> = a.iter().map(|s| s.as_ref().to_string()).collect();
        if !t.in_space().same_set(&rho_x[0].space().subspace(&a)?) {
            return Err(Error::Shape(format!("map input {:?} does not match {:?}", t.in_space().labels(), a)));
        }
        certified(&t)?;
        Ok(Self { p, rho_x, a, m, t, alpha, dtype, sigma_r: None, kappa_r: None })
    }

    pub fn with_sigma(mut self, s: DensityOp) -> Self {
        self.sigma_r = Some(s);
        self
    }

    pub fn with_kappa(mut self, k: DensityOp) -> Self {
        self.kappa_r = Some(k);
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `ρ^R = Σ p_x Tr_A ρ_x`
    pub fn rho_r(&self) -> Result<DensityOp> {
        average_state(&self.p, &self.rho_x.iter().map(|r| r.partial_trace(&self.a)).collect::<Result<Vec<_>>>()?)
    }
}

fn average_state(p: &[f64], states: &[DensityOp]) -> Result<DensityOp> {
    let mut acc = states[0].op().scale(p[0]);
    for (px, s) in p.iter().zip(states).skip(1) {
        acc = acc.add_scaled(s, *px)?;
    }
    DensityOp::unit(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct CqBoundReport {
    pub rhs: f64,
    pub factor: f64,
    /// Quantum term, absent when `|A| = 1`.
    pub quantum: Option<ExponentTerms>,
    /// Classical term, absent when `|X| = 1`.
    pub classical: Option<ExponentTerms>,
    pub lhs: Option<McEstimate>,
    pub slack: Option<f64>,
}

impl CqBoundReport {
    pub fn with_lhs(mut self, lhs: McEstimate) -> Self {
        self.slack = Some(self.rhs - lhs.mean);
        self.lhs = Some(lhs);
        self
    }
}

/// `D_α(Σ_x p_x|x⟩⟨x| ⊗ ρ_x ‖ Σ_x p_x|x⟩⟨x| ⊗ τ)` via `Q = Σ_x p_x Q_α(ρ_x‖τ)`.
fn cq_divergence(p: &[f64], states: &[LabeledOperator], tau: &LabeledOperator, dtype: DivergenceType, alpha: f64) -> Result<f64> {
    let mut q = 0.0;
    for (px, s) in p.iter().zip(states) {
        if *px > 0.0 {
            q += px * entropy::q_alpha(s, tau, dtype, alpha)?;
        }
    }
    Ok(if q.is_infinite() { f64::INFINITY } else { q.log2() / (alpha - 1.0) })
}

fn classical_terms(p: &[f64], rho_r: &[LabeledOperator], kappa: &DensityOp, m: usize, dtype: DivergenceType, alpha: f64) -> Result<ExponentTerms> {
    Ok(ExponentTerms {
        log_nu: (distinct_eigs(kappa, DEFAULT_NU_TOL) as f64).log2(),
        d_alpha_term: cq_divergence(p, rho_r, kappa, dtype, alpha)?,
        theta: 0.0,
        log_m: (m as f64).log2(),
    })
}

/// Classical-quantum bound: a quantum term (when `|A| ≠ 1`) plus a
/// classical covering term (when `|X| ≠ 1`). `σ^R` and `κ^R` default to `ρ^R`.
pub fn thm1_2_rhs(inst: &CqInstance) -> Result<CqBoundReport> {
    let factor = exponent_factor(inst.alpha);
    let rho_r = inst.rho_r()?;
    let sigma = inst.sigma_r.clone().unwrap_or_else(|| rho_r.clone());
    let kappa = inst.kappa_r.clone().unwrap_or_else(|| rho_r.clone());
    let quantum = if inst.t.in_space().total_dim() != 1 {
        let a_space = inst.rho_x[0].space().subspace(&inst.a)?;
        let full = LabeledOperator::identity(a_space).tensor(&sigma)?;
        let ops: Vec<LabeledOperator> = inst.rho_x.iter().map(|r| r.op().clone()).collect();
        Some(ExponentTerms {
            log_nu: (distinct_eigs(&sigma, DEFAULT_NU_TOL) as f64).log2(),
            d_alpha_term: cq_divergence(&inst.p, &ops, &full, inst.dtype, inst.alpha)?,
            theta: inst.t.theta()?.theta,
            log_m: (inst.m as f64).log2(),
        })
    } else {
        None
    };
    let classical = if inst.p.len() != 1 {
        let marg: Vec<LabeledOperator> =
            inst.rho_x.iter().map(|r| r.op().partial_trace(&inst.a)).collect::<Result<_>>()?;
        Some(classical_terms(&inst.p, &marg, &kappa, inst.m, inst.dtype, inst.alpha)?)
    } else {
        None
    };
    let rhs = quantum.map_or(0.0, |t| t.bound(factor)) + classical.map_or(0.0, |t| t.bound(factor));
    Ok(CqBoundReport { rhs, factor, quantum, classical, lhs: None, slack: None })
}

fn sample_index(p: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &px) in p.iter().enumerate() {
        acc += px;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Estimate of `E ‖(1/M) Σ_i T(U_i·ρ_{X_i}) − ω_T ⊗ ρ^R‖₁`.
pub fn mc_lhs_cq(inst: &CqInstance, n_samples: usize, seed: RngSeed) -> Result<McEstimate> {
    let size = inst.rho_x[0].dim().max(inst.rho_x[0].dim() / inst.t.in_space().total_dim() * inst.t.out_space().total_dim());
    if size > MC_DIM_LIMIT {
        return Err(Error::TooLarge { size, limit: MC_DIM_LIMIT });
    }
    let a_space = inst.t.in_space().clone();
    let da = a_space.total_dim();
    let omega = inst.t.apply(&LabeledOperator::identity(a_space.clone()).scale(1.0 / da as f64))?;
    let target = inst.rho_r()?.op().tensor(&omega)?;
    let m = inst.m;
    twirl::mc_average_rng(
        |rng| {
            let mut acc: Option<LabeledOperator> = None;
            for _ in 0..m {
                let x = sample_index(&inst.p, rng);
                let u = twirl::haar_matrix(da, rng);
                let rotated = inst.rho_x[x].conjugate_local(&u, a_space.labels(), &a_space).expect("shape");
                let out = inst.t.apply(&rotated).expect("shape");
                acc = Some(match acc {
                    None => out,
                    Some(s) => s.add(&out).expect("shape"),
                });
            }
            let avg = acc.expect("M >= 1").scale(1.0 / m as f64);
            avg.sub(&target).expect("shape").trace_norm()
        },
        n_samples,
        seed,
    )
}

/// Covering bound `4·2^{c[log ν_κ + D_α(ρ^{XR}‖ρ^X⊗κ) − log M]}` with a
/// Monte Carlo estimate of `E‖(1/M) Σ ρ_{X_i} − ρ^R‖₁`. `κ` defaults to `ρ^R`.
pub fn covering_bound(
    p: &[f64],
    rho_x: &[DensityOp],
    m: usize,
    alpha: f64,
    dtype: DivergenceType,
    kappa: Option<&DensityOp>,
    n_samples: usize,
    seed: RngSeed,
) -> Result<CqBoundReport> {
    check_alpha(alpha)?;
    check_distribution(p, rho_x.len())?;
    same_spaces(rho_x)?;
    if m == 0 {
        return domain("M must be at least 1");
    }
    let mean = average_state(p, rho_x)?;
    let kappa = kappa.cloned().unwrap_or_else(|| mean.clone());
    let factor = exponent_factor(alpha);
    let ops: Vec<LabeledOperator> = rho_x.iter().map(|r| r.op().clone()).collect();
    let terms = classical_terms(p, &ops, &kappa, m, dtype, alpha)?;
    let lhs = twirl::mc_average_rng(
        |rng| {
            let mut acc = LabeledOperator::zeros(mean.space().clone());
            for _ in 0..m {
                acc = acc.add(&ops[sample_index(p, rng)]).expect("shape");
            }
            acc.scale(1.0 / m as f64).sub(&mean).expect("shape").trace_norm()
        },
        n_samples,
        seed,
    )?;
    Ok(CqBoundReport { rhs: terms.bound(factor), factor, quantum: None, classical: Some(terms), lhs: None, slack: None }.with_lhs(lhs))
}

/// Labels `L[1..n]` for `n > 1`, `L` itself otherwise.
pub fn n_copy_labels<S: AsRef<str>>(labels: &[S], n: usize) -> Vec<String> {
    if n == 1 {
        labels.iter().map(|s| s.as_ref().to_string()).collect()
    } else {
        copy_labels(labels, n)
    }
}

/// `SubsystemSpace` for `n` copies of `space`, unchanged when `n = 1`.
pub fn n_copy_space(space: &SubsystemSpace, n: usize) -> SubsystemSpace {
    if n == 1 {
        space.clone()
    } else {
        space.copies(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{maximally_mixed, PartialIsom};
    use crate::twirl::{random_density, random_pure};

    fn sp(l: &str, d: usize) -> SubsystemSpace {
        SubsystemSpace::single(l, d).unwrap()
    }

    fn ar(da: usize, dr: usize) -> SubsystemSpace {
        SubsystemSpace::new(&["A", "R"], &[da, dr]).unwrap()
    }

    #[test]
    fn decoupled_input_has_zero_lhs() {
        let pure_r = DensityOp::diag(sp("R", 2), &[1.0, 0.0]).unwrap();
        let rho = maximally_mixed(2, "A").unwrap().tensor(&pure_r).unwrap();
        let t = KrausMap::full_trace(sp("A", 2));
        let inst = DecouplingInstance::new(rho, &["A"], t, 1.5, DivergenceType::Sandwiched)
            .unwrap()
            .with_sigma(pure_r)
            .unwrap();
        let b = thm1_rhs(&inst).unwrap();
        assert!(b.rhs.is_finite() && b.rhs >= 0.0);
        assert_eq!(b.terms.log_nu, 1.0); // {0, 1}
        let lhs = mc_lhs(&inst, 50, RngSeed::new(3)).unwrap();
        assert!(lhs.mean < 1e-12 && lhs.stderr < 1e-12);
    }

    #[test]
    fn prefactor_limit_at_alpha_one() {
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(1)).unwrap();
        let t = KrausMap::partial_trace(&SubsystemSpace::single("A", 2).unwrap(), &["A"]).unwrap();
        let inst = DecouplingInstance::new(rho, &["A"], t, 1.0 + 1e-7, DivergenceType::Old).unwrap();
        assert!((thm1_rhs(&inst).unwrap().rhs - 4.0).abs() < 1e-5);
    }

    // independent oracle: D_α by eigendecomposition in plain nalgebra, σ over a
    // Bloch grid, Θ over a grid of qubit θ
    fn oracle_d(rho: &CMat, sigma_r: &CMat, alpha: f64) -> f64 {
        let full = linalg::kron(&CMat::identity(2, 2), sigma_r);
        let g = (1.0 - alpha) / (2.0 * alpha);
        let pw = |m: &CMat, p: f64| {
            let e = m.clone().symmetric_eigen();
            let d = e.eigenvalues.map(|l| if l > 1e-13 { l.powf(p) } else { 0.0 });
            &e.eigenvectors * CMat::from_diagonal(&d.map(linalg::r)) * e.eigenvectors.adjoint()
        };
        let s = pw(&full, g);
        let inner = &s * rho * &s;
        let q: f64 = inner.symmetric_eigen().eigenvalues.iter().map(|l| l.max(0.0).powf(alpha)).sum();
        q.log2() / (alpha - 1.0)
    }

    fn bloch(x: f64, y: f64, z: f64) -> CMat {
        CMat::from_row_slice(2, 2, &[linalg::r(0.5 + z / 2.0), linalg::c(x / 2.0, -y / 2.0), linalg::c(x / 2.0, y / 2.0), linalg::r(0.5 - z / 2.0)])
    }

    fn grid_min(f: impl Fn(&CMat) -> f64) -> f64 {
        let mut best = f64::INFINITY;
        let k = 40;
        for i in 0..=k {
            for j in 0..=k {
                for l in 0..=k {
                    let (x, y, z) = (
                        -1.0 + 2.0 * i as f64 / k as f64,
                        -1.0 + 2.0 * j as f64 / k as f64,
                        -1.0 + 2.0 * l as f64 / k as f64,
                    );
                    if x * x + y * y + z * z < 0.995 {
                        best = best.min(f(&bloch(x, y, z)));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn rhs_matches_dual_path_oracle() {
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(17)).unwrap();
        let t = KrausMap::random_cptp(sp("A", 2), sp("E", 2), 2, RngSeed::new(5)).unwrap();
        let alpha = 1.5;
        let inst = DecouplingInstance::new(rho.clone(), &["A"], t.clone(), alpha, DivergenceType::Sandwiched).unwrap();
        let b = thm1_rhs(&inst).unwrap();
        let d_grid = grid_min(|s| oracle_d(rho.mat(), s, alpha));
        let choi = t.choi().unwrap();
        let m = crate::channels::theta_operator(&choi).unwrap();
        let theta_grid = grid_min(|th| {
            let inv = th.clone().try_inverse().unwrap();
            linalg::trace(&(m.mat() * inv)).re.log2()
        });
        assert!((b.terms.d_alpha_term - d_grid).abs() < 5e-3, "{} vs {}", b.terms.d_alpha_term, d_grid);
        assert!((b.terms.theta - theta_grid).abs() < 5e-3);
        // full-rank optimizer has two distinct eigenvalues generically
        let want = 4.0 * (exponent_factor(alpha) * (1.0 + d_grid + theta_grid)).exp2();
        assert!((b.rhs / want - 1.0).abs() < 2e-3);
    }

    #[test]
    fn iid_specializes_and_decays() {
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(8)).unwrap();
        let t1 = KrausMap::full_trace(sp("A", 2));
        let one = DecouplingInstance::new(rho.clone(), &["A"], t1.clone(), 1.5, DivergenceType::Sandwiched).unwrap();
        let a = thm1_rhs(&one).unwrap();
        let b = thm1_rhs_iid(&one).unwrap();
        assert!((a.terms.d_alpha_term - b.terms.d_alpha_term).abs() < 1e-8);
        assert_eq!(b.terms.log_nu, 2.0);
        assert_eq!(a.terms.theta, b.terms.theta);

        // H_α(A|R) = 1 for a maximally mixed A in product with R
        let prod = maximally_mixed(2, "A").unwrap().tensor(&random_density(&sp("R", 2), 2, RngSeed::new(2)).unwrap()).unwrap();
        let rhs = |n: usize| {
            let space = n_copy_space(&sp("A", 2), n);
            let t = KrausMap::full_trace(space);
            let i = DecouplingInstance::iid(prod.clone(), &["A"], n, t, 1.5, DivergenceType::Sandwiched).unwrap();
            thm1_rhs_iid(&i).unwrap().rhs
        };
        let v: Vec<f64> = [2, 3, 4, 5].iter().map(|&n| rhs(n)).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn compression_bound_matches_closed_form() {
        let psi = random_pure(&ar(2, 2), RngSeed::new(4)).unwrap().projector();
        let alpha = 1.5;
        let p = RenyiParams::sandwiched(alpha).unwrap();
        let h_tilde = entropy::renyi_entropy(&psi.reduce_to(&["A"]).unwrap(), p.dual_alpha()).unwrap();
        for (n, db) in [(2usize, 3usize), (3, 5)] {
            let an = n_copy_space(&sp("A", 2), n);
            let w = PartialIsom::truncation(an.clone(), sp("B", db));
            let t = KrausMap::full_trace(sp("B", db)).compose(&KrausMap::t_w(&w).unwrap()).unwrap();
            let inst = DecouplingInstance::iid(psi.clone(), &["A"], n, t, alpha, DivergenceType::Sandwiched).unwrap();
            let got = thm1_rhs_iid(&inst).unwrap().rhs;
            let nf = n as f64;
            let want = 4.0 * (exponent_factor(alpha) * (2.0 * (nf + 1.0).log2() + nf * h_tilde - (db as f64).log2())).exp2();
            assert!((got / want - 1.0).abs() < 1e-7, "{got} vs {want}");
        }
    }

    #[test]
    fn product_sigma_is_additive() {
        let rho = random_density(&ar(2, 2), 3, RngSeed::new(21)).unwrap();
        let sigma = random_density(&sp("R", 2), 2, RngSeed::new(22)).unwrap();
        let n = 2;
        let t = KrausMap::full_trace(n_copy_space(&sp("A", 2), n));
        let iid = DecouplingInstance::iid(rho.clone(), &["A"], n, t.clone(), 1.5, DivergenceType::Old)
            .unwrap()
            .with_sigma(sigma.clone())
            .unwrap();
        let rn = rho.tensor_power(n).unwrap();
        let single = DecouplingInstance::new(rn, &copy_labels(&["A"], n), t, 1.5, DivergenceType::Old)
            .unwrap()
            .with_sigma(sigma.tensor_power(n).unwrap())
            .unwrap();
        let a = thm1_rhs_iid(&iid).unwrap().terms.d_alpha_term;
        let b = thm1_rhs(&single).unwrap().terms.d_alpha_term;
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn lhs_below_rhs_and_clifford_variant() {
        for s in 0..4u64 {
            let rho = random_density(&ar(2, 2), 4, RngSeed::new(100 + s)).unwrap();
            let t = KrausMap::random_cptp(sp("A", 2), sp("E", 2), 1 + s as usize % 3, RngSeed::new(200 + s)).unwrap();
            let inst = DecouplingInstance::new(rho, &["A"], t, 1.25 + 0.25 * s as f64, DivergenceType::Sandwiched).unwrap();
            let rhs = thm1_rhs(&inst).unwrap().rhs;
            let lhs = mc_lhs(&inst, 400, RngSeed::new(s)).unwrap();
            assert!(lhs.mean <= rhs + 3.0 * lhs.stderr);
            assert!(clifford_lhs(&inst).unwrap() <= rhs);
        }
    }

    #[test]
    fn oversize_is_rejected() {
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(1)).unwrap();
        let t = KrausMap::full_trace(n_copy_space(&sp("A", 2), 7));
        let inst = DecouplingInstance::iid(rho, &["A"], 7, t, 2.0, DivergenceType::Old).unwrap();
        assert_eq!(inst.dense_size(), 16384);
        assert!(matches!(mc_lhs(&inst, 10, RngSeed::new(0)), Err(Error::TooLarge { size: 16384, .. })));
    }

    #[test]
    fn instance_validation() {
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(1)).unwrap();
        let t = KrausMap::full_trace(sp("A", 2));
        assert!(DecouplingInstance::new(rho.clone(), &["A"], t.clone(), 1.0, DivergenceType::Old).is_err());
        assert!(DecouplingInstance::new(rho.clone(), &["A"], t.clone(), 2.5, DivergenceType::Old).is_err());
        let bad = t.scaled(3.0).unwrap();
        assert!(DecouplingInstance::new(rho.clone(), &["A"], bad, 1.5, DivergenceType::Old).is_err());
        let scaled = KrausMap::full_trace(sp("A", 2)).scaled(1.0).unwrap();
        assert!(DecouplingInstance::new(rho, &["A"], scaled, 1.5, DivergenceType::Old).is_ok());
    }

    #[test]
    fn corollary_single_instance() {
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(31)).unwrap();
        let t = KrausMap::random_cptp(sp("A", 2), sp("E", 2), 2, RngSeed::new(32)).unwrap();
        let inst = DecouplingInstance::new(rho, &["A"], t, 1.5, DivergenceType::Sandwiched).unwrap();
        let w = corollary1_search(&[inst], 20, RngSeed::new(9)).unwrap();
        assert!(!w.anomaly && w.tries <= 5);
        assert!(w.errors[0] <= w.bounds[0]);
    }

    #[test]
    fn projector_pair_limits_and_bounds() {
        let rho = random_density(&sp("A", 2), 2, RngSeed::new(1)).unwrap();
        let sigma = random_density(&sp("A", 2), 2, RngSeed::new(2)).unwrap();
        let huge = projector_pair(&rho, &sigma, 1e9).unwrap();
        assert!(huge.pi.mat().norm() < 1e-12);
        let tiny = projector_pair(&rho, &sigma, 1e-12).unwrap();
        assert!(tiny.pi_hat.mat().norm() < 1e-12);
        assert!(projector_pair(&rho, &sigma, 0.0).is_err());
        for z in [0.1, 1.0, 10.0] {
            let pp = projector_pair(&rho, &sigma, z).unwrap();
            let sq = pp.pi.mat() * pp.pi.mat();
            assert!((sq - pp.pi.mat()).norm() < 1e-10);
            for a in [1.5, 2.0] {
                let h = pp.hayashi(&rho, &sigma, a).unwrap();
                assert!(h.first_slack() >= -1e-9 && h.second_slack() >= -1e-9, "{h:?}");
            }
        }
    }

    #[test]
    fn zeta_choice() {
        let (z, v) = zeta_opt(3.0, 3.0, 2.0).unwrap();
        assert!((z - 1.0).abs() < 1e-15 && (v - 6.0).abs() < 1e-12);
        for &(x, y, a) in &[(1.0, 0.2, 1.5), (0.3, 5.0, 1.25), (2.0, 2.0, 1.9)] {
            let (_, v) = zeta_opt(x, y, a).unwrap();
            let grid = (0..4001)
                .map(|i| 10f64.powf(-10.0 + 20.0 * i as f64 / 4000.0))
                .map(|z| x * z.powf((1.0 - a) / 2.0) + y * z.sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(v >= grid * (1.0 - 1e-9) && v / grid <= 2f64.powf(1.0 / a) + 1e-6);
            let (z1, _) = zeta_opt(x, y, a).unwrap();
            let (z2, _) = zeta_opt(7.0 * x, y, a).unwrap();
            assert!((z2 / z1 - 7f64.powf(2.0 / a)).abs() < 1e-9 * z2 / z1);
        }
        assert!(zeta_opt(0.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn proof_split_is_a_triangle_inequality() {
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(41)).unwrap();
        let t = KrausMap::random_cptp(sp("A", 2), sp("E", 2), 2, RngSeed::new(42)).unwrap();
        let sigma = LabeledOperator::identity(sp("A", 2)).tensor(&random_density(&sp("R", 2), 2, RngSeed::new(43)).unwrap()).unwrap();
        let pp = projector_pair(&rho, &sigma, 1.0).unwrap();
        for s in 0..10 {
            let u = twirl::haar_matrix(2, &mut RngSeed::new(s).rng());
            let (all, a, b) = pp.split_errors(&t, &rho, &u).unwrap();
            assert!(all <= a + b + 1e-9);
        }
    }

    #[test]
    fn cq_indicators_and_mc() {
        let t = KrausMap::full_trace(sp("A", 2));
        let rho = random_density(&ar(2, 2), 4, RngSeed::new(1)).unwrap();
        let one = CqInstance::new(vec![1.0], vec![rho.clone()], &["A"], 4, t.clone(), 1.5, DivergenceType::Sandwiched).unwrap();
        let r = thm1_2_rhs(&one).unwrap();
        assert!(r.classical.is_none() && r.quantum.is_some());

        let rx: Vec<DensityOp> = (0..2).map(|k| random_density(&ar(2, 2), 4, RngSeed::new(10 + k)).unwrap()).collect();
        let mut last = f64::INFINITY;
        for m in [4, 16, 64] {
            let inst = CqInstance::new(vec![0.3, 0.7], rx.clone(), &["A"], m, t.clone(), 2.0, DivergenceType::Sandwiched).unwrap();
            let b = thm1_2_rhs(&inst).unwrap();
            let lhs = mc_lhs_cq(&inst, 200, RngSeed::new(m as u64)).unwrap();
            assert!(lhs.mean <= b.rhs + 3.0 * lhs.stderr);
            assert!(lhs.mean < last);
            last = lhs.mean;
        }
    }

    #[test]
    fn covering_examples() {
        let s = random_density(&sp("R", 2), 2, RngSeed::new(3)).unwrap();
        let same = covering_bound(&[0.5, 0.5], &[s.clone(), s.clone()], 4, 1.5, DivergenceType::Old, None, 20, RngSeed::new(1)).unwrap();
        assert!(same.lhs.unwrap().mean < 1e-14);

        let states: Vec<DensityOp> = (0..3).map(|k| random_density(&sp("R", 2), 1, RngSeed::new(50 + k)).unwrap()).collect();
        let p = [0.2, 0.3, 0.5];
        let mean = average_state(&p, &states).unwrap();
        let exact: f64 = p.iter().zip(&states).map(|(px, s)| px * s.sub(&mean).unwrap().trace_norm()).sum();
        let r = covering_bound(&p, &states, 1, 2.0, DivergenceType::Sandwiched, None, 4000, RngSeed::new(2)).unwrap();
        let lhs = r.lhs.unwrap();
        assert!((lhs.mean - exact).abs() < 4.0 * lhs.stderr + 1e-12);
        assert!(lhs.mean <= r.rhs + 3.0 * lhs.stderr);
    }
}
