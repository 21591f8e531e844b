//! Haar sampling, the qubit Clifford group, closed-form twirl moments and
//! seeded Monte Carlo averaging.
//!
//! Sample `i` of any Monte Carlo run draws from stream `i` of a ChaCha8
//! generator keyed by the master seed, and partial sums are combined in a
//! fixed order, so results do not depend on the rayon thread count.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::KrausMap;
use crate::qmat::{linalg, q_map, CMat, CVec, DensityOp, LabeledOperator, PureState, SubsystemSpace, C64};
use crate::{domain, Error, Result};

const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_index: u64,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngSeed {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed, stream_index: 0 }
    }

    pub fn with_stream(self, stream_index: u64) -> Self {
        Self { stream_index, ..self }
    }

    /// Independent child seed, e.g. one per grid point or per instance.
    pub fn derive(self, tag: u64) -> Self {
        let m = splitmix64(self.master_seed ^ splitmix64(self.stream_index.wrapping_add(0x5851_F42D_4C95_7F2D)));
        Self::new(splitmix64(m ^ splitmix64(tag)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_index);
        r
    }

    /// Master seed whose streams `0..n` feed the samples of one run.
    fn run_key(self) -> u64 {
        if self.stream_index == 0 {
            self.master_seed
        } else {
            self.derive(0).master_seed
        }
    }
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar unitary: QR of a Ginibre matrix with R's diagonal phases moved into Q.
pub fn haar_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        if z.norm() > 0.0 {
            let ph = z / z.norm();
            q.column_mut(j).iter_mut().for_each(|v| *v *= ph);
        }
    }
    q
}

pub fn sample_haar(space: &SubsystemSpace, seed: RngSeed) -> LabeledOperator {
    let u = haar_matrix(space.total_dim(), &mut seed.rng());
    LabeledOperator::new(space.clone(), u).expect("square by construction")
}

/// `G G† / Tr` for a `d × rank` Ginibre `G`.
pub fn random_density(space: &SubsystemSpace, rank: usize, seed: RngSeed) -> Result<DensityOp> {
    let d = space.total_dim();
    let g = ginibre(d, rank.max(1), &mut seed.rng());
    DensityOp::normalized(&LabeledOperator::with_hint(space.clone(), &g * g.adjoint(), Some(true)))
}

pub fn random_pure(space: &SubsystemSpace, seed: RngSeed) -> Result<PureState> {
    let g = ginibre(space.total_dim(), 1, &mut seed.rng());
    let n = g.norm();
    PureState::new(space.clone(), CVec::from_column_slice(g.unscale(n).as_slice()))
}

/// The 24 single-qubit Cliffords, one representative per phase class.
pub fn clifford_qubit() -> Vec<CMat> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let h = CMat::from_row_slice(2, 2, &[linalg::r(s2), linalg::r(s2), linalg::r(s2), linalg::r(-s2)]);
    let s = CMat::from_row_slice(2, 2, &[linalg::r(1.0), linalg::r(0.0), linalg::r(0.0), linalg::c(0.0, 1.0)]);
    let gens = [h, s];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut frontier = vec![CMat::identity(2, 2)];
    seen.insert(phase_key(&frontier[0]));
    out.push(frontier[0].clone());
    while let Some(g) = frontier.pop() {
        for k in &gens {
            let next = canonical_phase(&(k * &g));
            if seen.insert(phase_key(&next)) {
                out.push(next.clone());
                frontier.push(next);
            }
        }
    }
    out
}

fn canonical_phase(u: &CMat) -> CMat {
    let pivot = u.iter().copied().find(|z| z.norm() > 0.3).unwrap_or(C64::new(1.0, 0.0));
    let ph = pivot.conj() / pivot.norm();
    u.map(|z| z * ph)
}

fn phase_key(u: &CMat) -> Vec<(i64, i64)> {
    u.iter().map(|z| ((z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64)).collect()
}

#[derive(Clone, Debug)]
pub enum EnsembleKind {
    Haar,
    CliffordQubit(Vec<CMat>),
    Explicit(Vec<CMat>),
}

#[derive(Clone, Debug)]
pub struct UnitaryEnsemble {
    kind: EnsembleKind,
    dim: usize,
}

impl UnitaryEnsemble {
    pub fn haar(dim: usize) -> Self {
        Self { kind: EnsembleKind::Haar, dim: dim.max(1) }
    }

    pub fn clifford_qubit() -> Self {
        Self { kind: EnsembleKind::CliffordQubit(clifford_qubit()), dim: 2 }
    }

    pub fn explicit(unitaries: Vec<CMat>) -> Result<Self> {
        let Some(first) = unitaries.first() else {
            return domain("explicit ensemble is empty");
        };
        let d = first.nrows();
        for u in &unitaries {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::Shape(format!("ensemble element is {}x{}, expected {d}x{d}", u.nrows(), u.ncols())));
            }
            let dev = (u.ad_mul(u) - CMat::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if dev > 1e-10 {
                return domain(format!("ensemble element is not unitary (deviation {dev:.3e})"));
            }
        }
        Ok(Self { kind: EnsembleKind::Explicit(unitaries), dim: d })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &EnsembleKind {
        &self.kind
    }

    /// Elements of a finite ensemble; `None` for Haar.
    pub fn elements(&self) -> Option<&[CMat]> {
        match &self.kind {
            EnsembleKind::Haar => None,
            EnsembleKind::CliffordQubit(v) | EnsembleKind::Explicit(v) => Some(v),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        match self.elements() {
            None => haar_matrix(self.dim, rng),
            Some(v) => v[rng.random_range(0..v.len())].clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate<T = f64> {
    pub mean: T,
    pub stderr: f64,
    #[serde(rename = "n")]
    pub n_samples: usize,
}

fn chunk_ranges(n: usize) -> Vec<std::ops::Range<usize>> {
    (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect()
}

/// Scalar Monte Carlo mean with standard error; sample `i` uses stream `i`.
pub fn mc_average<F>(f: F, ens: &UnitaryEnsemble, n: usize, seed: RngSeed) -> Result<McEstimate>
where
    F: Fn(&CMat) -> f64 + Sync,
{
    if n < 2 {
        return domain(format!("Monte Carlo needs at least 2 samples, got {n}"));
    }
    mc_average_rng(|rng| f(&ens.sample(rng)), n, seed)
}

/// Like [`mc_average`] but hands each sample its own generator, for
/// estimators that draw more than one unitary (or classical data) per sample.
pub fn mc_average_rng<F>(f: F, n: usize, seed: RngSeed) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if n < 2 {
        return domain(format!("Monte Carlo needs at least 2 samples, got {n}"));
    }
    let key = RngSeed::new(seed.run_key());
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| f(&mut key.with_stream(i as u64).rng()))
        .collect();
    Ok(summarize(&values))
}

fn summarize(values: &[f64]) -> McEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    McEstimate { mean, stderr: (var / n as f64).sqrt(), n_samples: n }
}

/// Operator-valued Monte Carlo mean; stderr is the Frobenius-norm analogue.
pub fn mc_average_op<F>(f: F, ens: &UnitaryEnsemble, n: usize, seed: RngSeed) -> Result<McEstimate<LabeledOperator>>
where
    F: Fn(&CMat) -> LabeledOperator + Sync,
{
    if n < 2 {
        return domain(format!("Monte Carlo needs at least 2 samples, got {n}"));
    }
    let key = RngSeed::new(seed.run_key());
    let parts: Vec<(LabeledOperator, f64)> = chunk_ranges(n)
        .into_par_iter()
        .map(|range| {
            let mut acc: Option<LabeledOperator> = None;
            let mut sq = 0.0;
            for i in range {
                let x = f(&ens.sample(&mut key.with_stream(i as u64).rng()));
                sq += x.mat().norm_squared();
                acc = Some(match acc {
                    None => x,
                    Some(a) => a.add(&x).expect("samples share a space"),
                });
            }
            (acc.expect("nonempty chunk"), sq)
        })
        .collect();
    let mut it = parts.into_iter();
    let (mut sum, mut sq) = it.next().expect("n >= 2");
    for (p, s) in it {
        sum = sum.add(&p)?;
        sq += s;
    }
    let nf = n as f64;
    let mean = sum.scale(1.0 / nf);
    let var = ((sq - nf * mean.mat().norm_squared()) / (nf - 1.0)).max(0.0);
    Ok(McEstimate { mean, stderr: (var / nf).sqrt(), n_samples: n })
}

/// Uniform average over a finite ensemble, in element order.
pub fn exact_average<F>(f: F, ens: &UnitaryEnsemble) -> Result<f64>
where
    F: Fn(&CMat) -> f64 + Sync,
{
    let Some(els) = ens.elements() else {
        return domain("exact averaging needs a finite ensemble");
    };
    let v: Vec<f64> = els.par_iter().map(&f).collect();
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

pub fn exact_average_op<F>(f: F, ens: &UnitaryEnsemble) -> Result<LabeledOperator>
where
    F: Fn(&CMat) -> LabeledOperator + Sync,
{
    let Some(els) = ens.elements() else {
        return domain("exact averaging needs a finite ensemble");
    };
    let v: Vec<LabeledOperator> = els.par_iter().map(&f).collect();
    let mut it = v.into_iter();
    let mut acc = it.next().expect("nonempty ensemble");
    for x in it {
        acc = acc.add(&x)?;
    }
    Ok(acc.scale(1.0 / els.len() as f64))
}

/// `E_U[(U⊗1) M (U⊗1)†] = π^A ⊗ Tr_A M`, ordered like `m`.
pub fn twirl_moment1<S: AsRef<str>>(m: &LabeledOperator, a: &[S]) -> Result<LabeledOperator> {
    let sub = m.space().subspace(a)?;
    let da = sub.total_dim() as f64;
    let pi = LabeledOperator::identity(sub).scale(1.0 / da);
    pi.tensor(&m.partial_trace(a)?)?.aligned_to(m.space())
}

/// `E_U{UσU†(X⊗W)Uσ†U†}` in closed form; `A` is `x`'s space and `R` is `w`'s.
pub fn twirl_moment2(sigma: &LabeledOperator, x: &LabeledOperator, w: &LabeledOperator) -> Result<LabeledOperator> {
    let (a, r) = (x.space(), w.space());
    let ar = a.join(r)?;
    if !ar.same_set(sigma.space()) {
        return Err(Error::Shape(format!(
            "σ lives on {:?} but X ⊗ W covers {:?}",
            sigma.space().labels(),
            ar.labels()
        )));
    }
    let da = a.total_dim();
    if da < 2 {
        return domain("second twirl moment needs |A| >= 2");
    }
    let s = sigma.aligned_to(&ar)?;
    let dr = r.total_dim();
    let sigma_r = linalg::partial_trace_split(s.mat(), &ar.split(r.labels())?);
    let lambda = &sigma_r * w.mat() * sigma_r.adjoint();
    let inner = s.mat() * linalg::kron(&CMat::identity(da, da), w.mat()) * s.mat().adjoint();
    let upsilon = linalg::partial_trace_split(&inner, &ar.split(r.labels())?);
    let daf = da as f64;
    let first = linalg::kron(x.mat(), &(lambda.scale(daf) - &upsilon));
    let second = linalg::kron(&CMat::identity(da, da), &(upsilon.scale(daf) - &lambda)) * linalg::trace(x.mat());
    let out = (first + second).unscale(daf * (daf * daf - 1.0));
    debug_assert_eq!(out.nrows(), da * dr);
    LabeledOperator::new(ar, out)?.aligned_to(sigma.space())
}

#[derive(Clone, Debug)]
pub struct SecondMoment {
    /// `E{ΔΔ†}` on `E ⊗ R`.
    pub exact: LabeledOperator,
    /// `(|A|²/(|A|²−1)) Tr_{A′}(ω²) ⊗ Tr_A(σσ†)`.
    pub upper_bound: LabeledOperator,
}

/// Exact `E{ΔΔ†}` for `Δ = T(U·σ) − ω^E ⊗ σ^R`, with `A` the map's input.
pub fn second_moment_delta(t: &KrausMap, sigma: &LabeledOperator) -> Result<SecondMoment> {
    let a = t.in_space().labels();
    let da = t.in_space().total_dim();
    if da < 2 {
        return domain("second moment of Δ needs |A| >= 2");
    }
    let choi = t.choi()?;
    let q_omega = q_map(&choi.op, &choi.in_labels)?;
    let q_sigma = q_map(sigma, a)?;
    let d2 = (da * da) as f64;
    let exact = q_omega.tensor(&q_sigma)?.scale(1.0 / (d2 - 1.0));
    let m = crate::channels::theta_operator(&choi)?;
    let ss = LabeledOperator::new(sigma.space().clone(), sigma.mat() * sigma.mat().adjoint())?.partial_trace(a)?;
    let upper_bound = m.tensor(&ss)?.scale(d2 / (d2 - 1.0));
    Ok(SecondMoment { exact, upper_bound })
}

/// `Δ = T(UσU†) − ω^E ⊗ σ^R` on `E ⊗ R`, for sampling.
pub fn delta(t: &KrausMap, sigma: &LabeledOperator, u: &CMat) -> Result<LabeledOperator> {
    let a = t.in_space().labels();
    let rotated = sigma.conjugate_local(u, a, t.in_space())?;
    let out = t.apply(&rotated)?;
    let omega = t.apply(&LabeledOperator::identity(t.in_space().clone()).scale(1.0 / t.in_space().total_dim() as f64))?;
    let target = omega.tensor(&sigma.partial_trace(a)?)?;
    out.sub(&target)?.aligned_to(target.space())
}
