//! Kraus maps, Choi matrices and the Θ functional.
//!
//! `Θ(T) = −H₂(A′|E)` of the Choi state, evaluated in closed form:
//! with `M = Tr_{A′} ω²`, `2^Θ = (Tr √M)²` and the minimizer is `√M / Tr √M`.

use serde::{Deserialize, Serialize};

use crate::qmat::{linalg, CMat, DensityOp, LabeledOperator, LowRank, PartialIsom, SubsystemSpace, C64};
use crate::twirl::{self, RngSeed};
use crate::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TpClass {
    Cptp,
    CpTraceNonincreasing,
    CpGeneral,
}

/// Completely positive map `in_space -> out_space` given by Kraus operators.
#[derive(Clone, Debug)]
pub struct KrausMap {
    in_space: SubsystemSpace,
    out_space: SubsystemSpace,
    kraus: Vec<CMat>,
    tp_class: TpClass,
}

#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    /// Operator on `out ⊗ in′`, labels of the input primed.
    pub op: LabeledOperator,
    pub in_labels: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ThetaReport {
    pub theta: f64,
    pub optimizer: DensityOp,
    pub closed_form_used: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class1Verdict {
    YesCptp,
    YesTraceCondition,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct Class1Report {
    pub verdict: Class1Verdict,
    /// Largest `(mean − ‖σ‖₁)/stderr` seen in the sampled spot check.
    pub worst_z: f64,
    pub violated: bool,
}

pub fn prime(label: &str) -> String {
    format!("{label}'")
}

impl KrausMap {
    pub fn new(in_space: SubsystemSpace, out_space: SubsystemSpace, kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return domain("a Kraus map needs at least one operator");
        }
        let (din, dout) = (in_space.total_dim(), out_space.total_dim());
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {dout}x{din}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let tp_class = classify(&kraus, din);
        Ok(Self { in_space, out_space, kraus, tp_class })
    }

    pub fn in_space(&self) -> &SubsystemSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &SubsystemSpace {
        &self.out_space
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn tp_class(&self) -> TpClass {
        self.tp_class
    }

    pub fn identity(space: SubsystemSpace) -> Self {
        let n = space.total_dim();
        Self::new(space.clone(), space, vec![CMat::identity(n, n)]).expect("identity map")
    }

    /// Trace over the whole input, output is the trivial space.
    pub fn full_trace(space: SubsystemSpace) -> Self {
        let n = space.total_dim();
        let kraus = (0..n).map(|i| CMat::from_fn(1, n, |_, j| linalg::r((i == j) as u8 as f64))).collect();
        Self::new(space, SubsystemSpace::trivial(), kraus).expect("trace map")
    }

    /// Trace over `traced`; the remaining labels pass through in order.
    pub fn partial_trace<S: AsRef<str>>(space: &SubsystemSpace, traced: &[S]) -> Result<Self> {
        let out = space.without(traced)?;
        let split = space.split(out.labels())?;
        let (dk, dt) = (split.sel.len(), split.rest.len());
        let kraus = (0..dt)
            .map(|t| {
                let mut k = CMat::zeros(dk, space.total_dim());
                for (i, &o) in split.sel.iter().enumerate() {
                    k[(i, o + split.rest[t])] = linalg::r(1.0);
                }
                k
            })
            .collect();
        Self::new(space.clone(), out, kraus)
    }

    /// `T_W(σ) = (|A|/|B|) WσW†` for a full-rank partial isometry with `|A| ≥ |B|`.
    pub fn t_w(w: &PartialIsom) -> Result<Self> {
        let (da, db) = (w.domain().total_dim(), w.codomain().total_dim());
        if da < db {
            return domain(format!("T_W needs |A| >= |B|, got {da} < {db}"));
        }
        if !w.is_full_rank() {
            return Err(Error::NotPartialIsometry("T_W needs a full-rank partial isometry".into()));
        }
        let k = w.mat().scale((da as f64 / db as f64).sqrt());
        Self::new(w.domain().clone(), w.codomain().clone(), vec![k])
    }

    /// `C_W(ρ) = WρW† + Tr[(1 − W†W)ρ] π^B`.
    pub fn compressive(w: &PartialIsom) -> Result<Self> {
        let (da, db) = (w.domain().total_dim(), w.codomain().total_dim());
        if db > da {
            return domain(format!("compressive map needs |B| <= |A|, got {db} > {da}"));
        }
        if !w.is_full_rank() {
            return Err(Error::NotPartialIsometry("compressive map needs a full-rank partial isometry".into()));
        }
        let mut kraus = vec![w.mat().clone()];
        let kernel = linalg::support_projector(&(CMat::identity(da, da) - w.mat().ad_mul(w.mat())));
        let (vals, vecs) = linalg::eigh(&kernel);
        let s = 1.0 / (db as f64).sqrt();
        for (k, &l) in vals.iter().enumerate() {
            if l < 0.5 {
                continue;
            }
            for j in 0..db {
                let mut op = CMat::zeros(db, da);
                for a in 0..da {
                    op[(j, a)] = vecs[(a, k)].conj() * s;
                }
                kraus.push(op);
            }
        }
        Self::new(w.domain().clone(), w.codomain().clone(), kraus)
    }

    /// Random channel from a Haar isometry `in -> out ⊗ C^k`.
    pub fn random_cptp(in_space: SubsystemSpace, out_space: SubsystemSpace, k: usize, seed: RngSeed) -> Result<Self> {
        let (din, dout) = (in_space.total_dim(), out_space.total_dim());
        if dout * k < din {
            return domain(format!("{k} Kraus operators of shape {dout}x{din} cannot be trace preserving"));
        }
        let u = twirl::haar_matrix(dout * k, &mut seed.rng());
        let kraus = (0..k).map(|j| u.view((j * dout, 0), (dout, din)).into_owned()).collect();
        Self::new(in_space, out_space, kraus)
    }

    /// `(1/M) Σ Vᵢ σ Vᵢ†` for trace-orthogonal unitaries `Tr Vᵢ†Vⱼ = |B| δᵢⱼ`.
    pub fn randomizing(space: SubsystemSpace, unitaries: &[CMat]) -> Result<Self> {
        let d = space.total_dim();
        let m = unitaries.len();
        if m == 0 || m > d * d {
            return domain(format!("need 1 <= M <= {} unitaries, got {m}", d * d));
        }
        for (i, vi) in unitaries.iter().enumerate() {
            for (j, vj) in unitaries.iter().enumerate().skip(i) {
                let want = if i == j { d as f64 } else { 0.0 };
                if (linalg::trace(&vi.ad_mul(vj)) - linalg::r(want)).norm() > 1e-9 {
                    return Err(Error::NotOrthogonal(i, j));
                }
            }
        }
        let s = 1.0 / (m as f64).sqrt();
        Self::new(space.clone(), space, unitaries.iter().map(|v| v.scale(s)).collect())
    }

    /// `ρ ↦ (1 − p)ρ + p Tr(ρ) π`.
    pub fn depolarizing(space: SubsystemSpace, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("depolarizing parameter {p} outside [0, 1]"));
        }
        let d = space.total_dim();
        let family = heisenberg_weyl(d);
        let d2 = (d * d) as f64;
        let kraus = family
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let w = if i == 0 { 1.0 - p + p / d2 } else { p / d2 };
                u.scale(w.sqrt())
            })
            .collect();
        Self::new(space.clone(), space, kraus)
    }

    /// `s·T`, scaling every output by `s ≥ 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if s < 0.0 {
            return domain("maps can only be scaled by s >= 0");
        }
        Self::new(
            self.in_space.clone(),
            self.out_space.clone(),
            self.kraus.iter().map(|k| k.scale(s.sqrt())).collect(),
        )
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &KrausMap) -> Result<Self> {
        if !first.out_space.same_set(&self.in_space) {
            return Err(Error::Shape(format!(
                "cannot compose: {:?} feeds {:?}",
                first.out_space.labels(),
                self.in_space.labels()
            )));
        }
        let split = first.out_space.split(self.in_space.labels())?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for b in &first.kraus {
            let aligned = linalg::permute_rows(b, &split.sel);
            for a in &self.kraus {
                kraus.push(a * &aligned);
            }
        }
        Self::new(first.in_space.clone(), self.out_space.clone(), kraus)
    }

    pub fn tensor(&self, other: &KrausMap) -> Result<Self> {
        let kraus = self.kraus.iter().flat_map(|a| other.kraus.iter().map(move |b| a.kronecker(b))).collect();
        Self::new(self.in_space.join(&other.in_space)?, self.out_space.join(&other.out_space)?, kraus)
    }

    fn check_input(&self, space: &SubsystemSpace) -> Result<()> {
        for (l, &d) in self.in_space.labels().iter().zip(self.in_space.dims()) {
            if space.dim_of(l)? != d {
                return Err(Error::Shape(format!("label `{l}` has dimension {} but the map expects {d}", space.dim_of(l)?)));
            }
        }
        Ok(())
    }

    /// `Σ K m K†` on the input labels; spectators pass through.
    ///
    /// Result labels: spectators in their original order, then the output labels.
    pub fn apply(&self, m: &LabeledOperator) -> Result<LabeledOperator> {
        self.check_input(m.space())?;
        let on = self.in_space.labels();
        let mut acc: Option<LabeledOperator> = None;
        for k in &self.kraus {
            let term = m.conjugate_local(k, on, &self.out_space)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.expect("nonempty Kraus list"))
    }

    pub fn apply_low_rank(&self, m: &LowRank) -> Result<LowRank> {
        self.check_input(m.space())?;
        let on = self.in_space.labels();
        let mut acc: Option<LowRank> = None;
        for k in &self.kraus {
            let term = m.apply_local(k, on, &self.out_space)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.expect("nonempty Kraus list"))
    }

    /// `(T ⊗ id)(Φ^{AA′})`, ordered as `out ⊗ in′`.
    pub fn choi(&self) -> Result<ChoiMatrix> {
        let d = self.in_space.total_dim();
        let primed = self.in_space.relabel(prime)?;
        let dout = self.out_space.total_dim();
        // |Φ⟩ = d^{-1/2} Σ |i⟩|i⟩, so (K ⊗ 1)|Φ⟩ has coefficient matrix K/√d
        let mut factor = CMat::zeros(dout * d, self.kraus.len());
        let s = 1.0 / (d as f64).sqrt();
        for (c, k) in self.kraus.iter().enumerate() {
            for e in 0..dout {
                for a in 0..d {
                    factor[(e * d + a, c)] = k[(e, a)] * s;
                }
            }
        }
        let space = self.out_space.join(&primed)?;
        let op = LabeledOperator::with_hint(space, &factor * factor.adjoint(), Some(true));
        Ok(ChoiMatrix { op, in_labels: primed.labels().to_vec() })
    }

    /// Θ(T) via `M = Tr_{A′} ω²`.
    pub fn theta(&self) -> Result<ThetaReport> {
        let choi = self.choi()?;
        let m = theta_operator(&choi)?;
        let root = linalg::psd_sqrt(m.mat());
        let tr = linalg::trace(&root).re;
        if !(tr > 0.0) {
            return domain("Θ is undefined for the zero map");
        }
        let opt = LabeledOperator::new(m.space().clone(), root.unscale(tr))?;
        Ok(ThetaReport { theta: 2.0 * tr.log2(), optimizer: DensityOp::unit(opt)?, closed_form_used: true })
    }

    /// `Tr T(1)` versus `|A|`, plus a sampled spot check of `E‖T(U·σ)‖₁ ≤ ‖σ‖₁`.
    pub fn is_class1(&self, samples: usize, seed: RngSeed) -> Result<Class1Report> {
        let mut verdict = match self.tp_class {
            TpClass::Cptp => Class1Verdict::YesCptp,
            _ => {
                let ti = self.apply(&LabeledOperator::identity(self.in_space.clone()))?;
                if (ti.trace().re - self.in_space.total_dim() as f64).abs() <= 1e-9 {
                    Class1Verdict::YesTraceCondition
                } else {
                    Class1Verdict::Unknown
                }
            }
        };
        let d = self.in_space.total_dim();
        let mut worst_z = f64::NEG_INFINITY;
        let mut violated = false;
        for t in 0..5u64 {
            let g = twirl::ginibre(d, d, &mut seed.derive(1000 + t).rng());
            let norm = linalg::trace_norm(&g);
            let sigma = LabeledOperator::new(self.in_space.clone(), g.unscale(norm))?;
            let est = twirl::mc_average(
                |u: &CMat| {
                    let rotated = sigma.conjugate_local(u, self.in_space.labels(), &self.in_space).expect("shape");
                    self.apply(&rotated).expect("shape").trace_norm()
                },
                &twirl::UnitaryEnsemble::haar(d),
                samples,
                seed.derive(t),
            )?;
            let excess = est.mean - 1.0;
            let z = if est.stderr > 0.0 { excess / est.stderr } else if excess > 1e-9 { f64::INFINITY } else { 0.0 };
            worst_z = worst_z.max(z);
            if excess > 3.0 * est.stderr + 1e-9 {
                violated = true;
            }
        }
        if violated {
            verdict = Class1Verdict::Unknown;
        }
        Ok(Class1Report { verdict, worst_z, violated })
    }

    /// `T(σ)T(σ)† ≼ T(σσ†)T(1)`; requires `T(1)` to be a multiple of the identity.
    pub fn two_positivity_check(&self, sigma: &LabeledOperator) -> Result<bool> {
        let in_sigma = sigma.aligned_to(&self.in_space)?;
        let ti = self.apply(&LabeledOperator::identity(self.in_space.clone()))?;
        let n = ti.dim();
        let c0 = ti.trace() / linalg::r(n as f64);
        if (ti.mat() - CMat::identity(n, n) * c0).norm() > 1e-9 {
            return domain("two-positivity check needs T(1) proportional to the identity");
        }
        let ts = self.apply(&in_sigma)?;
        let sq = LabeledOperator::new(self.in_space.clone(), in_sigma.mat() * in_sigma.mat().adjoint())?;
        let tsq = self.apply(&sq)?;
        let lhs = ts.mat() * ts.mat().adjoint();
        let rhs = tsq.mat() * c0;
        let gap = linalg::hermitian_part(&(rhs - lhs));
        Ok(linalg::eigvalsh(&gap).first().copied().unwrap_or(0.0) >= -1e-9)
    }
}

fn classify(kraus: &[CMat], din: usize) -> TpClass {
    let mut s = CMat::zeros(din, din);
    for k in kraus {
        s += k.ad_mul(k);
    }
    let id = CMat::identity(din, din);
    if (&s - &id).norm() <= 1e-9 {
        TpClass::Cptp
    } else if linalg::eigvalsh(&s).last().copied().unwrap_or(0.0) <= 1.0 + 1e-9 {
        TpClass::CpTraceNonincreasing
    } else {
        TpClass::CpGeneral
    }
}

/// `Tr_{A′} ω²` on the output space.
pub fn theta_operator(choi: &ChoiMatrix) -> Result<LabeledOperator> {
    let sq = LabeledOperator::with_hint(choi.op.space().clone(), choi.op.mat() * choi.op.mat(), Some(true));
    sq.partial_trace(&choi.in_labels)
}

/// `log₂ Tr[M θ⁻¹]` for a full-rank density `θ`; the quantity Θ minimizes.
pub fn theta_objective(m: &LabeledOperator, theta: &LabeledOperator) -> Result<f64> {
    let inv = linalg::psd_pow(theta.aligned_to(m.space())?.mat(), -1.0);
    Ok(linalg::trace(&(m.mat() * inv)).re.log2())
}

/// Generalized Pauli operators `X^a Z^b`, `Tr Vᵢ†Vⱼ = d δᵢⱼ`.
///
/// For `d` a power of two both exponents run in bit-reversed order, so every
/// power-of-two prefix of the list is a subgroup up to phases.
pub fn heisenberg_weyl(d: usize) -> Vec<CMat> {
    let order: Vec<usize> = if d.is_power_of_two() {
        let bits = d.trailing_zeros();
        (0..d).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }).collect()
    } else {
        (0..d).collect()
    };
    let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
    let mut out = Vec::with_capacity(d * d);
    for &a in &order {
        for &b in &order {
            // X^a Z^b |j⟩ = ω^{bj} |j + a⟩
            let mut m = CMat::zeros(d, d);
            for j in 0..d {
                m[((j + a) % d, j)] = omega((b * j) % d);
            }
            out.push(m);
        }
    }
    out
}

/// Measurement family `E: BC → XD`, contiguous blocks of size `|D|`.
#[derive(Clone, Debug)]
pub struct MeasurementMap {
    pub map: KrausMap,
    /// `M_x: BC → D`.
    pub ops: Vec<CMat>,
    pub j: usize,
}

pub fn measurement_map(bc: &SubsystemSpace, d: &SubsystemSpace, x_label: &str) -> Result<MeasurementMap> {
    let n = bc.total_dim();
    let dd = d.total_dim();
    if dd > n {
        return domain(format!("measurement output |D| = {dd} exceeds |B||C| = {n}"));
    }
    let j = n.div_ceil(dd);
    let mut ops = Vec::with_capacity(j);
    let mut kraus = Vec::with_capacity(j);
    for x in 0..j {
        let mut mx = CMat::zeros(dd, n);
        for i in (x * dd)..((x + 1) * dd).min(n) {
            mx[(i - x * dd, i)] = linalg::r(1.0);
        }
        let mut k = CMat::zeros(j * dd, n);
        k.view_mut((x * dd, 0), (dd, n)).copy_from(&mx);
        ops.push(mx);
        kraus.push(k);
    }
    let out = SubsystemSpace::single(x_label, j)?.join(d)?;
    Ok(MeasurementMap { map: KrausMap::new(bc.clone(), out, kraus)?, ops, j })
}
