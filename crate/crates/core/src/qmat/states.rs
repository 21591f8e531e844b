use std::ops::Deref;

use super::linalg::{self, CMat, CVec, C64};
use super::operator::{LabeledOperator, HERMITIAN_TOL};
use super::space::SubsystemSpace;
use crate::{Error, Result};

pub const TRACE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceClass {
    Unit,
    Subnormalized,
}

/// Positive semidefinite operator with trace one, or at most one.
#[derive(Clone, Debug)]
pub struct DensityOp {
    op: LabeledOperator,
    trace_class: TraceClass,
}

impl DensityOp {
    /// Validates hermiticity, clamps tiny negative eigenvalues to zero, checks the trace.
    pub fn new(op: LabeledOperator, trace_class: TraceClass) -> Result<Self> {
        let asym = linalg::asymmetry(op.mat());
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
        let herm = linalg::hermitian_part(op.mat());
        let (vals, vecs) = linalg::eigh(&herm);
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::NotPsd(min));
        }
        let mat = if min < -1e-14 { linalg::from_spectrum(&vals, &vecs, |l| l.max(0.0)) } else { herm };
        let tr = linalg::trace(&mat).re;
        match trace_class {
            TraceClass::Unit if (tr - 1.0).abs() > TRACE_TOL => return Err(Error::BadTrace(tr)),
            TraceClass::Subnormalized if tr <= 0.0 || tr > 1.0 + TRACE_TOL => return Err(Error::BadTrace(tr)),
            _ => {}
        }
        Ok(Self { op: LabeledOperator::with_hint(op.space().clone(), mat, Some(true)), trace_class })
    }

    pub fn unit(op: LabeledOperator) -> Result<Self> {
        Self::new(op, TraceClass::Unit)
    }

    pub fn from_mat(space: SubsystemSpace, mat: CMat) -> Result<Self> {
        Self::unit(LabeledOperator::new(space, mat)?)
    }

    /// Unit-trace version of a nonzero PSD operator.
    pub fn normalized(op: &LabeledOperator) -> Result<Self> {
        let tr = op.trace().re;
        if tr <= 0.0 {
            return Err(Error::BadTrace(tr));
        }
        Self::unit(op.scale(1.0 / tr))
    }

    pub fn diag(space: SubsystemSpace, probs: &[f64]) -> Result<Self> {
        Self::unit(LabeledOperator::diag(space, probs)?)
    }

    pub fn trace_class(&self) -> TraceClass {
        self.trace_class
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn into_op(self) -> LabeledOperator {
        self.op
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let class = if self.trace_class == TraceClass::Unit && other.trace_class == TraceClass::Unit {
            TraceClass::Unit
        } else {
            TraceClass::Subnormalized
        };
        Ok(Self { op: self.op.tensor(&other.op)?, trace_class: class })
    }

    pub fn partial_trace<S: AsRef<str>>(&self, traced: &[S]) -> Result<Self> {
        Ok(Self { op: self.op.partial_trace(traced)?, trace_class: self.trace_class })
    }

    pub fn reduce_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        Ok(Self { op: self.op.reduce_to(keep)?, trace_class: self.trace_class })
    }

    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self { op: self.op.reorder(labels)?, trace_class: self.trace_class })
    }

    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Ok(Self { op: self.op.relabel(f)?, trace_class: self.trace_class })
    }

    /// `n`-fold tensor power with copy labels `L[k]`.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        assert!(n >= 1);
        let mut acc = self.relabel(|l| super::space::copy_label(l, 1))?;
        for k in 2..=n {
            acc = acc.tensor(&self.relabel(|l| super::space::copy_label(l, k))?)?;
        }
        Ok(acc)
    }
}

impl Deref for DensityOp {
    type Target = LabeledOperator;
    fn deref(&self) -> &LabeledOperator {
        &self.op
    }
}

/// Labeled vector, no normalization imposed.
#[derive(Clone, Debug)]
pub struct Ket {
    space: SubsystemSpace,
    amp: CVec,
}

impl Ket {
    pub fn new(space: SubsystemSpace, amp: CVec) -> Result<Self> {
        if amp.len() != space.total_dim() {
            return Err(Error::Shape(format!("{} amplitudes for dimension {}", amp.len(), space.total_dim())));
        }
        Ok(Self { space, amp })
    }

    pub fn basis(space: SubsystemSpace, index: usize) -> Result<Self> {
        let mut amp = CVec::zeros(space.total_dim());
        if index >= amp.len() {
            return Err(Error::Shape(format!("basis index {index} out of range")));
        }
        amp[index] = linalg::r(1.0);
        Self::new(space, amp)
    }

    pub fn space(&self) -> &SubsystemSpace {
        &self.space
    }

    pub fn amp(&self) -> &CVec {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.norm_squared()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.join(&other.space)?;
        let amp = self.amp.kronecker(&other.amp);
        Self::new(space, amp)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { space: self.space.clone(), amp: self.amp.scale(s) }
    }

    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let split = self.space.split(labels)?;
        if split.rest.len() != 1 || labels.len() != self.space.len() {
            return Err(Error::Shape("reorder needs every label exactly once".into()));
        }
        let space = self.space.subspace(labels)?;
        let amp = CVec::from_fn(split.sel.len(), |i, _| self.amp[split.sel[i]]);
        Self::new(space, amp)
    }

    pub fn aligned_to(&self, space: &SubsystemSpace) -> Result<Self> {
        if !self.space.same_set(space) {
            return Err(Error::Shape(format!("spaces {:?} and {:?} differ", self.space.labels(), space.labels())));
        }
        self.reorder(space.labels())
    }

    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Self::new(self.space.relabel(f)?, self.amp.clone())
    }

    /// `(X ⊗ 1)|v⟩`; result ordered as untouched labels then `out`.
    pub fn apply_local<S: AsRef<str>>(&self, x: &CMat, on: &[S], out: &SubsystemSpace) -> Result<Self> {
        let split = self.space.split(on)?;
        if x.ncols() != split.sel.len() || x.nrows() != out.total_dim() {
            return Err(Error::Shape(format!(
                "local map is {}x{}, expected {}x{}",
                x.nrows(),
                x.ncols(),
                out.total_dim(),
                split.sel.len()
            )));
        }
        let space = self.space.without(on)?.join(out)?;
        let m = CMat::from_column_slice(self.amp.len(), 1, self.amp.as_slice());
        let res = linalg::left_apply(x, &m, &split);
        Self::new(space, CVec::from_column_slice(res.as_slice()))
    }

    /// Square local operator, keeping label order.
    pub fn apply_in_place<S: AsRef<str>>(&self, x: &CMat, on: &[S]) -> Result<Self> {
        let out = self.space.subspace(on)?;
        self.apply_local(x, on, &out)?.aligned_to(&self.space)
    }

    /// |v⟩⟨v|
    pub fn projector(&self) -> LabeledOperator {
        let m = &self.amp * self.amp.adjoint();
        LabeledOperator::with_hint(self.space.clone(), m, Some(true))
    }

    /// Coefficient matrix with rows indexed by `rows` labels, columns by the rest.
    pub fn as_matrix<S: AsRef<str>>(&self, rows: &[S]) -> Result<CMat> {
        let split = self.space.split(rows)?;
        Ok(CMat::from_fn(split.sel.len(), split.rest.len(), |i, j| self.amp[split.sel[i] + split.rest[j]]))
    }

    /// Reduced operator on `keep` (in that order).
    pub fn reduce_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<LabeledOperator> {
        let m = self.as_matrix(keep)?;
        let space = self.space.subspace(keep)?;
        Ok(LabeledOperator::with_hint(space, &m * m.adjoint(), Some(true)))
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        let o = other.aligned_to(&self.space)?;
        Ok(self.amp.dotc(&o.amp))
    }

    pub fn into_low_rank(self) -> LowRank {
        let m = CMat::from_column_slice(self.amp.len(), 1, self.amp.as_slice());
        LowRank { space: self.space, factor: m }
    }
}

/// Normalized labeled vector.
#[derive(Clone, Debug)]
pub struct PureState(Ket);

impl PureState {
    pub fn new(space: SubsystemSpace, amp: CVec) -> Result<Self> {
        Self::from_ket(Ket::new(space, amp)?)
    }

    pub fn from_ket(k: Ket) -> Result<Self> {
        let n = k.norm_sqr().sqrt();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::BadTrace(n * n));
        }
        Ok(Self(k))
    }

    pub fn ket(&self) -> &Ket {
        &self.0
    }

    pub fn projector(&self) -> DensityOp {
        DensityOp { op: self.0.projector(), trace_class: TraceClass::Unit }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.tensor(&other.0)?))
    }

    pub fn reduce_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOp> {
        Ok(DensityOp { op: self.0.reduce_to(keep)?, trace_class: TraceClass::Unit })
    }

    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Ok(Self(self.0.relabel(f)?))
    }

    /// `n`-fold tensor power with copy labels `L[k]`.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        assert!(n >= 1);
        let mut acc = self.relabel(|l| super::space::copy_label(l, 1))?;
        for k in 2..=n {
            acc = acc.tensor(&self.relabel(|l| super::space::copy_label(l, k))?)?;
        }
        Ok(acc)
    }
}

impl Deref for PureState {
    type Target = Ket;
    fn deref(&self) -> &Ket {
        &self.0
    }
}

/// `F F†` kept as its factor; cheap for rank much smaller than dimension.
#[derive(Clone, Debug)]
pub struct LowRank {
    space: SubsystemSpace,
    factor: CMat,
}

impl LowRank {
    pub fn new(space: SubsystemSpace, factor: CMat) -> Result<Self> {
        if factor.nrows() != space.total_dim() {
            return Err(Error::Shape(format!("factor has {} rows for dimension {}", factor.nrows(), space.total_dim())));
        }
        Ok(Self { space, factor })
    }

    /// Factor of a PSD operator from its spectrum (support only).
    pub fn from_psd(op: &LabeledOperator) -> Result<Self> {
        let (vals, vecs) = linalg::eigh(op.mat());
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > linalg::EIG_FLOOR).collect();
        let f = CMat::from_fn(op.dim(), keep.len(), |r, c| vecs[(r, keep[c])] * vals[keep[c]].sqrt());
        Self::new(op.space().clone(), f)
    }

    pub fn space(&self) -> &SubsystemSpace {
        &self.space
    }

    pub fn factor(&self) -> &CMat {
        &self.factor
    }

    pub fn rank_bound(&self) -> usize {
        self.factor.ncols()
    }

    pub fn trace(&self) -> f64 {
        self.factor.norm_squared()
    }

    pub fn scale(&self, s: f64) -> Self {
        assert!(s >= 0.0);
        Self { space: self.space.clone(), factor: self.factor.scale(s.sqrt()) }
    }

    pub fn to_dense(&self) -> LabeledOperator {
        LabeledOperator::with_hint(self.space.clone(), &self.factor * self.factor.adjoint(), Some(true))
    }

    pub fn apply_local<S: AsRef<str>>(&self, x: &CMat, on: &[S], out: &SubsystemSpace) -> Result<Self> {
        let split = self.space.split(on)?;
        if x.ncols() != split.sel.len() || x.nrows() != out.total_dim() {
            return Err(Error::Shape("local map shape mismatch".into()));
        }
        let space = self.space.without(on)?.join(out)?;
        Self::new(space, linalg::left_apply(x, &self.factor, &split))
    }

    pub fn reduce_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let split = self.space.split(keep)?;
        Self::new(self.space.subspace(keep)?, linalg::reduce_factor(&self.factor, &split))
    }

    pub fn partial_trace<S: AsRef<str>>(&self, traced: &[S]) -> Result<Self> {
        for l in traced {
            self.space.index_of(l.as_ref())?;
        }
        let keep = self.space.complement(traced);
        self.reduce_to(&keep)
    }

    pub fn aligned_to(&self, space: &SubsystemSpace) -> Result<Self> {
        if !self.space.same_set(space) {
            return Err(Error::Shape(format!("spaces {:?} and {:?} differ", self.space.labels(), space.labels())));
        }
        let split = self.space.split(space.labels())?;
        Ok(Self { space: space.clone(), factor: linalg::permute_rows(&self.factor, &split.sel) })
    }

    /// Sum of two low-rank operators on the same label set.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let o = other.aligned_to(&self.space)?;
        let mut f = CMat::zeros(self.factor.nrows(), self.factor.ncols() + o.factor.ncols());
        f.columns_mut(0, self.factor.ncols()).copy_from(&self.factor);
        f.columns_mut(self.factor.ncols(), o.factor.ncols()).copy_from(&o.factor);
        Self::new(self.space.clone(), f)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::new(self.space.join(&other.space)?, self.factor.kronecker(&other.factor))
    }

    /// ‖self − other‖₁ without forming either operator densely.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let o = other.aligned_to(&self.space)?;
        Ok(linalg::trace_norm_gram_diff(&self.factor, &o.factor))
    }
}

/// Matrix with singular values in {0, 1}, mapping `domain` into `codomain`.
#[derive(Clone, Debug)]
pub struct PartialIsom {
    domain: SubsystemSpace,
    codomain: SubsystemSpace,
    mat: CMat,
}

impl PartialIsom {
    pub fn new(domain: SubsystemSpace, codomain: SubsystemSpace, mat: CMat) -> Result<Self> {
        if mat.nrows() != codomain.total_dim() || mat.ncols() != domain.total_dim() {
            return Err(Error::Shape(format!(
                "partial isometry is {}x{}, spaces need {}x{}",
                mat.nrows(),
                mat.ncols(),
                codomain.total_dim(),
                domain.total_dim()
            )));
        }
        let sv = mat.clone().singular_values();
        if let Some(bad) = sv.iter().find(|&&s| s.abs() > 1e-9 && (s - 1.0).abs() > 1e-9) {
            return Err(Error::NotPartialIsometry(format!("singular value {bad}")));
        }
        Ok(Self { domain, codomain, mat })
    }

    /// `W|i⟩ = |i⟩` for `i < min(|domain|, |codomain|)`, zero otherwise.
    pub fn truncation(domain: SubsystemSpace, codomain: SubsystemSpace) -> Self {
        let (r, c) = (codomain.total_dim(), domain.total_dim());
        let mat = CMat::from_fn(r, c, |i, j| if i == j { linalg::r(1.0) } else { linalg::r(0.0) });
        Self { domain, codomain, mat }
    }

    pub fn domain(&self) -> &SubsystemSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &SubsystemSpace {
        &self.codomain
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn rank(&self) -> usize {
        self.mat.clone().singular_values().iter().filter(|&&s| s > 0.5).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.domain.total_dim().min(self.codomain.total_dim())
    }

    pub fn adjoint(&self) -> Self {
        Self { domain: self.codomain.clone(), codomain: self.domain.clone(), mat: self.mat.adjoint() }
    }

    /// `self ∘ first`; requires `first`'s codomain to be this domain.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if !first.codomain.same_set(&self.domain) {
            return Err(Error::Shape("composition spaces do not match".into()));
        }
        let split = first.codomain.split(self.domain.labels())?;
        let inner = linalg::permute_rows(&first.mat, &split.sel);
        Ok(Self { domain: first.domain.clone(), codomain: self.codomain.clone(), mat: &self.mat * inner })
    }

    /// `W†W`, the projector onto the initial space.
    pub fn initial_projector(&self) -> LabeledOperator {
        LabeledOperator::with_hint(self.domain.clone(), self.mat.ad_mul(&self.mat), Some(true))
    }

    pub fn apply_ket(&self, k: &Ket) -> Result<Ket> {
        k.apply_local(&self.mat, self.domain.labels(), &self.codomain)
    }

    pub fn apply_op(&self, m: &LabeledOperator) -> Result<LabeledOperator> {
        m.conjugate_local(&self.mat, self.domain.labels(), &self.codomain)
    }

    pub fn apply_low_rank(&self, m: &LowRank) -> Result<LowRank> {
        m.apply_local(&self.mat, self.domain.labels(), &self.codomain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_rejects_bad_input() {
        let s = SubsystemSpace::single("A", 2).unwrap();
        assert!(matches!(DensityOp::diag(s.clone(), &[0.5, 0.6]), Err(Error::BadTrace(_))));
        assert!(matches!(DensityOp::diag(s.clone(), &[1.5, -0.5]), Err(Error::NotPsd(_))));
        let sub = DensityOp::new(LabeledOperator::diag(s, &[0.2, 0.3]).unwrap(), TraceClass::Subnormalized);
        assert!(sub.is_ok());
    }

    #[test]
    fn ket_local_application_matches_dense() {
        let s = SubsystemSpace::new(&["A", "B"], &[2, 2]).unwrap();
        let amp = CVec::from_vec(vec![linalg::c(0.5, 0.1), linalg::r(0.3), linalg::c(-0.2, 0.4), linalg::r(0.6)]);
        let k = Ket::new(s, amp).unwrap();
        let x = CMat::from_row_slice(2, 2, &[linalg::r(0.0), linalg::r(1.0), linalg::r(1.0), linalg::r(0.0)]);
        let got = k.apply_in_place(&x, &["A"]).unwrap();
        let dense = LabeledOperator::new(k.space().clone(), linalg::kron(&x, &CMat::identity(2, 2))).unwrap();
        let want = dense.mat() * k.amp();
        assert!((got.amp() - want).norm() < 1e-15);
        let rho = k.projector().conjugate_local(&x, &["A"], &SubsystemSpace::single("A", 2).unwrap()).unwrap();
        assert!(rho.sub(&got.projector()).unwrap().trace_norm() < 1e-14);
    }

    #[test]
    fn truncation_is_full_rank_partial_isometry() {
        let a = SubsystemSpace::single("A", 4).unwrap();
        let b = SubsystemSpace::single("B", 3).unwrap();
        let w = PartialIsom::truncation(a, b);
        assert!(w.is_full_rank());
        assert_eq!(w.rank(), 3);
        let p = w.initial_projector();
        assert!((p.trace().re - 3.0).abs() < 1e-15);
    }
}
