use super::linalg::{self, CMat, C64};
use super::space::SubsystemSpace;
use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;

/// Square complex matrix over a labeled tensor-product space.
#[derive(Clone, Debug)]
pub struct LabeledOperator {
    space: SubsystemSpace,
    mat: CMat,
    hermitian_hint: Option<bool>,
}

impl LabeledOperator {
    pub fn new(space: SubsystemSpace, mat: CMat) -> Result<Self> {
        let n = space.total_dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but space {:?} has dimension {n}",
                mat.nrows(),
                mat.ncols(),
                space.labels()
            )));
        }
        Ok(Self { space, mat, hermitian_hint: None })
    }

    /// Checked Hermitian constructor; the stored matrix is symmetrized.
    pub fn hermitian(space: SubsystemSpace, mat: CMat) -> Result<Self> {
        let asym = linalg::asymmetry(&mat);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
        let mut op = Self::new(space, linalg::hermitian_part(&mat))?;
        op.hermitian_hint = Some(true);
        Ok(op)
    }

    pub(crate) fn with_hint(space: SubsystemSpace, mat: CMat, hint: Option<bool>) -> Self {
        debug_assert_eq!(mat.nrows(), space.total_dim());
        Self { space, mat, hermitian_hint: hint }
    }

    pub fn identity(space: SubsystemSpace) -> Self {
        let n = space.total_dim();
        Self::with_hint(space, CMat::identity(n, n), Some(true))
    }

    pub fn zeros(space: SubsystemSpace) -> Self {
        let n = space.total_dim();
        Self::with_hint(space, CMat::zeros(n, n), Some(true))
    }

    pub fn diag(space: SubsystemSpace, entries: &[f64]) -> Result<Self> {
        let n = space.total_dim();
        if entries.len() != n {
            return Err(Error::Shape(format!("{} diagonal entries for dimension {n}", entries.len())));
        }
        let mut m = CMat::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = linalg::r(e);
        }
        Ok(Self::with_hint(space, m, Some(true)))
    }

    pub fn space(&self) -> &SubsystemSpace {
        &self.space
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_hint == Some(true) || linalg::asymmetry(&self.mat) <= HERMITIAN_TOL
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.mat)
    }

    pub fn adjoint(&self) -> Self {
        Self::with_hint(self.space.clone(), self.mat.adjoint(), self.hermitian_hint)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::with_hint(self.space.clone(), self.mat.scale(s), self.hermitian_hint)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self::with_hint(self.space.clone(), &self.mat * s, None)
    }

    /// `self + s·other`, with `other` reordered to this operator's labels.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        let o = other.aligned_to(&self.space)?;
        let hint = match (self.hermitian_hint, o.hermitian_hint) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        Ok(Self::with_hint(self.space.clone(), &self.mat + o.mat.scale(s), hint))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    /// Matrix product on a shared space; `other` is aligned first.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let o = other.aligned_to(&self.space)?;
        Ok(Self::with_hint(self.space.clone(), &self.mat * o.mat, None))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.join(&other.space)?;
        let hint = match (self.hermitian_hint, other.hermitian_hint) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        Ok(Self::with_hint(space, linalg::kron(&self.mat, &other.mat), hint))
    }

    pub fn partial_trace<S: AsRef<str>>(&self, traced: &[S]) -> Result<Self> {
        for l in traced {
            self.space.index_of(l.as_ref())?;
        }
        let keep = self.space.complement(traced);
        self.reduce_to(&keep)
    }

    /// Partial trace onto `keep`, result ordered as `keep`.
    pub fn reduce_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let split = self.space.split(keep)?;
        let space = self.space.subspace(keep)?;
        Ok(Self::with_hint(space, linalg::partial_trace_split(&self.mat, &split), self.hermitian_hint))
    }

    /// Same operator with labels in the order `labels` (a permutation).
    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.space.len() {
            return Err(Error::Shape(format!(
                "reorder needs all {} labels, got {}",
                self.space.len(),
                labels.len()
            )));
        }
        if self.space.labels().iter().zip(labels).all(|(a, b)| a == b.as_ref()) {
            return Ok(self.clone());
        }
        let split = self.space.split(labels)?;
        let space = self.space.subspace(labels)?;
        Ok(Self::with_hint(space, linalg::permute(&self.mat, &split.sel), self.hermitian_hint))
    }

    pub fn aligned_to(&self, space: &SubsystemSpace) -> Result<Self> {
        if !self.space.same_set(space) {
            return Err(Error::Shape(format!(
                "spaces {:?} and {:?} differ",
                self.space.labels(),
                space.labels()
            )));
        }
        self.reorder(space.labels())
    }

    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Ok(Self::with_hint(self.space.relabel(f)?, self.mat.clone(), self.hermitian_hint))
    }

    /// `(X ⊗ 1) M (X ⊗ 1)†` with X mapping the `on` labels to `out`.
    ///
    /// The result is ordered as the untouched labels followed by `out`.
    pub fn conjugate_local<S: AsRef<str>>(&self, x: &CMat, on: &[S], out: &SubsystemSpace) -> Result<Self> {
        let (space, split) = local_target(&self.space, x, on, out)?;
        let left = linalg::left_apply(x, &self.mat, &split);
        let both = linalg::left_apply(x, &left.adjoint(), &split).adjoint();
        Ok(Self::with_hint(space, both, self.hermitian_hint))
    }

    /// `(X ⊗ 1) M (Y ⊗ 1)†`; both act on `on` and map into `out`.
    pub fn sandwich_local<S: AsRef<str>>(&self, x: &CMat, y: &CMat, on: &[S], out: &SubsystemSpace) -> Result<Self> {
        let (space, split) = local_target(&self.space, x, on, out)?;
        local_target(&self.space, y, on, out)?;
        let left = linalg::left_apply(x, &self.mat, &split);
        let both = linalg::left_apply(y, &left.adjoint(), &split).adjoint();
        Ok(Self::with_hint(space, both, None))
    }

    /// `(X ⊗ 1) M` for square X on `on`, keeping this operator's label order.
    pub fn left_mul_local<S: AsRef<str>>(&self, x: &CMat, on: &[S]) -> Result<Self> {
        let out = self.space.subspace(on)?;
        let (space, split) = local_target(&self.space, x, on, &out)?;
        let left = linalg::left_apply(x, &self.mat, &split);
        // columns are still in the old order; bring rows back to it
        let back = space.split(self.space.labels())?;
        let m = linalg::permute_rows(&left, &back.sel);
        Ok(Self::with_hint(self.space.clone(), m, None))
    }

    pub fn trace_norm(&self) -> f64 {
        if self.hermitian_hint == Some(true) {
            return linalg::eigvalsh(&self.mat).iter().map(|l| l.abs()).sum();
        }
        linalg::trace_norm(&self.mat)
    }

    pub fn eigvalsh(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat)
    }

    pub fn min_eig(&self) -> f64 {
        self.eigvalsh().first().copied().unwrap_or(0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let o = other.aligned_to(&self.space)?;
        Ok((&self.mat - &o.mat).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Output space and split for applying a local map `on -> out`.
fn local_target<S: AsRef<str>>(
    space: &SubsystemSpace,
    x: &CMat,
    on: &[S],
    out: &SubsystemSpace,
) -> Result<(SubsystemSpace, super::space::Split)> {
    let split = space.split(on)?;
    if x.ncols() != split.sel.len() || x.nrows() != out.total_dim() {
        return Err(Error::Shape(format!(
            "local map is {}x{}, expected {}x{}",
            x.nrows(),
            x.ncols(),
            out.total_dim(),
            split.sel.len()
        )));
    }
    let rest = space.without(on)?;
    Ok((rest.join(out)?, split))
}

pub fn tensor(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    a.tensor(b)
}

pub fn partial_trace<S: AsRef<str>>(m: &LabeledOperator, traced: &[S]) -> Result<LabeledOperator> {
    m.partial_trace(traced)
}

pub fn trace_norm(m: &LabeledOperator) -> f64 {
    m.trace_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(labels: &[&str], dims: &[usize]) -> SubsystemSpace {
        SubsystemSpace::new(labels, dims).unwrap()
    }

    #[test]
    fn tensor_of_projectors_is_row_major() {
        let a = LabeledOperator::diag(sp(&["A"], &[2]), &[1.0, 0.0]).unwrap();
        let b = LabeledOperator::diag(sp(&["B"], &[2]), &[0.0, 1.0]).unwrap();
        let t = a.tensor(&b).unwrap();
        let want = LabeledOperator::diag(sp(&["A", "B"], &[2, 2]), &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(t.max_abs_diff(&want).unwrap(), 0.0);
        assert!(matches!(a.tensor(&a), Err(Error::LabelCollision(l)) if l == "A"));
    }

    #[test]
    fn identities_tensor_to_identity() {
        let t = LabeledOperator::identity(sp(&["A"], &[2]))
            .tensor(&LabeledOperator::identity(sp(&["B"], &[3])))
            .unwrap();
        assert_eq!(t.max_abs_diff(&LabeledOperator::identity(sp(&["A", "B"], &[2, 3]))).unwrap(), 0.0);
    }

    #[test]
    fn partial_trace_of_product_and_full_trace() {
        let a = LabeledOperator::diag(sp(&["A"], &[2]), &[0.3, 0.7]).unwrap();
        let b = LabeledOperator::diag(sp(&["B"], &[3]), &[0.5, 1.0, 0.5]).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ra = ab.partial_trace(&["B"]).unwrap();
        assert!(ra.max_abs_diff(&a.scale(2.0)).unwrap() < 1e-15);
        let all = ab.partial_trace(&["A", "B"]).unwrap();
        assert_eq!(all.dim(), 1);
        assert!((all.mat()[(0, 0)] - ab.trace()).norm() < 1e-15);
        assert!(matches!(ab.partial_trace(&["C"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn trace_norm_examples() {
        let z = LabeledOperator::diag(sp(&["A"], &[2]), &[1.0, -1.0]).unwrap();
        assert!((z.trace_norm() - 2.0).abs() < 1e-14);
        let d = LabeledOperator::diag(sp(&["A"], &[2]), &[0.7, 0.3])
            .unwrap()
            .sub(&LabeledOperator::diag(sp(&["A"], &[2]), &[0.5, 0.5]).unwrap())
            .unwrap();
        assert!((d.trace_norm() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn reorder_round_trip() {
        let a = LabeledOperator::diag(sp(&["A"], &[2]), &[0.1, 0.9]).unwrap();
        let b = LabeledOperator::diag(sp(&["B"], &[3]), &[0.2, 0.3, 0.5]).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        assert!(ab.reorder(&["B", "A"]).unwrap().max_abs_diff(&ba).unwrap() < 1e-15);
        assert!(ab.sub(&ba).unwrap().trace_norm() < 1e-15);
    }
}
