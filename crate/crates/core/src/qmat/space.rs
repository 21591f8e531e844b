use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered tensor product of named subsystems.
///
/// Basis index ordering is row-major: the first label is the most
/// significant digit, matching `kronecker`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemSpace {
    labels: Vec<String>,
    dims: Vec<usize>,
}

/// Flat offsets for a split of a space into selected labels and the rest.
///
/// Full index of (selected digit tuple `s`, rest digit tuple `r`) is
/// `sel[s] + rest[r]`, with `s` and `r` enumerated row-major.
#[derive(Clone, Debug)]
pub struct Split {
    pub sel: Vec<usize>,
    pub rest: Vec<usize>,
}

impl SubsystemSpace {
    pub fn new<S: AsRef<str>>(labels: &[S], dims: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::Shape(format!("{} labels but {} dims", labels.len(), dims.len())));
        }
        let mut out: Vec<String> = Vec::with_capacity(labels.len());
        for (l, &d) in labels.iter().zip(dims) {
            let l = l.as_ref();
            if d == 0 {
                return Err(Error::InvalidDimension(format!("subsystem `{l}` has dimension 0")));
            }
            if out.iter().any(|x| x == l) {
                return Err(Error::LabelCollision(l.to_string()));
            }
            out.push(l.to_string());
        }
        Ok(Self { labels: out, dims: dims.to_vec() })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new(&[label], &[dim])
    }

    /// The one-dimensional space with no labels.
    pub fn trivial() -> Self {
        Self { labels: vec![], dims: vec![] }
    }

    /// `n` copies of this space, label `L` becoming `L[1]`, ..., `L[n]`.
    ///
    /// Ordering is copy-major: all labels of copy 1, then copy 2, etc.
    pub fn copies(&self, n: usize) -> Self {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        for k in 1..=n {
            for (l, &d) in self.labels.iter().zip(&self.dims) {
                labels.push(copy_label(l, k));
                dims.push(d);
            }
        }
        Self { labels, dims }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.index_of(label)?])
    }

    /// Product of the dimensions of `labels`.
    pub fn dim_of_all<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        labels.iter().try_fold(1, |acc, l| Ok(acc * self.dim_of(l.as_ref())?))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        let labels: Vec<&str> = self.labels.iter().chain(&other.labels).map(|s| s.as_str()).collect();
        let dims: Vec<usize> = self.dims.iter().chain(&other.dims).copied().collect();
        Self::new(&labels, &dims)
    }

    /// Subspace made of `labels`, in the given order.
    pub fn subspace<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let dims = labels
            .iter()
            .map(|l| self.dim_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, &dims)
    }

    /// Labels not in `labels`, in original order.
    pub fn complement<S: AsRef<str>>(&self, labels: &[S]) -> Vec<String> {
        self.labels
            .iter()
            .filter(|l| !labels.iter().any(|x| x.as_ref() == l.as_str()))
            .cloned()
            .collect()
    }

    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        for l in labels {
            self.index_of(l.as_ref())?;
        }
        let rest = self.complement(labels);
        self.subspace(&rest)
    }

    /// Rename labels through `f`, keeping dims.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        let labels: Vec<String> = self.labels.iter().map(|l| f(l)).collect();
        Self::new(&labels, &self.dims)
    }

    /// Same label set regardless of order, with matching dims.
    pub fn same_set(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .labels
                .iter()
                .zip(&self.dims)
                .all(|(l, &d)| other.dim_of(l).map(|e| e == d).unwrap_or(false))
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    /// Offsets for `labels` (in that order) and for every other label.
    pub fn split<S: AsRef<str>>(&self, labels: &[S]) -> Result<Split> {
        let strides = self.strides();
        let mut sel_pos = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.index_of(l.as_ref())?;
            if sel_pos.contains(&i) {
                return Err(Error::LabelCollision(l.as_ref().to_string()));
            }
            sel_pos.push(i);
        }
        let rest_pos: Vec<usize> = (0..self.len()).filter(|i| !sel_pos.contains(i)).collect();
        Ok(Split {
            sel: offsets(&sel_pos, &self.dims, &strides),
            rest: offsets(&rest_pos, &self.dims, &strides),
        })
    }
}

fn offsets(pos: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in pos {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &o in &out {
            for k in 0..dims[p] {
                next.push(o + k * strides[p]);
            }
        }
        out = next;
    }
    out
}

pub fn copy_label(label: &str, k: usize) -> String {
    format!("{label}[{k}]")
}

/// Labels of `n` copies of `labels`, copy-major.
pub fn copy_labels<S: AsRef<str>>(labels: &[S], n: usize) -> Vec<String> {
    (1..=n)
        .flat_map(|k| labels.iter().map(move |l| copy_label(l.as_ref(), k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_collisions_and_zero_dims() {
        assert!(matches!(SubsystemSpace::new(&["A", "A"], &[2, 2]), Err(Error::LabelCollision(l)) if l == "A"));
        assert!(SubsystemSpace::new(&["A"], &[0]).is_err());
        assert_eq!(SubsystemSpace::trivial().total_dim(), 1);
    }

    #[test]
    fn split_offsets_are_row_major() {
        let s = SubsystemSpace::new(&["A", "B", "C"], &[2, 3, 2]).unwrap();
        let sp = s.split(&["C", "A"]).unwrap();
        assert_eq!(sp.sel, vec![0, 6, 1, 7]);
        assert_eq!(sp.rest, vec![0, 2, 4]);
        let mut all: Vec<usize> = sp.sel.iter().flat_map(|a| sp.rest.iter().map(move |b| a + b)).collect();
        all.sort();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn copies_are_copy_major() {
        let s = SubsystemSpace::new(&["A", "R"], &[2, 3]).unwrap().copies(2);
        assert_eq!(s.labels(), &["A[1]", "R[1]", "A[2]", "R[2]"]);
        assert_eq!(s.total_dim(), 36);
    }
}
