//! Operator interchange format: `{labels, dims, re, im}` with row-major entries.

use serde::{Deserialize, Serialize};

use super::linalg::{c, CMat};
use super::operator::LabeledOperator;
use super::space::SubsystemSpace;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&LabeledOperator> for OperatorJson {
    fn from(op: &LabeledOperator) -> Self {
        let n = op.dim();
        let m = op.mat();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { labels: op.space().labels().to_vec(), dims: op.space().dims().to_vec(), re, im }
    }
}

impl TryFrom<&OperatorJson> for LabeledOperator {
    type Error = Error;
    fn try_from(j: &OperatorJson) -> Result<Self> {
        let space = SubsystemSpace::new(&j.labels, &j.dims)?;
        let n = space.total_dim();
        if j.re.len() != n * n || j.im.len() != n * n {
            return Err(Error::Shape(format!("expected {} entries, got re={} im={}", n * n, j.re.len(), j.im.len())));
        }
        let m = CMat::from_fn(n, n, |r, col| c(j.re[r * n + col], j.im[r * n + col]));
        LabeledOperator::new(space, m)
    }
}

pub fn to_json(op: &LabeledOperator) -> Result<String> {
    Ok(serde_json::to_string(&OperatorJson::from(op))?)
}

pub fn from_json(text: &str) -> Result<LabeledOperator> {
    let j: OperatorJson = serde_json::from_str(text)?;
    LabeledOperator::try_from(&j)
}
