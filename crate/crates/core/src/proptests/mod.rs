//! Property tests for the module invariants. Inputs are drawn from seeds and
//! small dimensions so each case stays fast.

mod channels;
mod decouple;
mod entropy;
mod protocols;
mod qmat;
mod twirl;

use crate::qmat::{DensityOp, SubsystemSpace};
use crate::twirl::{random_density, RngSeed};

pub(crate) fn sp(labels: &[&str], dims: &[usize]) -> SubsystemSpace {
    SubsystemSpace::new(labels, dims).unwrap()
}

pub(crate) fn state(labels: &[&str], dims: &[usize], rank: usize, seed: u64) -> DensityOp {
    let space = sp(labels, dims);
    let rank = rank.clamp(1, space.total_dim());
    random_density(&space, rank, RngSeed::new(seed)).unwrap()
}
