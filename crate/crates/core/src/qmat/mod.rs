//! Dense complex operators over labeled tensor-product spaces.

pub mod funcs;
pub mod json;
pub mod linalg;
pub mod operator;
pub mod space;
pub mod states;

pub use funcs::{
    distinct_eigs, fidelity, maximally_mixed, mat_power, mes, pinch, positive_part_projector, purify, q_map,
    trace_distance, xi, DEFAULT_NU_TOL,
};
pub use linalg::{c, r, CMat, CVec, C64};
pub use operator::{partial_trace, tensor, trace_norm, LabeledOperator};
pub use space::{copy_label, copy_labels, SubsystemSpace};
pub use states::{DensityOp, Ket, LowRank, PartialIsom, PureState, TraceClass};
