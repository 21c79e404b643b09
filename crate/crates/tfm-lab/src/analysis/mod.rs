//! Expectation-ratio analysis: the discrete distribution toolkit, exact and
//! Monte Carlo ratio curves, the theoretical lower bound, and report emission.

pub mod curve;
pub mod dist;
pub mod ratio;
pub mod svg;

pub use curve::{compute_ratio_curve, emit_ratio_curve, RatioCurve, RatioCurvePoint};
pub use dist::{DiscreteDist, DistSampler};
pub use ratio::{
    exact_expected_max, exact_ratio_iid, exact_tail_probability, mc_ratio_iid,
    tail_probability, theoretical_ratio_lower_bound, McRatio,
};
