//! Large-deviation rates and rare-event estimators for sums of Weibull-like
//! random variables, i.e. laws with `log P(X >= x) ~ -q x^(1-eps)`.
//!
//! * [`dist`]: the concrete law, exact samplers, truncated tilted tables.
//! * [`rate`]: critical constants, the transition rate `J(C)`, regimes,
//!   numerical Legendre transforms and inf-convolutions.
//! * [`simulate`]: naive, truncation-decomposition and exact max-jump
//!   estimators with seed-deterministic parallel execution.
//! * [`verify`]: speed-normalized sweeps and analytic bound checks.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod numeric;
pub mod quad;
pub mod rate;
pub mod simulate;
pub mod verify;

pub use dist::{Moments, TiltedTruncatedTable, WeibullLikeSpec};
pub use error::{Error, Result};
pub use rate::{Branch, CriticalConstants, RateParams, Regime, RegimeSpec, Speed, TransitionRate};
pub use simulate::{
    DecompositionEstimate, EstimateRecord, MMax, MaxJumpExact, Method, SampleKind, SimulationConfig, TermEstimate,
};
pub use verify::{BoundParams, SweepBase, SweepEstimator, SweepResult, SweepRow, Trend};
