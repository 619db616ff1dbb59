//! Kernel robust mixed-norm adaptive filters.
//!
//! The crate provides growing Gaussian RBF networks trained with the
//! kernel LMS / LAD / mixed-norm family of updates (fixed, or with an
//! adaptive mixing parameter), their vector-quantized variants, heavy-tailed
//! noise generators, a nonlinear system-identification benchmark and
//! numerical tools for the convergence analysis.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod error;
pub mod filters;
pub mod kernels;
pub mod mixing;
pub mod noise;
pub mod quantizer;
pub mod rbf_network;
pub mod recipes;

pub use error::{Error, Result};
pub use filters::{AdaptiveFilter, Algorithm, FilterConfig, KernelFilter, LinearFilter, StepOutput, Update};
pub use kernels::{eval_gaussian, ExplicitFeatureMap, FeatureMapKind, KernelParams, DEFAULT_BANDWIDTH};
pub use mixing::{MixingRule, MixingState, INITIAL_LAMBDA};
pub use noise::{BgParams, NoiseModel, SasParams, SeededStream, RNG_ALGORITHM};
pub use quantizer::{Codebook, Decision};
pub use rbf_network::RbfNetwork;
