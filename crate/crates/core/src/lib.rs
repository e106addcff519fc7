//! Adaptive grid designs for classifying monotone, binary, deterministic
//! black-box simulations on the unit cube.
//!
//! The crate is organised bottom-up:
//!
//! * [`monotone`] holds the point types, componentwise dominance and the
//!   frontier-backed [`DesignState`].
//! * [`volume`] measures the certainly-negative, certainly-positive and
//!   uncertain regions of a state.
//! * [`static_designs`] and [`strategy`] generate the static and sequential
//!   designs (SG, SI, MC, LHD, AMC, GG, AG, GI, AI, ALE).
//! * [`svc`] is the Gaussian-kernel hard-margin classifier used to predict
//!   outcomes from a finished design.
//! * [`oracle`] provides analytic, tabular and transform-wrapped outcome
//!   sources, [`theory`] the closed-form bounds and their simulation checks.
//! * [`bench`], [`session`] and [`service`] drive experiments, persistent
//!   human-in-the-loop campaigns and their HTTP API.

pub mod bench;
pub mod error;
pub mod monotone;
pub mod oracle;
pub mod rng;
pub mod service;
pub mod session;
pub mod static_designs;
pub mod strategy;
pub mod svc;
pub mod theory;
pub mod volume;

pub use error::{Error, Result};
pub use monotone::{
    count_comparable_pairs, dominates_leq, Certainty, DesignState, Label, LabeledPoint, UnitPoint,
};
pub use oracle::Oracle;
pub use strategy::{run_strategy, Designer, StepRecord, StrategyKind, StrategySpec};
pub use volume::{uncertain_volume, VolumeReport};
