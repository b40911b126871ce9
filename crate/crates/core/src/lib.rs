//! Deterministic latency comparison of local micro-operator versus remote
//! MNO 5G core deployments.
//!
//! The crate pairs a discrete-event simulator with a matching closed-form
//! model for three procedures of an industrial AR workload — device
//! registration, PDU session establishment, and frame data transfer — and a
//! reproduction harness for the distance sweeps, NF-delay sweeps, and
//! break-even distance tables of the underlying study.
//!
//! The two computation routes are independent and agree to 1e-9 ms: the
//! engine walks the message sequence over a topology event by event, while
//! the analytic module evaluates the linear latency decomposition from
//! extracted crossing counts.

pub mod analytic;
pub mod anchors;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod model;
pub mod procedures;
pub mod scenario;

pub use error::{Error, Result};
