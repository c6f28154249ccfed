//! Simulation and detection toolkit for burst-driven autoscaling abuse.
//!
//! The crate models a two-tier autoscaled cluster (a pod tier scaling on
//! relative CPU and a node tier packing pods onto machines), drives it with
//! steady, flat-overload, or on/off burst workloads, quantifies the
//! performance and billing damage, and trains a gradient-boosted-tree
//! classifier that tells burst attacks apart from ordinary overloads using
//! telemetry statistics.
//!
//! Entry points:
//! - [`engine::run_simulation`] — run one scenario, get a [`trace::Trace`]
//!   plus a full event log.
//! - [`damage`] — damage, cost, and potency figures from traces.
//! - [`detector`] — feature extraction, dataset generation, training, and
//!   evaluation.
//! - The `yoyosim` binary — scenario files in, CSV/JSON artifacts out.

pub mod autoscaler;
pub mod cluster;
pub mod config;
pub mod damage;
pub mod detector;
pub mod engine;
pub mod error;
pub mod rng;
pub mod scenario;
pub mod service;
pub mod trace;
pub mod workload;

pub use autoscaler::{ScalingAction};
pub use config::{ClusterConfig, PricingConfig, ServiceModelConfig};
pub use engine::{run_simulation, run_simulation_opts, SimOptions, SimResult};
pub use error::{Error, Result};
pub use trace::{Trace, TraceRow};
pub use workload::{Jitter, ScheduleKind, WorkloadSchedule};
