//! End-to-end two-way relay simulation.

pub mod config;
pub mod frame;
pub mod runner;
pub mod stats;

pub use config::{ChannelMode, CodeSource, ExperimentConfig, KernelName, Scheme, StopRuleName};
pub use frame::{FrameContext, FrameResult};
pub use runner::{run_deterministic, run_experiment, run_experiment_with, run_fading, run_point, write_curve_csv, CurvePoint};
