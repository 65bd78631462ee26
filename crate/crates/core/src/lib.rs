//! RGB-D camera tracking inside pre-encoded signed-distance scene
//! representations.
//!
//! Given a queryable scene field (color + signed distance with spatial
//! gradients) and a stream of RGB-D frames with a known initial pose, the
//! direct tracker backprojects sampled depth pixels and minimizes their
//! |signed distance| plus an L1 color residual with Adam over the camera
//! position and orientation quaternion. A density-based volume-rendering
//! tracker serves as the baseline; both run under wall-clock or
//! fixed-iteration budgets and are evaluated by absolute trajectory error.
//!
//! The `sdftrack` binary exposes dataset synthesis (`synth`), tracking
//! (`track`), trajectory evaluation (`eval`) and the method x budget
//! benchmark grid (`bench`).

pub mod eval;
pub mod geometry;
pub mod io;
pub mod optim;
pub mod render;
pub mod sampling;
pub mod scene;
pub mod synth;
pub mod tracker;

pub use eval::{ate_rmse, AteReport, Trajectory, DEFAULT_FAILURE_THRESHOLD};
pub use geometry::{Intrinsics, Pose, Quaternion};
pub use optim::{Budget, TrackerConfig, VrConfig};
pub use sampling::RgbdFrame;
pub use scene::{CsgUnion, DensityParams, FieldSample, GridField, SceneField};
pub use tracker::{track_frame, track_sequence, Method, TrackingRun};
