//! Deterministic 2D potential-field navigation simulator with online
//! local-minimum prediction.
//!
//! A point vehicle walks a fixed-length step along the sum of an attractive
//! force toward the goal and repulsive forces from scanned obstacles. When
//! the two forces fall into direct opposition, a recursive two-hypothesis
//! filter estimates the probability that the vehicle is headed into a trap:
//! the transition weight is the fraction of sensor beams reporting
//! obstacles, the correction weight is the recognized share of the area of
//! interest around the projected balance point, and the vehicle halts once
//! the belief crosses a confidence threshold. Two reference baseline
//! predictors (free-passage width and force-direction horizon) run behind
//! the same interface for comparison.
//!
//! Modules map onto the moving parts:
//!
//! - [`world`]: occupancy grid, map document format, ray traversal, and the
//!   built-in benchmark scenarios.
//! - [`sensor`]: forward half-plane range scan, occupancy statistics, and
//!   sensing footprints.
//! - [`apf`]: force laws, the stepper, opposition detection, and balance
//!   point projection.
//! - [`predictor`]: the area ledger, the recursive filter, and the
//!   baselines.
//! - [`harness`]: the episode loop, trace formats, and the comparison
//!   table.
//!
//! ## Map document format
//!
//! ```text
//! APFMAP v1 <width> <height> <resolution_m>
//! <height rows of glyphs, row 0 on top (max y): `.` free, `#` occupied>
//! ```
//!
//! Core math is generic over the scalar type via [`num::Real`]; the
//! aliases below pin the `f64` instantiations used by the CLI and the
//! trace formats.

pub mod apf;
pub mod geom;
pub mod harness;
pub mod num;
pub mod predictor;
pub mod sensor;
pub mod world;

/// World point / vector at CLI precision.
pub type Point = geom::Vec2<f64>;
/// Occupancy grid at CLI precision.
pub type Grid = world::OccupancyGrid<f64>;
/// Scan result at CLI precision.
pub type Scan = sensor::ScanResult<f64>;
/// Scenario configuration at CLI precision.
pub type Scenario = world::ScenarioConfig<f64>;
/// Episode trace at CLI precision.
pub type Trace = harness::SimTrace<f64>;
