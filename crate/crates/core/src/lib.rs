//! Map-free navigation for row-structured fields such as vineyards.
//!
//! The robot follows a corridor between two plant rows using a 2D range scan
//! and wheel odometry only, turns at the end of the row, travels along the
//! headland counting row ends, and enters the next corridor. Everything in
//! this crate is `no_std` (with `alloc`) and free of IO: the controllers,
//! the state machine, a deterministic simulator and the evaluation metrics.
//! File formats and the command line live in the `vinenav` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub(crate) mod math;
mod spatial;

pub mod config;
pub mod end_row;
pub mod eval;
pub mod geometry;
pub mod in_row;
pub mod log;
pub mod navigator;
pub mod odometry;
pub mod scan;
pub mod sim;
pub mod turn;

pub use error::Error;
pub use geometry::{Cone2, Point2, Pose2, Rect2, Segment2};
pub use odometry::{KinematicParams, TreadSpeeds, Twist};
pub use scan::{RawScan, Scan2D};

pub type Result<T> = core::result::Result<T, Error>;
