//! Planning and simulation core for UAV-assisted wildfire monitoring with
//! edge computing.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs plus an explicit, seeded RNG; file formats, wall
//! clock timing and the command line live in the `wildpatrol` crate.
//!
//! Pipeline overview:
//!
//! 1. [`domain::partition_sensors`] splits sensors into those an edge node
//!    can hear directly and those that need a UAV relay.
//! 2. [`clustering::weighted_kmeans`] groups the relay sensors into one
//!    cluster per UAV, pulling centers toward sensors with fire history.
//! 3. [`assignment`] maps direct sensors and clusters onto edge nodes while
//!    tracking compute load, repairing overloads greedily.
//! 4. [`routing`] builds a closed patrol tour per cluster (nearest neighbor
//!    followed by 2-opt) and its energy budget.
//! 5. [`planner::plan`] wraps the above in the fleet-sizing loop and
//!    [`planner::validate`] re-checks every constraint from scratch.
//!
//! [`timing`] evaluates the five-part response-time model, [`emergency`]
//! simulates patrols plus the urgent dispatch protocol, and [`baselines`]
//! provides the GA, PSO and greedy comparison planners.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod assignment;
pub mod baselines;
pub mod clustering;
pub mod domain;
pub mod emergency;
mod error;
pub mod planner;
pub mod rng;
pub mod routing;
pub mod scenario;
pub mod timing;

pub use domain::{AlgoParams, EdgeNode, FleetInitMode, PhysicalParams, Point, RequestProfile, Sensor};
pub use error::{Binding, Error, Result};
pub use planner::{plan, validate, ConstraintReport, Plan, Variant};
pub use scenario::{GenConfig, Scenario};
