//! Joint localization and communication planning for UAV-assisted NB-IoT.
//!
//! A UAV hovering at a fixed altitude acts as a fourth positioning anchor
//! next to three terrestrial base stations and relays UE uplink traffic.
//! The crate computes the per-UE hovering regions that satisfy both needs
//! and picks a small set of hovering points hitting all of them.

pub mod bench;
pub mod channel;
pub mod deploy;
pub mod error;
pub mod geometry;
pub mod heatmap;
pub mod localization;
pub mod regions;
pub mod scenario;

pub use error::{Error, Result};
pub use geometry::{Conic2D, EllipseParams, Point3, UnitVector3};
