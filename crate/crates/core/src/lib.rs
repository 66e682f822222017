//! Capability-dependent manufacturing geography.
//!
//! A capability vector `(delta, gamma, rho, tau)` drives factor weights for
//! site selection, machine-climate suitability, per-facility economics and a
//! facility-location allocation whose concentration index reveals
//! discontinuous changes of topology along capability paths.

pub mod capability;
pub mod cli;
pub mod config;
pub mod error;
pub mod mca;
pub mod model;
pub mod path;
pub mod phase;
pub mod siteselect;
pub mod topology;
pub mod world;

pub use capability::CapabilityVector;
pub use config::Config;
pub use error::{Error, Result};
pub use model::ModelBundle;
pub use world::World;
