//! Facility-location mechanism workbench.

pub mod axioms;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mechanisms;
pub mod scenarios;
pub mod welfare;

pub use error::{Error, Result};
