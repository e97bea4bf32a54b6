//! Proper-biharmonic Legendre curves and Hopf cylinders in the
//! D-homothetically deformed 3-sphere: constructors, connections, and
//! numerical verification.

pub mod ambient;
pub mod connections;
pub mod curve;
pub mod error;
pub mod export;
pub mod generators;
pub mod gram;
pub mod jet;
pub mod report;
pub mod sasakian;
pub mod verify;

pub use error::{Error, Result};
