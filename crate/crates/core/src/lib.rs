//! Coherent states on the circle, the Möbius strip and the torus.

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod projection;
pub mod states;
pub mod theta;

pub use error::{Error, Result};
