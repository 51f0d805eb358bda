#![no_std]
extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod grid;
pub mod initial;
mod kernel;
pub mod littlewood_paley;
pub mod math;
pub mod solver;
pub mod state;
pub mod symbol;

pub use error::{Error, Result};
pub use grid::{Grid, SpectralField, VectorField};
