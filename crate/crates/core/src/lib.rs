pub mod cli;
pub mod coherent;
pub mod continuum;
pub mod error;
pub mod grassmann;
pub mod holonomy;
pub mod interferometer;
pub mod io;
pub mod matops;
pub mod uhlmann;

pub use error::{Error, Result};
