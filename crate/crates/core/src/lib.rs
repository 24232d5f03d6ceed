pub mod cbf;
pub mod classical;
pub mod cli;
pub mod duality;
pub mod error;
pub mod free;
pub mod kendall;
pub mod quad;
pub mod report;
mod series;
pub mod special;

pub use error::{Error, Result};
