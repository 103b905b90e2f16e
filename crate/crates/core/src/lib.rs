pub mod cli;
pub mod error;
pub mod features;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod partition;
pub mod problems;
pub mod training;

pub use error::{Error, Result};
