pub mod adapt;
pub mod assembly;
pub mod banded;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod output;
pub mod sparse;

pub use error::{Error, Result};
