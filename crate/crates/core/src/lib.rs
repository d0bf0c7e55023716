pub mod cli;
pub mod error;
pub mod models;
pub mod phase;
pub mod specfun;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
