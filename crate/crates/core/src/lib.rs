pub mod constraint;
mod error;
pub mod expr;
pub mod forms;
pub mod jetspace;
pub mod matrix;
pub mod pipeline;
pub mod problem;
pub mod quadrature;
pub mod structure;
pub mod verifier;

pub use error::{Error, Result};
