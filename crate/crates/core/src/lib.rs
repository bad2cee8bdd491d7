pub mod error;
pub mod experiment;
pub mod hypergraph;
pub mod model;
pub mod reduction;
pub mod stability;
pub mod trigpoly;

pub use error::{Error, Result};
