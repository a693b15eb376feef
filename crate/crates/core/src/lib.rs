pub mod analysis;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod mesh;
pub mod ot1d;
pub mod sampler;
pub mod slicing;

pub use error::{Error, Result};
