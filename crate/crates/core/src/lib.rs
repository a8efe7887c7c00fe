//! Steering robustness, measurement incompatibility and Schmidt-number
//! certification for high-dimensional bipartite systems.

pub mod bounds;
pub mod certify;
pub mod error;
pub mod linalg;
pub mod parent;
pub mod quantum;
pub mod report;
pub mod sdp;

pub use error::{Error, Result};
