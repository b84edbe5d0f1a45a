//! Quasi-periodic inhomogeneous 8-vertex / XYZ transfer matrices, the vertex-IRF
//! map to the antiperiodic dynamical 6-vertex model, separation-of-variables
//! spectrum and Bethe-type T-Q solvers, with a dense diagonalization oracle.

pub mod error;
pub mod linalg;
pub mod twist;
pub mod theta;
pub mod model;
pub mod local;
pub mod claims;
pub mod lattice;
pub mod dynamical;
pub mod sov;
pub mod oracle;
pub mod spectrum;
pub mod bethe;
pub mod report;

pub use error::{Error, Result};
pub use linalg::{c, CMat, CVec, C64};
pub use model::ModelParams;
pub use theta::EllipticParams;
pub use twist::Twist;
