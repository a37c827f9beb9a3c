pub mod basis;
pub mod data;
pub mod drift_diffusion;
pub mod error;
pub mod kinetic;
pub mod linalg;
pub mod maxwellian;
pub mod mesh;
pub mod norms;
pub mod projection;
pub mod quadrature;
pub mod space;
pub mod study;
pub mod velocity;

pub use error::{Error, Result};
pub use mesh::Mesh1D;
pub use norms::Beta;
pub use space::{Continuity, DGSpace, SpatialField};
