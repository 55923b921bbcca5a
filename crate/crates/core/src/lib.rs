//! Numerical dimension estimates for invariant sets of the semilinear
//! reaction-diffusion equation `u_t + beta u - Laplace u = f(x, u)` on boxes.

pub mod domain;
pub mod error;
pub mod linalg;
pub mod semiflow;
pub mod spectral;
pub mod tangent;
pub mod verify;

pub use domain::{Field, Grid, NonlinearitySpec, Profile, SymmetricOperator};
pub use error::{Error, ErrorClass, Result};
pub use spectral::{BoundReport, ConstantsTable, SpectralConfig};
