//! Box discretization, nodal fields, the assembled operator, norms and the
//! elementary inequalities used throughout.

mod field;
mod grid;
pub mod inequalities;
pub mod io;
pub mod nonlinearity;
pub mod norms;
pub mod operator;
mod profile;

pub use field::Field;
pub use grid::Grid;
pub use inequalities::{prop1_residual, rayleigh_extremes};
pub use nonlinearity::{nemitski, FnNonlinearity, Nonlinearity, NonlinearitySpec, PolynomialNonlinearity};
pub use norms::{norm, NormKind};
pub use operator::{assemble_operator, h1_gram_operator, OperatorKind, SymmetricOperator};
pub use profile::{Profile, ProfileTerm};
