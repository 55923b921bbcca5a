//! Eigenvalues of `A` and `A_delta`, eigenvalue counting, and evaluation of the
//! closed-form dimension, negative-eigenvalue and absorbing-ball bounds.

mod bounds;
mod constants;
mod dissipative;
mod eigen;
mod report;

pub use bounds::{
    clr_bound, dominating_potential, hausdorff_bound, lieb_thirring_residual, lieb_thirring_residual_with,
    nonlinear_constant, scan_dominating_potential, BoundInputs, DominatingPotential, HausdorffBound, InvariantNorms,
};
pub use constants::{sobolev_l6_constant, Constant, ConstantsTable};
pub use dissipative::{attractor_radius, check_dissipation, RadiusReport};
pub use eigen::{
    assemble_a_delta, assemble_a_delta_eps, count_below, lambda1, lowest_eigs, lowest_eigs_k, positive_part_potential,
    proper_values, subspace_minmax_check, CountReport, EigenMethod, MinMaxReport, SpectralConfig, Spectrum,
    DENSE_ORACLE_LIMIT,
};
pub use report::{bound_report, BoundProblem, BoundReport};
