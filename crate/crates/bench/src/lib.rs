//! Shared fixtures for the benchmarks.

use attractor_core::domain::{assemble_operator, PolynomialNonlinearity};
use attractor_core::{Field, Grid, NonlinearitySpec, Profile, SymmetricOperator};

/// A dissipative cubic problem on the unit cube with `n` points per axis.
pub struct Problem {
    pub grid: Grid,
    pub a: SymmetricOperator,
    pub spec: NonlinearitySpec,
    pub u0: Field,
}

pub fn problem(n: usize) -> Problem {
    let grid = Grid::unit_cube(n).expect("valid grid");
    let beta = Profile::constant(1.0).to_field(&grid);
    let a = assemble_operator(&grid, &beta).expect("operator assembles");
    let g: Profile = "gauss 3 0.5 0.5 0.5 0.2".parse().expect("profile parses");
    let poly = PolynomialNonlinearity::new(grid.extents(), g, Profile::constant(2.0), 0.0, -1.0);
    let spec = NonlinearitySpec::polynomial(poly);
    let u0: Profile = "sine 1 1 1 1".parse().expect("profile parses");
    let u0 = u0.to_field(&grid);
    Problem { grid, a, spec, u0 }
}

/// Deterministic, non-trivial right-hand side.
pub fn rhs(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect()
}
