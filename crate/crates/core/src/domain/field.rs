use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Nodal scalar function on the interior nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.dof() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.dof()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Overflow {
                node,
                x: grid.position(node),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.dof()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.dof()],
        }
    }

    /// Samples `f` at every interior node.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.dof()).map(|i| f(grid.position(i))).collect();
        Self { grid, values }
    }

    /// Product of sines `sin(m pi (x - a) / L)` per axis; a Dirichlet eigenfunction
    /// of both the continuous and the discrete Laplacian.
    pub fn sine_mode(grid: Grid, modes: [usize; 3]) -> Self {
        let e = grid.extents();
        let l = grid.lengths();
        Self::from_fn(grid, |x| {
            (0..3)
                .map(|a| (modes[a] as f64 * std::f64::consts::PI * (x[a] - e[a].0) / l[a]).sin())
                .product()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `L2` inner product with nodal quadrature.
    pub fn dot(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        weighted_dot(&self.values, &other.values, self.grid.cell_volume())
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Field) -> Field {
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.axpy(-1.0, other)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn ensure_grid(&self, grid: &Grid) -> Result<()> {
        self.grid.ensure_same(grid)
    }
}

pub(crate) fn weighted_dot(a: &[f64], b: &[f64], w: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = Grid::unit_cube(2).unwrap();
        assert!(Field::new(g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(Field::new(g, v), Err(Error::Overflow { node: 3, .. })));
    }

    #[test]
    fn sine_mode_vanishes_nowhere_inside() {
        let g = Grid::unit_cube(3).unwrap();
        let f = Field::sine_mode(g, [1, 1, 1]);
        assert!(f.values().iter().all(|&v| v > 0.0));
    }
}
