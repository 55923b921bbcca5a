use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform interior-node discretization of a box `(a0,b0) x (a1,b1) x (a2,b2)`.
///
/// Only interior nodes are stored. Boundary nodes carry the homogeneous
/// Dirichlet value and never appear in field arrays. Node `(i, j, k)` sits at
/// `a + (i + 1) h` along each axis and has linear index `i + nx (j + ny k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    extents: [(f64, f64); 3],
    points: [usize; 3],
    spacing: [f64; 3],
    dof: usize,
}

impl Grid {
    pub fn new(extents: [(f64, f64); 3], points_per_axis: [usize; 3]) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for axis in 0..3 {
            let (a, b) = extents[axis];
            let len = b - a;
            if !a.is_finite() || !b.is_finite() || len.is_nan() || len <= 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: interval ({a}, {b}) has non-positive length"
                )));
            }
            let n = points_per_axis[axis];
            if n < 2 {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: need at least 2 interior points, got {n}"
                )));
            }
            spacing[axis] = len / (n as f64 + 1.0);
        }
        let dof = points_per_axis
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidDomain("degree-of-freedom count overflows".into()))?;
        Ok(Self {
            extents,
            points: points_per_axis,
            spacing,
            dof,
        })
    }

    /// Unit cube `(0,1)^3` with `n` interior points per axis.
    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::new([(0.0, 1.0); 3], [n; 3])
    }

    pub fn extents(&self) -> [(f64, f64); 3] {
        self.extents
    }

    pub fn points(&self) -> [usize; 3] {
        self.points
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn lengths(&self) -> [f64; 3] {
        let e = self.extents;
        [e[0].1 - e[0].0, e[1].1 - e[1].0, e[2].1 - e[2].0]
    }

    /// Quadrature weight `h1 h2 h3` attached to every node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.points[0] * (j + self.points[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let nx = self.points[0];
        let ny = self.points[1];
        (idx % nx, (idx / nx) % ny, idx / (nx * ny))
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.coords(idx);
        [
            self.extents[0].0 + (i as f64 + 1.0) * self.spacing[0],
            self.extents[1].0 + (j as f64 + 1.0) * self.spacing[1],
            self.extents[2].0 + (k as f64 + 1.0) * self.spacing[2],
        ]
    }

    /// Grids are compatible when they have the same node layout and the same
    /// extents up to a relative tolerance (header round-trips may be lossy).
    pub fn compatible(&self, other: &Grid, rel_tol: f64) -> bool {
        if self.points != other.points {
            return false;
        }
        self.extents
            .iter()
            .zip(other.extents.iter())
            .all(|(&(a, b), &(c, d))| {
                let scale = (b - a).abs().max(1.0);
                (a - c).abs() <= rel_tol * scale && (b - d).abs() <= rel_tol * scale
            })
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.compatible(other, 1e-12) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.points, other.points
            )))
        }
    }
}
