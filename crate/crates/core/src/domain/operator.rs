use serde::{Deserialize, Serialize};

use super::{Field, Grid};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator};

/// Which bilinear form an assembled matrix realizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `a(u,v) = int grad u . grad v + int beta u v`
    Base,
    /// Linearization along a base state, `a(t; u, v)`.
    Linearized { time: f64 },
    /// `(1 - delta) a(u,v) - int d_u f(x,0) u v`
    Delta { delta: f64 },
    /// `(1 - delta) a(u,v) - 3 eps int u v - int V_eps u v`
    DeltaEps { delta: f64, eps: f64 },
    /// Discrete `H^1` Gram matrix (`-Delta_h + I`).
    H1Gram,
}

/// Seven-point finite-difference realization of a symmetric form on a [`Grid`].
///
/// `<M u, v>_{L2}` with nodal quadrature equals the discrete form, i.e.
/// `(M u) . v * h1 h2 h3`.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    grid: Grid,
    matrix: CsrMatrix,
    kind: OperatorKind,
}

impl SymmetricOperator {
    pub(crate) fn from_parts(grid: Grid, matrix: CsrMatrix, kind: OperatorKind) -> Self {
        Self { grid, matrix, kind }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dof(&self) -> usize {
        self.grid.dof()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal()
    }

    /// Discrete bilinear form `<M u, v>_{L2}`.
    pub fn form(&self, u: &Field, v: &Field) -> f64 {
        let mut mu = vec![0.0; self.dof()];
        self.matrix.matvec(u.values(), &mut mu);
        super::field::weighted_dot(&mu, v.values(), self.grid.cell_volume())
    }

    pub fn apply_field(&self, u: &Field) -> Field {
        let mut out = vec![0.0; self.dof()];
        self.matrix.matvec(u.values(), &mut out);
        Field::new(self.grid, out).expect("matvec of finite field stays finite")
    }

    /// New operator with `d` added to the diagonal.
    pub fn with_diagonal(&self, d: &[f64], kind: OperatorKind) -> Self {
        let mut m = self.matrix.clone();
        m.add_diagonal(d);
        Self::from_parts(self.grid, m, kind)
    }

    /// `s * M + diag(d)`
    pub fn scaled_plus_diagonal(&self, s: f64, d: &[f64], kind: OperatorKind) -> Self {
        let mut m = self.matrix.clone();
        m.scale(s);
        m.add_diagonal(d);
        Self::from_parts(self.grid, m, kind)
    }

    /// `max |M - M^T| / max |M|`
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.matrix.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            self.matrix.max_asymmetry() / scale
        }
    }
}

impl LinearOperator for SymmetricOperator {
    fn dim(&self) -> usize {
        self.dof()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y)
    }
}

/// Assembles `-Delta_h + diag(beta)` with homogeneous Dirichlet conditions.
pub fn assemble_operator(grid: &Grid, beta: &Field) -> Result<SymmetricOperator> {
    beta.ensure_grid(grid)?;
    let m = stencil(grid, Some(beta.values()), 0.0);
    Ok(SymmetricOperator::from_parts(*grid, m, OperatorKind::Base))
}

/// Discrete `H^1` Gram operator `-Delta_h + I`, whose form is `|grad u|^2 + |u|^2`.
pub fn h1_gram_operator(grid: &Grid) -> SymmetricOperator {
    SymmetricOperator::from_parts(*grid, stencil(grid, None, 1.0), OperatorKind::H1Gram)
}

fn stencil(grid: &Grid, beta: Option<&[f64]>, shift: f64) -> CsrMatrix {
    let [nx, ny, nz] = grid.points();
    let h = grid.spacing();
    let w = [1.0 / (h[0] * h[0]), 1.0 / (h[1] * h[1]), 1.0 / (h[2] * h[2])];
    let center = 2.0 * (w[0] + w[1] + w[2]);
    let rows = (0..grid.dof())
        .map(|idx| {
            let (i, j, k) = grid.coords(idx);
            let mut row = Vec::with_capacity(7);
            if k > 0 {
                row.push((grid.index(i, j, k - 1), -w[2]));
            }
            if j > 0 {
                row.push((grid.index(i, j - 1, k), -w[1]));
            }
            if i > 0 {
                row.push((grid.index(i - 1, j, k), -w[0]));
            }
            row.push((idx, center + shift + beta.map_or(0.0, |b| b[idx])));
            if i + 1 < nx {
                row.push((grid.index(i + 1, j, k), -w[0]));
            }
            if j + 1 < ny {
                row.push((grid.index(i, j + 1, k), -w[1]));
            }
            if k + 1 < nz {
                row.push((grid.index(i, j, k + 1), -w[2]));
            }
            row
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

/// Closed-form eigenvalues of the discrete Dirichlet Laplacian on `grid`,
/// ascending, truncated to the lowest `k`.
pub fn discrete_laplacian_eigenvalues(grid: &Grid, k: usize) -> Vec<f64> {
    let pts = grid.points();
    let h = grid.spacing();
    let axis: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            (1..=pts[a])
                .map(|m| {
                    let s = (m as f64 * std::f64::consts::PI * h[a]
                        / (2.0 * grid.lengths()[a]))
                        .sin();
                    4.0 * s * s / (h[a] * h[a])
                })
                .collect()
        })
        .collect();
    let mut all = Vec::with_capacity(grid.dof());
    for a in &axis[0] {
        for b in &axis[1] {
            for c in &axis[2] {
                all.push(a + b + c);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    all
}

pub(crate) fn check_same_grid(op: &SymmetricOperator, f: &Field) -> Result<()> {
    if op.grid().compatible(f.grid(), 1e-12) {
        Ok(())
    } else {
        Err(Error::GridMismatch("operator and field live on different grids".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_entries_for_zero_potential() {
        let g = Grid::unit_cube(3).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let h2 = 0.25f64 * 0.25;
        let m = a.matrix();
        assert!((m.get(13, 13) - 6.0 / h2).abs() < 1e-12);
        assert!((m.get(13, 12) + 1.0 / h2).abs() < 1e-12);
        assert!((m.get(13, 4) + 1.0 / h2).abs() < 1e-12);
        assert_eq!(m.get(0, 26), 0.0);
        assert_eq!(a.relative_asymmetry(), 0.0);
    }

    #[test]
    fn constant_potential_shifts_diagonal() {
        let g = Grid::unit_cube(3).unwrap();
        let a0 = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let a1 = assemble_operator(&g, &Field::constant(g, 2.5)).unwrap();
        for (d0, d1) in a0.diagonal().iter().zip(a1.diagonal()) {
            assert!((d1 - d0 - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g = Grid::unit_cube(3).unwrap();
        let g2 = Grid::unit_cube(4).unwrap();
        assert!(matches!(
            assemble_operator(&g, &Field::zeros(g2)),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn form_matches_gradient_energy() {
        use crate::domain::norms::gradient_energy;
        let g = Grid::new([(0.0, 1.0), (0.0, 2.0), (0.0, 1.5)], [4, 5, 3]).unwrap();
        let u = Field::from_fn(g, |x| (3.0 * x[0]).sin() + x[1] * x[2]);
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let lhs = a.form(&u, &u);
        let rhs = gradient_energy(&u);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }
}
