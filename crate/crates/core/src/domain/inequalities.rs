use nalgebra::DMatrix;

use super::norms::{h1_norm, uniform_local_norm};
use super::operator::{h1_gram_operator, SymmetricOperator};
use super::Field;
use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigenvalues, lowest_eigenpairs, BandLdlt, LanczosOptions, LinearOperator};

/// Dense generalized eigensolves are used up to this many unknowns.
pub const DENSE_RAYLEIGH_LIMIT: usize = 512;

/// `RHS - LHS` of the uniform-local multiplier inequality
/// `int |omega| u^2 <= |omega|_{L^sigma_u} (rho eps M_B^2 |u|_{H1}^2 + (1-rho) eps^{-rho/(1-rho)} |u|_{L2}^2)`
/// with `rho = 3 / (2 sigma)`.
pub fn prop1_residual(omega: &Field, u: &Field, sigma: f64, eps: f64, m_b: f64) -> Result<f64> {
    if !(sigma > 1.5 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must exceed 3/2, got {sigma}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if !(m_b > 0.0 && m_b.is_finite()) {
        return Err(Error::invalid(format!("M_B must be positive, got {m_b}")));
    }
    omega.ensure_grid(u.grid())?;
    let w = u.grid().cell_volume();
    let lhs: f64 = omega
        .values()
        .iter()
        .zip(u.values())
        .map(|(o, v)| o.abs() * v * v)
        .sum::<f64>()
        * w;
    let rho = 1.5 / sigma;
    let h1 = h1_norm(u);
    let l2sq = u.dot(u);
    let rhs = uniform_local_norm(omega, sigma)
        * (rho * eps * m_b * m_b * h1 * h1 + (1.0 - rho) * eps.powf(-rho / (1.0 - rho)) * l2sq);
    Ok(rhs - lhs)
}

/// Extreme values of `a(u,u) / |u|_{H1}^2` over nonzero grid functions, i.e.
/// the extreme generalized eigenvalues of `(M, M_H1)`.
pub fn rayleigh_extremes(op: &SymmetricOperator) -> Result<(f64, f64)> {
    let gram = h1_gram_operator(op.grid());
    if op.dof() <= DENSE_RAYLEIGH_LIMIT {
        let vals = dense_generalized_eigenvalues(op.matrix().to_dense(), gram.matrix().to_dense())?;
        return Ok((vals[0], vals[vals.len() - 1]));
    }
    let chol = BandLdlt::factor(gram.matrix(), 0.0, 0.0)?;
    let opts = LanczosOptions {
        tol: 1e-10,
        max_iter: 800,
        ..LanczosOptions::default()
    };
    // pencil values are O(1) unless the potential dominates the stencil
    let scale = (op.matrix().max_abs() / gram.matrix().max_abs()).max(1.0);
    let lo_op = Pencil {
        m: op,
        chol: &chol,
        sign: 1.0,
    };
    let lo = lowest_eigenpairs(&lo_op, Some(&gram), 1, scale, &opts)?;
    let hi_op = Pencil {
        m: op,
        chol: &chol,
        sign: -1.0,
    };
    let hi = lowest_eigenpairs(&hi_op, Some(&gram), 1, scale, &opts)?;
    Ok((lo.values[0], -hi.values[0]))
}

/// `sign * M_H1^{-1} M`, self-adjoint in the `M_H1` inner product.
struct Pencil<'a> {
    m: &'a SymmetricOperator,
    chol: &'a BandLdlt,
    sign: f64,
}

impl LinearOperator for Pencil<'_> {
    fn dim(&self) -> usize {
        self.m.dof()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut mx = vec![0.0; x.len()];
        self.m.apply(x, &mut mx);
        let z = self.chol.solve(&mx);
        for (yi, zi) in y.iter_mut().zip(z) {
            *yi = self.sign * zi;
        }
    }
}

/// Ascending eigenvalues of `A v = lambda B v` for symmetric `A` and SPD `B`.
pub(crate) fn dense_generalized_eigenvalues(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::EigenNonConvergence("H1 Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenNonConvergence("singular Cholesky factor".into()))?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    Ok(dense_symmetric_eigenvalues(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::operator::{assemble_operator, discrete_laplacian_eigenvalues};
    use crate::domain::Grid;

    #[test]
    fn prop1_vanishes_for_zero_inputs() {
        let g = Grid::unit_cube(3).unwrap();
        let z = Field::zeros(g);
        let w = Field::constant(g, 1.0);
        assert_eq!(prop1_residual(&w, &z, 2.0, 1.0, 5.0).unwrap(), 0.0);
        assert_eq!(prop1_residual(&z, &w, 2.0, 1.0, 5.0).unwrap(), 0.0);
        assert!(prop1_residual(&w, &w, 1.5, 1.0, 5.0).is_err());
    }

    #[test]
    fn prop1_holds_on_first_mode() {
        let g = Grid::unit_cube(6).unwrap();
        let u = Field::sine_mode(g, [1, 1, 1]);
        let w = Field::constant(g, 1.0);
        assert!(prop1_residual(&w, &u, 2.0, 1.0, 5.0).unwrap() >= 0.0);
    }

    #[test]
    fn zero_potential_extremes_follow_laplacian() {
        let g = Grid::unit_cube(4).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let (lo, hi) = rayleigh_extremes(&a).unwrap();
        let all = discrete_laplacian_eigenvalues(&g, g.dof());
        let lmin = all[0];
        let lmax = all[all.len() - 1];
        assert!((lo - lmin / (1.0 + lmin)).abs() < 1e-12);
        assert!((hi - lmax / (1.0 + lmax)).abs() < 1e-12);
    }

    #[test]
    fn iterative_extremes_match_identity() {
        let g = Grid::new([(0.0, 1.0); 3], [9, 8, 8]).unwrap();
        assert!(g.dof() > DENSE_RAYLEIGH_LIMIT);
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let (lo, hi) = rayleigh_extremes(&a).unwrap();
        let all = discrete_laplacian_eigenvalues(&g, g.dof());
        let lmin = all[0];
        let lmax = all[all.len() - 1];
        assert!((lo - lmin / (1.0 + lmin)).abs() < 1e-8, "{lo}");
        assert!((hi - lmax / (1.0 + lmax)).abs() < 1e-8, "{hi}");
    }

    #[test]
    fn extremes_increase_with_constant_potential() {
        let g = Grid::unit_cube(3).unwrap();
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in [0.0, 0.5, 1.0, 4.0, 10.0] {
            let a = assemble_operator(&g, &Field::constant(g, c)).unwrap();
            let e = rayleigh_extremes(&a).unwrap();
            assert!(e.0 > prev.0 && e.1 > prev.1);
            prev = e;
        }
    }
}
