use serde::{Deserialize, Serialize};

use super::SemiflowConfig;
use crate::domain::{nemitski, Field, NonlinearitySpec, SymmetricOperator};
use crate::error::{Error, Result};
use crate::linalg::BandLdlt;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub phi: Field,
    /// `|A phi - f(phi)|_{L2}`
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn residual(u: &Field, spec: &NonlinearitySpec, a: &SymmetricOperator) -> Result<Field> {
    let au = a.apply_field(u);
    let f = nemitski(spec, u, 0)?;
    Ok(au.sub(&f))
}

/// Damped Newton iteration on `A u - f(u) = 0` with Jacobian `A - diag(f_u(u))`.
///
/// Running out of iterations is reported through `converged = false`; a
/// Jacobian that cannot be factored is an error.
pub fn find_equilibrium(
    guess: &Field,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
    cfg: &SemiflowConfig,
) -> Result<EquilibriumResult> {
    if !(cfg.newton_tol > 0.0) || cfg.newton_max_iter == 0 {
        return Err(Error::invalid("Newton tolerance and iteration cap must be positive"));
    }
    crate::domain::operator::check_same_grid(a, guess)?;
    let mut u = guess.clone();
    let mut r = residual(&u, spec, a)?;
    let mut rn = r.dot(&r).sqrt();
    let scale = a.matrix().max_abs().max(1.0);
    for it in 0..cfg.newton_max_iter {
        if rn <= cfg.newton_tol {
            return Ok(EquilibriumResult {
                phi: u,
                residual_norm: rn,
                converged: true,
                iterations: it,
            });
        }
        let df = nemitski(spec, &u, 1)?;
        let mut jac = a.matrix().clone();
        jac.add_diagonal(&df.values().iter().map(|v| -v).collect::<Vec<_>>());
        let fac = BandLdlt::factor(&jac, 0.0, 1e-14 * scale)
            .map_err(|_| Error::SingularJacobian { iteration: it })?;
        let delta = fac.solve(r.values());
        let delta = Field::new(*u.grid(), delta)?;
        // backtrack on the residual norm
        let mut t = 1.0;
        loop {
            let trial = u.axpy(-t, &delta);
            let rt = residual(&trial, spec, a)?;
            let rtn = rt.dot(&rt).sqrt();
            if rtn < rn || t < 1e-4 {
                u = trial;
                r = rt;
                rn = rtn;
                break;
            }
            t *= 0.5;
        }
    }
    Ok(EquilibriumResult {
        converged: rn <= cfg.newton_tol,
        phi: u,
        residual_norm: rn,
        iterations: cfg.newton_max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_operator, Grid, PolynomialNonlinearity, Profile};
    use crate::semiflow::step;

    fn cfg() -> SemiflowConfig {
        SemiflowConfig::default()
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let g = Grid::unit_cube(3).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        for spec in [NonlinearitySpec::zero(), NonlinearitySpec::cubic(-1.0)] {
            let r = find_equilibrium(&Field::zeros(g), &spec, &a, &cfg()).unwrap();
            assert!(r.converged);
            assert_eq!(r.residual_norm, 0.0);
            assert!(r.phi.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn source_term_matches_dense_solve() {
        let g = Grid::unit_cube(3).unwrap();
        let a = assemble_operator(&g, &Field::constant(g, 0.5)).unwrap();
        let src: Profile = "gauss 3 0.5 0.4 0.6 0.3".parse().unwrap();
        let spec = NonlinearitySpec::polynomial(PolynomialNonlinearity::new(
            g.extents(),
            src.clone(),
            Profile::zero(),
            0.0,
            0.0,
        ));
        let r = find_equilibrium(&Field::zeros(g), &spec, &a, &cfg()).unwrap();
        assert!(r.converged);
        let m = a.matrix().to_dense();
        let b = nalgebra::DVector::from_vec(src.to_field(&g).into_values());
        let x = m.lu().solve(&b).unwrap();
        for (p, q) in r.phi.values().iter().zip(x.iter()) {
            assert!((p - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn equilibrium_is_fixed_point_of_step() {
        let g = Grid::unit_cube(4).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let spec = NonlinearitySpec::polynomial(PolynomialNonlinearity::new(
            g.extents(),
            "20".parse().unwrap(),
            Profile::zero(),
            0.0,
            -1.0,
        ));
        let r = find_equilibrium(&Field::zeros(g), &spec, &a, &cfg()).unwrap();
        assert!(r.converged);
        let next = step(&r.phi, &spec, &a, 1e-2).unwrap();
        let d = next.sub(&r.phi);
        assert!(d.dot(&d).sqrt() <= 1e-9);
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let g = Grid::unit_cube(3).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let spec = NonlinearitySpec::polynomial(PolynomialNonlinearity::new(
            g.extents(),
            "500".parse().unwrap(),
            Profile::zero(),
            0.0,
            -1.0,
        ));
        let c = SemiflowConfig {
            newton_max_iter: 1,
            ..cfg()
        };
        let r = find_equilibrium(&Field::zeros(g), &spec, &a, &c).unwrap();
        assert!(!r.converged);
    }
}
