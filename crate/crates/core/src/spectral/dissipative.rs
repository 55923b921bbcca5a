use serde::{Deserialize, Serialize};

use crate::domain::norms::{h1_norm, lp_norm};
use crate::domain::{Field, NonlinearitySpec};
use crate::error::{Error, Result};
use crate::semiflow::EquilibriumResult;

/// Checks `f(x,u) u <= D(x) |u|` at every node for `samples` values of `u`
/// spread symmetrically over `[-u_max, u_max]`. The error names the first
/// violating node and value.
pub fn check_dissipation(spec: &NonlinearitySpec, d_field: &Field, u_max: f64, samples: usize) -> Result<()> {
    if !(u_max > 0.0 && u_max.is_finite()) || samples < 2 {
        return Err(Error::invalid("dissipation lattice needs u_max > 0 and at least two samples"));
    }
    let g = d_field.grid();
    for (node, &d) in d_field.values().iter().enumerate() {
        let x = g.position(node);
        for s in 0..samples {
            let u = -u_max + 2.0 * u_max * s as f64 / (samples - 1) as f64;
            let lhs = spec.value(x, u) * u;
            let rhs = d * u.abs();
            if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
                return Err(Error::HypothesisViolation {
                    what: format!("f(x,u) u <= D(x) |u| fails at node {node}, x = {x:?}, u = {u}"),
                    value: lhs - rhs,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    /// `M_{q'} |D|_{Lq} / lambda0`
    pub phi_bound: f64,
    /// `H1` norm of the supplied equilibrium.
    pub phi_h1: f64,
    pub d_lq: f64,
    /// `int F(x, phi)`
    pub int_f_phi: f64,
    /// Radius of the absorbing `H1` ball.
    pub s: f64,
}

/// Equilibrium bound and absorbing radius. With `eps = lambda0 / (2 M^2)`,
/// `lambda0 |u|^2 <= eps M^2 |u|^2 + |D|^2/(4 eps) + Lambda0 |phi|^2 + int F(phi)`
/// gives `S^2 = M^2 |D|^2 / lambda0^2 + (2/lambda0)(Lambda0 |phi|^2 + int F(phi))`,
/// clamped at zero. `M` is the `L^{q'}` embedding constant.
pub fn attractor_radius(
    d_field: &Field,
    q: f64,
    lambda0: f64,
    big_lambda0: f64,
    m_qprime: f64,
    equilibrium: &EquilibriumResult,
    spec: &NonlinearitySpec,
) -> Result<RadiusReport> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::invalid(format!("q must exceed 1, got {q}")));
    }
    for (name, v) in [("lambda0", lambda0), ("Lambda0", big_lambda0), ("M_q'", m_qprime)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let phi = &equilibrium.phi;
    phi.ensure_grid(d_field.grid())?;
    let d_lq = lp_norm(d_field, q);
    let phi_h1 = h1_norm(phi);
    let g = phi.grid();
    let mut int_f = 0.0;
    for (node, &v) in phi.values().iter().enumerate() {
        int_f += spec
            .primitive(g.position(node), v)
            .ok_or(Error::Quadrature { node })?;
    }
    int_f *= g.cell_volume();
    let m2 = m_qprime * m_qprime;
    let s2 = m2 * d_lq * d_lq / (lambda0 * lambda0) + 2.0 / lambda0 * (big_lambda0 * phi_h1 * phi_h1 + int_f);
    Ok(RadiusReport {
        phi_bound: m_qprime * d_lq / lambda0,
        phi_h1,
        d_lq,
        int_f_phi: int_f,
        s: s2.max(0.0).sqrt(),
    })
}
