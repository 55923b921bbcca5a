use serde::{Deserialize, Serialize};

use super::{evolve, SemiflowConfig, Trajectory};
use crate::domain::norms::h1_norm;
use crate::domain::{Field, NonlinearitySpec, SymmetricOperator};
use crate::error::{Error, Result};

/// `L(u) = a(u,u) - int F(x,u) dx` with `F(x,u) = int_0^u f(x,s) ds`.
pub fn lyapunov_value(u: &Field, spec: &NonlinearitySpec, a: &SymmetricOperator) -> Result<f64> {
    crate::domain::operator::check_same_grid(a, u)?;
    let g = u.grid();
    let mut integral = 0.0;
    for (node, &v) in u.values().iter().enumerate() {
        let big_f = spec
            .primitive(g.position(node), v)
            .ok_or(Error::Quadrature { node })?;
        integral += big_f;
    }
    Ok(a.form(u, u) - integral * g.cell_volume())
}

/// `(t, |u|_{L2}, |u|_{H1}, L(u))` at every stored state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub time: f64,
    pub l2: f64,
    pub h1: f64,
    pub lyapunov: f64,
}

pub fn trajectory_series(traj: &Trajectory, spec: &NonlinearitySpec, a: &SymmetricOperator) -> Result<Vec<SeriesRow>> {
    traj.times()
        .into_iter()
        .zip(traj.states())
        .map(|(time, u)| {
            Ok(SeriesRow {
                time,
                l2: u.dot(u).sqrt(),
                h1: h1_norm(u),
                lyapunov: lyapunov_value(u, spec, a)?,
            })
        })
        .collect()
}

/// Constants fitted a posteriori to one pair of trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    /// Smallest `K` with `|z(t)|^2 + lambda0 int_0^t |z|_{H1}^2 <= e^{K t} |z(0)|^2`.
    pub k_fit: f64,
    /// Smallest `L` with `|z(t)|_{H1} <= L t^{-(alpha + 1/2)} |z(0)|_{L2}`.
    pub smoothing_fit: f64,
    /// Largest `(LHS - RHS) / |z(0)|^2` of the contraction inequality at `k_fit`.
    pub max_violation: f64,
    pub samples: usize,
}

/// Evolves `u0` and `v0` and fits the contraction and smoothing constants for
/// `z = u - v`. The time integral uses the right-endpoint rule over the steps,
/// which is what the implicit step dissipates exactly.
pub fn pair_diagnostics(
    u0: &Field,
    v0: &Field,
    cfg: &SemiflowConfig,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
    lambda0: f64,
) -> Result<PairReport> {
    let z0 = u0.sub(v0);
    let z0sq = z0.dot(&z0);
    if z0sq == 0.0 {
        return Err(Error::invalid("pair diagnostics need distinct initial states"));
    }
    if !(lambda0 > 0.0) {
        return Err(Error::invalid(format!("lambda0 must be positive, got {lambda0}")));
    }
    let dense = SemiflowConfig {
        snapshot_stride: 1,
        ..*cfg
    };
    let tu = evolve(u0, &dense, spec, a)?;
    let tv = evolve(v0, &dense, spec, a)?;
    let times = tu.times();
    let exponent = cfg.alpha + 0.5;

    let mut integral = 0.0;
    let mut lhs = Vec::with_capacity(times.len());
    let mut k_fit = f64::NEG_INFINITY;
    let mut smoothing: f64 = 0.0;
    for (n, (u, v)) in tu.states().iter().zip(tv.states()).enumerate().skip(1) {
        let z = u.sub(v);
        let h1 = h1_norm(&z);
        integral += cfg.dt * h1 * h1;
        let l = z.dot(&z) + lambda0 * integral;
        let t = times[n];
        k_fit = k_fit.max((l / z0sq).ln() / t);
        smoothing = smoothing.max(h1 * t.powf(exponent) / z0sq.sqrt());
        lhs.push((t, l));
    }
    let max_violation = lhs
        .iter()
        .map(|&(t, l)| (l - (k_fit * t).exp() * z0sq) / z0sq)
        .fold(0.0, f64::max);
    Ok(PairReport {
        k_fit,
        smoothing_fit: smoothing,
        max_violation,
        samples: lhs.len(),
    })
}
