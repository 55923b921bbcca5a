use serde::{Deserialize, Serialize};

use super::{Field, Grid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    H1,
    Lp(f64),
    /// Uniform-local `L^sigma_u`: sup over unit cubes of the local `L^sigma` norm.
    UniformLocal(f64),
}

pub fn norm(u: &Field, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::L2 => Ok(u.dot(u).sqrt()),
        NormKind::H1 => Ok(h1_norm(u)),
        NormKind::Lp(p) => {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::invalid(format!("Lp norm needs p in [1, inf), got {p}")));
            }
            Ok(lp_norm(u, p))
        }
        NormKind::UniformLocal(sigma) => {
            if !(sigma >= 1.0 && sigma.is_finite()) {
                return Err(Error::invalid(format!(
                    "uniform-local norm needs sigma >= 1, got {sigma}"
                )));
            }
            Ok(uniform_local_norm(u, sigma))
        }
    }
}

pub fn l2_norm(u: &Field) -> f64 {
    u.dot(u).sqrt()
}

pub fn lp_norm(u: &Field, p: f64) -> f64 {
    let w = u.grid().cell_volume();
    (u.values().iter().map(|v| v.abs().powf(p)).sum::<f64>() * w).powf(1.0 / p)
}

pub fn h1_norm(u: &Field) -> f64 {
    (gradient_energy(u) + u.dot(u)).sqrt()
}

/// `|grad_h u|^2` from forward differences over every grid edge, boundary
/// edges included (zero extension).
pub fn gradient_energy(u: &Field) -> f64 {
    let g = u.grid();
    let [nx, ny, nz] = g.points();
    let h = g.spacing();
    let v = u.values();
    let mut total = 0.0;
    for (axis, &n_axis) in [nx, ny, nz].iter().enumerate() {
        let inv_h2 = 1.0 / (h[axis] * h[axis]);
        let mut acc = 0.0;
        for idx in 0..g.dof() {
            let (i, j, k) = g.coords(idx);
            let pos = [i, j, k][axis];
            // edge to the previous node (zero at the lower boundary)
            let prev = if pos == 0 {
                0.0
            } else {
                let (mut a, mut b, mut c) = (i, j, k);
                match axis {
                    0 => a -= 1,
                    1 => b -= 1,
                    _ => c -= 1,
                }
                v[g.index(a, b, c)]
            };
            let d = v[idx] - prev;
            acc += d * d;
            // closing edge at the upper boundary
            if pos + 1 == n_axis {
                acc += v[idx] * v[idx];
            }
        }
        total += acc * inv_h2;
    }
    total * g.cell_volume()
}

/// Sup over open unit cubes centered at grid nodes of `(int_B |u|^sigma)^{1/sigma}`,
/// with `u` extended by zero outside the box.
pub fn uniform_local_norm(u: &Field, sigma: f64) -> f64 {
    let g = u.grid();
    let w = g.cell_volume();
    let vals: Vec<f64> = u.values().iter().map(|v| v.abs().powf(sigma)).collect();
    let sums = BoxSums::new(g, &vals);
    let h = g.spacing();
    // node offsets strictly inside half-width 1/2
    let reach: [usize; 3] = std::array::from_fn(|a| {
        let r = 0.5 / h[a];
        let f = r.floor();
        if (r - f).abs() < 1e-12 * r.max(1.0) {
            (f as usize).saturating_sub(1)
        } else {
            f as usize
        }
    });
    let [nx, ny, nz] = g.points();
    let mut best: f64 = 0.0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let lo = [
                    i.saturating_sub(reach[0]),
                    j.saturating_sub(reach[1]),
                    k.saturating_sub(reach[2]),
                ];
                let hi = [
                    (i + reach[0]).min(nx - 1),
                    (j + reach[1]).min(ny - 1),
                    (k + reach[2]).min(nz - 1),
                ];
                best = best.max(sums.sum(lo, hi));
            }
        }
    }
    (best * w).powf(1.0 / sigma)
}

/// 3-D summed-area table.
struct BoxSums {
    dims: [usize; 3],
    table: Vec<f64>,
}

impl BoxSums {
    fn new(g: &Grid, vals: &[f64]) -> Self {
        let [nx, ny, nz] = g.points();
        let dims = [nx + 1, ny + 1, nz + 1];
        let mut table = vec![0.0; dims[0] * dims[1] * dims[2]];
        let at = |i: usize, j: usize, k: usize| i + dims[0] * (j + dims[1] * k);
        for k in 1..=nz {
            for j in 1..=ny {
                for i in 1..=nx {
                    let v = vals[g.index(i - 1, j - 1, k - 1)];
                    table[at(i, j, k)] = v + table[at(i - 1, j, k)] + table[at(i, j - 1, k)]
                        + table[at(i, j, k - 1)]
                        - table[at(i - 1, j - 1, k)]
                        - table[at(i - 1, j, k - 1)]
                        - table[at(i, j - 1, k - 1)]
                        + table[at(i - 1, j - 1, k - 1)];
                }
            }
        }
        Self { dims, table }
    }

    /// Inclusive node box `[lo, hi]`.
    fn sum(&self, lo: [usize; 3], hi: [usize; 3]) -> f64 {
        let d = self.dims;
        let at = |i: usize, j: usize, k: usize| self.table[i + d[0] * (j + d[1] * k)];
        let (i0, j0, k0) = (lo[0], lo[1], lo[2]);
        let (i1, j1, k1) = (hi[0] + 1, hi[1] + 1, hi[2] + 1);
        at(i1, j1, k1) - at(i0, j1, k1) - at(i1, j0, k1) - at(i1, j1, k0)
            + at(i0, j0, k1)
            + at(i0, j1, k0)
            + at(i1, j0, k0)
            - at(i0, j0, k0)
    }
}
