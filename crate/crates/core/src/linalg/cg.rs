use super::{dot, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Conjugate gradients for a symmetric positive definite operator.
///
/// `x` holds the initial guess on entry and the solution on exit. Stops when
/// `|b - Ax| <= rel_tol |b|`.
pub fn conjugate_gradient(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    opts: CgOptions,
) -> Result<CgStats> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            rel_residual: 0.0,
        });
    }

    let mut ax = vec![0.0; n];
    op.apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = opts.rel_tol * b_norm;

    for it in 0..opts.max_iter {
        if rr.sqrt() <= target {
            return Ok(CgStats {
                iterations: it,
                rel_residual: rr.sqrt() / b_norm,
            });
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::NotPositiveDefinite {
                iteration: it,
                curvature: pap,
            });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }

    // recompute the true residual before giving up
    op.apply(x, &mut ax);
    let res = b
        .iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt();
    if res <= target {
        Ok(CgStats {
            iterations: opts.max_iter,
            rel_residual: res / b_norm,
        })
    } else {
        Err(Error::LinearSolve {
            iterations: opts.max_iter,
            residual: res / b_norm,
        })
    }
}
