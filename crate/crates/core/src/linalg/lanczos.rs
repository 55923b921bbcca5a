//! Lanczos with full reorthogonalization and locking restarts.
//!
//! A single Krylov sequence sees at most one direction of every eigenspace,
//! so degenerate eigenvalues (common on cubes) are recovered by restarting
//! from a fresh random vector orthogonal to everything locked so far. The
//! iteration stops once a restart finds nothing below the current k-th
//! locked eigenvalue.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the operator scale.
    pub tol: f64,
    /// Krylov dimension cap per restart.
    pub max_iter: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 600,
            max_restarts: 40,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit vectors in the inner product the solver was run with.
    pub vectors: Vec<Vec<f64>>,
}

struct Locked {
    value: f64,
    vector: Vec<f64>,
    b_vector: Vec<f64>,
}

/// Lowest `k` eigenpairs of `op`, self-adjoint in the inner product
/// `<x, y> = x^T B y` (`inner = Some(B)`) or the Euclidean one.
///
/// Convergence means `|op v - theta v|_B <= tol * scale` for every returned pair.
pub fn lowest_eigenpairs(
    op: &dyn LinearOperator,
    inner: Option<&dyn LinearOperator>,
    k: usize,
    scale: f64,
    opts: &LanczosOptions,
) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 {
        return Ok(EigenPairs {
            values: vec![],
            vectors: vec![],
        });
    }
    if k > n {
        return Err(Error::invalid(format!("requested {k} eigenpairs of a {n}-dimensional operator")));
    }
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let target = opts.tol * scale;
    let apply_b = |x: &[f64]| -> Vec<f64> {
        match inner {
            Some(b) => {
                let mut y = vec![0.0; n];
                b.apply(x, &mut y);
                y
            }
            None => x.to_vec(),
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Locked> = Vec::new();

    for _restart in 0..opts.max_restarts {
        let avail = n - locked.len();
        if avail == 0 {
            break;
        }
        let m_max = opts.max_iter.min(avail).max(1);

        // random start, deflated against the locked vectors
        let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for l in &locked {
                let c = dot(&l.b_vector, &q);
                axpy(-c, &l.vector, &mut q);
            }
        }
        let mut bq = apply_b(&q);
        let nrm = dot(&q, &bq).sqrt();
        if nrm == 0.0 {
            break;
        }
        scale_in_place(&mut q, 1.0 / nrm);
        scale_in_place(&mut bq, 1.0 / nrm);

        let mut basis: Vec<Vec<f64>> = vec![q];
        let mut b_basis: Vec<Vec<f64>> = vec![bq];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut last_beta = 0.0;
        let want = k.min(avail);
        let mut w = vec![0.0; n];

        for j in 0..m_max {
            op.apply(&basis[j], &mut w);
            let a = dot(&b_basis[j], &w);
            alpha.push(a);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            // two passes of classical Gram-Schmidt against everything kept
            for _ in 0..2 {
                for l in &locked {
                    let c = dot(&l.b_vector, &w);
                    axpy(-c, &l.vector, &mut w);
                }
                for (v, bv) in basis.iter().zip(&b_basis) {
                    let c = dot(bv, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let bw = apply_b(&w);
            let b = dot(&w, &bw).max(0.0).sqrt();
            last_beta = b;

            let dim = j + 1;
            let exhausted = b <= 1e-12 * scale || dim == m_max;
            if exhausted || (dim >= want && dim % 10 == 0) {
                let (vals, vecs) = tridiagonal_eigen(&alpha, &beta);
                let converged = vals
                    .iter()
                    .enumerate()
                    .take_while(|&(i, _)| (b * vecs[(dim - 1, i)]).abs() <= target)
                    .count();
                if exhausted || converged >= want {
                    break;
                }
            }
            beta.push(b);
            let inv = 1.0 / b;
            basis.push(w.iter().map(|x| x * inv).collect());
            b_basis.push(bw.iter().map(|x| x * inv).collect());
        }

        let dim = alpha.len();
        let (vals, vecs) = tridiagonal_eigen(&alpha, &beta);
        let lowest_new = vals[0];

        if locked.len() >= k {
            let mut sorted: Vec<f64> = locked.iter().map(|l| l.value).collect();
            sorted.sort_by(f64::total_cmp);
            let converged_bottom = (last_beta * vecs[(dim - 1, 0)]).abs() <= target;
            if converged_bottom && lowest_new >= sorted[k - 1] - target {
                return Ok(collect_lowest(locked, k));
            }
        }

        let mut added = 0;
        for i in 0..dim {
            if (last_beta * vecs[(dim - 1, i)]).abs() > target {
                break;
            }
            let mut y = vec![0.0; n];
            for (c, v) in basis.iter().enumerate().take(dim) {
                axpy(vecs[(c, i)], v, &mut y);
            }
            let mut by = apply_b(&y);
            let nrm = dot(&y, &by).sqrt();
            scale_in_place(&mut y, 1.0 / nrm);
            scale_in_place(&mut by, 1.0 / nrm);
            locked.push(Locked {
                value: vals[i],
                vector: y,
                b_vector: by,
            });
            added += 1;
        }
        if added == 0 {
            return Err(Error::EigenNonConvergence(format!(
                "no Ritz pair reached tolerance {target:e} within {dim} Lanczos steps"
            )));
        }
    }

    if locked.len() >= k && locked.len() == n {
        return Ok(collect_lowest(locked, k));
    }
    Err(Error::EigenNonConvergence(format!(
        "{} restarts exhausted with {} of {k} pairs locked",
        opts.max_restarts,
        locked.len()
    )))
}

fn collect_lowest(mut locked: Vec<Locked>, k: usize) -> EigenPairs {
    locked.sort_by(|a, b| a.value.total_cmp(&b.value));
    locked.truncate(k);
    EigenPairs {
        values: locked.iter().map(|l| l.value).collect(),
        vectors: locked.into_iter().map(|l| l.vector).collect(),
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn scale_in_place(x: &mut [f64], s: f64) {
    x.iter_mut().for_each(|v| *v *= s);
}
