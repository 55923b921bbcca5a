use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::operator::OperatorKind;
use crate::domain::{Field, SymmetricOperator};
use crate::error::{Error, Result};
use crate::linalg::{count_below_inertia, dense_symmetric_eigen, dense_symmetric_eigenvalues, lowest_eigenpairs, LanczosOptions};

/// Largest number of unknowns for which the dense oracle may be used.
pub const DENSE_ORACLE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    DenseOracle,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub k_eigs: usize,
    pub method: EigenMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            k_eigs: 5,
            method: EigenMethod::Iterative,
            tol: 1e-10,
            max_iter: 600,
            seed: 0x5eed,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_eigs == 0 {
            return Err(Error::invalid("k_eigs must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("spectral tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }

    fn lanczos(&self) -> LanczosOptions {
        LanczosOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            ..LanczosOptions::default()
        }
    }
}

/// Ascending eigenvalues with eigenvectors normalized in the weighted `L2` product.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Field>,
}

fn dense_guard(op: &SymmetricOperator) -> Result<()> {
    if op.dof() > DENSE_ORACLE_LIMIT {
        return Err(Error::invalid(format!(
            "dense oracle refused for {} unknowns (limit {DENSE_ORACLE_LIMIT})",
            op.dof()
        )));
    }
    Ok(())
}

/// Lowest `k` eigenpairs of `op`.
pub fn lowest_eigs_k(op: &SymmetricOperator, k: usize, cfg: &SpectralConfig) -> Result<Spectrum> {
    cfg.validate()?;
    let n = op.dof();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("requested {k} eigenpairs of a {n}-unknown operator")));
    }
    let norm = op.matrix().norm_bound().max(f64::MIN_POSITIVE);
    let (values, raw): (Vec<f64>, Vec<Vec<f64>>) = match cfg.method {
        EigenMethod::DenseOracle => {
            dense_guard(op)?;
            let (vals, vecs) = dense_symmetric_eigen(op.matrix().to_dense());
            let cols = (0..k).map(|c| vecs.column(c).iter().copied().collect()).collect();
            (vals[..k].to_vec(), cols)
        }
        EigenMethod::Iterative => {
            let p = lowest_eigenpairs(op, None, k, norm, &cfg.lanczos())?;
            (p.values, p.vectors)
        }
    };
    let mut vectors = Vec::with_capacity(k);
    let mut mv = vec![0.0; n];
    for (lam, v) in values.iter().zip(&raw) {
        op.matrix().matvec(v, &mut mv);
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let res = mv.iter().zip(v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        if !(res <= cfg.tol * norm * vnorm.max(1.0)) {
            return Err(Error::EigenNonConvergence(format!(
                "eigenpair residual {res:e} exceeds {:e} for value {lam}",
                cfg.tol * norm
            )));
        }
        let s = 1.0 / (vnorm * op.grid().cell_volume().sqrt());
        vectors.push(Field::new(*op.grid(), v.iter().map(|x| x * s).collect())?);
    }
    Ok(Spectrum { values, vectors })
}

/// Lowest `cfg.k_eigs` eigenpairs.
pub fn lowest_eigs(op: &SymmetricOperator, cfg: &SpectralConfig) -> Result<Spectrum> {
    lowest_eigs_k(op, cfg.k_eigs, cfg)
}

/// Smallest eigenvalue of `A`; coercivity fails unless it is positive.
pub fn lambda1(a: &SymmetricOperator, cfg: &SpectralConfig) -> Result<f64> {
    let l = lowest_eigs_k(a, 1, cfg)?.values[0];
    if l > 0.0 {
        Ok(l)
    } else {
        Err(Error::HypothesisViolation {
            what: "smallest eigenvalue of A must be positive".into(),
            value: l,
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("delta must lie in (0,1)"))
    }
}

/// `(1 - delta) A - diag(d_u f(., 0))`
pub fn assemble_a_delta(a: &SymmetricOperator, dfu0: &Field, delta: f64) -> Result<SymmetricOperator> {
    check_delta(delta)?;
    crate::domain::operator::check_same_grid(a, dfu0)?;
    let d: Vec<f64> = dfu0.values().iter().map(|x| -x).collect();
    Ok(a.scaled_plus_diagonal(1.0 - delta, &d, OperatorKind::Delta { delta }))
}

/// `(1 - delta) A - 3 eps - diag(V)`
pub fn assemble_a_delta_eps(a: &SymmetricOperator, v: &Field, delta: f64, eps: f64) -> Result<SymmetricOperator> {
    check_delta(delta)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    crate::domain::operator::check_same_grid(a, v)?;
    let d: Vec<f64> = v.values().iter().map(|x| -x - 3.0 * eps).collect();
    Ok(a.scaled_plus_diagonal(1.0 - delta, &d, OperatorKind::DeltaEps { delta, eps }))
}

/// Smallest admissible potential for the splitting `d_u f(x,0) <= V(x) + eps`,
/// namely the positive part of `d_u f(x,0) - eps`.
pub fn positive_part_potential(dfu0: &Field, eps: f64) -> Field {
    dfu0.map(|x| (x - eps).max(0.0))
}

/// Lowest `j_max` proper values. On a grid these are plain eigenvalues.
pub fn proper_values(a_delta: &SymmetricOperator, j_max: usize, cfg: &SpectralConfig) -> Result<Vec<f64>> {
    Ok(lowest_eigs_k(a_delta, j_max, cfg)?.values)
}

/// Outcome of [`count_below`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub count: usize,
    pub lambda: f64,
    /// Shift actually used; differs from `lambda` after a breakdown retry.
    pub shift_used: f64,
}

/// Number of eigenvalues strictly below `lambda`. The dense-oracle method uses
/// the inertia of a banded `LDL^T` factorization of `op - lambda`; the
/// iterative method grows Lanczos windows at both ends of the spectrum until
/// one of them passes `lambda`.
pub fn count_below(op: &SymmetricOperator, lambda: f64, cfg: &SpectralConfig) -> Result<CountReport> {
    if !lambda.is_finite() {
        return Err(Error::invalid(format!("count threshold must be finite, got {lambda}")));
    }
    match cfg.method {
        EigenMethod::DenseOracle => {
            let (count, shift_used) = count_below_inertia(op.matrix(), lambda)?;
            Ok(CountReport {
                count,
                lambda,
                shift_used,
            })
        }
        EigenMethod::Iterative => {
            let n = op.dof();
            let (lo, hi) = op.matrix().gershgorin();
            if lambda <= lo {
                return Ok(CountReport { count: 0, lambda, shift_used: lambda });
            }
            if lambda > hi {
                return Ok(CountReport { count: n, lambda, shift_used: lambda });
            }
            // grow windows from both ends; whichever passes lambda first decides
            let neg = op.scaled_plus_diagonal(-1.0, &vec![0.0; n], op.kind());
            let mut k = 8.min(n);
            loop {
                let low = lowest_eigs_k(op, k, cfg)?.values;
                if low[k - 1] >= lambda || k == n {
                    let count = low.iter().filter(|&&v| v < lambda).count();
                    return Ok(CountReport { count, lambda, shift_used: lambda });
                }
                let high = lowest_eigs_k(&neg, k, cfg)?.values;
                if -high[k - 1] < lambda {
                    let at_or_above = high.iter().filter(|&&v| -v >= lambda).count();
                    return Ok(CountReport { count: n - at_or_above, lambda, shift_used: lambda });
                }
                k = (2 * k).min(n);
            }
        }
    }
}

/// Compression of `op` to an independent family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinMaxReport {
    /// Ascending eigenvalues of the compressed `d x d` problem.
    pub compressed: Vec<f64>,
    /// Lowest `d` eigenvalues of the full operator.
    pub full: Vec<f64>,
    /// `min_j (compressed_j - full_j)`; nonnegative certifies the comparison.
    pub min_difference: f64,
}

/// Compares the eigenvalues of `op` restricted to `span(basis)` with the
/// lowest eigenvalues of `op`. The basis is orthonormalized internally; a
/// rank-deficient family is refused.
pub fn subspace_minmax_check(op: &SymmetricOperator, basis: &[Field], cfg: &SpectralConfig) -> Result<MinMaxReport> {
    let d = basis.len();
    if d == 0 || d > op.dof() {
        return Err(Error::invalid(format!("subspace dimension {d} outside 1..={}", op.dof())));
    }
    for b in basis {
        crate::domain::operator::check_same_grid(op, b)?;
    }
    let mut r = basis.to_vec();
    let diag = crate::tangent::qr_in_place(&mut r).map_err(|e| match e {
        Error::DegenerateBundle { index, value } => {
            Error::invalid(format!("rank-deficient basis: pivot {index} is {value:e}"))
        }
        other => other,
    })?;
    for (i, (rii, b)) in diag.iter().zip(basis).enumerate() {
        if *rii <= 1e-10 * b.dot(b).sqrt() {
            return Err(Error::invalid(format!("rank-deficient basis: pivot {i} is {rii:e}")));
        }
    }
    let aq: Vec<Field> = r.iter().map(|v| op.apply_field(v)).collect();
    let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (aq[i].dot(&r[j]) + aq[j].dot(&r[i])));
    let compressed = dense_symmetric_eigenvalues(m);
    let full = if d == op.dof() && op.dof() <= DENSE_ORACLE_LIMIT {
        dense_symmetric_eigenvalues(op.matrix().to_dense())
    } else {
        lowest_eigs_k(op, d, cfg)?.values
    };
    let min_difference = compressed
        .iter()
        .zip(&full)
        .map(|(c, f)| c - f)
        .fold(f64::INFINITY, f64::min);
    Ok(MinMaxReport {
        compressed,
        full,
        min_difference,
    })
}
