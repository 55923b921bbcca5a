//! Linearized evolution along a base trajectory, Gram volumes and subspace
//! traces.
//!
//! The tangent map of one IMEX step `u+ = (I + dt A)^{-1} (u + dt f(u))` at
//! the base state `ubar` is `v+ = (I + dt A)^{-1} (v + dt f_u(ubar) v)`. The
//! evolution family `U(t, s)` is the composition of these maps, so it is the
//! exact derivative of the discrete semiflow and satisfies the cocycle
//! identity by construction.

mod dimension;
mod qr;

pub use dimension::{dimension_estimate, DimensionConfig, DimensionOutcome, DimensionReport};
pub(crate) use qr::qr_in_place;
pub use qr::{gram_determinant, gram_matrix, gram_volume, orthonormality_defect};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{nemitski, Field, Grid, NonlinearitySpec, OperatorKind, SymmetricOperator};
use crate::error::{Error, Result};
use crate::semiflow::{evolve, SemiflowConfig, Stepper, Trajectory};

/// Values recorded after each tangent step, indexed by sub-dimension `d' = 1..=d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentRecord {
    pub step: usize,
    pub time: f64,
    /// `log G_{d'}` of the propagated (never normalized) family.
    pub log_volume: Vec<f64>,
    /// `Tr(A(t) | E_{d'})`.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TangentBundle {
    vectors: Vec<Field>,
    reortho_stride: usize,
    step: usize,
    accumulated: Vec<f64>,
    history: Vec<TangentRecord>,
}

impl TangentBundle {
    /// Bundle at step 0 spanned by `vectors` (not normalized).
    pub fn new(vectors: Vec<Field>, reortho_stride: usize) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::invalid("a tangent bundle needs at least one vector"));
        };
        let grid = *first.grid();
        if vectors.len() > grid.dof() {
            return Err(Error::invalid(format!(
                "{} tangent vectors exceed {} degrees of freedom",
                vectors.len(),
                grid.dof()
            )));
        }
        for v in &vectors {
            v.ensure_grid(&grid)?;
        }
        if reortho_stride == 0 {
            return Err(Error::invalid("re-orthonormalization stride must be positive"));
        }
        let d = vectors.len();
        Ok(Self {
            vectors,
            reortho_stride,
            step: 0,
            accumulated: vec![0.0; d],
            history: Vec::new(),
        })
    }

    /// `d` orthonormalized random vectors from a seeded generator.
    pub fn random(grid: &Grid, d: usize, seed: u64, reortho_stride: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors: Vec<Field> = (0..d)
            .map(|_| {
                let vals = (0..grid.dof()).map(|_| rng.random::<f64>() - 0.5).collect();
                Field::new(*grid, vals)
            })
            .collect::<Result<_>>()?;
        qr::qr_in_place(&mut vectors)?;
        Self::new(vectors, reortho_stride)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Field] {
        &self.vectors
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn reortho_stride(&self) -> usize {
        self.reortho_stride
    }

    pub fn history(&self) -> &[TangentRecord] {
        &self.history
    }

    pub fn gram_matrix(&self) -> nalgebra::DMatrix<f64> {
        qr::gram_matrix(&self.vectors)
    }

    /// Records volumes and traces at the current step, re-orthonormalizing
    /// the stored vectors when the stride says so.
    fn record(&mut self, ubar: &Field, time: f64, spec: &NonlinearitySpec, a: &SymmetricOperator) -> Result<()> {
        let mut q = self.vectors.clone();
        let r = qr::qr_in_place(&mut q)?;
        let d = self.dim();
        let mut log_volume = Vec::with_capacity(d);
        let mut acc = 0.0;
        for (i, ri) in r.iter().enumerate() {
            acc += ri.ln();
            log_volume.push(self.accumulated[i] + acc);
        }
        let df = nemitski(spec, ubar, 1)?;
        let w = ubar.grid().cell_volume();
        let mut trace = Vec::with_capacity(d);
        let mut tr = 0.0;
        for qi in &q {
            let pot: f64 = qi
                .values()
                .iter()
                .zip(df.values())
                .map(|(x, p)| p * x * x)
                .sum::<f64>()
                * w;
            tr += a.form(qi, qi) - pot;
            trace.push(tr);
        }
        if self.step % self.reortho_stride == 0 {
            self.vectors = q;
            self.accumulated.clone_from(&log_volume);
        }
        self.history.push(TangentRecord {
            step: self.step,
            time,
            log_volume,
            trace,
        });
        Ok(())
    }
}

/// One tangent step at base state `ubar`.
pub(crate) fn tangent_step(stepper: &Stepper<'_>, df: &Field, v: &Field) -> Result<Field> {
    let dt = stepper.dt();
    let rhs: Vec<f64> = v
        .values()
        .iter()
        .zip(df.values())
        .map(|(x, p)| x + dt * p * x)
        .collect();
    let out = stepper.solve(&rhs, v.values())?;
    Field::new(*v.grid(), out)
}

fn ensure_dense_base(base: &Trajectory, cfg: &SemiflowConfig) -> Result<()> {
    if !base.is_dense() {
        return Err(Error::invalid("tangent propagation needs a base trajectory with stride 1"));
    }
    if (base.dt() - cfg.dt).abs() > 1e-15 * cfg.dt {
        return Err(Error::invalid(format!(
            "base trajectory dt {} differs from configured dt {}",
            base.dt(),
            cfg.dt
        )));
    }
    Ok(())
}

/// `A(t) = A - diag(f_u(x, ubar(t)))` at stored state `t_index`.
pub fn linearized_operator(
    base: &Trajectory,
    t_index: usize,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
) -> Result<SymmetricOperator> {
    let ubar = base.state(t_index).ok_or_else(|| {
        Error::invalid(format!("state index {t_index} out of range (len {})", base.len()))
    })?;
    let df = nemitski(spec, ubar, 1)?;
    let neg: Vec<f64> = df.values().iter().map(|v| -v).collect();
    Ok(a.with_diagonal(
        &neg,
        OperatorKind::Linearized {
            time: base.times()[t_index],
        },
    ))
}

/// Advances the bundle to the end of `base`, recording after every step.
pub fn propagate_tangents(
    mut bundle: TangentBundle,
    base: &Trajectory,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
    cfg: &SemiflowConfig,
) -> Result<TangentBundle> {
    ensure_dense_base(base, cfg)?;
    let last = base.len() - 1;
    if bundle.step > last {
        return Err(Error::invalid("bundle is ahead of the base trajectory"));
    }
    if bundle.step == last {
        return Ok(bundle);
    }
    let stepper = Stepper::new(a, cfg.dt, cfg.solver)?;
    if bundle.history.is_empty() {
        let n = bundle.step;
        bundle.record(&base.states()[n], n as f64 * cfg.dt, spec, a)?;
    }
    for n in bundle.step..last {
        let df = nemitski(spec, &base.states()[n], 1)?;
        bundle.vectors = bundle
            .vectors
            .iter()
            .map(|v| tangent_step(&stepper, &df, v))
            .collect::<Result<_>>()?;
        bundle.step = n + 1;
        bundle.record(&base.states()[n + 1], (n + 1) as f64 * cfg.dt, spec, a)?;
    }
    Ok(bundle)
}

/// `U(to, from) v` along a dense base trajectory, without normalization.
pub fn apply_evolution(
    base: &Trajectory,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
    cfg: &SemiflowConfig,
    from_step: usize,
    to_step: usize,
    v: &Field,
) -> Result<Field> {
    ensure_dense_base(base, cfg)?;
    if from_step > to_step || to_step >= base.len() {
        return Err(Error::invalid(format!(
            "cannot evolve from step {from_step} to {to_step} on {} states",
            base.len()
        )));
    }
    let stepper = Stepper::new(a, cfg.dt, cfg.solver)?;
    let mut w = v.clone();
    for n in from_step..to_step {
        let df = nemitski(spec, &base.states()[n], 1)?;
        w = tangent_step(&stepper, &df, &w)?;
    }
    Ok(w)
}

/// `|U(t,s) U(s,r) v - U(t,r) v| / |v|` for lattice times `r <= s <= t`.
#[allow(clippy::too_many_arguments)]
pub fn cocycle_residual(
    base: &Trajectory,
    r: f64,
    s: f64,
    t: f64,
    v: &Field,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
    cfg: &SemiflowConfig,
) -> Result<f64> {
    let ir = base.index_of_time(r)?;
    let is = base.index_of_time(s)?;
    let it = base.index_of_time(t)?;
    if !(ir <= is && is <= it) {
        return Err(Error::invalid(format!("times must satisfy r <= s <= t, got {r}, {s}, {t}")));
    }
    let nv = v.dot(v).sqrt();
    if nv == 0.0 {
        return Err(Error::invalid("cocycle test vector is zero"));
    }
    let steps = base.step_numbers();
    let mid = apply_evolution(base, spec, a, cfg, steps[ir], steps[is], v)?;
    let composed = apply_evolution(base, spec, a, cfg, steps[is], steps[it], &mid)?;
    let direct = apply_evolution(base, spec, a, cfg, steps[ir], steps[it], v)?;
    let d = composed.sub(&direct);
    Ok(d.dot(&d).sqrt() / nv)
}

/// `|pi(t, v0) - pi(t, u0) - U(u0; t)(v0 - u0)| / |v0 - u0|`.
pub fn differentiability_residual(
    u0: &Field,
    v0: &Field,
    t: f64,
    cfg: &SemiflowConfig,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
) -> Result<f64> {
    let h = v0.sub(u0);
    let hn = h.dot(&h).sqrt();
    if hn == 0.0 {
        return Err(Error::invalid("differentiability residual needs distinct states"));
    }
    let n = (t / cfg.dt).round();
    if t < 0.0 || (n * cfg.dt - t).abs() > 1e-9 * cfg.dt.max(t) {
        return Err(Error::OffLattice(t));
    }
    if n == 0.0 {
        return Ok(0.0);
    }
    let run = SemiflowConfig {
        t_end: n * cfg.dt,
        snapshot_stride: 1,
        ..*cfg
    };
    // t_end must exceed dt for a valid run; a single step is handled directly
    let (tu, pv) = if n as usize == 1 {
        let stepper = Stepper::new(a, cfg.dt, cfg.solver)?;
        let u1 = stepper.step(u0, spec)?;
        let v1 = stepper.step(v0, spec)?;
        let df = nemitski(spec, u0, 1)?;
        let lin = tangent_step(&stepper, &df, &h)?;
        let r = v1.sub(&u1).sub(&lin);
        return Ok(r.dot(&r).sqrt() / hn);
    } else {
        (evolve(u0, &run, spec, a)?, evolve(v0, &run, spec, a)?)
    };
    let last = tu.len() - 1;
    let lin = apply_evolution(&tu, spec, a, &run, 0, last, &h)?;
    let r = pv.last().sub(tu.last()).sub(&lin);
    Ok(r.dot(&r).sqrt() / hn)
}

/// `sum_i <op phi_i, phi_i>` over an `L2`-orthonormal basis.
pub fn trace_on_subspace(op: &SymmetricOperator, basis: &[Field]) -> Result<f64> {
    let defect = orthonormality_defect(basis);
    if defect > 1e-8 {
        return Err(Error::invalid(format!("basis is not orthonormal (defect {defect:e})")));
    }
    for b in basis {
        crate::domain::operator::check_same_grid(op, b)?;
    }
    Ok(basis.iter().map(|phi| op.form(phi, phi)).sum())
}

/// `max |Delta log G / Delta t + Tr|` over consecutive records for the full
/// bundle dimension, with the trace taken at the left endpoint.
pub fn volume_ode_residual(bundle: &TangentBundle) -> Result<f64> {
    volume_ode_residual_for(bundle, bundle.dim())
}

pub fn volume_ode_residual_for(bundle: &TangentBundle, d: usize) -> Result<f64> {
    let h = bundle.history();
    if h.is_empty() {
        return Err(Error::invalid("tangent bundle has no history"));
    }
    if d == 0 || d > bundle.dim() {
        return Err(Error::invalid(format!("sub-dimension {d} outside 1..={}", bundle.dim())));
    }
    Ok(h.windows(2)
        .map(|w| {
            let dt = w[1].time - w[0].time;
            ((w[1].log_volume[d - 1] - w[0].log_volume[d - 1]) / dt + w[0].trace[d - 1]).abs()
        })
        .fold(0.0, f64::max))
}
