//! IMEX Euler integration of `u_t + A u = f(u)`, equilibria, the Lyapunov
//! functional and trajectory-pair diagnostics.

mod diagnostics;
mod newton;

pub use diagnostics::{lyapunov_value, pair_diagnostics, trajectory_series, PairReport, SeriesRow};
pub use newton::{find_equilibrium, EquilibriumResult};

use serde::{Deserialize, Serialize};

use crate::domain::{nemitski, Field, NonlinearitySpec, SymmetricOperator};
use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, BandLdlt, CgOptions, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// `(I + dt A) u+ = u + dt f(u)`
    ImexEuler,
}

/// How the implicit systems `(I + dt A) x = b` are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearSolver {
    /// Conjugate gradients to relative residual `1e-10`.
    Cg,
    /// Banded `L D L^T`, factored once per run.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiflowConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Exponent of the smoothing diagnostic, in `(0, 1/2]`.
    pub alpha: f64,
    /// Keep every `snapshot_stride`-th state.
    pub snapshot_stride: usize,
    /// `L2` norm above which a run is declared blown up.
    pub blowup_threshold: f64,
    pub solver: LinearSolver,
}

impl Default for SemiflowConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::ImexEuler,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            alpha: 0.25,
            snapshot_stride: 1,
            blowup_threshold: 1e8,
            solver: LinearSolver::Cg,
        }
    }
}

impl SemiflowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > self.dt && self.t_end.is_finite()) {
            return Err(Error::invalid(format!(
                "t_end ({}) must exceed dt ({})",
                self.t_end, self.dt
            )));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::invalid("Newton tolerance and iteration cap must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1/2], got {}", self.alpha)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::invalid("snapshot stride must be positive"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::invalid("blow-up threshold must be positive"));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// States of one run at lattice times `n * dt` for `n` a multiple of the stride
/// (the final step is always kept).
#[derive(Debug, Clone)]
pub struct Trajectory {
    dt: f64,
    steps: Vec<usize>,
    states: Vec<Field>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|&n| n as f64 * self.dt).collect()
    }

    /// Step numbers of the stored states.
    pub fn step_numbers(&self) -> &[usize] {
        &self.steps
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn state(&self, i: usize) -> Option<&Field> {
        self.states.get(i)
    }

    pub fn last(&self) -> &Field {
        self.states.last().expect("trajectories are never empty")
    }

    /// Whether every step was kept.
    pub fn is_dense(&self) -> bool {
        self.steps.iter().enumerate().all(|(i, &n)| i == n)
    }

    /// Index of the stored state at time `t`, if `t` is on the lattice.
    pub fn index_of_time(&self, t: f64) -> Result<usize> {
        let n = (t / self.dt).round();
        if n < 0.0 || (n * self.dt - t).abs() > 1e-9 * self.dt.max(t.abs()) {
            return Err(Error::OffLattice(t));
        }
        let n = n as usize;
        self.steps.binary_search(&n).map_err(|_| Error::OffLattice(t))
    }
}

/// `x + dt A x`
pub(crate) struct ShiftedOperator<'a> {
    a: &'a SymmetricOperator,
    dt: f64,
}

impl LinearOperator for ShiftedOperator<'_> {
    fn dim(&self) -> usize {
        self.a.dof()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.a.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi + self.dt * *yi;
        }
    }
}

/// Solver for `(I + dt A) x = b` with a fixed `A` and `dt`.
pub struct Stepper<'a> {
    a: &'a SymmetricOperator,
    dt: f64,
    factor: Option<BandLdlt>,
}

impl<'a> Stepper<'a> {
    pub fn new(a: &'a SymmetricOperator, dt: f64, solver: LinearSolver) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let factor = match solver {
            LinearSolver::Cg => None,
            LinearSolver::Direct => {
                let mut m = a.matrix().clone();
                m.scale(dt);
                m.add_diagonal(&vec![1.0; a.dof()]);
                Some(BandLdlt::factor(&m, 0.0, 0.0).map_err(|_| Error::NotPositiveDefinite {
                    iteration: 0,
                    curvature: f64::NAN,
                })?)
            }
        };
        Ok(Self { a, dt, factor })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn operator(&self) -> &SymmetricOperator {
        self.a
    }

    /// Solves `(I + dt A) x = b`, starting CG from `guess`.
    pub fn solve(&self, b: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        match &self.factor {
            Some(f) => Ok(f.solve(b)),
            None => {
                let mut x = guess.to_vec();
                let op = ShiftedOperator { a: self.a, dt: self.dt };
                conjugate_gradient(&op, b, &mut x, CgOptions::default())?;
                Ok(x)
            }
        }
    }

    /// One IMEX Euler step.
    pub fn step(&self, u: &Field, spec: &NonlinearitySpec) -> Result<Field> {
        let f = nemitski(spec, u, 0)?;
        let rhs: Vec<f64> = u
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| a + self.dt * b)
            .collect();
        let x = self.solve(&rhs, u.values())?;
        Field::new(*u.grid(), x)
    }
}

/// `(I + dt A) u+ = u + dt f(u)` solved by conjugate gradients.
pub fn step(u: &Field, spec: &NonlinearitySpec, a: &SymmetricOperator, dt: f64) -> Result<Field> {
    crate::domain::operator::check_same_grid(a, u)?;
    Stepper::new(a, dt, LinearSolver::Cg)?.step(u, spec)
}

/// Repeated [`step`] from `u0` to `cfg.t_end`.
pub fn evolve(u0: &Field, cfg: &SemiflowConfig, spec: &NonlinearitySpec, a: &SymmetricOperator) -> Result<Trajectory> {
    cfg.validate()?;
    crate::domain::operator::check_same_grid(a, u0)?;
    let stepper = Stepper::new(a, cfg.dt, cfg.solver)?;
    let n_steps = cfg.steps();
    let mut steps = vec![0];
    let mut states = vec![u0.clone()];
    let mut u = u0.clone();
    for n in 1..=n_steps {
        let next = match stepper.step(&u, spec) {
            Ok(v) => v,
            // f(u) left the floating-point range before the norm check fired
            Err(Error::Overflow { .. }) => {
                return Err(Error::BlowUp {
                    last_finite_time: (n - 1) as f64 * cfg.dt,
                    norm: u.dot(&u).sqrt(),
                })
            }
            Err(e) => return Err(e),
        };
        let norm = next.dot(&next).sqrt();
        if !(norm <= cfg.blowup_threshold) {
            return Err(Error::BlowUp {
                last_finite_time: (n - 1) as f64 * cfg.dt,
                norm,
            });
        }
        u = next;
        if n % cfg.snapshot_stride == 0 || n == n_steps {
            steps.push(n);
            states.push(u.clone());
        }
    }
    Ok(Trajectory {
        dt: cfg.dt,
        steps,
        states,
    })
}
