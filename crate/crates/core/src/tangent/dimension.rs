use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tangent_step, TangentBundle, TangentRecord};
use crate::domain::{nemitski, Field, NonlinearitySpec, SymmetricOperator};
use crate::error::{Error, Result};
use crate::semiflow::{SemiflowConfig, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionConfig {
    pub d_max: usize,
    /// A dimension is certified when its criterion is `<= -margin`.
    pub margin: f64,
    /// Records before this time are excluded from the averages.
    pub burn_in: f64,
    pub reortho_stride: usize,
    /// Seed of the random initial bundles; member `i` uses `seed + i`.
    pub seed: u64,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        Self {
            d_max: 5,
            margin: 1e-3,
            burn_in: 0.0,
            reortho_stride: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DimensionOutcome {
    /// Volumes of dimension `d` contract; the invariant set has dimension below `d`.
    Certified { d: usize },
    Inconclusive { d_max: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionReport {
    pub d_max: usize,
    pub margin: f64,
    pub burn_in: f64,
    pub t_end: f64,
    pub ensemble_size: usize,
    /// `criterion[d-1]` is the sup over the ensemble of the time average of `-Tr_d`.
    pub criterion: Vec<f64>,
    pub per_member: Vec<Vec<f64>>,
    /// Sup over the ensemble of `(log G_d(T) - log G_d(burn_in)) / (T - burn_in)`.
    pub log_volume_rate: Vec<f64>,
    pub outcome: DimensionOutcome,
    /// History of the first ensemble member.
    pub history: Vec<TangentRecord>,
}

impl DimensionReport {
    pub fn certified_dimension(&self) -> Option<usize> {
        match self.outcome {
            DimensionOutcome::Certified { d } => Some(d),
            DimensionOutcome::Inconclusive { .. } => None,
        }
    }
}

struct MemberResult {
    averages: Vec<f64>,
    rates: Vec<f64>,
    history: Vec<TangentRecord>,
}

/// Co-evolves every ensemble member with a random `d_max`-dimensional bundle
/// and returns the smallest `d` whose averaged trace criterion is at most
/// `-margin`. The limsup over time and sup over the invariant set are
/// replaced by the finite horizon `[burn_in, t_end]` and the given ensemble.
pub fn dimension_estimate(
    ensemble: &[Field],
    dcfg: &DimensionConfig,
    cfg: &SemiflowConfig,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
) -> Result<DimensionReport> {
    cfg.validate()?;
    if ensemble.is_empty() {
        return Err(Error::invalid("dimension estimate needs at least one ensemble member"));
    }
    if dcfg.d_max == 0 || dcfg.d_max > a.dof() {
        return Err(Error::invalid(format!("d_max must lie in 1..={}, got {}", a.dof(), dcfg.d_max)));
    }
    if dcfg.margin.is_nan() || dcfg.margin < 0.0 {
        return Err(Error::invalid(format!("margin must be nonnegative, got {}", dcfg.margin)));
    }
    if !(dcfg.burn_in >= 0.0 && dcfg.burn_in < cfg.t_end) {
        return Err(Error::invalid(format!(
            "burn-in {} must lie in [0, t_end = {})",
            dcfg.burn_in, cfg.t_end
        )));
    }
    for m in ensemble {
        crate::domain::operator::check_same_grid(a, m)?;
    }

    let stepper = Stepper::new(a, cfg.dt, cfg.solver)?;
    let members: Vec<MemberResult> = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, u0)| run_member(u0, i, dcfg, cfg, spec, a, &stepper))
        .collect::<Result<_>>()?;

    let d_max = dcfg.d_max;
    let mut criterion = vec![f64::NEG_INFINITY; d_max];
    let mut rates = vec![f64::NEG_INFINITY; d_max];
    for m in &members {
        for d in 0..d_max {
            criterion[d] = criterion[d].max(m.averages[d]);
            rates[d] = rates[d].max(m.rates[d]);
        }
    }
    let outcome = criterion
        .iter()
        .position(|&c| c <= -dcfg.margin)
        .map_or(DimensionOutcome::Inconclusive { d_max }, |i| DimensionOutcome::Certified { d: i + 1 });

    let mut members = members.into_iter();
    let first = members.next().expect("ensemble is nonempty");
    let mut per_member = vec![first.averages];
    per_member.extend(members.map(|m| m.averages));
    Ok(DimensionReport {
        d_max,
        margin: dcfg.margin,
        burn_in: dcfg.burn_in,
        t_end: cfg.steps() as f64 * cfg.dt,
        ensemble_size: ensemble.len(),
        criterion,
        per_member,
        log_volume_rate: rates,
        outcome,
        history: first.history,
    })
}

fn run_member(
    u0: &Field,
    index: usize,
    dcfg: &DimensionConfig,
    cfg: &SemiflowConfig,
    spec: &NonlinearitySpec,
    a: &SymmetricOperator,
    stepper: &Stepper<'_>,
) -> Result<MemberResult> {
    let mut bundle = TangentBundle::random(
        u0.grid(),
        dcfg.d_max,
        dcfg.seed.wrapping_add(index as u64),
        dcfg.reortho_stride,
    )?;
    let n_steps = cfg.steps();
    let mut u = u0.clone();
    bundle.record(&u, 0.0, spec, a)?;
    for n in 0..n_steps {
        let df = nemitski(spec, &u, 1)?;
        bundle.vectors = bundle
            .vectors
            .iter()
            .map(|v| tangent_step(stepper, &df, v))
            .collect::<Result<_>>()?;
        let next = stepper.step(&u, spec)?;
        let norm = next.dot(&next).sqrt();
        if !(norm <= cfg.blowup_threshold) {
            return Err(Error::BlowUp {
                last_finite_time: n as f64 * cfg.dt,
                norm,
            });
        }
        u = next;
        bundle.step = n + 1;
        bundle.record(&u, (n + 1) as f64 * cfg.dt, spec, a)?;
    }

    let d = dcfg.d_max;
    let kept: Vec<&TangentRecord> = bundle
        .history
        .iter()
        .filter(|r| r.time >= dcfg.burn_in - 1e-12 * cfg.dt)
        .collect();
    let mut averages = vec![0.0; d];
    for r in &kept {
        for (avg, tr) in averages.iter_mut().zip(&r.trace) {
            *avg -= tr;
        }
    }
    averages.iter_mut().for_each(|v| *v /= kept.len() as f64);
    let first = kept[0];
    let last = kept[kept.len() - 1];
    let span = last.time - first.time;
    let rates = (0..d)
        .map(|i| {
            if span > 0.0 {
                (last.log_volume[i] - first.log_volume[i]) / span
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok(MemberResult {
        averages,
        rates,
        history: bundle.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_operator, Grid};

    #[test]
    fn heat_equation_contracts_every_dimension() {
        let g = Grid::unit_cube(4).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let cfg = SemiflowConfig {
            dt: 1e-3,
            t_end: 0.05,
            ..Default::default()
        };
        let rep = dimension_estimate(
            &[Field::zeros(g)],
            &DimensionConfig {
                d_max: 3,
                ..Default::default()
            },
            &cfg,
            &NonlinearitySpec::zero(),
            &a,
        )
        .unwrap();
        assert_eq!(rep.outcome, DimensionOutcome::Certified { d: 1 });
        assert!(rep.criterion.iter().all(|&c| c < 0.0));
        assert_eq!(rep.history.len(), 51);
    }

    #[test]
    fn infinite_margin_is_inconclusive() {
        let g = Grid::unit_cube(3).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let cfg = SemiflowConfig {
            dt: 1e-2,
            t_end: 0.05,
            ..Default::default()
        };
        let rep = dimension_estimate(
            &[Field::zeros(g)],
            &DimensionConfig {
                d_max: 2,
                margin: f64::INFINITY,
                ..Default::default()
            },
            &cfg,
            &NonlinearitySpec::zero(),
            &a,
        )
        .unwrap();
        assert_eq!(rep.outcome, DimensionOutcome::Inconclusive { d_max: 2 });
    }

    #[test]
    fn trace_increments_bounded_below_by_lowest_eigenvalue() {
        let g = Grid::unit_cube(4).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let spec = NonlinearitySpec::cubic(-1.0);
        let cfg = SemiflowConfig {
            dt: 2e-3,
            t_end: 0.02,
            ..Default::default()
        };
        let u0 = Field::sine_mode(g, [1, 1, 1]).scaled(3.0);
        let rep = dimension_estimate(
            &[u0],
            &DimensionConfig {
                d_max: 4,
                ..Default::default()
            },
            &cfg,
            &spec,
            &a,
        )
        .unwrap();
        let lam_min = crate::domain::operator::discrete_laplacian_eigenvalues(&g, 1)[0];
        // f_u = -3 u^2 <= 0 only raises the operator, so increments stay above lam_min
        for r in &rep.history {
            for w in r.trace.windows(2) {
                assert!(w[1] - w[0] >= lam_min - 1e-8);
            }
        }
    }
}
