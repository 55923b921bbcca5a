//! The five computational commands. Each fills the record's outputs, writes
//! its CSV/SVG/field artifacts and returns the run status.

use attractor_core::domain::{assemble_operator, nemitski, rayleigh_extremes};
use attractor_core::semiflow::{evolve, find_equilibrium, trajectory_series};
use attractor_core::spectral::{
    assemble_a_delta, attractor_radius, bound_report, check_dissipation, count_below, lowest_eigs, proper_values,
    BoundProblem, EigenMethod, InvariantNorms,
};
use attractor_core::tangent::{dimension_estimate, DimensionOutcome};
use attractor_core::verify::{run_suites, VerifyProblem};
use attractor_core::{Error, Field, NonlinearitySpec, SpectralConfig, SymmetricOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::plot::{bar_chart, line_chart, Series};
use crate::record::{num, OutDir, Outputs, SpectrumSummary, Status, TrajectorySummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Spectrum,
    Bound,
    DimEstimate,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Spectrum => "spectrum",
            Command::Bound => "bound",
            Command::DimEstimate => "dim-estimate",
            Command::Verify => "verify",
        }
    }
}

/// Why a command stopped early.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            status: Status::from_class(e.class()),
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self {
            status: Status::ConfigError,
            message: format!("{e:#}"),
        }
    }
}

/// Everything a command needs, built once from the config.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub seed: u64,
    pub out: &'a OutDir,
    spec: NonlinearitySpec,
    a: SymmetricOperator,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig, seed: u64, out: &'a OutDir) -> Result<Self, Failure> {
        let spec = cfg.nonlinearity()?;
        let a = assemble_operator(&cfg.grid, &cfg.problem.beta.to_field(&cfg.grid))?;
        Ok(Self { cfg, seed, out, spec, a })
    }

    /// Member 0 is the configured initial state; the others add uniform
    /// noise of amplitude `spread`, seeded per member.
    fn ensemble(&self) -> Vec<Field> {
        let g = self.cfg.grid;
        let base = self.cfg.problem.initial.to_field(&g);
        (0..self.cfg.ensemble)
            .map(|i| {
                if i == 0 || self.cfg.spread == 0.0 {
                    return base.clone();
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x656e_7365_6d62_6c65);
                rng.set_stream(i as u64);
                let noise: Vec<f64> = (0..g.dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
                base.axpy(self.cfg.spread, &Field::new(g, noise).expect("finite noise"))
            })
            .collect()
    }
}

pub fn run(cmd: Command, ctx: &Context<'_>, outputs: &mut Outputs) -> Result<Status, Failure> {
    match cmd {
        Command::Simulate => simulate(ctx, outputs),
        Command::Spectrum => spectrum(ctx, outputs),
        Command::Bound => bound(ctx, outputs),
        Command::DimEstimate => dim_estimate(ctx, outputs),
        Command::Verify => verify(ctx, outputs),
    }
}

fn simulate(ctx: &Context<'_>, outputs: &mut Outputs) -> Result<Status, Failure> {
    let cfg = ctx.cfg;
    let u0 = cfg.problem.initial.to_field(&cfg.grid);
    let traj = evolve(&u0, &cfg.time, &ctx.spec, &ctx.a)?;
    let rows = trajectory_series(&traj, &ctx.spec, &ctx.a)?;

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.time), num(r.l2), num(r.h1), num(r.lyapunov)])
        .collect();
    ctx.out.csv("series.csv", &["time", "l2", "h1", "lyapunov"], &table)?;
    let pick = |f: fn(&attractor_core::semiflow::SeriesRow) -> f64| rows.iter().map(|r| (r.time, f(r))).collect();
    ctx.out.svg(
        "norms.svg",
        &line_chart(
            "Solution norms",
            "time",
            "norm",
            &[
                Series {
                    name: "L2".into(),
                    points: pick(|r| r.l2),
                },
                Series {
                    name: "H1".into(),
                    points: pick(|r| r.h1),
                },
            ],
        ),
    )?;

    let mut snapshots = Vec::new();
    let n = traj.len();
    let k = cfg.output.snapshots.min(n);
    let mut idx: Vec<usize> = match k {
        0 => vec![],
        1 => vec![n - 1],
        _ => (0..k).map(|j| (j * (n - 1) + (k - 1) / 2) / (k - 1)).collect(),
    };
    idx.dedup();
    for i in idx {
        let step = traj.step_numbers()[i];
        if let Some(name) = ctx.out.field(&format!("u_{step:06}.fld"), &traj.states()[i])? {
            snapshots.push(name);
        }
    }

    outputs.trajectory = Some(TrajectorySummary {
        steps: *traj.step_numbers().last().expect("trajectories are never empty"),
        t_end: traj.times().last().copied().unwrap_or(0.0),
        stored_states: n,
        initial: rows[0],
        last: *rows.last().expect("series has a row per state"),
        snapshots,
    });
    Ok(Status::Ok)
}

fn spectrum(ctx: &Context<'_>, outputs: &mut Outputs) -> Result<Status, Failure> {
    let cfg = ctx.cfg;
    let sp = lowest_eigs(&ctx.a, &cfg.spectral)?;
    let l1 = sp.values[0];
    if !(l1 > 0.0) {
        return Err(Error::HypothesisViolation {
            what: "smallest eigenvalue of A must be positive".into(),
            value: l1,
        }
        .into());
    }
    let (l0, big_l0) = rayleigh_extremes(&ctx.a)?;
    let delta = cfg.constants.delta()?;
    let dfu0 = nemitski(&ctx.spec, &Field::zeros(cfg.grid), 1)?;
    let a_delta = assemble_a_delta(&ctx.a, &dfu0, delta)?;
    let mu = proper_values(&a_delta, cfg.spectral.k_eigs, &cfg.spectral)?;
    let inertia = SpectralConfig {
        method: EigenMethod::DenseOracle,
        ..cfg.spectral
    };
    let n_count = count_below(&a_delta, 0.5 * (1.0 - delta) * l1, &inertia)?.count;

    let rows: Vec<Vec<String>> = sp
        .values
        .iter()
        .zip(&mu)
        .enumerate()
        .map(|(i, (l, m))| vec![(i + 1).to_string(), num(*l), num(*m)])
        .collect();
    ctx.out.csv("report.csv", &["index", "eigenvalue_a", "proper_value_adelta"], &rows)?;
    let bars: Vec<(String, f64)> = sp.values.iter().enumerate().map(|(i, v)| ((i + 1).to_string(), *v)).collect();
    ctx.out.svg(
        "spectrum.svg",
        &bar_chart("Lowest eigenvalues of A", "index", "eigenvalue", &bars, None),
    )?;

    outputs.spectrum = Some(SpectrumSummary {
        method: cfg.spectral.method,
        eigenvalues: sp.values,
        lambda0: l0,
        big_lambda0: big_l0,
        delta,
        proper_values_adelta: mu,
        essential_floor: (1.0 - delta) * l1,
        n_count,
    });
    Ok(Status::Ok)
}

fn bound(ctx: &Context<'_>, outputs: &mut Outputs) -> Result<Status, Failure> {
    let cfg = ctx.cfg;
    let g = cfg.grid;
    let (norms, radius) = match &cfg.problem.dissipation {
        Some(d) => {
            let d_field = d.to_field(&g);
            let u_max = 10.0 * (1.0 + d.sup_bound());
            check_dissipation(&ctx.spec, &d_field, u_max, 41)?;
            let (l0, big_l0) = rayleigh_extremes(&ctx.a)?;
            let eq = find_equilibrium(&Field::zeros(g), &ctx.spec, &ctx.a, &cfg.time)?;
            if !eq.converged {
                return Err(Failure {
                    status: Status::NumericalFailure,
                    message: format!(
                        "equilibrium search stopped after {} iterations with residual {:e}",
                        eq.iterations, eq.residual_norm
                    ),
                });
            }
            let q = ctx.spec.q();
            let m = cfg.constants.m_q(q / (q - 1.0))?;
            let r = attractor_radius(&d_field, q, l0, big_l0, m, &eq, &ctx.spec)?;
            (InvariantNorms::from_radius(r.s, &cfg.constants)?, Some(r))
        }
        None => {
            let mut states = Vec::new();
            for u0 in ctx.ensemble() {
                let traj = evolve(&u0, &cfg.time, &ctx.spec, &ctx.a)?;
                for (t, u) in traj.times().into_iter().zip(traj.states()) {
                    if t >= cfg.dimension.burn_in {
                        states.push(u.clone());
                    }
                }
            }
            (InvariantNorms::from_samples(&states)?, None)
        }
    };
    let p = BoundProblem {
        a: &ctx.a,
        spec: &ctx.spec,
        norms,
        radius,
        clr_q: cfg.clr_q,
    };
    let rep = bound_report(&p, &cfg.constants, &cfg.spectral)?;

    let mut rows = vec![
        ("lambda1", num(rep.lambda1)),
        ("lambda0", num(rep.lambda0)),
        ("Lambda0", num(rep.big_lambda0)),
        ("mu1_adelta", num(rep.mu1_adelta)),
        ("essential_floor", num(rep.essential_floor)),
        ("n_count", rep.n_count.to_string()),
        ("d_const", num(rep.d_const)),
        ("d1", num(rep.d1)),
        ("d2", num(rep.d2)),
        ("d_final", rep.d_final.to_string()),
        ("eps_bar", num(rep.eps_bar)),
        ("n_negative", rep.n_negative.to_string()),
        ("norm_h1", num(rep.norms.h1)),
        ("norm_l52", num(rep.norms.l52)),
        ("norm_l6", num(rep.norms.l6)),
    ];
    if let Some(b) = rep.clr_bound {
        rows.push(("clr_bound", num(b)));
    }
    if let Some(s) = rep.s_radius {
        rows.push(("s_radius", num(s)));
    }
    let rows: Vec<Vec<String>> = rows.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
    ctx.out.csv("report.csv", &["quantity", "value"], &rows)?;
    ctx.out.svg(
        "bound.svg",
        &bar_chart(
            "Dimension bound",
            "",
            "dimension",
            &[
                ("d1".into(), rep.d1),
                ("d2".into(), rep.d2),
                ("d_final".into(), rep.d_final as f64),
            ],
            None,
        ),
    )?;
    outputs.bound = Some(rep);
    Ok(Status::Ok)
}

fn dim_estimate(ctx: &Context<'_>, outputs: &mut Outputs) -> Result<Status, Failure> {
    let cfg = ctx.cfg;
    let dcfg = attractor_core::tangent::DimensionConfig {
        seed: ctx.seed,
        ..cfg.dimension
    };
    let rep = dimension_estimate(&ctx.ensemble(), &dcfg, &cfg.time, &ctx.spec, &ctx.a)?;
    let d_max = rep.d_max;

    let mut header: Vec<String> = vec!["time".into()];
    header.extend((1..=d_max).map(|d| format!("log_volume_{d}")));
    header.extend((1..=d_max).map(|d| format!("trace_{d}")));
    let series: Vec<Vec<String>> = rep
        .history
        .iter()
        .map(|h| {
            let mut row = vec![num(h.time)];
            row.extend(h.log_volume.iter().map(|v| num(*v)));
            row.extend(h.trace.iter().map(|v| num(*v)));
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.out.csv("series.csv", &header_refs, &series)?;

    let mut header: Vec<String> = vec!["d".into(), "criterion".into(), "log_volume_rate".into()];
    header.extend((0..rep.per_member.len()).map(|i| format!("member_{i}")));
    let rows: Vec<Vec<String>> = (0..d_max)
        .map(|d| {
            let mut row = vec![(d + 1).to_string(), num(rep.criterion[d]), num(rep.log_volume_rate[d])];
            row.extend(rep.per_member.iter().map(|m| num(m[d])));
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.out.csv("report.csv", &header_refs, &rows)?;

    let lines: Vec<Series> = (0..d_max)
        .map(|d| Series {
            name: format!("d = {}", d + 1),
            points: rep.history.iter().map(|h| (h.time, h.log_volume[d])).collect(),
        })
        .collect();
    ctx.out.svg(
        "log_volume.svg",
        &line_chart("Log-volume of tangent bundles", "time", "log G_d", &lines),
    )?;
    let bars: Vec<(String, f64)> = rep
        .criterion
        .iter()
        .enumerate()
        .map(|(i, c)| ((i + 1).to_string(), *c))
        .collect();
    ctx.out.svg(
        "criterion.svg",
        &bar_chart(
            "Averaged trace criterion",
            "d",
            "sup of time-averaged -Tr_d",
            &bars,
            Some((-rep.margin, "-margin")),
        ),
    )?;

    let status = match rep.outcome {
        DimensionOutcome::Certified { .. } => Status::Ok,
        DimensionOutcome::Inconclusive { .. } => Status::Inconclusive,
    };
    outputs.dimension = Some(rep);
    Ok(status)
}

fn verify(ctx: &Context<'_>, outputs: &mut Outputs) -> Result<Status, Failure> {
    let cfg = ctx.cfg;
    let d_field = cfg.problem.dissipation.as_ref().map(|d| d.to_field(&cfg.grid));
    let p = VerifyProblem {
        a: &ctx.a,
        spec: &ctx.spec,
        table: &cfg.constants,
        time: &cfg.time,
        spectral: &cfg.spectral,
        dissipation: d_field.as_ref(),
    };
    let opts = attractor_core::verify::VerifyOptions {
        seed: ctx.seed,
        ..cfg.verify
    };
    let rep = run_suites(&p, &opts)?;

    let rows: Vec<Vec<String>> = rep
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.passed.to_string(),
                num(c.worst_slack),
                c.samples.to_string(),
                c.detail.clone(),
            ]
        })
        .collect();
    ctx.out.csv("report.csv", &["check", "passed", "worst_slack", "samples", "detail"], &rows)?;

    let failed: Vec<_> = rep.checks.iter().filter(|c| !c.passed).collect();
    let status = if failed.is_empty() {
        Status::Ok
    } else if failed.iter().any(|c| c.name == "dissipation_lattice") {
        Status::HypothesisViolation
    } else if failed.iter().any(|c| !c.detail.starts_with("not run")) {
        Status::NumericalFailure
    } else {
        Status::ConfigError
    };
    outputs.verify = Some(rep);
    Ok(status)
}
