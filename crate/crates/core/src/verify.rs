//! Randomized checks of the analytic inequalities on a concrete instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{nemitski, prop1_residual, rayleigh_extremes, Field, Grid, NonlinearitySpec, SymmetricOperator};
use crate::error::Result;
use crate::semiflow::{find_equilibrium, pair_diagnostics, SemiflowConfig};
use crate::spectral::{
    assemble_a_delta, attractor_radius, check_dissipation, dominating_potential, lieb_thirring_residual, lowest_eigs_k,
    subspace_minmax_check, ConstantsTable, SpectralConfig,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Smallest slack observed; negative means violated.
    pub worst_slack: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub samples: usize,
    pub pairs: usize,
    /// Horizon of each trajectory pair.
    pub pair_horizon: f64,
    pub seed: u64,
    /// Slack below which a check counts as violated.
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 20,
            pairs: 4,
            pair_horizon: 0.05,
            seed: 0,
            tol: 1e-10,
        }
    }
}

/// Everything the suites may need.
#[derive(Debug, Clone)]
pub struct VerifyProblem<'a> {
    pub a: &'a SymmetricOperator,
    pub spec: &'a NonlinearitySpec,
    pub table: &'a ConstantsTable,
    pub time: &'a SemiflowConfig,
    pub spectral: &'a SpectralConfig,
    /// Dissipation profile `D`; enables the absorbing-ball suites.
    pub dissipation: Option<&'a Field>,
}

fn random_field(g: Grid, rng: &mut ChaCha8Rng, amp: f64) -> Field {
    Field::new(g, (0..g.dof()).map(|_| amp * (2.0 * rng.random::<f64>() - 1.0)).collect())
        .expect("finite samples")
}

/// Smooth random field: a few sine modes with random coefficients.
fn smooth_field(g: Grid, rng: &mut ChaCha8Rng, amp: f64) -> Field {
    let mut u = Field::zeros(g);
    for _ in 0..4 {
        let m = [
            1 + rng.random_range(0..3),
            1 + rng.random_range(0..3),
            1 + rng.random_range(0..3),
        ];
        u = u.axpy(amp * (2.0 * rng.random::<f64>() - 1.0), &Field::sine_mode(g, m));
    }
    u
}

fn result(name: &str, slacks: &[f64], tol: f64, detail: String) -> CheckResult {
    let worst = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    CheckResult {
        name: name.into(),
        passed: worst >= -tol,
        worst_slack: worst,
        samples: slacks.len(),
        detail,
    }
}

/// Runs every suite whose inputs are available. Suites whose constants are
/// missing are reported as failed with the reason.
pub fn run_suites(p: &VerifyProblem<'_>, opts: &VerifyOptions) -> Result<VerifyReport> {
    let g = *p.a.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    let n = opts.samples.max(1);

    // multiplier inequality in uniform-local norms
    match p.table.m_b() {
        Ok(m_b) => {
            let sigma = p.spec.sigma();
            let mut slack = Vec::with_capacity(n);
            for _ in 0..n {
                let omega = random_field(g, &mut rng, 10.0);
                let u = smooth_field(g, &mut rng, 1.0).axpy(0.1, &random_field(g, &mut rng, 1.0));
                let eps = 10f64.powf(-2.0 + 2.0 * rng.random::<f64>());
                slack.push(prop1_residual(&omega, &u, sigma, eps, m_b)?);
            }
            checks.push(result("uniform_local_multiplier", &slack, opts.tol, format!("sigma = {sigma}, M_B = {m_b}")));
        }
        Err(e) => checks.push(missing("uniform_local_multiplier", e)),
    }

    // equivalence of a(u,u) and |u|_H1^2
    let (l0, big_l0) = rayleigh_extremes(p.a)?;
    {
        let mut slack = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let u = random_field(g, &mut rng, 1.0);
            let h1 = crate::domain::norms::h1_norm(&u).powi(2);
            let form = p.a.form(&u, &u);
            let scale = h1.max(f64::MIN_POSITIVE);
            slack.push((form - l0 * h1) / scale);
            slack.push((big_l0 * h1 - form) / scale);
        }
        checks.push(result(
            "form_equivalence",
            &slack,
            1e-9,
            format!("lambda0 = {l0}, Lambda0 = {big_l0}"),
        ));
    }

    // contraction of trajectory pairs
    if l0 > 0.0 {
        let cfg = SemiflowConfig {
            t_end: opts.pair_horizon.min(p.time.t_end),
            ..*p.time
        };
        let mut slack = Vec::with_capacity(opts.pairs);
        let mut k_max = f64::NEG_INFINITY;
        for _ in 0..opts.pairs {
            let u0 = smooth_field(g, &mut rng, 1.0);
            let v0 = smooth_field(g, &mut rng, 1.0);
            let rep = pair_diagnostics(&u0, &v0, &cfg, p.spec, p.a, l0)?;
            k_max = k_max.max(rep.k_fit);
            slack.push(-rep.max_violation);
        }
        checks.push(result("pair_contraction", &slack, opts.tol, format!("largest fitted K = {k_max}")));
    }

    // compression of A_delta to random subspaces
    match p.table.delta() {
        Ok(delta) => {
            let dfu0 = nemitski(p.spec, &Field::zeros(g), 1)?;
            let ad = assemble_a_delta(p.a, &dfu0, delta)?;
            let mut slack = Vec::with_capacity(n);
            for i in 0..n {
                let d = 1 + i % 5.min(g.dof());
                let basis: Vec<Field> = (0..d).map(|_| random_field(g, &mut rng, 1.0)).collect();
                slack.push(subspace_minmax_check(&ad, &basis, p.spectral)?.min_difference);
            }
            checks.push(result("minmax_compression", &slack, opts.tol, format!("delta = {delta}")));
        }
        Err(e) => checks.push(missing("minmax_compression", e)),
    }

    // Lieb-Thirring on low eigenvectors of A
    {
        let k = 4.min(g.dof());
        let family = lowest_eigs_k(p.a, k, p.spectral)?.vectors;
        let mut slack = Vec::new();
        let mut err = None;
        for pexp in [1.5, 2.0, 2.5] {
            for d in 1..=k {
                match lieb_thirring_residual(&family[..d], pexp, p.table) {
                    Ok(r) => slack.push(r),
                    Err(e) => err = Some(e),
                }
            }
        }
        match err {
            Some(e) => checks.push(missing("lieb_thirring", e)),
            None => checks.push(result("lieb_thirring", &slack, opts.tol, "lowest eigenvectors of A".into())),
        }
    }

    if let Some(d_field) = p.dissipation {
        checks.extend(dissipative_suites(p, d_field, l0, big_l0, opts)?);
    }
    Ok(VerifyReport { checks })
}

fn missing(name: &str, e: crate::error::Error) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: false,
        worst_slack: f64::NAN,
        samples: 0,
        detail: format!("not run: {e}"),
    }
}

fn dissipative_suites(
    p: &VerifyProblem<'_>,
    d_field: &Field,
    l0: f64,
    big_l0: f64,
    opts: &VerifyOptions,
) -> Result<Vec<CheckResult>> {
    let g = *p.a.grid();
    let mut out = Vec::new();
    let u_max = 10.0 * (1.0 + d_field.values().iter().copied().fold(0.0, f64::max));
    if let Err(e) = check_dissipation(p.spec, d_field, u_max, 41) {
        out.push(CheckResult {
            name: "dissipation_lattice".into(),
            passed: false,
            worst_slack: f64::NAN,
            samples: g.dof() * 41,
            detail: e.to_string(),
        });
        return Ok(out);
    }
    out.push(CheckResult {
        name: "dissipation_lattice".into(),
        passed: true,
        worst_slack: 0.0,
        samples: g.dof() * 41,
        detail: format!("|u| <= {u_max}"),
    });

    let q = p.spec.q();
    let qprime = q / (q - 1.0);
    match p.table.m_q(qprime) {
        Ok(m) => {
            let eq = find_equilibrium(&Field::zeros(g), p.spec, p.a, p.time)?;
            let r = attractor_radius(d_field, q, l0, big_l0, m, &eq, p.spec)?;
            out.push(result(
                "equilibrium_bound",
                &[r.phi_bound - r.phi_h1],
                opts.tol,
                format!("|phi|_H1 = {}, bound = {}, S = {}", r.phi_h1, r.phi_bound, r.s),
            ));
        }
        Err(e) => out.push(missing("equilibrium_bound", e)),
    }

    let dfu0 = nemitski(p.spec, &Field::zeros(g), 1)?;
    let mut slack = Vec::new();
    for eps in [1.0, 0.5, 0.25, 0.1, 0.01] {
        let dp = dominating_potential(d_field, eps, p.spec.growth_c(), p.spec.growth_gamma())?;
        slack.push(-dp.worst_slack(&dfu0)?.0);
    }
    out.push(result("dominating_potential", &slack, opts.tol, "eps in {1, 0.5, 0.25, 0.1, 0.01}".into()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::assemble_operator;

    #[test]
    fn cubic_problem_passes_every_suite() {
        let g = Grid::unit_cube(5).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let spec = NonlinearitySpec::cubic(-1.0);
        let table = ConstantsTable::defaults();
        let d = Field::zeros(g);
        let time = SemiflowConfig {
            dt: 2e-3,
            ..Default::default()
        };
        let p = VerifyProblem {
            a: &a,
            spec: &spec,
            table: &table,
            time: &time,
            spectral: &SpectralConfig::default(),
            dissipation: Some(&d),
        };
        let rep = run_suites(
            &p,
            &VerifyOptions {
                samples: 6,
                pairs: 2,
                pair_horizon: 0.02,
                ..Default::default()
            },
        )
        .unwrap();
        for c in &rep.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(rep.checks.len(), 8);
    }
}
