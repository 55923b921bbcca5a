use serde::{Deserialize, Serialize};

use super::{
    assemble_a_delta, assemble_a_delta_eps, clr_bound, count_below, hausdorff_bound, lambda1, positive_part_potential,
    proper_values, BoundInputs, ConstantsTable, EigenMethod, InvariantNorms, RadiusReport, SpectralConfig,
};
use crate::domain::{nemitski, rayleigh_extremes, Field, NonlinearitySpec, SymmetricOperator};
use crate::error::{Error, Result};

/// What [`bound_report`] needs beyond the operator and constants.
#[derive(Debug, Clone)]
pub struct BoundProblem<'a> {
    pub a: &'a SymmetricOperator,
    pub spec: &'a NonlinearitySpec,
    pub norms: InvariantNorms,
    /// Absorbing-ball data, when a dissipation profile was supplied.
    pub radius: Option<RadiusReport>,
    /// Exponent of the negative-eigenvalue bound; `None` skips it.
    pub clr_q: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub lambda1: f64,
    pub lambda0: f64,
    #[serde(rename = "Lambda0")]
    pub big_lambda0: f64,
    pub mu1_adelta: f64,
    /// `(1 - delta) lambda1`, the continuum floor of the essential spectrum.
    pub essential_floor: f64,
    pub n_count: usize,
    pub d_const: f64,
    pub d1: f64,
    pub d2: f64,
    pub d_final: u64,
    /// `(1 - delta) lambda1 / 4`
    pub eps_bar: f64,
    /// Negative eigenvalues of `(1 - delta) A - 3 eps_bar - V_eps_bar`.
    pub n_negative: usize,
    pub clr_q: Option<f64>,
    pub clr_bound: Option<f64>,
    pub s_radius: Option<f64>,
    pub radius: Option<RadiusReport>,
    pub norms: InvariantNorms,
    pub inputs: BoundInputs,
    pub constants: ConstantsTable,
}

/// Computes every spectral quantity of the dimension bound and evaluates it.
/// Counts always use inertia, which is the reference method.
pub fn bound_report(p: &BoundProblem<'_>, table: &ConstantsTable, cfg: &SpectralConfig) -> Result<BoundReport> {
    let a = p.a;
    let grid = *a.grid();
    let l1 = lambda1(a, cfg)?;
    let (l0, big_l0) = rayleigh_extremes(a)?;
    if !(l0 > 0.0) {
        return Err(Error::HypothesisViolation {
            what: "a(u,u) >= lambda0 |u|_H1^2 needs lambda0 > 0".into(),
            value: l0,
        });
    }
    let delta = table.delta()?;
    let gamma = p.spec.growth_gamma();
    let k_52 = table.k_lt(2.5)?;
    let k_gamma = table.k_lt(6.0 / (gamma + 1.0))?;

    let dfu0 = nemitski(p.spec, &Field::zeros(grid), 1)?;
    let a_delta = assemble_a_delta(a, &dfu0, delta)?;
    let mu1 = proper_values(&a_delta, 1, cfg)?[0];
    let inertia = SpectralConfig {
        method: EigenMethod::DenseOracle,
        ..*cfg
    };
    let n_count = count_below(&a_delta, 0.5 * (1.0 - delta) * l1, &inertia)?.count;

    let inputs = BoundInputs {
        gamma,
        lambda0: l0,
        lambda1: l1,
        delta,
        growth_c: p.spec.growth_c(),
        i_h1: p.norms.h1,
        i_l52: p.norms.l52,
        i_l6: p.norms.l6,
        k_52,
        k_gamma,
        mu1,
        n_count,
    };
    let hb = hausdorff_bound(&inputs)?;

    let eps_bar = 0.25 * (1.0 - delta) * l1;
    let v = positive_part_potential(&dfu0, eps_bar);
    let a_de = assemble_a_delta_eps(a, &v, delta, eps_bar)?;
    let n_negative = count_below(&a_de, 0.0, &inertia)?.count;
    let clr = p.clr_q.map(|q| clr_bound(&v, q, table)).transpose()?;

    Ok(BoundReport {
        lambda1: l1,
        lambda0: l0,
        big_lambda0: big_l0,
        mu1_adelta: mu1,
        essential_floor: (1.0 - delta) * l1,
        n_count,
        d_const: hb.d_const,
        d1: hb.d1,
        d2: hb.d2,
        d_final: hb.d_final,
        eps_bar,
        n_negative,
        clr_q: p.clr_q,
        clr_bound: clr,
        s_radius: p.radius.map(|r| r.s),
        radius: p.radius,
        norms: p.norms.clone(),
        inputs,
        constants: table.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_operator, Grid};

    #[test]
    fn free_problem_gives_dimension_one() {
        let g = Grid::unit_cube(5).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let spec = NonlinearitySpec::zero();
        let p = BoundProblem {
            a: &a,
            spec: &spec,
            norms: InvariantNorms::from_samples(&[Field::zeros(g)]).unwrap(),
            radius: None,
            clr_q: None,
        };
        let r = bound_report(&p, &ConstantsTable::defaults(), &SpectralConfig::default()).unwrap();
        assert_eq!(r.d_final, 1);
        assert_eq!(r.n_count, 0);
        assert_eq!(r.n_negative, 0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"Lambda0\""));
        assert!(json.contains("k_lt.2.5"));
    }

    #[test]
    fn linear_growth_counts_and_clr_ordering() {
        let g = Grid::unit_cube(6).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let c = 80.0;
        let spec = NonlinearitySpec::linear(c);
        let mut table = ConstantsTable::defaults();
        table.insert("c_alpha.4", 1.0, "test value").unwrap();
        table.insert("m_alpha_gamma", 1.0, "test value").unwrap();
        let p = BoundProblem {
            a: &a,
            spec: &spec,
            norms: InvariantNorms::from_samples(&[Field::zeros(g)]).unwrap(),
            radius: None,
            clr_q: Some(2.0),
        };
        let r = bound_report(&p, &table, &SpectralConfig::default()).unwrap();
        let below_c = crate::domain::operator::discrete_laplacian_eigenvalues(&g, g.dof())
            .iter()
            .filter(|&&l| l < c)
            .count();
        assert!(r.n_count >= below_c);
        assert!(r.d_final as usize > below_c);
        assert!(r.clr_bound.unwrap() >= r.n_negative as f64);
    }
}
