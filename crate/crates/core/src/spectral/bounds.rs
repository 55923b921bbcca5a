use serde::{Deserialize, Serialize};

use super::ConstantsTable;
use crate::domain::norms::{gradient_energy, lp_norm};
use crate::domain::Field;
use crate::error::{Error, Result};
use crate::tangent::orthonormality_defect;

/// `Sum_i |grad phi_i|^2 - (1/K) (int rho^{p/(p-1)})^{2(p-1)/3}` with
/// `rho = Sum_i phi_i^2` and `K = K_{p,3}` from the table. A nonnegative value
/// certifies the Lieb-Thirring inequality for this family and constant.
pub fn lieb_thirring_residual(phis: &[Field], p: f64, table: &ConstantsTable) -> Result<f64> {
    let k = table.k_lt(p)?;
    lieb_thirring_residual_with(phis, p, k)
}

/// [`lieb_thirring_residual`] with an explicit constant.
pub fn lieb_thirring_residual_with(phis: &[Field], p: f64, k: f64) -> Result<f64> {
    if !(1.5..=2.5).contains(&p) {
        return Err(Error::invalid(format!("Lieb-Thirring exponent p = {p} outside [3/2, 5/2]")));
    }
    if !(k > 0.0) {
        return Err(Error::invalid(format!("Lieb-Thirring constant must be positive, got {k}")));
    }
    if phis.is_empty() {
        return Err(Error::invalid("Lieb-Thirring family is empty"));
    }
    let g = *phis[0].grid();
    for phi in phis {
        phi.ensure_grid(&g)?;
    }
    let defect = orthonormality_defect(phis);
    if defect > 1e-8 {
        return Err(Error::invalid(format!("family is not orthonormal (defect {defect:e})")));
    }
    let kinetic: f64 = phis.iter().map(gradient_energy).sum();
    let mut rho = vec![0.0; g.dof()];
    for phi in phis {
        for (r, v) in rho.iter_mut().zip(phi.values()) {
            *r += v * v;
        }
    }
    let r = p / (p - 1.0);
    let integral: f64 = rho.iter().map(|x| x.powf(r)).sum::<f64>() * g.cell_volume();
    Ok(kinetic - integral.powf(2.0 * (p - 1.0) / 3.0) / k)
}

/// `C_{2q} M_{2q,gamma} int V^q` with nodal quadrature.
pub fn clr_bound(v: &Field, q: f64, table: &ConstantsTable) -> Result<f64> {
    if !(q > 1.5 && q.is_finite()) {
        return Err(Error::invalid(format!("CLR exponent q must exceed 3/2, got {q}")));
    }
    if let Some(i) = v.values().iter().position(|&x| x < 0.0) {
        return Err(Error::invalid(format!("potential is negative at node {i}")));
    }
    let c = table.c_alpha(2.0 * q)?;
    let m = table.m_alpha_gamma()?;
    let integral: f64 = v.values().iter().map(|x| x.powf(q)).sum::<f64>() * v.grid().cell_volume();
    Ok(c * m * integral)
}

/// Everything the dimension bound consumes, echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub gamma: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub delta: f64,
    /// Growth constant `C` of the nonlinearity.
    pub growth_c: f64,
    pub i_h1: f64,
    pub i_l52: f64,
    pub i_l6: f64,
    /// `K_{5/2,3}`
    pub k_52: f64,
    /// `K_{6/(gamma+1),3}`
    pub k_gamma: f64,
    /// Lowest proper value of `A_delta`.
    pub mu1: f64,
    /// `N(delta, (1 - delta) lambda1 / 2)`
    pub n_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffBound {
    pub d_const: f64,
    pub d1: f64,
    pub d2: f64,
    pub d_final: u64,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {x}")))
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be nonnegative, got {x}")))
    }
}

/// The nonlinear-term constant
/// `D = 5/2 (3/5 * 2/(delta lambda0))^{3/2} (C |I|_{L5/2} K_{5/2})^{5/2}
///    + (3-gamma)/4 ((gamma+1)/4 * 2/(delta lambda0))^{(gamma+1)/(3-gamma)} (C |I|_{L6}^{gamma+1} K_{6/(gamma+1)})^{4/(3-gamma)}`.
pub fn nonlinear_constant(inp: &BoundInputs) -> Result<f64> {
    if !(2.0..3.0).contains(&inp.gamma) {
        return Err(Error::invalid(format!("gamma must lie in [2, 3), got {}", inp.gamma)));
    }
    if !(inp.delta > 0.0 && inp.delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0,1)"));
    }
    positive("lambda0", inp.lambda0)?;
    positive("K_{5/2,3}", inp.k_52)?;
    positive("K_{6/(gamma+1),3}", inp.k_gamma)?;
    nonnegative("growth constant C", inp.growth_c)?;
    nonnegative("|I|_H1", inp.i_h1)?;
    nonnegative("|I|_L5/2", inp.i_l52)?;
    nonnegative("|I|_L6", inp.i_l6)?;
    let g = inp.gamma;
    let base = 2.0 / (inp.delta * inp.lambda0);
    let first = 2.5 * (0.6 * base).powf(1.5) * (inp.growth_c * inp.i_l52 * inp.k_52).powf(2.5);
    let second = (3.0 - g) / 4.0
        * ((g + 1.0) / 4.0 * base).powf((g + 1.0) / (3.0 - g))
        * (inp.growth_c * inp.i_l6.powf(g + 1.0) * inp.k_gamma).powf(4.0 / (3.0 - g));
    Ok(first + second)
}

/// Dimension bound: `d1 = N`, `d2 = 2/((1-delta) lambda1) (d1 ((1-delta) lambda1/2 - mu1) + D)`,
/// and the certified integer `floor(max(d1, d2)) + 1`.
pub fn hausdorff_bound(inp: &BoundInputs) -> Result<HausdorffBound> {
    if !(inp.lambda1 > 0.0) {
        return Err(Error::HypothesisViolation {
            what: "smallest eigenvalue of A must be positive".into(),
            value: inp.lambda1,
        });
    }
    if !inp.mu1.is_finite() {
        return Err(Error::invalid(format!("mu1 must be finite, got {}", inp.mu1)));
    }
    let d_const = nonlinear_constant(inp)?;
    let scale = (1.0 - inp.delta) * inp.lambda1;
    let d1 = inp.n_count as f64;
    let d2 = 2.0 / scale * (d1 * (scale / 2.0 - inp.mu1) + d_const);
    let top = d1.max(d2);
    if !top.is_finite() || top >= 2f64.powi(62) {
        return Err(Error::invalid(format!("dimension bound {top} is not representable")));
    }
    Ok(HausdorffBound {
        d_const,
        d1,
        d2,
        d_final: top.max(0.0).floor() as u64 + 1,
    })
}

/// Splitting `d_u f(x,0) <= V_eps(x) + c_eps` built from a dissipation profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominatingPotential {
    pub eps: f64,
    /// `V_eps = (2/eps) D`
    pub potential: Field,
    /// `c_eps = (eps/2) C (1 + eps^gamma)`
    pub constant: f64,
}

pub fn dominating_potential(d_field: &Field, eps: f64, c: f64, gamma: f64) -> Result<DominatingPotential> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    nonnegative("growth constant C", c)?;
    if let Some(i) = d_field.values().iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::invalid(format!("dissipation profile is negative at node {i}")));
    }
    Ok(DominatingPotential {
        eps,
        potential: d_field.scaled(2.0 / eps),
        constant: 0.5 * eps * c * (1.0 + eps.powf(gamma)),
    })
}

impl DominatingPotential {
    /// Largest `d_u f(x,0) - V_eps(x) - c_eps` over the nodes; `<= 0` means the
    /// splitting holds everywhere. Also returns the worst node.
    pub fn worst_slack(&self, dfu0: &Field) -> Result<(f64, usize)> {
        dfu0.ensure_grid(self.potential.grid())?;
        let mut worst = (f64::NEG_INFINITY, 0);
        for (i, (d, v)) in dfu0.values().iter().zip(self.potential.values()).enumerate() {
            let s = d - v - self.constant;
            if s > worst.0 {
                worst = (s, i);
            }
        }
        Ok(worst)
    }

    /// `max_x V_eps + c_eps`, the size the eps scan minimizes.
    pub fn size(&self) -> f64 {
        self.potential.values().iter().copied().fold(0.0, f64::max) + self.constant
    }
}

/// Scans `eps` over `n` log-spaced values in `[eps_min, 1]` and returns the
/// splitting of smallest [`DominatingPotential::size`].
pub fn scan_dominating_potential(
    d_field: &Field,
    c: f64,
    gamma: f64,
    eps_min: f64,
    n: usize,
) -> Result<DominatingPotential> {
    if !(eps_min > 0.0 && eps_min <= 1.0) || n == 0 {
        return Err(Error::invalid("eps scan needs eps_min in (0, 1] and at least one sample"));
    }
    let mut best: Option<DominatingPotential> = None;
    for i in 0..n {
        let t = if n == 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
        let eps = (eps_min.ln() * (1.0 - t)).exp();
        let cand = dominating_potential(d_field, eps, c, gamma)?;
        if best.as_ref().is_none_or(|b| cand.size() < b.size()) {
            best = Some(cand);
        }
    }
    Ok(best.expect("n >= 1"))
}

/// Norms of the invariant set used by the dimension bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantNorms {
    pub h1: f64,
    pub l52: f64,
    pub l6: f64,
    /// Where the values come from.
    pub source: String,
}

impl InvariantNorms {
    /// Bounds implied by an absorbing ball of `H1` radius `s`.
    pub fn from_radius(s: f64, table: &ConstantsTable) -> Result<Self> {
        nonnegative("radius", s)?;
        Ok(Self {
            h1: s,
            l52: table.m_q(2.5).map_err(|_| Error::MissingConstant("m_q.2.5".into()))? * s,
            l6: table.m_q(6.0)? * s,
            source: "absorbing-ball radius with embedding constants".into(),
        })
    }

    /// Largest norms over sampled states; a lower estimate of the true values.
    pub fn from_samples(states: &[Field]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("no sampled states"));
        }
        let mut out = Self {
            h1: 0.0,
            l52: 0.0,
            l6: 0.0,
            source: format!("maximum over {} sampled states", states.len()),
        };
        for u in states {
            out.h1 = out.h1.max(crate::domain::norms::h1_norm(u));
            out.l52 = out.l52.max(lp_norm(u, 2.5));
            out.l6 = out.l6.max(lp_norm(u, 6.0));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_operator, Grid};
    use crate::spectral::{lowest_eigs_k, EigenMethod, SpectralConfig};

    fn inputs() -> BoundInputs {
        BoundInputs {
            gamma: 2.0,
            lambda0: 0.9,
            lambda1: 30.0,
            delta: 0.5,
            growth_c: 1.5,
            i_h1: 2.0,
            i_l52: 1.2,
            i_l6: 0.8,
            k_52: 0.25,
            k_gamma: 0.2,
            mu1: 3.0,
            n_count: 2,
        }
    }

    #[test]
    fn zero_growth_collapses() {
        let inp = BoundInputs {
            growth_c: 0.0,
            n_count: 0,
            ..inputs()
        };
        let b = hausdorff_bound(&inp).unwrap();
        assert_eq!(b.d_const, 0.0);
        assert_eq!(b.d2, 0.0);
        assert_eq!(b.d_final, 1);
    }

    #[test]
    fn gamma_two_exponents() {
        // gamma = 2: exponents 3 and 4
        let inp = inputs();
        let base: f64 = 2.0 / (0.5 * 0.9);
        let expect = 2.5 * (0.6 * base).powf(1.5) * (1.5f64 * 1.2 * 0.25).powf(2.5)
            + 0.25 * (0.75 * base).powi(3) * (1.5 * 0.8f64.powi(3) * 0.2).powi(4);
        let got = nonlinear_constant(&inp).unwrap();
        assert!((got - expect).abs() <= 1e-13 * expect);
    }

    #[test]
    fn bound_is_monotone() {
        let base = hausdorff_bound(&inputs()).unwrap();
        for f in [
            |i: &mut BoundInputs| i.growth_c *= 1.1,
            |i: &mut BoundInputs| i.i_l52 *= 1.1,
            |i: &mut BoundInputs| i.i_l6 *= 1.1,
            |i: &mut BoundInputs| i.k_52 *= 1.1,
            |i: &mut BoundInputs| i.k_gamma *= 1.1,
        ] {
            let mut i = inputs();
            f(&mut i);
            let b = hausdorff_bound(&i).unwrap();
            assert!(b.d_const > base.d_const);
            assert!(b.d2 > base.d2);
        }
        let more = hausdorff_bound(&BoundInputs {
            n_count: 3,
            ..inputs()
        })
        .unwrap();
        assert!(more.d2 >= base.d2);
        assert!(base.d_final as f64 > base.d1.max(base.d2));
    }

    #[test]
    fn invalid_inputs() {
        assert!(hausdorff_bound(&BoundInputs { gamma: 3.0, ..inputs() }).is_err());
        assert!(matches!(
            hausdorff_bound(&BoundInputs { lambda1: -1.0, ..inputs() }),
            Err(Error::HypothesisViolation { .. })
        ));
        assert!(hausdorff_bound(&BoundInputs { delta: 1.0, ..inputs() }).is_err());
    }

    #[test]
    fn lieb_thirring_on_ground_state() {
        let g = Grid::unit_cube(8).unwrap();
        let a = assemble_operator(&g, &Field::zeros(g)).unwrap();
        let cfg = SpectralConfig {
            method: EigenMethod::DenseOracle,
            ..Default::default()
        };
        let s = lowest_eigs_k(&a, 3, &cfg).unwrap();
        let one = &s.vectors[..1];
        let r1 = lieb_thirring_residual_with(one, 2.5, 10.0).unwrap();
        assert!(r1 >= 0.0);
        let r2 = lieb_thirring_residual_with(one, 2.5, 20.0).unwrap();
        assert!(r2 > r1);
        let table = ConstantsTable::defaults();
        for p in [1.5, 2.0, 2.5] {
            assert!(lieb_thirring_residual(&s.vectors, p, &table).unwrap() >= 0.0, "p = {p}");
        }
        let not_unit = vec![s.vectors[0].scaled(2.0)];
        assert!(lieb_thirring_residual_with(&not_unit, 2.5, 1.0).is_err());
        assert!(lieb_thirring_residual_with(one, 3.0, 1.0).is_err());
    }

    #[test]
    fn clr_quadrature_and_refusals() {
        let g = Grid::unit_cube(5).unwrap();
        let mut t = ConstantsTable::defaults();
        assert!(matches!(clr_bound(&Field::constant(g, 1.0), 2.0, &t), Err(Error::MissingConstant(_))));
        t.insert("c_alpha.4", 1.0, "unit test").unwrap();
        t.insert("m_alpha_gamma", 1.0, "unit test").unwrap();
        assert_eq!(clr_bound(&Field::zeros(g), 2.0, &t).unwrap(), 0.0);
        let b = clr_bound(&Field::constant(g, 1.0), 2.0, &t).unwrap();
        assert!((b - g.dof() as f64 * g.cell_volume()).abs() < 1e-12);
        assert!(clr_bound(&Field::constant(g, -1.0), 2.0, &t).is_err());
    }

    #[test]
    fn dominating_potential_formula_and_scan() {
        let g = Grid::unit_cube(3).unwrap();
        let p = dominating_potential(&Field::zeros(g), 1.0, 1.0, 2.0).unwrap();
        assert!(p.potential.values().iter().all(|&v| v == 0.0));
        assert_eq!(p.constant, 1.0);
        assert!(dominating_potential(&Field::zeros(g), 0.0, 1.0, 2.0).is_err());
        assert!(dominating_potential(&Field::zeros(g), 1.5, 1.0, 2.0).is_err());
        let d = Field::constant(g, 0.01);
        let best = scan_dominating_potential(&d, 3.0, 2.0, 1e-3, 61).unwrap();
        for eps in [1e-3, 0.01, 0.3, 1.0] {
            assert!(best.size() <= dominating_potential(&d, eps, 3.0, 2.0).unwrap().size() + 1e-12);
        }
    }
}
