use std::fmt;
use std::sync::Arc;

use super::{Field, Grid, Profile};
use crate::error::{Error, Result};

/// Reaction term `f(x, u)` with its first two `u`-derivatives.
pub trait Nonlinearity: Send + Sync {
    fn value(&self, x: [f64; 3], u: f64) -> f64;
    fn du(&self, x: [f64; 3], u: f64) -> f64;
    fn duu(&self, x: [f64; 3], u: f64) -> f64;
}

/// `f(x,u) = g(x) + c1(x) u + c2 u^2 + c3 u^3`.
#[derive(Debug, Clone)]
pub struct PolynomialNonlinearity {
    extents: [(f64, f64); 3],
    g: Profile,
    c1: Profile,
    c2: f64,
    c3: f64,
}

impl PolynomialNonlinearity {
    pub fn new(extents: [(f64, f64); 3], g: Profile, c1: Profile, c2: f64, c3: f64) -> Self {
        Self {
            extents,
            g,
            c1,
            c2,
            c3,
        }
    }

    pub fn g(&self) -> &Profile {
        &self.g
    }

    pub fn c1(&self) -> &Profile {
        &self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn c3(&self) -> f64 {
        self.c3
    }

    /// Smallest `C` of the form `a + b` that makes `|f_uu| <= C (1 + |u|^2)` hold.
    pub fn derived_growth_constant(&self) -> f64 {
        2.0 * self.c2.abs() + 3.0 * self.c3.abs()
    }
}

impl Nonlinearity for PolynomialNonlinearity {
    fn value(&self, x: [f64; 3], u: f64) -> f64 {
        self.g.eval(x, &self.extents)
            + self.c1.eval(x, &self.extents) * u
            + self.c2 * u * u
            + self.c3 * u * u * u
    }

    fn du(&self, x: [f64; 3], u: f64) -> f64 {
        self.c1.eval(x, &self.extents) + 2.0 * self.c2 * u + 3.0 * self.c3 * u * u
    }

    fn duu(&self, _x: [f64; 3], u: f64) -> f64 {
        2.0 * self.c2 + 6.0 * self.c3 * u
    }
}

type ScalarFn = dyn Fn([f64; 3], f64) -> f64 + Send + Sync;

/// Nonlinearity given by three closures.
pub struct FnNonlinearity {
    f: Box<ScalarFn>,
    df: Box<ScalarFn>,
    ddf: Box<ScalarFn>,
}

impl FnNonlinearity {
    pub fn new(
        f: impl Fn([f64; 3], f64) -> f64 + Send + Sync + 'static,
        df: impl Fn([f64; 3], f64) -> f64 + Send + Sync + 'static,
        ddf: impl Fn([f64; 3], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Box::new(f),
            df: Box::new(df),
            ddf: Box::new(ddf),
        }
    }
}

impl Nonlinearity for FnNonlinearity {
    fn value(&self, x: [f64; 3], u: f64) -> f64 {
        (self.f)(x, u)
    }

    fn du(&self, x: [f64; 3], u: f64) -> f64 {
        (self.df)(x, u)
    }

    fn duu(&self, x: [f64; 3], u: f64) -> f64 {
        (self.ddf)(x, u)
    }
}

/// A nonlinearity together with its structure constants `C`, `gamma`, `q`, `sigma`.
#[derive(Clone)]
pub struct NonlinearitySpec {
    f: Arc<dyn Nonlinearity>,
    growth_c: f64,
    growth_gamma: f64,
    q: f64,
    sigma: f64,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("growth_c", &self.growth_c)
            .field("growth_gamma", &self.growth_gamma)
            .field("q", &self.q)
            .field("sigma", &self.sigma)
            .finish_non_exhaustive()
    }
}

impl NonlinearitySpec {
    /// `C = 0` is accepted so that linear reaction terms can be expressed.
    pub fn new(
        f: Arc<dyn Nonlinearity>,
        growth_c: f64,
        growth_gamma: f64,
        q: f64,
        sigma: f64,
    ) -> Result<Self> {
        if !(growth_c >= 0.0 && growth_c.is_finite()) {
            return Err(Error::invalid(format!("growth constant C must be >= 0, got {growth_c}")));
        }
        if !(2.0..3.0).contains(&growth_gamma) {
            return Err(Error::invalid(format!("gamma must lie in [2,3), got {growth_gamma}")));
        }
        if !(q > 1.2 && q <= 2.0) {
            return Err(Error::invalid(format!("q must lie in (6/5, 2], got {q}")));
        }
        if !(sigma > 1.5 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must exceed 3/2, got {sigma}")));
        }
        Ok(Self {
            f,
            growth_c,
            growth_gamma,
            q,
            sigma,
        })
    }

    /// Polynomial nonlinearity with `C` derived from its coefficients, `gamma = 2`, `q = sigma = 2`.
    pub fn polynomial(p: PolynomialNonlinearity) -> Self {
        let c = p.derived_growth_constant();
        Self::new(Arc::new(p), c, 2.0, 2.0, 2.0).expect("default structure constants are valid")
    }

    /// `f = 0`.
    pub fn zero() -> Self {
        Self::polynomial(PolynomialNonlinearity::new(
            [(0.0, 1.0); 3],
            Profile::zero(),
            Profile::zero(),
            0.0,
            0.0,
        ))
    }

    /// `f = c u`.
    pub fn linear(c: f64) -> Self {
        Self::polynomial(PolynomialNonlinearity::new(
            [(0.0, 1.0); 3],
            Profile::zero(),
            Profile::constant(c),
            0.0,
            0.0,
        ))
    }

    /// `f = c3 u^3`.
    pub fn cubic(c3: f64) -> Self {
        Self::polynomial(PolynomialNonlinearity::new(
            [(0.0, 1.0); 3],
            Profile::zero(),
            Profile::zero(),
            0.0,
            c3,
        ))
    }

    pub fn with_structure(mut self, q: f64, sigma: f64) -> Result<Self> {
        let checked = Self::new(self.f.clone(), self.growth_c, self.growth_gamma, q, sigma)?;
        self.q = checked.q;
        self.sigma = checked.sigma;
        Ok(self)
    }

    pub fn with_growth(self, c: f64, gamma: f64) -> Result<Self> {
        Self::new(self.f, c, gamma, self.q, self.sigma)
    }

    pub fn function(&self) -> &dyn Nonlinearity {
        self.f.as_ref()
    }

    pub fn value(&self, x: [f64; 3], u: f64) -> f64 {
        self.f.value(x, u)
    }

    pub fn du(&self, x: [f64; 3], u: f64) -> f64 {
        self.f.du(x, u)
    }

    pub fn duu(&self, x: [f64; 3], u: f64) -> f64 {
        self.f.duu(x, u)
    }

    pub fn growth_c(&self) -> f64 {
        self.growth_c
    }

    pub fn growth_gamma(&self) -> f64 {
        self.growth_gamma
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Checks `|f_uu(x,u)| <= C (1 + |u|^gamma)` at every node for `u` on a
    /// uniform lattice in `[-u_max, u_max]`.
    pub fn check_growth(&self, grid: &Grid, u_max: f64, samples: usize) -> Result<()> {
        let samples = samples.max(2);
        for idx in 0..grid.dof() {
            let x = grid.position(idx);
            for s in 0..samples {
                let u = -u_max + 2.0 * u_max * s as f64 / (samples - 1) as f64;
                let lhs = self.duu(x, u).abs();
                let rhs = self.growth_c * (1.0 + u.abs().powf(self.growth_gamma));
                if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
                    return Err(Error::HypothesisViolation {
                        what: format!("growth bound |f_uu| <= C(1+|u|^gamma) fails at x = {x:?}, u = {u}"),
                        value: lhs - rhs,
                    });
                }
            }
        }
        Ok(())
    }

    /// `F(x,u) = int_0^u f(x,s) ds` by adaptive Simpson to `1e-10` absolute.
    pub fn primitive(&self, x: [f64; 3], u: f64) -> Option<f64> {
        adaptive_simpson(|s| self.value(x, s), 0.0, u, 1e-10, 50)
    }
}

/// Pointwise `f`, `f_u` or `f_uu` at every node.
pub fn nemitski(spec: &NonlinearitySpec, u: &Field, order: u8) -> Result<Field> {
    let g = *u.grid();
    let mut out = Vec::with_capacity(g.dof());
    for (idx, &v) in u.values().iter().enumerate() {
        let x = g.position(idx);
        let y = match order {
            0 => spec.value(x, v),
            1 => spec.du(x, v),
            2 => spec.duu(x, v),
            _ => return Err(Error::invalid(format!("nemitski order must be 0, 1 or 2, got {order}"))),
        };
        out.push(y);
    }
    Field::new(g, out)
}

/// `int_a^b f` by adaptive Simpson; `None` when the recursion depth runs out
/// before the tolerance is met.
pub(crate) fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Option<f64> {
    if a == b {
        return Some(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let r = simpson_rec(&f, a, b, fa, fm, fb, whole, tol, depth)?;
    r.is_finite().then_some(r)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}
