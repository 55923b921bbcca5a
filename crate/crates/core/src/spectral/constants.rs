//! Named analytic constants with mandatory provenance.
//!
//! Keys: `m_b`, `m_q.<q>`, `k_lt.<p>`, `c_alpha.<alpha>`, `m_alpha_gamma`, `delta`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    entries: BTreeMap<String, Constant>,
}

/// Sharp Sobolev constant for `|u|_{L6} <= S |grad u|_{L2}` in three dimensions,
/// `S^2 = 1 / (3 (pi/2)^{4/3})`.
pub fn sobolev_l6_constant() -> f64 {
    (1.0 / (3.0 * std::f64::consts::FRAC_PI_2.powf(4.0 / 3.0))).sqrt()
}

const PROV_M2: &str = "exact: |u|_L2 <= |u|_H1 by definition of the H1 norm";
const PROV_M6: &str =
    "Aubin-Talenti sharp Sobolev constant S = (3 (pi/2)^(4/3))^(-1/2) ~ 0.42727, using |grad u| <= |u|_H1";
const PROV_MB: &str = "reflection extension of H1(unit cube) to the 3x cube, Lipschitz cutoff, and the \
                       Aubin-Talenti constant give 0.4273*sqrt(27)*2 ~ 4.44; rounded up";
const PROV_K52: &str = "Lieb-Thirring kinetic constant >= 0.471 x semiclassical (3/5)(6 pi^2)^(2/3) \
                        (Frank, Hundertmark, Jex, Nam 2021); reciprocal 0.233 rounded up";
const PROV_K32: &str = "triangle inequality |sum phi_i^2|_L3 <= sum |phi_i|_L6^2 with the Aubin-Talenti \
                        constant squared";
const PROV_DELTA: &str = "default splitting parameter";

impl Default for ConstantsTable {
    fn default() -> Self {
        Self::defaults()
    }
}

impl ConstantsTable {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Literature-sourced defaults. `c_alpha.*` and `m_alpha_gamma` have none.
    pub fn defaults() -> Self {
        let s = sobolev_l6_constant();
        let mut t = Self::empty();
        let put = |t: &mut Self, k: &str, v: f64, p: &str| {
            t.insert(k, v, p).expect("default constants are valid");
        };
        put(&mut t, "m_b", 5.0, PROV_MB);
        put(&mut t, "m_q.2", 1.0, PROV_M2);
        put(&mut t, "m_q.6", (s * 1e5).ceil() / 1e5, PROV_M6);
        put(&mut t, "k_lt.2.5", 0.25, PROV_K52);
        put(&mut t, "k_lt.1.5", (s * s * 1e5).ceil() / 1e5, PROV_K32);
        put(&mut t, "delta", 0.5, PROV_DELTA);
        t
    }

    /// Inserts or replaces an entry after validating name and range. An empty
    /// provenance is accepted here and refused when the constant is used.
    pub fn insert(&mut self, name: &str, value: f64, provenance: &str) -> Result<()> {
        validate_key(name)?;
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::invalid(format!("constant `{name}` must be positive, got {value}")));
        }
        if name == "delta" && value >= 1.0 {
            return Err(Error::invalid("delta must lie in (0,1)"));
        }
        self.entries.insert(
            name.to_string(),
            Constant {
                value,
                provenance: provenance.trim().to_string(),
            },
        );
        Ok(())
    }

    /// Replaces only the provenance string of an existing entry.
    pub fn set_provenance(&mut self, name: &str, provenance: &str) -> Result<()> {
        let c = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::MissingConstant(name.to_string()))?;
        c.provenance = provenance.trim().to_string();
        Ok(())
    }

    /// Overlays every entry of `other`.
    pub fn merge(&mut self, other: &ConstantsTable) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, Constant> {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        let c = self
            .entries
            .get(name)
            .ok_or_else(|| Error::MissingConstant(name.to_string()))?;
        if c.provenance.is_empty() {
            return Err(Error::MissingProvenance(name.to_string()));
        }
        Ok(c.value)
    }

    fn indexed(&self, prefix: &str, x: f64) -> Option<(&String, &Constant)> {
        self.entries.iter().find(|(k, _)| {
            k.strip_prefix(prefix)
                .and_then(|s| s.strip_prefix('.'))
                .and_then(|s| s.parse::<f64>().ok())
                .is_some_and(|v| (v - x).abs() <= 1e-12 * x.abs().max(1.0))
        })
    }

    fn get_indexed(&self, prefix: &str, x: f64) -> Result<Option<(String, f64)>> {
        match self.indexed(prefix, x) {
            None => Ok(None),
            Some((k, c)) => {
                if c.provenance.is_empty() {
                    Err(Error::MissingProvenance(k.clone()))
                } else {
                    Ok(Some((k.clone(), c.value)))
                }
            }
        }
    }

    pub fn delta(&self) -> Result<f64> {
        self.get("delta")
    }

    pub fn m_b(&self) -> Result<f64> {
        self.get("m_b")
    }

    pub fn m_alpha_gamma(&self) -> Result<f64> {
        self.get("m_alpha_gamma")
    }

    pub fn c_alpha(&self, alpha: f64) -> Result<f64> {
        self.get_indexed("c_alpha", alpha)?
            .map(|(_, v)| v)
            .ok_or_else(|| Error::MissingConstant(format!("c_alpha.{alpha}")))
    }

    /// Embedding constant `|u|_{Lq} <= M_q |u|_{H1}` for `q` in `[2, 6]`. An
    /// explicit entry wins; otherwise `M_2^{1-t} M_6^t` with `1/q = (1-t)/2 + t/6`
    /// (Hoelder interpolation).
    pub fn m_q(&self, q: f64) -> Result<f64> {
        if !(2.0..=6.0).contains(&q) {
            return Err(Error::invalid(format!("embedding exponent q = {q} outside [2, 6]")));
        }
        if let Some((_, v)) = self.get_indexed("m_q", q)? {
            return Ok(v);
        }
        let m2 = self
            .get_indexed("m_q", 2.0)?
            .ok_or_else(|| Error::MissingConstant(format!("m_q.{q}")))?
            .1;
        let m6 = self
            .get_indexed("m_q", 6.0)?
            .ok_or_else(|| Error::MissingConstant(format!("m_q.{q}")))?
            .1;
        let t = 1.5 - 3.0 / q;
        Ok(m2.powf(1.0 - t) * m6.powf(t))
    }

    /// Lieb-Thirring constant `K_{p,3}` for `p` in `[3/2, 5/2]`. An explicit
    /// entry wins; otherwise the endpoints are combined by Hoelder interpolation
    /// of the density between `L^{5/3}` and `L^3`.
    pub fn k_lt(&self, p: f64) -> Result<f64> {
        if !(1.5..=2.5).contains(&p) {
            return Err(Error::invalid(format!("Lieb-Thirring exponent p = {p} outside [3/2, 5/2]")));
        }
        if let Some((_, v)) = self.get_indexed("k_lt", p)? {
            return Ok(v);
        }
        let k5 = self
            .get_indexed("k_lt", 2.5)?
            .ok_or_else(|| Error::MissingConstant(format!("k_lt.{p}")))?
            .1;
        let k3 = self
            .get_indexed("k_lt", 1.5)?
            .ok_or_else(|| Error::MissingConstant(format!("k_lt.{p}")))?
            .1;
        let t = 3.0 * (5.0 - 2.0 * p) / (4.0 * p);
        Ok((k5.powf(0.6 * (1.0 - t)) * k3.powf(t)).powf(2.0 * p / 3.0))
    }
}

fn validate_key(name: &str) -> Result<()> {
    let indexed = |prefix: &str| {
        name.strip_prefix(prefix)
            .and_then(|s| s.strip_prefix('.'))
            .and_then(|s| s.parse::<f64>().ok())
            .is_some_and(|v| v.is_finite() && v > 0.0)
    };
    let ok = matches!(name, "m_b" | "m_alpha_gamma" | "delta")
        || indexed("m_q")
        || indexed("k_lt")
        || indexed("c_alpha");
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("unknown constant `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_usable() {
        let t = ConstantsTable::defaults();
        assert_eq!(t.delta().unwrap(), 0.5);
        assert_eq!(t.m_q(2.0).unwrap(), 1.0);
        assert!((t.m_q(6.0).unwrap() - 0.42727).abs() < 1e-5);
        let m3 = t.m_q(3.0).unwrap();
        assert!(m3 < 1.0 && m3 > t.m_q(6.0).unwrap());
        assert_eq!(t.k_lt(2.5).unwrap(), 0.25);
        // interpolation reproduces the endpoints
        let mut u = t.clone();
        u.entries.remove("k_lt.2.5");
        u.insert("k_lt.2.5", 0.25, "x").unwrap();
        assert!((u.k_lt(2.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(t.c_alpha(4.0), Err(Error::MissingConstant(_))));
        assert!(matches!(t.m_alpha_gamma(), Err(Error::MissingConstant(_))));
    }

    #[test]
    fn interpolated_lt_constant_matches_endpoints() {
        let t = ConstantsTable::defaults();
        let mut bare = ConstantsTable::empty();
        bare.insert("k_lt.2.5", 0.25, "a").unwrap();
        bare.insert("k_lt.1.5", t.get("k_lt.1.5").unwrap(), "b").unwrap();
        let k2 = bare.k_lt(2.0).unwrap();
        // value at p = 2 lies between the two endpoint values
        let lo = 0.18f64.min(0.25);
        assert!(k2 > lo * 0.9 && k2 < 0.3, "{k2}");
    }

    #[test]
    fn missing_provenance_is_refused_on_use() {
        let mut t = ConstantsTable::defaults();
        t.insert("c_alpha.4", 2.0, "").unwrap();
        assert!(matches!(t.c_alpha(4.0), Err(Error::MissingProvenance(_))));
        t.set_provenance("c_alpha.4", "textbook").unwrap();
        assert_eq!(t.c_alpha(4.0).unwrap(), 2.0);
    }

    #[test]
    fn validation() {
        let mut t = ConstantsTable::empty();
        assert!(t.insert("delta", 1.5, "x").is_err());
        assert!(t.insert("m_b", -1.0, "x").is_err());
        assert!(t.insert("bogus", 1.0, "x").is_err());
        assert!(t.insert("m_q.abc", 1.0, "x").is_err());
        assert!(t.insert("k_lt.2", 0.2, "x").is_ok());
    }
}
