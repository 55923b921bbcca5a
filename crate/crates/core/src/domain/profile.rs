//! Closed-form spatial profiles used for potentials and coefficients.
//!
//! Text syntax, terms separated by a standalone `+`:
//!
//! ```text
//! 2.5                         constant
//! const 2.5                   constant
//! gauss AMP CX CY CZ WIDTH    AMP * exp(-|x - c|^2 / WIDTH^2)
//! sine AMP I J K              AMP * prod sin(m pi (x - a) / L) over the box
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Field, Grid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileTerm {
    Const(f64),
    Gauss {
        amp: f64,
        center: [f64; 3],
        width: f64,
    },
    Sine {
        amp: f64,
        modes: [usize; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    terms: Vec<ProfileTerm>,
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![ProfileTerm::Const(c)],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn from_terms(terms: Vec<ProfileTerm>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[ProfileTerm] {
        &self.terms
    }

    /// `Some(c)` when every term is constant.
    pub fn as_constant(&self) -> Option<f64> {
        self.terms.iter().try_fold(0.0, |acc, t| match t {
            ProfileTerm::Const(c) => Some(acc + c),
            _ => None,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn eval(&self, x: [f64; 3], extents: &[(f64, f64); 3]) -> f64 {
        self.terms.iter().map(|t| t.eval(x, extents)).sum()
    }

    pub fn to_field(&self, grid: &Grid) -> Field {
        let e = grid.extents();
        Field::from_fn(*grid, |x| self.eval(x, &e))
    }

    /// Sum of the absolute term amplitudes; bounds `sup |profile|`.
    pub fn sup_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                ProfileTerm::Const(c) => c.abs(),
                ProfileTerm::Gauss { amp, .. } | ProfileTerm::Sine { amp, .. } => amp.abs(),
            })
            .sum()
    }
}

impl ProfileTerm {
    fn eval(&self, x: [f64; 3], extents: &[(f64, f64); 3]) -> f64 {
        match *self {
            ProfileTerm::Const(c) => c,
            ProfileTerm::Gauss { amp, center, width } => {
                let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                amp * (-r2 / (width * width)).exp()
            }
            ProfileTerm::Sine { amp, modes } => {
                let mut p = amp;
                for a in 0..3 {
                    let (lo, hi) = extents[a];
                    p *= (modes[a] as f64 * std::f64::consts::PI * (x[a] - lo) / (hi - lo)).sin();
                }
                p
            }
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::invalid("empty profile"));
        }
        let mut terms = Vec::new();
        for chunk in tokens.split(|t| *t == "+") {
            terms.push(parse_term(chunk)?);
        }
        Ok(Self { terms })
    }
}

fn parse_term(tok: &[&str]) -> Result<ProfileTerm> {
    let num = |t: &str| -> Result<f64> {
        let v: f64 = t
            .parse()
            .map_err(|_| Error::invalid(format!("expected a number, found `{t}`")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(format!("non-finite number `{t}`")))
        }
    };
    let mode = |t: &str| -> Result<usize> {
        t.parse()
            .map_err(|_| Error::invalid(format!("expected a mode index, found `{t}`")))
    };
    match tok {
        [] => Err(Error::invalid("empty profile term")),
        [v] => Ok(ProfileTerm::Const(num(v)?)),
        ["const", v] => Ok(ProfileTerm::Const(num(v)?)),
        ["gauss", a, cx, cy, cz, w] => {
            let width = num(w)?;
            if width <= 0.0 {
                return Err(Error::invalid("gauss width must be positive"));
            }
            Ok(ProfileTerm::Gauss {
                amp: num(a)?,
                center: [num(cx)?, num(cy)?, num(cz)?],
                width,
            })
        }
        ["sine", a, i, j, k] => {
            let modes = [mode(i)?, mode(j)?, mode(k)?];
            if modes.contains(&0) {
                return Err(Error::invalid("sine modes start at 1"));
            }
            Ok(ProfileTerm::Sine {
                amp: num(a)?,
                modes,
            })
        }
        other => Err(Error::invalid(format!(
            "cannot parse profile term `{}`",
            other.join(" ")
        ))),
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match t {
                ProfileTerm::Const(c) => write!(f, "{c}")?,
                ProfileTerm::Gauss { amp, center, width } => write!(
                    f,
                    "gauss {amp} {} {} {} {width}",
                    center[0], center[1], center[2]
                )?,
                ProfileTerm::Sine { amp, modes } => {
                    write!(f, "sine {amp} {} {} {}", modes[0], modes[1], modes[2])?
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        let src = "-100 + gauss 2 0.5 0.5 0.5 0.2 + sine 1.5 1 2 1";
        let p: Profile = src.parse().unwrap();
        assert_eq!(p.terms().len(), 3);
        let again: Profile = p.to_string().parse().unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn constants_collapse() {
        let p: Profile = "1 + const 2".parse().unwrap();
        assert_eq!(p.as_constant(), Some(3.0));
        let z: Profile = "0".parse().unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "gauss 1 2", "sine 1 0 1 1", "x", "1 +", "gauss 1 0 0 0 -1"] {
            assert!(bad.parse::<Profile>().is_err(), "{bad}");
        }
    }

    #[test]
    fn sine_vanishes_on_boundary_and_peaks_inside() {
        let p: Profile = "sine 2 1 1 1".parse().unwrap();
        let e = [(0.0, 1.0), (0.0, 2.0), (1.0, 4.0)];
        assert!((p.eval([0.5, 1.0, 2.5], &e) - 2.0).abs() < 1e-14);
        assert!(p.eval([0.0, 1.0, 2.5], &e).abs() < 1e-14);
    }
}
