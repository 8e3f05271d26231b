//! The projective circle parameter `t` ranging over `R u {inf}`.

use serde::{Deserialize, Serialize};

/// A point of the projective line: either a finite real or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProjParam {
    Finite(f64),
    Infinity,
}

impl ProjParam {
    /// `tan(pi s)` with the convention `tan(pi/2 + k pi) = inf`.
    pub fn tan_pi(s: f64) -> ProjParam {
        let frac = (s - 0.5).rem_euclid(1.0);
        if frac.abs() < 1e-13 || (1.0 - frac).abs() < 1e-13 {
            ProjParam::Infinity
        } else {
            ProjParam::Finite((std::f64::consts::PI * s).tan())
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ProjParam::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ProjParam::Finite(t) => Some(t),
            ProjParam::Infinity => None,
        }
    }
}

impl From<f64> for ProjParam {
    fn from(t: f64) -> Self {
        ProjParam::Finite(t)
    }
}

impl std::fmt::Display for ProjParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjParam::Finite(t) => write!(f, "{t}"),
            ProjParam::Infinity => f.write_str("inf"),
        }
    }
}
