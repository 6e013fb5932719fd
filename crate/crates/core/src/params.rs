use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which supremum defines the norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Supremum over all balls.
    Morrey,
    /// Supremum over balls of radius in (0, 1).
    SmallMorrey,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Morrey => "morrey",
            Mode::SmallMorrey => "small_morrey",
        }
    }
}

/// Space parameters `(n, p, q, mode)` with `1 <= p <= q < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub mode: Mode,
}

impl SpaceParams {
    pub fn new(n: u32, p: f64, q: f64, mode: Mode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension n must be positive".into()));
        }
        if !(p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParams(format!("p={p} and q={q} must be finite")));
        }
        if p < 1.0 {
            return Err(Error::InvalidParams(format!("p={p} must be >= 1")));
        }
        if q < p {
            return Err(Error::InvalidParams(format!("q={q} must be >= p={p}")));
        }
        Ok(Self { n, p, q, mode })
    }

    pub fn morrey(n: u32, p: f64, q: f64) -> Result<Self> {
        Self::new(n, p, q, Mode::Morrey)
    }

    pub fn small_morrey(n: u32, p: f64, q: f64) -> Result<Self> {
        Self::new(n, p, q, Mode::SmallMorrey)
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        Self { mode, ..self }
    }

    /// Fails unless `p < q`, the hypothesis of the witness constructions.
    pub fn require_strict(&self) -> Result<()> {
        if self.p < self.q {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "requires p < q, got p={} q={}",
                self.p, self.q
            )))
        }
    }

    /// Exponent of the scale-invariant power `|x|^{-n/q}`.
    pub fn critical_exponent(&self) -> f64 {
        -(self.n as f64) / self.q
    }

    /// `n (1 - p/q)`, the growth exponent of `∫_{B(0,r)} |x|^{-np/q} dx`.
    pub fn scaling_gap(&self) -> f64 {
        self.n as f64 * (1.0 - self.p / self.q)
    }
}

/// A ball `B(a, r)` described by the distance `d = |a|` of its center from
/// the origin; radial integrands only see that scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub d: f64,
    pub r: f64,
}

impl Ball {
    pub fn new(d: f64, r: f64) -> Result<Self> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("center distance d={d} must be >= 0")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius r={r} must be > 0")));
        }
        Ok(Self { d, r })
    }

    pub fn centered(r: f64) -> Self {
        Self { d: 0.0, r }
    }

    pub fn contains_origin(&self) -> bool {
        self.d < self.r
    }
}
