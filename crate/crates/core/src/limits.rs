use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Search bounds shared by every decision procedure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Number of levels `N` examined.
    pub levels: u32,
    /// Number of enumerated indices `H` examined.
    pub horizon: u64,
    /// Relative tolerance for approximate comparisons.
    pub tol: f64,
    /// Largest support size for sign-pattern expansions.
    pub j_max: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            levels: 20,
            horizon: 10_000,
            tol: crate::xpos::DEFAULT_TOL,
            j_max: 16,
        }
    }
}

impl Limits {
    pub const J_MAX_CEILING: u32 = 24;

    pub fn new(levels: u32, horizon: u64) -> Self {
        Limits {
            levels,
            horizon,
            ..Limits::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidArgument("levels must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.j_max > Self::J_MAX_CEILING {
            return Err(Error::InvalidArgument(format!(
                "J_max must not exceed {}",
                Self::J_MAX_CEILING
            )));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Limits {
            levels: self.levels * 2,
            horizon: self.horizon * 2,
            ..*self
        }
    }
}
