use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `|rho12|^2 <= rho11 * rho22` for discretized evolution.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Qubit density matrix in the measurement basis.
///
/// Only `rho11` and `rho12` are stored; `rho22 = 1 - rho11` and
/// `rho21 = conj(rho12)`, so the trace is exactly one by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub rho11: f64,
    pub rho12: Complex64,
}

impl QubitState {
    pub fn new(rho11: f64, rho12: Complex64) -> Result<Self> {
        let state = Self { rho11, rho12 };
        state.validate()?;
        Ok(state)
    }

    /// The default initial state: equal superposition (1/2, 1/2).
    pub fn superposition() -> Self {
        Self {
            rho11: 0.5,
            rho12: Complex64::new(0.5, 0.0),
        }
    }

    pub fn ground() -> Self {
        Self {
            rho11: 1.0,
            rho12: Complex64::new(0.0, 0.0),
        }
    }

    #[inline]
    pub fn rho22(&self) -> f64 {
        1.0 - self.rho11
    }

    /// `<sigma_z> = rho11 - rho22`.
    #[inline]
    pub fn sigma_z(&self) -> f64 {
        2.0 * self.rho11 - 1.0
    }

    /// `rho11 * rho22 - |rho12|^2`; non-negative for a physical state.
    pub fn positivity_margin(&self) -> f64 {
        self.rho11 * self.rho22() - self.rho12.norm_sqr()
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.positivity_margin() >= -tol
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho11.is_finite() || !self.rho12.re.is_finite() || !self.rho12.im.is_finite() {
            return Err(Error::InvalidState(format!(
                "non-finite entries in {self:?}"
            )));
        }
        if !(0.0..=1.0).contains(&self.rho11) {
            return Err(Error::InvalidState(format!(
                "rho11 = {} outside [0, 1]",
                self.rho11
            )));
        }
        if !self.is_positive(POSITIVITY_TOL) {
            return Err(Error::InvalidState(format!(
                "|rho12|^2 = {} exceeds rho11*rho22 = {}",
                self.rho12.norm_sqr(),
                self.rho11 * self.rho22()
            )));
        }
        Ok(())
    }

    /// Largest of `|d rho11|`, `|d Re rho12|`, `|d Im rho12|`.
    pub fn max_abs_diff(&self, other: &QubitState) -> f64 {
        let d = self.component_diff(other);
        d[0].max(d[1]).max(d[2])
    }

    /// `[|d rho11|, |d Re rho12|, |d Im rho12|]`.
    pub fn component_diff(&self, other: &QubitState) -> [f64; 3] {
        [
            (self.rho11 - other.rho11).abs(),
            (self.rho12.re - other.rho12.re).abs(),
            (self.rho12.im - other.rho12.im).abs(),
        ]
    }
}

impl Default for QubitState {
    fn default() -> Self {
        Self::superposition()
    }
}
