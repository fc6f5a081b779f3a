use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bilateral filter controls.
///
/// `edge_min`/`edge_max` bound the intensity axis of the bilateral grid used
/// by [`bilateral_fast`](super::bilateral_fast); the direct filter ignores them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilateralParams {
    pub sigma_spatial: f64,
    pub sigma_range: f64,
    pub edge_min: f64,
    pub edge_max: f64,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            sigma_spatial: 42.43,
            sigma_range: 0.1,
            edge_min: 0.2,
            edge_max: 1.0,
        }
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_spatial > 0.0 && self.sigma_spatial.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_spatial must be positive, got {}",
                self.sigma_spatial
            )));
        }
        if !(self.sigma_range > 0.0 && self.sigma_range.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_range must be positive, got {}",
                self.sigma_range
            )));
        }
        if !(self.edge_min < self.edge_max) || !self.edge_min.is_finite() || !self.edge_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "edge_min ({}) must be below edge_max ({})",
                self.edge_min, self.edge_max
            )));
        }
        Ok(())
    }

    /// Kernel radius of the direct filter, `ceil(3 * sigma_spatial)`.
    pub fn radius(&self) -> usize {
        (3.0 * self.sigma_spatial).ceil() as usize
    }
}

/// Weighted-least-squares smoothing controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WlsParams {
    /// Smoothness weight.
    pub lambda: f64,
    /// Exponent applied to the log-luminance gradient magnitude.
    pub alpha: f64,
    /// Keeps the smoothness weights finite in flat regions.
    pub epsilon: f64,
    /// Target relative residual of the linear solve.
    pub solver_tol: f64,
    pub max_iter: usize,
}

impl Default for WlsParams {
    fn default() -> Self {
        Self {
            lambda: 0.125,
            alpha: 1.2,
            epsilon: 1e-4,
            solver_tol: 1e-6,
            max_iter: 2000,
        }
    }
}

impl WlsParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!("{what} out of range: {v}")))
        };
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda", self.lambda);
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", self.alpha);
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.solver_tol > 0.0 && self.solver_tol.is_finite()) {
            return bad("solver_tol", self.solver_tol);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let bf = BilateralParams::default();
        bf.validate().unwrap();
        assert_eq!(bf.radius(), 128);
        WlsParams::default().validate().unwrap();
    }

    #[test]
    fn invalid_values() {
        let mut bf = BilateralParams { edge_min: 1.0, ..Default::default() };
        assert!(bf.validate().is_err());
        bf = BilateralParams { sigma_range: 0.0, ..Default::default() };
        assert!(bf.validate().is_err());
        let w = WlsParams { lambda: -1.0, ..Default::default() };
        assert!(w.validate().is_err());
        let w = WlsParams { epsilon: 0.0, ..Default::default() };
        assert!(w.validate().is_err());
        let w = WlsParams { lambda: 0.0, ..Default::default() };
        assert!(w.validate().is_ok());
    }
}
