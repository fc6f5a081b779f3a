//! Weighted-least-squares edge-preserving smoothing.
//!
//! Minimises `sum (u - g)^2 + lambda * sum_axis w_axis * (d_axis u)^2` with
//! `w = (|d l|^alpha + epsilon)^-1` on the log-luminance `l = ln(g + delta)`,
//! i.e. solves `(I + lambda L_g) u = g` for the five-point inhomogeneous
//! Laplacian `L_g`.

use super::params::WlsParams;
use super::solver::{solve_spd_preconditioned, CsrMatrix, Preconditioner, SpdOperator};
use crate::error::Result;
use crate::image::Plane;

/// Guard against `ln(0)` in the log-luminance.
pub const LOG_DELTA: f64 = 1e-2;

/// Per-pixel smoothness weights, already scaled by lambda. `east[i]` couples
/// pixel `i` to its right neighbour and `south[i]` to the one below; both are
/// zero on the last column/row (forward differences with replicate boundary).
#[derive(Clone, Debug)]
pub struct WlsSystem {
    width: usize,
    height: usize,
    east: Vec<f64>,
    south: Vec<f64>,
    diag: Vec<f64>,
}

impl WlsSystem {
    pub fn new(src: &Plane, p: &WlsParams) -> Self {
        let (w, h) = src.dims();
        let log: Vec<f64> = src.data().iter().map(|v| (v + LOG_DELTA).ln()).collect();
        let weight = |d: f64| p.lambda / (d.abs().powf(p.alpha) + p.epsilon);
        let mut east = vec![0.0; w * h];
        let mut south = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    east[i] = weight(log[i + 1] - log[i]);
                }
                if y + 1 < h {
                    south[i] = weight(log[i + w] - log[i]);
                }
            }
        }
        let mut diag = vec![1.0; w * h];
        for i in 0..w * h {
            diag[i] += east[i] + south[i];
            if i % w > 0 {
                diag[i] += east[i - 1];
            }
            if i >= w {
                diag[i] += south[i - w];
            }
        }
        Self { width: w, height: h, east, south, diag }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Explicit sparse form of the same operator.
    pub fn to_csr(&self) -> CsrMatrix {
        let w = self.width;
        let mut t = Vec::with_capacity(5 * self.diag.len());
        for i in 0..self.diag.len() {
            t.push((i, i, self.diag[i]));
            if i % w + 1 < w {
                t.push((i, i + 1, -self.east[i]));
                t.push((i + 1, i, -self.east[i]));
            }
            if i + w < self.diag.len() {
                t.push((i, i + w, -self.south[i]));
                t.push((i + w, i, -self.south[i]));
            }
        }
        CsrMatrix::from_triplets(self.diag.len(), &t).expect("indices in range")
    }
}

impl SpdOperator for WlsSystem {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let w = self.width;
        for y in 0..self.height {
            let row = y * w;
            for cx in 0..w {
                let i = row + cx;
                let mut acc = self.diag[i] * x[i];
                if cx + 1 < w {
                    acc -= self.east[i] * x[i + 1];
                }
                if cx > 0 {
                    acc -= self.east[i - 1] * x[i - 1];
                }
                if y + 1 < self.height {
                    acc -= self.south[i] * x[i + w];
                }
                if y > 0 {
                    acc -= self.south[i - w] * x[i - w];
                }
                out[i] = acc;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }
}

/// Modified incomplete Cholesky factor of a [`WlsSystem`] (no fill-in).
/// Stores the reciprocal square roots of the pivots.
#[derive(Clone, Debug)]
pub struct IncompleteCholesky<'a> {
    system: &'a WlsSystem,
    inv_pivot: Vec<f64>,
}

/// Fraction of dropped fill moved back onto the diagonal.
const MIC_TAU: f64 = 0.97;
/// Pivots below this fraction of the diagonal fall back to the diagonal.
const MIC_SAFETY: f64 = 0.25;

impl<'a> IncompleteCholesky<'a> {
    pub fn new(system: &'a WlsSystem) -> Self {
        let (w, h) = (system.width, system.height);
        let (east, south, diag) = (&system.east, &system.south, &system.diag);
        let mut inv_pivot = vec![0.0; diag.len()];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let mut e = diag[i];
                if x > 0 {
                    let (c, p) = (east[i - 1], inv_pivot[i - 1]);
                    e -= (c * p).powi(2) + MIC_TAU * c * south[i - 1] * p * p;
                }
                if y > 0 {
                    let (c, p) = (south[i - w], inv_pivot[i - w]);
                    e -= (c * p).powi(2) + MIC_TAU * c * east[i - w] * p * p;
                }
                if e < MIC_SAFETY * diag[i] {
                    e = diag[i];
                }
                inv_pivot[i] = 1.0 / e.sqrt();
            }
        }
        Self { system, inv_pivot }
    }
}

impl Preconditioner for IncompleteCholesky<'_> {
    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        let (w, h) = (self.system.width, self.system.height);
        let (east, south, p) = (&self.system.east, &self.system.south, &self.inv_pivot);
        // forward substitution, result kept in z
        for y in 0..h {
            let row = y * w;
            let mut left = 0.0;
            for x in 0..w {
                let i = row + x;
                let mut t = r[i] + left;
                if y > 0 {
                    t += south[i - w] * p[i - w] * z[i - w];
                }
                let v = t * p[i];
                z[i] = v;
                left = east[i] * p[i] * v;
            }
        }
        for y in (0..h).rev() {
            let row = y * w;
            let mut right = 0.0;
            for x in (0..w).rev() {
                let i = row + x;
                let mut t = z[i] + east[i] * p[i] * right;
                if y + 1 < h {
                    t += south[i] * p[i] * z[i + w];
                }
                let v = t * p[i];
                z[i] = v;
                right = v;
            }
        }
    }
}

/// Solver statistics of one smoothing call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WlsStats {
    pub iterations: usize,
    pub residual: f64,
}

pub fn wls_smooth(src: &Plane, p: &WlsParams) -> Result<Plane> {
    wls_smooth_with_stats(src, p).map(|(u, _)| u)
}

/// [`wls_smooth`] plus the solve's iteration count and final relative residual.
pub fn wls_smooth_with_stats(src: &Plane, p: &WlsParams) -> Result<(Plane, WlsStats)> {
    p.validate()?;
    if p.lambda == 0.0 {
        return Ok((src.clone(), WlsStats { iterations: 0, residual: 0.0 }));
    }
    let system = WlsSystem::new(src, p);
    // The input is a good initial guess: the smoothed image stays close to it.
    let pc = IncompleteCholesky::new(&system);
    let sol = solve_spd_preconditioned(
        &system,
        &pc,
        src.data(),
        src.data().to_vec(),
        p.solver_tol,
        p.max_iter,
    )?;
    let stats = WlsStats { iterations: sol.iterations, residual: sol.residual };
    Ok((Plane::from_clamped(src.width(), src.height(), sol.x), stats))
}
