//! Bilateral-grid approximation of the bilateral filter.
//!
//! Samples are splatted trilinearly into a `(x, y, intensity)` grid sampled at
//! half the spatial and range sigmas, the homogeneous grid is blurred with a
//! separable Gaussian, and the result is sliced back out trilinearly. The
//! blur width is reduced so that blur + splat + slice has the variance of the
//! requested kernel (each tent interpolation adds 1/6 cell^2).

use super::params::BilateralParams;
use crate::error::Result;
use crate::image::Plane;

/// Grid cells per sigma on every axis.
const CELLS_PER_SIGMA: f64 = 2.0;

struct Grid {
    nx: usize,
    nz: usize,
    /// (weighted value, weight), z fastest.
    cells: Vec<[f64; 2]>,
}

impl Grid {
    #[inline]
    fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iy * self.nx + ix) * self.nz + iz
    }
}

#[inline]
fn split(coord: f64, n: usize) -> (usize, f64) {
    let i = (coord.floor() as usize).min(n - 2);
    (i, coord - i as f64)
}

fn gaussian_kernel(std: f64, radius: usize) -> Vec<f64> {
    let inv = -0.5 / (std * std);
    let r = radius as isize;
    (-r..=r).map(|d| ((d * d) as f64 * inv).exp()).collect()
}

/// Convolves every line along one axis; cells outside the grid are empty.
fn blur_axis(grid: &mut Grid, len: usize, stride: usize, kernel: &[f64]) {
    let r = (kernel.len() / 2) as isize;
    let total = grid.cells.len();
    let mut line = vec![[0.0; 2]; len];
    for base in 0..total {
        // a line starts wherever the coordinate along this axis is zero
        if !(base / stride).is_multiple_of(len) {
            continue;
        }
        for (i, slot) in line.iter_mut().enumerate() {
            *slot = grid.cells[base + i * stride];
        }
        for i in 0..len as isize {
            let mut acc = [0.0; 2];
            let lo = (i - r).max(0);
            let hi = (i + r).min(len as isize - 1);
            for j in lo..=hi {
                let k = kernel[(j - i + r) as usize];
                let c = line[j as usize];
                acc[0] += k * c[0];
                acc[1] += k * c[1];
            }
            grid.cells[base + i as usize * stride] = acc;
        }
    }
}

/// Fast approximate bilateral filter. Intensities are clamped into
/// `[edge_min - 2 sigma_range, edge_max + 2 sigma_range]` on the grid's
/// range axis; boundaries replicate edge pixels like [`bilateral_direct`].
///
/// [`bilateral_direct`]: super::bilateral_direct
pub fn bilateral_fast(src: &Plane, p: &BilateralParams) -> Result<Plane> {
    p.validate()?;
    if src.is_constant() {
        return Ok(src.clone());
    }
    let (w, h) = src.dims();
    let data = src.data();

    let s_step = p.sigma_spatial / CELLS_PER_SIGMA;
    let r_step = p.sigma_range / CELLS_PER_SIGMA;
    let pad = p.radius() as isize;
    let lo = p.edge_min - 2.0 * p.sigma_range;
    let hi = p.edge_max + 2.0 * p.sigma_range;

    let nx = ((w as isize - 1 + 2 * pad) as f64 / s_step).floor() as usize + 2;
    let ny = ((h as isize - 1 + 2 * pad) as f64 / s_step).floor() as usize + 2;
    let nz = ((hi - lo) / r_step).floor() as usize + 2;
    let mut grid = Grid {
        nx,
        nz,
        cells: vec![[0.0; 2]; nx * ny * nz],
    };
    let z_of = |v: f64| (v.clamp(lo, hi) - lo) / r_step;

    // Splat, including the replicated border that the direct filter's window reaches.
    let x_cells: Vec<(usize, f64)> = (-pad..w as isize + pad)
        .map(|x| split((x + pad) as f64 / s_step, nx))
        .collect();
    for y in -pad..h as isize + pad {
        let (iy, fy) = split((y + pad) as f64 / s_step, ny);
        let row = &data[y.clamp(0, h as isize - 1) as usize * w..][..w];
        for x in -pad..w as isize + pad {
            let v = row[x.clamp(0, w as isize - 1) as usize];
            let (ix, fx) = x_cells[(x + pad) as usize];
            let (iz, fz) = split(z_of(v), nz);
            for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
                    let base = grid.idx(ix + dx, iy + dy, iz);
                    let wxy = wy * wx;
                    let c0 = &mut grid.cells[base];
                    c0[0] += wxy * (1.0 - fz) * v;
                    c0[1] += wxy * (1.0 - fz);
                    let c1 = &mut grid.cells[base + 1];
                    c1[0] += wxy * fz * v;
                    c1[1] += wxy * fz;
                }
            }
        }
    }

    let std = (CELLS_PER_SIGMA * CELLS_PER_SIGMA - 1.0 / 3.0).sqrt();
    let spatial = gaussian_kernel(std, (3.0 * CELLS_PER_SIGMA).ceil() as usize);
    let range = gaussian_kernel(std, nz);
    blur_axis(&mut grid, nx, nz, &spatial);
    blur_axis(&mut grid, ny, nx * nz, &spatial);
    blur_axis(&mut grid, nz, 1, &range);

    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let (iy, fy) = split((y as isize + pad) as f64 / s_step, ny);
        for x in 0..w {
            let v = data[y * w + x];
            let (ix, fx) = x_cells[(x as isize + pad) as usize];
            let (iz, fz) = split(z_of(v), nz);
            let mut acc = [0.0; 2];
            for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
                    let base = grid.idx(ix + dx, iy + dy, iz);
                    for (dz, wz) in [(0, 1.0 - fz), (1, fz)] {
                        let c = grid.cells[base + dz];
                        let k = wy * wx * wz;
                        acc[0] += k * c[0];
                        acc[1] += k * c[1];
                    }
                }
            }
            out.push(if acc[1] > 0.0 { acc[0] / acc[1] } else { v });
        }
    }
    Ok(Plane::from_clamped(w, h, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::bilateral_direct;

    #[test]
    fn constant_is_fixed_point() {
        for c in [0.0, 0.15, 0.5, 1.0] {
            let src = Plane::filled(37, 23, c);
            let out = bilateral_fast(&src, &BilateralParams::default()).unwrap();
            assert!(out.data().iter().all(|v| (v - c).abs() < 1e-4), "c = {c}");
        }
    }

    #[test]
    fn close_to_direct_on_small_sigmas() {
        let src = Plane::from_fn(48, 40, |x, y| {
            let base = if (x / 12 + y / 10) % 2 == 0 { 0.3 } else { 0.7 };
            base + 0.05 * ((x * 31 + y * 17) % 7) as f64 / 7.0
        });
        let p = BilateralParams { sigma_spatial: 6.0, sigma_range: 0.1, ..Default::default() };
        let a = bilateral_fast(&src, &p).unwrap();
        let b = bilateral_direct(&src, &p).unwrap();
        let max = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(max <= 0.01, "max deviation {max}");
    }

    #[test]
    fn single_pixel() {
        let src = Plane::filled(1, 1, 0.8);
        let out = bilateral_fast(&src, &BilateralParams::default()).unwrap();
        assert!((out.get(0, 0) - 0.8).abs() < 1e-9);
    }
}
