//! Dense SIFT: 4x4 spatial x 8 orientation gradient histograms on a regular grid.
//!
//! Each descriptor covers a flat (un-weighted) window of `4 * bin_size` pixels
//! per side. Gradients are central differences with clamp-to-edge borders;
//! magnitudes are distributed bilinearly over spatial bins and linearly over
//! the two nearest orientation bins. Descriptors are L2-normalised, clamped
//! at 0.2 and renormalised; windows without any gradient stay all-zero.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Plane;

pub const SPATIAL_BINS: usize = 4;
pub const ORIENTATION_BINS: usize = 8;
pub const DESCRIPTOR_LEN: usize = SPATIAL_BINS * SPATIAL_BINS * ORIENTATION_BINS;
pub const CLAMP: f64 = 0.2;

pub type Descriptor = [f32; DESCRIPTOR_LEN];

/// Layout: `index = (by * 4 + bx) * 8 + orientation`.
#[inline]
pub fn component(bx: usize, by: usize, o: usize) -> usize {
    (by * SPATIAL_BINS + bx) * ORIENTATION_BINS + o
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorSet {
    pub descriptors: Vec<Descriptor>,
    /// Window centre of each descriptor in pixel coordinates.
    pub centers: Vec<(f64, f64)>,
    pub bin_size: usize,
    pub step: usize,
}

impl DescriptorSet {
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}

/// Number of grid points along each axis for a `w x h` image.
pub fn grid_dims(w: usize, h: usize, bin_size: usize, step: usize) -> (usize, usize) {
    let span = SPATIAL_BINS * bin_size;
    let n = |len: usize| if len < span { 0 } else { (len - span) / step + 1 };
    (n(w), n(h))
}

/// Top-left corner offset that centres the grid in the leftover margin.
fn grid_offset(len: usize, bin_size: usize, step: usize) -> usize {
    ((len - SPATIAL_BINS * bin_size) % step) / 2
}

pub fn dense_sift(luma: &Plane, bin_size: usize, step: usize) -> Result<DescriptorSet> {
    dense_sift_masked(luma, bin_size, step, None)
}

/// Like [`dense_sift`], dropping every grid point whose support (window plus
/// the one-pixel gradient stencil) touches a pixel with `valid[i] == false`.
pub fn dense_sift_masked(
    luma: &Plane,
    bin_size: usize,
    step: usize,
    valid: Option<&[bool]>,
) -> Result<DescriptorSet> {
    if bin_size == 0 || step == 0 {
        return Err(Error::InvalidParameter("bin_size and step must be positive".into()));
    }
    let (w, h) = luma.dims();
    let span = SPATIAL_BINS * bin_size;
    if w < span || h < span {
        return Err(Error::TooSmall { width: w, height: h, min_width: span, min_height: span });
    }
    if let Some(v) = valid {
        if v.len() != w * h {
            return Err(Error::InvalidParameter(format!(
                "mask has {} entries for a {w}x{h} image",
                v.len()
            )));
        }
    }

    let gradients = Gradients::new(luma);
    let (nx, ny) = grid_dims(w, h, bin_size, step);
    let (ox, oy) = (grid_offset(w, bin_size, step), grid_offset(h, bin_size, step));
    let taps = spatial_taps(bin_size);
    let invalid_prefix = valid.map(|v| InvalidCounts::new(v, w, h));

    let rows: Vec<Vec<(Descriptor, (f64, f64))>> = (0..ny)
        .into_par_iter()
        .map(|gy| {
            let y0 = oy + gy * step;
            (0..nx)
                .filter_map(|gx| {
                    let x0 = ox + gx * step;
                    if let Some(inv) = &invalid_prefix {
                        // gradient stencil reaches one pixel beyond the window
                        if inv.any(x0 as isize - 1, y0 as isize - 1, x0 + span + 1, y0 + span + 1) {
                            return None;
                        }
                    }
                    let d = describe(&gradients, x0, y0, span, &taps);
                    let c = span as f64 / 2.0 - 0.5;
                    Some((d, (x0 as f64 + c, y0 as f64 + c)))
                })
                .collect()
        })
        .collect();

    let mut descriptors = Vec::with_capacity(nx * ny);
    let mut centers = Vec::with_capacity(nx * ny);
    for (d, c) in rows.into_iter().flatten() {
        descriptors.push(d);
        centers.push(c);
    }
    Ok(DescriptorSet { descriptors, centers, bin_size, step })
}

/// Gradient magnitude with its two orientation bins and the share of the lower one.
struct Gradients {
    width: usize,
    cells: Vec<(f64, u8, f64)>,
}

impl Gradients {
    fn new(p: &Plane) -> Self {
        let (w, h) = p.dims();
        let mut cells = Vec::with_capacity(w * h);
        let two_pi = std::f64::consts::TAU;
        for y in 0..h as isize {
            for x in 0..w as isize {
                let gx = 0.5 * (p.get_clamped(x + 1, y) - p.get_clamped(x - 1, y));
                let gy = 0.5 * (p.get_clamped(x, y + 1) - p.get_clamped(x, y - 1));
                let mag = (gx * gx + gy * gy).sqrt();
                if mag == 0.0 {
                    cells.push((0.0, 0, 0.0));
                    continue;
                }
                let mut theta = gy.atan2(gx);
                if theta < 0.0 {
                    theta += two_pi;
                }
                let t = theta * ORIENTATION_BINS as f64 / two_pi;
                let o = t.floor();
                let frac = t - o;
                let o = (o as usize) % ORIENTATION_BINS;
                cells.push((mag, o as u8, frac));
            }
        }
        Self { width: w, cells }
    }
}

/// For each window offset: (lower spatial bin, its weight, upper bin weight).
/// Out-of-window bins get zero weight.
fn spatial_taps(bin_size: usize) -> Vec<[(usize, f64); 2]> {
    (0..SPATIAL_BINS * bin_size)
        .map(|u| {
            let b = (u as f64 + 0.5) / bin_size as f64 - 0.5;
            let lo = b.floor();
            let f = b - lo;
            let lo = lo as isize;
            let mut taps = [(0, 0.0); 2];
            for (k, (bin, wgt)) in [(lo, 1.0 - f), (lo + 1, f)].into_iter().enumerate() {
                if (0..SPATIAL_BINS as isize).contains(&bin) {
                    taps[k] = (bin as usize, wgt);
                }
            }
            taps
        })
        .collect()
}

fn describe(g: &Gradients, x0: usize, y0: usize, span: usize, taps: &[[(usize, f64); 2]]) -> Descriptor {
    let mut hist = [0.0f64; DESCRIPTOR_LEN];
    for v in 0..span {
        let row = (y0 + v) * g.width + x0;
        let ty = taps[v];
        for (u, tx) in taps.iter().enumerate() {
            let (mag, o, frac) = g.cells[row + u];
            if mag == 0.0 {
                continue;
            }
            let o = o as usize;
            let o1 = (o + 1) % ORIENTATION_BINS;
            for &(by, wy) in &ty {
                for &(bx, wx) in tx {
                    let wgt = mag * wy * wx;
                    if wgt == 0.0 {
                        continue;
                    }
                    let base = component(bx, by, 0);
                    hist[base + o] += wgt * (1.0 - frac);
                    hist[base + o1] += wgt * frac;
                }
            }
        }
    }
    normalize(&mut hist);
    let mut out = [0.0f32; DESCRIPTOR_LEN];
    for (o, h) in out.iter_mut().zip(hist) {
        *o = h as f32;
    }
    out
}

/// Unit-normalise, clamp at [`CLAMP`], renormalise. Zero vectors stay zero.
pub fn normalize(hist: &mut [f64; DESCRIPTOR_LEN]) {
    let norm = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for v in hist.iter_mut() {
        *v = (*v / norm).min(CLAMP);
    }
    let norm = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in hist.iter_mut() {
        *v /= norm;
    }
}

/// 2-D prefix sums of invalid pixels for O(1) rectangle queries.
struct InvalidCounts {
    w: usize,
    h: usize,
    sums: Vec<u32>,
}

impl InvalidCounts {
    fn new(valid: &[bool], w: usize, h: usize) -> Self {
        let mut sums = vec![0u32; (w + 1) * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                let bad = u32::from(!valid[y * w + x]);
                sums[(y + 1) * (w + 1) + x + 1] =
                    bad + sums[y * (w + 1) + x + 1] + sums[(y + 1) * (w + 1) + x] - sums[y * (w + 1) + x];
            }
        }
        Self { w, h, sums }
    }

    /// Any invalid pixel in `[x0, x1) x [y0, y1)`, clipped to the image.
    fn any(&self, x0: isize, y0: isize, x1: usize, y1: usize) -> bool {
        let x0 = x0.max(0) as usize;
        let y0 = y0.max(0) as usize;
        let x1 = x1.min(self.w);
        let y1 = y1.min(self.h);
        let s = |x: usize, y: usize| self.sums[y * (self.w + 1) + x];
        s(x1, y1) + s(x0, y0) > s(x0, y1) + s(x1, y0)
    }
}
