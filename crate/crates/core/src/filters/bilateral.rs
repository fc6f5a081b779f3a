//! Brute-force bilateral filter with clamp-to-edge boundaries.
//!
//! Cost is `O(W * H * min(W, 2r+1) * min(H, 2r+1))`, so this is meant for small
//! images and as the reference the grid approximation is checked against.

use super::params::BilateralParams;
use crate::error::Result;
use crate::image::Plane;

/// For each output coordinate, the source coordinates reached through the
/// clamped window and their summed 1-D spatial weights. Replicated border
/// samples fold onto the edge pixel, so each source appears once.
fn folded_weights(len: usize, radius: usize, sigma: f64) -> Vec<Vec<(usize, f64)>> {
    let inv = -0.5 / (sigma * sigma);
    let r = radius as isize;
    let last = len as isize - 1;
    (0..len as isize)
        .map(|c| {
            let lo = (c - r).clamp(0, last);
            let hi = (c + r).clamp(0, last);
            let mut w = vec![0.0; (hi - lo + 1) as usize];
            for d in -r..=r {
                let s = (c + d).clamp(0, last);
                w[(s - lo) as usize] += ((d * d) as f64 * inv).exp();
            }
            w.into_iter()
                .enumerate()
                .map(|(i, v)| (lo as usize + i, v))
                .collect()
        })
        .collect()
}

/// Space- and range-Gaussian weighted mean over a `(2r+1)^2` window,
/// `r = ceil(3 * sigma_spatial)`.
pub fn bilateral_direct(src: &Plane, p: &BilateralParams) -> Result<Plane> {
    p.validate()?;
    if src.is_constant() {
        return Ok(src.clone());
    }
    let (w, h) = src.dims();
    let radius = p.radius();
    let wx = folded_weights(w, radius, p.sigma_spatial);
    let wy = folded_weights(h, radius, p.sigma_spatial);
    let range_inv = -0.5 / (p.sigma_range * p.sigma_range);
    let data = src.data();

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let center = data[y * w + x];
            let mut num = 0.0;
            let mut den = 0.0;
            for &(sy, gy) in &wy[y] {
                let row = &data[sy * w..(sy + 1) * w];
                for &(sx, gx) in &wx[x] {
                    let v = row[sx];
                    let d = v - center;
                    let k = gy * gx * (d * d * range_inv).exp();
                    num += k * v;
                    den += k;
                }
            }
            out[y * w + x] = num / den;
        }
    }
    Ok(Plane::from_clamped(w, h, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal window loop, fetching every offset through clamped addressing.
    fn naive(src: &Plane, p: &BilateralParams) -> Plane {
        let r = p.radius() as isize;
        Plane::from_fn(src.width(), src.height(), |x, y| {
            let c = src.get(x, y);
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = src.get_clamped(x as isize + dx, y as isize + dy);
                    let k = (-((dx * dx + dy * dy) as f64) / (2.0 * p.sigma_spatial.powi(2))
                        - (v - c).powi(2) / (2.0 * p.sigma_range.powi(2)))
                    .exp();
                    num += k * v;
                    den += k;
                }
            }
            num / den
        })
    }

    fn textured(w: usize, h: usize) -> Plane {
        Plane::from_fn(w, h, |x, y| {
            0.5 + 0.3 * ((x as f64 * 0.9).sin() * (y as f64 * 0.45).cos())
                + if x > w / 2 { 0.15 } else { -0.15 }
        })
    }

    #[test]
    fn matches_literal_window_loop() {
        let src = textured(13, 9);
        for p in [
            BilateralParams { sigma_spatial: 1.5, sigma_range: 0.1, ..Default::default() },
            BilateralParams { sigma_spatial: 4.0, sigma_range: 0.3, ..Default::default() },
        ] {
            let a = bilateral_direct(&src, &p).unwrap();
            let b = naive(&src, &p);
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_is_fixed_point() {
        let src = Plane::filled(10, 7, 0.37);
        let out = bilateral_direct(&src, &BilateralParams::default()).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn output_within_input_range() {
        let src = textured(16, 12);
        let (lo, hi) = src.min_max();
        let p = BilateralParams { sigma_spatial: 3.0, ..Default::default() };
        let out = bilateral_direct(&src, &p).unwrap();
        assert!(out.data().iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }

    #[test]
    fn huge_range_sigma_is_gaussian_blur() {
        let src = textured(12, 10);
        let p = BilateralParams { sigma_spatial: 2.0, sigma_range: 1000.0, ..Default::default() };
        let out = bilateral_direct(&src, &p).unwrap();
        // separable Gaussian with clamp-to-edge, computed independently
        let r = p.radius() as isize;
        let g: Vec<f64> = (-r..=r).map(|d| (-(d * d) as f64 / 8.0).exp()).collect();
        let norm: f64 = g.iter().sum();
        let horiz = Plane::from_fn(12, 10, |x, y| {
            (-r..=r).map(|d| g[(d + r) as usize] * src.get_clamped(x as isize + d, y as isize)).sum::<f64>() / norm
        });
        let blur = Plane::from_fn(12, 10, |x, y| {
            (-r..=r).map(|d| g[(d + r) as usize] * horiz.get_clamped(x as isize, y as isize + d)).sum::<f64>() / norm
        });
        for (a, b) in out.data().iter().zip(blur.data()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn step_edge_is_preserved() {
        // 1-D step 0 -> 1 at x = 20 on a 40 px row
        let src = Plane::from_fn(40, 1, |x, _| if x >= 20 { 1.0 } else { 0.0 });
        let p = BilateralParams { sigma_spatial: 5.0, sigma_range: 0.1, ..Default::default() };
        let out = bilateral_direct(&src, &p).unwrap();
        let crossing = (0..39).find(|&x| out.get(x, 0) < 0.5 && out.get(x + 1, 0) >= 0.5).unwrap();
        // midpoint of the source edge sits between 19 and 20
        assert_eq!(crossing, 19);
        assert!(out.get(19, 0) < 1e-6 && out.get(20, 0) > 1.0 - 1e-6);
    }
}
