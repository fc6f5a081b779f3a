//! Deterministic synthetic RGB/NIR scenes for tests, fixtures and demos.
//!
//! A scene is a set of textured patches over a sky-to-ground gradient. Each
//! patch gets a material: vegetation reflects strongly in NIR and carries
//! more texture there, water is dark in NIR, the rest are neutral. Distance
//! haze washes out the RGB toward the top of the frame while the NIR keeps
//! most of its contrast, and the RGB gets a little sensor noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{ColorImage, Plane};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneParams {
    pub patches: usize,
    /// Haze strength at the top row of the RGB image, `[0, 1]`.
    pub haze: f64,
    /// Half-width of the uniform RGB noise.
    pub noise: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self { patches: 24, haze: 0.55, noise: 0.01 }
    }
}

#[derive(Clone, Copy)]
struct Patch {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    ellipse: bool,
    /// r, g, b, nir reflectance
    color: [f64; 4],
    freq: f64,
    angle: f64,
    vis_texture: f64,
    nir_texture: f64,
}

fn material(rng: &mut ChaCha8Rng) -> ([f64; 4], f64, f64) {
    let j = |rng: &mut ChaCha8Rng, v: f64| (v + rng.random_range(-0.08..0.08)).clamp(0.02, 0.98);
    match rng.random_range(0..3) {
        // vegetation: dark-green visible, bright and busy in NIR
        0 => ([j(rng, 0.15), j(rng, 0.35), j(rng, 0.12), j(rng, 0.75)], 0.06, 0.18),
        // water
        1 => ([j(rng, 0.10), j(rng, 0.25), j(rng, 0.40), j(rng, 0.08)], 0.03, 0.02),
        // stone, buildings, soil
        _ => {
            let g = rng.random_range(0.3..0.8);
            ([j(rng, g), j(rng, g * 0.95), j(rng, g * 0.9), j(rng, g)], 0.10, 0.10)
        }
    }
}

/// Aligned `(rgb, nir)` pair of the given size; identical seeds give
/// identical images on every platform.
pub fn scene(width: usize, height: usize, seed: u64) -> (ColorImage, Plane) {
    scene_with(width, height, seed, &SceneParams::default())
}

pub fn scene_with(width: usize, height: usize, seed: u64, p: &SceneParams) -> (ColorImage, Plane) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let scale = w.min(h);
    let patches: Vec<Patch> = (0..p.patches)
        .map(|_| {
            let (color, vis_texture, nir_texture) = material(&mut rng);
            Patch {
                cx: rng.random_range(0.0..w),
                cy: rng.random_range(0.0..h),
                rx: rng.random_range(0.05..0.3) * scale,
                ry: rng.random_range(0.05..0.3) * scale,
                ellipse: rng.random_bool(0.5),
                color,
                freq: rng.random_range(0.15..0.9),
                angle: rng.random_range(0.0..std::f64::consts::PI),
                vis_texture,
                nir_texture,
            }
        })
        .collect();
    let airlight = [0.85, 0.88, 0.92];

    let mut planes: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(width * height));
    for y in 0..height {
        for x in 0..width {
            let (fx, fy) = (x as f64, y as f64);
            let t = fy / h;
            // sky-to-ground background
            let mut px = [
                0.55 - 0.25 * t,
                0.65 - 0.25 * t,
                0.80 - 0.35 * t,
                0.45 - 0.10 * t,
            ];
            for pt in &patches {
                let (dx, dy) = ((fx - pt.cx) / pt.rx, (fy - pt.cy) / pt.ry);
                let inside = if pt.ellipse {
                    dx * dx + dy * dy <= 1.0
                } else {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                };
                if !inside {
                    continue;
                }
                let u = fx * pt.angle.cos() + fy * pt.angle.sin();
                let v = -fx * pt.angle.sin() + fy * pt.angle.cos();
                let tex = (u * pt.freq).sin() * (v * pt.freq * 0.7).cos();
                for (v, c) in px.iter_mut().zip(&pt.color).take(3) {
                    *v = c + pt.vis_texture * tex;
                }
                px[3] = pt.color[3] + pt.nir_texture * tex;
            }
            let haze = p.haze * (1.0 - t).powi(2);
            for c in 0..3 {
                let noise = rng.random_range(-1.0..=1.0) * p.noise;
                planes[c].push((1.0 - haze) * px[c] + haze * airlight[c] + noise);
            }
            planes[3].push((1.0 - 0.25 * haze) * px[3] + 0.25 * haze * 0.6);
        }
    }
    let [r, g, b, n] = planes;
    let rgb = ColorImage::new(
        Plane::from_clamped(width, height, r),
        Plane::from_clamped(width, height, g),
        Plane::from_clamped(width, height, b),
    )
    .expect("planes share dimensions");
    (rgb, Plane::from_clamped(width, height, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let (a, na) = scene(40, 30, 7);
        let (b, nb) = scene(40, 30, 7);
        assert_eq!(a, b);
        assert_eq!(na, nb);
        assert_eq!(a.dims(), (40, 30));
        let (c, _) = scene(40, 30, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn nir_differs_from_luminance() {
        let (rgb, nir) = scene(64, 48, 3);
        let luma = crate::image::luminance(&rgb);
        let diff: f64 = luma.data().iter().zip(nir.data()).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff / (64.0 * 48.0) > 0.02);
    }
}
