//! Synthetic geometric transforms used to probe feature stability.
//!
//! Rotations are clockwise as displayed (y axis pointing down): a pixel at
//! `(x, y)` lands at `(height - 1 - y, x)` under a quarter turn.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ColorImage, Plane};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transform {
    #[serde(rename = "ROT45")]
    Rot45,
    #[serde(rename = "ROT90")]
    Rot90,
    #[serde(rename = "ROT180")]
    Rot180,
    #[serde(rename = "SCALE_050")]
    Scale050,
    #[serde(rename = "SCALE_075")]
    Scale075,
}

impl Transform {
    pub const ALL: [Transform; 5] = [
        Transform::Rot45,
        Transform::Rot90,
        Transform::Rot180,
        Transform::Scale050,
        Transform::Scale075,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Transform::Rot45 => "ROT45",
            Transform::Rot90 => "ROT90",
            Transform::Rot180 => "ROT180",
            Transform::Scale050 => "SCALE_050",
            Transform::Scale075 => "SCALE_075",
        }
    }

    /// Output dimensions for an input of `w x h`.
    pub fn output_dims(self, w: usize, h: usize) -> (usize, usize) {
        match self {
            Transform::Rot90 => (h, w),
            Transform::Rot180 => (w, h),
            Transform::Rot45 => {
                let c = std::f64::consts::FRAC_1_SQRT_2;
                let side = (w as f64 * c + h as f64 * c).ceil() as usize;
                (side, side)
            }
            Transform::Scale050 => scaled(w, h, 0.5),
            Transform::Scale075 => scaled(w, h, 0.75),
        }
    }
}

fn scaled(w: usize, h: usize, f: f64) -> (usize, usize) {
    (
        ((w as f64 * f).round() as usize).max(1),
        ((h as f64 * f).round() as usize).max(1),
    )
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase();
        Transform::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown transform {s:?} (expected one of ROT45, ROT90, ROT180, SCALE_050, SCALE_075)"
                ))
            })
    }
}

/// Transformed image plus, for transforms that introduce fill, a per-pixel
/// validity mask (`true` where the pixel was sampled from the source).
#[derive(Clone, Debug)]
pub struct Transformed {
    pub image: ColorImage,
    pub valid: Option<Vec<bool>>,
}

pub fn apply_transform(img: &ColorImage, t: Transform) -> ColorImage {
    apply_transform_masked(img, t).image
}

pub fn apply_transform_masked(img: &ColorImage, t: Transform) -> Transformed {
    let [r, g, b] = img.planes();
    let (r, valid) = transform_plane(r, t);
    let (g, _) = transform_plane(g, t);
    let (b, _) = transform_plane(b, t);
    Transformed {
        image: ColorImage::new(r, g, b).expect("planes transformed identically"),
        valid,
    }
}

/// Transforms one plane; returns a validity mask for `Rot45`.
pub fn transform_plane(p: &Plane, t: Transform) -> (Plane, Option<Vec<bool>>) {
    let (w, h) = p.dims();
    let (ow, oh) = t.output_dims(w, h);
    match t {
        Transform::Rot90 => (Plane::from_fn(ow, oh, |x, y| p.get(y, h - 1 - x)), None),
        Transform::Rot180 => (Plane::from_fn(ow, oh, |x, y| p.get(w - 1 - x, h - 1 - y)), None),
        Transform::Scale050 | Transform::Scale075 => {
            let (sx, sy) = (w as f64 / ow as f64, h as f64 / oh as f64);
            let out = Plane::from_fn(ow, oh, |x, y| {
                let u = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
                let v = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
                bilinear(p, u, v)
            });
            (out, None)
        }
        Transform::Rot45 => {
            let c = std::f64::consts::FRAC_1_SQRT_2;
            let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
            let (ocx, ocy) = ((ow as f64 - 1.0) / 2.0, (oh as f64 - 1.0) / 2.0);
            let mut mask = vec![false; ow * oh];
            let out = Plane::from_fn(ow, oh, |x, y| {
                let (dx, dy) = (x as f64 - ocx, y as f64 - ocy);
                // inverse of the clockwise rotation
                let u = cx + c * dx + c * dy;
                let v = cy - c * dx + c * dy;
                const EPS: f64 = 1e-9;
                if u < -EPS || v < -EPS || u > (w - 1) as f64 + EPS || v > (h - 1) as f64 + EPS {
                    return 0.0;
                }
                mask[y * ow + x] = true;
                bilinear(p, u.clamp(0.0, (w - 1) as f64), v.clamp(0.0, (h - 1) as f64))
            });
            (out, Some(mask))
        }
    }
}

#[inline]
fn bilinear(p: &Plane, u: f64, v: f64) -> f64 {
    let (w, h) = p.dims();
    let x0 = (u.floor() as usize).min(w - 1);
    let y0 = (v.floor() as usize).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let (fx, fy) = (u - x0 as f64, v - y0 as f64);
    let top = p.get(x0, y0) * (1.0 - fx) + p.get(x1, y0) * fx;
    let bottom = p.get(x0, y1) * (1.0 - fx) + p.get(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}
