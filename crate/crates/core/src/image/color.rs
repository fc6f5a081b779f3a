//! RGB images and full-range BT.601 YCbCr.

use super::plane::{clamp_unit, same_dims, Plane, SignedPlane};
use crate::error::Result;

pub const KR: f64 = 0.299;
pub const KB: f64 = 0.114;
pub const KG: f64 = 1.0 - KR - KB;

/// Three equally-sized planes holding R, G and B.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorImage {
    r: Plane,
    g: Plane,
    b: Plane,
}

impl ColorImage {
    pub fn new(r: Plane, g: Plane, b: Plane) -> Result<Self> {
        r.same_dims(&g)?;
        r.same_dims(&b)?;
        Ok(Self { r, g, b })
    }

    pub fn from_gray(p: &Plane) -> Self {
        Self {
            r: p.clone(),
            g: p.clone(),
            b: p.clone(),
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        Self {
            r: Plane::filled(width, height, rgb[0]),
            g: Plane::filled(width, height, rgb[1]),
            b: Plane::filled(width, height, rgb[2]),
        }
    }

    pub fn r(&self) -> &Plane {
        &self.r
    }

    pub fn g(&self) -> &Plane {
        &self.g
    }

    pub fn b(&self) -> &Plane {
        &self.b
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub fn into_planes(self) -> [Plane; 3] {
        [self.r, self.g, self.b]
    }

    pub fn width(&self) -> usize {
        self.r.width()
    }

    pub fn height(&self) -> usize {
        self.r.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.r.dims()
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        [self.r.get(x, y), self.g.get(x, y), self.b.get(x, y)]
    }

    /// Applies `f` to each channel independently.
    pub fn map_planes<E>(&self, mut f: impl FnMut(&Plane) -> Result<Plane, E>) -> Result<Self, E> {
        Ok(Self {
            r: f(&self.r)?,
            g: f(&self.g)?,
            b: f(&self.b)?,
        })
    }
}

/// Luminance plane plus signed chroma offsets in `[-0.5, 0.5]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LumaChroma {
    pub y: Plane,
    pub cb: SignedPlane,
    pub cr: SignedPlane,
}

impl LumaChroma {
    pub fn new(y: Plane, cb: SignedPlane, cr: SignedPlane) -> Result<Self> {
        same_dims(y.dims(), cb.dims())?;
        same_dims(y.dims(), cr.dims())?;
        Ok(Self { y, cb, cr })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.y.dims()
    }
}

/// Full-range BT.601 forward transform of one pixel.
#[inline]
pub fn rgb_to_ycbcr_pixel(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = KR * r + KG * g + KB * b;
    let cb = (b - y) / (2.0 * (1.0 - KB));
    let cr = (r - y) / (2.0 * (1.0 - KR));
    (y, cb, cr)
}

/// Exact algebraic inverse of [`rgb_to_ycbcr_pixel`] (no clamping).
#[inline]
pub fn ycbcr_to_rgb_pixel(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    let r = y + 2.0 * (1.0 - KR) * cr;
    let b = y + 2.0 * (1.0 - KB) * cb;
    let g = (y - KR * r - KB * b) / KG;
    (r, g, b)
}

pub fn rgb_to_ycbcr(img: &ColorImage) -> LumaChroma {
    let (w, h) = img.dims();
    let n = w * h;
    let (mut y, mut cb, mut cr) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (yy, bb, rr) = rgb_to_ycbcr_pixel(img.r.data()[i], img.g.data()[i], img.b.data()[i]);
        y.push(yy);
        cb.push(bb.clamp(-0.5, 0.5));
        cr.push(rr.clamp(-0.5, 0.5));
    }
    LumaChroma {
        y: Plane::from_clamped(w, h, y),
        cb: SignedPlane::from_fn(w, h, |x, yy| cb[yy * w + x]),
        cr: SignedPlane::from_fn(w, h, |x, yy| cr[yy * w + x]),
    }
}

/// Inverse conversion; RGB results are clamped into `[0, 1]`.
pub fn ycbcr_to_rgb(lc: &LumaChroma) -> ColorImage {
    ycbcr_to_rgb_counting(lc).0
}

/// Like [`ycbcr_to_rgb`], also returning how many channel samples needed clamping.
pub fn ycbcr_to_rgb_counting(lc: &LumaChroma) -> (ColorImage, usize) {
    let (w, h) = lc.dims();
    let n = w * h;
    let (mut r, mut g, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut clamped = 0;
    for i in 0..n {
        let (rr, gg, bb) = ycbcr_to_rgb_pixel(lc.y.data()[i], lc.cb.data()[i], lc.cr.data()[i]);
        for (v, out) in [(rr, &mut r), (gg, &mut g), (bb, &mut b)] {
            if !(0.0..=1.0).contains(&v) {
                clamped += 1;
            }
            out.push(v);
        }
    }
    let img = ColorImage {
        r: Plane::from_clamped(w, h, r),
        g: Plane::from_clamped(w, h, g),
        b: Plane::from_clamped(w, h, b),
    };
    (img, clamped)
}

/// BT.601 luminance of an RGB image.
pub fn luminance(img: &ColorImage) -> Plane {
    let (w, h) = img.dims();
    let data = (0..w * h)
        .map(|i| clamp_unit(KR * img.r.data()[i] + KG * img.g.data()[i] + KB * img.b.data()[i]))
        .collect();
    Plane::from_clamped(w, h, data)
}
