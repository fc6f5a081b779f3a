use crate::error::{Error, Result};

/// Single-channel intensity image, row-major, every sample finite and in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Wraps `data`, rejecting wrong lengths and samples outside `[0, 1]`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, data.len())?;
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::InvalidValue(format!(
                "sample {i} = {v} is outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Wraps `data` after clamping every sample into `[0, 1]`; NaN becomes 0.
    ///
    /// Panics if `data.len() != width * height`.
    pub fn from_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane buffer length");
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_clamped(width, height, vec![value; width * height])
    }

    /// Builds a plane from a per-pixel function; results are clamped into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_clamped(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with clamp-to-edge addressing.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn is_constant(&self) -> bool {
        self.data.windows(2).all(|p| p[0] == p[1])
    }

    pub fn same_dims<T: Dims>(&self, other: &T) -> Result<()> {
        same_dims(self.dims(), other.dims())
    }
}

/// Signed single-channel grid. Holds detail layers and chroma offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl SignedPlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, data.len())?;
        if let Some((i, v)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("sample {i} = {v} is not finite")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Per-pixel `a - b`.
    pub fn difference(a: &Plane, b: &Plane) -> Result<Self> {
        a.same_dims(b)?;
        let data = a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect();
        Ok(Self {
            width: a.width(),
            height: a.height(),
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean_abs(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|v| v.abs()).sum::<f64>() / self.data.len() as f64
    }

    pub fn same_dims<T: Dims>(&self, other: &T) -> Result<()> {
        same_dims(self.dims(), other.dims())
    }
}

/// Anything with a width and a height.
pub trait Dims {
    fn dims(&self) -> (usize, usize);
}

impl Dims for Plane {
    fn dims(&self) -> (usize, usize) {
        Plane::dims(self)
    }
}

impl Dims for SignedPlane {
    fn dims(&self) -> (usize, usize) {
        SignedPlane::dims(self)
    }
}

pub(crate) fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::shape(a, b))
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidValue(format!(
            "buffer of {len} samples does not match {width}x{height}"
        )));
    }
    Ok(())
}
