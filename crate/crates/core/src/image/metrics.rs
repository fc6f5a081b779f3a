//! Full-reference quality metrics on `[0, 1]` RGB images, peak 1.0.

use super::color::ColorImage;
use crate::error::{Error, Result};

/// Mean squared error over all pixels of all three channels.
pub fn mse(a: &ColorImage, b: &ColorImage) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::shape(a.dims(), b.dims()));
    }
    let n = 3 * a.width() * a.height();
    if n == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (p, q) in a.planes().iter().zip(b.planes()) {
        for (x, y) in p.data().iter().zip(q.data()) {
            let d = x - y;
            sum += d * d;
        }
    }
    Ok(sum / n as f64)
}

/// PSNR in dB with peak 1.0. Identical images give `f64::INFINITY`.
pub fn psnr(a: &ColorImage, b: &ColorImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

#[inline]
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Plane;
    use proptest::prelude::*;

    #[test]
    fn identical_images() {
        let a = ColorImage::filled(3, 2, [0.1, 0.5, 0.9]);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn constant_offset() {
        let a = ColorImage::filled(4, 4, [0.5; 3]);
        let b = ColorImage::filled(4, 4, [0.25; 3]);
        assert_eq!(mse(&a, &b).unwrap(), 0.0625);
        assert!((psnr(&a, &b).unwrap() - 12.041_199_826_559_248).abs() < 1e-9);
    }

    #[test]
    fn psnr_of_table_mse() {
        assert!((psnr_from_mse(6.45e-4) - 31.904).abs() < 1e-3);
    }

    #[test]
    fn shape_mismatch() {
        let a = ColorImage::filled(4, 4, [0.5; 3]);
        let b = ColorImage::filled(4, 3, [0.5; 3]);
        assert!(matches!(mse(&a, &b), Err(Error::Shape { .. })));
        assert!(psnr(&a, &b).is_err());
    }

    fn arb_image() -> impl Strategy<Value = ColorImage> {
        proptest::collection::vec(0.0f64..=1.0, 18).prop_map(|v| {
            ColorImage::new(
                Plane::new(3, 2, v[..6].to_vec()).unwrap(),
                Plane::new(3, 2, v[6..12].to_vec()).unwrap(),
                Plane::new(3, 2, v[12..].to_vec()).unwrap(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn mse_symmetric_and_psnr_formula(a in arb_image(), b in arb_image()) {
            let m = mse(&a, &b).unwrap();
            prop_assert_eq!(m, mse(&b, &a).unwrap());
            prop_assert!(m >= 0.0);
            if m > 0.0 {
                prop_assert_eq!(psnr(&a, &b).unwrap(), 10.0 * (1.0 / m).log10());
            }
        }
    }
}
