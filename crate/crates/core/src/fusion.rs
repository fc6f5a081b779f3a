//! RGB/NIR fusion: BFWLS-Avg, BFWLS-Max and the single-filter detail swaps.
//!
//! All methods work on luminance only. The RGB image is converted to YCbCr,
//! a new luminance is built from an RGB base layer plus NIR detail, and the
//! original chroma planes are carried through untouched.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{bilateral_direct, bilateral_fast, wls_smooth, BilateralParams, WlsParams};
use crate::image::plane::same_dims;
use crate::image::{
    rgb_to_ycbcr, ColorImage, LumaChroma, Plane, SignedPlane,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FusionTag {
    #[serde(rename = "BFWLS_AVG")]
    BfwlsAvg,
    #[serde(rename = "BFWLS_MAX")]
    BfwlsMax,
    #[serde(rename = "SWAP_BF")]
    SwapBf,
    #[serde(rename = "SWAP_WLS")]
    SwapWls,
}

impl FusionTag {
    pub const ALL: [FusionTag; 4] = [
        FusionTag::SwapBf,
        FusionTag::SwapWls,
        FusionTag::BfwlsMax,
        FusionTag::BfwlsAvg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FusionTag::BfwlsAvg => "BFWLS_AVG",
            FusionTag::BfwlsMax => "BFWLS_MAX",
            FusionTag::SwapBf => "SWAP_BF",
            FusionTag::SwapWls => "SWAP_WLS",
        }
    }
}

impl fmt::Display for FusionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FusionTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        FusionTag::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown fusion method {s:?} (expected one of BFWLS_AVG, BFWLS_MAX, SWAP_BF, SWAP_WLS)"
                ))
            })
    }
}

/// How BFWLS-Max picks between the two NIR detail layers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxRule {
    /// Keep the value with the larger magnitude, sign included.
    #[default]
    Magnitude,
    /// Plain `max(a, b)`.
    Signed,
}

impl FromStr for MaxRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "magnitude" => Ok(MaxRule::Magnitude),
            "signed" => Ok(MaxRule::Signed),
            _ => Err(Error::InvalidParameter(format!(
                "unknown max rule {s:?} (expected magnitude or signed)"
            ))),
        }
    }
}

/// Which bilateral implementation the NIR decomposition uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BilateralVariant {
    #[default]
    Fast,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionMethod {
    pub tag: FusionTag,
    pub bf: BilateralParams,
    pub wls: WlsParams,
    pub max_rule: MaxRule,
    pub bilateral: BilateralVariant,
}

impl FusionMethod {
    pub fn new(tag: FusionTag) -> Self {
        Self {
            tag,
            bf: BilateralParams::default(),
            wls: WlsParams::default(),
            max_rule: MaxRule::default(),
            bilateral: BilateralVariant::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bf.validate()?;
        self.wls.validate()
    }

    fn bilateral(&self, src: &Plane) -> Result<Plane> {
        match self.bilateral {
            BilateralVariant::Fast => bilateral_fast(src, &self.bf),
            BilateralVariant::Direct => bilateral_direct(src, &self.bf),
        }
    }
}

/// Result of a fusion: the RGB output, the luma/chroma it was rebuilt from,
/// and how many luminance samples were clamped into `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Fused {
    pub image: ColorImage,
    pub luma_chroma: LumaChroma,
    pub clamped_luma: usize,
    pub clamped_rgb: usize,
}

fn zip_details(
    a: &SignedPlane,
    b: &SignedPlane,
    f: impl Fn(f64, f64) -> f64,
) -> Result<SignedPlane> {
    same_dims(a.dims(), b.dims())?;
    let w = a.width();
    Ok(SignedPlane::from_fn(a.width(), a.height(), |x, y| {
        let i = y * w + x;
        f(a.data()[i], b.data()[i])
    }))
}

/// Per-pixel mean of two detail layers.
pub fn fuse_details_avg(d_wls: &SignedPlane, d_bf: &SignedPlane) -> Result<SignedPlane> {
    zip_details(d_wls, d_bf, |a, b| 0.5 * (a + b))
}

/// Per-pixel larger-magnitude detail, keeping its sign. Ties keep `d_wls`.
pub fn fuse_details_max(d_wls: &SignedPlane, d_bf: &SignedPlane) -> Result<SignedPlane> {
    fuse_details_max_with(d_wls, d_bf, MaxRule::Magnitude)
}

pub fn fuse_details_max_with(
    d_wls: &SignedPlane,
    d_bf: &SignedPlane,
    rule: MaxRule,
) -> Result<SignedPlane> {
    match rule {
        MaxRule::Magnitude => zip_details(d_wls, d_bf, |a, b| if b.abs() > a.abs() { b } else { a }),
        MaxRule::Signed => zip_details(d_wls, d_bf, f64::max),
    }
}

fn check_pair(rgb: &ColorImage, nir: &Plane) -> Result<()> {
    if rgb.dims() != nir.dims() {
        return Err(Error::shape(rgb.dims(), nir.dims()));
    }
    Ok(())
}

/// Adds `detail` to `base`, clamps, and recombines with the original chroma.
///
/// With chroma held fixed the inverse colour transform moves R, G and B by
/// exactly the luma change, so the output is built as `rgb + (y' - y)`. This
/// avoids round-trip error: an unchanged luma gives back `rgb` bit for bit.
fn recombine(rgb: &ColorImage, lc: LumaChroma, base: &Plane, detail: &SignedPlane) -> Result<Fused> {
    let (w, h) = base.dims();
    let mut clamped_luma = 0;
    let y: Vec<f64> = base
        .data()
        .iter()
        .zip(detail.data())
        .map(|(b, d)| {
            let v = b + d;
            if !(0.0..=1.0).contains(&v) {
                clamped_luma += 1;
            }
            v
        })
        .collect();
    let y = Plane::from_clamped(w, h, y);
    let mut clamped_rgb = 0;
    let channels = rgb.planes().map(|c| {
        let data = c
            .data()
            .iter()
            .zip(y.data().iter().zip(lc.y.data()))
            .map(|(&v, (&new, &old))| {
                let out = v + (new - old);
                if !(0.0..=1.0).contains(&out) {
                    clamped_rgb += 1;
                }
                out
            })
            .collect();
        Plane::from_clamped(w, h, data)
    });
    let [r, g, b] = channels;
    Ok(Fused {
        image: ColorImage::new(r, g, b)?,
        luma_chroma: LumaChroma { y, cb: lc.cb, cr: lc.cr },
        clamped_luma,
        clamped_rgb,
    })
}

/// BFWLS fusion: NIR detail from both WLS and bilateral decompositions,
/// merged by average or max, added to the WLS base of the RGB luminance.
/// The NIR base layers are discarded.
pub fn bfwls_fuse(rgb: &ColorImage, nir: &Plane, method: &FusionMethod) -> Result<Fused> {
    check_pair(rgb, nir)?;
    method.validate()?;
    if !matches!(method.tag, FusionTag::BfwlsAvg | FusionTag::BfwlsMax) {
        return Err(Error::InvalidParameter(format!(
            "bfwls_fuse called with {}",
            method.tag
        )));
    }
    let lc = rgb_to_ycbcr(rgb);

    let ((nir_wls, nir_bf), rgb_base) = rayon::join(
        || rayon::join(|| wls_smooth(nir, &method.wls), || method.bilateral(nir)),
        || wls_smooth(&lc.y, &method.wls),
    );
    let d_wls = SignedPlane::difference(nir, &nir_wls?)?;
    let d_bf = SignedPlane::difference(nir, &nir_bf?)?;
    let rgb_base = rgb_base?;

    let fused = match method.tag {
        FusionTag::BfwlsAvg => fuse_details_avg(&d_wls, &d_bf)?,
        _ => fuse_details_max_with(&d_wls, &d_bf, method.max_rule)?,
    };
    recombine(rgb, lc, &rgb_base, &fused)
}

/// Detail swap: base of the RGB luminance plus detail of the NIR, both from
/// the same filter (bilateral for `SWAP_BF`, WLS for `SWAP_WLS`).
pub fn detail_swap_fuse(rgb: &ColorImage, nir: &Plane, method: &FusionMethod) -> Result<Fused> {
    check_pair(rgb, nir)?;
    method.validate()?;
    let lc = rgb_to_ycbcr(rgb);
    let filter = |p: &Plane| -> Result<Plane> {
        match method.tag {
            FusionTag::SwapBf => method.bilateral(p),
            FusionTag::SwapWls => wls_smooth(p, &method.wls),
            other => Err(Error::InvalidParameter(format!(
                "detail_swap_fuse called with {other}"
            ))),
        }
    };
    let (rgb_base, nir_base) = rayon::join(|| filter(&lc.y), || filter(nir));
    let rgb_base = rgb_base?;
    let detail = SignedPlane::difference(nir, &nir_base?)?;
    recombine(rgb, lc, &rgb_base, &detail)
}

/// Dispatches on `method.tag`.
pub fn fuse(rgb: &ColorImage, nir: &Plane, method: &FusionMethod) -> Result<Fused> {
    match method.tag {
        FusionTag::BfwlsAvg | FusionTag::BfwlsMax => bfwls_fuse(rgb, nir, method),
        FusionTag::SwapBf | FusionTag::SwapWls => detail_swap_fuse(rgb, nir, method),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::luminance;
    use proptest::prelude::*;

    fn d(v: &[f64]) -> SignedPlane {
        SignedPlane::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn avg_cases() {
        let a = d(&[0.2, -0.4, 0.0]);
        assert_eq!(fuse_details_avg(&a, &a).unwrap(), a);
        let half = fuse_details_avg(&a, &d(&[0.0; 3])).unwrap();
        assert_eq!(half.data(), &[0.1, -0.2, 0.0]);
        let mixed = fuse_details_avg(&d(&[0.2]), &d(&[-0.1])).unwrap();
        assert!((mixed.data()[0] - 0.05).abs() < 1e-15);
        assert!(fuse_details_avg(&a, &d(&[0.0; 2])).is_err());
    }

    #[test]
    fn max_cases() {
        let a = d(&[0.2, -0.4, 0.0]);
        assert_eq!(fuse_details_max(&a, &a).unwrap(), a);
        assert_eq!(fuse_details_max(&a, &d(&[0.0; 3])).unwrap(), a);
        assert_eq!(fuse_details_max(&d(&[0.2]), &d(&[-0.3])).unwrap().data(), &[-0.3]);
        // plain max discards the negative detail
        assert_eq!(
            fuse_details_max_with(&d(&[0.2]), &d(&[-0.3]), MaxRule::Signed).unwrap().data(),
            &[0.2]
        );
        assert!(fuse_details_max(&a, &d(&[0.0; 4])).is_err());
    }

    #[test]
    fn tag_parsing() {
        assert_eq!("bfwls-avg".parse::<FusionTag>().unwrap(), FusionTag::BfwlsAvg);
        assert_eq!("SWAP_WLS".parse::<FusionTag>().unwrap(), FusionTag::SwapWls);
        assert!("schaul".parse::<FusionTag>().is_err());
        for t in FusionTag::ALL {
            assert_eq!(t.as_str().parse::<FusionTag>().unwrap(), t);
        }
    }

    fn small_method(tag: FusionTag) -> FusionMethod {
        let mut m = FusionMethod::new(tag);
        m.bf.sigma_spatial = 4.0;
        m
    }

    #[test]
    fn constant_pair_is_identity() {
        let rgb = ColorImage::filled(16, 12, [0.5; 3]);
        let nir = Plane::filled(16, 12, 0.5);
        for tag in FusionTag::ALL {
            let out = fuse(&rgb, &nir, &FusionMethod::new(tag)).unwrap();
            for p in out.image.planes() {
                assert!(p.data().iter().all(|v| (v - 0.5).abs() < 1e-4), "{tag}");
            }
        }
    }

    #[test]
    fn textured_nir_on_gray_rgb() {
        let rgb = ColorImage::filled(24, 16, [0.5; 3]);
        let nir = Plane::from_fn(24, 16, |x, y| if (x / 3 + y / 3) % 2 == 0 { 0.35 } else { 0.65 });
        let out = fuse(&rgb, &nir, &small_method(FusionTag::BfwlsAvg)).unwrap();
        assert!(out.luma_chroma.cb.data().iter().all(|v| v.abs() < 1e-12));
        assert!(out.luma_chroma.cr.data().iter().all(|v| v.abs() < 1e-12));
        // detail was added on top of a flat base
        let (lo, hi) = out.luma_chroma.y.min_max();
        assert!(hi - lo > 0.05);
        for p in out.image.planes() {
            for (a, b) in p.data().iter().zip(out.luma_chroma.y.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn self_swap_returns_original() {
        let rgb = ColorImage::new(
            Plane::from_fn(20, 14, |x, y| 0.3 + 0.4 * ((x + y) % 5) as f64 / 4.0),
            Plane::from_fn(20, 14, |x, _| 0.2 + 0.5 * (x % 3) as f64 / 2.0),
            Plane::from_fn(20, 14, |_, y| 0.25 + 0.5 * (y % 4) as f64 / 3.0),
        )
        .unwrap();
        let nir = luminance(&rgb);
        for tag in [FusionTag::SwapBf, FusionTag::SwapWls] {
            let out = fuse(&rgb, &nir, &small_method(tag)).unwrap();
            for (a, b) in out.luma_chroma.y.data().iter().zip(nir.data()) {
                assert!((a - b).abs() < 1e-12);
            }
            for (p, q) in out.image.planes().iter().zip(rgb.planes()) {
                for (a, b) in p.data().iter().zip(q.data()) {
                    assert!((a - b).abs() < 1e-3, "{tag}");
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let rgb = ColorImage::filled(8, 8, [0.5; 3]);
        let nir = Plane::filled(8, 7, 0.5);
        for tag in FusionTag::ALL {
            assert!(matches!(
                fuse(&rgb, &nir, &FusionMethod::new(tag)),
                Err(Error::Shape { .. })
            ));
        }
    }

    #[test]
    fn wrong_entry_point() {
        let rgb = ColorImage::filled(8, 8, [0.5; 3]);
        let nir = Plane::filled(8, 8, 0.5);
        assert!(bfwls_fuse(&rgb, &nir, &FusionMethod::new(FusionTag::SwapBf)).is_err());
        assert!(detail_swap_fuse(&rgb, &nir, &FusionMethod::new(FusionTag::BfwlsAvg)).is_err());
    }

    proptest! {
        #[test]
        fn avg_never_exceeds_max_in_magnitude(
            a in proptest::collection::vec(-1.0f64..=1.0, 16),
            b in proptest::collection::vec(-1.0f64..=1.0, 16),
        ) {
            let (a, b) = (SignedPlane::new(4, 4, a).unwrap(), SignedPlane::new(4, 4, b).unwrap());
            let avg = fuse_details_avg(&a, &b).unwrap();
            let max = fuse_details_max(&a, &b).unwrap();
            for (x, y) in avg.data().iter().zip(max.data()) {
                prop_assert!(x.abs() <= y.abs() + 1e-15);
            }
        }
    }
}
