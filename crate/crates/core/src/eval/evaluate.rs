//! Per-image evaluation: match counts under the synthetic transforms,
//! relative change against the RGB baseline, PSNR/MSE and fusion time.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::matching::{match_descriptors, DEFAULT_RATIO};
use super::sift::dense_sift_masked;
use super::transform::{apply_transform_masked, Transform};
use crate::error::{Error, Result};
use crate::fusion::{fuse, FusionMethod, FusionTag};
use crate::image::{luminance, mse, psnr_from_mse, ColorImage, Plane};

/// Dense-SIFT and matching controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub bin_size: usize,
    pub step: usize,
    pub threshold: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self { bin_size: 8, step: 4, threshold: DEFAULT_RATIO }
    }
}

/// Number of ratio-test matches between `img` and each transformed copy of it,
/// computed on luminance.
pub fn count_matches(img: &ColorImage, transforms: &[Transform], p: &FeatureParams) -> Result<Vec<u64>> {
    let original = dense_sift_masked(&luminance(img), p.bin_size, p.step, None)?;
    transforms
        .iter()
        .map(|&t| {
            let moved = apply_transform_masked(img, t);
            let luma: Plane = luminance(&moved.image);
            let set = dense_sift_masked(&luma, p.bin_size, p.step, moved.valid.as_deref())?;
            Ok(match_descriptors(&original, &set, p.threshold).len() as u64)
        })
        .collect()
}

/// `100 * (sum(fused) - sum(rgb)) / sum(rgb)`, pooled over transforms.
pub fn relative_change(fused: &[u64], rgb: &[u64]) -> Result<f64> {
    if fused.len() != rgb.len() {
        return Err(Error::InvalidParameter(format!(
            "count vectors differ in length: {} vs {}",
            fused.len(),
            rgb.len()
        )));
    }
    let base: u64 = rgb.iter().sum();
    if base == 0 {
        return Err(Error::UndefinedBaseline);
    }
    let total: u64 = fused.iter().sum();
    Ok(100.0 * (total as f64 - base as f64) / base as f64)
}

/// Row label: the untouched RGB baseline or a fusion method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodLabel {
    Rgb,
    Fusion(FusionTag),
}

impl MethodLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodLabel::Rgb => "RGB",
            MethodLabel::Fusion(t) => t.as_str(),
        }
    }
}

impl fmt::Display for MethodLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("RGB") {
            Ok(MethodLabel::Rgb)
        } else {
            s.parse().map(MethodLabel::Fusion)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// The RGB baseline produced no matches; relative change is undefined.
    ZeroBaseline,
    /// The RGB baseline itself failed to evaluate.
    BaselineFailed,
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::ZeroBaseline => "zero_baseline",
            RowStatus::BaselineFailed => "baseline_failed",
            RowStatus::Failed => "failed",
        }
    }
}

impl FromStr for RowStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ok" => RowStatus::Ok,
            "zero_baseline" => RowStatus::ZeroBaseline,
            "baseline_failed" => RowStatus::BaselineFailed,
            "failed" => RowStatus::Failed,
            _ => return Err(Error::Report(format!("unknown row status {s:?}"))),
        })
    }
}

/// Raw measurements for one (image, method) cell, before the baseline is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub counts: Vec<u64>,
    pub psnr: f64,
    pub mse: f64,
    pub fuse_time: f64,
    pub clamped: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub image_id: String,
    pub method: MethodLabel,
    pub status: RowStatus,
    /// One entry per transform, in the evaluated order; empty when failed.
    pub counts: Vec<u64>,
    pub rel_change: Option<f64>,
    pub psnr: f64,
    pub mse: f64,
    /// Wall time of the fusion call in seconds; zero for the baseline.
    pub fuse_time: f64,
    pub clamped: u64,
    pub error: Option<String>,
}

impl EvalRow {
    pub fn total_matches(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn evaluate_baseline(rgb: &ColorImage, transforms: &[Transform], p: &FeatureParams) -> Result<Cell> {
    Ok(Cell {
        counts: count_matches(rgb, transforms, p)?,
        psnr: f64::INFINITY,
        mse: 0.0,
        fuse_time: 0.0,
        clamped: 0,
    })
}

pub fn evaluate_method(
    rgb: &ColorImage,
    nir: &Plane,
    method: &FusionMethod,
    transforms: &[Transform],
    p: &FeatureParams,
) -> Result<Cell> {
    evaluate_method_keep(rgb, nir, method, transforms, p).map(|(cell, _)| cell)
}

/// [`evaluate_method`] that also hands back the fused image.
pub fn evaluate_method_keep(
    rgb: &ColorImage,
    nir: &Plane,
    method: &FusionMethod,
    transforms: &[Transform],
    p: &FeatureParams,
) -> Result<(Cell, ColorImage)> {
    let start = Instant::now();
    let fused = fuse(rgb, nir, method)?;
    let fuse_time = start.elapsed().as_secs_f64().max(1e-9);
    let err = mse(&fused.image, rgb)?;
    let cell = Cell {
        counts: count_matches(&fused.image, transforms, p)?,
        psnr: psnr_from_mse(err),
        mse: err,
        fuse_time,
        clamped: fused.clamped_luma as u64,
    };
    Ok((cell, fused.image))
}

/// Turns raw cells into rows, computing relative change against the baseline.
pub fn assemble_rows(
    image_id: &str,
    baseline: &Result<Cell, String>,
    methods: &[(MethodLabel, Result<Cell, String>)],
) -> Vec<EvalRow> {
    let failed = |method, msg: &str| EvalRow {
        image_id: image_id.to_string(),
        method,
        status: RowStatus::Failed,
        counts: Vec::new(),
        rel_change: None,
        psnr: f64::NAN,
        mse: f64::NAN,
        fuse_time: 0.0,
        clamped: 0,
        error: Some(msg.to_string()),
    };
    let mut rows = Vec::with_capacity(methods.len() + 1);
    let base_counts = match baseline {
        Ok(cell) => {
            let zero = cell.counts.iter().sum::<u64>() == 0;
            rows.push(EvalRow {
                image_id: image_id.to_string(),
                method: MethodLabel::Rgb,
                status: if zero { RowStatus::ZeroBaseline } else { RowStatus::Ok },
                counts: cell.counts.clone(),
                rel_change: (!zero).then_some(0.0),
                psnr: cell.psnr,
                mse: cell.mse,
                fuse_time: cell.fuse_time,
                clamped: cell.clamped,
                error: None,
            });
            Some(&cell.counts)
        }
        Err(msg) => {
            rows.push(failed(MethodLabel::Rgb, msg));
            None
        }
    };
    for (label, cell) in methods {
        let row = match cell {
            Err(msg) => failed(*label, msg),
            Ok(cell) => {
                let (status, rel_change) = match base_counts {
                    None => (RowStatus::BaselineFailed, None),
                    Some(base) => match relative_change(&cell.counts, base) {
                        Ok(r) => (RowStatus::Ok, Some(r)),
                        Err(_) => (RowStatus::ZeroBaseline, None),
                    },
                };
                EvalRow {
                    image_id: image_id.to_string(),
                    method: *label,
                    status,
                    counts: cell.counts.clone(),
                    rel_change,
                    psnr: cell.psnr,
                    mse: cell.mse,
                    fuse_time: cell.fuse_time,
                    clamped: cell.clamped,
                    error: None,
                }
            }
        };
        rows.push(row);
    }
    rows
}

/// Evaluates the RGB baseline and every method on one aligned pair. A method
/// that fails produces a `Failed` row instead of aborting the pair.
pub fn evaluate_pair(
    image_id: &str,
    rgb: &ColorImage,
    nir: &Plane,
    methods: &[FusionMethod],
    transforms: &[Transform],
    p: &FeatureParams,
) -> Vec<EvalRow> {
    let baseline = evaluate_baseline(rgb, transforms, p).map_err(|e| e.to_string());
    let cells: Vec<_> = methods
        .iter()
        .map(|m| {
            (
                MethodLabel::Fusion(m.tag),
                evaluate_method(rgb, nir, m, transforms, p).map_err(|e| e.to_string()),
            )
        })
        .collect();
    assemble_rows(image_id, &baseline, &cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn relative_change_values() {
        assert_eq!(relative_change(&[5, 7], &[5, 7]).unwrap(), 0.0);
        assert!((relative_change(&[10878], &[10000]).unwrap() - 8.78).abs() < 1e-12);
        assert!((relative_change(&[9889], &[10000]).unwrap() + 1.11).abs() < 1e-12);
        assert!(matches!(relative_change(&[3], &[0]), Err(Error::UndefinedBaseline)));
        assert!(relative_change(&[3, 4], &[1]).is_err());
    }

    proptest! {
        #[test]
        fn relative_change_scale_invariant(
            rgb in proptest::collection::vec(1u64..10_000, 5),
            fused in proptest::collection::vec(0u64..10_000, 5),
            k in 1u64..1000,
        ) {
            let scaled = |v: &[u64]| v.iter().map(|c| c * k).collect::<Vec<_>>();
            let a = relative_change(&fused, &rgb).unwrap();
            let b = relative_change(&scaled(&fused), &scaled(&rgb)).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    // Point-symmetric texture: ROT180 reproduces it exactly, so every
    // distinctive descriptor finds its twin.
    fn textured(w: usize, h: usize) -> ColorImage {
        let f = |x: usize, y: usize| {
            ((x as f64 * 0.7).sin() * (y as f64 * 0.5).cos() + ((x * y) % 13) as f64 / 13.0) * 0.2
        };
        let p = Plane::from_fn(w, h, |x, y| 0.5 + f(x, y) + f(w - 1 - x, h - 1 - y));
        ColorImage::from_gray(&p)
    }

    #[test]
    fn constant_image_has_no_matches() {
        let img = ColorImage::filled(72, 72, [0.4; 3]);
        let c = count_matches(&img, &Transform::ALL, &FeatureParams::default()).unwrap();
        assert_eq!(c, vec![0; 5]);
    }

    #[test]
    fn textured_image_matches_under_rotation() {
        let img = textured(72, 64);
        let p = FeatureParams::default();
        let c = count_matches(&img, &[Transform::Rot180], &p).unwrap();
        assert!(c[0] > 0);
        assert_eq!(c, count_matches(&img, &[Transform::Rot180], &p).unwrap());
    }

    #[test]
    fn no_methods_gives_baseline_only() {
        let img = textured(48, 48);
        let nir = luminance(&img);
        let rows = evaluate_pair("x", &img, &nir, &[], &[Transform::Rot180], &FeatureParams::default());
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].method, MethodLabel::Rgb);
        assert_eq!(rows[0].fuse_time, 0.0);
    }

    #[test]
    fn constant_pair_row_flags() {
        let img = ColorImage::filled(72, 72, [0.5; 3]);
        let nir = Plane::filled(72, 72, 0.5);
        let rows = evaluate_pair(
            "c",
            &img,
            &nir,
            &[FusionMethod::new(FusionTag::BfwlsAvg)],
            &Transform::ALL,
            &FeatureParams::default(),
        );
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].status, RowStatus::ZeroBaseline);
        assert_eq!(rows[1].rel_change, None);
        assert_eq!(rows[1].psnr, f64::INFINITY);
        assert!(rows[1].fuse_time > 0.0);
    }

    #[test]
    fn failing_method_yields_error_row() {
        let img = textured(48, 48);
        let nir = Plane::filled(40, 48, 0.5);
        let rows = evaluate_pair(
            "bad",
            &img,
            &nir,
            &[FusionMethod::new(FusionTag::SwapBf)],
            &[Transform::Rot180],
            &FeatureParams::default(),
        );
        assert_eq!(rows[0].status, RowStatus::Ok);
        assert_eq!(rows[1].status, RowStatus::Failed);
        assert!(rows[1].error.as_deref().unwrap().contains("dimension mismatch"));
    }

    #[test]
    fn label_parsing() {
        assert_eq!("rgb".parse::<MethodLabel>().unwrap(), MethodLabel::Rgb);
        assert_eq!(
            "SWAP_BF".parse::<MethodLabel>().unwrap(),
            MethodLabel::Fusion(FusionTag::SwapBf)
        );
    }
}
