use super::params::{BilateralParams, WlsParams};
use super::{bilateral_direct, bilateral_fast, wls_smooth};
use crate::error::Result;
use crate::image::{Plane, SignedPlane};

/// Edge-preserving smoother used to split an image into base and detail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeFilter {
    BilateralDirect(BilateralParams),
    BilateralFast(BilateralParams),
    Wls(WlsParams),
}

impl EdgeFilter {
    pub fn apply(&self, src: &Plane) -> Result<Plane> {
        match self {
            EdgeFilter::BilateralDirect(p) => bilateral_direct(src, p),
            EdgeFilter::BilateralFast(p) => bilateral_fast(src, p),
            EdgeFilter::Wls(p) => wls_smooth(src, p),
        }
    }
}

/// Low-frequency base and signed detail residual; `base + detail` is the source.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerPair {
    pub base: Plane,
    pub detail: SignedPlane,
}

impl LayerPair {
    /// `base + detail`, unclamped.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.base
            .data()
            .iter()
            .zip(self.detail.data())
            .map(|(b, d)| b + d)
            .collect()
    }
}

pub fn decompose(src: &Plane, filter: &EdgeFilter) -> Result<LayerPair> {
    let base = filter.apply(src)?;
    let detail = SignedPlane::difference(src, &base)?;
    Ok(LayerPair { base, detail })
}
