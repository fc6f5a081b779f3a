//! Nearest-neighbour descriptor matching with a distance-ratio test.

use rayon::prelude::*;

use super::sift::{Descriptor, DescriptorSet, DESCRIPTOR_LEN};

pub const DEFAULT_RATIO: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    pub query: usize,
    pub train: usize,
    pub distance: f32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchSet {
    pub pairs: Vec<Match>,
    pub threshold: f64,
    /// Set when either side had no descriptors to match.
    pub empty_input: bool,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[inline]
fn squared_distance(a: &Descriptor, b: &Descriptor) -> f32 {
    // eight independent lanes so the loop vectorises
    let mut acc = [0.0f32; 8];
    for (ca, cb) in a.chunks_exact(8).zip(b.chunks_exact(8)) {
        for k in 0..8 {
            let d = ca[k] - cb[k];
            acc[k] += d * d;
        }
    }
    acc.iter().sum()
}

#[inline]
fn is_zero(d: &Descriptor) -> bool {
    d.iter().all(|&v| v == 0.0)
}

pub fn match_descriptors(a: &DescriptorSet, b: &DescriptorSet, threshold: f64) -> MatchSet {
    match_descriptor_slices(&a.descriptors, &b.descriptors, threshold)
}

/// For each non-zero descriptor in `a`, finds its nearest (`d1`) and second
/// nearest (`d2`) Euclidean neighbours in `b` and accepts the pair iff
/// `d1 * threshold < d2`. With a single candidate `d2` is infinite.
pub fn match_descriptor_slices(a: &[Descriptor], b: &[Descriptor], threshold: f64) -> MatchSet {
    const _: () = assert!(DESCRIPTOR_LEN.is_multiple_of(8));
    if a.is_empty() || b.is_empty() {
        return MatchSet { pairs: Vec::new(), threshold, empty_input: true };
    }
    let pairs = a
        .par_iter()
        .enumerate()
        .filter_map(|(qi, q)| {
            if is_zero(q) {
                return None;
            }
            let mut best = (f32::INFINITY, usize::MAX);
            let mut second = f32::INFINITY;
            for (ti, t) in b.iter().enumerate() {
                let d = squared_distance(q, t);
                if d < best.0 {
                    second = best.0;
                    best = (d, ti);
                } else if d < second {
                    second = d;
                }
            }
            let (d1, d2) = (best.0.sqrt(), second.sqrt());
            (d1 as f64 * threshold < d2 as f64).then_some(Match {
                query: qi,
                train: best.1,
                distance: d1,
            })
        })
        .collect();
    MatchSet { pairs, threshold, empty_input: false }
}
