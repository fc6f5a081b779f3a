//! Independent reference implementations and test inputs shared by the
//! integration tests and the acceptance runner. Nothing here calls into the
//! code it is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nirfuse_core::eval::{Descriptor, DESCRIPTOR_LEN};
use nirfuse_core::image::{luminance, ColorImage, Plane};
use nirfuse_core::synth::scene;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Plane {
    let data = (0..w * h).map(|_| rng.random_range(0.0..=1.0)).collect();
    Plane::new(w, h, data).unwrap()
}

/// Five photo-like planes: luminance and NIR of synthetic scenes.
pub fn natural_planes(w: usize, h: usize) -> Vec<Plane> {
    (0..5u64)
        .map(|i| {
            let (rgb, nir) = scene(w, h, 900 + i);
            if i % 2 == 0 {
                luminance(&rgb)
            } else {
                nir
            }
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Every horizontally or vertically adjacent pixel pair `(p, q)` with its
/// smoothness weight `lambda / (|ln(g_q + 0.01) - ln(g_p + 0.01)|^alpha + eps)`.
pub fn wls_edges(g: &Plane, lambda: f64, alpha: f64, eps: f64) -> Vec<(usize, usize, f64)> {
    let (w, h) = g.dims();
    let l = |i: usize| (g.data()[i] + 0.01).ln();
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let mut push = |q: usize| {
                edges.push((p, q, lambda / ((l(q) - l(p)).abs().powf(alpha) + eps)));
            };
            if x + 1 < w {
                push(p + 1);
            }
            if y + 1 < h {
                push(p + w);
            }
        }
    }
    edges
}

/// Dense solve of `(I + sum_e w_e (e_p - e_q)(e_p - e_q)^T) u = g`.
pub fn wls_dense(g: &Plane, lambda: f64, alpha: f64, eps: f64) -> Vec<f64> {
    let n = g.data().len();
    let mut a = DMatrix::<f64>::identity(n, n);
    for (p, q, wt) in wls_edges(g, lambda, alpha, eps) {
        a[(p, p)] += wt;
        a[(q, q)] += wt;
        a[(p, q)] -= wt;
        a[(q, p)] -= wt;
    }
    let b = DVector::from_column_slice(g.data());
    let chol = a.cholesky().expect("system is SPD");
    chol.solve(&b).iter().copied().collect()
}

/// `sum (u - g)^2 + sum_e w_e (u_p - u_q)^2`
pub fn wls_energy(u: &[f64], g: &Plane, lambda: f64, alpha: f64, eps: f64) -> f64 {
    let fidelity: f64 = u.iter().zip(g.data()).map(|(a, b)| (a - b).powi(2)).sum();
    let smooth: f64 = wls_edges(g, lambda, alpha, eps)
        .into_iter()
        .map(|(p, q, wt)| wt * (u[p] - u[q]).powi(2))
        .sum();
    fidelity + smooth
}

/// Literal bilateral filter: square window of radius `ceil(3 sigma_s)` with
/// replicated borders.
pub fn bilateral_naive(src: &Plane, sigma_s: f64, sigma_r: f64) -> Vec<f64> {
    let (w, h) = src.dims();
    let r = (3.0 * sigma_s).ceil() as isize;
    let at = |x: isize, y: isize| {
        let cx = x.clamp(0, w as isize - 1) as usize;
        let cy = y.clamp(0, h as isize - 1) as usize;
        src.data()[cy * w + cx]
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let c = at(x, y);
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = at(x + dx, y + dy);
                    let k = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_s * sigma_s)).exp()
                        * (-(v - c) * (v - c) / (2.0 * sigma_r * sigma_r)).exp();
                    num += k * v;
                    den += k;
                }
            }
            out.push(num / den);
        }
    }
    out
}

/// BT.601 full-range forward transform written out from its coefficients.
pub fn ycbcr(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    (y, (b - y) / 1.772, (r - y) / 1.402)
}

/// Exhaustive ratio-test matcher in f64: sorts every candidate distance.
pub fn brute_force_matches(a: &[Descriptor], b: &[Descriptor], ratio: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if b.is_empty() {
        return out;
    }
    for (qi, q) in a.iter().enumerate() {
        if q.iter().all(|&v| v == 0.0) {
            continue;
        }
        let mut d: Vec<(f64, usize)> = b
            .iter()
            .enumerate()
            .map(|(ti, t)| {
                let s: f64 = q.iter().zip(t).map(|(x, y)| (*x as f64 - *y as f64).powi(2)).sum();
                (s.sqrt(), ti)
            })
            .collect();
        d.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let d2 = d.get(1).map_or(f64::INFINITY, |x| x.0);
        if d[0].0 * ratio < d2 {
            out.push((qi, d[0].1));
        }
    }
    out
}

pub fn unit_descriptor(rng: &mut ChaCha8Rng) -> Descriptor {
    let mut d = [0.0f32; DESCRIPTOR_LEN];
    for v in d.iter_mut() {
        *v = rng.random_range(0.0..1.0f32).powi(3);
    }
    let n = d.iter().map(|v| v * v).sum::<f32>().sqrt();
    d.iter_mut().for_each(|v| *v /= n);
    d
}

/// Random matching instance mixing near-copies, exact duplicates, zero
/// descriptors and unrelated vectors, so both outcomes of the ratio test occur.
pub fn matching_instance(rng: &mut ChaCha8Rng, max: usize) -> (Vec<Descriptor>, Vec<Descriptor>) {
    let nb = rng.random_range(1..=max);
    let b: Vec<Descriptor> = (0..nb).map(|_| unit_descriptor(rng)).collect();
    let na = rng.random_range(1..=max);
    let a = (0..na)
        .map(|_| match rng.random_range(0..5) {
            0 => [0.0f32; DESCRIPTOR_LEN],
            1 => b[rng.random_range(0..nb)],
            2 => {
                let mut d = b[rng.random_range(0..nb)];
                let scale = rng.random_range(0.0..0.3f32);
                for v in d.iter_mut() {
                    *v = (*v + rng.random_range(-scale..scale) * 0.1).max(0.0);
                }
                d
            }
            _ => unit_descriptor(rng),
        })
        .collect();
    (a, b)
}

/// Grid points found by sliding the window over the image, no formula.
pub fn enumerate_windows(w: usize, h: usize, bin_size: usize, step: usize) -> usize {
    let span = 4 * bin_size;
    let count = |len: usize| {
        let mut n = 0;
        let mut start = 0;
        while start + span <= len {
            n += 1;
            start += step;
        }
        n
    };
    count(w) * count(h)
}

/// Rotates a plane by 180 degrees.
pub fn rot180(p: &Plane) -> Plane {
    let mut data = p.data().to_vec();
    data.reverse();
    Plane::new(p.width(), p.height(), data).unwrap()
}

/// Point-symmetric textured colour image: rotating it by 180 degrees
/// reproduces it exactly.
pub fn symmetric_texture(w: usize, h: usize) -> ColorImage {
    let f = |x: usize, y: usize| {
        ((x as f64 * 0.7).sin() * (y as f64 * 0.5).cos() + ((x * y) % 13) as f64 / 13.0) * 0.2
    };
    let p = Plane::from_fn(w, h, |x, y| 0.5 + f(x, y) + f(w - 1 - x, h - 1 - y));
    ColorImage::from_gray(&p)
}

/// Fusion recomputed from the oracles above: dense WLS, literal bilateral and
/// the textbook inverse colour transform. Returns R, G and B sample vectors.
pub fn fusion_oracle(rgb: &ColorImage, nir: &Plane, tag: &str, wls: (f64, f64, f64), bf: (f64, f64)) -> [Vec<f64>; 3] {
    let (w, h) = rgb.dims();
    let n = w * h;
    let mut y = vec![0.0; n];
    let mut cb = vec![0.0; n];
    let mut cr = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = ycbcr(rgb.r().data()[i], rgb.g().data()[i], rgb.b().data()[i]);
        y[i] = a;
        cb[i] = b;
        cr[i] = c;
    }
    let yp = Plane::new(w, h, y.iter().map(|v| v.clamp(0.0, 1.0)).collect()).unwrap();
    let (lambda, alpha, eps) = wls;
    let wls_of = |p: &Plane| wls_dense(p, lambda, alpha, eps);
    let bf_of = |p: &Plane| bilateral_naive(p, bf.0, bf.1);
    let detail = |p: &Plane, base: Vec<f64>| -> Vec<f64> { p.data().iter().zip(base).map(|(a, b)| a - b).collect() };
    let (base, d): (Vec<f64>, Vec<f64>) = match tag {
        "SWAP_BF" => (bf_of(&yp), detail(nir, bf_of(nir))),
        "SWAP_WLS" => (wls_of(&yp), detail(nir, wls_of(nir))),
        "BFWLS_AVG" | "BFWLS_MAX" => {
            let dw = detail(nir, wls_of(nir));
            let db = detail(nir, bf_of(nir));
            let merged = dw
                .iter()
                .zip(&db)
                .map(|(&a, &b)| match tag {
                    "BFWLS_AVG" => (a + b) / 2.0,
                    _ if b.abs() > a.abs() => b,
                    _ => a,
                })
                .collect();
            (wls_of(&yp), merged)
        }
        other => panic!("unknown method {other}"),
    };
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let yf = (base[i] + d[i]).clamp(0.0, 1.0);
        let r = yf + 1.402 * cr[i];
        let b = yf + 1.772 * cb[i];
        let g = (yf - 0.299 * r - 0.114 * b) / 0.587;
        for (c, v) in [r, g, b].into_iter().enumerate() {
            out[c][i] = v.clamp(0.0, 1.0);
        }
    }
    out
}

/// Mean squared error over the three channels, written out directly.
pub fn mse_oracle(a: &ColorImage, b: &ColorImage) -> f64 {
    let mut s = 0.0;
    let mut n = 0usize;
    for (p, q) in [(a.r(), b.r()), (a.g(), b.g()), (a.b(), b.b())] {
        for (x, y) in p.data().iter().zip(q.data()) {
            s += (x - y) * (x - y);
            n += 1;
        }
    }
    s / n as f64
}
