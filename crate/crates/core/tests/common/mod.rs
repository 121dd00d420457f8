#![allow(dead_code)]

use std::f64::consts::TAU;

use leafid::imaging::{centroid, max_radius, segment_leaf, trace_contour, GrayImage};
use leafid::shape::{polar_fourier_descriptors, PftParams};

/// Dark disk of radius 40 on a light 100x100 background, textured with one
/// cosine per descriptor frequency so that no descriptor is near zero.
pub fn smooth_blob() -> GrayImage {
    let (cx, cy, r0) = (50.0, 50.0, 40.0);
    GrayImage::from_fn(100, 100, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let r = dx.hypot(dy);
        if r > r0 {
            return 250;
        }
        let theta = dy.atan2(dx);
        let mut v = 120.0;
        for rho in 0..5 {
            for phi in 0..7 {
                if rho + phi == 0 {
                    continue;
                }
                let phase = (rho * 7 + phi) as f64 * 2.39996;
                v += 7.0 * (TAU * rho as f64 * r / r0 + phi as f64 * theta + phase).cos();
            }
        }
        v.clamp(1.0, 230.0) as u8
    })
}

/// Nearest-neighbour 2x enlargement.
pub fn upscale2(g: &GrayImage) -> GrayImage {
    GrayImage::from_fn(2 * g.width(), 2 * g.height(), |x, y| g.get(x / 2, y / 2))
}

/// Places `g` at offset `(dx, dy)` on a larger canvas filled with `fill`.
pub fn translate(g: &GrayImage, dx: usize, dy: usize, w: usize, h: usize, fill: u8) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        if x >= dx && y >= dy && x - dx < g.width() && y - dy < g.height() {
            g.get(x - dx, y - dy)
        } else {
            fill
        }
    })
}

/// Segment and describe with default parameters.
pub fn descriptors(g: &GrayImage) -> Vec<f64> {
    let m = segment_leaf(g).unwrap();
    let c = centroid(&m);
    let r = max_radius(&trace_contour(&m), c);
    polar_fourier_descriptors(g, &m, c, r, PftParams::default()).unwrap().values
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}
