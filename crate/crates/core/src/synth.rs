//! Synthetic leaf rasters for experiments without a photographed dataset.
//!
//! Each class is a star-shaped outline, a base color and a stripe period.
//! Individual specimens get a random rotation, scale, position, color jitter,
//! stripe orientation and phase, and pixel noise.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::experiment::LabeledVector;
use crate::imaging::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outline {
    /// Axis ratio `minor / major`.
    Ellipse(f64),
    /// `1 + depth cos(lobes theta)`.
    Lobed { lobes: u32, depth: f64 },
    /// Blunt at one end, pointed at the other.
    Teardrop,
}

impl Outline {
    /// Boundary radius relative to the nominal radius at polar angle `theta`.
    pub fn radius(&self, theta: f64) -> f64 {
        match *self {
            Outline::Ellipse(ratio) => {
                let (c, s) = (theta.cos(), theta.sin() / ratio);
                1.0 / (c * c + s * s).sqrt()
            }
            Outline::Lobed { lobes, depth } => (1.0 + depth * (lobes as f64 * theta).cos()) / (1.0 + depth),
            Outline::Teardrop => 0.45 + 0.55 * (0.5 + 0.5 * theta.cos()).powf(0.7),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafClass {
    pub name: String,
    pub outline: Outline,
    pub color: [u8; 3],
    /// Stripe period in pixels; `None` for a plain lamina.
    pub stripe_period: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub size: usize,
    /// Nominal leaf radius in pixels.
    pub radius: f64,
    pub background: u8,
    pub scale_jitter: f64,
    pub color_jitter: f64,
    pub pixel_noise: f64,
    pub stripe_amplitude: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            size: 96,
            radius: 36.0,
            background: 235,
            scale_jitter: 0.1,
            color_jitter: 6.0,
            pixel_noise: 4.0,
            stripe_amplitude: 0.3,
        }
    }
}

/// Renders one specimen of `class`.
pub fn render_leaf(class: &LeafClass, params: &SynthParams, rng: &mut impl Rng) -> RgbImage {
    let size = params.size as f64;
    let rotation = rng.random_range(0.0..TAU);
    let scale = params.radius * (1.0 + rng.random_range(-params.scale_jitter..=params.scale_jitter));
    let margin = (size / 2.0 - scale - 3.0).max(0.0);
    let cx = size / 2.0 + rng.random_range(-margin..=margin) * 0.5;
    let cy = size / 2.0 + rng.random_range(-margin..=margin) * 0.5;
    let tint: [f64; 3] = std::array::from_fn(|k| {
        f64::from(class.color[k]) + rng.random_range(-params.color_jitter..=params.color_jitter)
    });
    let stripe_angle = rng.random_range(0.0..PI);
    let stripe_phase = rng.random_range(0.0..TAU);
    let (sa, ca) = stripe_angle.sin_cos();
    let noise = Normal::new(0.0, params.pixel_noise.max(1e-9)).expect("valid deviation");

    RgbImage::from_fn(params.size, params.size, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let r = dx.hypot(dy);
        let theta = dy.atan2(dx) - rotation;
        let inside = r <= scale * class.outline.radius(theta);
        let jitter = noise.sample(rng);
        if !inside {
            let v = (f64::from(params.background) + jitter).round().clamp(0.0, 255.0) as u8;
            return [v, v, v];
        }
        let shade = match class.stripe_period {
            Some(period) => {
                let t = (TAU * (dx * ca + dy * sa) / period + stripe_phase).sin();
                1.0 - params.stripe_amplitude * (0.5 + 0.5 * t)
            }
            None => 1.0 - 0.5 * params.stripe_amplitude,
        };
        tint.map(|c| (c * shade + jitter).round().clamp(0.0, 255.0) as u8)
    })
}

/// `per_class` specimens of every class, with ids `class/NNN`.
pub fn generate(classes: &[LeafClass], per_class: usize, params: &SynthParams, seed: u64) -> Vec<(String, String, RgbImage)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(classes.len() * per_class);
    for class in classes {
        for i in 0..per_class {
            let img = render_leaf(class, params, &mut rng);
            out.push((format!("{}/{i:03}", class.name), class.name.clone(), img));
        }
    }
    out
}

const OUTLINES: [Outline; 3] = [
    Outline::Ellipse(0.45),
    Outline::Lobed { lobes: 5, depth: 0.22 },
    Outline::Teardrop,
];

/// Three outlines, two colors and two stripe periods: twelve classes.
pub fn twelve_class_set() -> Vec<LeafClass> {
    let colors = [[70, 150, 50], [170, 60, 70]];
    let periods = [3.0, 9.0];
    let mut classes = Vec::new();
    for (si, outline) in OUTLINES.iter().enumerate() {
        for (ci, color) in colors.iter().enumerate() {
            for (pi, period) in periods.iter().enumerate() {
                classes.push(LeafClass {
                    name: format!("s{si}c{ci}p{pi}"),
                    outline: *outline,
                    color: *color,
                    stripe_period: Some(*period),
                });
            }
        }
    }
    classes
}

/// Solves for green so that the color has the given luminance.
fn isoluminant(red: u8, blue: u8, luma: f64) -> [u8; 3] {
    let g = (luma - 0.299 * f64::from(red) - 0.114 * f64::from(blue)) / 0.587;
    [red, g.round().clamp(0.0, 255.0) as u8, blue]
}

/// One outline, one stripe period, four isoluminant colors.
pub fn color_only_set() -> Vec<LeafClass> {
    [(40, 40), (200, 30), (60, 210), (170, 170)]
        .iter()
        .enumerate()
        .map(|(k, &(r, b))| LeafClass {
            name: format!("color{k}"),
            outline: OUTLINES[0],
            color: isoluminant(r, b, 120.0),
            stripe_period: Some(6.0),
        })
        .collect()
}

/// One outline, one color, three stripe periods.
pub fn stripe_only_set() -> Vec<LeafClass> {
    [2.5, 5.0, 10.0]
        .iter()
        .enumerate()
        .map(|(k, &p)| LeafClass {
            name: format!("stripe{k}"),
            outline: OUTLINES[0],
            color: [80, 150, 60],
            stripe_period: Some(p),
        })
        .collect()
}

/// Two-dimensional XOR of Gaussian blobs: class `a` around (0,0) and (1,1),
/// class `b` around (0,1) and (1,0). Overlap grows with `spread`.
pub fn xor_clusters(per_class: usize, spread: f64, seed: u64) -> Vec<LabeledVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).expect("valid deviation");
    let centers = [("a", [(0.0, 0.0), (1.0, 1.0)]), ("b", [(0.0, 1.0), (1.0, 0.0)])];
    let mut out = Vec::new();
    for (label, blobs) in centers {
        for i in 0..per_class {
            let (mx, my) = blobs[i % 2];
            out.push(LabeledVector {
                id: format!("{label}/{i:04}"),
                label: label.to_owned(),
                values: vec![mx + noise.sample(&mut rng), my + noise.sample(&mut rng)],
            });
        }
    }
    out
}
