//! Per-channel color moments over the leaf region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{LeafMask, RgbImage};

/// Moments of one channel. Kurtosis is in excess form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelMoments {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ColorMoments {
    pub red: ChannelMoments,
    pub green: ChannelMoments,
    pub blue: ChannelMoments,
}

impl ColorMoments {
    pub fn channels(&self) -> [ChannelMoments; 3] {
        [self.red, self.green, self.blue]
    }

    pub fn means(&self) -> [f64; 3] {
        self.channels().map(|c| c.mean)
    }

    pub fn stds(&self) -> [f64; 3] {
        self.channels().map(|c| c.std)
    }

    pub fn skewnesses(&self) -> [f64; 3] {
        self.channels().map(|c| c.skewness)
    }

    pub fn kurtoses(&self) -> [f64; 3] {
        self.channels().map(|c| c.kurtosis)
    }
}

/// Population moments of a sample. A zero spread yields zero skewness and kurtosis.
pub fn channel_moments(values: &[f64]) -> ChannelMoments {
    assert!(!values.is_empty(), "moments of an empty sample");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std = (m2 / n).sqrt();
    if std == 0.0 {
        return ChannelMoments {
            mean,
            std,
            skewness: 0.0,
            kurtosis: 0.0,
        };
    }
    ChannelMoments {
        mean,
        std,
        skewness: m3 / (n * std.powi(3)),
        kurtosis: m4 / (n * std.powi(4)) - 3.0,
    }
}

/// Color moments of each RGB channel, over leaf pixels only or over the
/// whole raster when `whole_image` is set.
pub fn color_moments(rgb: &RgbImage, mask: &LeafMask, whole_image: bool) -> Result<ColorMoments> {
    let dims = (rgb.width(), rgb.height());
    if dims != mask.dims() {
        return Err(Error::SizeMismatch {
            expected: mask.dims(),
            found: dims,
        });
    }
    let mut channels: [Vec<f64>; 3] = Default::default();
    for (px, &inside) in rgb.pixels().iter().zip(mask.as_slice()) {
        if whole_image || inside {
            for (ch, &v) in channels.iter_mut().zip(px) {
                ch.push(f64::from(v));
            }
        }
    }
    let [r, g, b] = channels.map(|c| channel_moments(&c));
    Ok(ColorMoments {
        red: r,
        green: g,
        blue: b,
    })
}
