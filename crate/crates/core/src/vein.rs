//! Vein density from grayscale top-hat transforms with disk structuring elements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{histogram, otsu_threshold, GrayImage, LeafMask};

pub const RADII: [usize; 4] = [1, 2, 3, 4];

/// Offsets of a flat disk `dx^2 + dy^2 <= r^2`.
pub fn disk_offsets(radius: usize) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Window extremum with the structuring element clipped to the image.
fn filter(src: &[u8], w: usize, h: usize, se: &[(i64, i64)], take_max: bool) -> Vec<u8> {
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = if take_max { 0u8 } else { u8::MAX };
            for &(dx, dy) in se {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let v = src[ny as usize * w + nx as usize];
                acc = if take_max { acc.max(v) } else { acc.min(v) };
            }
            out[y * w + x] = acc;
        }
    }
    out
}

pub fn gray_erosion(gray: &GrayImage, radius: usize) -> GrayImage {
    let se = disk_offsets(radius);
    let data = filter(gray.as_slice(), gray.width(), gray.height(), &se, false);
    GrayImage::new(gray.width(), gray.height(), data).expect("same dimensions")
}

pub fn gray_dilation(gray: &GrayImage, radius: usize) -> GrayImage {
    let se = disk_offsets(radius);
    let data = filter(gray.as_slice(), gray.width(), gray.height(), &se, true);
    GrayImage::new(gray.width(), gray.height(), data).expect("same dimensions")
}

/// Erosion followed by dilation with a flat disk.
pub fn gray_opening(gray: &GrayImage, radius: usize) -> GrayImage {
    let se = disk_offsets(radius);
    let (w, h) = gray.dims();
    let eroded = filter(gray.as_slice(), w, h, &se, false);
    let opened = filter(&eroded, w, h, &se, true);
    GrayImage::new(w, h, opened).expect("same dimensions")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VeinPolarity {
    /// Veins lighter than the lamina: image minus its opening.
    #[default]
    Bright,
    /// Veins darker than the lamina: top-hat of the inverted image.
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VeinParams {
    pub polarity: VeinPolarity,
    /// Fixed top-hat threshold; Otsu on the nonzero responses when absent.
    pub threshold: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VeinFeatures {
    pub ratios: [f64; 4],
}

/// Top-hat response for one radius, zeroed outside the leaf.
///
/// The opening only runs over the leaf bounding box padded by `2r + 1`, which
/// leaves every in-leaf value identical to a full-raster computation.
pub fn top_hat(gray: &GrayImage, mask: &LeafMask, radius: usize, polarity: VeinPolarity) -> Result<GrayImage> {
    if gray.dims() != mask.dims() {
        return Err(Error::SizeMismatch {
            expected: mask.dims(),
            found: gray.dims(),
        });
    }
    let (w, h) = gray.dims();
    let (bx0, by0, bx1, by1) = mask.bounding_box();
    let pad = 2 * radius + 1;
    let (x0, y0) = (bx0.saturating_sub(pad), by0.saturating_sub(pad));
    let (x1, y1) = ((bx1 + pad).min(w - 1), (by1 + pad).min(h - 1));
    let (cw, ch) = (x1 - x0 + 1, y1 - y0 + 1);

    let mut crop = Vec::with_capacity(cw * ch);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let v = gray.get(x, y);
            crop.push(match polarity {
                VeinPolarity::Bright => v,
                VeinPolarity::Dark => 255 - v,
            });
        }
    }
    let se = disk_offsets(radius);
    let opened = filter(&filter(&crop, cw, ch, &se, false), cw, ch, &se, true);

    let mut out = GrayImage::from_fn(w, h, |_, _| 0);
    for y in y0..=y1 {
        for x in x0..=x1 {
            if mask.get(x, y) {
                let k = (y - y0) * cw + (x - x0);
                out.set(x, y, crop[k].saturating_sub(opened[k]));
            }
        }
    }
    Ok(out)
}

/// Vein pixel counts over leaf area for radii 1 to 4.
pub fn vein_features(gray: &GrayImage, mask: &LeafMask, params: &VeinParams) -> Result<VeinFeatures> {
    let area = mask.area() as f64;
    let mut ratios = [0.0; 4];
    for (slot, &radius) in ratios.iter_mut().zip(&RADII) {
        let response = top_hat(gray, mask, radius, params.polarity)?;
        let values: Vec<u8> = mask
            .pixels()
            .map(|(x, y)| response.get(x, y))
            .collect();
        *slot = vein_count(&values, params.threshold) as f64 / area;
    }
    Ok(VeinFeatures { ratios })
}

/// Count of responses above the threshold. Without a fixed threshold, Otsu
/// runs on the nonzero responses; a single distinct nonzero value counts in full.
fn vein_count(values: &[u8], fixed: Option<u8>) -> usize {
    let threshold = match fixed {
        Some(t) => t,
        None => {
            let nonzero: Vec<u8> = values.iter().copied().filter(|&v| v > 0).collect();
            if nonzero.is_empty() {
                return 0;
            }
            otsu_threshold(&histogram(&nonzero)).unwrap_or(0)
        }
    };
    values.iter().filter(|&&v| v > threshold).count()
}
