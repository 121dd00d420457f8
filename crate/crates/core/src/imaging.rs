//! Raster types, loading, segmentation and boundary geometry.
//!
//! Coordinates are `x` = column, `y` = row, origin at the top-left pixel.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image must be at least 1x1");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Luminance conversion `round(0.299 R + 0.587 G + 0.114 B)`.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|&p| luminance(p)).collect(),
        }
    }

    /// Quarter turn clockwise.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |x, y| self.get(y, h - 1 - x))
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let raw = self.pixels.iter().flatten().copied().collect();
        let buf = image::RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| Error::Decode {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
    }
}

pub fn luminance([r, g, b]: [u8; 3]) -> u8 {
    let v = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    v.round().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image must be at least 1x1");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |x, y| self.get(y, h - 1 - x))
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| Error::Decode {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
    }
}

/// Binary leaf region: nonempty, one 4-connected component, no holes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl LeafMask {
    /// Validates the single-component, hole-free invariant.
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        let mask = Self {
            width,
            height,
            data,
        };
        if mask.area() == 0 {
            return Err(Error::NoForeground);
        }
        if component_count(&mask.data, width, height) != 1 {
            return Err(Error::InvalidParameter(
                "mask must be a single 4-connected component".into(),
            ));
        }
        if !background_reaches_border(&mask.data, width, height) {
            return Err(Error::InvalidParameter("mask contains holes".into()));
        }
        Ok(mask)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("mask must be at least 1x1".into()));
        }
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-image coordinates read as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    /// Leaf pixel count.
    pub fn area(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)`.
    pub fn bounding_box(&self) -> (usize, usize, usize, usize) {
        let mut bb = (usize::MAX, usize::MAX, 0, 0);
        for (x, y) in self.pixels() {
            bb.0 = bb.0.min(x);
            bb.1 = bb.1.min(y);
            bb.2 = bb.2.max(x);
            bb.3 = bb.3.max(y);
        }
        bb
    }

    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..w {
            for x in 0..h {
                data.push(self.get(y, h - 1 - x));
            }
        }
        Self {
            width: h,
            height: w,
            data,
        }
    }

    /// Writes a 1-bit grayscale PNG (leaf = white).
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut enc = png::Encoder::new(BufWriter::new(file), self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::One);
        let stride = self.width.div_ceil(8);
        let mut packed = vec![0u8; stride * self.height];
        for (x, y) in self.pixels() {
            packed[y * stride + x / 8] |= 0x80 >> (x % 8);
        }
        let to_err = |e: png::EncodingError| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        let mut writer = enc.write_header().map_err(to_err)?;
        writer.write_image_data(&packed).map_err(to_err)?;
        writer.finish().map_err(to_err)
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("image must be at least 1x1".into()));
    }
    if len != width * height {
        return Err(Error::InvalidParameter(format!(
            "buffer of {len} pixels does not match {width}x{height}"
        )));
    }
    Ok(())
}

/// Reads a PNG, JPEG or BMP file and derives its grayscale raster.
pub fn load_leaf_image(path: &Path) -> Result<(RgbImage, GrayImage)> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_leaf_image(&bytes, path)
}

/// Decodes in-memory file contents; `path` is only used in error messages.
pub fn decode_leaf_image(bytes: &[u8], path: &Path) -> Result<(RgbImage, GrayImage)> {
    let img = image::load_from_memory(bytes)
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img.pixels().map(|p| p.0).collect();
    let rgb = RgbImage::new(w, h, pixels)?;
    let gray = rgb.to_gray();
    Ok((rgb, gray))
}

/// Which side of the global threshold is the leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Class touching fewer border pixels; ties go to the darker class.
    #[default]
    Auto,
    Dark,
    Light,
}

/// Otsu's threshold over a 256-bin histogram.
///
/// Returns `t` such that values `<= t` form the lower class, or `None` when
/// fewer than two distinct values are present. Ties pick the smallest `t`.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    let distinct = hist.iter().filter(|&&c| c > 0).count();
    if total == 0 || distinct < 2 {
        return None;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    let mut best = (f64::NEG_INFINITY, 0u8);
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total_f - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best.0 {
            best = (between, t as u8);
        }
    }
    Some(best.1)
}

pub fn histogram<'a>(values: impl IntoIterator<Item = &'a u8>) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in values {
        hist[v as usize] += 1;
    }
    hist
}

/// Separates the leaf from a plain background with a global Otsu threshold,
/// keeps the largest 4-connected component and fills its holes.
pub fn segment_leaf(gray: &GrayImage) -> Result<LeafMask> {
    segment_leaf_with(gray, Polarity::Auto)
}

pub fn segment_leaf_with(gray: &GrayImage, polarity: Polarity) -> Result<LeafMask> {
    let (w, h) = gray.dims();
    let t = otsu_threshold(&histogram(gray.as_slice())).ok_or(Error::NoForeground)?;

    let leaf_is_dark = match polarity {
        Polarity::Dark => true,
        Polarity::Light => false,
        Polarity::Auto => {
            let (mut dark_border, mut light_border) = (0usize, 0usize);
            for y in 0..h {
                for x in 0..w {
                    if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                        if gray.get(x, y) <= t {
                            dark_border += 1;
                        } else {
                            light_border += 1;
                        }
                    }
                }
            }
            dark_border <= light_border
        }
    };

    let fg: Vec<bool> = gray
        .as_slice()
        .iter()
        .map(|&v| (v <= t) == leaf_is_dark)
        .collect();
    let mut data = largest_component(&fg, w, h).ok_or(Error::NoForeground)?;
    fill_holes(&mut data, w, h);
    Ok(LeafMask {
        width: w,
        height: h,
        data,
    })
}

const N4: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Labels 4-connected components; returns the label per pixel (0 = none)
/// and the size of each label (index 0 unused).
fn label_components(fg: &[bool], w: usize, h: usize) -> (Vec<u32>, Vec<usize>) {
    let mut labels = vec![0u32; w * h];
    let mut sizes = vec![0usize];
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !fg[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32;
        let mut size = 0;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in N4 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if fg[j] && labels[j] == 0 {
                    labels[j] = label;
                    stack.push(j);
                }
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

fn component_count(fg: &[bool], w: usize, h: usize) -> usize {
    label_components(fg, w, h).1.len() - 1
}

/// Largest component; ties keep the one met first in raster order.
fn largest_component(fg: &[bool], w: usize, h: usize) -> Option<Vec<bool>> {
    let (labels, sizes) = label_components(fg, w, h);
    let mut best: Option<(usize, usize)> = None;
    for (label, &size) in sizes.iter().enumerate().skip(1) {
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((label, size));
        }
    }
    let (keep, _) = best?;
    Some(labels.iter().map(|&l| l as usize == keep).collect())
}

/// Marks background pixels 4-reachable from the image border.
fn outside_background(fg: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                let i = y * w + x;
                if !fg[i] && !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for (dx, dy) in N4 {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if !fg[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

fn fill_holes(fg: &mut [bool], w: usize, h: usize) {
    let outside = outside_background(fg, w, h);
    for (f, o) in fg.iter_mut().zip(outside) {
        if !*f && !o {
            *f = true;
        }
    }
}

fn background_reaches_border(fg: &[bool], w: usize, h: usize) -> bool {
    let outside = outside_background(fg, w, h);
    fg.iter().zip(outside).all(|(&f, o)| f || o)
}

/// Closed, clockwise boundary of a leaf mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    points: Vec<(usize, usize)>,
}

impl Contour {
    pub fn points(&self) -> &[(usize, usize)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Perimeter as the number of traced boundary points.
    pub fn perimeter(&self) -> f64 {
        self.points.len() as f64
    }

    /// Closed chain-code length: 1 per axial step, sqrt(2) per diagonal step.
    pub fn chain_length(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                if a.0 != b.0 && a.1 != b.1 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                }
            })
            .sum()
    }
}

/// Moore neighbourhood in clockwise order (y grows downward), starting east.
const MOORE: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn moore_index(dx: i64, dy: i64) -> usize {
    MOORE
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("offset is a Moore neighbour")
}

/// Moore-neighbour boundary tracing, clockwise, from the topmost-then-leftmost
/// leaf pixel. Stops when the first transition repeats (Jacob's criterion).
pub fn trace_contour(mask: &LeafMask) -> Contour {
    let start = mask.pixels().next().expect("mask is nonempty");
    let start_i = (start.0 as i64, start.1 as i64);

    // Entered from the west: the west neighbour is background.
    let mut p = start_i;
    let mut back = moore_index(-1, 0);
    let mut first_step: Option<(i64, i64)> = None;
    let mut points = vec![start];
    let limit = 4 * mask.area() + 8;

    for _ in 0..limit {
        let mut next = None;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let q = (p.0 + MOORE[d].0, p.1 + MOORE[d].1);
            if mask.get_signed(q.0, q.1) {
                let prev = MOORE[(d + 7) % 8];
                let b = (p.0 + prev.0, p.1 + prev.1);
                next = Some((q, moore_index(b.0 - q.0, b.1 - q.1)));
                break;
            }
        }
        let Some((q, new_back)) = next else {
            // isolated pixel
            break;
        };
        if p == start_i {
            match first_step {
                Some(s) if s == q => {
                    points.pop();
                    break;
                }
                None => first_step = Some(q),
                _ => {}
            }
        }
        points.push((q.0 as usize, q.1 as usize));
        p = q;
        back = new_back;
    }
    if points.is_empty() {
        points.push(start);
    }
    Contour { points }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
}

pub fn centroid(mask: &LeafMask) -> Centroid {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in mask.pixels() {
        sx += x as f64;
        sy += y as f64;
        n += 1;
    }
    Centroid {
        x: sx / n as f64,
        y: sy / n as f64,
    }
}

/// Largest contour-point distance to the centroid.
pub fn max_radius(contour: &Contour, c: Centroid) -> f64 {
    contour
        .points()
        .iter()
        .map(|&(x, y)| (x as f64 - c.x).hypot(y as f64 - c.y))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(w: usize, h: usize, f: impl FnMut(usize, usize) -> bool) -> LeafMask {
        LeafMask::from_fn(w, h, f).unwrap()
    }

    #[test]
    fn luminance_examples() {
        assert_eq!(luminance([255, 255, 255]), 255);
        assert_eq!(luminance([0, 0, 0]), 0);
        assert_eq!(luminance([100, 150, 200]), 141);
    }

    #[test]
    fn load_reports_missing_and_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.png");
        assert!(matches!(load_leaf_image(&missing), Err(Error::FileNotFound(_))));

        let bad = dir.path().join("bad.png");
        std::fs::write(&bad, b"definitely not an image").unwrap();
        assert!(matches!(load_leaf_image(&bad), Err(Error::Decode { .. })));
    }

    #[test]
    fn load_converts_to_gray() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("px.png");
        let img = image::RgbImage::from_raw(2, 1, vec![100, 150, 200, 255, 255, 255]).unwrap();
        img.save(&path).unwrap();
        let (rgb, gray) = load_leaf_image(&path).unwrap();
        assert_eq!(rgb.get(0, 0), [100, 150, 200]);
        assert_eq!(gray.as_slice(), &[141, 255]);
    }

    #[test]
    fn constant_image_has_no_foreground() {
        let g = GrayImage::from_fn(10, 10, |_, _| 128);
        assert!(matches!(segment_leaf(&g), Err(Error::NoForeground)));
    }

    #[test]
    fn segments_central_square() {
        let g = GrayImage::from_fn(50, 50, |x, y| {
            if (15..35).contains(&x) && (15..35).contains(&y) {
                40
            } else {
                220
            }
        });
        let t = otsu_threshold(&histogram(g.as_slice())).unwrap();
        assert!((40..220).contains(&t));
        let m = segment_leaf(&g).unwrap();
        assert_eq!(m.area(), 400);
        for (x, y) in m.pixels() {
            assert!((15..35).contains(&x) && (15..35).contains(&y));
        }
    }

    #[test]
    fn keeps_largest_blob_only() {
        // 15x20 = 300 and 5x10 = 50
        let g = GrayImage::from_fn(60, 40, |x, y| {
            let big = (5..20).contains(&x) && (5..25).contains(&y);
            let small = (40..45).contains(&x) && (10..20).contains(&y);
            if big || small {
                30
            } else {
                200
            }
        });
        let m = segment_leaf(&g).unwrap();
        assert_eq!(m.area(), 300);
        assert!(m.pixels().all(|(x, _)| x < 20));
    }

    #[test]
    fn fills_specular_holes() {
        let g = GrayImage::from_fn(40, 40, |x, y| {
            let inside = (10..30).contains(&x) && (10..30).contains(&y);
            let hole = (18..21).contains(&x) && (18..21).contains(&y);
            if inside && !hole {
                50
            } else {
                210
            }
        });
        let m = segment_leaf(&g).unwrap();
        assert_eq!(m.area(), 400);
    }

    #[test]
    fn light_leaf_on_dark_background_uses_border_rule() {
        let g = GrayImage::from_fn(30, 30, |x, y| {
            if (5..25).contains(&x) && (8..20).contains(&y) {
                230
            } else {
                20
            }
        });
        let m = segment_leaf(&g).unwrap();
        assert_eq!(m.area(), 20 * 12);
        let forced = segment_leaf_with(&g, Polarity::Dark).unwrap();
        assert!(forced.area() > 240);
    }

    #[test]
    fn mask_constructor_rejects_holes_and_multiple_components() {
        let holey = LeafMask::from_fn(5, 5, |x, y| (x, y) != (2, 2) && (1..4).contains(&x) && (1..4).contains(&y));
        assert!(holey.is_err());
        let split = LeafMask::from_fn(5, 1, |x, _| x != 2);
        assert!(split.is_err());
        assert!(matches!(LeafMask::from_fn(3, 3, |_, _| false), Err(Error::NoForeground)));
    }

    #[test]
    fn single_pixel_contour() {
        let m = mask(5, 5, |x, y| (x, y) == (3, 1));
        let c = trace_contour(&m);
        assert_eq!(c.points(), &[(3, 1)]);
        assert_eq!(c.perimeter(), 1.0);
    }

    #[test]
    fn square_contour_is_clockwise_ring() {
        let m = mask(5, 5, |x, y| (1..4).contains(&x) && (1..4).contains(&y));
        let c = trace_contour(&m);
        assert_eq!(
            c.points(),
            &[(1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)]
        );
    }

    #[test]
    fn two_pixel_contour() {
        let m = mask(4, 3, |x, y| y == 1 && (1..3).contains(&x));
        assert_eq!(trace_contour(&m).points(), &[(1, 1), (2, 1)]);
    }

    #[test]
    fn thin_line_revisits_pixels() {
        let m = mask(6, 3, |x, y| y == 1 && (1..5).contains(&x));
        let c = trace_contour(&m);
        assert_eq!(c.points(), &[(1, 1), (2, 1), (3, 1), (4, 1), (3, 1), (2, 1)]);
    }

    #[test]
    fn centroid_examples() {
        let m = mask(6, 8, |x, y| (x, y) == (3, 5));
        assert_eq!(centroid(&m), Centroid { x: 3.0, y: 5.0 });
        let m = mask(4, 4, |x, y| x < 2 && y < 2);
        assert_eq!(centroid(&m), Centroid { x: 0.5, y: 0.5 });
        // L pentomino: (0,0),(0,1),(0,2),(0,3),(1,3)
        let cells = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 3)];
        let m = mask(3, 5, |x, y| cells.contains(&(x, y)));
        let c = centroid(&m);
        assert!((c.x - 0.2).abs() < 1e-12);
        assert!((c.y - 1.8).abs() < 1e-12);
    }

    #[test]
    fn square_max_radius_is_corner_distance() {
        let w = 5;
        let m = mask(21, 21, |x, y| (5..=15).contains(&x) && (5..=15).contains(&y));
        let c = centroid(&m);
        let r = max_radius(&trace_contour(&m), c);
        assert!((r - (w as f64) * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mask_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let m = mask(13, 7, |x, y| (2..11).contains(&x) && (1..6).contains(&y) && x < y + 8);
        m.save_png(&path).unwrap();
        let back = image::open(&path).unwrap().to_luma8();
        assert_eq!((back.width(), back.height()), (13, 7));
        for (x, y, p) in back.enumerate_pixels() {
            assert_eq!(p.0[0] > 0, m.get(x as usize, y as usize));
        }
        let decoder = png::Decoder::new(std::io::BufReader::new(File::open(&path).unwrap()));
        let reader = decoder.read_info().unwrap();
        assert_eq!(reader.info().bit_depth, png::BitDepth::One);
    }

    #[test]
    fn rotate90_maps_pixels() {
        let g = GrayImage::from_fn(3, 2, |x, y| (10 * y + x) as u8);
        let r = g.rotate90();
        assert_eq!(r.dims(), (2, 3));
        // top row of the rotated image is the left column read bottom-up
        assert_eq!(r.get(0, 0), 10);
        assert_eq!(r.get(1, 0), 0);
        assert_eq!(r.get(0, 2), 12);
    }
}
