//! Gray-level co-occurrence matrices and the five Haralick-style statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{GrayImage, LeafMask};

/// Marks pixels outside the leaf in a [`QuantizedImage`].
pub const BACKGROUND: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    data: Vec<u8>,
}

impl QuantizedImage {
    /// Builds directly from level values; `BACKGROUND` entries are skipped in pair counting.
    pub fn from_levels(width: usize, height: usize, levels: usize, data: Vec<u8>) -> Result<Self> {
        check_levels(levels)?;
        if data.len() != width * height || width == 0 || height == 0 {
            return Err(Error::InvalidParameter("level buffer does not match dimensions".into()));
        }
        if data.iter().any(|&v| v != BACKGROUND && v as usize >= levels) {
            return Err(Error::InvalidParameter("level out of range".into()));
        }
        Ok(Self {
            width,
            height,
            levels,
            data,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u8> {
        let v = self.data[y * self.width + x];
        (v != BACKGROUND).then_some(v)
    }

    fn get_signed(&self, x: i64, y: i64) -> Option<u8> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return None;
        }
        self.get(x as usize, y as usize)
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if !(2..=255).contains(&levels) {
        return Err(Error::InvalidParameter(format!(
            "gray level count must be in 2..=255, got {levels}"
        )));
    }
    Ok(())
}

/// Uniform binning `floor(v * levels / 256)`; pixels outside the mask become [`BACKGROUND`].
pub fn quantize(gray: &GrayImage, mask: &LeafMask, levels: usize) -> Result<QuantizedImage> {
    check_levels(levels)?;
    if gray.dims() != mask.dims() {
        return Err(Error::SizeMismatch {
            expected: mask.dims(),
            found: gray.dims(),
        });
    }
    let data = gray
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .map(|(&v, &inside)| {
            if inside {
                quantize_level(v, levels)
            } else {
                BACKGROUND
            }
        })
        .collect();
    Ok(QuantizedImage {
        width: gray.width(),
        height: gray.height(),
        levels,
        data,
    })
}

pub fn quantize_level(v: u8, levels: usize) -> u8 {
    ((v as usize * levels / 256).min(levels - 1)) as u8
}

/// Pixel offset direction, counter-clockwise from east. Image rows grow
/// downward, so 90 degrees points to the row above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
    Deg180,
    Deg225,
    Deg270,
    Deg315,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
        Direction::Deg180,
        Direction::Deg225,
        Direction::Deg270,
        Direction::Deg315,
    ];

    pub const HALF: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    /// `(dx, dy)` unit step.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, -1),
            Direction::Deg90 => (0, -1),
            Direction::Deg135 => (-1, -1),
            Direction::Deg180 => (-1, 0),
            Direction::Deg225 => (-1, 1),
            Direction::Deg270 => (0, 1),
            Direction::Deg315 => (1, 1),
        }
    }

    pub fn opposite(self) -> Direction {
        let i = Self::ALL.iter().position(|&d| d == self).unwrap();
        Self::ALL[(i + 4) % 8]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlcmState {
    Raw,
    Symmetric,
    Normalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    entries: Vec<f64>,
    state: GlcmState,
    direction: Direction,
    distance: usize,
}

impl Glcm {
    /// Wraps a row-major count matrix as a raw GLCM.
    pub fn from_counts(levels: usize, counts: Vec<f64>, direction: Direction, distance: usize) -> Result<Self> {
        check_levels(levels)?;
        if counts.len() != levels * levels {
            return Err(Error::InvalidParameter("count matrix must be levels x levels".into()));
        }
        if counts.iter().any(|&c| c.is_nan() || c < 0.0 || c.fract() != 0.0) {
            return Err(Error::InvalidParameter("raw counts must be nonnegative integers".into()));
        }
        Ok(Self {
            levels,
            entries: counts,
            state: GlcmState::Raw,
            direction,
            distance,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn state(&self) -> GlcmState {
        self.state
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.levels + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// `G + G^T`, still unnormalized.
    pub fn symmetrize(&self) -> Glcm {
        let l = self.levels;
        let mut entries = vec![0.0; l * l];
        for i in 0..l {
            for j in 0..l {
                entries[i * l + j] = self.get(i, j) + self.get(j, i);
            }
        }
        Glcm {
            entries,
            state: GlcmState::Symmetric,
            ..self.clone()
        }
    }

    pub fn normalize(&self) -> Result<Glcm> {
        let total = self.total();
        if total == 0.0 {
            return Err(Error::EmptyGlcm);
        }
        Ok(Glcm {
            entries: self.entries.iter().map(|v| v / total).collect(),
            state: GlcmState::Normalized,
            ..self.clone()
        })
    }
}

/// Counts ordered pairs `(p, p + distance * offset)` with both pixels inside the leaf.
pub fn build_glcm(q: &QuantizedImage, direction: Direction, distance: usize) -> Result<Glcm> {
    if distance == 0 {
        return Err(Error::InvalidParameter("co-occurrence distance must be >= 1".into()));
    }
    let l = q.levels;
    let (dx, dy) = direction.offset();
    let (dx, dy) = (dx * distance as i64, dy * distance as i64);
    let mut entries = vec![0.0; l * l];
    let mut pairs = 0usize;
    for y in 0..q.height {
        for x in 0..q.width {
            let Some(a) = q.get(x, y) else { continue };
            let Some(b) = q.get_signed(x as i64 + dx, y as i64 + dy) else { continue };
            entries[a as usize * l + b as usize] += 1.0;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::EmptyGlcm);
    }
    Ok(Glcm {
        levels: l,
        entries,
        state: GlcmState::Raw,
        direction,
        distance,
    })
}

/// `(G + G^T) / sum(G + G^T)`.
pub fn symmetrize_normalize(g: &Glcm) -> Result<Glcm> {
    if g.state != GlcmState::Raw {
        return Err(Error::InvalidParameter("expected a raw co-occurrence matrix".into()));
    }
    g.symmetrize().normalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationForm {
    /// `sum (i j) (g(i,j) - mu_i mu_j) / (sigma_i sigma_j)`
    #[default]
    Printed,
    /// `sum (i j g(i,j) - mu_i mu_j) / (sigma_i sigma_j)`
    Haralick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureParams {
    pub levels: usize,
    pub distance: usize,
    /// Square the GLCM entry in the inverse difference moment numerator.
    pub idm_squared: bool,
    pub correlation: CorrelationForm,
}

impl Default for TextureParams {
    fn default() -> Self {
        Self {
            levels: 8,
            distance: 1,
            idm_squared: true,
            correlation: CorrelationForm::Printed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TextureFeatures {
    pub asm: f64,
    pub contrast: f64,
    pub idm: f64,
    pub entropy: f64,
    pub correlation: f64,
}

impl TextureFeatures {
    pub fn to_array(&self) -> [f64; 5] {
        [self.asm, self.contrast, self.idm, self.entropy, self.correlation]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Self {
            asm: a[0],
            contrast: a[1],
            idm: a[2],
            entropy: a[3],
            correlation: a[4],
        }
    }
}

pub fn haralick_features(g: &Glcm, params: &TextureParams) -> Result<TextureFeatures> {
    if g.state != GlcmState::Normalized {
        return Err(Error::InvalidParameter("expected a normalized co-occurrence matrix".into()));
    }
    let l = g.levels;
    let (mut asm, mut contrast, mut idm, mut entropy) = (0.0, 0.0, 0.0, 0.0);
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let p = g.get(i, j);
            let diff = i as f64 - j as f64;
            asm += p * p;
            contrast += diff * diff * p;
            let num = if params.idm_squared { p * p } else { p };
            idm += num / (1.0 + diff * diff);
            if p > 0.0 {
                entropy -= p * p.ln();
            }
            mu_i += i as f64 * p;
            mu_j += j as f64 * p;
        }
    }
    let (mut var_i, mut var_j) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let p = g.get(i, j);
            var_i += p * (i as f64 - mu_i).powi(2);
            var_j += p * (j as f64 - mu_j).powi(2);
        }
    }
    let spread = var_i.sqrt() * var_j.sqrt();
    let correlation = if spread < 1e-12 {
        0.0
    } else {
        let mut acc = 0.0;
        for i in 0..l {
            for j in 0..l {
                let p = g.get(i, j);
                let ij = (i * j) as f64;
                acc += match params.correlation {
                    CorrelationForm::Printed => ij * (p - mu_i * mu_j),
                    CorrelationForm::Haralick => ij * p,
                };
            }
        }
        if params.correlation == CorrelationForm::Haralick {
            acc -= mu_i * mu_j;
        }
        acc / spread
    };
    Ok(TextureFeatures {
        asm,
        contrast,
        idm,
        entropy: entropy.max(0.0),
        correlation,
    })
}

/// Haralick features averaged over the given directions; directions whose
/// co-occurrence matrix is empty are skipped.
pub fn directional_average(
    gray: &GrayImage,
    mask: &LeafMask,
    params: &TextureParams,
    directions: &[Direction],
) -> Result<TextureFeatures> {
    let q = quantize(gray, mask, params.levels)?;
    let mut sum = [0.0; 5];
    let mut used = 0usize;
    for &dir in directions {
        let raw = match build_glcm(&q, dir, params.distance) {
            Ok(g) => g,
            Err(Error::EmptyGlcm) => continue,
            Err(e) => return Err(e),
        };
        let f = haralick_features(&symmetrize_normalize(&raw)?, params)?.to_array();
        for (s, v) in sum.iter_mut().zip(f) {
            *s += v;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::AllDirectionsEmpty);
    }
    Ok(TextureFeatures::from_array(sum.map(|s| s / used as f64)))
}

/// Mean of the Haralick features over all eight compass directions.
pub fn averaged_texture_features(gray: &GrayImage, mask: &LeafMask, params: &TextureParams) -> Result<TextureFeatures> {
    directional_average(gray, mask, params, &Direction::ALL)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RAW: [f64; 16] = [2., 2., 1., 0., 0., 2., 0., 0., 0., 0., 3., 1., 0., 0., 0., 1.];
    const SYM: [f64; 16] = [4., 2., 1., 0., 2., 4., 0., 0., 1., 0., 6., 1., 0., 0., 1., 2.];

    fn worked_example() -> QuantizedImage {
        QuantizedImage::from_levels(4, 4, 4, vec![0, 0, 1, 1, 0, 0, 1, 1, 0, 2, 2, 2, 2, 2, 3, 3]).unwrap()
    }

    #[test]
    fn quantize_levels() {
        assert_eq!(quantize_level(0, 8), 0);
        assert_eq!(quantize_level(255, 8), 7);
        assert_eq!(quantize_level(128, 8), 4);
        assert_eq!(quantize_level(31, 8), 0);
        assert_eq!(quantize_level(32, 8), 1);
    }

    #[test]
    fn quantize_marks_background() {
        let g = GrayImage::from_fn(3, 1, |x, _| (x * 100) as u8);
        let m = LeafMask::from_fn(3, 1, |x, _| x < 2).unwrap();
        let q = quantize(&g, &m, 8).unwrap();
        assert_eq!(q.get(0, 0), Some(0));
        assert_eq!(q.get(1, 0), Some(3));
        assert_eq!(q.get(2, 0), None);
        assert!(quantize(&g, &m, 1).is_err());
    }

    #[test]
    fn worked_example_raw_matrix() {
        let g = build_glcm(&worked_example(), Direction::Deg0, 1).unwrap();
        assert_eq!(g.entries(), &RAW);
        assert_eq!(g.state(), GlcmState::Raw);
    }

    #[test]
    fn worked_example_symmetric_and_normalized() {
        let raw = Glcm::from_counts(4, RAW.to_vec(), Direction::Deg0, 1).unwrap();
        assert_eq!(raw.symmetrize().entries(), &SYM);
        let n = symmetrize_normalize(&raw).unwrap();
        for (v, s) in n.entries().iter().zip(SYM) {
            assert!((v - s / 24.0).abs() <= 1e-12);
        }
        assert!((n.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_level_image() {
        let q = QuantizedImage::from_levels(5, 4, 8, vec![3; 20]).unwrap();
        let g = build_glcm(&q, Direction::Deg0, 1).unwrap();
        let nonzero: Vec<_> = (0..64).filter(|&k| g.entries()[k] > 0.0).collect();
        assert_eq!(nonzero, vec![3 * 8 + 3]);
    }

    #[test]
    fn alternating_row() {
        let q = QuantizedImage::from_levels(4, 1, 2, vec![0, 1, 0, 1]).unwrap();
        let g = build_glcm(&q, Direction::Deg0, 1).unwrap();
        assert_eq!(g.entries(), &[0.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn thin_mask_gives_empty_glcm() {
        let q = QuantizedImage::from_levels(3, 1, 2, vec![0, 1, 0]).unwrap();
        assert!(matches!(build_glcm(&q, Direction::Deg90, 1), Err(Error::EmptyGlcm)));
        let g = GrayImage::from_fn(3, 1, |_, _| 10);
        let m = LeafMask::from_fn(3, 1, |x, _| x == 1).unwrap();
        assert!(matches!(
            averaged_texture_features(&g, &m, &TextureParams::default()),
            Err(Error::AllDirectionsEmpty)
        ));
    }

    #[test]
    fn diagonal_raw_is_fixed_point() {
        let raw = Glcm::from_counts(3, vec![2., 0., 0., 0., 5., 0., 0., 0., 1.], Direction::Deg0, 1).unwrap();
        let n = symmetrize_normalize(&raw).unwrap();
        let direct = raw.normalize().unwrap();
        assert_eq!(n.entries(), direct.entries());
    }

    #[test]
    fn single_cell_features() {
        let raw = Glcm::from_counts(4, {
            let mut v = vec![0.0; 16];
            v[5] = 7.0;
            v
        }, Direction::Deg0, 1)
        .unwrap();
        let f = haralick_features(&symmetrize_normalize(&raw).unwrap(), &TextureParams::default()).unwrap();
        assert_eq!(f.asm, 1.0);
        assert_eq!(f.contrast, 0.0);
        assert_eq!(f.idm, 1.0);
        assert_eq!(f.entropy, 0.0);
        assert_eq!(f.correlation, 0.0);
    }

    #[test]
    fn worked_example_asm_and_contrast() {
        let raw = Glcm::from_counts(4, RAW.to_vec(), Direction::Deg0, 1).unwrap();
        let n = symmetrize_normalize(&raw).unwrap();
        let f = haralick_features(&n, &TextureParams::default()).unwrap();
        assert!((f.asm - 84.0 / 576.0).abs() < 1e-15);
        // (0-1)^2 * 2 * 2 + (0-2)^2 * 1 * 2 + (2-3)^2 * 1 * 2 = 4 + 8 + 2, over 24
        assert!((f.contrast - 14.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_wrong_state() {
        let raw = Glcm::from_counts(2, vec![1., 0., 0., 1.], Direction::Deg0, 1).unwrap();
        assert!(haralick_features(&raw, &TextureParams::default()).is_err());
        let n = symmetrize_normalize(&raw).unwrap();
        assert!(symmetrize_normalize(&n).is_err());
        assert!(Glcm::from_counts(2, vec![1.5, 0., 0., 1.], Direction::Deg0, 1).is_err());
    }

    #[test]
    fn opposite_directions() {
        for d in Direction::ALL {
            let (dx, dy) = d.offset();
            assert_eq!(d.opposite().offset(), (-dx, -dy));
        }
    }
}
