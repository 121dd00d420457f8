//! Feature groups, named configurations and per-leaf extraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::color::{color_moments, ColorMoments};
use crate::error::{Error, Result};
use crate::imaging::{
    centroid, max_radius, segment_leaf_with, trace_contour, Centroid, Contour, GrayImage, LeafMask, Polarity,
    RgbImage,
};
use crate::shape::{geometric_features, polar_fourier_descriptors, GeometricFeatures, PftParams};
use crate::texture::{averaged_texture_features, TextureFeatures, TextureParams};
use crate::vein::{vein_features, VeinFeatures, VeinParams};

/// One selectable block of the feature vector. Variant order is the
/// concatenation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureGroup {
    Pft,
    Geom,
    ColorMean,
    ColorStd,
    ColorSkew,
    ColorKurt,
    Glcm,
    /// First `k` vein ratios, `1 <= k <= 4`.
    Vein(u8),
}

impl FeatureGroup {
    pub fn name(&self) -> String {
        match self {
            FeatureGroup::Pft => "pft".into(),
            FeatureGroup::Geom => "geom".into(),
            FeatureGroup::ColorMean => "mean".into(),
            FeatureGroup::ColorStd => "std".into(),
            FeatureGroup::ColorSkew => "skew".into(),
            FeatureGroup::ColorKurt => "kurt".into(),
            FeatureGroup::Glcm => "glcm".into(),
            FeatureGroup::Vein(k) => format!("vein{k}"),
        }
    }

    /// Vector length contributed by the group, given the PFT length.
    pub fn len(&self, pft_len: usize) -> usize {
        match self {
            FeatureGroup::Pft => pft_len,
            FeatureGroup::Geom
            | FeatureGroup::ColorMean
            | FeatureGroup::ColorStd
            | FeatureGroup::ColorSkew
            | FeatureGroup::ColorKurt => 3,
            FeatureGroup::Glcm => 5,
            FeatureGroup::Vein(k) => *k as usize,
        }
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "pft" => FeatureGroup::Pft,
            "geom" => FeatureGroup::Geom,
            "mean" => FeatureGroup::ColorMean,
            "std" => FeatureGroup::ColorStd,
            "skew" => FeatureGroup::ColorSkew,
            "kurt" => FeatureGroup::ColorKurt,
            "glcm" => FeatureGroup::Glcm,
            "vein" => FeatureGroup::Vein(4),
            _ => match t.strip_prefix("vein").and_then(|k| k.parse::<u8>().ok()) {
                Some(k @ 1..=4) => FeatureGroup::Vein(k),
                _ => return Err(Error::UnknownFeatureGroup(s.to_owned())),
            },
        })
    }
}

/// Nonempty ordered selection of feature groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureConfig {
    groups: Vec<FeatureGroup>,
}

impl FeatureConfig {
    pub fn new(mut groups: Vec<FeatureGroup>) -> Result<Self> {
        groups.sort();
        groups.dedup();
        if groups.is_empty() {
            return Err(Error::InvalidParameter("feature configuration is empty".into()));
        }
        if groups.iter().filter(|g| matches!(g, FeatureGroup::Vein(_))).count() > 1 {
            return Err(Error::InvalidParameter("at most one vein group may be selected".into()));
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.groups
    }

    pub fn contains(&self, group: FeatureGroup) -> bool {
        self.groups.contains(&group)
    }

    pub fn dimension(&self, pft_len: usize) -> usize {
        self.groups.iter().map(|g| g.len(pft_len)).sum()
    }

    pub fn with(&self, group: FeatureGroup) -> Self {
        let mut groups = self.groups.clone();
        groups.push(group);
        Self::new(groups).expect("nonempty")
    }

    /// Shape, geometry, mean, std, skewness and three vein ratios.
    pub fn best_flavia() -> Self {
        use FeatureGroup::*;
        Self::new(vec![Pft, Geom, ColorMean, ColorStd, ColorSkew, Vein(3)]).unwrap()
    }

    /// Shape, geometry, mean, std, skewness and one vein ratio.
    pub fn best_foliage() -> Self {
        use FeatureGroup::*;
        Self::new(vec![Pft, Geom, ColorMean, ColorStd, ColorSkew, Vein(1)]).unwrap()
    }

    /// Every group, four vein ratios.
    pub fn full() -> Self {
        use FeatureGroup::*;
        Self::new(vec![Pft, Geom, ColorMean, ColorStd, ColorSkew, ColorKurt, Glcm, Vein(4)]).unwrap()
    }

    /// The twelve ablation rows, in reporting order.
    pub fn table2() -> Vec<Self> {
        use FeatureGroup::*;
        let rows: [&[FeatureGroup]; 12] = [
            &[Pft],
            &[Pft, Geom],
            &[Pft, Geom, ColorMean],
            &[Pft, Geom, ColorMean, ColorStd],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew, ColorKurt],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew, ColorKurt, Glcm],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew, Glcm],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew, Vein(1)],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew, Vein(2)],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew, Vein(3)],
            &[Pft, Geom, ColorMean, ColorStd, ColorSkew, Vein(4)],
        ];
        rows.iter().map(|r| Self::new(r.to_vec()).unwrap()).collect()
    }

    /// Expands a preset name or a list of configs separated by `,`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        if s.trim() == "table2" {
            return Ok(Self::table2());
        }
        s.split(',').map(str::parse).collect()
    }
}

impl FromStr for FeatureConfig {
    type Err = Error;

    /// Accepts `best-flavia`, `best-foliage`, `full`, or groups joined by `+`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "best-flavia" => Ok(Self::best_flavia()),
            "best-foliage" => Ok(Self::best_foliage()),
            "full" => Ok(Self::full()),
            other => Self::new(other.split('+').map(str::parse).collect::<Result<_>>()?),
        }
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.groups.iter().map(FeatureGroup::name).collect();
        f.write_str(&names.join("+"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtractionSettings {
    pub polarity: Polarity,
    pub pft: PftParams,
    /// Color moments over the whole raster instead of the leaf.
    pub color_whole_image: bool,
    pub texture: TextureParams,
    pub vein: VeinParams,
}

impl ExtractionSettings {
    /// Stable digest of the settings, used to key feature caches.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("settings serialize");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

/// A segmented leaf with the boundary geometry every extractor shares.
#[derive(Debug, Clone)]
pub struct LeafImage {
    pub rgb: RgbImage,
    pub gray: GrayImage,
    pub mask: LeafMask,
    pub contour: Contour,
    pub centroid: Centroid,
    pub max_radius: f64,
}

impl LeafImage {
    pub fn prepare(rgb: RgbImage, polarity: Polarity) -> Result<Self> {
        let gray = rgb.to_gray();
        let mask = segment_leaf_with(&gray, polarity)?;
        let contour = trace_contour(&mask);
        let c = centroid(&mask);
        let r = max_radius(&contour, c);
        Ok(Self {
            rgb,
            gray,
            mask,
            contour,
            centroid: c,
            max_radius: r,
        })
    }
}

/// Every feature group computed for one leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafFeatures {
    pub pft: Vec<f64>,
    pub geom: GeometricFeatures,
    pub color: ColorMoments,
    pub texture: TextureFeatures,
    pub vein: VeinFeatures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub config: FeatureConfig,
    pub values: Vec<f64>,
}

pub fn extract_features(leaf: &LeafImage, settings: &ExtractionSettings) -> Result<LeafFeatures> {
    let pft = polar_fourier_descriptors(&leaf.gray, &leaf.mask, leaf.centroid, leaf.max_radius, settings.pft)?;
    let geom = geometric_features(&leaf.mask, &leaf.contour, leaf.centroid)?;
    let color = color_moments(&leaf.rgb, &leaf.mask, settings.color_whole_image)?;
    let texture = averaged_texture_features(&leaf.gray, &leaf.mask, &settings.texture)?;
    let vein = vein_features(&leaf.gray, &leaf.mask, &settings.vein)?;
    Ok(LeafFeatures {
        pft: pft.values,
        geom,
        color,
        texture,
        vein,
    })
}

/// Segments and extracts in one step.
pub fn extract_from_rgb(rgb: RgbImage, settings: &ExtractionSettings) -> Result<LeafFeatures> {
    let leaf = LeafImage::prepare(rgb, settings.polarity)?;
    extract_features(&leaf, settings)
}

impl LeafFeatures {
    /// Values of one group.
    pub fn group(&self, group: FeatureGroup) -> Vec<f64> {
        match group {
            FeatureGroup::Pft => self.pft.clone(),
            FeatureGroup::Geom => self.geom.to_array().to_vec(),
            FeatureGroup::ColorMean => self.color.means().to_vec(),
            FeatureGroup::ColorStd => self.color.stds().to_vec(),
            FeatureGroup::ColorSkew => self.color.skewnesses().to_vec(),
            FeatureGroup::ColorKurt => self.color.kurtoses().to_vec(),
            FeatureGroup::Glcm => self.texture.to_array().to_vec(),
            FeatureGroup::Vein(k) => self.vein.ratios[..k as usize].to_vec(),
        }
    }

    /// Concatenates the selected groups in canonical order.
    pub fn assemble(&self, config: &FeatureConfig) -> Result<FeatureVector> {
        let mut values = Vec::with_capacity(config.dimension(self.pft.len()));
        for &g in config.groups() {
            values.extend(self.group(g));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("feature {bad} is not finite")));
        }
        Ok(FeatureVector {
            config: config.clone(),
            values,
        })
    }
}
