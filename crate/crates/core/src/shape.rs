//! Polar Fourier shape descriptors and geometric ratios.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Centroid, Contour, GrayImage, LeafMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PftParams {
    /// Highest radial frequency.
    pub radial: usize,
    /// Highest angular frequency.
    pub angular: usize,
    /// Zero the intensity of pixels outside the leaf.
    pub masked: bool,
}

impl Default for PftParams {
    fn default() -> Self {
        Self {
            radial: 4,
            angular: 6,
            masked: true,
        }
    }
}

impl PftParams {
    pub fn len(&self) -> usize {
        (self.radial + 1) * (self.angular + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PftDescriptor {
    pub radial: usize,
    pub angular: usize,
    pub values: Vec<f64>,
}

/// Polar Fourier transform of the leaf about its centroid.
///
/// Coefficient `(rho, phi)` accumulates `I(x, y) * exp(-i (2 pi rho r / r_max + phi theta))`
/// over the image, with `theta` in `[0, 2 pi)`. The descriptor stores the DC
/// magnitude over `pi r_max^2` first, then every other magnitude over the DC
/// magnitude, in row-major `(rho, phi)` order.
pub fn polar_fourier_descriptors(
    gray: &GrayImage,
    mask: &LeafMask,
    c: Centroid,
    r_max: f64,
    params: PftParams,
) -> Result<PftDescriptor> {
    if gray.dims() != mask.dims() {
        return Err(Error::SizeMismatch {
            expected: mask.dims(),
            found: gray.dims(),
        });
    }
    if !r_max.is_finite() || r_max <= 0.0 {
        return Err(Error::DegenerateRadius);
    }
    let (nr, na) = (params.radial + 1, params.angular + 1);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); nr * na];
    let cutoff = r_max * (1.0 + 1e-12);
    let mut radial_pow = vec![Complex64::new(1.0, 0.0); nr];
    let mut angular_pow = vec![Complex64::new(1.0, 0.0); na];

    for y in 0..gray.height() {
        for x in 0..gray.width() {
            let inside = mask.get(x, y);
            if params.masked && !inside {
                continue;
            }
            let intensity = f64::from(gray.get(x, y));
            if intensity == 0.0 {
                continue;
            }
            let (dx, dy) = (x as f64 - c.x, y as f64 - c.y);
            let r = dx.hypot(dy);
            if r > cutoff {
                continue;
            }
            let mut theta = dy.atan2(dx);
            if theta < 0.0 {
                theta += TAU;
            }
            let radial_step = Complex64::from_polar(1.0, -TAU * r / r_max);
            // a pixel on the centroid has no angle and only feeds phi = 0
            let angular_step = if r > 0.0 {
                Complex64::from_polar(1.0, -theta)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for k in 1..nr {
                radial_pow[k] = radial_pow[k - 1] * radial_step;
            }
            for k in 1..na {
                angular_pow[k] = angular_pow[k - 1] * angular_step;
            }
            for (rho, rp) in radial_pow.iter().enumerate() {
                let row = &mut coeffs[rho * na..(rho + 1) * na];
                for (slot, ap) in row.iter_mut().zip(&angular_pow) {
                    *slot += intensity * rp * ap;
                }
            }
        }
    }

    let dc = coeffs[0].norm();
    if dc == 0.0 {
        return Err(Error::DegenerateRadius);
    }
    let values = coeffs
        .iter()
        .enumerate()
        .map(|(k, z)| if k == 0 { dc / (PI * r_max * r_max) } else { z.norm() / dc })
        .collect();
    Ok(PftDescriptor {
        radial: params.radial,
        angular: params.angular,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFeatures {
    /// Minor over major axis length.
    pub eccentricity: f64,
    /// Area over squared chain-code perimeter.
    pub roundness: f64,
    /// Farthest over nearest contour distance to the centroid.
    pub dispersion: f64,
}

impl GeometricFeatures {
    pub fn to_array(&self) -> [f64; 3] {
        [self.eccentricity, self.roundness, self.dispersion]
    }
}

/// Axis ratio from the eigenvalues of the second-order central moment matrix.
pub fn axis_ratio(mask: &LeafMask, c: Centroid) -> Result<f64> {
    let (mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0);
    for (x, y) in mask.pixels() {
        let (dx, dy) = (x as f64 - c.x, y as f64 - c.y);
        mxx += dx * dx;
        myy += dy * dy;
        mxy += dx * dy;
    }
    let half_trace = 0.5 * (mxx + myy);
    let disc = (0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy).sqrt();
    let major = half_trace + disc;
    let minor = (half_trace - disc).max(0.0);
    if major <= 0.0 {
        return Err(Error::DegenerateShape("major axis has zero length"));
    }
    Ok((minor / major).sqrt())
}

pub fn geometric_features(mask: &LeafMask, contour: &Contour, c: Centroid) -> Result<GeometricFeatures> {
    if contour.len() < 3 {
        return Err(Error::DegenerateShape("contour has fewer than 3 points"));
    }
    let eccentricity = axis_ratio(mask, c)?;
    let perimeter = contour.chain_length();
    let roundness = mask.area() as f64 / (perimeter * perimeter);
    let (mut near, mut far) = (f64::INFINITY, 0.0f64);
    for &(x, y) in contour.points() {
        let d = (x as f64 - c.x).hypot(y as f64 - c.y);
        near = near.min(d);
        far = far.max(d);
    }
    if near <= 0.0 {
        return Err(Error::DegenerateShape("centroid lies on the contour"));
    }
    Ok(GeometricFeatures {
        eccentricity,
        roundness,
        dispersion: far / near,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{centroid, max_radius, trace_contour};

    fn disk(size: usize, cx: f64, cy: f64, r: f64) -> LeafMask {
        LeafMask::from_fn(size, size, |x, y| {
            (x as f64 - cx).hypot(y as f64 - cy) <= r
        })
        .unwrap()
    }

    #[test]
    fn descriptor_length_and_sign() {
        let m = disk(41, 20.0, 20.0, 12.0);
        let g = GrayImage::from_fn(41, 41, |x, y| (x * 3 + y * 2) as u8);
        let c = centroid(&m);
        let r = max_radius(&trace_contour(&m), c);
        let fd = polar_fourier_descriptors(&g, &m, c, r, PftParams::default()).unwrap();
        assert_eq!(fd.values.len(), 35);
        assert!(fd.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn constant_disk_dc_matches_intensity() {
        let m = disk(61, 30.0, 30.0, 20.0);
        let g = GrayImage::from_fn(61, 61, |x, y| if m.get(x, y) { 150 } else { 0 });
        let c = centroid(&m);
        let r = max_radius(&trace_contour(&m), c);
        let fd = polar_fourier_descriptors(&g, &m, c, r, PftParams::default()).unwrap();
        assert!((fd.values[0] - 150.0).abs() / 150.0 < 0.03, "{}", fd.values[0]);
    }

    #[test]
    fn rejects_bad_radius_and_blank_leaf() {
        let m = disk(11, 5.0, 5.0, 3.0);
        let g = GrayImage::from_fn(11, 11, |_, _| 0);
        let c = centroid(&m);
        assert!(matches!(
            polar_fourier_descriptors(&g, &m, c, 0.0, PftParams::default()),
            Err(Error::DegenerateRadius)
        ));
        assert!(matches!(
            polar_fourier_descriptors(&g, &m, c, 3.0, PftParams::default()),
            Err(Error::DegenerateRadius)
        ));
    }

    #[test]
    fn disk_geometry() {
        let m = disk(61, 30.0, 30.0, 20.0);
        let c = centroid(&m);
        let g = geometric_features(&m, &trace_contour(&m), c).unwrap();
        assert!((g.eccentricity - 1.0).abs() < 0.02);
        assert!((g.dispersion - 1.0).abs() < 0.1);
        let circle = 1.0 / (4.0 * PI);
        assert!((g.roundness - circle).abs() / circle < 0.1, "{}", g.roundness);
        let small = disk(25, 12.0, 12.0, 10.0);
        let c = centroid(&small);
        let g = geometric_features(&small, &trace_contour(&small), c).unwrap();
        assert!((g.roundness - circle).abs() / circle < 0.1, "{}", g.roundness);
    }

    #[test]
    fn ellipse_axis_ratio() {
        let m = LeafMask::from_fn(101, 61, |x, y| {
            let (dx, dy) = ((x as f64 - 50.0) / 40.0, (y as f64 - 30.0) / 20.0);
            dx * dx + dy * dy <= 1.0
        })
        .unwrap();
        let c = centroid(&m);
        let g = geometric_features(&m, &trace_contour(&m), c).unwrap();
        assert!((g.eccentricity - 0.5).abs() / 0.5 < 0.05, "{}", g.eccentricity);
    }

    #[test]
    fn rectangle_dispersion() {
        let m = LeafMask::from_fn(80, 40, |x, y| (10..70).contains(&x) && (10..30).contains(&y)).unwrap();
        let c = centroid(&m);
        let g = geometric_features(&m, &trace_contour(&m), c).unwrap();
        let expected = (30f64.powi(2) + 10f64.powi(2)).sqrt() / 10.0;
        assert!((g.dispersion - expected).abs() / expected < 0.1, "{}", g.dispersion);
        assert!(g.eccentricity <= 1.0);
    }

    #[test]
    fn degenerate_shapes() {
        let dot = LeafMask::from_fn(5, 5, |x, y| (x, y) == (2, 2)).unwrap();
        let c = centroid(&dot);
        assert!(geometric_features(&dot, &trace_contour(&dot), c).is_err());
        // 3x3 square: centroid is the centre pixel, not on the contour
        let sq = LeafMask::from_fn(5, 5, |x, y| (1..4).contains(&x) && (1..4).contains(&y)).unwrap();
        let c = centroid(&sq);
        assert!(geometric_features(&sq, &trace_contour(&sq), c).is_ok());
        // a 1-pixel line puts the centroid on the contour
        let line = LeafMask::from_fn(7, 3, |x, y| y == 1 && (1..6).contains(&x)).unwrap();
        let c = centroid(&line);
        assert!(matches!(
            geometric_features(&line, &trace_contour(&line), c),
            Err(Error::DegenerateShape(_))
        ));
    }
}
