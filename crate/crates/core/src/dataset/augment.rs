//! Box-aware augmentation.
//!
//! Geometric ops (rotation and shear about the image center) warp the image
//! and replace each box by the axis-aligned hull of its transformed corners,
//! clipped to the image. Boxes left with under 1% of their original area are
//! dropped. Occlusion and photometric ops never touch boxes.
//!
//! Draw order from the seeded stream is fixed: rotation, shear x, shear y,
//! occlusion count, per-occluder geometry and colour, saturation, exposure,
//! then per-sample noise.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Annotation, BBox};
use crate::error::{Error, Result};
use crate::imgproc::{luma, Raster, LETTERBOX_PAD_VALUE};
use crate::rng;

/// Boxes shrinking below this fraction of their original area are dropped.
pub const MIN_KEPT_AREA_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSpec {
    /// Counter-clockwise rotation range, degrees.
    pub rotation_deg: [f64; 2],
    /// Shear (skew) range in degrees, sampled independently for x and y.
    pub shear_deg: [f64; 2],
    /// Inclusive range for the number of occluding rectangles.
    pub occlusion_count: [u32; 2],
    /// Occluder side as a fraction of the image side, within (0, 1).
    pub occlusion_size: [f64; 2],
    /// Saturation scale offset; 0 keeps colours.
    pub saturation_delta: [f64; 2],
    /// Brightness scale offset; 0 keeps exposure.
    pub exposure_delta: [f64; 2],
    /// Gaussian noise standard deviation in intensity units.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self {
            rotation_deg: [-15.0, 15.0],
            shear_deg: [-10.0, 10.0],
            occlusion_count: [0, 2],
            occlusion_size: [0.05, 0.2],
            saturation_delta: [-0.25, 0.25],
            exposure_delta: [-0.15, 0.15],
            noise_sigma: 4.0,
            seed: 0,
        }
    }
}

impl AugmentSpec {
    /// A spec whose every operation is a no-op.
    pub fn identity(seed: u64) -> Self {
        Self {
            rotation_deg: [0.0, 0.0],
            shear_deg: [0.0, 0.0],
            occlusion_count: [0, 0],
            occlusion_size: [0.1, 0.1],
            saturation_delta: [0.0, 0.0],
            exposure_delta: [0.0, 0.0],
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("rotation_deg", self.rotation_deg),
            ("shear_deg", self.shear_deg),
            ("occlusion_size", self.occlusion_size),
            ("saturation_delta", self.saturation_delta),
            ("exposure_delta", self.exposure_delta),
        ];
        for (name, [lo, hi]) in ranges {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::config(format!("{name} range [{lo}, {hi}] is not ordered")));
            }
        }
        if self.occlusion_count[0] > self.occlusion_count[1] {
            return Err(Error::config("occlusion_count range is not ordered"));
        }
        if !(self.occlusion_size[0] > 0.0 && self.occlusion_size[1] < 1.0) {
            return Err(Error::config("occlusion_size must lie within (0, 1)"));
        }
        if self.shear_deg[0] <= -90.0 || self.shear_deg[1] >= 90.0 {
            return Err(Error::config("shear_deg must lie within (-90, 90)"));
        }
        if self.saturation_delta[0] < -1.0 || self.exposure_delta[0] < -1.0 {
            return Err(Error::config("saturation and exposure deltas must be >= -1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config("noise_sigma must be a finite value >= 0"));
        }
        Ok(())
    }
}

/// 2x2 linear part of an affine map about the image center, in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterAffine {
    pub m: [[f64; 2]; 2],
}

impl CenterAffine {
    pub const IDENTITY: Self = Self {
        m: [[1.0, 0.0], [0.0, 1.0]],
    };

    /// Rotation (counter-clockwise on screen, y pointing down) after shear.
    pub fn rotation_shear(rotation_deg: f64, shear_x_deg: f64, shear_y_deg: f64) -> Self {
        let (s, c) = exact_sin_cos(rotation_deg);
        let (kx, ky) = (shear_x_deg.to_radians().tan(), shear_y_deg.to_radians().tan());
        let rot = [[c, s], [-s, c]];
        let shear = [[1.0, kx], [ky, 1.0]];
        Self {
            m: [
                [
                    rot[0][0] * shear[0][0] + rot[0][1] * shear[1][0],
                    rot[0][0] * shear[0][1] + rot[0][1] * shear[1][1],
                ],
                [
                    rot[1][0] * shear[0][0] + rot[1][1] * shear[1][0],
                    rot[1][0] * shear[0][1] + rot[1][1] * shear[1][1],
                ],
            ],
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    fn apply(&self, dx: f64, dy: f64) -> (f64, f64) {
        (
            self.m[0][0] * dx + self.m[0][1] * dy,
            self.m[1][0] * dx + self.m[1][1] * dy,
        )
    }

    fn inverse(&self) -> Option<Self> {
        let [[a, b], [c, d]] = self.m;
        let det = a * d - b * c;
        if det.abs() < 1e-12 {
            return None;
        }
        Some(Self {
            m: [[d / det, -b / det], [-c / det, a / det]],
        })
    }

    /// Hull of the transformed box on a `width x height` image, clipped.
    /// `None` when the clipped hull keeps less than 1% of the original area.
    pub fn transform_box(&self, b: &BBox, width: u32, height: u32) -> Option<BBox> {
        let (w, h) = (width as f64, height as f64);
        let (x0, y0, x1, y1) = b.corners();
        let corners = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)];
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for (x, y) in corners {
            let (dx, dy) = self.apply(x * w - w / 2.0, y * h - h / 2.0);
            let (tx, ty) = ((dx + w / 2.0) / w, (dy + h / 2.0) / h);
            lo_x = lo_x.min(tx);
            lo_y = lo_y.min(ty);
            hi_x = hi_x.max(tx);
            hi_y = hi_y.max(ty);
        }
        let clipped = BBox::from_corners(lo_x, lo_y, hi_x, hi_y).ok()?;
        (clipped.area() >= MIN_KEPT_AREA_FRACTION * b.area()).then_some(clipped)
    }
}

/// Sine and cosine with exact values at multiples of 90 degrees.
fn exact_sin_cos(deg: f64) -> (f64, f64) {
    let quarter = deg / 90.0;
    if quarter.fract() == 0.0 {
        match (quarter as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        deg.to_radians().sin_cos()
    }
}

/// Applies a random augmentation drawn from `spec` to an image and its boxes.
pub fn augment(
    img: &Raster,
    annotations: &[Annotation],
    spec: &AugmentSpec,
) -> Result<(Raster, Vec<Annotation>)> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let mut draw = |[lo, hi]: [f64; 2]| rng.random_range(lo..=hi);

    let rotation = draw(spec.rotation_deg);
    let shear_x = draw(spec.shear_deg);
    let shear_y = draw(spec.shear_deg);
    let affine = CenterAffine::rotation_shear(rotation, shear_x, shear_y);
    let (mut out, boxes) = warp(img, annotations, &affine)?;

    let [cmin, cmax] = spec.occlusion_count;
    let count = rng.random_range(cmin..=cmax);
    for _ in 0..count {
        let fw = rng.random_range(spec.occlusion_size[0]..=spec.occlusion_size[1]);
        let fh = rng.random_range(spec.occlusion_size[0]..=spec.occlusion_size[1]);
        let rw = ((fw * out.width() as f64).round() as u32).max(1);
        let rh = ((fh * out.height() as f64).round() as u32).max(1);
        let x0 = rng.random_range(0..=out.width() - rw);
        let y0 = rng.random_range(0..=out.height() - rh);
        let colour: [u8; 3] = rng.random();
        paint_rect(&mut out, x0, y0, rw, rh, colour);
    }

    let saturation = rng.random_range(spec.saturation_delta[0]..=spec.saturation_delta[1]);
    let exposure = rng.random_range(spec.exposure_delta[0]..=spec.exposure_delta[1]);
    if saturation != 0.0 && !out.is_gray() {
        adjust_saturation(&mut out, saturation);
    }
    if exposure != 0.0 {
        for v in out.data_mut() {
            *v = (*v as f64 * (1.0 + exposure)).round().clamp(0.0, 255.0) as u8;
        }
    }
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::config(format!("noise_sigma: {e}")))?;
        for v in out.data_mut() {
            let n: f64 = normal.sample(&mut rng);
            *v = (*v as f64 + n).round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok((out, boxes))
}

/// Warps the image with a center affine and transforms the boxes to match.
pub fn warp(
    img: &Raster,
    annotations: &[Annotation],
    affine: &CenterAffine,
) -> Result<(Raster, Vec<Annotation>)> {
    if affine.is_identity() {
        return Ok((img.clone(), annotations.to_vec()));
    }
    let inv = affine
        .inverse()
        .ok_or_else(|| Error::config("geometric transform is singular"))?;

    let (w, h) = (img.width(), img.height());
    let (wf, hf) = (w as f64, h as f64);
    let c = img.channels() as usize;
    let mut out = Raster::filled(w, h, img.channels(), LETTERBOX_PAD_VALUE)?;
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = inv.apply(x as f64 + 0.5 - wf / 2.0, y as f64 + 0.5 - hf / 2.0);
            // sample position in pixel-center coordinates
            let sx = dx + wf / 2.0 - 0.5;
            let sy = dy + hf / 2.0 - 0.5;
            if sx < -0.5 || sy < -0.5 || sx > wf - 0.5 || sy > hf - 0.5 {
                continue;
            }
            let sx = sx.clamp(0.0, wf - 1.0);
            let sy = sy.clamp(0.0, hf - 1.0);
            let (x0, y0) = (sx.floor() as u32, sy.floor() as u32);
            let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
            let (tx, ty) = (sx - x0 as f64, sy - y0 as f64);
            let dst = out.pixel_mut(x, y);
            for ch in 0..c {
                let p = |xx: u32, yy: u32| img.pixel(xx, yy)[ch] as f64;
                let top = p(x0, y0) * (1.0 - tx) + p(x1, y0) * tx;
                let bottom = p(x0, y1) * (1.0 - tx) + p(x1, y1) * tx;
                dst[ch] = (top * (1.0 - ty) + bottom * ty).round().clamp(0.0, 255.0) as u8;
            }
        }
    }

    let boxes = annotations
        .iter()
        .filter_map(|a| {
            affine
                .transform_box(&a.bbox, w, h)
                .map(|bbox| Annotation::new(a.class_id, bbox))
        })
        .collect();
    Ok((out, boxes))
}

fn paint_rect(img: &mut Raster, x0: u32, y0: u32, w: u32, h: u32, colour: [u8; 3]) {
    let gray = luma(colour[0], colour[1], colour[2]);
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            let px = img.pixel_mut(x, y);
            if px.len() == 1 {
                px[0] = gray;
            } else {
                px.copy_from_slice(&colour);
            }
        }
    }
}

fn adjust_saturation(img: &mut Raster, delta: f64) {
    for px in img.data_mut().chunks_exact_mut(3) {
        let gray = luma(px[0], px[1], px[2]) as f64;
        for v in px.iter_mut() {
            *v = (gray + (1.0 + delta) * (*v as f64 - gray)).round().clamp(0.0, 255.0) as u8;
        }
    }
}
