use serde::{Deserialize, Serialize};

use super::Raster;
use crate::dataset::BBox;
use crate::error::{Error, Result};

/// Canvas fill around the resized image.
pub const LETTERBOX_PAD_VALUE: u8 = 114;

/// Parameters of one letterbox operation, enough to map boxes in either direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LetterboxTransform {
    /// `target / max(width, height)` of the source.
    pub scale: f64,
    /// Left padding in pixels.
    pub pad_x: u32,
    /// Top padding in pixels.
    pub pad_y: u32,
    pub src_width: u32,
    pub src_height: u32,
    pub resized_width: u32,
    pub resized_height: u32,
    pub target: u32,
}

impl LetterboxTransform {
    pub fn new(src_width: u32, src_height: u32, target: u32) -> Result<Self> {
        if target == 0 {
            return Err(Error::invalid("letterbox target must be >= 1"));
        }
        if src_width == 0 || src_height == 0 {
            return Err(Error::invalid("letterbox source must be at least 1x1"));
        }
        let scale = target as f64 / src_width.max(src_height) as f64;
        let resized_width = ((src_width as f64 * scale).round() as u32).clamp(1, target);
        let resized_height = ((src_height as f64 * scale).round() as u32).clamp(1, target);
        Ok(Self {
            scale,
            pad_x: (target - resized_width) / 2,
            pad_y: (target - resized_height) / 2,
            src_width,
            src_height,
            resized_width,
            resized_height,
            target,
        })
    }

    /// Total horizontal padding (left + right).
    pub fn total_pad_x(&self) -> u32 {
        self.target - self.resized_width
    }

    /// Total vertical padding (top + bottom).
    pub fn total_pad_y(&self) -> u32 {
        self.target - self.resized_height
    }

    fn x_to_canvas(&self, x: f64) -> f64 {
        (x * self.resized_width as f64 + self.pad_x as f64) / self.target as f64
    }

    fn y_to_canvas(&self, y: f64) -> f64 {
        (y * self.resized_height as f64 + self.pad_y as f64) / self.target as f64
    }

    fn x_from_canvas(&self, x: f64) -> f64 {
        (x * self.target as f64 - self.pad_x as f64) / self.resized_width as f64
    }

    fn y_from_canvas(&self, y: f64) -> f64 {
        (y * self.target as f64 - self.pad_y as f64) / self.resized_height as f64
    }

    /// Maps a box normalized to the source image onto the letterboxed canvas.
    pub fn to_canvas(&self, b: &BBox) -> BBox {
        let (x0, y0, x1, y1) = b.corners();
        BBox::from_corners(
            self.x_to_canvas(x0),
            self.y_to_canvas(y0),
            self.x_to_canvas(x1),
            self.y_to_canvas(y1),
        )
        .expect("a valid source box maps inside the canvas")
    }

    /// Maps a canvas box back to source coordinates, clipped to the image.
    /// Returns `None` when the box lies entirely in the padding.
    pub fn from_canvas(&self, b: &BBox) -> Option<BBox> {
        let (x0, y0, x1, y1) = b.corners();
        BBox::from_corners(
            self.x_from_canvas(x0),
            self.y_from_canvas(y0),
            self.x_from_canvas(x1),
            self.y_from_canvas(y1),
        )
        .ok()
    }
}

/// Aspect-preserving bilinear resize onto a `target x target` canvas.
pub fn letterbox_normalize(img: &Raster, target: u32) -> Result<(Raster, LetterboxTransform)> {
    let t = LetterboxTransform::new(img.width(), img.height(), target)?;
    let resized = resize_bilinear(img, t.resized_width, t.resized_height)?;
    let c = img.channels() as usize;
    let mut canvas = Raster::filled(target, target, img.channels(), LETTERBOX_PAD_VALUE)?;
    let row_len = t.resized_width as usize * c;
    for y in 0..t.resized_height as usize {
        let src = &resized.data()[y * row_len..(y + 1) * row_len];
        let dst_start = ((y + t.pad_y as usize) * target as usize + t.pad_x as usize) * c;
        canvas.data_mut()[dst_start..dst_start + row_len].copy_from_slice(src);
    }
    Ok((canvas, t))
}

/// Bilinear resampling with pixel-center alignment. Same-size calls are exact copies.
pub fn resize_bilinear(img: &Raster, width: u32, height: u32) -> Result<Raster> {
    if width == img.width() && height == img.height() {
        return Ok(img.clone());
    }
    let (sw, sh) = (img.width() as usize, img.height() as usize);
    let c = img.channels() as usize;
    let fx = sw as f64 / width as f64;
    let fy = sh as f64 / height as f64;
    let src = img.data();

    let mut out = Vec::with_capacity(width as usize * height as usize * c);
    for y in 0..height as usize {
        let sy = ((y as f64 + 0.5) * fy - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let ty = sy - y0 as f64;
        for x in 0..width as usize {
            let sx = ((x as f64 + 0.5) * fx - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let tx = sx - x0 as f64;
            for ch in 0..c {
                let p = |xx: usize, yy: usize| src[(yy * sw + xx) * c + ch] as f64;
                let top = p(x0, y0) * (1.0 - tx) + p(x1, y0) * tx;
                let bottom = p(x0, y1) * (1.0 - tx) + p(x1, y1) * tx;
                let v = top * (1.0 - ty) + bottom * ty;
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Raster::new(width, height, img.channels(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_is_identity() {
        let img = Raster::from_gray_fn(640, 640, |x, y| ((x ^ y) & 0xff) as u8).unwrap();
        let (out, t) = letterbox_normalize(&img, 640).unwrap();
        assert_eq!(out, img);
        assert_eq!((t.scale, t.pad_x, t.pad_y), (1.0, 0, 0));
    }

    #[test]
    fn exact_upscale() {
        let img = Raster::filled(320, 320, 3, 9).unwrap();
        let (out, t) = letterbox_normalize(&img, 640).unwrap();
        assert_eq!(t.scale, 2.0);
        assert_eq!((t.pad_x, t.pad_y), (0, 0));
        assert!(out.data().iter().all(|&v| v == 9));
    }

    #[test]
    fn wide_image_is_padded_vertically() {
        let img = Raster::filled(400, 200, 1, 0).unwrap();
        let (out, t) = letterbox_normalize(&img, 640).unwrap();
        // 640 / 400 = 1.6; resized height 320; (640 - 320) / 2 = 160 each side
        assert!((t.scale - 1.6).abs() < 1e-15);
        assert_eq!(t.resized_height, 320);
        assert_eq!(t.pad_y, 160);
        assert_eq!(t.total_pad_y(), 320);
        assert_eq!(t.pad_x, 0);
        assert_eq!(out.pixel(10, 159)[0], LETTERBOX_PAD_VALUE);
        assert_eq!(out.pixel(10, 160)[0], 0);
        assert_eq!(out.pixel(10, 479)[0], 0);
        assert_eq!(out.pixel(10, 480)[0], LETTERBOX_PAD_VALUE);
    }

    #[test]
    fn boxes_map_into_content_area() {
        let t = LetterboxTransform::new(400, 200, 640).unwrap();
        let full = BBox::new(0.5, 0.5, 1.0, 1.0).unwrap();
        let c = t.to_canvas(&full);
        assert!((c.h() - 0.5).abs() < 1e-12);
        assert!((c.cy() - 0.5).abs() < 1e-12);
        let pad_only = BBox::new(0.5, 0.05, 0.2, 0.1).unwrap();
        assert!(t.from_canvas(&pad_only).is_none());
    }
}
