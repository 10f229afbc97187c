use super::Raster;
use crate::error::{Error, Result};

/// BT.601 luma weights.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Converts an RGB raster to single-channel luminance. Grayscale input is returned as-is.
pub fn to_grayscale(img: &Raster) -> Raster {
    if img.is_gray() {
        return img.clone();
    }
    let data = img
        .data()
        .chunks_exact(3)
        .map(|px| luma(px[0], px[1], px[2]))
        .collect();
    Raster::new(img.width(), img.height(), 1, data).expect("dimensions preserved")
}

pub(crate) fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = LUMA_R * r as f64 + LUMA_G * g as f64 + LUMA_B * b as f64;
    y.round().clamp(0.0, 255.0) as u8
}

/// Laplacian sharpening: center weight `1 + 4s`, 4-neighbours `-s`, edges replicated.
pub fn sharpen(img: &Raster, strength: f64) -> Result<Raster> {
    if !img.is_gray() {
        return Err(Error::invalid("sharpen requires a grayscale raster"));
    }
    if !(strength >= 0.0) || !strength.is_finite() {
        return Err(Error::invalid(format!(
            "sharpen strength must be a finite value >= 0, got {strength}"
        )));
    }
    if strength == 0.0 {
        return Ok(img.clone());
    }

    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.data();
    let at = |x: i64, y: i64| -> f64 {
        let x = x.clamp(0, w - 1);
        let y = y.clamp(0, h - 1);
        src[(y * w + x) as usize] as f64
    };

    let center = 1.0 + 4.0 * strength;
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            let neighbours = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1);
            let v = center * at(x, y) - strength * neighbours;
            out.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Raster::new(img.width(), img.height(), 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb1(r: u8, g: u8, b: u8) -> Raster {
        Raster::new(1, 1, 3, vec![r, g, b]).unwrap()
    }

    #[test]
    fn grayscale_reference_pixels() {
        assert_eq!(to_grayscale(&rgb1(255, 255, 255)).data(), &[255]);
        assert_eq!(to_grayscale(&rgb1(0, 0, 0)).data(), &[0]);
        // round(0.299 * 255) = round(76.245)
        assert_eq!(to_grayscale(&rgb1(255, 0, 0)).data(), &[76]);
        assert_eq!(to_grayscale(&rgb1(0, 255, 0)).data(), &[150]);
        assert_eq!(to_grayscale(&rgb1(0, 0, 255)).data(), &[29]);
    }

    #[test]
    fn grayscale_passes_through_gray() {
        let g = Raster::from_gray_fn(3, 2, |x, y| (x + 10 * y) as u8).unwrap();
        assert_eq!(to_grayscale(&g), g);
    }

    #[test]
    fn sharpen_constant_and_zero_strength() {
        let c = Raster::filled(4, 5, 1, 77).unwrap();
        assert_eq!(sharpen(&c, 2.5).unwrap(), c);
        let g = Raster::from_gray_fn(4, 4, |x, y| (x * 30 + y * 7) as u8).unwrap();
        assert_eq!(sharpen(&g, 0.0).unwrap(), g);
    }

    #[test]
    fn sharpen_impulse_matches_direct_convolution() {
        let mut data = vec![0u8; 9];
        data[4] = 100;
        let img = Raster::new(3, 3, 1, data).unwrap();
        let out = sharpen(&img, 1.0).unwrap();
        // center: 5 * 100 = 500 -> 255; edge neighbours: -100 -> 0; corners untouched
        assert_eq!(out.data(), &[0, 0, 0, 0, 255, 0, 0, 0, 0]);

        let out = sharpen(&img, 0.1).unwrap();
        // center 1.4 * 100 = 140; neighbours -0.1 * 100 = -10 -> 0
        assert_eq!(out.data()[4], 140);
    }

    #[test]
    fn sharpen_rejects_negative_strength() {
        let g = Raster::filled(2, 2, 1, 0).unwrap();
        assert!(sharpen(&g, -0.5).is_err());
        assert!(sharpen(&Raster::filled(2, 2, 3, 0).unwrap(), 1.0).is_err());
    }
}
