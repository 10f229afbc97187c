//! Global Otsu thresholding.
//!
//! The between-class variance for threshold `t` is
//! `w0 * w1 * (mu0 - mu1)^2`, which over integer histogram sums reduces to
//! `(N * s0 - S * n0)^2 / (N^2 * n0 * (N - n0))`. The common `N^2` factor is
//! dropped and candidates are compared as exact rationals, so the chosen
//! threshold never depends on floating-point rounding and ties are real ties.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::Raster;
use crate::error::{Error, Result};

/// Largest pixel count for which the exact comparison fits in `u128`.
pub const MAX_OTSU_PIXELS: u64 = 1 << 28;

/// Which threshold wins when several maximize the between-class variance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    #[default]
    Lowest,
    Highest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtsuResult {
    pub threshold: u8,
    /// 0 where intensity <= threshold (ink), 255 elsewhere.
    pub binary: Raster,
    /// Set when the image holds a single intensity; the binary image is then all background.
    pub degenerate: bool,
}

/// Otsu threshold of a histogram, or `None` when fewer than two intensities occur.
pub fn otsu_threshold(hist: &[u64; 256], tie_break: TieBreak) -> Result<Option<u8>> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(Error::invalid("otsu threshold of an empty histogram"));
    }
    if total > MAX_OTSU_PIXELS {
        return Err(Error::invalid(format!(
            "otsu supports at most {MAX_OTSU_PIXELS} pixels, got {total}"
        )));
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Ok(None);
    }

    let n = total as i128;
    let sum: i128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as i128 * c as i128)
        .sum();

    let mut best_t = 0u8;
    let mut best = (0u128, 1u128);
    let mut n0: i128 = 0;
    let mut s0: i128 = 0;
    for t in 0..=255usize {
        n0 += hist[t] as i128;
        s0 += t as i128 * hist[t] as i128;
        let score = if n0 == 0 || n0 == n {
            (0u128, 1u128)
        } else {
            let diff = (n * s0 - sum * n0).unsigned_abs();
            (diff * diff, (n0 * (n - n0)) as u128)
        };
        let ord = cmp_fraction(score, best);
        let take = match tie_break {
            TieBreak::Lowest => ord == Ordering::Greater,
            TieBreak::Highest => ord != Ordering::Less,
        };
        if take {
            best = score;
            best_t = t as u8;
        }
    }
    Ok(Some(best_t))
}

/// Binarizes a grayscale raster at its Otsu threshold.
pub fn otsu_binarize(img: &Raster, tie_break: TieBreak) -> Result<OtsuResult> {
    let hist = img.histogram()?;
    match otsu_threshold(&hist, tie_break)? {
        Some(t) => Ok(OtsuResult {
            threshold: t,
            binary: apply_threshold(img, t),
            degenerate: false,
        }),
        None => Ok(OtsuResult {
            threshold: img.data()[0],
            binary: Raster::filled(img.width(), img.height(), 1, 255)?,
            degenerate: true,
        }),
    }
}

pub fn apply_threshold(img: &Raster, t: u8) -> Raster {
    let data = img
        .data()
        .iter()
        .map(|&v| if v <= t { 0 } else { 255 })
        .collect();
    Raster::new(img.width(), img.height(), 1, data).expect("dimensions preserved")
}

/// Exact comparison of `a/b` against `c/d` by continued-fraction expansion.
fn cmp_fraction((mut a, mut b): (u128, u128), (mut c, mut d): (u128, u128)) -> Ordering {
    loop {
        let (q1, r1) = (a / b, a % b);
        let (q2, r2) = (c / d, c % d);
        if q1 != q2 {
            return q1.cmp(&q2);
        }
        match (r1 == 0, r2 == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        // r1/b vs r2/d is the reverse of b/r1 vs d/r2
        (a, b, c, d) = (d, r2, b, r1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster_of(values: &[(u8, usize)]) -> Raster {
        let data: Vec<u8> = values
            .iter()
            .flat_map(|&(v, n)| std::iter::repeat(v).take(n))
            .collect();
        Raster::new(data.len() as u32, 1, 1, data).unwrap()
    }

    #[test]
    fn fraction_compare() {
        assert_eq!(cmp_fraction((1, 3), (2, 6)), Ordering::Equal);
        assert_eq!(cmp_fraction((1, 3), (1, 2)), Ordering::Less);
        assert_eq!(cmp_fraction((7, 5), (4, 3)), Ordering::Greater);
        assert_eq!(cmp_fraction((0, 1), (0, 9)), Ordering::Equal);
        assert_eq!(cmp_fraction((355, 113), (22, 7)), Ordering::Less);
    }

    #[test]
    fn symmetric_bimodal_takes_lowest() {
        let img = raster_of(&[(0, 50), (255, 50)]);
        let r = otsu_binarize(&img, TieBreak::Lowest).unwrap();
        assert_eq!(r.threshold, 0);
        assert!(!r.degenerate);
        assert_eq!(&r.binary.data()[..50], &[0u8; 50][..]);
        assert_eq!(&r.binary.data()[50..], &[255u8; 50][..]);

        let r = otsu_binarize(&img, TieBreak::Highest).unwrap();
        assert_eq!(r.threshold, 254);
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = Raster::filled(4, 4, 1, 128).unwrap();
        let r = otsu_binarize(&img, TieBreak::Lowest).unwrap();
        assert_eq!(r.threshold, 128);
        assert!(r.degenerate);
        assert!(r.binary.data().iter().all(|&v| v == 255));
    }

    #[test]
    fn small_three_level_image() {
        // By hand: t in [0,99] gives n0=4,s0=0 -> (8*0 - 710*4)^2 / (4*4) = 504100;
        // t in [100,254] gives n0=6,s0=200 -> (1600 - 4260)^2 / (6*2) = 589633.3..
        let img = raster_of(&[(0, 4), (100, 2), (255, 2)]);
        let r = otsu_binarize(&img, TieBreak::Lowest).unwrap();
        assert_eq!(r.threshold, 100);
    }

    #[test]
    fn rejects_rgb() {
        let img = Raster::filled(2, 2, 3, 0).unwrap();
        assert!(otsu_binarize(&img, TieBreak::Lowest).is_err());
    }
}
