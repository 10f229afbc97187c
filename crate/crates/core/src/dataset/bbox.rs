use crate::error::{Error, Result};

/// Slack allowed when checking that box edges stay inside the unit square.
pub const EDGE_TOLERANCE: f64 = 1e-9;

/// Axis-aligned box in normalized center/size form.
///
/// `cx`, `cy` lie in `[0, 1]`, `w`, `h` in `(0, 1]`, and every edge lies in the
/// unit square (within [`EDGE_TOLERANCE`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

impl BBox {
    /// Strict constructor: rejects any box that pokes outside the unit square.
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        check_fields(cx, cy, w, h)?;
        let b = Self { cx, cy, w, h };
        let (x0, y0, x1, y1) = b.corners();
        for (name, v) in [("left", x0), ("top", y0), ("right", x1), ("bottom", y1)] {
            if v < -EDGE_TOLERANCE || v > 1.0 + EDGE_TOLERANCE {
                return Err(Error::validation(
                    "bbox",
                    format!("{name} edge {v} lies outside the unit square"),
                ));
            }
        }
        Ok(b)
    }

    /// Validates the individual fields, then clips the box to the unit square.
    /// Boxes already inside (within tolerance) are kept as given.
    pub fn clamped(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        if let Ok(b) = Self::new(cx, cy, w, h) {
            return Ok(b);
        }
        check_fields(cx, cy, w, h)?;
        Self::from_corners(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    /// Box spanning the given corners after clipping them to the unit square.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::validation("bbox", "corner is not finite"));
        }
        let (x0, x1) = (x0.clamp(0.0, 1.0), x1.clamp(0.0, 1.0));
        let (y0, y1) = (y0.clamp(0.0, 1.0), y1.clamp(0.0, 1.0));
        if x1 <= x0 || y1 <= y0 {
            return Err(Error::validation(
                "bbox",
                "box has no area inside the unit square",
            ));
        }
        Ok(Self {
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            w: x1 - x0,
            h: y1 - y0,
        })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `(left, top, right, bottom)`.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.cx, self.cy, self.w, self.h]
    }
}

fn check_fields(cx: f64, cy: f64, w: f64, h: f64) -> Result<()> {
    for (name, v) in [("cx", cx), ("cy", cy)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::validation(name, format!("{v} is outside [0, 1]")));
        }
    }
    for (name, v) in [("w", w), ("h", h)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::validation(name, format!("{v} is outside (0, 1]")));
        }
    }
    Ok(())
}
