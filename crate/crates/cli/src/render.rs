//! Overlay drawing with a built-in 5x7 bitmap font.

use baybayin_core::detection::Detection;
use baybayin_core::eval::ConfusionMatrix;
use baybayin_core::imgproc::Raster;
use baybayin_core::rng::derive_seed;
use baybayin_core::script::ClassInventory;

const GLYPH_W: u32 = 5;
const GLYPH_H: u32 = 7;

fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '.' => [0, 0, 0, 0, 0, 0x0C, 0x0C],
        '-' => [0, 0, 0, 0x1F, 0, 0, 0],
        ' ' => [0; 7],
        _ => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04],
    }
}

/// Stable bright colour for a class.
pub fn class_color(class_id: u32) -> [u8; 3] {
    let h = derive_seed(0x5eed, &class_id.to_string()).to_le_bytes();
    [h[0] | 0x40, h[1] | 0x40, h[2] | 0x40]
}

struct Canvas {
    w: u32,
    h: u32,
    data: Vec<u8>,
}

impl Canvas {
    fn from_raster(img: &Raster) -> Self {
        let data = if img.is_gray() {
            img.data().iter().flat_map(|&v| [v, v, v]).collect()
        } else {
            img.data().to_vec()
        };
        Self {
            w: img.width(),
            h: img.height(),
            data,
        }
    }

    fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.w as i64 || y >= self.h as i64 {
            return;
        }
        let i = (y as usize * self.w as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&c);
    }

    fn fill(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: [u8; 3]) {
        for y in y0..y1 {
            for x in x0..x1 {
                self.put(x, y, c);
            }
        }
    }

    fn text(&mut self, x: i64, y: i64, s: &str, scale: i64, c: [u8; 3]) {
        for (k, ch) in s.chars().enumerate() {
            let rows = glyph(ch);
            let ox = x + k as i64 * (GLYPH_W as i64 + 1) * scale;
            for (ry, bits) in rows.iter().enumerate() {
                for rx in 0..GLYPH_W as i64 {
                    if bits >> (GLYPH_W as i64 - 1 - rx) & 1 == 1 {
                        let px = ox + rx * scale;
                        let py = y + ry as i64 * scale;
                        self.fill(px, py, px + scale, py + scale, c);
                    }
                }
            }
        }
    }

    fn into_raster(self) -> Raster {
        Raster::new(self.w, self.h, 3, self.data).expect("canvas size matches")
    }
}

/// Boxes with `LATIN 0.93` labels in per-class colours.
pub fn draw_detections(img: &Raster, dets: &[Detection], inventory: &ClassInventory) -> Raster {
    let mut cv = Canvas::from_raster(img);
    let (w, h) = (cv.w as f64, cv.h as f64);
    let thick = ((w.min(h) / 200.0).round() as i64).max(1);
    let scale = ((h / 300.0).round() as i64).max(1);
    for d in dets {
        let color = class_color(d.class_id);
        let (x0, y0, x1, y1) = d.bbox.corners();
        let (x0, y0) = ((x0 * w).round() as i64, (y0 * h).round() as i64);
        let (x1, y1) = ((x1 * w).round() as i64, (y1 * h).round() as i64);
        cv.fill(x0, y0, x1, y0 + thick, color);
        cv.fill(x0, y1 - thick, x1, y1, color);
        cv.fill(x0, y0, x0 + thick, y1, color);
        cv.fill(x1 - thick, y0, x1, y1, color);

        let name = inventory
            .get(d.class_id)
            .map(|g| g.latin.clone())
            .unwrap_or_else(|_| d.class_id.to_string());
        let label = format!("{name} {:.2}", d.confidence);
        let lw = label.chars().count() as i64 * (GLYPH_W as i64 + 1) * scale + scale;
        let lh = (GLYPH_H as i64 + 2) * scale;
        let ly = if y0 - lh >= 0 { y0 - lh } else { y0 };
        cv.fill(x0, ly, x0 + lw, ly + lh, color);
        cv.text(x0 + scale, ly + scale, &label, scale, [0, 0, 0]);
    }
    cv.into_raster()
}

/// Row-normalized heat map, one 12-pixel cell per entry.
pub fn confusion_image(cm: &ConfusionMatrix) -> Raster {
    const CELL: u32 = 12;
    let n = cm.counts.len() as u32;
    let mut cv = Canvas {
        w: n * CELL,
        h: n * CELL,
        data: vec![255; (n * CELL * n * CELL * 3) as usize],
    };
    for (r, row) in cm.counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        for (c, &v) in row.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let f = v as f64 / total as f64;
            let shade = (255.0 * (1.0 - f)).round() as u8;
            let (x, y) = ((c as u32 * CELL) as i64, (r as u32 * CELL) as i64);
            cv.fill(x + 1, y + 1, x + CELL as i64 - 1, y + CELL as i64 - 1, [shade, shade, 255]);
        }
    }
    cv.into_raster()
}
