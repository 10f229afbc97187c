use std::fmt::Write as _;

use super::BBox;
use crate::error::{Error, Result};

/// One ground-truth character box. Diacritics belong to their parent glyph's class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub class_id: u32,
    pub bbox: BBox,
}

impl Annotation {
    pub fn new(class_id: u32, bbox: BBox) -> Self {
        Self { class_id, bbox }
    }
}

/// Parses `class cx cy w h` lines. Blank lines are skipped; line numbers in
/// errors are 1-based and count every line.
pub fn parse_label_file(text: &str, num_classes: usize) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::parse(
                line_no,
                format!("expected 5 fields `class cx cy w h`, found {}", fields.len()),
            ));
        }
        let class_id: u32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid class id `{}`", fields[0])))?;
        if class_id as usize >= num_classes {
            return Err(Error::parse(
                line_no,
                format!("class id {class_id} is out of range for {num_classes} classes"),
            ));
        }
        let mut coords = [0.0f64; 4];
        for (slot, (name, raw)) in coords
            .iter_mut()
            .zip(["cx", "cy", "w", "h"].into_iter().zip(&fields[1..]))
        {
            *slot = raw
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid {name} `{raw}`")))?;
        }
        let [cx, cy, w, h] = coords;
        let bbox = BBox::clamped(cx, cy, w, h).map_err(|e| Error::parse(line_no, e.to_string()))?;
        out.push(Annotation::new(class_id, bbox));
    }
    Ok(out)
}

/// Writes one line per annotation with six decimals per coordinate.
pub fn write_label_file(annotations: &[Annotation]) -> String {
    let mut out = String::new();
    for a in annotations {
        let [cx, cy, w, h] = a.bbox.to_array();
        writeln!(out, "{} {cx:.6} {cy:.6} {w:.6} {h:.6}", a.class_id).unwrap();
    }
    out
}
