use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Annotation, BBox};
use crate::detection::Detection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarDetection {
    pub class_id: u32,
    pub confidence: f64,
    /// Normalized `[cx, cy, w, h]`.
    pub bbox: [f64; 4],
}

/// Per-image detector output in the interchange schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSidecar {
    /// Image file stem.
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub detections: Vec<SidecarDetection>,
}

impl DetectionSidecar {
    pub fn empty(image: impl Into<String>, width: u32, height: u32) -> Self {
        Self {
            image: image.into(),
            width,
            height,
            detections: Vec::new(),
        }
    }

    pub fn from_detections(image: impl Into<String>, width: u32, height: u32, dets: &[Detection]) -> Self {
        Self {
            image: image.into(),
            width,
            height,
            detections: dets
                .iter()
                .map(|d| SidecarDetection {
                    class_id: d.class_id,
                    confidence: d.confidence,
                    bbox: d.bbox.to_array(),
                })
                .collect(),
        }
    }

    /// Sidecar reproducing ground truth at confidence 1.
    pub fn from_annotations(image: impl Into<String>, width: u32, height: u32, anns: &[Annotation]) -> Self {
        let dets: Vec<Detection> = anns
            .iter()
            .map(|a| Detection {
                bbox: a.bbox,
                class_id: a.class_id,
                confidence: 1.0,
            })
            .collect();
        Self::from_detections(image, width, height, &dets)
    }

    /// Parses and validates one JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Self = serde_json::from_str(text)?;
        sc.validate()?;
        Ok(sc)
    }

    /// Checks every field; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.image.is_empty() {
            return Err(Error::validation("image", "must not be empty"));
        }
        if self.width == 0 {
            return Err(Error::validation("width", "must be positive"));
        }
        if self.height == 0 {
            return Err(Error::validation("height", "must be positive"));
        }
        self.detections().map(|_| ())
    }

    /// Validated detections.
    pub fn detections(&self) -> Result<Vec<Detection>> {
        self.detections
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if !(0.0..=1.0).contains(&d.confidence) {
                    return Err(Error::validation(
                        format!("detections[{i}].confidence"),
                        format!("{} is outside [0, 1]", d.confidence),
                    ));
                }
                let [cx, cy, w, h] = d.bbox;
                let bbox = BBox::new(cx, cy, w, h)
                    .map_err(|e| Error::validation(format!("detections[{i}].bbox"), e.to_string()))?;
                Ok(Detection {
                    bbox,
                    class_id: d.class_id,
                    confidence: d.confidence,
                })
            })
            .collect()
    }

    /// Compact single-line JSON, as used by the line protocol.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("sidecar serializes")
    }
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<DetectionSidecar> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    DetectionSidecar::from_json(&text).map_err(|e| e.in_file(path))
}

pub fn save_sidecar(path: impl AsRef<Path>, sidecar: &DetectionSidecar) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(sidecar)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::from(e).in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let sc = DetectionSidecar::from_json(r#"{"image":"x","width":4,"height":3,"detections":[]}"#).unwrap();
        assert!(sc.detections().unwrap().is_empty());
    }

    #[test]
    fn key_order_is_fixed() {
        let d = Detection {
            bbox: BBox::new(0.5, 0.5, 0.25, 0.25).unwrap(),
            class_id: 7,
            confidence: 0.5,
        };
        let sc = DetectionSidecar::from_detections("img", 10, 20, &[d]);
        assert_eq!(
            sc.to_json_line(),
            r#"{"image":"img","width":10,"height":20,"detections":[{"class_id":7,"confidence":0.5,"bbox":[0.5,0.5,0.25,0.25]}]}"#
        );
        assert_eq!(DetectionSidecar::from_json(&sc.to_json_line()).unwrap(), sc);
    }

    #[test]
    fn field_level_errors() {
        let bad = r#"{"image":"x","width":4,"height":3,"detections":[
            {"class_id":0,"confidence":0.5,"bbox":[0.5,0.5,0.1,0.1]},
            {"class_id":0,"confidence":1.2,"bbox":[0.5,0.5,0.1,0.1]}]}"#;
        match DetectionSidecar::from_json(bad) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "detections[1].confidence"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = r#"{"image":"x","width":4,"height":3,"detections":[{"class_id":0,"confidence":0.5,"bbox":[0.9,0.5,0.5,0.1]}]}"#;
        assert!(matches!(
            DetectionSidecar::from_json(bad),
            Err(Error::Validation { field, .. }) if field == "detections[0].bbox"
        ));
        let bad = r#"{"image":"x","width":0,"height":3,"detections":[]}"#;
        assert!(matches!(
            DetectionSidecar::from_json(bad),
            Err(Error::Validation { field, .. }) if field == "width"
        ));
        assert!(DetectionSidecar::from_json(r#"{"image":"x","width":1,"height":1}"#).is_err());
        assert!(DetectionSidecar::from_json(r#"{"image":"x","width":1,"height":1,"detections":[],"extra":1}"#).is_err());
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_sidecar("/nonexistent/x.json"), Err(Error::File { .. })));
    }
}
