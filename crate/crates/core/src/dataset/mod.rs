//! Annotation I/O, dataset indexing and splits, class weights, and
//! box-aware augmentation.
//!
//! On-disk layout: `images/{split}/*.png|jpg`, `labels/{split}/*.txt` with
//! matching stems, and a shared `classes.txt`.

mod augment;
mod bbox;
mod index;
mod labels;

pub use augment::{augment, warp, AugmentSpec, CenterAffine, MIN_KEPT_AREA_FRACTION};
pub use bbox::{BBox, EDGE_TOLERANCE};
pub use index::{
    compute_class_weights, file_stem, is_image_path, layout_dirs, list_images, split_dataset,
    DatasetIndex, DatasetItem, Split, IMAGE_EXTENSIONS,
};
pub use labels::{parse_label_file, write_label_file, Annotation};

/// Train/val/test fractions giving 2400/100/100 on 2600 images.
pub const DEFAULT_SPLIT_FRACTIONS: [f64; 3] = [2400.0 / 2600.0, 100.0 / 2600.0, 100.0 / 2600.0];

/// Augmented copies generated per original image by default.
pub const DEFAULT_AUGMENT_VARIANTS: u32 = 2;
