use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{parse_label_file, Annotation};
use crate::error::{Error, Result};
use crate::rng;

pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::config(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub image: PathBuf,
    pub annotations: Vec<Annotation>,
}

impl DatasetItem {
    pub fn stem(&self) -> String {
        file_stem(&self.image)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex {
    pub items: Vec<DatasetItem>,
    pub split: Option<Split>,
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn is_image_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Image files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))? {
        let path = entry?.path();
        if path.is_file() && is_image_path(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

impl DatasetIndex {
    /// `images/<split>/` and `labels/<split>/` under `root`, or `images/` and
    /// `labels/` when `split` is `None`. Images without a label file carry no
    /// annotations; a label file without an image is an error.
    pub fn load(root: &Path, split: Option<Split>, num_classes: usize) -> Result<Self> {
        let (images_dir, labels_dir) = layout_dirs(root, split);
        let images = list_images(&images_dir)?;

        let stems: BTreeSet<String> = images.iter().map(|p| file_stem(p)).collect();
        if stems.len() != images.len() {
            return Err(Error::invalid(format!(
                "{} holds several images with the same stem",
                images_dir.display()
            )));
        }
        if labels_dir.is_dir() {
            for entry in fs::read_dir(&labels_dir)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) == Some("txt")
                    && !stems.contains(&file_stem(&path))
                {
                    return Err(Error::invalid(format!(
                        "label {} has no matching image",
                        path.display()
                    )));
                }
            }
        }

        let mut items = Vec::with_capacity(images.len());
        for image in images {
            image::image_dimensions(&image).map_err(|e| Error::from(e).in_file(&image))?;
            let label = labels_dir.join(format!("{}.txt", file_stem(&image)));
            let annotations = if label.is_file() {
                let text = fs::read_to_string(&label).map_err(|e| Error::from(e).in_file(&label))?;
                parse_label_file(&text, num_classes).map_err(|e| e.in_file(&label))?
            } else {
                Vec::new()
            };
            items.push(DatasetItem { image, annotations });
        }
        Ok(Self { items, split })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn annotation_count(&self) -> usize {
        self.items.iter().map(|i| i.annotations.len()).sum()
    }
}

pub fn layout_dirs(root: &Path, split: Option<Split>) -> (PathBuf, PathBuf) {
    match split {
        Some(s) => (root.join("images").join(s.name()), root.join("labels").join(s.name())),
        None => (root.join("images"), root.join("labels")),
    }
}

/// Inverse-frequency weights `N / (present_classes * count_c)`; absent classes get 0.
pub fn compute_class_weights(index: &DatasetIndex, num_classes: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0u64; num_classes];
    for a in index.items.iter().flat_map(|i| &i.annotations) {
        let slot = counts
            .get_mut(a.class_id as usize)
            .ok_or(Error::UnknownClass(a.class_id))?;
        *slot += 1;
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::invalid("dataset has no annotations to weight"));
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    Ok(counts
        .iter()
        .map(|&c| {
            if c == 0 {
                0.0
            } else {
                total as f64 / (present * c as f64)
            }
        })
        .collect())
}

/// Deterministically shuffles and partitions into train/val/test.
///
/// Part sizes use largest-remainder rounding of `len * fraction`, and every
/// part with a non-zero fraction receives at least one item.
pub fn split_dataset(
    index: &DatasetIndex,
    fractions: [f64; 3],
    seed: u64,
) -> Result<[DatasetIndex; 3]> {
    if fractions.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
        return Err(Error::config("split fractions must be finite and >= 0"));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("split fractions sum to {sum}, not 1")));
    }
    let n = index.len();
    let parts = fractions.iter().filter(|&&f| f > 0.0).count();
    if n < parts {
        return Err(Error::invalid(format!(
            "cannot split {n} images into {parts} non-empty parts"
        )));
    }

    let sizes = part_sizes(n, fractions);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));

    let mut start = 0;
    let out = std::array::from_fn(|k| {
        let mut ids = order[start..start + sizes[k]].to_vec();
        start += sizes[k];
        // keep the original (sorted) order inside each part
        ids.sort_unstable();
        DatasetIndex {
            items: ids.into_iter().map(|i| index.items[i].clone()).collect(),
            split: Some(Split::ALL[k]),
        }
    });
    Ok(out)
}

fn part_sizes(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let raw = fractions.map(|f| n as f64 * f);
    let mut sizes = raw.map(|r| (r + 1e-9).floor() as usize);
    let mut assigned: usize = sizes.iter().sum();
    let mut by_remainder = [0usize, 1, 2];
    by_remainder.sort_by(|&a, &b| {
        let ra = raw[a] - sizes[a] as f64;
        let rb = raw[b] - sizes[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in by_remainder.iter().cycle() {
        if assigned >= n {
            break;
        }
        if fractions[k] > 0.0 {
            sizes[k] += 1;
            assigned += 1;
        }
    }
    while assigned > n {
        let k = (0..3).max_by_key(|&k| sizes[k]).unwrap();
        sizes[k] -= 1;
        assigned -= 1;
    }
    for k in 0..3 {
        if fractions[k] > 0.0 && sizes[k] == 0 {
            let donor = (0..3).max_by_key(|&j| sizes[j]).unwrap();
            sizes[donor] -= 1;
            sizes[k] += 1;
        }
    }
    sizes
}
