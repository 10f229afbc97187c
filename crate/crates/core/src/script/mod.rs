//! Baybayin script semantics: class inventory, glyph readings, ambiguity
//! expansion and lexicon disambiguation.

mod ambiguity;
mod inventory;

pub use ambiguity::{
    ambiguous_distance, disambiguate, expand_ambiguities, levenshtein, AmbiguitySet,
    Disambiguation, Lexicon, DEFAULT_EXPANSION_CAP,
};
pub use inventory::{
    canonical_latin, glyph_to_latin, parse_glyph_name, Base, ClassInventory, Glyph, VowelForm,
};

use crate::detection::{Detection, ReadingOrder};
use crate::error::Result;

/// Latin text of each line in reading order.
pub fn transliterate_lines(
    order: &ReadingOrder,
    dets: &[Detection],
    inventory: &ClassInventory,
) -> Result<Vec<String>> {
    order
        .lines
        .iter()
        .map(|line| {
            line.iter()
                .map(|&i| glyph_to_latin(dets[i].class_id, inventory))
                .collect::<Result<String>>()
        })
        .collect()
}

/// Latin text for the whole reading order, lines joined by a space.
pub fn transliterate(
    order: &ReadingOrder,
    dets: &[Detection],
    inventory: &ClassInventory,
) -> Result<String> {
    Ok(transliterate_lines(order, dets, inventory)?.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::BBox;
    use crate::detection::assemble_reading_order;

    fn row(inv: &ClassInventory, names: &[&str]) -> Vec<Detection> {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let bbox = BBox::new(0.1 + 0.2 * i as f64, 0.5, 0.15, 0.3).unwrap();
                Detection::new(bbox, inv.id_of(n).unwrap(), 0.9).unwrap()
            })
            .collect()
    }

    #[test]
    fn malamig() {
        let inv = ClassInventory::standard();
        let mut dets = row(&inv, &["ma", "la", "mi", "g"]);
        dets.reverse();
        let order = assemble_reading_order(&dets);
        assert_eq!(transliterate(&order, &dets, &inv).unwrap(), "malamig");
    }

    #[test]
    fn pilipino_with_custom_inventory() {
        let inv = ClassInventory::from_names(&["pi", "li", "no"]).unwrap();
        let dets = row(&inv, &["pi", "li", "pi", "no"]);
        let order = assemble_reading_order(&dets);
        assert_eq!(transliterate(&order, &dets, &inv).unwrap(), "pilipino");
    }

    #[test]
    fn single_and_empty() {
        let inv = ClassInventory::standard();
        let dets = row(&inv, &["a"]);
        assert_eq!(transliterate(&assemble_reading_order(&dets), &dets, &inv).unwrap(), "a");
        assert_eq!(transliterate(&ReadingOrder::default(), &[], &inv).unwrap(), "");
    }

    #[test]
    fn lines_joined_by_space() {
        let inv = ClassInventory::standard();
        let mut dets = row(&inv, &["ba", "ta"]);
        let below = BBox::new(0.3, 0.9, 0.15, 0.1).unwrap();
        dets.push(Detection::new(below, inv.id_of("ka").unwrap(), 0.9).unwrap());
        let order = assemble_reading_order(&dets);
        assert_eq!(transliterate_lines(&order, &dets, &inv).unwrap(), vec!["bata", "ka"]);
        assert_eq!(transliterate(&order, &dets, &inv).unwrap(), "bata ka");
    }
}
