use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base character of a glyph: three vowels and the consonants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Base {
    A,
    I,
    U,
    Ba,
    Ka,
    Da,
    Ga,
    Ha,
    La,
    Ma,
    Na,
    Nga,
    Pa,
    Sa,
    Ta,
    Wa,
    Ya,
    /// Not part of the standard inventory; accepted in custom class lists.
    Ra,
}

impl Base {
    pub const VOWELS: [Base; 3] = [Base::A, Base::I, Base::U];

    /// The fourteen consonants of the standard inventory, in class-id order.
    pub const CONSONANTS: [Base; 14] = [
        Base::Ba,
        Base::Ka,
        Base::Da,
        Base::Ga,
        Base::Ha,
        Base::La,
        Base::Ma,
        Base::Na,
        Base::Nga,
        Base::Pa,
        Base::Sa,
        Base::Ta,
        Base::Wa,
        Base::Ya,
    ];

    pub fn is_vowel(self) -> bool {
        matches!(self, Base::A | Base::I | Base::U)
    }

    /// Latin onset of a consonant, `None` for vowels.
    pub fn onset(self) -> Option<&'static str> {
        Some(match self {
            Base::A | Base::I | Base::U => return None,
            Base::Ba => "b",
            Base::Ka => "k",
            Base::Da => "d",
            Base::Ga => "g",
            Base::Ha => "h",
            Base::La => "l",
            Base::Ma => "m",
            Base::Na => "n",
            Base::Nga => "ng",
            Base::Pa => "p",
            Base::Sa => "s",
            Base::Ta => "t",
            Base::Wa => "w",
            Base::Ya => "y",
            Base::Ra => "r",
        })
    }

    fn from_onset(onset: &str) -> Option<Base> {
        Some(match onset {
            "b" => Base::Ba,
            "k" => Base::Ka,
            "d" => Base::Da,
            "g" => Base::Ga,
            "h" => Base::Ha,
            "l" => Base::La,
            "m" => Base::Ma,
            "n" => Base::Na,
            "ng" => Base::Nga,
            "p" => Base::Pa,
            "s" => Base::Sa,
            "t" => Base::Ta,
            "w" => Base::Wa,
            "y" => Base::Ya,
            "r" => Base::Ra,
            _ => return None,
        })
    }
}

/// Vowel carried by a glyph: inherent `a`, the mark above (`i`/`e`), the mark
/// below (`u`/`o`), or the vowel killer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VowelForm {
    #[serde(rename = "inherent_a")]
    Inherent,
    #[serde(rename = "i_e")]
    IE,
    #[serde(rename = "u_o")]
    UO,
    Killed,
}

impl VowelForm {
    pub const CONSONANT_FORMS: [VowelForm; 4] =
        [VowelForm::Inherent, VowelForm::IE, VowelForm::UO, VowelForm::Killed];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Glyph {
    pub class_id: u32,
    pub base: Base,
    pub vowel_form: VowelForm,
    /// Display reading; canonical spellings use a/i/u.
    pub latin: String,
}

/// Canonical a/i/u reading of a base and vowel form.
pub fn canonical_latin(base: Base, form: VowelForm) -> Result<String> {
    match (base.onset(), form) {
        (None, VowelForm::Inherent) => Ok(match base {
            Base::A => "a",
            Base::I => "i",
            _ => "u",
        }
        .to_string()),
        (None, _) => Err(Error::invalid(format!(
            "vowel {base:?} only takes the inherent form"
        ))),
        (Some(onset), VowelForm::Inherent) => Ok(format!("{onset}a")),
        (Some(onset), VowelForm::IE) => Ok(format!("{onset}i")),
        (Some(onset), VowelForm::UO) => Ok(format!("{onset}u")),
        (Some(onset), VowelForm::Killed) => Ok(onset.to_string()),
    }
}

/// Reads a class name such as `ga`, `mi`, `g`, `nga`, `do` or `e` as a glyph.
pub fn parse_glyph_name(name: &str) -> Result<(Base, VowelForm)> {
    let name = name.trim().to_lowercase();
    let vowel = |s: &str| match s {
        "a" => Some(Base::A),
        "i" | "e" => Some(Base::I),
        "u" | "o" => Some(Base::U),
        _ => None,
    };
    if let Some(b) = vowel(&name) {
        return Ok((b, VowelForm::Inherent));
    }
    let split = if name.starts_with("ng") { 2 } else { 1.min(name.len()) };
    let (onset, rest) = name.split_at(split);
    let base = Base::from_onset(onset)
        .ok_or_else(|| Error::invalid(format!("`{name}` is not a Baybayin class name")))?;
    let form = match rest {
        "" => VowelForm::Killed,
        "a" => VowelForm::Inherent,
        "i" | "e" => VowelForm::IE,
        "u" | "o" => VowelForm::UO,
        _ => return Err(Error::invalid(format!("`{name}` is not a Baybayin class name"))),
    };
    Ok((base, form))
}

/// The detector's class list with the script semantics of each class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassInventory {
    glyphs: Vec<Glyph>,
    by_name: HashMap<String, u32>,
}

impl Default for ClassInventory {
    fn default() -> Self {
        Self::standard()
    }
}

impl ClassInventory {
    /// The 59-class inventory: three vowels, then each consonant in its
    /// inherent, i, u and killed forms.
    pub fn standard() -> Self {
        let mut pairs = Vec::with_capacity(59);
        for b in Base::VOWELS {
            pairs.push((b, VowelForm::Inherent));
        }
        for b in Base::CONSONANTS {
            for f in VowelForm::CONSONANT_FORMS {
                pairs.push((b, f));
            }
        }
        let glyphs = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (base, vowel_form))| Glyph {
                class_id: i as u32,
                base,
                vowel_form,
                latin: canonical_latin(base, vowel_form).expect("standard pairs are valid"),
            })
            .collect();
        Self::from_glyphs(glyphs).expect("standard inventory is consistent")
    }

    /// Inventory from class names in id order.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let glyphs = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let (base, vowel_form) = parse_glyph_name(n.as_ref())?;
                Ok(Glyph {
                    class_id: i as u32,
                    base,
                    vowel_form,
                    latin: n.as_ref().trim().to_lowercase(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_glyphs(glyphs)
    }

    fn from_glyphs(glyphs: Vec<Glyph>) -> Result<Self> {
        if glyphs.is_empty() {
            return Err(Error::invalid("class inventory is empty"));
        }
        let mut by_name = HashMap::with_capacity(glyphs.len());
        for g in &glyphs {
            if by_name.insert(g.latin.clone(), g.class_id).is_some() {
                return Err(Error::invalid(format!("class name `{}` appears twice", g.latin)));
            }
        }
        Ok(Self { glyphs, by_name })
    }

    /// Parses `classes.txt`: one `<id> <name>` per line, ids dense from 0.
    pub fn parse_classes_file(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, String)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(id) = parts.next() else { continue };
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("invalid class id `{id}`")))?;
            let name = parts
                .next()
                .ok_or_else(|| Error::parse(idx + 1, "missing class name"))?;
            if parts.next().is_some() {
                return Err(Error::parse(idx + 1, "expected `<id> <name>`"));
            }
            entries.push((id, name.to_string()));
        }
        entries.sort_by_key(|e| e.0);
        for (expected, (id, _)) in entries.iter().enumerate() {
            if *id != expected {
                return Err(Error::invalid(format!(
                    "class ids must be dense from 0; expected {expected}, found {id}"
                )));
            }
        }
        let names: Vec<String> = entries.into_iter().map(|e| e.1).collect();
        Self::from_names(&names)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::parse_classes_file(&text).map_err(|e| e.in_file(path))
    }

    pub fn to_classes_file(&self) -> String {
        let mut out = String::new();
        for g in &self.glyphs {
            writeln!(out, "{} {}", g.class_id, g.latin).unwrap();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn glyphs(&self) -> &[Glyph] {
        &self.glyphs
    }

    pub fn get(&self, class_id: u32) -> Result<&Glyph> {
        self.glyphs
            .get(class_id as usize)
            .ok_or(Error::UnknownClass(class_id))
    }

    pub fn id_of(&self, name: &str) -> Option<u32> {
        self.by_name.get(&name.trim().to_lowercase()).copied()
    }

    pub fn names(&self) -> Vec<String> {
        self.glyphs.iter().map(|g| g.latin.clone()).collect()
    }
}

pub fn glyph_to_latin(class_id: u32, inventory: &ClassInventory) -> Result<&str> {
    Ok(inventory.get(class_id)?.latin.as_str())
}
