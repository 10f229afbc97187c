//! Ambiguous readings and lexicon lookup.
//!
//! A written glyph does not distinguish d from r, e from i, or o from u.
//! [`expand_ambiguities`] enumerates every reading; [`disambiguate`] picks the
//! lexicon word closest to any reading.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_EXPANSION_CAP: usize = 4096;

/// Disjoint groups of interchangeable Latin letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguitySet {
    groups: Vec<Vec<char>>,
    /// Largest candidate set `expand_ambiguities` may produce.
    pub max_candidates: usize,
}

impl Default for AmbiguitySet {
    fn default() -> Self {
        Self {
            groups: vec![vec!['d', 'r'], vec!['e', 'i'], vec!['o', 'u']],
            max_candidates: DEFAULT_EXPANSION_CAP,
        }
    }
}

impl AmbiguitySet {
    pub fn new(groups: Vec<Vec<char>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for g in &groups {
            for &c in g {
                if !seen.insert(c) {
                    return Err(Error::config(format!(
                        "letter `{c}` appears in more than one ambiguity group"
                    )));
                }
            }
        }
        Ok(Self {
            groups: groups.into_iter().filter(|g| !g.is_empty()).collect(),
            max_candidates: DEFAULT_EXPANSION_CAP,
        })
    }

    /// No ambiguity at all.
    pub fn none() -> Self {
        Self {
            groups: vec![],
            max_candidates: DEFAULT_EXPANSION_CAP,
        }
    }

    pub fn groups(&self) -> &[Vec<char>] {
        &self.groups
    }

    pub fn group_of(&self, c: char) -> Option<&[char]> {
        self.groups
            .iter()
            .find(|g| g.contains(&c))
            .map(|g| g.as_slice())
    }

    fn interchangeable(&self, a: char, b: char) -> bool {
        a == b || self.group_of(a).is_some_and(|g| g.contains(&b))
    }

    /// Number of readings of `word`, saturating.
    pub fn candidate_count(&self, word: &str) -> u128 {
        word.chars()
            .map(|c| self.group_of(c).map_or(1, |g| g.len() as u128))
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    fn check_cap(&self, word: &str) -> Result<()> {
        let count = self.candidate_count(word);
        if count > self.max_candidates as u128 {
            return Err(Error::TooAmbiguous {
                count,
                cap: self.max_candidates,
            });
        }
        Ok(())
    }
}

/// Every reading of `word` obtained by swapping letters within their groups.
pub fn expand_ambiguities(word: &str, ambiguity: &AmbiguitySet) -> Result<BTreeSet<String>> {
    ambiguity.check_cap(word)?;
    let mut partial = vec![String::with_capacity(word.len())];
    for c in word.chars() {
        let options: Vec<char> = match ambiguity.group_of(c) {
            Some(g) => g.to_vec(),
            None => vec![c],
        };
        partial = partial
            .iter()
            .flat_map(|p| {
                options.iter().map(move |&o| {
                    let mut s = p.clone();
                    s.push(o);
                    s
                })
            })
            .collect();
    }
    Ok(partial.into_iter().collect())
}

/// Edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    edit_distance(a, b, |x, y| x == y)
}

/// Smallest edit distance from any reading of `word` to `target`.
///
/// Readings choose letters independently per position, so this equals an edit
/// distance in which letters of the same group match for free.
pub fn ambiguous_distance(word: &str, target: &str, ambiguity: &AmbiguitySet) -> usize {
    edit_distance(word, target, |x, y| ambiguity.interchangeable(x, y))
}

fn edit_distance(a: &str, b: &str, same: impl Fn(char, char) -> bool) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(!same(ca, cb));
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word list used to resolve ambiguous readings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    words: BTreeSet<String>,
}

impl Lexicon {
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::invalid("lexicon is empty"));
        }
        Ok(Self { words })
    }

    /// One word per line; blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_words(text.lines())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Disambiguation {
    pub word: String,
    pub distance: usize,
}

/// Lexicon word closest to any reading of `word`.
///
/// Ties go to the word closer to the literal reading, then to the
/// lexicographically smaller word.
pub fn disambiguate(word: &str, lexicon: &Lexicon, ambiguity: &AmbiguitySet) -> Result<Disambiguation> {
    ambiguity.check_cap(word)?;
    let word_len = word.chars().count();
    let mut best: Option<(usize, usize, &str)> = None;
    for cand in lexicon.words() {
        let len_gap = word_len.abs_diff(cand.chars().count());
        if let Some((d, _, _)) = best {
            if len_gap > d {
                continue;
            }
        }
        let d = ambiguous_distance(word, cand, ambiguity);
        let key = (d, levenshtein(word, cand), cand);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (distance, _, w) = best.expect("lexicon is never empty");
    Ok(Disambiguation {
        word: w.to_string(),
        distance,
    })
}
