mod oracles;

use baybayin_core::script::{
    ambiguous_distance, disambiguate, expand_ambiguities, levenshtein, AmbiguitySet, Lexicon,
};
use proptest::prelude::*;

fn word() -> impl Strategy<Value = String> {
    "[abdegiklmnoprstuy]{0,8}"
}

proptest! {
    #[test]
    fn expansion_contains_word_and_is_closed(w in word()) {
        let amb = AmbiguitySet::default();
        let set = expand_ambiguities(&w, &amb).unwrap();
        prop_assert!(set.contains(&w));
        prop_assert_eq!(&set, &oracles::expand(&w, &amb));
        prop_assert_eq!(set.len() as u128, amb.candidate_count(&w));
        for c in &set {
            prop_assert_eq!(&expand_ambiguities(c, &amb).unwrap(), &set);
        }
    }

    #[test]
    fn levenshtein_matches_reference(a in word(), b in word()) {
        prop_assert_eq!(levenshtein(&a, &b), oracles::levenshtein(&a, &b));
    }

    #[test]
    fn levenshtein_is_a_metric(a in word(), b in word(), c in word()) {
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert_eq!(levenshtein(&a, &b) == 0, a == b);
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
    }

    #[test]
    fn ambiguous_distance_is_min_over_readings(a in "[adeioru]{0,6}", b in "[adeioru]{0,6}") {
        let amb = AmbiguitySet::default();
        let want = oracles::expand(&a, &amb).iter().map(|c| oracles::levenshtein(c, &b)).min().unwrap();
        prop_assert_eq!(ambiguous_distance(&a, &b, &amb), want);
    }

    #[test]
    fn disambiguation_matches_enumeration(w in word(), lex in prop::collection::btree_set("[abdegiklmnoprstuy]{1,7}", 1..12)) {
        let amb = AmbiguitySet::default();
        let words: Vec<String> = lex.into_iter().collect();
        let lexicon = Lexicon::from_words(&words).unwrap();
        let got = disambiguate(&w, &lexicon, &amb).unwrap();
        let (want, dist) = oracles::disambiguate(&w, &words, &amb);
        prop_assert_eq!(got.distance, dist);
        prop_assert_eq!(got.word.as_str(), want);
        let hit = expand_ambiguities(&w, &amb).unwrap().iter().any(|c| lexicon.contains(c));
        prop_assert_eq!(got.distance == 0, hit);
    }
}

#[test]
fn da_expands_to_da_and_ra() {
    let set = expand_ambiguities("da", &AmbiguitySet::default()).unwrap();
    assert_eq!(set.into_iter().collect::<Vec<_>>(), ["da", "ra"]);
}

#[test]
fn lexicon_member_wins_at_distance_zero() {
    let lex = Lexicon::from_words(["dahon", "gwapo", "malamig"]).unwrap();
    let amb = AmbiguitySet::default();
    let d = disambiguate("gwapu", &lex, &amb).unwrap();
    assert_eq!((d.word.as_str(), d.distance), ("gwapo", 0));
    let d = disambiguate("rahun", &lex, &amb).unwrap();
    assert_eq!((d.word.as_str(), d.distance), ("dahon", 0));
}
