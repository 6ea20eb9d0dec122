//! Term-frequency extraction for accident narratives, plus a seeded
//! narrative generator for exercising it.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCount {
    pub term: String,
    pub count: usize,
}

/// Count terms across texts: lowercase, split on non-alphanumeric, drop
/// stopwords and tokens shorter than three characters. Descending count,
/// ties lexicographic.
pub fn word_freq(texts: &[String], stopwords: &BTreeSet<String>) -> Vec<TermCount> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        for token in text.to_lowercase().split(|c: char| !c.is_alphanumeric()) {
            if token.chars().count() < 3 || stopwords.contains(token) {
                continue;
            }
            *counts.entry(token.to_string()).or_insert(0) += 1;
        }
    }
    let mut out: Vec<TermCount> =
        counts.into_iter().map(|(term, count)| TermCount { term, count }).collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    out
}

// Highest-rate terms first; the tail is filler vocabulary.
const NARRATIVE_VOCABULARY: [(&str, f64); 24] = [
    ("speed", 10.0),
    ("driving", 9.0),
    ("turnover", 8.0),
    ("left", 7.0),
    ("drug", 6.0),
    ("influence", 6.0),
    ("vehicle", 3.0),
    ("lane", 3.0),
    ("driver", 3.0),
    ("intersection", 2.5),
    ("signal", 2.5),
    ("brake", 2.0),
    ("merge", 2.0),
    ("shoulder", 2.0),
    ("curve", 1.5),
    ("night", 1.5),
    ("glare", 1.5),
    ("wet", 1.0),
    ("skid", 1.0),
    ("truck", 1.0),
    ("barrier", 1.0),
    ("ramp", 1.0),
    ("junction", 1.0),
    ("overtaking", 1.0),
];

/// Seeded synthetic accident narratives, 8 to 20 words each, drawn from a
/// weighted vocabulary whose heaviest terms are the ones the frequency
/// export is expected to surface.
pub fn gen_narratives(n: usize, seed: u64) -> Vec<String> {
    use rand::Rng;
    let weights: Vec<f64> = NARRATIVE_VOCABULARY.iter().map(|(_, w)| *w).collect();
    let mut generator = rng::seeded(seed);
    (0..n)
        .map(|_| {
            let words = generator.random_range(8..=20);
            let tokens: Vec<&str> = (0..words)
                .map(|_| NARRATIVE_VOCABULARY[rng::pick_weighted(&mut generator, &weights)].0)
                .collect();
            format!("{}.", tokens.join(" "))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_stopwords() -> BTreeSet<String> {
        BTreeSet::new()
    }

    #[test]
    fn empty_input_is_an_empty_list() {
        assert!(word_freq(&[], &no_stopwords()).is_empty());
    }

    #[test]
    fn counts_split_and_ties_match_a_hand_tally() {
        let texts = vec!["speed kills, speed thrills".to_string()];
        let out = word_freq(&texts, &no_stopwords());
        assert_eq!(
            out,
            vec![
                TermCount { term: "speed".into(), count: 2 },
                TermCount { term: "kills".into(), count: 1 },
                TermCount { term: "thrills".into(), count: 1 },
            ]
        );
    }

    #[test]
    fn stopwords_and_short_tokens_are_dropped() {
        let texts = vec!["the car hit THE wall at 90".to_string()];
        let stops: BTreeSet<String> = ["the"].iter().map(|s| s.to_string()).collect();
        let out = word_freq(&texts, &stops);
        let terms: Vec<&str> = out.iter().map(|t| t.term.as_str()).collect();
        assert_eq!(terms, vec!["car", "hit", "wall"]);
    }

    #[test]
    fn generated_narratives_surface_the_embedded_terms() {
        let narratives = gen_narratives(300, 42);
        let out = word_freq(&narratives, &no_stopwords());
        let top: Vec<&str> = out.iter().take(10).map(|t| t.term.as_str()).collect();
        for expected in ["speed", "driving", "turnover"] {
            assert!(top.contains(&expected), "{expected} missing from top 10: {top:?}");
        }
    }

    #[test]
    fn narrative_generation_is_deterministic() {
        assert_eq!(gen_narratives(20, 9), gen_narratives(20, 9));
        assert_ne!(gen_narratives(20, 9), gen_narratives(20, 10));
    }
}
