//! Test-only reference implementations. Nothing here touches posting lists:
//! counts come from scanning every document's term set.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

/// Documents kept as plain term sets.
pub struct NaiveCorpus {
    pub docs: Vec<BTreeSet<String>>,
}

impl NaiveCorpus {
    pub fn doc_frequency(&self, term: &str) -> u64 {
        self.docs.iter().filter(|d| d.contains(term)).count() as u64
    }

    pub fn conjunction(&self, terms: &[String]) -> u64 {
        self.docs
            .iter()
            .filter(|d| terms.iter().all(|t| d.contains(t)))
            .count() as u64
    }

    pub fn but_not(&self, include: &[String], exclude: &[String]) -> u64 {
        self.docs
            .iter()
            .filter(|d| include.iter().all(|t| d.contains(t)))
            .filter(|d| !exclude.iter().all(|t| d.contains(t)))
            .count() as u64
    }
}

pub fn vocabulary(size: usize) -> Vec<String> {
    (0..size).map(|i| format!("w{i}")).collect()
}

/// Random documents over `vocab`, returned both as text (with repeats and
/// mixed case, to exercise set semantics and folding) and as term sets.
pub fn random_corpus<R: Rng>(
    rng: &mut R,
    n_docs: usize,
    vocab: &[String],
    max_len: usize,
) -> (Vec<String>, NaiveCorpus) {
    let mut texts = Vec::with_capacity(n_docs);
    let mut docs = Vec::with_capacity(n_docs);
    // skew: a few terms are common, most are rare
    let weights: Vec<f64> = (0..vocab.len()).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let dist = rand::distributions::WeightedIndex::new(&weights).unwrap();
    for _ in 0..n_docs {
        let len = rng.gen_range(0..=max_len);
        let mut words = Vec::with_capacity(len);
        let mut set = BTreeSet::new();
        for _ in 0..len {
            let w = &vocab[rng.sample(&dist)];
            set.insert(w.clone());
            if rng.gen_bool(0.1) {
                words.push(w.to_uppercase());
            } else {
                words.push(w.clone());
            }
        }
        texts.push(words.join(if rng.gen_bool(0.5) { " " } else { ", " }));
        docs.push(set);
    }
    (texts, NaiveCorpus { docs })
}

pub fn random_query<R: Rng>(rng: &mut R, vocab: &[String], max_terms: usize) -> Vec<String> {
    let k = rng.gen_range(1..=max_terms);
    vocab.choose_multiple(rng, k).cloned().collect()
}
