use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::tokenize::TokenPolicy;

/// Separator used in human-readable labels of multi-term queries.
pub const LABEL_SEPARATOR: char = ';';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query has no terms")]
    Empty,
    #[error("query term must not be empty")]
    EmptyTerm,
    #[error("query word {0:?} produced no terms under the active token policy")]
    NoTermsAfterNormalization(String),
}

/// A conjunction of one or more normalized terms.
///
/// Equality, ordering and hashing use the term set; the order in which the
/// terms were first given is kept only for labels, so `flying;air` stays
/// `flying;air` in output.
#[derive(Debug, Clone)]
pub struct QueryExpr {
    display: Vec<String>,
    set: BTreeSet<String>,
}

impl QueryExpr {
    /// Builds a query from terms that are already normalized.
    pub fn new<I, S>(terms: I) -> Result<Self, QueryError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut display = Vec::new();
        let mut set = BTreeSet::new();
        for t in terms {
            let t = t.into();
            if t.is_empty() {
                return Err(QueryError::EmptyTerm);
            }
            if set.insert(t.clone()) {
                display.push(t);
            }
        }
        if set.is_empty() {
            return Err(QueryError::Empty);
        }
        Ok(QueryExpr { display, set })
    }

    pub fn term(term: impl Into<String>) -> Result<Self, QueryError> {
        Self::new([term])
    }

    /// Normalizes raw user words with `policy`. A word that segments into
    /// several terms contributes all of them to the conjunction.
    pub fn from_words<I, S>(words: I, policy: &TokenPolicy) -> Result<Self, QueryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut terms = Vec::new();
        for w in words {
            let w = w.as_ref();
            let before = terms.len();
            terms.extend(policy.words(w));
            if terms.len() == before {
                return Err(QueryError::NoTermsAfterNormalization(w.to_owned()));
            }
        }
        Self::new(terms)
    }

    /// Parses a `;`-separated label such as `flying;air`.
    pub fn parse_label(label: &str, policy: &TokenPolicy) -> Result<Self, QueryError> {
        let words: Vec<&str> = label
            .split(LABEL_SEPARATOR)
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(QueryError::Empty);
        }
        Self::from_words(words, policy)
    }

    /// Terms in first-given order.
    pub fn terms(&self) -> &[String] {
        &self.display
    }

    /// Terms in lexicographic order.
    pub fn sorted_terms(&self) -> impl Iterator<Item = &str> {
        self.set.iter().map(String::as_str)
    }

    pub fn term_set(&self) -> &BTreeSet<String> {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Conjunction of both queries.
    pub fn union(&self, other: &QueryExpr) -> QueryExpr {
        let mut display = self.display.clone();
        let mut set = self.set.clone();
        for t in &other.display {
            if set.insert(t.clone()) {
                display.push(t.clone());
            }
        }
        QueryExpr { display, set }
    }

    pub fn label(&self) -> String {
        self.display.join(&LABEL_SEPARATOR.to_string())
    }
}

impl PartialEq for QueryExpr {
    fn eq(&self, other: &Self) -> bool {
        self.set == other.set
    }
}

impl Eq for QueryExpr {}

impl Hash for QueryExpr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.set.hash(state);
    }
}

impl PartialOrd for QueryExpr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueryExpr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.set.cmp(&other.set)
    }
}

impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
