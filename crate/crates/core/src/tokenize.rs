//! Document membership: text to a set of normalized terms.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Error)]
#[error("invalid UTF-8 at byte offset {offset}")]
pub struct EncodingError {
    pub offset: usize,
}

/// Word segmentation rule. Stored in index files as a single byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segmentation {
    /// UAX #29 word boundaries; only segments containing a letter or digit
    /// become terms.
    UnicodeWords,
}

impl Segmentation {
    pub fn id(self) -> u8 {
        match self {
            Segmentation::UnicodeWords => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Segmentation::UnicodeWords),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenPolicy {
    pub case_fold: bool,
    pub diacritic_fold: bool,
    pub segmentation: Segmentation,
}

impl Default for TokenPolicy {
    fn default() -> Self {
        TokenPolicy {
            case_fold: true,
            diacritic_fold: true,
            segmentation: Segmentation::UnicodeWords,
        }
    }
}

impl TokenPolicy {
    /// Normalizes one already-segmented word.
    pub fn normalize_word(&self, word: &str) -> String {
        let cased = if self.case_fold {
            word.to_lowercase()
        } else {
            word.to_owned()
        };
        if cased.is_ascii() {
            cased
        } else if self.diacritic_fold {
            cased
                .nfd()
                .filter(|c| !is_combining_mark(*c))
                .nfc()
                .collect()
        } else {
            cased.nfc().collect()
        }
    }

    /// Segmented, normalized words in text order, duplicates kept.
    pub fn words<'a>(&'a self, text: &'a str) -> impl Iterator<Item = String> + 'a {
        match self.segmentation {
            Segmentation::UnicodeWords => text.unicode_words().map(move |w| self.normalize_word(w)),
        }
    }
}

pub fn tokenize(text: &str, policy: &TokenPolicy) -> BTreeSet<String> {
    policy.words(text).collect()
}

pub fn tokenize_bytes(
    bytes: &[u8],
    policy: &TokenPolicy,
) -> Result<BTreeSet<String>, EncodingError> {
    let text = std::str::from_utf8(bytes).map_err(|e| EncodingError {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize(text, policy))
}
