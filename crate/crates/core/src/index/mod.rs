//! Document-level inverted index.
//!
//! Each term maps to the ascending list of documents whose term set contains
//! it. Term frequencies are not stored: a document counts once towards any
//! query no matter how often a term repeats, which gives page-count
//! semantics for every count the index answers.

mod format;
pub mod intersect;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use thiserror::Error;

use crate::measures::Count;
use crate::query::QueryExpr;
use crate::tokenize::{tokenize, tokenize_bytes, EncodingError, TokenPolicy};

pub use format::{FORMAT_VERSION, MAGIC};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("index is full: at most {} documents are supported", u32::MAX)]
    Capacity,
    #[error("posting list is not strictly ascending at position {0}")]
    Unsorted(usize),
    #[error("index file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("index file has format version {found}, this build reads version {expected}")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("corrupt index file: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocumentId(pub u32);

/// Strictly ascending document ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostingList(Vec<u32>);

impl PostingList {
    pub fn from_sorted(ids: Vec<u32>) -> Result<Self, IndexError> {
        if let Some(pos) = ids.windows(2).position(|w| w[0] >= w[1]) {
            return Err(IndexError::Unsorted(pos + 1));
        }
        Ok(PostingList(ids))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: DocumentId) -> bool {
        self.0.binary_search(&id.0).is_ok()
    }
}

/// Single-writer builder. Documents get ids in insertion order.
#[derive(Debug)]
pub struct IndexBuilder {
    policy: TokenPolicy,
    postings: HashMap<String, Vec<u32>>,
    total_docs: u32,
}

impl IndexBuilder {
    pub fn new(policy: TokenPolicy) -> Self {
        IndexBuilder {
            policy,
            postings: HashMap::new(),
            total_docs: 0,
        }
    }

    pub fn policy(&self) -> &TokenPolicy {
        &self.policy
    }

    pub fn total_docs(&self) -> u64 {
        self.total_docs.into()
    }

    pub fn add_document(&mut self, text: &str) -> Result<DocumentId, IndexError> {
        let terms = tokenize(text, &self.policy);
        self.insert_terms(terms)
    }

    pub fn add_document_bytes(&mut self, bytes: &[u8]) -> Result<DocumentId, IndexError> {
        let terms = tokenize_bytes(bytes, &self.policy)?;
        self.insert_terms(terms)
    }

    fn insert_terms(
        &mut self,
        terms: impl IntoIterator<Item = String>,
    ) -> Result<DocumentId, IndexError> {
        let id = self.total_docs;
        let next = id.checked_add(1).ok_or(IndexError::Capacity)?;
        for t in terms {
            self.postings.entry(t).or_default().push(id);
        }
        self.total_docs = next;
        Ok(DocumentId(id))
    }

    pub fn finish(self) -> InvertedIndex {
        let lexicon = self
            .postings
            .into_iter()
            .map(|(t, ids)| (t, PostingList(ids)))
            .collect();
        InvertedIndex {
            lexicon,
            total_docs: self.total_docs.into(),
            policy: self.policy,
        }
    }
}

/// A finalized, immutable index. All queries take `&self`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    lexicon: BTreeMap<String, PostingList>,
    total_docs: u64,
    policy: TokenPolicy,
}

impl InvertedIndex {
    pub fn builder(policy: TokenPolicy) -> IndexBuilder {
        IndexBuilder::new(policy)
    }

    /// Indexes `docs` in order with `policy`.
    pub fn from_documents<I, S>(policy: TokenPolicy, docs: I) -> Result<Self, IndexError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut b = IndexBuilder::new(policy);
        for d in docs {
            b.add_document(d.as_ref())?;
        }
        Ok(b.finish())
    }

    pub(crate) fn from_parts(
        lexicon: BTreeMap<String, PostingList>,
        total_docs: u64,
        policy: TokenPolicy,
    ) -> Self {
        InvertedIndex {
            lexicon,
            total_docs,
            policy,
        }
    }

    pub fn total_docs(&self) -> Count {
        Count(self.total_docs)
    }

    pub fn policy(&self) -> &TokenPolicy {
        &self.policy
    }

    pub fn term_count(&self) -> usize {
        self.lexicon.len()
    }

    pub fn postings(&self, term: &str) -> Option<&PostingList> {
        self.lexicon.get(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &PostingList)> {
        self.lexicon.iter().map(|(t, p)| (t.as_str(), p))
    }

    pub fn doc_frequency(&self, term: &str) -> Count {
        Count(self.lexicon.get(term).map_or(0, |p| p.len() as u64))
    }

    /// Number of documents containing every term of `query`.
    pub fn conjunction_count(&self, query: &QueryExpr) -> Count {
        let mut lists = Vec::with_capacity(query.len());
        for t in query.sorted_terms() {
            match self.lexicon.get(t) {
                Some(p) => lists.push(p.as_slice()),
                None => return Count(0),
            }
        }
        Count(intersect::intersection_count(&mut lists) as u64)
    }

    /// Documents containing all of `include` but not all of `exclude`.
    ///
    /// A multi-term `exclude` removes only documents holding the whole
    /// conjunction, like a minus operator applied to a quoted group.
    pub fn conjunction_but_not_count(&self, include: &QueryExpr, exclude: &QueryExpr) -> Count {
        // The documents removed are exactly those matching include + exclude,
        // a subset of those matching include.
        let all = self.conjunction_count(include);
        let both = self.conjunction_count(&include.union(exclude));
        Count(all.0 - both.0)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), IndexError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|source| IndexError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, IndexError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| IndexError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
