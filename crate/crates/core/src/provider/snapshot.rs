//! Replayed hit counts.
//!
//! A snapshot maps canonical count queries to integers reported by an
//! external engine, plus the universe size those counts refer to. Lookups
//! of unknown queries fail; a snapshot never invents a 0.
//!
//! Each entry has a role taken from its note: a note of `corrected` or one
//! starting with `corrected:` marks a joint count that was already
//! reconciled and is used in bounds as-is; anything else is a raw count.
//! One query may carry both a raw and a corrected entry.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CountProvider, CountQuery, ProviderDescriptor, ProviderError, ProviderKind};
use crate::measures::{Count, MeasureError, UniverseSize};
use crate::query::QueryExpr;

/// Separates terms within one side of a canonical key.
pub const TERM_DELIMITER: char = '\u{1f}';
/// Separates the include side from the exclude side of a canonical key.
pub const EXCLUDE_DELIMITER: char = '\u{1e}';

const WEB_2010: &str = include_str!("../../data/web_2010_snapshot.json");

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed snapshot: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot entry has no include terms")]
    EmptyInclude,
    #[error("invalid snapshot term {0:?}")]
    InvalidTerm(String),
    #[error("duplicate {role} entry for {key}")]
    Duplicate { key: String, role: EntryRole },
    #[error(transparent)]
    Universe(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryRole {
    Raw,
    Corrected,
}

impl EntryRole {
    fn from_note(note: Option<&str>) -> Self {
        match note.map(str::trim) {
            Some(n) if n == "corrected" || n.starts_with("corrected:") => EntryRole::Corrected,
            _ => EntryRole::Raw,
        }
    }
}

impl fmt::Display for EntryRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryRole::Raw => "raw",
            EntryRole::Corrected => "corrected",
        })
    }
}

/// Order-insensitive key: both sides sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountKey {
    include: Vec<String>,
    exclude: Option<Vec<String>>,
}

fn canonical_side<I, S>(terms: I) -> Result<Vec<String>, SnapshotError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut v: Vec<String> = terms.into_iter().map(Into::into).collect();
    for t in &v {
        if t.is_empty() || t.contains(TERM_DELIMITER) || t.contains(EXCLUDE_DELIMITER) {
            return Err(SnapshotError::InvalidTerm(t.clone()));
        }
    }
    v.sort();
    v.dedup();
    Ok(v)
}

impl CountKey {
    pub fn new<I, S>(include: I, exclude: Option<I>) -> Result<Self, SnapshotError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let include = canonical_side(include)?;
        if include.is_empty() {
            return Err(SnapshotError::EmptyInclude);
        }
        let exclude = match exclude {
            Some(ex) => {
                let ex = canonical_side(ex)?;
                if ex.is_empty() {
                    None
                } else {
                    Some(ex)
                }
            }
            None => None,
        };
        Ok(CountKey { include, exclude })
    }

    pub fn from_query(query: &CountQuery) -> Self {
        CountKey {
            include: query.include.sorted_terms().map(str::to_owned).collect(),
            exclude: query
                .exclude
                .as_ref()
                .map(|e| e.sorted_terms().map(str::to_owned).collect()),
        }
    }

    fn conjunction(q: &QueryExpr) -> Self {
        CountKey {
            include: q.sorted_terms().map(str::to_owned).collect(),
            exclude: None,
        }
    }

    pub fn include(&self) -> &[String] {
        &self.include
    }

    pub fn exclude(&self) -> Option<&[String]> {
        self.exclude.as_deref()
    }

    /// Single-string form of the key using the reserved delimiters.
    pub fn canonical(&self) -> String {
        let mut s = self.include.join(&TERM_DELIMITER.to_string());
        if let Some(ex) = &self.exclude {
            s.push(EXCLUDE_DELIMITER);
            s.push_str(&ex.join(&TERM_DELIMITER.to_string()));
        }
        s
    }
}

impl fmt::Display for CountKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.include.join(";"))?;
        if let Some(ex) = &self.exclude {
            write!(f, " not [{}]", ex.join(";"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotEntry {
    pub n: Count,
    pub role: EntryRole,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Slot {
    raw: Option<SnapshotEntry>,
    corrected: Option<SnapshotEntry>,
}

impl Slot {
    /// The reported count: raw when present, else the only value stored.
    fn reported(&self) -> Option<Count> {
        self.raw.as_ref().or(self.corrected.as_ref()).map(|e| e.n)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEntry {
    include: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exclude: Option<Vec<String>>,
    n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    universe: u64,
    entries: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotTable {
    universe: UniverseSize,
    entries: BTreeMap<CountKey, Slot>,
}

impl SnapshotTable {
    pub fn new(universe: UniverseSize) -> Self {
        SnapshotTable {
            universe,
            entries: BTreeMap::new(),
        }
    }

    /// Hit counts reported by a commercial web search engine in May 2010,
    /// against an assumed web size of 55,000,000,000 pages.
    pub fn web_2010() -> Self {
        Self::from_json_str(WEB_2010).expect("bundled snapshot is valid")
    }

    pub fn universe(&self) -> UniverseSize {
        self.universe
    }

    pub fn insert(
        &mut self,
        key: CountKey,
        n: Count,
        note: Option<String>,
    ) -> Result<(), SnapshotError> {
        let role = EntryRole::from_note(note.as_deref());
        let slot = self.entries.entry(key.clone()).or_default();
        let place = match role {
            EntryRole::Raw => &mut slot.raw,
            EntryRole::Corrected => &mut slot.corrected,
        };
        if place.is_some() {
            return Err(SnapshotError::Duplicate {
                key: key.to_string(),
                role,
            });
        }
        *place = Some(SnapshotEntry { n, role, note });
        Ok(())
    }

    /// The reported count for `key`.
    pub fn get(&self, key: &CountKey) -> Option<Count> {
        self.entries.get(key).and_then(Slot::reported)
    }

    /// All stored entries in canonical key order, raw before corrected.
    pub fn entries(&self) -> impl Iterator<Item = (&CountKey, &SnapshotEntry)> {
        self.entries
            .iter()
            .flat_map(|(k, s)| s.raw.iter().chain(s.corrected.iter()).map(move |e| (k, e)))
    }

    pub fn len(&self) -> usize {
        self.entries().count()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True unless some stored triple n(A), n(A and B), n(A and not B)
    /// violates n(A) = n(A and B) + n(A and not B).
    pub fn partitions_consistent(&self) -> bool {
        self.entries.iter().all(|(key, slot)| {
            let Some(exclude) = &key.exclude else {
                return true;
            };
            let whole = CountKey {
                include: key.include.clone(),
                exclude: None,
            };
            let mut joint_terms: Vec<String> = key.include.iter().chain(exclude).cloned().collect();
            joint_terms.sort();
            joint_terms.dedup();
            let joint = CountKey {
                include: joint_terms,
                exclude: None,
            };
            match (self.get(&whole), self.get(&joint), slot.reported()) {
                (Some(a), Some(ab), Some(a_not_b)) => {
                    u128::from(ab.0) + u128::from(a_not_b.0) == u128::from(a.0)
                }
                _ => true,
            }
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self, SnapshotError> {
        let file: SnapshotFile = serde_json::from_str(s)?;
        let mut table = SnapshotTable::new(UniverseSize::new(file.universe)?);
        for e in file.entries {
            let key = CountKey::new(e.include, e.exclude)?;
            table.insert(key, Count(e.n), e.note)?;
        }
        Ok(table)
    }

    pub fn to_json_string(&self) -> String {
        let file = SnapshotFile {
            universe: self.universe.get(),
            entries: self
                .entries()
                .map(|(k, e)| FileEntry {
                    include: k.include.clone(),
                    exclude: k.exclude.clone(),
                    n: e.n.0,
                    note: e.note.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("snapshot serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SnapshotError> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|source| SnapshotError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|source| SnapshotError::Io {
            path: path.to_owned(),
            source,
        })
    }
}

impl CountProvider for SnapshotTable {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            kind: ProviderKind::Snapshot,
            exact: self.partitions_consistent(),
            universe: self.universe.get(),
        }
    }

    fn count(&self, query: &CountQuery) -> Result<Count, ProviderError> {
        let key = CountKey::from_query(query);
        self.get(&key)
            .ok_or_else(|| ProviderError::MissingEntry(key.to_string()))
    }

    fn reconciled_joint(&self, joint: &QueryExpr) -> Option<Count> {
        self.entries
            .get(&CountKey::conjunction(joint))
            .and_then(|s| s.corrected.as_ref())
            .map(|e| e.n)
    }
}
