//! Binary index file.
//!
//! ```text
//! magic          4 bytes  "MBIX"
//! version        u16 LE
//! case_fold      u8 (0|1)
//! diacritic_fold u8 (0|1)
//! segmentation   u8
//! total_docs     varint
//! term_count     varint
//! term_count times, terms in ascending byte order:
//!     term_len   varint
//!     term       UTF-8 bytes
//!     doc_count  varint
//!     first id   varint, then doc_count - 1 gaps (id - previous id), varint
//! crc32          u32 LE over every preceding byte
//! ```
//!
//! Varints are LEB128: 7 data bits per byte, high bit set on all but the
//! last byte. The encoding is a pure function of the index contents, so the
//! same documents always produce the same bytes.

use std::collections::BTreeMap;

use super::{IndexError, InvertedIndex, PostingList};
use crate::tokenize::{Segmentation, TokenPolicy};

pub const MAGIC: [u8; 4] = *b"MBIX";
pub const FORMAT_VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 3;
const TRAILER_LEN: usize = 4;

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> IndexError {
    IndexError::Corrupt(msg.into())
}

impl<'a> Reader<'a> {
    fn varint(&mut self) -> Result<u64, IndexError> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let byte = *self
                .buf
                .get(self.pos)
                .ok_or_else(|| corrupt("truncated varint"))?;
            self.pos += 1;
            let bits = u64::from(byte & 0x7f);
            if shift == 63 && bits > 1 {
                return Err(corrupt("varint overflows 64 bits"));
            }
            v |= bits << shift;
            if byte & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(corrupt("varint overflows 64 bits"))
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt("truncated data"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}

impl InvertedIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.policy.case_fold as u8);
        out.push(self.policy.diacritic_fold as u8);
        out.push(self.policy.segmentation.id());
        put_varint(&mut out, self.total_docs);
        put_varint(&mut out, self.lexicon.len() as u64);
        for (term, postings) in &self.lexicon {
            put_varint(&mut out, term.len() as u64);
            out.extend_from_slice(term.as_bytes());
            let ids = postings.as_slice();
            put_varint(&mut out, ids.len() as u64);
            let mut prev = None;
            for &id in ids {
                let gap = match prev {
                    None => id,
                    Some(p) => id - p,
                };
                put_varint(&mut out, gap.into());
                prev = Some(id);
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        if bytes.len() < HEADER_LEN + TRAILER_LEN {
            return Err(corrupt("file too short"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(IndexError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let (body, trailer) = bytes.split_at(bytes.len() - TRAILER_LEN);
        let stored = u32::from_le_bytes(trailer.try_into().unwrap());
        if crc32fast::hash(body) != stored {
            return Err(corrupt("checksum mismatch"));
        }

        let flag = |b: u8, what: &str| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(corrupt(format!("invalid {what} flag {b}"))),
        };
        let policy = TokenPolicy {
            case_fold: flag(body[6], "case_fold")?,
            diacritic_fold: flag(body[7], "diacritic_fold")?,
            segmentation: Segmentation::from_id(body[8])
                .ok_or_else(|| corrupt(format!("unknown segmentation id {}", body[8])))?,
        };

        let mut r = Reader {
            buf: body,
            pos: HEADER_LEN,
        };
        let total_docs = r.varint()?;
        if total_docs > u64::from(u32::MAX) {
            return Err(corrupt("document count exceeds id space"));
        }
        let term_count = r.varint()?;
        let mut lexicon = BTreeMap::new();
        let mut last_term: Option<&str> = None;
        for _ in 0..term_count {
            let len = usize::try_from(r.varint()?).map_err(|_| corrupt("term length"))?;
            let term =
                std::str::from_utf8(r.bytes(len)?).map_err(|_| corrupt("term is not UTF-8"))?;
            if term.is_empty() || last_term.is_some_and(|prev| prev >= term) {
                return Err(corrupt("term dictionary is not strictly ascending"));
            }
            last_term = Some(term);
            let n = r.varint()?;
            if n == 0 || n > total_docs {
                return Err(corrupt(format!(
                    "term {term:?} has invalid document count {n}"
                )));
            }
            let mut ids = Vec::with_capacity(n as usize);
            let mut prev: Option<u64> = None;
            for _ in 0..n {
                let gap = r.varint()?;
                let id = match prev {
                    None => gap,
                    Some(_) if gap == 0 => return Err(corrupt("zero gap in posting list")),
                    Some(p) => p
                        .checked_add(gap)
                        .ok_or_else(|| corrupt("posting id overflow"))?,
                };
                if id >= total_docs {
                    return Err(corrupt(format!("posting id {id} out of range")));
                }
                ids.push(id as u32);
                prev = Some(id);
            }
            lexicon.insert(term.to_owned(), PostingList(ids));
        }
        if r.pos != body.len() {
            return Err(corrupt("trailing bytes after term dictionary"));
        }
        Ok(InvertedIndex::from_parts(lexicon, total_docs, policy))
    }
}
