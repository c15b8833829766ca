//! On-disk index format.
//!
//! Little-endian throughout:
//!
//! ```text
//! header    magic "DFFLIDX\0" (8) | version u32 (1) | dim u32 | doc_count u32
//! offsets   (dim + 1) × u64, byte offsets of each term's postings relative to
//!           the start of the posting section; entry `dim` is its total length
//! postings  per term: count varint, then count × (doc-id delta varint, weight f32)
//!           the first delta of a list is the absolute doc number
//! doc table doc_count × (indexed length u32 | id byte length u32 | UTF-8 id)
//! ```
//!
//! Varints are unsigned LEB128.

use std::fs;
use std::path::Path;

use super::{InvertedIndex, PostingList};
use crate::error::{Error, Result};
use crate::sparse::TermId;

const MAGIC: &[u8; 8] = b"DFFLIDX\0";
const VERSION: u32 = 1;

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::corrupt("index", format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.take(1)?[0];
            v |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::corrupt("index", "varint too long"))
    }
}

impl InvertedIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut postings = Vec::new();
        let mut offsets = Vec::with_capacity(self.dim + 1);
        for list in &self.lists {
            offsets.push(postings.len() as u64);
            put_varint(&mut postings, list.postings.len() as u64);
            let mut prev = 0u32;
            for &(d, w) in &list.postings {
                put_varint(&mut postings, (d - prev) as u64);
                postings.extend_from_slice(&w.to_le_bytes());
                prev = d;
            }
        }
        offsets.push(postings.len() as u64);

        let mut out = Vec::with_capacity(20 + 8 * offsets.len() + postings.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.doc_count() as u32).to_le_bytes());
        for o in offsets {
            out.extend_from_slice(&o.to_le_bytes());
        }
        out.extend_from_slice(&postings);
        for (id, &len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(&(id.len() as u32).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::corrupt("index", "bad magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::corrupt("index", format!("unsupported version {version}")));
        }
        let dim = r.u32()? as usize;
        let doc_count = r.u32()? as usize;
        let offsets = (0..=dim).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let base = r.pos;
        let section_len = *offsets.last().unwrap() as usize;

        let mut lists = Vec::with_capacity(dim);
        for (t, w) in offsets.windows(2).enumerate() {
            if w[0] > w[1] || w[1] as usize > section_len {
                return Err(Error::corrupt("index", format!("bad offsets for term {t}")));
            }
            r.pos = base + w[0] as usize;
            let count = r.varint()? as usize;
            let mut postings = Vec::with_capacity(count.min(doc_count));
            let mut doc = 0u64;
            for i in 0..count {
                let delta = r.varint()?;
                if i > 0 && delta == 0 {
                    return Err(Error::corrupt("index", format!("repeated doc in term {t}")));
                }
                doc += delta;
                if doc >= doc_count as u64 {
                    return Err(Error::corrupt("index", format!("doc {doc} out of range in term {t}")));
                }
                let weight = r.f32()?;
                if !(weight > 0.0 && weight.is_finite()) {
                    return Err(Error::corrupt("index", format!("bad weight in term {t}")));
                }
                postings.push((doc as u32, weight));
            }
            if r.pos != base + w[1] as usize {
                return Err(Error::corrupt("index", format!("length mismatch in term {t}")));
            }
            lists.push(PostingList {
                term: t as TermId,
                postings,
            });
        }

        r.pos = base + section_len;
        let mut doc_ids = Vec::with_capacity(doc_count);
        let mut doc_lengths = Vec::with_capacity(doc_count);
        for _ in 0..doc_count {
            doc_lengths.push(r.u32()?);
            let n = r.u32()? as usize;
            let id = std::str::from_utf8(r.take(n)?)
                .map_err(|_| Error::corrupt("index", "doc id is not UTF-8"))?;
            doc_ids.push(id.to_owned());
        }
        if r.pos != bytes.len() {
            return Err(Error::corrupt("index", "trailing bytes"));
        }
        let idx = InvertedIndex {
            dim,
            doc_ids,
            doc_lengths,
            lists,
        };
        let total_len: u64 = idx.doc_lengths.iter().map(|&l| l as u64).sum();
        if total_len != idx.total_postings() as u64 {
            return Err(Error::corrupt("index", "doc lengths disagree with postings"));
        }
        Ok(idx)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_index;
    use super::*;
    use crate::sparse::SparseVector;
    use proptest::prelude::*;

    #[test]
    fn varint_encoding() {
        let mut out = Vec::new();
        put_varint(&mut out, 300);
        assert_eq!(out, vec![0xac, 0x02]);
        let mut r = Reader { bytes: &out, pos: 0 };
        assert_eq!(r.varint().unwrap(), 300);
    }

    #[test]
    fn header_layout() {
        let docs = [SparseVector::from_entries("a", [(1, 0.5)], 3).unwrap()];
        let bytes = build_index(&docs, 3).unwrap().to_bytes();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 1);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let docs = [SparseVector::from_entries("a", [(1, 0.5)], 3).unwrap()];
        let bytes = build_index(&docs, 3).unwrap().to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(InvertedIndex::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(InvertedIndex::from_bytes(&bad).is_err());
        assert!(InvertedIndex::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(InvertedIndex::from_bytes(&[]).is_err());
    }

    proptest! {
        #[test]
        fn round_trips(docs in prop::collection::vec(
            prop::collection::btree_map(0u32..20, 0.001f64..10.0, 0..12), 1..30)
        ) {
            let vs: Vec<SparseVector> = docs.into_iter().enumerate()
                .map(|(i, m)| SparseVector::from_entries(format!("doc-{i}"), m, 20).unwrap())
                .collect();
            let idx = build_index(&vs, 20).unwrap();
            let back = InvertedIndex::from_bytes(&idx.to_bytes()).unwrap();
            prop_assert_eq!(back, idx);
        }
    }
}
