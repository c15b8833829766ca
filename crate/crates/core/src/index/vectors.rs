//! Encoded-vector interchange: JSON-lines `{"id": ..., "vector": {"<term>": <weight>}}`.
//!
//! Weights are written at 32-bit precision, the precision the index keeps.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::text::Vocabulary;

#[derive(Serialize, Deserialize)]
struct VectorRecord {
    id: String,
    vector: BTreeMap<String, f32>,
}

pub fn write_vectors(path: &Path, vectors: &[SparseVector], vocab: &Vocabulary) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(f);
    for v in vectors {
        let mut vector = BTreeMap::new();
        for &(t, w) in v.entries() {
            let term = vocab.term(t).ok_or(Error::TermOutOfRange {
                term: t,
                dim: vocab.len(),
            })?;
            let w = w as f32;
            if w > 0.0 {
                vector.insert(term.to_owned(), w);
            }
        }
        let record = VectorRecord {
            id: v.doc_id().to_owned(),
            vector,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_vectors(path: &Path, vocab: &Vocabulary) -> Result<Vec<SparseVector>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut vectors = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: VectorRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let mut entries = Vec::with_capacity(record.vector.len());
        for (term, w) in record.vector {
            let id = vocab
                .id(&term)
                .ok_or_else(|| Error::parse(path, i + 1, format!("unknown term `{term}`")))?;
            entries.push((id, w as f64));
        }
        let v = SparseVector::from_entries(record.id, entries, vocab.len())
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        vectors.push(v);
    }
    Ok(vectors)
}
