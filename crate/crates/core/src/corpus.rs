//! Corpus and query file formats.
//!
//! * documents: JSON-lines, `{"id": "...", "text": "..."}` per line
//! * queries: TSV, `query_id<TAB>query_text<TAB>positive_doc_id` per line

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// A query paired with its single relevant document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub positive_doc_id: String,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<()> {
    let mut out = create(path)?;
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let mut queries = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, text, positive] = fields[..] else {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        queries.push(Query {
            id: id.to_owned(),
            text: text.to_owned(),
            positive_doc_id: positive.to_owned(),
        });
    }
    Ok(queries)
}

pub fn write_queries(path: &Path, queries: &[Query]) -> Result<()> {
    let mut out = create(path)?;
    for q in queries {
        writeln!(out, "{}\t{}\t{}", q.id, q.text, q.positive_doc_id)
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.jsonl");
        let docs = vec![
            Document { id: "d1".into(), text: "Disease burden, WHO.".into() },
            Document { id: "d2".into(), text: "tab\tand \"quotes\"".into() },
        ];
        write_documents(&path, &docs).unwrap();
        assert_eq!(read_documents(&path).unwrap(), docs);
    }

    #[test]
    fn malformed_json_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.jsonl");
        std::fs::write(&path, "{\"id\":\"a\",\"text\":\"x\"}\n{oops}\n").unwrap();
        match read_documents(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn queries_round_trip_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.tsv");
        let qs = vec![Query { id: "q1".into(), text: "who burden".into(), positive_doc_id: "d1".into() }];
        write_queries(&path, &qs).unwrap();
        assert_eq!(read_queries(&path).unwrap(), qs);
        std::fs::write(&path, "q1\tonly two\n").unwrap();
        assert!(read_queries(&path).is_err());
    }
}
