//! TREC qrels (`query_id 0 doc_id grade`) and run (`query_id Q0 doc_id rank score tag`) files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::metrics::{Qrels, Run};
use crate::error::{Error, Result};

pub fn parse_qrels(text: &str, path: &Path) -> Result<Qrels> {
    let mut qrels = Qrels::default();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [query, _, doc, grade] = fields[..] else {
            return Err(Error::parse(path, i + 1, "expected `query_id 0 doc_id grade`"));
        };
        let grade: u32 = grade
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad grade `{grade}`")))?;
        qrels.insert(query, doc, grade);
    }
    Ok(qrels)
}

pub fn read_qrels(path: &Path) -> Result<Qrels> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_qrels(&text, path)
}

pub fn format_qrels(qrels: &Qrels) -> String {
    let mut out = String::new();
    for (q, docs) in &qrels.judgments {
        for (d, g) in docs {
            writeln!(out, "{q} 0 {d} {g}").unwrap();
        }
    }
    out
}

/// Run lines for one query, ranks starting at 1.
pub fn format_run_lines(query: &str, ranking: &[(String, f64)], tag: &str) -> String {
    let mut out = String::new();
    for (i, (doc, score)) in ranking.iter().enumerate() {
        writeln!(out, "{query} Q0 {doc} {} {score:.6} {tag}", i + 1).unwrap();
    }
    out
}

pub fn format_run(run: &Run, tag: &str) -> String {
    run.rankings
        .iter()
        .map(|(q, r)| format_run_lines(q, r, tag))
        .collect()
}

/// Parses a run file; each query's lines are re-sorted by rank.
pub fn parse_run(text: &str, path: &Path) -> Result<Run> {
    let mut ranked: std::collections::BTreeMap<String, Vec<(usize, String, f64)>> = Default::default();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [query, _, doc, rank, score, _] = fields[..] else {
            return Err(Error::parse(path, i + 1, "expected `query_id Q0 doc_id rank score tag`"));
        };
        let rank: usize = rank
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad rank `{rank}`")))?;
        let score: f64 = score
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad score `{score}`")))?;
        ranked
            .entry(query.to_owned())
            .or_default()
            .push((rank, doc.to_owned(), score));
    }
    let mut run = Run::default();
    for (q, mut rows) in ranked {
        rows.sort_by_key(|r| r.0);
        run.insert(q, rows.into_iter().map(|(_, d, s)| (d, s)).collect());
    }
    Ok(run)
}

pub fn read_run(path: &Path) -> Result<Run> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run(&text, path)
}
