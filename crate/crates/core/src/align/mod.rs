//! Segments, overlap metrics, baselines and document alignment.
//!
//! Assigned topics are evaluated against gold section headings through the
//! overlap matrix `overlap[h][k]`, the number of paragraphs with heading `h`
//! that were assigned topic `k`:
//!
//! ```text
//! Rec  = Σ_h max_k overlap(h, k) / P
//! Prec = Σ_k max_h overlap(h, k) / P
//! ```
//!
//! with `P` the number of evaluated paragraphs, pooled over the collection.

mod baseline;
mod documents;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub use baseline::{
    cluster_pairs, singleton_clusters, tfidf_concept_baseline, tfidf_concept_vectors,
    translation_table_baseline, BaselineResult, SparseVector, TranslationTable,
};
pub use documents::{
    align_documents, doc_specific_vectors, document_vectors, gold_by_id, DocAlignMode,
    DocumentAlignment, DEFAULT_TOP_N,
};

/// A maximal run of paragraphs sharing one topic; `start..=end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub document: String,
    pub topic: usize,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn paragraph_count(&self) -> usize {
        self.end - self.start + 1
    }
}

/// Splits a topic sequence into maximal constant runs.
pub fn form_segments(document: &str, topics: &[usize]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (t, &j) in topics.iter().enumerate() {
        match out.last_mut() {
            Some(seg) if seg.topic == j => seg.end = t,
            _ => out.push(Segment {
                document: document.to_string(),
                topic: j,
                start: t,
                end: t,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Mono,
    Bilingual,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Mono => "mono",
            Scope::Bilingual => "bilingual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub scope: Scope,
    /// Row labels of `overlap`, sorted.
    pub headings: Vec<String>,
    /// Column labels of `overlap`, sorted.
    pub topics: Vec<usize>,
    pub overlap: Vec<Vec<u32>>,
    pub evaluated: usize,
    /// Paragraphs left out because they have no heading.
    pub excluded: usize,
}

impl AlignmentReport {
    /// `metric,scope,K,value` rows without a header line.
    pub fn csv_rows(&self, k: Option<usize>) -> String {
        let k = k.map(|k| k.to_string()).unwrap_or_default();
        let mut out = String::new();
        for (name, v) in [("precision", self.precision), ("recall", self.recall), ("f1", self.f1)] {
            let _ = writeln!(out, "{name},{},{k},{v}", self.scope.as_str());
        }
        let _ = writeln!(out, "evaluated,{},{k},{}", self.scope.as_str(), self.evaluated);
        let _ = writeln!(out, "excluded,{},{k},{}", self.scope.as_str(), self.excluded);
        out
    }
}

pub const CSV_HEADER: &str = "metric,scope,K,value";

/// Scores assigned topics against gold headings, one entry per paragraph.
/// Paragraphs without a heading are excluded and counted.
pub fn evaluate_alignment(
    assignments: &[usize],
    headings: &[Option<String>],
    scope: Scope,
) -> Result<AlignmentReport> {
    if assignments.len() != headings.len() {
        return Err(Error::Evaluation(format!(
            "{} assignments for {} paragraphs",
            assignments.len(),
            headings.len()
        )));
    }
    let mut rows: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    let mut excluded = 0;
    for (&k, h) in assignments.iter().zip(headings) {
        match h {
            Some(h) => {
                rows.insert(h, 0);
                cols.insert(k, 0);
            }
            None => excluded += 1,
        }
    }
    let evaluated = assignments.len() - excluded;
    if evaluated == 0 {
        return Err(Error::Evaluation("no paragraph has both a topic and a heading".into()));
    }
    for (i, v) in rows.values_mut().enumerate() {
        *v = i;
    }
    for (i, v) in cols.values_mut().enumerate() {
        *v = i;
    }
    let mut overlap = vec![vec![0u32; cols.len()]; rows.len()];
    for (&k, h) in assignments.iter().zip(headings) {
        if let Some(h) = h {
            overlap[rows[h.as_str()]][cols[&k]] += 1;
        }
    }
    let rec_hits: u64 = overlap.iter().map(|r| *r.iter().max().unwrap() as u64).sum();
    let prec_hits: u64 = (0..cols.len())
        .map(|c| overlap.iter().map(|r| r[c]).max().unwrap() as u64)
        .sum();
    let p = evaluated as f64;
    let recall = rec_hits as f64 / p;
    let precision = prec_hits as f64 / p;
    Ok(AlignmentReport {
        precision,
        recall,
        f1: f1(precision, recall),
        scope,
        headings: rows.keys().map(|s| s.to_string()).collect(),
        topics: cols.keys().copied().collect(),
        overlap,
        evaluated,
        excluded,
    })
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Translations of heading labels into a shared label set, e.g. French
/// headings onto their English counterparts. Unmapped labels pass through.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeadingMap {
    map: HashMap<String, String>,
}

impl HeadingMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, from: &str, to: &str) {
        self.map.insert(normalize_heading(from), normalize_heading(to));
    }

    /// Reads `source<TAB>target` lines; `#` lines and blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, name: &str) -> Result<Self> {
        let mut out = HeadingMap::new();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
                    out.insert(a, b)
                }
                _ => return Err(Error::parse(name, n + 1, "expected source<TAB>target")),
            }
        }
        Ok(out)
    }

    pub fn map(&self, heading: &str) -> String {
        let h = normalize_heading(heading);
        self.map.get(&h).cloned().unwrap_or(h)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn normalize_heading(h: &str) -> String {
    h.trim().to_lowercase()
}

/// Gold labels of every paragraph in corpus order, normalized and mapped.
pub fn paragraph_headings(corpus: &Corpus, map: Option<&HeadingMap>) -> Vec<Option<String>> {
    corpus
        .documents
        .iter()
        .flat_map(|d| &d.paragraphs)
        .map(|p| {
            p.heading
                .as_deref()
                .filter(|h| !h.trim().is_empty())
                .map(|h| match map {
                    Some(m) => m.map(h),
                    None => normalize_heading(h),
                })
        })
        .collect()
}
