use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::corpus::is_concept_id;
use crate::error::{Error, Result};

/// A candidate concept for a surface form with its lexicon prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub concept: String,
    pub prior: f64,
}

impl Candidate {
    pub fn new(concept: impl Into<String>, prior: f64) -> Self {
        Candidate {
            concept: concept.into(),
            prior,
        }
    }
}

/// Orders candidates by descending prior, then by concept id.
pub(crate) fn canonical_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.prior
        .total_cmp(&a.prior)
        .then_with(|| a.concept.cmp(&b.concept))
}

/// Map from (possibly multi-word) surface forms to candidate concepts.
#[derive(Debug, Clone, Default)]
pub struct ConceptLexicon {
    entries: HashMap<Vec<String>, Vec<Candidate>>,
    max_len: usize,
}

const PRIOR_SLACK: f64 = 1e-9;

impl ConceptLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a candidate for `surface` (whitespace-separated words, case-folded).
    pub fn insert(&mut self, surface: &str, concept: &str, prior: f64) -> Result<()> {
        let key: Vec<String> = surface.split_whitespace().map(str::to_lowercase).collect();
        if key.is_empty() {
            return Err(Error::Validation("empty surface form in lexicon".into()));
        }
        if !is_concept_id(concept) {
            return Err(Error::Validation(format!("malformed concept id {concept:?}")));
        }
        if !(0.0..=1.0).contains(&prior) {
            return Err(Error::Validation(format!(
                "prior {prior} for {surface:?} outside [0, 1]"
            )));
        }
        let list = self.entries.entry(key.clone()).or_default();
        if list.iter().any(|c| c.concept == concept) {
            return Err(Error::Validation(format!(
                "duplicate candidate {concept} for {surface:?}"
            )));
        }
        let total: f64 = list.iter().map(|c| c.prior).sum::<f64>() + prior;
        if total > 1.0 + PRIOR_SLACK {
            return Err(Error::Validation(format!(
                "priors for {surface:?} sum to {total} > 1"
            )));
        }
        list.push(Candidate::new(concept, prior));
        list.sort_by(canonical_order);
        self.max_len = self.max_len.max(key.len());
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Parses `surface<TAB>concept<TAB>prior` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_reader<R: Read>(reader: R, name: &str) -> Result<Self> {
        let mut lexicon = ConceptLexicon::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::parse(name, line_no, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    name,
                    line_no,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            let prior: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::parse(name, line_no, format!("bad prior {:?}", fields[2])))?;
            lexicon
                .insert(fields[0], fields[1].trim(), prior)
                .map_err(|e| Error::parse(name, line_no, e.to_string()))?;
        }
        Ok(lexicon)
    }

    /// Candidates in canonical order (descending prior, then concept id).
    pub fn candidates(&self, surface: &[&str]) -> Option<&[Candidate]> {
        let key: Vec<String> = surface.iter().map(|s| (*s).to_owned()).collect();
        self.entries.get(&key).map(Vec::as_slice)
    }

    /// Length in words of the longest surface form.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
