//! Paragraph-level word roles.
//!
//! Every token is assigned one of three w-topics: background, document
//! specific or theme specific. Assignments are drawn by collapsed Gibbs
//! sampling with the conditional
//!
//! ```text
//! p(s = l | rest) ∝ g_l(w) · (n_w^l + η) / (n_*^l + Wη) · (n_t^l + γ) / (n_t^* + 3γ)
//! ```
//!
//! where the document-specific counts (`l = 2`) are kept per document and
//! `g` is a fixed per-word bias computed from paragraph and document
//! frequencies. Only theme-specific tokens reach the theme HMM.

mod models;
mod sampler;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{FrequencyTables, IndexedCorpus, WordId};
use crate::error::{Error, Result};

pub use models::{export_language_models, DocumentModel, LanguageModels, RankedWord};
pub use sampler::{fold_in, run_wtopic_sampler, WTopicSampler};

/// Role of a token within its paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum WTopic {
    Background = 0,
    DocumentSpecific = 1,
    ThemeSpecific = 2,
}

impl WTopic {
    pub const ALL: [WTopic; 3] = [
        WTopic::Background,
        WTopic::DocumentSpecific,
        WTopic::ThemeSpecific,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> WTopic {
        WTopic::ALL[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WTopicHyper {
    /// Smoothing of the w-topic word distributions.
    pub eta: f64,
    /// Smoothing of the per-paragraph w-topic mixture.
    pub gamma: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl WTopicHyper {
    /// Defaults for a vocabulary of `w` words over `p` paragraphs:
    /// η = W/100000 and γ = W/P, 200 sweeps with 100 burn-in.
    pub fn for_corpus(w: usize, p: usize, seed: u64) -> Self {
        WTopicHyper {
            eta: w as f64 / 100_000.0,
            gamma: w as f64 / p.max(1) as f64,
            iterations: 200,
            burn_in: 100,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.burn_in > self.iterations {
            return Err(Error::Config(format!(
                "burn-in {} exceeds iterations {}",
                self.burn_in, self.iterations
            )));
        }
        Ok(())
    }
}

/// Normalized bias coefficients (g1, g2, g3) of word `word` in document `doc`.
///
/// Raw values are the collection paragraph frequency, the within-document
/// paragraph frequency, and the document frequency damped by `1 - g1`. A word
/// with all raw values zero gets the uniform triple.
pub fn compute_g(word: WordId, doc: usize, tables: &FrequencyTables) -> [f64; 3] {
    let par_total = tables.total_paragraphs as f64;
    let doc_pars = tables.paragraphs_in_doc.get(doc).copied().unwrap_or(0) as f64;
    let docs = tables.total_docs() as f64;

    let g1 = ratio(tables.par_df(word) as f64, par_total);
    let g2 = ratio(tables.doc_par_df(doc, word) as f64, doc_pars);
    let g3 = ratio(tables.doc_df(word) as f64, docs) * (1.0 - g1);
    normalize_g([g1, g2, g3])
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub(crate) fn normalize_g(raw: [f64; 3]) -> [f64; 3] {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.map(|g| g / total)
    } else {
        [1.0 / 3.0; 3]
    }
}

/// Count tables and assignments of the w-topic sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct WTopicState {
    pub(crate) vocab_size: usize,
    /// `assignments[d][t][i]` is the w-topic of token `i` of paragraph `t` in document `d`.
    pub(crate) assignments: Vec<Vec<Vec<WTopic>>>,
    pub(crate) background: Vec<u32>,
    pub(crate) background_total: u64,
    pub(crate) doc_specific: Vec<HashMap<WordId, u32>>,
    pub(crate) doc_specific_totals: Vec<u64>,
    pub(crate) theme: Vec<u32>,
    pub(crate) theme_total: u64,
    pub(crate) paragraph_counts: Vec<Vec<[u32; 3]>>,
}

impl WTopicState {
    /// Builds all count tables from scratch for the given assignments.
    pub fn from_assignments(
        corpus: &IndexedCorpus,
        vocab_size: usize,
        assignments: Vec<Vec<Vec<WTopic>>>,
    ) -> Result<Self> {
        let mut state = WTopicState::empty(vocab_size, corpus.documents.len());
        if assignments.len() != corpus.documents.len() {
            return Err(Error::Model(format!(
                "{} documents of assignments for {} documents",
                assignments.len(),
                corpus.documents.len()
            )));
        }
        for (d, (doc, doc_s)) in corpus.documents.iter().zip(&assignments).enumerate() {
            if doc.paragraphs.len() != doc_s.len() {
                return Err(Error::Model(format!("document {}: paragraph count mismatch", doc.id)));
            }
            let mut par_counts = Vec::with_capacity(doc.paragraphs.len());
            for (par, par_s) in doc.paragraphs.iter().zip(doc_s) {
                if par.len() != par_s.len() {
                    return Err(Error::Model(format!("document {}: token count mismatch", doc.id)));
                }
                let mut counts = [0u32; 3];
                for (&w, &s) in par.iter().zip(par_s) {
                    if w as usize >= vocab_size {
                        return Err(Error::Model(format!("word id {w} outside vocabulary")));
                    }
                    counts[s.index()] += 1;
                    state.add_word(d, w, s);
                }
                par_counts.push(counts);
            }
            state.paragraph_counts.push(par_counts);
        }
        state.assignments = assignments;
        Ok(state)
    }

    fn empty(vocab_size: usize, docs: usize) -> Self {
        WTopicState {
            vocab_size,
            assignments: Vec::new(),
            background: vec![0; vocab_size],
            background_total: 0,
            doc_specific: vec![HashMap::new(); docs],
            doc_specific_totals: vec![0; docs],
            theme: vec![0; vocab_size],
            theme_total: 0,
            paragraph_counts: Vec::with_capacity(docs),
        }
    }

    pub(crate) fn add_word(&mut self, doc: usize, word: WordId, s: WTopic) {
        let w = word as usize;
        match s {
            WTopic::Background => {
                self.background[w] += 1;
                self.background_total += 1;
            }
            WTopic::DocumentSpecific => {
                *self.doc_specific[doc].entry(word).or_insert(0) += 1;
                self.doc_specific_totals[doc] += 1;
            }
            WTopic::ThemeSpecific => {
                self.theme[w] += 1;
                self.theme_total += 1;
            }
        }
    }

    pub(crate) fn remove_word(&mut self, doc: usize, word: WordId, s: WTopic) {
        let w = word as usize;
        match s {
            WTopic::Background => {
                self.background[w] -= 1;
                self.background_total -= 1;
            }
            WTopic::DocumentSpecific => {
                let table = &mut self.doc_specific[doc];
                let n = table.get_mut(&word).expect("count present for assigned token");
                *n -= 1;
                if *n == 0 {
                    table.remove(&word);
                }
                self.doc_specific_totals[doc] -= 1;
            }
            WTopic::ThemeSpecific => {
                self.theme[w] -= 1;
                self.theme_total -= 1;
            }
        }
    }

    /// `n_w^l`, with the document-specific count taken from document `doc`.
    pub fn word_count(&self, doc: usize, word: WordId, s: WTopic) -> u32 {
        match s {
            WTopic::Background => self.background.get(word as usize).copied().unwrap_or(0),
            WTopic::DocumentSpecific => self.doc_specific[doc].get(&word).copied().unwrap_or(0),
            WTopic::ThemeSpecific => self.theme.get(word as usize).copied().unwrap_or(0),
        }
    }

    /// `n_*^l`, with the document-specific total taken from document `doc`.
    pub fn topic_total(&self, doc: usize, s: WTopic) -> u64 {
        match s {
            WTopic::Background => self.background_total,
            WTopic::DocumentSpecific => self.doc_specific_totals[doc],
            WTopic::ThemeSpecific => self.theme_total,
        }
    }

    pub fn paragraph_counts(&self, doc: usize, par: usize) -> [u32; 3] {
        self.paragraph_counts[doc][par]
    }

    pub fn assignments(&self) -> &[Vec<Vec<WTopic>>] {
        &self.assignments
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn doc_specific_counts(&self, doc: usize) -> &HashMap<WordId, u32> {
        &self.doc_specific[doc]
    }

    /// Recounts every table from the assignments and compares.
    pub fn is_consistent(&self, corpus: &IndexedCorpus) -> bool {
        WTopicState::from_assignments(corpus, self.vocab_size, self.assignments.clone())
            .is_ok_and(|fresh| &fresh == self)
    }

    /// Theme-specific tokens of every paragraph, in order.
    pub fn theme_tokens(&self, corpus: &IndexedCorpus) -> Vec<Vec<Vec<WordId>>> {
        corpus
            .documents
            .iter()
            .zip(&self.assignments)
            .map(|(doc, doc_s)| {
                doc.paragraphs
                    .iter()
                    .zip(doc_s)
                    .map(|(par, par_s)| {
                        par.iter()
                            .zip(par_s)
                            .filter(|(_, s)| **s == WTopic::ThemeSpecific)
                            .map(|(w, _)| *w)
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Fraction of tokens in each role.
    pub fn role_shares(&self) -> [f64; 3] {
        let total = (self.background_total
            + self.doc_specific_totals.iter().sum::<u64>()
            + self.theme_total) as f64;
        if total == 0.0 {
            return [0.0; 3];
        }
        [
            self.background_total as f64 / total,
            self.doc_specific_totals.iter().sum::<u64>() as f64 / total,
            self.theme_total as f64 / total,
        ]
    }
}

/// The normalized conditional over the three roles for token `word` at a
/// position whose own counts have already been removed from `state`.
/// `par_counts` are the paragraph's role counts without that token.
pub fn wtopic_conditional(
    state: &WTopicState,
    doc: usize,
    word: WordId,
    par_counts: [u32; 3],
    g: [f64; 3],
    hyper: &WTopicHyper,
) -> [f64; 3] {
    let w = state.vocab_size as f64;
    let par_total: u32 = par_counts.iter().sum();
    let mut p = [0.0; 3];
    for s in WTopic::ALL {
        let l = s.index();
        let word_factor = (state.word_count(doc, word, s) as f64 + hyper.eta)
            / (state.topic_total(doc, s) as f64 + w * hyper.eta);
        let mix_factor =
            (par_counts[l] as f64 + hyper.gamma) / (par_total as f64 + 3.0 * hyper.gamma);
        p[l] = g[l] * word_factor * mix_factor;
    }
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.map(|x| x / total)
    } else {
        [1.0 / 3.0; 3]
    }
}
