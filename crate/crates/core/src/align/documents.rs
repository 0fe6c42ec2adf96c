use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::baseline::{cluster_pairs, SparseVector};
use crate::corpus::{Corpus, IndexedCorpus, Token};
use crate::error::{Error, Result};
use crate::lda2::WTopicState;

pub const DEFAULT_TOP_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DocAlignMode {
    /// tf-idf over plain words.
    TfIdfWords,
    /// tf-idf over words and concept ids.
    TfIdfConcepts,
    /// Counts of the document-specific w-topic.
    DocSpecificTopic,
}

/// Keeps the `top_n` heaviest entries, ties broken by term id.
fn truncate_top(mut weights: Vec<(u32, f64)>, top_n: usize) -> SparseVector {
    weights.retain(|w| w.1 > 0.0);
    weights.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    weights.truncate(top_n);
    SparseVector::from_weights(weights)
}

/// Top-N tf-idf vector of every document of `corpora`, in order. The idf is
/// `ln(D / df)` over all documents given.
pub fn document_vectors(corpora: &[&Corpus], mode: DocAlignMode, top_n: usize) -> Result<Vec<SparseVector>> {
    let keep: fn(&Token) -> bool = match mode {
        DocAlignMode::TfIdfWords => |t| !t.is_concept(),
        DocAlignMode::TfIdfConcepts => |_| true,
        DocAlignMode::DocSpecificTopic => {
            return Err(Error::Config(
                "document-specific vectors come from a trained model".into(),
            ))
        }
    };
    // ids follow sorted term order so ties do not depend on corpus layout
    let mut terms: Vec<&str> = corpora
        .iter()
        .flat_map(|c| &c.documents)
        .flat_map(|d| &d.paragraphs)
        .flat_map(|p| &p.tokens)
        .filter(|t| keep(t))
        .map(Token::surface)
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    terms.sort_unstable();
    let ids: HashMap<&str, u32> = terms.iter().enumerate().map(|(i, t)| (*t, i as u32)).collect();

    let mut df = vec![0u32; terms.len()];
    let mut tfs: Vec<HashMap<u32, f64>> = Vec::new();
    for doc in corpora.iter().flat_map(|c| &c.documents) {
        let mut tf: HashMap<u32, f64> = HashMap::new();
        for t in doc.paragraphs.iter().flat_map(|p| &p.tokens).filter(|t| keep(t)) {
            *tf.entry(ids[t.surface()]).or_insert(0.0) += 1.0;
        }
        for &id in tf.keys() {
            df[id as usize] += 1;
        }
        tfs.push(tf);
    }
    let n = tfs.len() as f64;
    Ok(tfs
        .into_iter()
        .map(|tf| {
            let w = tf
                .into_iter()
                .map(|(id, c)| (id, c * (n / df[id as usize] as f64).ln()))
                .collect();
            truncate_top(w, top_n)
        })
        .collect())
}

/// Top-N document-specific word counts of every document in the model.
pub fn doc_specific_vectors(state: &WTopicState, corpus: &IndexedCorpus, top_n: usize) -> Vec<SparseVector> {
    (0..corpus.documents.len())
        .map(|d| {
            let w = state
                .doc_specific_counts(d)
                .iter()
                .map(|(&w, &n)| (w, n as f64))
                .collect();
            truncate_top(w, top_n)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentAlignment {
    /// (document in first set, document in second set, cosine).
    pub pairs: Vec<(usize, usize, f64)>,
    pub unpaired_a: Vec<usize>,
    pub unpaired_b: Vec<usize>,
}

impl DocumentAlignment {
    /// Fraction of gold pairs that were recovered.
    pub fn accuracy(&self, gold: &[(usize, usize)]) -> Result<f64> {
        if gold.is_empty() {
            return Err(Error::Evaluation("empty gold document pairing".into()));
        }
        let found: HashSet<(usize, usize)> = self.pairs.iter().map(|p| (p.0, p.1)).collect();
        let hits = gold.iter().filter(|g| found.contains(g)).count();
        Ok(hits as f64 / gold.len() as f64)
    }
}

/// Greedy best-match pairing by cosine: pairs are taken in order of
/// decreasing similarity until the smaller set is exhausted.
pub fn align_documents(a: &[SparseVector], b: &[SparseVector]) -> DocumentAlignment {
    let (_, pairs) = cluster_pairs(a.len(), b.len(), |i, j| a[i].cosine(&b[j]), f64::NEG_INFINITY);
    let used_a: HashSet<usize> = pairs.iter().map(|p| p.0).collect();
    let used_b: HashSet<usize> = pairs.iter().map(|p| p.1).collect();
    DocumentAlignment {
        unpaired_a: (0..a.len()).filter(|i| !used_a.contains(i)).collect(),
        unpaired_b: (0..b.len()).filter(|j| !used_b.contains(j)).collect(),
        pairs,
    }
}

/// Gold pairing that matches documents with equal ids.
pub fn gold_by_id(a: &Corpus, b: &Corpus) -> Vec<(usize, usize)> {
    let index: HashMap<&str, usize> = b.documents.iter().enumerate().map(|(j, d)| (d.id.as_str(), j)).collect();
    a.documents
        .iter()
        .enumerate()
        .filter_map(|(i, d)| index.get(d.id.as_str()).map(|&j| (i, j)))
        .collect()
}
