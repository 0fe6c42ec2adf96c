use serde::Serialize;

use super::{WTopic, WTopicState};
use crate::corpus::{IndexedCorpus, WordId};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedWord {
    pub word: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentModel {
    pub document: String,
    pub lang: String,
    pub words: Vec<RankedWord>,
}

/// Top words of the background, per-document and pooled theme-specific models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageModels {
    pub background: Vec<RankedWord>,
    pub document_specific: Vec<DocumentModel>,
    pub theme: Vec<RankedWord>,
}

/// Ranks words by smoothed probability `(n_w^l + η) / (n_*^l + Wη)` in each
/// model and keeps the first `top_n` (at most W). Ties go to the lower word id.
pub fn export_language_models(
    state: &WTopicState,
    corpus: &IndexedCorpus,
    eta: f64,
    top_n: usize,
) -> LanguageModels {
    let w = state.vocab_size;
    let background = rank(corpus, w, eta, state.background_total, top_n, |id| {
        state.word_count(0, id, WTopic::Background)
    });
    let theme = rank(corpus, w, eta, state.theme_total, top_n, |id| {
        state.word_count(0, id, WTopic::ThemeSpecific)
    });
    let document_specific = corpus
        .documents
        .iter()
        .enumerate()
        .map(|(d, doc)| DocumentModel {
            document: doc.id.clone(),
            lang: doc.lang.clone(),
            words: rank(corpus, w, eta, state.doc_specific_totals[d], top_n, |id| {
                state.word_count(d, id, WTopic::DocumentSpecific)
            }),
        })
        .collect();
    LanguageModels {
        background,
        document_specific,
        theme,
    }
}

fn rank(
    corpus: &IndexedCorpus,
    w: usize,
    eta: f64,
    total: u64,
    top_n: usize,
    count: impl Fn(WordId) -> u32,
) -> Vec<RankedWord> {
    let mut ids: Vec<(WordId, u32)> = (0..w as WordId).map(|id| (id, count(id))).collect();
    ids.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let denom = total as f64 + w as f64 * eta;
    ids.into_iter()
        .take(top_n.min(w))
        .map(|(id, n)| RankedWord {
            word: corpus.vocab.word(id).to_owned(),
            probability: (n as f64 + eta) / denom,
        })
        .collect()
}
