use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use super::{is_concept_id, Corpus};

/// Dense index of a vocabulary entry.
pub type WordId = u32;

/// Bidirectional map between token strings and dense indices, in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vocabulary {
    words: IndexSet<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the union vocabulary over one or more corpora.
    pub fn build<'a>(corpora: impl IntoIterator<Item = &'a Corpus>) -> Self {
        let mut vocab = Vocabulary::new();
        for corpus in corpora {
            for par in corpus.documents.iter().flat_map(|d| &d.paragraphs) {
                for tok in &par.tokens {
                    vocab.insert(tok.surface());
                }
            }
        }
        vocab
    }

    pub fn from_words<S: Into<String>>(words: impl IntoIterator<Item = S>) -> Self {
        Vocabulary {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    pub fn insert(&mut self, word: &str) -> WordId {
        if let Some(idx) = self.words.get_index_of(word) {
            return idx as WordId;
        }
        self.words.insert_full(word.to_owned()).0 as WordId
    }

    pub fn get(&self, word: &str) -> Option<WordId> {
        self.words.get_index_of(word).map(|i| i as WordId)
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_concept(&self, id: WordId) -> bool {
        is_concept_id(self.word(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (WordId, &str)> {
        self.words.iter().enumerate().map(|(i, w)| (i as WordId, w.as_str()))
    }
}

/// A corpus with every token replaced by its vocabulary index.
#[derive(Debug, Clone)]
pub struct IndexedCorpus {
    pub vocab: Vocabulary,
    pub documents: Vec<IndexedDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedDocument {
    pub id: String,
    pub lang: String,
    pub paragraphs: Vec<Vec<WordId>>,
}

impl IndexedCorpus {
    pub fn new(corpus: &Corpus) -> Self {
        Self::with_vocabulary(corpus, Vocabulary::build([corpus]))
    }

    /// Indexes `corpus` against `vocab`, appending unseen tokens to the end
    /// of the vocabulary. Ids below the original length keep their meaning.
    pub fn with_vocabulary(corpus: &Corpus, mut vocab: Vocabulary) -> Self {
        let documents = corpus
            .documents
            .iter()
            .map(|doc| IndexedDocument {
                id: doc.id.clone(),
                lang: doc.lang.clone(),
                paragraphs: doc
                    .paragraphs
                    .iter()
                    .map(|p| p.tokens.iter().map(|t| vocab.insert(t.surface())).collect())
                    .collect(),
            })
            .collect();
        IndexedCorpus { vocab, documents }
    }

    pub fn paragraph_count(&self) -> usize {
        self.documents.iter().map(|d| d.paragraphs.len()).sum()
    }

    pub fn token_count(&self) -> usize {
        self.documents
            .iter()
            .flat_map(|d| &d.paragraphs)
            .map(Vec::len)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Paragraph, Token};

    fn corpus(words: &[&str]) -> Corpus {
        Corpus::new(vec![Document {
            id: "d".into(),
            lang: "en".into(),
            title: String::new(),
            paragraphs: vec![Paragraph {
                id: "p".into(),
                heading: None,
                tokens: words.iter().map(|w| Token::from_raw(w).unwrap()).collect(),
            }],
        }])
        .unwrap()
    }

    #[test]
    fn bijective_indices() {
        let vocab = Vocabulary::build([&corpus(&["a", "b", "a", "c1"])]);
        assert_eq!(vocab.len(), 3);
        for (id, w) in vocab.iter() {
            assert_eq!(vocab.get(w), Some(id));
            assert_eq!(vocab.word(id), w);
        }
        assert!(vocab.is_concept(vocab.get("c1").unwrap()));
        assert!(!vocab.is_concept(vocab.get("a").unwrap()));
    }

    #[test]
    fn union_vocabulary_shares_identical_strings() {
        let en = corpus(&["city", "c553795"]);
        let fr = corpus(&["ville", "c553795"]);
        let vocab = Vocabulary::build([&en, &fr]);
        assert_eq!(vocab.len(), 3);
    }

    #[test]
    fn unseen_tokens_extend_the_vocabulary() {
        let base = Vocabulary::from_words(["a", "b"]);
        let indexed = IndexedCorpus::with_vocabulary(&corpus(&["b", "z"]), base);
        assert_eq!(indexed.documents[0].paragraphs[0], vec![1, 2]);
        assert_eq!(indexed.vocab.len(), 3);
    }
}
