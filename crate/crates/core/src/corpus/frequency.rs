use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::{IndexedCorpus, WordId};

/// Paragraph- and document-level occurrence counts.
///
/// `par_df[w]` counts paragraphs of the whole collection containing `w`,
/// `doc_par_df[d][w]` counts paragraphs of document `d` containing `w`, and
/// `doc_df[w]` counts documents containing `w`. A word repeated inside one
/// paragraph contributes once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTables {
    pub par_df: Vec<u32>,
    pub doc_par_df: Vec<HashMap<WordId, u32>>,
    pub doc_df: Vec<u32>,
    pub total_paragraphs: usize,
    pub paragraphs_in_doc: Vec<usize>,
}

impl FrequencyTables {
    pub fn build(corpus: &IndexedCorpus) -> Self {
        let w = corpus.vocab.len();
        let doc_par_df: Vec<HashMap<WordId, u32>> = corpus
            .documents
            .par_iter()
            .map(|doc| {
                let mut counts = HashMap::new();
                for par in &doc.paragraphs {
                    let distinct: HashSet<WordId> = par.iter().copied().collect();
                    for word in distinct {
                        *counts.entry(word).or_insert(0) += 1;
                    }
                }
                counts
            })
            .collect();

        let mut par_df = vec![0u32; w];
        let mut doc_df = vec![0u32; w];
        for counts in &doc_par_df {
            for (&word, &n) in counts {
                par_df[word as usize] += n;
                doc_df[word as usize] += 1;
            }
        }
        let paragraphs_in_doc: Vec<usize> =
            corpus.documents.iter().map(|d| d.paragraphs.len()).collect();
        FrequencyTables {
            par_df,
            doc_par_df,
            doc_df,
            total_paragraphs: paragraphs_in_doc.iter().sum(),
            paragraphs_in_doc,
        }
    }

    pub fn total_docs(&self) -> usize {
        self.paragraphs_in_doc.len()
    }

    pub fn par_df(&self, word: WordId) -> u32 {
        self.par_df.get(word as usize).copied().unwrap_or(0)
    }

    pub fn doc_df(&self, word: WordId) -> u32 {
        self.doc_df.get(word as usize).copied().unwrap_or(0)
    }

    pub fn doc_par_df(&self, doc: usize, word: WordId) -> u32 {
        self.doc_par_df
            .get(doc)
            .and_then(|m| m.get(&word))
            .copied()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Document, Paragraph, Token};

    fn doc(id: &str, pars: &[&[&str]]) -> Document {
        Document {
            id: id.into(),
            lang: "en".into(),
            title: String::new(),
            paragraphs: pars
                .iter()
                .enumerate()
                .map(|(i, words)| Paragraph {
                    id: format!("p{i}"),
                    heading: None,
                    tokens: words.iter().map(|w| Token::from_raw(w).unwrap()).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn counts_paragraph_and_document_frequencies() {
        let corpus = Corpus::new(vec![
            doc("d1", &[&["the", "montreal", "the"], &["the", "montreal"]]),
            doc("d2", &[&["the", "paris"], &["the"]]),
        ])
        .unwrap();
        let indexed = IndexedCorpus::new(&corpus);
        let tables = FrequencyTables::build(&indexed);
        let the = indexed.vocab.get("the").unwrap();
        let montreal = indexed.vocab.get("montreal").unwrap();
        assert_eq!(tables.par_df(the), 4);
        assert_eq!(tables.doc_df(the), 2);
        assert_eq!(tables.par_df(montreal), 2);
        assert_eq!(tables.doc_df(montreal), 1);
        assert_eq!(tables.doc_par_df(0, montreal), 2);
        assert_eq!(tables.doc_par_df(1, montreal), 0);
        assert_eq!(tables.total_paragraphs, 4);
        assert_eq!(tables.total_docs(), 2);
    }

    #[test]
    fn absent_word_counts_zero() {
        let corpus = Corpus::new(vec![doc("d1", &[&["a"]])]).unwrap();
        let tables = FrequencyTables::build(&IndexedCorpus::new(&corpus));
        assert_eq!(tables.par_df(99), 0);
        assert_eq!(tables.doc_df(99), 0);
        assert_eq!(tables.par_df(0), 1);
        assert_eq!(tables.doc_df(0), 1);
        assert_eq!(tables.total_paragraphs, 1);
    }
}
