use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{compute_g, normalize_g, wtopic_conditional, WTopic, WTopicHyper, WTopicState};
use crate::corpus::{FrequencyTables, IndexedCorpus, WordId};
use crate::error::{Error, Result};
use crate::sampling::draw;

/// One collapsed Gibbs chain over the w-topic assignments.
pub struct WTopicSampler<'a> {
    corpus: &'a IndexedCorpus,
    hyper: WTopicHyper,
    g: Vec<Vec<Vec<[f64; 3]>>>,
    state: WTopicState,
    rng: ChaCha8Rng,
    sweeps: usize,
}

impl<'a> WTopicSampler<'a> {
    /// Computes the bias coefficients and draws the initial assignments from them.
    pub fn new(corpus: &'a IndexedCorpus, tables: &FrequencyTables, hyper: WTopicHyper) -> Result<Self> {
        let g = corpus
            .documents
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                doc.paragraphs
                    .iter()
                    .map(|par| par.iter().map(|&w| compute_g(w, d, tables)).collect())
                    .collect()
            })
            .collect();
        Self::with_bias(corpus, g, hyper)
    }

    /// Like [`WTopicSampler::new`] with explicit per-token bias triples.
    pub fn with_bias(
        corpus: &'a IndexedCorpus,
        g: Vec<Vec<Vec<[f64; 3]>>>,
        hyper: WTopicHyper,
    ) -> Result<Self> {
        hyper.validate()?;
        if corpus.vocab.is_empty() {
            return Err(Error::Validation("empty vocabulary".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let assignments = g
            .iter()
            .map(|doc: &Vec<Vec<[f64; 3]>>| {
                doc.iter()
                    .map(|par| {
                        par.iter()
                            .map(|gt| WTopic::from_index(draw(&mut rng, gt)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let state = WTopicState::from_assignments(corpus, corpus.vocab.len(), assignments)?;
        Ok(WTopicSampler {
            corpus,
            hyper,
            g,
            state,
            rng,
            sweeps: 0,
        })
    }

    pub fn state(&self) -> &WTopicState {
        &self.state
    }

    pub fn into_state(self) -> WTopicState {
        self.state
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn bias(&self, doc: usize, par: usize, pos: usize) -> [f64; 3] {
        self.g[doc][par][pos]
    }

    /// The full conditional of one token given all other assignments.
    pub fn conditional(&mut self, doc: usize, par: usize, pos: usize) -> [f64; 3] {
        let word = self.corpus.documents[doc].paragraphs[par][pos];
        let s = self.state.assignments[doc][par][pos];
        self.state.remove_word(doc, word, s);
        let mut counts = self.state.paragraph_counts[doc][par];
        counts[s.index()] -= 1;
        let p = wtopic_conditional(&self.state, doc, word, counts, self.g[doc][par][pos], &self.hyper);
        self.state.add_word(doc, word, s);
        p
    }

    /// One pass of remove / sample / add over every token.
    pub fn sweep(&mut self) {
        let corpus = self.corpus;
        for (d, doc) in corpus.documents.iter().enumerate() {
            for (t, par) in doc.paragraphs.iter().enumerate() {
                for (i, &word) in par.iter().enumerate() {
                    let old = self.state.assignments[d][t][i];
                    self.state.remove_word(d, word, old);
                    self.state.paragraph_counts[d][t][old.index()] -= 1;

                    let p = wtopic_conditional(
                        &self.state,
                        d,
                        word,
                        self.state.paragraph_counts[d][t],
                        self.g[d][t][i],
                        &self.hyper,
                    );
                    let new = WTopic::from_index(draw(&mut self.rng, &p));

                    self.state.add_word(d, word, new);
                    self.state.paragraph_counts[d][t][new.index()] += 1;
                    self.state.assignments[d][t][i] = new;
                }
            }
        }
        self.sweeps += 1;
    }

    /// Runs the configured number of sweeps; the last sample is kept.
    pub fn run(mut self) -> WTopicState {
        while self.sweeps < self.hyper.iterations {
            self.sweep();
        }
        self.state
    }
}

pub fn run_wtopic_sampler(
    corpus: &IndexedCorpus,
    tables: &FrequencyTables,
    hyper: WTopicHyper,
) -> Result<WTopicState> {
    Ok(WTopicSampler::new(corpus, tables, hyper)?.run())
}

/// Samples w-topics for a document that was not part of training.
///
/// Background and theme counts come from the trained state and the new
/// document's own tokens; the document-specific table starts empty. Bias
/// coefficients use the training frequency tables except for the
/// within-document term, which is taken from the new document itself.
pub fn fold_in(
    trained: &WTopicState,
    tables: &FrequencyTables,
    paragraphs: &[Vec<WordId>],
    hyper: &WTopicHyper,
) -> Vec<Vec<WTopic>> {
    let mut own_df: HashMap<WordId, u32> = HashMap::new();
    for par in paragraphs {
        for w in par.iter().copied().collect::<HashSet<_>>() {
            *own_df.entry(w).or_insert(0) += 1;
        }
    }
    let pars = paragraphs.len() as f64;
    let p_total = tables.total_paragraphs as f64;
    let d_total = tables.total_docs() as f64;
    let g: Vec<Vec<[f64; 3]>> = paragraphs
        .iter()
        .map(|par| {
            par.iter()
                .map(|&w| {
                    let g1 = if p_total > 0.0 { tables.par_df(w) as f64 / p_total } else { 0.0 };
                    let g2 = own_df[&w] as f64 / pars;
                    let g3 = if d_total > 0.0 {
                        tables.doc_df(w) as f64 / d_total * (1.0 - g1)
                    } else {
                        0.0
                    };
                    normalize_g([g1, g2, g3])
                })
                .collect()
        })
        .collect();

    let max_id = paragraphs.iter().flatten().copied().max().map_or(0, |m| m as usize + 1);
    let mut state = WTopicState {
        vocab_size: trained.vocab_size,
        assignments: Vec::new(),
        background: trained.background.clone(),
        background_total: trained.background_total,
        doc_specific: vec![HashMap::new()],
        doc_specific_totals: vec![0],
        theme: trained.theme.clone(),
        theme_total: trained.theme_total,
        paragraph_counts: Vec::new(),
    };
    let len = state.background.len().max(max_id);
    state.background.resize(len, 0);
    state.theme.resize(len, 0);

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut assignments: Vec<Vec<WTopic>> = Vec::with_capacity(paragraphs.len());
    let mut par_counts: Vec<[u32; 3]> = Vec::with_capacity(paragraphs.len());
    for (par, par_g) in paragraphs.iter().zip(&g) {
        let mut counts = [0u32; 3];
        let s: Vec<WTopic> = par
            .iter()
            .zip(par_g)
            .map(|(&w, gt)| {
                let s = WTopic::from_index(draw(&mut rng, gt));
                state.add_word(0, w, s);
                counts[s.index()] += 1;
                s
            })
            .collect();
        assignments.push(s);
        par_counts.push(counts);
    }
    for _ in 0..hyper.iterations {
        for (t, par) in paragraphs.iter().enumerate() {
            for (i, &w) in par.iter().enumerate() {
                let old = assignments[t][i];
                state.remove_word(0, w, old);
                par_counts[t][old.index()] -= 1;
                let p = wtopic_conditional(&state, 0, w, par_counts[t], g[t][i], hyper);
                let new = WTopic::from_index(draw(&mut rng, &p));
                state.add_word(0, w, new);
                par_counts[t][new.index()] += 1;
                assignments[t][i] = new;
            }
        }
    }
    assignments
}
