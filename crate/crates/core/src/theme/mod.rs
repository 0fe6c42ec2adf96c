//! Document-level themes.
//!
//! Each paragraph carries one of K t-topics, drawn by collapsed Gibbs
//! sampling over a sticky HMM: a document mixture, transitions with an
//! extra self-transition pseudo-count κ, and a word likelihood over the
//! paragraph's theme-specific tokens. Concept tokens can additionally boost
//! the topics already chosen by their neighbors in the relation graph.
//! Final assignments come from Viterbi decoding.

mod sampler;
mod viterbi;

use serde::{Deserialize, Serialize};

use crate::concepts::RelationGraph;
use crate::corpus::{Vocabulary, WordId};
use crate::error::{Error, Result};

pub use sampler::{run_theme_sampler, SamplerDiagnostics, ThemeSampler};
pub use viterbi::{decode_document, emission_log_probs, sequence_log_prob, viterbi, HmmView};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThemeHyper {
    /// Number of t-topics.
    pub k: usize,
    /// Topic-word smoothing.
    pub beta: f64,
    /// Document mixture smoothing, also used for the initial-state counts.
    pub lambda: f64,
    /// Transition smoothing.
    pub alpha: f64,
    /// Extra pseudo-count on self transitions.
    pub kappa: f64,
    pub use_concept_boost: bool,
    /// Exponent applied to the concept boost.
    pub boost_exponent: f64,
    /// Include the document mixture in Viterbi emissions.
    pub decode_with_mixture: bool,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl ThemeHyper {
    /// β = W/100000, λ = 50/K, α = 0.01, κ = 1000.
    pub fn for_corpus(w: usize, k: usize, seed: u64) -> Self {
        ThemeHyper {
            k,
            beta: w as f64 / 100_000.0,
            lambda: 50.0 / k.max(1) as f64,
            alpha: 0.01,
            kappa: 1000.0,
            use_concept_boost: true,
            boost_exponent: 1.0,
            decode_with_mixture: true,
            iterations: 200,
            burn_in: 100,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("K must be at least 2, got {}", self.k)));
        }
        for (name, v) in [("beta", self.beta), ("lambda", self.lambda), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be non-negative, got {}", self.kappa)));
        }
        if !(self.boost_exponent >= 0.0 && self.boost_exponent.is_finite()) {
            return Err(Error::Config(format!(
                "boost exponent must be non-negative, got {}",
                self.boost_exponent
            )));
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

/// Theme-specific tokens of every paragraph: `[document][paragraph][token]`.
pub type ThemeTokens = Vec<Vec<Vec<WordId>>>;

/// Assignments and count tables of the theme sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ThemeState {
    pub(crate) k: usize,
    pub(crate) vocab_size: usize,
    pub(crate) z: Vec<Vec<usize>>,
    /// Row-major K x W.
    pub(crate) topic_word: Vec<u32>,
    pub(crate) topic_totals: Vec<u64>,
    pub(crate) word_totals: Vec<u32>,
    pub(crate) doc_topic: Vec<Vec<u32>>,
    pub(crate) trans: Vec<Vec<u32>>,
    pub(crate) trans_totals: Vec<u64>,
    pub(crate) initial: Vec<u32>,
}

impl ThemeState {
    pub(crate) fn empty(k: usize, vocab_size: usize, docs: usize) -> Self {
        ThemeState {
            k,
            vocab_size,
            z: Vec::with_capacity(docs),
            topic_word: vec![0; k * vocab_size],
            topic_totals: vec![0; k],
            word_totals: vec![0; vocab_size],
            doc_topic: vec![vec![0; k]; docs],
            trans: vec![vec![0; k]; k],
            trans_totals: vec![0; k],
            initial: vec![0; k],
        }
    }

    /// Builds every table from scratch for the topic sequences `z`.
    pub fn from_assignments(
        tokens: &[Vec<Vec<WordId>>],
        k: usize,
        vocab_size: usize,
        z: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if z.len() != tokens.len() {
            return Err(Error::Model("topic sequences do not match documents".into()));
        }
        let mut state = ThemeState::empty(k, vocab_size, tokens.len());
        for (d, (doc, seq)) in tokens.iter().zip(&z).enumerate() {
            if doc.len() != seq.len() {
                return Err(Error::Model(format!("document {d}: paragraph count mismatch")));
            }
            for (t, (par, &j)) in doc.iter().zip(seq).enumerate() {
                if j >= k {
                    return Err(Error::Model(format!("topic {j} out of range for K = {k}")));
                }
                if par.iter().any(|&w| w as usize >= vocab_size) {
                    return Err(Error::Model("word id outside vocabulary".into()));
                }
                state.doc_topic[d][j] += 1;
                if t == 0 {
                    state.initial[j] += 1;
                } else {
                    state.trans[seq[t - 1]][j] += 1;
                    state.trans_totals[seq[t - 1]] += 1;
                }
                state.add_words(par, j);
            }
        }
        state.z = z;
        Ok(state)
    }

    pub(crate) fn add_words(&mut self, words: &[WordId], j: usize) {
        for &w in words {
            self.topic_word[j * self.vocab_size + w as usize] += 1;
            self.word_totals[w as usize] += 1;
        }
        self.topic_totals[j] += words.len() as u64;
    }

    pub(crate) fn remove_words(&mut self, words: &[WordId], j: usize) {
        for &w in words {
            self.topic_word[j * self.vocab_size + w as usize] -= 1;
            self.word_totals[w as usize] -= 1;
        }
        self.topic_totals[j] -= words.len() as u64;
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    /// `n_w^j`; zero for ids outside the trained vocabulary.
    pub fn topic_word(&self, j: usize, word: WordId) -> u32 {
        if (word as usize) < self.vocab_size {
            self.topic_word[j * self.vocab_size + word as usize]
        } else {
            0
        }
    }

    /// `n_w^*`, the number of times `word` was assigned any topic.
    pub fn word_total(&self, word: WordId) -> u32 {
        self.word_totals.get(word as usize).copied().unwrap_or(0)
    }

    pub fn topic_total(&self, j: usize) -> u64 {
        self.topic_totals[j]
    }

    pub fn doc_topic(&self, doc: usize) -> &[u32] {
        &self.doc_topic[doc]
    }

    pub fn transition_count(&self, from: usize, to: usize) -> u32 {
        self.trans[from][to]
    }

    pub fn initial_count(&self, j: usize) -> u32 {
        self.initial[j]
    }

    pub fn is_consistent(&self, tokens: &[Vec<Vec<WordId>>]) -> bool {
        ThemeState::from_assignments(tokens, self.k, self.vocab_size, self.z.clone())
            .is_ok_and(|fresh| &fresh == self)
    }

    /// Mean number of topic changes between consecutive paragraphs per document.
    pub fn mean_switches(&self) -> f64 {
        mean_switches(&self.z)
    }
}

pub fn mean_switches(sequences: &[Vec<usize>]) -> f64 {
    if sequences.is_empty() {
        return 0.0;
    }
    let total: usize = sequences
        .iter()
        .map(|s| s.windows(2).filter(|w| w[0] != w[1]).count())
        .sum();
    total as f64 / sequences.len() as f64
}

/// `p(k | j) = (n_jk + α + κ·[j = k]) / (n_j* + Kα + κ)`.
pub fn transition_probability(j: usize, k: usize, state: &ThemeState, hyper: &ThemeHyper) -> f64 {
    let sticky = if j == k { hyper.kappa } else { 0.0 };
    (state.trans[j][k] as f64 + hyper.alpha + sticky)
        / (state.trans_totals[j] as f64 + state.k as f64 * hyper.alpha + hyper.kappa)
}

/// Smoothed probability of starting a document in topic `j`.
pub fn initial_probability(j: usize, state: &ThemeState, hyper: &ThemeHyper) -> f64 {
    let total: u64 = state.initial.iter().map(|&n| n as u64).sum();
    (state.initial[j] as f64 + hyper.lambda) / (total as f64 + state.k as f64 * hyper.lambda)
}

/// Relation-graph neighbors of every concept in the vocabulary.
///
/// `None` marks plain words and concepts without neighbors. Neighbor entries
/// are `None` when the neighbor concept does not occur in the vocabulary.
#[derive(Debug, Clone, Default)]
pub struct ConceptNeighbors {
    neighbors: Vec<Option<Vec<Option<WordId>>>>,
}

impl ConceptNeighbors {
    pub fn new(vocab: &Vocabulary, graph: &RelationGraph) -> Self {
        let neighbors = vocab
            .iter()
            .map(|(id, word)| {
                if !vocab.is_concept(id) || graph.degree(word) == 0 {
                    return None;
                }
                Some(graph.neighbors(word).map(|(n, _)| vocab.get(n)).collect())
            })
            .collect();
        ConceptNeighbors { neighbors }
    }

    /// Neighbors of `word`, or `None` if the boost is neutral for it.
    pub fn of(&self, word: WordId) -> Option<&[Option<WordId>]> {
        self.neighbors
            .get(word as usize)
            .and_then(|n| n.as_deref())
    }

    /// Mean over the neighbors of `word` of the share of their topic
    /// assignments that went to `j`. Neighbors never assigned contribute
    /// `1/K`; words without neighbors get the neutral value 1.
    pub fn boost(&self, word: WordId, j: usize, state: &ThemeState) -> f64 {
        let Some(list) = self.of(word) else {
            return 1.0;
        };
        let uniform = 1.0 / state.k as f64;
        let sum: f64 = list
            .iter()
            .map(|n| match n {
                Some(r) if state.word_total(*r) > 0 => {
                    state.topic_word(j, *r) as f64 / state.word_total(*r) as f64
                }
                _ => uniform,
            })
            .sum();
        sum / list.len() as f64
    }
}

/// Boost of topic `j` for the token `token` given the relation graph.
pub fn concept_boost(
    token: &str,
    j: usize,
    state: &ThemeState,
    graph: &RelationGraph,
    vocab: &Vocabulary,
) -> f64 {
    if !crate::corpus::is_concept_id(token) || graph.degree(token) == 0 {
        return 1.0;
    }
    let uniform = 1.0 / state.k as f64;
    let ratios: Vec<f64> = graph
        .neighbors(token)
        .map(|(n, _)| match vocab.get(n) {
            Some(r) if state.word_total(r) > 0 => {
                state.topic_word(j, r) as f64 / state.word_total(r) as f64
            }
            _ => uniform,
        })
        .collect();
    ratios.iter().sum::<f64>() / ratios.len() as f64
}

pub(crate) fn log_normalize(logp: &[f64]) -> Vec<f64> {
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logp.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Log word likelihood of a paragraph under topic `j`; repeated words see
/// the counts of their earlier occurrences in the same paragraph.
pub(crate) fn paragraph_log_likelihood(
    words: &[WordId],
    j: usize,
    state: &ThemeState,
    beta: f64,
    scratch: &mut std::collections::HashMap<WordId, u32>,
) -> f64 {
    scratch.clear();
    let wb = state.vocab_size as f64 * beta;
    let base = state.topic_totals[j] as f64;
    let mut lp = 0.0;
    for (i, &w) in words.iter().enumerate() {
        let seen = scratch.entry(w).or_insert(0);
        lp += (state.topic_word(j, w) as f64 + *seen as f64 + beta).ln() - (base + i as f64 + wb).ln();
        *seen += 1;
    }
    lp
}

/// Conditional over topics for paragraph `t` of document `doc`, whose own
/// contributions must already be removed from `state`. `prev` and `next`
/// are the neighbouring paragraphs' topics, if any.
#[allow(clippy::too_many_arguments)]
pub fn ttopic_conditional(
    state: &ThemeState,
    doc: usize,
    words: &[WordId],
    prev: Option<usize>,
    next: Option<usize>,
    hyper: &ThemeHyper,
    neighbors: Option<&ConceptNeighbors>,
) -> Vec<f64> {
    let k = state.k;
    let kf = k as f64;
    let doc_row = &state.doc_topic[doc];
    let doc_total: u64 = doc_row.iter().map(|&n| n as u64).sum();
    let mut scratch = std::collections::HashMap::new();
    let mut base = vec![0.0; k];
    let mut boosted = vec![0.0; k];
    for j in 0..k {
        let mut lp = ((doc_row[j] as f64 + hyper.lambda) / (doc_total as f64 + kf * hyper.lambda)).ln();
        lp += match prev {
            Some(p) => transition_probability(p, j, state, hyper).ln(),
            None => initial_probability(j, state, hyper).ln(),
        };
        if let Some(n) = next {
            lp += transition_probability(j, n, state, hyper).ln();
        }
        lp += paragraph_log_likelihood(words, j, state, hyper.beta, &mut scratch);
        base[j] = lp;
        boosted[j] = lp + boost_log_factor(words, j, state, hyper, neighbors);
    }
    if boosted.iter().any(|l| l.is_finite()) {
        log_normalize(&boosted)
    } else {
        log_normalize(&base)
    }
}

pub(crate) fn boost_log_factor(
    words: &[WordId],
    j: usize,
    state: &ThemeState,
    hyper: &ThemeHyper,
    neighbors: Option<&ConceptNeighbors>,
) -> f64 {
    match neighbors {
        Some(nb) if hyper.use_concept_boost => words
            .iter()
            .filter(|&&w| nb.of(w).is_some())
            .map(|&w| hyper.boost_exponent * nb.boost(w, j, state).ln())
            .sum(),
        _ => 0.0,
    }
}
