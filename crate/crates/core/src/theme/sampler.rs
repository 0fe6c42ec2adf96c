use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ttopic_conditional, ConceptNeighbors, ThemeHyper, ThemeState};
use crate::corpus::WordId;
use crate::error::{Error, Result};
use crate::sampling::draw;

/// Documents whose paragraphs carry no theme-specific tokens at all; their
/// topics come from the mixture and transition factors only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerDiagnostics {
    pub documents_without_theme_tokens: Vec<usize>,
}

/// One collapsed Gibbs chain over paragraph topics.
pub struct ThemeSampler<'a> {
    tokens: &'a [Vec<Vec<WordId>>],
    hyper: ThemeHyper,
    neighbors: Option<&'a ConceptNeighbors>,
    state: ThemeState,
    rng: ChaCha8Rng,
    sweeps: usize,
    diagnostics: SamplerDiagnostics,
}

impl<'a> ThemeSampler<'a> {
    /// Draws initial topics uniformly at random.
    pub fn new(
        tokens: &'a [Vec<Vec<WordId>>],
        vocab_size: usize,
        hyper: ThemeHyper,
        neighbors: Option<&'a ConceptNeighbors>,
    ) -> Result<Self> {
        hyper.validate()?;
        if vocab_size == 0 {
            return Err(Error::Validation("empty vocabulary".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let z = tokens
            .iter()
            .map(|doc| doc.iter().map(|_| rng.random_range(0..hyper.k)).collect())
            .collect();
        let state = ThemeState::from_assignments(tokens, hyper.k, vocab_size, z)?;
        let diagnostics = SamplerDiagnostics {
            documents_without_theme_tokens: tokens
                .iter()
                .enumerate()
                .filter(|(_, doc)| doc.iter().all(Vec::is_empty))
                .map(|(d, _)| d)
                .collect(),
        };
        Ok(ThemeSampler {
            tokens,
            hyper,
            neighbors,
            state,
            rng,
            sweeps: 0,
            diagnostics,
        })
    }

    pub fn state(&self) -> &ThemeState {
        &self.state
    }

    pub fn diagnostics(&self) -> &SamplerDiagnostics {
        &self.diagnostics
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    fn neighbours_of(&self, doc: usize, t: usize) -> (Option<usize>, Option<usize>) {
        let seq = &self.state.z[doc];
        let prev = t.checked_sub(1).map(|p| seq[p]);
        let next = seq.get(t + 1).copied();
        (prev, next)
    }

    fn remove_paragraph(&mut self, doc: usize, t: usize) {
        let j = self.state.z[doc][t];
        let (prev, next) = self.neighbours_of(doc, t);
        let s = &mut self.state;
        s.doc_topic[doc][j] -= 1;
        match prev {
            Some(p) => {
                s.trans[p][j] -= 1;
                s.trans_totals[p] -= 1;
            }
            None => s.initial[j] -= 1,
        }
        if let Some(n) = next {
            s.trans[j][n] -= 1;
            s.trans_totals[j] -= 1;
        }
        s.remove_words(&self.tokens[doc][t], j);
    }

    fn add_paragraph(&mut self, doc: usize, t: usize, j: usize) {
        self.state.z[doc][t] = j;
        let (prev, next) = self.neighbours_of(doc, t);
        let s = &mut self.state;
        s.doc_topic[doc][j] += 1;
        match prev {
            Some(p) => {
                s.trans[p][j] += 1;
                s.trans_totals[p] += 1;
            }
            None => s.initial[j] += 1,
        }
        if let Some(n) = next {
            s.trans[j][n] += 1;
            s.trans_totals[j] += 1;
        }
        s.add_words(&self.tokens[doc][t], j);
    }

    fn conditional_removed(&self, doc: usize, t: usize) -> Vec<f64> {
        let (prev, next) = self.neighbours_of(doc, t);
        ttopic_conditional(
            &self.state,
            doc,
            &self.tokens[doc][t],
            prev,
            next,
            &self.hyper,
            self.neighbors,
        )
    }

    /// The full conditional of paragraph `t` given all other assignments.
    pub fn conditional(&mut self, doc: usize, t: usize) -> Vec<f64> {
        let j = self.state.z[doc][t];
        self.remove_paragraph(doc, t);
        let p = self.conditional_removed(doc, t);
        self.add_paragraph(doc, t, j);
        p
    }

    /// Resamples every paragraph once, in document order. A paragraph's
    /// theme tokens move with it to the newly drawn topic.
    pub fn sweep(&mut self) {
        for doc in 0..self.tokens.len() {
            for t in 0..self.tokens[doc].len() {
                self.remove_paragraph(doc, t);
                let p = self.conditional_removed(doc, t);
                let j = draw(&mut self.rng, &p);
                self.add_paragraph(doc, t, j);
            }
        }
        self.sweeps += 1;
    }

    pub fn run(mut self) -> (ThemeState, SamplerDiagnostics) {
        while self.sweeps < self.hyper.iterations {
            self.sweep();
        }
        (self.state, self.diagnostics)
    }
}

pub fn run_theme_sampler(
    tokens: &[Vec<Vec<WordId>>],
    vocab_size: usize,
    hyper: ThemeHyper,
    neighbors: Option<&ConceptNeighbors>,
) -> Result<(ThemeState, SamplerDiagnostics)> {
    Ok(ThemeSampler::new(tokens, vocab_size, hyper, neighbors)?.run())
}
