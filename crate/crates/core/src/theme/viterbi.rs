use std::collections::HashMap;

use super::{
    boost_log_factor, initial_probability, paragraph_log_likelihood, transition_probability,
    ConceptNeighbors, ThemeHyper, ThemeState,
};
use crate::corpus::WordId;

/// Most probable state path of an HMM given in log space.
///
/// Returns the path and its joint log-probability. Ties go to the lower
/// state index, both in the recursion and in the final argmax.
pub fn viterbi(
    log_initial: &[f64],
    log_transition: &[Vec<f64>],
    log_emission: &[Vec<f64>],
) -> (Vec<usize>, f64) {
    let k = log_initial.len();
    if log_emission.is_empty() || k == 0 {
        return (Vec::new(), 0.0);
    }
    let steps = log_emission.len();
    let mut delta: Vec<f64> = (0..k).map(|j| log_initial[j] + log_emission[0][j]).collect();
    let mut back = vec![vec![0usize; k]; steps];
    for t in 1..steps {
        let mut next = vec![f64::NEG_INFINITY; k];
        for j in 0..k {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (i, &d) in delta.iter().enumerate() {
                let v = d + log_transition[i][j];
                if v > best {
                    best = v;
                    arg = i;
                }
            }
            next[j] = best + log_emission[t][j];
            back[t][j] = arg;
        }
        delta = next;
    }
    let mut last = 0;
    for j in 1..k {
        if delta[j] > delta[last] {
            last = j;
        }
    }
    let score = delta[last];
    let mut path = vec![0; steps];
    path[steps - 1] = last;
    for t in (1..steps).rev() {
        path[t - 1] = back[t][path[t]];
    }
    (path, score)
}

/// Joint log-probability of one state path.
pub fn sequence_log_prob(
    path: &[usize],
    log_initial: &[f64],
    log_transition: &[Vec<f64>],
    log_emission: &[Vec<f64>],
) -> f64 {
    let Some(&first) = path.first() else {
        return 0.0;
    };
    let mut lp = log_initial[first] + log_emission[0][first];
    for t in 1..path.len() {
        lp += log_transition[path[t - 1]][path[t]] + log_emission[t][path[t]];
    }
    lp
}

/// Log initial and transition probabilities of a trained state.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmView {
    pub log_initial: Vec<f64>,
    pub log_transition: Vec<Vec<f64>>,
}

impl HmmView {
    pub fn new(state: &ThemeState, hyper: &ThemeHyper) -> Self {
        let k = state.k;
        HmmView {
            log_initial: (0..k).map(|j| initial_probability(j, state, hyper).ln()).collect(),
            log_transition: (0..k)
                .map(|i| (0..k).map(|j| transition_probability(i, j, state, hyper).ln()).collect())
                .collect(),
        }
    }
}

/// Per-paragraph emission log-probabilities, `[paragraph][topic]`.
///
/// Words the model never saw get the smoothed probability β/(n^j + Wβ).
/// With `doc` given and mixture decoding enabled, the trained document
/// mixture is included; for new documents the mixture factor is uniform.
pub fn emission_log_probs(
    paragraphs: &[Vec<WordId>],
    doc: Option<usize>,
    state: &ThemeState,
    hyper: &ThemeHyper,
    neighbors: Option<&ConceptNeighbors>,
) -> Vec<Vec<f64>> {
    let k = state.k;
    let kf = k as f64;
    let mixture: Vec<f64> = match doc {
        Some(d) if hyper.decode_with_mixture => {
            let row = &state.doc_topic[d];
            let total: u64 = row.iter().map(|&n| n as u64).sum();
            row.iter()
                .map(|&n| ((n as f64 + hyper.lambda) / (total as f64 + kf * hyper.lambda)).ln())
                .collect()
        }
        _ => vec![-kf.ln(); k],
    };
    let mut scratch = HashMap::new();
    paragraphs
        .iter()
        .map(|words| {
            let mut base = vec![0.0; k];
            let mut boosted = vec![0.0; k];
            for j in 0..k {
                let lp = paragraph_log_likelihood(words, j, state, hyper.beta, &mut scratch) + mixture[j];
                base[j] = lp;
                boosted[j] = lp + boost_log_factor(words, j, state, hyper, neighbors);
            }
            if boosted.iter().any(|l| l.is_finite()) {
                boosted
            } else {
                base
            }
        })
        .collect()
}

/// Viterbi topic sequence of one document.
pub fn decode_document(
    paragraphs: &[Vec<WordId>],
    doc: Option<usize>,
    state: &ThemeState,
    hyper: &ThemeHyper,
    neighbors: Option<&ConceptNeighbors>,
) -> (Vec<usize>, f64) {
    let view = HmmView::new(state, hyper);
    let emission = emission_log_probs(paragraphs, doc, state, hyper, neighbors);
    viterbi(&view.log_initial, &view.log_transition, &emission)
}
