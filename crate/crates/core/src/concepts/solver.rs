//! Maximum edge-weight selection on a complete n-partite graph.
//!
//! Every partition is one mention; its vertices are the candidate concepts.
//! A selection picks exactly one candidate per partition and scores the sum
//! of pairwise edge weights between the picks.

use super::graph::RelationGraph;
use super::lexicon::{canonical_order, Candidate};
use super::MentionPartition;
use crate::error::{Error, Result};

/// Default limit on the number of candidate combinations for exact search.
pub const DEFAULT_EXACT_BUDGET: f64 = 1e6;

const RELATION_SHARE: f64 = 0.8;
const PRIOR_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMode {
    #[default]
    Exact,
    Greedy,
}

/// Candidates per partition plus a dense matrix of cross-partition weights.
#[derive(Debug, Clone)]
pub struct DisambiguationInstance {
    candidates: Vec<Vec<Candidate>>,
    offsets: Vec<usize>,
    weights: Vec<f64>,
    nodes: usize,
}

/// Result of a selection: one candidate index per partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub choices: Vec<usize>,
    pub concepts: Vec<String>,
    pub objective: f64,
}

/// Relatedness of two concepts: the relation weight if an edge exists,
/// 1 for the same concept, otherwise neighborhood overlap.
pub fn relatedness(graph: &RelationGraph, a: &str, b: &str) -> f64 {
    if let Some(w) = graph.weight(a, b) {
        w
    } else if a == b {
        1.0
    } else {
        graph.neighborhood_jaccard(a, b)
    }
}

/// Edge weight used for disambiguation, blending relatedness with priors.
pub fn blended_weight(graph: &RelationGraph, u: &Candidate, v: &Candidate) -> f64 {
    RELATION_SHARE * relatedness(graph, &u.concept, &v.concept)
        + PRIOR_SHARE * (u.prior + v.prior) / 2.0
}

impl DisambiguationInstance {
    /// Builds an instance over `partitions` with weights from `graph`.
    pub fn from_mentions(partitions: &[MentionPartition], graph: &RelationGraph) -> Self {
        let candidates = partitions.iter().map(|p| p.candidates.clone()).collect();
        Self::with_weights(candidates, |u, v| blended_weight(graph, u, v))
    }

    /// Builds an instance with an arbitrary symmetric weight function.
    /// Candidates are reordered canonically (descending prior, then id).
    pub fn with_weights<F>(mut candidates: Vec<Vec<Candidate>>, weight: F) -> Self
    where
        F: Fn(&Candidate, &Candidate) -> f64,
    {
        for list in &mut candidates {
            list.sort_by(canonical_order);
        }
        let mut offsets = Vec::with_capacity(candidates.len());
        let mut nodes = 0;
        for list in &candidates {
            offsets.push(nodes);
            nodes += list.len();
        }
        let mut weights = vec![0.0; nodes * nodes];
        for (p, list_p) in candidates.iter().enumerate() {
            for (q, list_q) in candidates.iter().enumerate().skip(p + 1) {
                for (c, u) in list_p.iter().enumerate() {
                    for (d, v) in list_q.iter().enumerate() {
                        let w = weight(u, v);
                        let (a, b) = (offsets[p] + c, offsets[q] + d);
                        weights[a * nodes + b] = w;
                        weights[b * nodes + a] = w;
                    }
                }
            }
        }
        DisambiguationInstance {
            candidates,
            offsets,
            weights,
            nodes,
        }
    }

    pub fn partitions(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidates(&self, partition: usize) -> &[Candidate] {
        &self.candidates[partition]
    }

    /// Weight between candidate `c` of partition `p` and candidate `d` of `q`.
    pub fn weight(&self, p: usize, c: usize, q: usize, d: usize) -> f64 {
        self.weights[(self.offsets[p] + c) * self.nodes + self.offsets[q] + d]
    }

    /// Number of complete assignments, as a float to avoid overflow.
    pub fn search_space(&self) -> f64 {
        self.candidates.iter().map(|c| c.len() as f64).product()
    }

    /// Sum of pairwise weights, accumulated over pairs `p < q` in index order.
    pub fn objective(&self, choices: &[usize]) -> f64 {
        let mut total = 0.0;
        for p in 0..choices.len() {
            for q in p + 1..choices.len() {
                total += self.weight(p, choices[p], q, choices[q]);
            }
        }
        total
    }

    fn selection(&self, choices: Vec<usize>) -> Selection {
        let concepts = choices
            .iter()
            .enumerate()
            .map(|(p, &c)| self.candidates[p][c].concept.clone())
            .collect();
        let objective = self.objective(&choices);
        Selection {
            choices,
            concepts,
            objective,
        }
    }

    pub fn solve(&self, mode: SolverMode, budget: f64) -> Result<Selection> {
        if self.candidates.iter().any(Vec::is_empty) {
            return Err(Error::Validation("partition without candidates".into()));
        }
        match mode {
            SolverMode::Exact => self.solve_exact(budget),
            SolverMode::Greedy => Ok(self.solve_greedy()),
        }
    }

    /// Branch and bound over partitions in index order, candidates in
    /// canonical order. Among optimal assignments the first one in that
    /// enumeration order is returned.
    pub fn solve_exact(&self, budget: f64) -> Result<Selection> {
        let size = self.search_space();
        if size > budget {
            return Err(Error::InstanceTooLarge { size, budget });
        }
        let n = self.partitions();
        if n <= 1 {
            return Ok(self.selection(vec![0; n]));
        }
        // best_edge[p][c][r]: heaviest edge from (p, c) into partition r.
        let best_edge: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|p| {
                (0..self.candidates[p].len())
                    .map(|c| {
                        (0..n)
                            .map(|r| {
                                if r == p {
                                    return 0.0;
                                }
                                (0..self.candidates[r].len())
                                    .map(|d| self.weight(p, c, r, d))
                                    .fold(f64::NEG_INFINITY, f64::max)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let mut search = ExactSearch {
            instance: self,
            best_edge,
            chosen: Vec::with_capacity(n),
            best: None,
        };
        search.descend(0.0);
        let (choices, _) = search.best.expect("at least one leaf is visited");
        Ok(self.selection(choices))
    }

    /// Seeds with the heaviest edge, then fixes the remaining partitions in
    /// index order, each with the candidate adding the most weight.
    pub fn solve_greedy(&self) -> Selection {
        let n = self.partitions();
        if n <= 1 {
            return self.selection(vec![0; n]);
        }
        let mut seed = (0, 0, 1, 0);
        let mut heaviest = f64::NEG_INFINITY;
        for p in 0..n {
            for q in p + 1..n {
                for c in 0..self.candidates[p].len() {
                    for d in 0..self.candidates[q].len() {
                        let w = self.weight(p, c, q, d);
                        if w > heaviest {
                            heaviest = w;
                            seed = (p, c, q, d);
                        }
                    }
                }
            }
        }
        let mut choices: Vec<Option<usize>> = vec![None; n];
        choices[seed.0] = Some(seed.1);
        choices[seed.2] = Some(seed.3);
        for r in 0..n {
            if choices[r].is_some() {
                continue;
            }
            let mut best_gain = f64::NEG_INFINITY;
            let mut best_c = 0;
            for c in 0..self.candidates[r].len() {
                let gain: f64 = choices
                    .iter()
                    .enumerate()
                    .filter_map(|(s, ch)| ch.map(|d| self.weight(r, c, s, d)))
                    .sum();
                if gain > best_gain {
                    best_gain = gain;
                    best_c = c;
                }
            }
            choices[r] = Some(best_c);
        }
        self.selection(choices.into_iter().map(|c| c.unwrap_or(0)).collect())
    }
}

// Absorbs rounding differences between the incremental bound and the
// canonical objective so that no equal-or-better subtree is pruned.
const BOUND_SLACK: f64 = 1e-9;

struct ExactSearch<'a> {
    instance: &'a DisambiguationInstance,
    best_edge: Vec<Vec<Vec<f64>>>,
    chosen: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
}

impl ExactSearch<'_> {
    /// Upper bound on what the unassigned partitions can still add.
    fn remaining_bound(&self) -> f64 {
        let inst = self.instance;
        let k = self.chosen.len();
        let n = inst.partitions();
        let mut bound = 0.0;
        for p in k..n {
            let mut best = f64::NEG_INFINITY;
            for c in 0..inst.candidates[p].len() {
                let mut gain: f64 = self
                    .chosen
                    .iter()
                    .enumerate()
                    .map(|(q, &d)| inst.weight(p, c, q, d))
                    .sum();
                gain += self.best_edge[p][c][p + 1..].iter().sum::<f64>();
                best = best.max(gain);
            }
            bound += best;
        }
        bound
    }

    fn descend(&mut self, partial: f64) {
        let inst = self.instance;
        let depth = self.chosen.len();
        if depth == inst.partitions() {
            let value = inst.objective(&self.chosen);
            if self.best.as_ref().is_none_or(|(_, b)| value > *b) {
                self.best = Some((self.chosen.clone(), value));
            }
            return;
        }
        if let Some((_, best)) = &self.best {
            if partial + self.remaining_bound() < best - BOUND_SLACK {
                return;
            }
        }
        for c in 0..inst.candidates[depth].len() {
            let gain: f64 = self
                .chosen
                .iter()
                .enumerate()
                .map(|(q, &d)| inst.weight(depth, c, q, d))
                .sum();
            self.chosen.push(c);
            self.descend(partial + gain);
            self.chosen.pop();
        }
    }
}
