//! Concept annotation: locate lexicon surface forms in paragraphs, pick one
//! concept per mention by maximum edge-weight selection, and replace each
//! mention with its concept id.

mod graph;
mod lexicon;
mod solver;

use rayon::prelude::*;

use crate::corpus::{Corpus, Document, Paragraph, Token};
use crate::error::{Error, Result};

pub use graph::RelationGraph;
pub use lexicon::{Candidate, ConceptLexicon};
pub use solver::{
    blended_weight, relatedness, DisambiguationInstance, Selection, SolverMode,
    DEFAULT_EXACT_BUDGET,
};

/// A matched span `[start, end)` inside one paragraph and its candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionPartition {
    pub paragraph: String,
    pub start: usize,
    pub end: usize,
    pub candidates: Vec<Candidate>,
}

/// Finds lexicon mentions with greedy longest match, left to right.
/// Spans never include tokens that are already concepts.
pub fn match_mentions(paragraph: &Paragraph, lexicon: &ConceptLexicon) -> Vec<MentionPartition> {
    let tokens = &paragraph.tokens;
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let max_len = lexicon.max_len().min(tokens.len() - i);
        let word_run = tokens[i..i + max_len]
            .iter()
            .take_while(|t| !t.is_concept())
            .count();
        let hit = (1..=word_run).rev().find_map(|len| {
            let surface: Vec<&str> = tokens[i..i + len].iter().map(Token::surface).collect();
            lexicon.candidates(&surface).map(|c| (len, c))
        });
        match hit {
            Some((len, candidates)) => {
                mentions.push(MentionPartition {
                    paragraph: paragraph.id.clone(),
                    start: i,
                    end: i + len,
                    candidates: candidates.to_vec(),
                });
                i += len;
            }
            None => i += 1,
        }
    }
    mentions
}

/// Unit over which one disambiguation instance is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnnotationScope {
    #[default]
    Paragraph,
    Document,
}

#[derive(Debug, Clone, Copy)]
pub struct AnnotateOptions {
    pub scope: AnnotationScope,
    pub mode: SolverMode,
    /// Maximum number of candidate combinations for exact search.
    pub exact_budget: f64,
    /// Fall back to greedy selection when an instance exceeds the budget.
    pub greedy_fallback: bool,
}

impl Default for AnnotateOptions {
    fn default() -> Self {
        AnnotateOptions {
            scope: AnnotationScope::Paragraph,
            mode: SolverMode::Exact,
            exact_budget: DEFAULT_EXACT_BUDGET,
            greedy_fallback: true,
        }
    }
}

/// Replaces lexicon mentions with disambiguated concept tokens.
pub fn annotate_corpus(
    corpus: &Corpus,
    lexicon: &ConceptLexicon,
    graph: &RelationGraph,
    options: &AnnotateOptions,
) -> Result<Corpus> {
    let documents = corpus
        .documents
        .par_iter()
        .map(|doc| annotate_document(doc, lexicon, graph, options))
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(documents)
}

pub fn annotate_document(
    doc: &Document,
    lexicon: &ConceptLexicon,
    graph: &RelationGraph,
    options: &AnnotateOptions,
) -> Result<Document> {
    let mentions: Vec<Vec<MentionPartition>> = doc
        .paragraphs
        .iter()
        .map(|p| match_mentions(p, lexicon))
        .collect();

    let resolved: Vec<Vec<String>> = match options.scope {
        AnnotationScope::Paragraph => mentions
            .iter()
            .map(|m| resolve(m, graph, options))
            .collect::<Result<_>>()?,
        AnnotationScope::Document => {
            let flat: Vec<MentionPartition> = mentions.iter().flatten().cloned().collect();
            let mut concepts = resolve(&flat, graph, options)?.into_iter();
            mentions
                .iter()
                .map(|m| concepts.by_ref().take(m.len()).collect())
                .collect()
        }
    };

    let paragraphs = doc
        .paragraphs
        .iter()
        .zip(mentions.iter().zip(&resolved))
        .map(|(par, (spans, concepts))| Paragraph {
            id: par.id.clone(),
            heading: par.heading.clone(),
            tokens: replace_spans(&par.tokens, spans, concepts),
        })
        .collect();
    Ok(Document {
        id: doc.id.clone(),
        lang: doc.lang.clone(),
        title: doc.title.clone(),
        paragraphs,
    })
}

fn resolve(
    mentions: &[MentionPartition],
    graph: &RelationGraph,
    options: &AnnotateOptions,
) -> Result<Vec<String>> {
    if mentions.is_empty() {
        return Ok(Vec::new());
    }
    let instance = DisambiguationInstance::from_mentions(mentions, graph);
    let selection = match instance.solve(options.mode, options.exact_budget) {
        Err(Error::InstanceTooLarge { .. }) if options.greedy_fallback => instance.solve_greedy(),
        other => other?,
    };
    Ok(selection.concepts)
}

fn replace_spans(tokens: &[Token], spans: &[MentionPartition], concepts: &[String]) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut next = spans.iter().zip(concepts).peekable();
    let mut i = 0;
    while i < tokens.len() {
        match next.peek() {
            Some((span, concept)) if span.start == i => {
                out.push(Token::concept(concept.as_str()));
                i = span.end;
                next.next();
            }
            _ => {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    out
}
