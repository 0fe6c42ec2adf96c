//! Corpora sampled from the model's own generative story, with the
//! generating labels kept for evaluation.
//!
//! The vocabulary is split into disjoint blocks: background words, a block
//! per document for its document-specific words and a block per theme.
//! Paragraph themes follow a sticky Markov chain reweighted by the
//! document's theme mixture. The theme of every paragraph is also written
//! as its heading (`theme<j>`).

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::corpus::{Corpus, Document, Paragraph, Token};
use crate::error::{Error, Result};
use crate::lda2::WTopic;
use crate::sampling::draw;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub k: usize,
    pub documents: usize,
    pub paragraphs_per_document: usize,
    pub words_per_paragraph: usize,
    pub vocab_size: usize,
    /// Share of the vocabulary used for background words. Keep it small:
    /// background words should be frequent in most paragraphs.
    pub background_share: f64,
    /// Share of the vocabulary split among documents for their own words.
    pub document_share: f64,
    /// Dirichlet concentration of the transition rows, before the sticky bonus.
    pub alpha: f64,
    /// Extra Dirichlet mass on the self transition.
    pub kappa: f64,
    /// Dirichlet concentration of each document's theme mixture.
    pub lambda: f64,
    /// Dirichlet parameters of the per-paragraph role mixture
    /// (background, document-specific, theme-specific).
    pub role_prior: [f64; 3],
    /// Dirichlet concentration of every word distribution.
    pub word_concentration: f64,
    pub lang: String,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            k: 5,
            documents: 20,
            paragraphs_per_document: 10,
            words_per_paragraph: 40,
            vocab_size: 500,
            background_share: 0.02,
            document_share: 0.3,
            alpha: 1.0,
            kappa: 10.0,
            lambda: 1.0,
            role_prior: [4.0, 2.0, 8.0],
            word_concentration: 1.0,
            lang: "en".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Generating theme of every paragraph.
    pub topics: Vec<Vec<usize>>,
    /// Generating role of every token.
    pub roles: Vec<Vec<Vec<WTopic>>>,
}

struct Block {
    words: Vec<String>,
    dist: Vec<f64>,
}

impl Block {
    fn new<R: Rng>(prefix: &str, size: usize, conc: f64, rng: &mut R) -> Result<Block> {
        let words = (0..size).map(|i| format!("{prefix}{i}")).collect();
        Ok(Block {
            words,
            dist: dirichlet(&vec![conc; size], rng)?,
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> &str {
        &self.words[draw(rng, &self.dist)]
    }
}

// normalized independent Gamma(a_i, 1) draws
fn dirichlet<R: Rng>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut x = alpha
        .iter()
        .map(|&a| {
            Gamma::new(a, 1.0)
                .map(|g| g.sample(rng))
                .map_err(|e| Error::Config(format!("dirichlet parameter {a}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        x.iter_mut().for_each(|v| *v /= total);
    } else {
        // every draw underflowed: fall back to the mean
        let s: f64 = alpha.iter().sum();
        x = alpha.iter().map(|a| a / s).collect();
    }
    Ok(x)
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if cfg.k < 2 || cfg.documents == 0 || cfg.paragraphs_per_document == 0 || cfg.words_per_paragraph == 0 {
        return Err(Error::Config("synthetic corpus needs K >= 2 and non-empty documents".into()));
    }
    let background_size = ((cfg.vocab_size as f64 * cfg.background_share) as usize).max(1);
    let doc_size = ((cfg.vocab_size as f64 * cfg.document_share) as usize / cfg.documents).max(1);
    let used = background_size + doc_size * cfg.documents;
    if used >= cfg.vocab_size || (cfg.vocab_size - used) / cfg.k == 0 {
        return Err(Error::Config("vocabulary too small for the requested blocks".into()));
    }
    let theme_size = (cfg.vocab_size - used) / cfg.k;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let background = Block::new("bg", background_size, cfg.word_concentration, &mut rng)?;
    let themes = (0..cfg.k)
        .map(|j| Block::new(&format!("t{j}w"), theme_size, cfg.word_concentration, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let transitions: Vec<Vec<f64>> = (0..cfg.k)
        .map(|j| {
            let prior: Vec<f64> = (0..cfg.k).map(|i| cfg.alpha + if i == j { cfg.kappa } else { 0.0 }).collect();
            dirichlet(&prior, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut documents = Vec::with_capacity(cfg.documents);
    let mut topics = Vec::with_capacity(cfg.documents);
    let mut roles = Vec::with_capacity(cfg.documents);
    for m in 0..cfg.documents {
        let own = Block::new(&format!("d{m}w"), doc_size, cfg.word_concentration, &mut rng)?;
        let theta = dirichlet(&vec![cfg.lambda; cfg.k], &mut rng)?;
        let mut z_seq: Vec<usize> = Vec::with_capacity(cfg.paragraphs_per_document);
        let mut doc_roles = Vec::with_capacity(cfg.paragraphs_per_document);
        let mut paragraphs = Vec::with_capacity(cfg.paragraphs_per_document);
        for t in 0..cfg.paragraphs_per_document {
            let weights: Vec<f64> = match z_seq.last() {
                Some(&prev) => transitions[prev].iter().zip(&theta).map(|(p, q)| p * q).collect(),
                None => theta.clone(),
            };
            let total: f64 = weights.iter().sum();
            let z = draw(&mut rng, &weights.iter().map(|w| w / total).collect::<Vec<_>>());
            let psi = dirichlet(&cfg.role_prior, &mut rng)?;
            let mut tokens = Vec::with_capacity(cfg.words_per_paragraph);
            let mut par_roles = Vec::with_capacity(cfg.words_per_paragraph);
            for _ in 0..cfg.words_per_paragraph {
                let role = WTopic::from_index(draw(&mut rng, &psi));
                let word = match role {
                    WTopic::Background => background.sample(&mut rng),
                    WTopic::DocumentSpecific => own.sample(&mut rng),
                    WTopic::ThemeSpecific => themes[z].sample(&mut rng),
                };
                tokens.push(Token::Word(word.to_string()));
                par_roles.push(role);
            }
            paragraphs.push(Paragraph {
                id: format!("p{t}"),
                heading: Some(format!("theme{z}")),
                tokens,
            });
            z_seq.push(z);
            doc_roles.push(par_roles);
        }
        documents.push(Document {
            id: format!("doc{m}"),
            lang: cfg.lang.clone(),
            title: String::new(),
            paragraphs,
        });
        topics.push(z_seq);
        roles.push(doc_roles);
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::new(documents)?,
        topics,
        roles,
    })
}
