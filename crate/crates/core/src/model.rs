//! The trained pipeline: w-topic roles, paragraph themes and their decoded
//! sequences, with JSON persistence.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::align::{form_segments, Segment};
use crate::concepts::RelationGraph;
use crate::corpus::{Corpus, FrequencyTables, IndexedCorpus, IndexedDocument, Vocabulary, WordId};
use crate::error::{Error, Result};
use crate::lda2::{export_language_models, fold_in, run_wtopic_sampler, LanguageModels, WTopic, WTopicHyper, WTopicState};
use crate::theme::{
    decode_document, run_theme_sampler, ConceptNeighbors, SamplerDiagnostics, ThemeHyper, ThemeState,
    ThemeTokens,
};

pub const MODEL_FORMAT: &str = "themealign-model/1";

/// Training settings. Unset smoothing values are derived from the corpus:
/// η = β = W/100000, γ = W/P, λ = 50/K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: f64,
    pub kappa: f64,
    pub use_concept_boost: bool,
    pub boost_exponent: f64,
    pub decode_with_mixture: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            k: 10,
            seed: 0,
            iterations: 200,
            burn_in: 100,
            eta: None,
            gamma: None,
            beta: None,
            lambda: None,
            alpha: 0.01,
            kappa: 1000.0,
            use_concept_boost: true,
            boost_exponent: 1.0,
            decode_with_mixture: true,
        }
    }
}

impl TrainOptions {
    /// Hyperparameters of both samplers for a vocabulary of `w` words over
    /// `p` paragraphs. The theme sampler runs on a seed derived from `seed`.
    pub fn resolve(&self, w: usize, p: usize) -> Result<(WTopicHyper, ThemeHyper)> {
        let mut wh = WTopicHyper::for_corpus(w, p, self.seed);
        wh.iterations = self.iterations;
        wh.burn_in = self.burn_in;
        if let Some(eta) = self.eta {
            wh.eta = eta;
        }
        if let Some(gamma) = self.gamma {
            wh.gamma = gamma;
        }
        let mut th = ThemeHyper::for_corpus(w, self.k, self.seed.wrapping_add(1));
        th.iterations = self.iterations;
        th.burn_in = self.burn_in;
        th.alpha = self.alpha;
        th.kappa = self.kappa;
        th.use_concept_boost = self.use_concept_boost;
        th.boost_exponent = self.boost_exponent;
        th.decode_with_mixture = self.decode_with_mixture;
        if let Some(beta) = self.beta {
            th.beta = beta;
        }
        if let Some(lambda) = self.lambda {
            th.lambda = lambda;
        }
        wh.validate()?;
        th.validate()?;
        Ok((wh, th))
    }
}

/// Decoded topics of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedDocument {
    pub doc: String,
    pub lang: String,
    pub topics: Vec<usize>,
}

impl DecodedDocument {
    pub fn segments(&self) -> Vec<Segment> {
        form_segments(&self.doc, &self.topics)
    }
}

/// Writes one JSON object per line.
pub fn write_decoded<W: Write>(mut out: W, docs: &[DecodedDocument]) -> Result<()> {
    for d in docs {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

pub fn read_decoded<R: Read>(reader: R, name: &str) -> Result<Vec<DecodedDocument>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(name, n + 1, e.to_string()))?);
    }
    Ok(out)
}

/// Topic of every paragraph of `corpus`, in corpus order, looked up by
/// document language and id.
pub fn paragraph_topics(corpus: &Corpus, decoded: &[DecodedDocument]) -> Result<Vec<usize>> {
    let index: HashMap<(&str, &str), &DecodedDocument> =
        decoded.iter().map(|d| ((d.lang.as_str(), d.doc.as_str()), d)).collect();
    let mut out = Vec::with_capacity(corpus.paragraph_count());
    for doc in &corpus.documents {
        let d = index
            .get(&(doc.lang.as_str(), doc.id.as_str()))
            .ok_or_else(|| Error::Evaluation(format!("no assignments for document {} ({})", doc.id, doc.lang)))?;
        if d.topics.len() != doc.paragraphs.len() {
            return Err(Error::Evaluation(format!(
                "document {}: {} topics for {} paragraphs",
                doc.id,
                d.topics.len(),
                doc.paragraphs.len()
            )));
        }
        out.extend(&d.topics);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    wtopic_hyper: WTopicHyper,
    theme_hyper: ThemeHyper,
    corpus: IndexedCorpus,
    tables: FrequencyTables,
    wstate: WTopicState,
    tstate: ThemeState,
    theme_tokens: ThemeTokens,
    relations: Option<RelationGraph>,
    neighbors: Option<ConceptNeighbors>,
    decoded: Vec<Vec<usize>>,
    diagnostics: SamplerDiagnostics,
}

/// Runs the w-topic sampler, then the theme sampler on the theme-specific
/// tokens, then decodes every training document.
pub fn train(corpus: &Corpus, relations: Option<RelationGraph>, options: &TrainOptions) -> Result<TrainedModel> {
    if corpus.is_empty() {
        return Err(Error::Validation("cannot train on an empty corpus".into()));
    }
    let indexed = IndexedCorpus::new(corpus);
    let (wh, th) = options.resolve(indexed.vocab.len(), indexed.paragraph_count())?;
    let tables = FrequencyTables::build(&indexed);
    let wstate = run_wtopic_sampler(&indexed, &tables, wh)?;
    let theme_tokens = wstate.theme_tokens(&indexed);
    let neighbors = relations.as_ref().map(|g| ConceptNeighbors::new(&indexed.vocab, g));
    let (tstate, diagnostics) = run_theme_sampler(&theme_tokens, indexed.vocab.len(), th, neighbors.as_ref())?;
    let mut model = TrainedModel {
        wtopic_hyper: wh,
        theme_hyper: th,
        corpus: indexed,
        tables,
        wstate,
        tstate,
        theme_tokens,
        relations,
        neighbors,
        decoded: Vec::new(),
        diagnostics,
    };
    model.decoded = model.decode_training();
    Ok(model)
}

impl TrainedModel {
    fn decode_training(&self) -> Vec<Vec<usize>> {
        self.theme_tokens
            .par_iter()
            .enumerate()
            .map(|(d, pars)| decode_document(pars, Some(d), &self.tstate, &self.theme_hyper, self.neighbors.as_ref()).0)
            .collect()
    }

    pub fn wtopic_hyper(&self) -> &WTopicHyper {
        &self.wtopic_hyper
    }

    pub fn theme_hyper(&self) -> &ThemeHyper {
        &self.theme_hyper
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.corpus.vocab
    }

    pub fn indexed_corpus(&self) -> &IndexedCorpus {
        &self.corpus
    }

    pub fn frequency_tables(&self) -> &FrequencyTables {
        &self.tables
    }

    pub fn wtopic_state(&self) -> &WTopicState {
        &self.wstate
    }

    pub fn theme_state(&self) -> &ThemeState {
        &self.tstate
    }

    pub fn theme_tokens(&self) -> &ThemeTokens {
        &self.theme_tokens
    }

    pub fn relations(&self) -> Option<&RelationGraph> {
        self.relations.as_ref()
    }

    pub fn diagnostics(&self) -> &SamplerDiagnostics {
        &self.diagnostics
    }

    /// Viterbi topics of the training documents.
    pub fn training_assignments(&self) -> Vec<DecodedDocument> {
        self.corpus
            .documents
            .iter()
            .zip(&self.decoded)
            .map(|(d, z)| DecodedDocument {
                doc: d.id.clone(),
                lang: d.lang.clone(),
                topics: z.clone(),
            })
            .collect()
    }

    pub fn language_models(&self, top_n: usize) -> LanguageModels {
        export_language_models(&self.wstate, &self.corpus, self.wtopic_hyper.eta, top_n)
    }

    /// Decodes every document of `corpus`. Training documents (same language,
    /// id and tokens) reuse their trained roles and mixture; any other
    /// document has its roles folded in and a uniform theme mixture.
    pub fn decode(&self, corpus: &Corpus) -> Result<Vec<DecodedDocument>> {
        let known: HashMap<(&str, &str), usize> = self
            .corpus
            .documents
            .iter()
            .enumerate()
            .map(|(d, doc)| ((doc.lang.as_str(), doc.id.as_str()), d))
            .collect();
        let w = self.corpus.vocab.len();
        Ok(corpus
            .documents
            .par_iter()
            .map(|doc| {
                // unseen words get ids past the trained vocabulary, local to this document
                let mut unseen: HashMap<&str, WordId> = HashMap::new();
                let pars: Vec<Vec<WordId>> = doc
                    .paragraphs
                    .iter()
                    .map(|p| {
                        p.tokens
                            .iter()
                            .map(|t| {
                                self.corpus.vocab.get(t.surface()).unwrap_or_else(|| {
                                    let next = (w + unseen.len()) as WordId;
                                    *unseen.entry(t.surface()).or_insert(next)
                                })
                            })
                            .collect()
                    })
                    .collect();
                let trained = known
                    .get(&(doc.lang.as_str(), doc.id.as_str()))
                    .copied()
                    .filter(|&d| self.corpus.documents[d].paragraphs == pars);
                let topics = match trained {
                    Some(d) => self.decoded[d].clone(),
                    None => {
                        let roles = fold_in(&self.wstate, &self.tables, &pars, &self.wtopic_hyper);
                        let theme: Vec<Vec<WordId>> = pars
                            .iter()
                            .zip(&roles)
                            .map(|(p, r)| {
                                p.iter()
                                    .zip(r)
                                    .filter(|(_, s)| **s == WTopic::ThemeSpecific)
                                    .map(|(w, _)| *w)
                                    .collect()
                            })
                            .collect();
                        decode_document(&theme, None, &self.tstate, &self.theme_hyper, self.neighbors.as_ref()).0
                    }
                };
                DecodedDocument {
                    doc: doc.id.clone(),
                    lang: doc.lang.clone(),
                    topics,
                }
            })
            .collect())
    }

    /// SHA-256 over the serialized hyperparameters of both samplers.
    pub fn config_hash(&self) -> String {
        config_hash(&self.wtopic_hyper, &self.theme_hyper)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.to_writer(&mut out)?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn to_writer<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.to_file())?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(reader)?;
        Self::from_file(file)
    }

    fn to_file(&self) -> ModelFile {
        let k = self.tstate.k();
        let w = self.corpus.vocab.len();
        let documents = self
            .corpus
            .documents
            .iter()
            .enumerate()
            .map(|(d, doc)| StoredDocument {
                id: doc.id.clone(),
                lang: doc.lang.clone(),
                paragraphs: doc.paragraphs.clone(),
                roles: self.wstate.assignments()[d]
                    .iter()
                    .map(|par| par.iter().map(|s| char::from(b'0' + s.index() as u8)).collect())
                    .collect(),
                topics: self.tstate.assignments()[d].clone(),
                decoded: self.decoded[d].clone(),
            })
            .collect();
        let sparse = |counts: &mut dyn Iterator<Item = (WordId, u32)>| -> Vec<(WordId, u32)> {
            let mut v: Vec<_> = counts.filter(|c| c.1 > 0).collect();
            v.sort_unstable();
            v
        };
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            config_hash: self.config_hash(),
            wtopic_hyper: self.wtopic_hyper,
            theme_hyper: self.theme_hyper,
            vocabulary: self.corpus.vocab.clone(),
            documents,
            relations: self
                .relations
                .as_ref()
                .map(|g| g.edges().map(|(a, b, x)| (a.to_string(), b.to_string(), x)).collect()),
            counts: StoredCounts {
                background: sparse(&mut (0..w as WordId).map(|id| (id, self.wstate.word_count(0, id, WTopic::Background)))),
                theme: sparse(&mut (0..w as WordId).map(|id| (id, self.wstate.word_count(0, id, WTopic::ThemeSpecific)))),
                document_specific: (0..self.corpus.documents.len())
                    .map(|d| sparse(&mut self.wstate.doc_specific_counts(d).iter().map(|(&a, &b)| (a, b))))
                    .collect(),
                topic_word: (0..k)
                    .map(|j| sparse(&mut (0..w as WordId).map(|id| (id, self.tstate.topic_word(j, id)))))
                    .collect(),
                doc_topic: (0..self.corpus.documents.len()).map(|d| self.tstate.doc_topic(d).to_vec()).collect(),
                transitions: (0..k)
                    .map(|i| (0..k).map(|j| self.tstate.transition_count(i, j)).collect())
                    .collect(),
                initial: (0..k).map(|j| self.tstate.initial_count(j)).collect(),
            },
            diagnostics: self.diagnostics.clone(),
        }
    }

    fn from_file(file: ModelFile) -> Result<Self> {
        if file.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unsupported model format {:?}", file.format)));
        }
        let hash = config_hash(&file.wtopic_hyper, &file.theme_hyper);
        if hash != file.config_hash {
            return Err(Error::Model("config hash does not match the stored hyperparameters".into()));
        }
        file.wtopic_hyper.validate()?;
        file.theme_hyper.validate()?;
        let vocab = file.vocabulary;
        let w = vocab.len();
        let mut documents = Vec::with_capacity(file.documents.len());
        let mut roles = Vec::with_capacity(file.documents.len());
        let mut topics = Vec::with_capacity(file.documents.len());
        let mut decoded = Vec::with_capacity(file.documents.len());
        for doc in file.documents {
            let doc_roles = doc
                .roles
                .iter()
                .map(|par| {
                    par.chars()
                        .map(|c| match c {
                            '0' => Ok(WTopic::Background),
                            '1' => Ok(WTopic::DocumentSpecific),
                            '2' => Ok(WTopic::ThemeSpecific),
                            _ => Err(Error::Model(format!("bad role {c:?} in document {}", doc.id))),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            if doc.decoded.len() != doc.paragraphs.len() || doc.decoded.iter().any(|&j| j >= file.theme_hyper.k) {
                return Err(Error::Model(format!("document {}: bad decoded topics", doc.id)));
            }
            roles.push(doc_roles);
            topics.push(doc.topics);
            decoded.push(doc.decoded);
            documents.push(IndexedDocument {
                id: doc.id,
                lang: doc.lang,
                paragraphs: doc.paragraphs,
            });
        }
        let corpus = IndexedCorpus { vocab, documents };
        let wstate = WTopicState::from_assignments(&corpus, w, roles)?;
        let theme_tokens = wstate.theme_tokens(&corpus);
        let tstate = ThemeState::from_assignments(&theme_tokens, file.theme_hyper.k, w, topics)?;
        let relations = match file.relations {
            Some(edges) => {
                let mut g = RelationGraph::new();
                for (a, b, x) in edges {
                    g.add_edge(&a, &b, x)?;
                }
                Some(g)
            }
            None => None,
        };
        let neighbors = relations.as_ref().map(|g| ConceptNeighbors::new(&corpus.vocab, g));
        let model = TrainedModel {
            wtopic_hyper: file.wtopic_hyper,
            theme_hyper: file.theme_hyper,
            tables: FrequencyTables::build(&corpus),
            corpus,
            wstate,
            tstate,
            theme_tokens,
            relations,
            neighbors,
            decoded,
            diagnostics: file.diagnostics,
        };
        if model.to_file().counts != file.counts {
            return Err(Error::Model("stored count tables disagree with the assignments".into()));
        }
        Ok(model)
    }
}

fn config_hash(wh: &WTopicHyper, th: &ThemeHyper) -> String {
    let json = serde_json::to_string(&(wh, th)).expect("hyperparameters serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    config_hash: String,
    wtopic_hyper: WTopicHyper,
    theme_hyper: ThemeHyper,
    vocabulary: Vocabulary,
    documents: Vec<StoredDocument>,
    relations: Option<Vec<(String, String, f64)>>,
    counts: StoredCounts,
    diagnostics: SamplerDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct StoredDocument {
    id: String,
    lang: String,
    paragraphs: Vec<Vec<WordId>>,
    /// One digit per token: 0 background, 1 document-specific, 2 theme-specific.
    roles: Vec<String>,
    /// Last sampled topic per paragraph.
    topics: Vec<usize>,
    /// Viterbi topic per paragraph.
    decoded: Vec<usize>,
}

/// Count tables, sparse as sorted `(word, count)` lists. Stored for
/// inspection and checked against a recount on load.
#[derive(Serialize, Deserialize, PartialEq)]
struct StoredCounts {
    background: Vec<(WordId, u32)>,
    theme: Vec<(WordId, u32)>,
    document_specific: Vec<Vec<(WordId, u32)>>,
    topic_word: Vec<Vec<(WordId, u32)>>,
    doc_topic: Vec<Vec<u32>>,
    transitions: Vec<Vec<u32>>,
    initial: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SyntheticConfig};

    fn small_options() -> TrainOptions {
        TrainOptions {
            k: 3,
            iterations: 10,
            burn_in: 5,
            ..Default::default()
        }
    }

    fn small_corpus() -> Corpus {
        generate(&SyntheticConfig {
            k: 3,
            documents: 4,
            paragraphs_per_document: 5,
            words_per_paragraph: 15,
            vocab_size: 120,
            ..Default::default()
        })
        .unwrap()
        .corpus
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let graph = RelationGraph::from_reader("c1 c2 0.5\n".as_bytes(), "g").unwrap();
        let model = train(&small_corpus(), Some(graph), &small_options()).unwrap();
        let mut first = Vec::new();
        model.to_writer(&mut first).unwrap();
        let loaded = TrainedModel::from_reader(first.as_slice()).unwrap();
        let mut second = Vec::new();
        loaded.to_writer(&mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(loaded.training_assignments(), model.training_assignments());
    }

    #[test]
    fn tampered_counts_are_rejected() {
        let model = train(&small_corpus(), None, &small_options()).unwrap();
        let mut buf = Vec::new();
        model.to_writer(&mut buf).unwrap();
        let mut json: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        json["counts"]["initial"][0] = serde_json::json!(999);
        assert!(TrainedModel::from_reader(json.to_string().as_bytes()).is_err());
        json = serde_json::from_slice(&buf).unwrap();
        json["theme_hyper"]["kappa"] = serde_json::json!(1.0);
        assert!(TrainedModel::from_reader(json.to_string().as_bytes()).is_err());
    }

    #[test]
    fn decoding_training_documents_reuses_viterbi() {
        let corpus = small_corpus();
        let model = train(&corpus, None, &small_options()).unwrap();
        assert_eq!(model.decode(&corpus).unwrap(), model.training_assignments());
        assert!(model.decode(&Corpus::default()).unwrap().is_empty());
    }

    #[test]
    fn decodes_unseen_documents() {
        let model = train(&small_corpus(), None, &small_options()).unwrap();
        let other = generate(&SyntheticConfig {
            k: 3,
            documents: 2,
            paragraphs_per_document: 3,
            words_per_paragraph: 10,
            vocab_size: 120,
            lang: "fr".into(),
            seed: 9,
            ..Default::default()
        })
        .unwrap()
        .corpus;
        let out = model.decode(&other).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|d| d.topics.len() == 3 && d.topics.iter().all(|&j| j < 3)));
        let topics = paragraph_topics(&other, &out).unwrap();
        assert_eq!(topics.len(), 6);
    }

    #[test]
    fn invalid_k_is_a_config_error() {
        let opts = TrainOptions { k: 1, ..small_options() };
        assert!(matches!(train(&small_corpus(), None, &opts), Err(Error::Config(_))));
    }

    #[test]
    fn decoded_lines_round_trip() {
        let docs = vec![DecodedDocument {
            doc: "d".into(),
            lang: "en".into(),
            topics: vec![1, 1, 0],
        }];
        let mut buf = Vec::new();
        write_decoded(&mut buf, &docs).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "{\"doc\":\"d\",\"lang\":\"en\",\"topics\":[1,1,0]}\n");
        assert_eq!(read_decoded(buf.as_slice(), "x").unwrap(), docs);
        assert_eq!(docs[0].segments().len(), 2);
    }
}
