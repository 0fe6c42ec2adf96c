//! Tokenized multilingual corpora.
//!
//! A corpus file holds one JSON document per line:
//!
//! ```text
//! {"id": "montreal", "lang": "en", "title": "Montreal",
//!  "paragraphs": [{"id": "p1", "heading": "history", "tokens": ["in", "2006", "c7954681"]}]}
//! ```
//!
//! Tokens are pre-tokenized. Plain words are case-folded when loaded; tokens of
//! the form `c<digits>` are concept identifiers and are kept verbatim.

mod frequency;
mod vocab;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use frequency::FrequencyTables;
pub use vocab::{IndexedCorpus, IndexedDocument, Vocabulary, WordId};

/// Returns true for strings of the form `c` followed by one or more ASCII digits.
pub fn is_concept_id(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next() == Some('c') && {
        let rest = chars.as_str();
        !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())
    }
}

/// A single token: either a plain word or a language-independent concept id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Word(String),
    Concept(String),
}

impl Token {
    /// Builds a token from raw input text. Words are lowercased; the concept
    /// test is applied to the folded form so that serialization round-trips.
    /// Returns `None` for empty input.
    pub fn from_raw(raw: &str) -> Option<Token> {
        if raw.is_empty() {
            return None;
        }
        if is_concept_id(raw) {
            return Some(Token::Concept(raw.to_owned()));
        }
        let folded = raw.to_lowercase();
        if is_concept_id(&folded) {
            Some(Token::Concept(folded))
        } else {
            Some(Token::Word(folded))
        }
    }

    pub fn concept(id: impl Into<String>) -> Token {
        Token::Concept(id.into())
    }

    pub fn surface(&self) -> &str {
        match self {
            Token::Word(s) | Token::Concept(s) => s,
        }
    }

    pub fn is_concept(&self) -> bool {
        matches!(self, Token::Concept(_))
    }

    pub fn concept_id(&self) -> Option<&str> {
        match self {
            Token::Concept(id) => Some(id),
            Token::Word(_) => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.surface())
    }
}

impl Serialize for Token {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.surface())
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Token::from_raw(&raw).ok_or_else(|| de::Error::custom("empty token"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    /// Gold section label, absent at inference time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<String>,
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub lang: String,
    #[serde(default)]
    pub title: String,
    pub paragraphs: Vec<Paragraph>,
}

/// An ordered collection of documents in one or more languages.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

/// Summary counts for a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub paragraphs: usize,
    pub tokens: usize,
    /// Distinct token types, words and concepts together.
    pub vocabulary: usize,
    pub word_types: usize,
    pub concept_types: usize,
    pub languages: Vec<String>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let corpus = Corpus { documents };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Parses JSONL from `reader`; `name` is used in error messages.
    pub fn from_reader<R: Read>(reader: R, name: &str) -> Result<Self> {
        let mut documents = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::parse(name, line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(&line)
                .map_err(|e| Error::parse(name, line_no, e.to_string()))?;
            documents.push(doc);
        }
        Corpus::new(documents)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.to_writer(&mut out)
            .and_then(|_| out.flush().map_err(|e| Error::io(path, e)))
    }

    pub fn to_writer<W: Write>(&self, mut out: W) -> Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")
                .map_err(|e| Error::io("<writer>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.to_writer(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Checks the structural invariants: non-empty documents and paragraphs,
    /// unique (language, document id) pairs and unique paragraph ids per document.
    pub fn validate(&self) -> Result<()> {
        let mut seen_docs = HashSet::new();
        for doc in &self.documents {
            if doc.id.is_empty() {
                return Err(Error::Validation("document with empty id".into()));
            }
            if doc.lang.is_empty() {
                return Err(Error::Validation(format!("document {}: empty language code", doc.id)));
            }
            if !seen_docs.insert((doc.lang.as_str(), doc.id.as_str())) {
                return Err(Error::Validation(format!(
                    "duplicate document id {} ({})",
                    doc.id, doc.lang
                )));
            }
            if doc.paragraphs.is_empty() {
                return Err(Error::Validation(format!("document {} has no paragraphs", doc.id)));
            }
            let mut seen_pars = HashSet::new();
            for par in &doc.paragraphs {
                if !seen_pars.insert(par.id.as_str()) {
                    return Err(Error::Validation(format!(
                        "document {}: duplicate paragraph id {}",
                        doc.id, par.id
                    )));
                }
                if par.tokens.is_empty() {
                    return Err(Error::Validation(format!(
                        "document {}: paragraph {} is empty",
                        doc.id, par.id
                    )));
                }
                if par.tokens.iter().any(|t| t.surface().is_empty()) {
                    return Err(Error::Validation(format!(
                        "document {}: paragraph {} contains an empty token",
                        doc.id, par.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Fails if a document's language is not among `declared`.
    pub fn check_languages(&self, declared: &[&str]) -> Result<()> {
        match self.documents.iter().find(|d| !declared.contains(&d.lang.as_str())) {
            Some(doc) => Err(Error::Validation(format!(
                "document {} has undeclared language {}",
                doc.id, doc.lang
            ))),
            None => Ok(()),
        }
    }

    /// Appends the documents of `other`; used to train on two languages jointly.
    pub fn concat(&self, other: &Corpus) -> Result<Corpus> {
        let mut documents = self.documents.clone();
        documents.extend(other.documents.iter().cloned());
        Corpus::new(documents)
    }

    pub fn languages(&self) -> Vec<String> {
        self.documents
            .iter()
            .map(|d| d.lang.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn paragraph_count(&self) -> usize {
        self.documents.iter().map(|d| d.paragraphs.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn stats(&self) -> CorpusStats {
        let mut types = HashSet::new();
        let mut tokens = 0;
        for par in self.documents.iter().flat_map(|d| &d.paragraphs) {
            tokens += par.tokens.len();
            types.extend(par.tokens.iter());
        }
        let concept_types = types.iter().filter(|t| t.is_concept()).count();
        CorpusStats {
            documents: self.documents.len(),
            paragraphs: self.paragraph_count(),
            tokens,
            vocabulary: types.len(),
            word_types: types.len() - concept_types,
            concept_types,
            languages: self.languages(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, pars: &str) -> String {
        format!(r#"{{"id": "{id}", "lang": "en", "title": "T", "paragraphs": [{pars}]}}"#)
    }

    #[test]
    fn concept_pattern() {
        assert!(is_concept_id("c553795"));
        assert!(is_concept_id("c0"));
        assert!(!is_concept_id("c"));
        assert!(!is_concept_id("city"));
        assert!(!is_concept_id("c12a"));
        assert!(!is_concept_id("C12"));
    }

    #[test]
    fn tokens_fold_words_but_not_concepts() {
        assert_eq!(Token::from_raw("Montreal"), Some(Token::Word("montreal".into())));
        assert_eq!(Token::from_raw("c7954681"), Some(Token::Concept("c7954681".into())));
        assert_eq!(Token::from_raw(""), None);
    }

    #[test]
    fn loads_minimal_corpus() {
        let text = line("d1", r#"{"id": "p1", "tokens": ["word"]}"#);
        let corpus = Corpus::from_reader(text.as_bytes(), "mem").unwrap();
        let stats = corpus.stats();
        assert_eq!(stats.documents, 1);
        assert_eq!(stats.paragraphs, 1);
        assert_eq!(stats.vocabulary, 1);
        assert_eq!(corpus.documents[0].paragraphs[0].heading, None);
    }

    #[test]
    fn preserves_paragraph_order_and_headings() {
        let text = line(
            "d1",
            r#"{"id": "b", "heading": "history", "tokens": ["In", "c42"]}, {"id": "a", "tokens": ["x"]}"#,
        );
        let corpus = Corpus::from_reader(text.as_bytes(), "mem").unwrap();
        let pars = &corpus.documents[0].paragraphs;
        assert_eq!(pars[0].id, "b");
        assert_eq!(pars[1].id, "a");
        assert_eq!(pars[0].heading.as_deref(), Some("history"));
        assert_eq!(pars[0].tokens, vec![Token::Word("in".into()), Token::Concept("c42".into())]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{}\n{{not json\n", line("d1", r#"{"id": "p", "tokens": ["a"]}"#));
        match Corpus::from_reader(text.as_bytes(), "mem") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_document_rejected() {
        let l = line("d1", r#"{"id": "p", "tokens": ["a"]}"#);
        let text = format!("{l}\n{l}\n");
        assert!(matches!(
            Corpus::from_reader(text.as_bytes(), "mem"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn empty_paragraph_rejected() {
        let text = line("d1", r#"{"id": "p", "tokens": []}"#);
        assert!(matches!(
            Corpus::from_reader(text.as_bytes(), "mem"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn empty_token_rejected_as_parse_error() {
        let text = line("d1", r#"{"id": "p", "tokens": ["a", ""]}"#);
        assert!(matches!(
            Corpus::from_reader(text.as_bytes(), "mem"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn undeclared_language_rejected() {
        let text = line("d1", r#"{"id": "p", "tokens": ["a"]}"#);
        let corpus = Corpus::from_reader(text.as_bytes(), "mem").unwrap();
        assert!(corpus.check_languages(&["en", "fr"]).is_ok());
        assert!(corpus.check_languages(&["fr"]).is_err());
    }
}
