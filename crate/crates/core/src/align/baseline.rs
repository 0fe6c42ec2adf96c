use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_alignment, paragraph_headings, AlignmentReport, HeadingMap, Scope};
use crate::corpus::{Corpus, Token};
use crate::error::{Error, Result};

/// Term-weight vector sorted by term id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
    norm: f64,
}

impl SparseVector {
    pub fn from_weights(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        entries.retain(|e| e.1 != 0.0);
        let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        SparseVector { entries, norm }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// Cosine similarity; zero when either vector is empty.
    pub fn cosine(&self, other: &SparseVector) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += a.1 * b.1;
                    i += 1;
                    j += 1;
                }
            }
        }
        dot / (self.norm * other.norm)
    }
}

/// Concept tf-idf vector of every paragraph of `corpora`, in order. The idf
/// is `ln(P / parDF)` over all paragraphs of all corpora.
pub fn tfidf_concept_vectors(corpora: &[&Corpus]) -> Vec<SparseVector> {
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut par_df: Vec<u32> = Vec::new();
    let mut counts: Vec<Vec<(u32, f64)>> = Vec::new();
    for corpus in corpora {
        for par in corpus.documents.iter().flat_map(|d| &d.paragraphs) {
            let mut tf: HashMap<u32, f64> = HashMap::new();
            for c in par.tokens.iter().filter_map(Token::concept_id) {
                let next = ids.len() as u32;
                let id = *ids.entry(c).or_insert(next);
                if id as usize == par_df.len() {
                    par_df.push(0);
                }
                *tf.entry(id).or_insert(0.0) += 1.0;
            }
            for &id in tf.keys() {
                par_df[id as usize] += 1;
            }
            counts.push(tf.into_iter().collect());
        }
    }
    let p = counts.len() as f64;
    counts
        .into_iter()
        .map(|tf| {
            SparseVector::from_weights(
                tf.into_iter()
                    .map(|(id, n)| (id, n * (p / par_df[id as usize] as f64).ln()))
                    .collect(),
            )
        })
        .collect()
}

/// Greedy one-to-one pairing across two paragraph sets.
///
/// All pairs with similarity strictly above `threshold` are taken in order
/// of decreasing similarity (ties by index) whenever both sides are still
/// free. Returns a cluster label per paragraph, `a` first then `b`, and the
/// accepted pairs. A pair shares the label of its `a` paragraph; every other
/// paragraph is a singleton.
pub fn cluster_pairs<F>(n_a: usize, n_b: usize, sim: F, threshold: f64) -> (Vec<usize>, Vec<(usize, usize, f64)>)
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let mut candidates: Vec<(usize, usize, f64)> = (0..n_a)
        .into_par_iter()
        .flat_map_iter(|i| {
            let sim = &sim;
            (0..n_b).filter_map(move |j| {
                let s = sim(i, j);
                (s > threshold).then_some((i, j, s))
            })
        })
        .collect();
    candidates.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));

    let mut used_a = vec![false; n_a];
    let mut used_b = vec![false; n_b];
    let mut labels: Vec<usize> = (0..n_a + n_b).collect();
    let mut pairs = Vec::new();
    for (i, j, s) in candidates {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        labels[n_a + j] = i;
        pairs.push((i, j, s));
    }
    (labels, pairs)
}

/// Every paragraph in its own cluster.
pub fn singleton_clusters(n: usize) -> Vec<usize> {
    (0..n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    /// Cluster label per paragraph, first corpus then second.
    pub clusters: Vec<usize>,
    /// Accepted pairs as (paragraph in first, paragraph in second, similarity).
    pub pairs: Vec<(usize, usize, f64)>,
    /// Present when at least one paragraph has a heading.
    pub report: Option<AlignmentReport>,
}

fn finish(
    a: &Corpus,
    b: &Corpus,
    clusters: Vec<usize>,
    pairs: Vec<(usize, usize, f64)>,
    headings: Option<&HeadingMap>,
) -> Result<BaselineResult> {
    let mut gold = paragraph_headings(a, headings);
    gold.extend(paragraph_headings(b, headings));
    let report = if gold.iter().any(Option::is_some) {
        Some(evaluate_alignment(&clusters, &gold, Scope::Bilingual)?)
    } else {
        None
    };
    Ok(BaselineResult {
        clusters,
        pairs,
        report,
    })
}

/// Pairs paragraphs of `a` and `b` by cosine over concept tf-idf vectors.
/// Paragraphs without concepts stay singletons.
pub fn tfidf_concept_baseline(
    a: &Corpus,
    b: &Corpus,
    threshold: f64,
    headings: Option<&HeadingMap>,
) -> Result<BaselineResult> {
    let vectors = tfidf_concept_vectors(&[a, b]);
    let (va, vb) = vectors.split_at(a.paragraph_count());
    let (clusters, pairs) = cluster_pairs(va.len(), vb.len(), |i, j| va[i].cosine(&vb[j]), threshold);
    finish(a, b, clusters, pairs, headings)
}

/// Word translation probabilities `p(target | source)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TranslationTable {
    table: HashMap<String, HashMap<String, f64>>,
    entries: usize,
}

impl TranslationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: &str, target: &str, prob: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::Validation(format!(
                "translation probability {prob} for {source} -> {target} outside [0, 1]"
            )));
        }
        let slot = self
            .table
            .entry(source.to_lowercase())
            .or_default()
            .entry(target.to_lowercase())
            .or_insert(f64::NEG_INFINITY);
        if *slot == f64::NEG_INFINITY {
            self.entries += 1;
        }
        *slot = slot.max(prob);
        Ok(())
    }

    /// Reads `source<TAB>target<TAB>prob` lines; `#` lines and blank lines
    /// are skipped. An empty table is an error.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, name: &str) -> Result<Self> {
        let mut out = TranslationTable::new();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [src, tgt, prob] = fields[..] else {
                return Err(Error::parse(name, n + 1, "expected source<TAB>target<TAB>prob"));
            };
            let prob: f64 = prob
                .trim()
                .parse()
                .map_err(|_| Error::parse(name, n + 1, format!("bad probability {prob:?}")))?;
            out.insert(src.trim(), tgt.trim(), prob)
                .map_err(|e| Error::parse(name, n + 1, e.to_string()))?;
        }
        if out.is_empty() {
            return Err(Error::Validation(format!("{name}: translation table is empty")));
        }
        Ok(out)
    }

    pub fn prob(&self, source: &str, target: &str) -> f64 {
        self.table
            .get(source)
            .and_then(|t| t.get(target))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    /// Symmetric similarity of a source and a target paragraph: the mean,
    /// over both sides, of each word's best translation probability into
    /// the other paragraph.
    pub fn similarity(&self, source: &[&str], target: &[&str]) -> f64 {
        if source.is_empty() || target.is_empty() {
            return 0.0;
        }
        let target_set: HashSet<&str> = target.iter().copied().collect();
        let forward: f64 = source
            .iter()
            .map(|u| {
                self.table.get(*u).map_or(0.0, |row| {
                    row.iter()
                        .filter(|(v, _)| target_set.contains(v.as_str()))
                        .map(|(_, &p)| p)
                        .fold(0.0, f64::max)
                })
            })
            .sum();
        let backward: f64 = target
            .iter()
            .map(|v| source.iter().map(|u| self.prob(u, v)).fold(0.0, f64::max))
            .sum();
        0.5 * (forward / source.len() as f64 + backward / target.len() as f64)
    }
}

/// Pairs paragraphs of `a` (source language) and `b` (target language) by
/// translation-table similarity.
pub fn translation_table_baseline(
    a: &Corpus,
    b: &Corpus,
    table: &TranslationTable,
    threshold: f64,
    headings: Option<&HeadingMap>,
) -> Result<BaselineResult> {
    if table.is_empty() {
        return Err(Error::Validation("translation table is empty".into()));
    }
    let words = |c: &'_ Corpus| -> Vec<Vec<String>> {
        c.documents
            .iter()
            .flat_map(|d| &d.paragraphs)
            .map(|p| p.tokens.iter().map(|t| t.surface().to_string()).collect())
            .collect()
    };
    let (wa, wb) = (words(a), words(b));
    let ra: Vec<Vec<&str>> = wa.iter().map(|p| p.iter().map(String::as_str).collect()).collect();
    let rb: Vec<Vec<&str>> = wb.iter().map(|p| p.iter().map(String::as_str).collect()).collect();
    let (clusters, pairs) = cluster_pairs(ra.len(), rb.len(), |i, j| table.similarity(&ra[i], &rb[j]), threshold);
    finish(a, b, clusters, pairs, headings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Paragraph};

    fn corpus(lang: &str, pars: &[(&str, &[&str])]) -> Corpus {
        Corpus::new(vec![Document {
            id: "d".into(),
            lang: lang.into(),
            title: String::new(),
            paragraphs: pars
                .iter()
                .enumerate()
                .map(|(i, (h, toks))| Paragraph {
                    id: format!("p{i}"),
                    heading: (!h.is_empty()).then(|| h.to_string()),
                    tokens: toks.iter().map(|t| Token::from_raw(t).unwrap()).collect(),
                })
                .collect(),
        }])
        .unwrap()
    }

    #[test]
    fn cosine_of_sparse_vectors() {
        let a = SparseVector::from_weights(vec![(0, 1.0), (2, 2.0)]);
        let b = SparseVector::from_weights(vec![(2, 4.0), (0, 2.0)]);
        assert!((a.cosine(&b) - 1.0).abs() < 1e-12);
        let c = SparseVector::from_weights(vec![(1, 3.0)]);
        assert_eq!(a.cosine(&c), 0.0);
        assert_eq!(a.cosine(&SparseVector::default()), 0.0);
    }

    #[test]
    fn identical_concept_paragraphs_pair_up() {
        let a = corpus("en", &[("history", &["c1", "c2", "the"]), ("climate", &["c3", "c9"])]);
        let b = corpus("fr", &[("climate", &["c3", "le", "c9"]), ("history", &["c2", "c1"])]);
        let r = tfidf_concept_baseline(&a, &b, 0.99, None).unwrap();
        let pairs: Vec<_> = r.pairs.iter().map(|p| (p.0, p.1)).collect();
        assert_eq!(pairs.len(), 2);
        assert!(pairs.contains(&(0, 1)) && pairs.contains(&(1, 0)));
        let report = r.report.unwrap();
        assert_eq!((report.precision, report.recall), (1.0, 1.0));
    }

    #[test]
    fn disjoint_concepts_stay_singletons() {
        let a = corpus("en", &[("", &["c1", "c2"]), ("", &["word"])]);
        let b = corpus("fr", &[("", &["c3"]), ("", &["mot"])]);
        let r = tfidf_concept_baseline(&a, &b, 0.0, None).unwrap();
        assert!(r.pairs.is_empty());
        assert_eq!(r.clusters, vec![0, 1, 2, 3]);
        assert!(r.report.is_none());
    }

    #[test]
    fn greedy_pairing_is_one_to_one() {
        let sims = [[0.9, 0.8], [0.85, 0.1]];
        let (labels, pairs) = cluster_pairs(2, 2, |i, j| sims[i][j], 0.5);
        // (0,0) first, then (1,0) is blocked, (0,1) blocked
        assert_eq!(pairs.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(labels, vec![0, 1, 0, 3]);
    }

    #[test]
    fn translation_similarity_bounds() {
        let mut identity = TranslationTable::new();
        for w in ["the", "city", "river"] {
            identity.insert(w, w, 1.0).unwrap();
        }
        let p = ["the", "city", "river", "city"];
        assert!((identity.similarity(&p, &p) - 1.0).abs() < 1e-15);
        assert_eq!(identity.similarity(&["the"], &["ville"]), 0.0);

        let t = TranslationTable::from_reader("city\tville\t0.8\nriver\tfleuve\t0.6\n".as_bytes(), "t").unwrap();
        // forward (0.8 + 0.6)/2, backward (0.8 + 0.6 + 0)/3
        let s = t.similarity(&["city", "river"], &["ville", "fleuve", "le"]);
        assert!((s - 0.5 * (0.7 + 1.4 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_translation_table_is_rejected() {
        assert!(TranslationTable::from_reader("# nothing\n".as_bytes(), "t").is_err());
        let a = corpus("en", &[("", &["x"])]);
        assert!(translation_table_baseline(&a, &a, &TranslationTable::new(), 0.5, None).is_err());
        assert!(TranslationTable::from_reader("a\tb\n".as_bytes(), "t").is_err());
        assert!(TranslationTable::from_reader("a\tb\t1.5\n".as_bytes(), "t").is_err());
    }

    #[test]
    fn translation_baseline_pairs_translations() {
        let a = corpus("en", &[("history", &["old", "town"]), ("economy", &["port", "trade"])]);
        let b = corpus("fr", &[("economy", &["port", "commerce"]), ("history", &["vieille", "ville"])]);
        let t = TranslationTable::from_reader(
            "old\tvieille\t0.9\ntown\tville\t0.7\nport\tport\t0.95\ntrade\tcommerce\t0.6\n".as_bytes(),
            "t",
        )
        .unwrap();
        let r = translation_table_baseline(&a, &b, &t, 0.3, None).unwrap();
        assert_eq!(r.clusters, vec![0, 1, 1, 0]);
        assert_eq!(r.report.unwrap().f1, 1.0);
    }
}
