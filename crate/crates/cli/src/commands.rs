use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::json;

use themealign::align::{
    align_documents, doc_specific_vectors, document_vectors, evaluate_alignment, gold_by_id, paragraph_headings,
    tfidf_concept_baseline, translation_table_baseline, AlignmentReport, DocAlignMode, HeadingMap, Scope as EvalScope,
    TranslationTable, CSV_HEADER,
};
use themealign::concepts::{annotate_corpus, AnnotateOptions, AnnotationScope, ConceptLexicon, RelationGraph, SolverMode};
use themealign::corpus::Corpus;
use themealign::model::{paragraph_topics, read_decoded, train as train_model, write_decoded, TrainedModel};

use crate::config::Settings;
use crate::{DocMode, Format, Method, Scope, Solver};

/// Writes to `out`, or to standard output when no path is given.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    emit(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// One corpus, or both concatenated.
fn load_corpora(first: &Path, second: Option<&Path>) -> Result<Corpus> {
    let a = Corpus::load(first)?;
    match second {
        Some(p) => Ok(a.concat(&Corpus::load(p)?)?),
        None => Ok(a),
    }
}

fn load_headings(path: Option<&Path>) -> Result<Option<HeadingMap>> {
    path.map(HeadingMap::load).transpose().map_err(Into::into)
}

pub fn annotate(
    corpus: &Path,
    lexicon: &Path,
    relations: Option<&Path>,
    scope: Scope,
    solver: Solver,
    out: Option<&Path>,
) -> Result<()> {
    let corpus = Corpus::load(corpus)?;
    let lexicon = ConceptLexicon::load(lexicon)?;
    let graph = relations.map(RelationGraph::load).transpose()?.unwrap_or_default();
    let options = AnnotateOptions {
        scope: match scope {
            Scope::Paragraph => AnnotationScope::Paragraph,
            Scope::Document => AnnotationScope::Document,
        },
        mode: match solver {
            Solver::Exact => SolverMode::Exact,
            Solver::Greedy => SolverMode::Greedy,
        },
        ..Default::default()
    };
    let annotated = annotate_corpus(&corpus, &lexicon, &graph, &options)?;
    let stats = annotated.stats();
    eprintln!(
        "annotated {} documents: {} concept types, {} word types",
        stats.documents, stats.concept_types, stats.word_types
    );
    emit(out, |w| Ok(annotated.to_writer(w)?))
}

pub fn train(
    corpus: &Path,
    corpus2: Option<&Path>,
    relations: Option<&Path>,
    settings: &Settings,
    out: &Path,
) -> Result<()> {
    let corpus = load_corpora(corpus, corpus2)?;
    let graph = relations.map(RelationGraph::load).transpose()?;
    let start = Instant::now();
    let model = train_model(&corpus, graph, &settings.train)?;
    model.save(out)?;
    let th = model.theme_hyper();
    eprintln!(
        "trained K={} on {} documents, {} paragraphs, W={} in {:.1?} (seed {}, {} sweeps, config {})",
        th.k,
        corpus.documents.len(),
        corpus.paragraph_count(),
        model.vocabulary().len(),
        start.elapsed(),
        settings.train.seed,
        th.iterations,
        &model.config_hash()[..12],
    );
    for d in &model.diagnostics().documents_without_theme_tokens {
        eprintln!("warning: document {d} has no theme-specific tokens");
    }
    Ok(())
}

pub fn decode(model: &Path, corpus: &Path, corpus2: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let model = TrainedModel::load(model)?;
    let corpus = load_corpora(corpus, corpus2)?;
    let decoded = model.decode(&corpus)?;
    eprintln!("decoded {} documents", decoded.len());
    emit(out, |w| Ok(write_decoded(w, &decoded)?))
}

fn write_report(report: &AlignmentReport, k: Option<usize>, format: Format, out: Option<&Path>) -> Result<()> {
    eprintln!(
        "P={:.4} R={:.4} F={:.4} over {} paragraphs ({} without heading)",
        report.precision, report.recall, report.f1, report.evaluated, report.excluded
    );
    match format {
        Format::Csv => emit(out, |w| {
            writeln!(w, "{CSV_HEADER}")?;
            w.write_all(report.csv_rows(k).as_bytes())?;
            Ok(())
        }),
        Format::Json => {
            let mut value = serde_json::to_value(report)?;
            value["k"] = json!(k);
            emit_json(out, &value)
        }
    }
}

pub fn eval(
    corpus: &Path,
    corpus2: Option<&Path>,
    assignments: &Path,
    headings: Option<&Path>,
    k: Option<usize>,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let scope = if corpus2.is_some() { EvalScope::Bilingual } else { EvalScope::Mono };
    let corpus = load_corpora(corpus, corpus2)?;
    let file = File::open(assignments).with_context(|| format!("opening {}", assignments.display()))?;
    let decoded = read_decoded(file, &assignments.display().to_string())?;
    let topics = paragraph_topics(&corpus, &decoded)?;
    let map = load_headings(headings)?;
    let report = evaluate_alignment(&topics, &paragraph_headings(&corpus, map.as_ref()), scope)?;
    write_report(&report, k, format, out)
}

#[allow(clippy::too_many_arguments)]
pub fn baseline(
    corpus: &Path,
    corpus2: &Path,
    method: Method,
    ttable: Option<&Path>,
    threshold: f64,
    headings: Option<&Path>,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let a = Corpus::load(corpus)?;
    let b = Corpus::load(corpus2)?;
    let map = load_headings(headings)?;
    let result = match method {
        Method::Concepts => tfidf_concept_baseline(&a, &b, threshold, map.as_ref())?,
        Method::Translation => {
            let Some(path) = ttable else {
                bail!("--method translation needs --ttable");
            };
            translation_table_baseline(&a, &b, &TranslationTable::load(path)?, threshold, map.as_ref())?
        }
    };
    eprintln!("{} cross-language pairs above {threshold}", result.pairs.len());
    match (format, &result.report) {
        (Format::Csv, Some(report)) => write_report(report, None, format, out),
        (Format::Csv, None) => bail!("no paragraph has a heading; use --format json for the clusters"),
        (Format::Json, _) => emit_json(out, &serde_json::to_value(&result)?),
    }
}

pub fn stats(corpus: &Path, corpus2: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let mut entries = vec![json!({ "file": corpus.display().to_string(), "stats": Corpus::load(corpus)?.stats() })];
    if let Some(p) = corpus2 {
        entries.push(json!({ "file": p.display().to_string(), "stats": Corpus::load(p)?.stats() }));
    }
    emit_json(out, &json!(entries))
}

pub fn lm(model: &Path, top_n: usize, out: Option<&Path>) -> Result<()> {
    let model = TrainedModel::load(model)?;
    emit_json(out, &serde_json::to_value(model.language_models(top_n))?)
}

pub fn align_docs(
    corpus: &Path,
    corpus2: &Path,
    mode: DocMode,
    model: Option<&Path>,
    top_n: usize,
    out: Option<&Path>,
) -> Result<()> {
    let a = Corpus::load(corpus)?;
    let b = Corpus::load(corpus2)?;
    let (va, vb) = match mode {
        DocMode::Words | DocMode::Concepts => {
            let m = if matches!(mode, DocMode::Words) { DocAlignMode::TfIdfWords } else { DocAlignMode::TfIdfConcepts };
            let mut v = document_vectors(&[&a, &b], m, top_n)?;
            let vb = v.split_off(a.documents.len());
            (v, vb)
        }
        DocMode::Topic => {
            let Some(path) = model else {
                bail!("--mode topic needs --model");
            };
            let model = TrainedModel::load(path)?;
            let idx = model.indexed_corpus();
            let all = doc_specific_vectors(model.wtopic_state(), idx, top_n);
            let position: HashMap<(&str, &str), usize> = idx
                .documents
                .iter()
                .enumerate()
                .map(|(i, d)| ((d.lang.as_str(), d.id.as_str()), i))
                .collect();
            let pick = |c: &Corpus| {
                c.documents
                    .iter()
                    .map(|d| {
                        position
                            .get(&(d.lang.as_str(), d.id.as_str()))
                            .map(|&i| all[i].clone())
                            .with_context(|| format!("document {}/{} is not in the model", d.lang, d.id))
                    })
                    .collect::<Result<Vec<_>>>()
            };
            (pick(&a)?, pick(&b)?)
        }
    };
    let alignment = align_documents(&va, &vb);
    let gold = gold_by_id(&a, &b);
    let accuracy = if gold.is_empty() { None } else { Some(alignment.accuracy(&gold)?) };
    if let Some(acc) = accuracy {
        eprintln!("{} of {} same-id pairs recovered ({:.1}%)", (acc * gold.len() as f64).round(), gold.len(), acc * 100.0);
    }
    let pairs: Vec<_> = alignment
        .pairs
        .iter()
        .map(|&(i, j, sim)| json!({ "a": a.documents[i].id, "b": b.documents[j].id, "cosine": sim }))
        .collect();
    let ids = |c: &Corpus, v: &[usize]| v.iter().map(|&i| c.documents[i].id.clone()).collect::<Vec<_>>();
    emit_json(
        out,
        &json!({
            "pairs": pairs,
            "unpaired_a": ids(&a, &alignment.unpaired_a),
            "unpaired_b": ids(&b, &alignment.unpaired_b),
            "accuracy": accuracy,
        }),
    )
}
