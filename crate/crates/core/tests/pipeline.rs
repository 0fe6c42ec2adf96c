//! Bilingual run on a synthetic corpus and its "translation": every French
//! word is the English word with a `_fr` suffix, and the lexicon maps both
//! forms of theme and document words onto shared concepts.

use themealign::align::{
    align_documents, document_vectors, evaluate_alignment, gold_by_id, paragraph_headings,
    tfidf_concept_baseline, DocAlignMode, Scope, DEFAULT_TOP_N,
};
use themealign::concepts::{annotate_corpus, AnnotateOptions, ConceptLexicon, RelationGraph};
use themealign::corpus::{Corpus, Token};
use themealign::model::{paragraph_topics, train, TrainOptions};
use themealign::synthetic::{generate, SyntheticConfig};

fn translate(c: &Corpus) -> Corpus {
    let mut fr = c.clone();
    for doc in &mut fr.documents {
        doc.lang = "fr".into();
        for p in &mut doc.paragraphs {
            for t in &mut p.tokens {
                *t = Token::Word(format!("{}_fr", t.surface()));
            }
        }
    }
    fr
}

fn lexicon(c: &Corpus) -> ConceptLexicon {
    let mut words: Vec<&str> = c
        .documents
        .iter()
        .flat_map(|d| &d.paragraphs)
        .flat_map(|p| &p.tokens)
        .map(Token::surface)
        .filter(|w| !w.starts_with("bg"))
        .collect();
    words.sort_unstable();
    words.dedup();
    let mut lex = ConceptLexicon::new();
    for (i, w) in words.iter().enumerate() {
        let concept = format!("c{}", i + 1);
        lex.insert(w, &concept, 1.0).unwrap();
        lex.insert(&format!("{w}_fr"), &concept, 1.0).unwrap();
    }
    lex
}

fn bilingual() -> (Corpus, Corpus) {
    let en = generate(&SyntheticConfig { seed: 11, documents: 10, ..Default::default() }).unwrap().corpus;
    let fr = translate(&en);
    let lex = lexicon(&en);
    let graph = RelationGraph::new();
    let opts = AnnotateOptions::default();
    (
        annotate_corpus(&en, &lex, &graph, &opts).unwrap(),
        annotate_corpus(&fr, &lex, &graph, &opts).unwrap(),
    )
}

#[test]
fn annotation_turns_shared_words_into_shared_concepts() {
    let (en, fr) = bilingual();
    for (a, b) in en.documents.iter().zip(&fr.documents) {
        for (p, q) in a.paragraphs.iter().zip(&b.paragraphs) {
            for (s, t) in p.tokens.iter().zip(&q.tokens) {
                match s {
                    Token::Concept(_) => assert_eq!(s, t),
                    Token::Word(w) => {
                        assert!(w.starts_with("bg"));
                        assert_eq!(t.surface(), format!("{w}_fr"));
                    }
                }
            }
        }
    }
}

#[test]
fn bilingual_themes_align() {
    let (en, fr) = bilingual();
    let both = en.concat(&fr).unwrap();
    let model = train(&both, None, &TrainOptions { k: 5, seed: 5, ..Default::default() }).unwrap();
    let topics = paragraph_topics(&both, &model.training_assignments()).unwrap();
    let report = evaluate_alignment(&topics, &paragraph_headings(&both, None), Scope::Bilingual).unwrap();
    assert!(report.f1 >= 0.75, "{report:?}");

    // decoding the corpus again reproduces the stored assignment
    assert_eq!(model.decode(&both).unwrap(), model.training_assignments());
}

#[test]
fn baseline_and_document_alignment_on_translations() {
    let (en, fr) = bilingual();
    let base = tfidf_concept_baseline(&en, &fr, 0.5, None).unwrap();
    let report = base.report.unwrap();
    assert!(report.evaluated == en.paragraph_count() * 2);
    // every paragraph pairs with its own translation
    assert_eq!(base.pairs.len(), en.paragraph_count());
    assert!(base.pairs.iter().all(|&(i, j, _)| i == j));

    let v = document_vectors(&[&en, &fr], DocAlignMode::TfIdfConcepts, DEFAULT_TOP_N).unwrap();
    let (va, vb) = v.split_at(en.documents.len());
    let acc = align_documents(va, vb).accuracy(&gold_by_id(&en, &fr)).unwrap();
    assert_eq!(acc, 1.0);
}
