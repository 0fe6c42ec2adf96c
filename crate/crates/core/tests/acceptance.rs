//! Acceptance checks, one line per criterion. Exits non-zero if any of the
//! binding criteria fails. The dataset reproduction runs only when
//! `THEMEALIGN_CITIES_DIR` points at a prepared directory.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use themealign::align::{
    align_documents, doc_specific_vectors, evaluate_alignment, f1, gold_by_id, paragraph_headings,
    singleton_clusters, tfidf_concept_baseline, HeadingMap, Scope, DEFAULT_TOP_N,
};
use themealign::concepts::{Candidate, DisambiguationInstance, RelationGraph, SolverMode};
use themealign::corpus::{Corpus, FrequencyTables, IndexedCorpus, Vocabulary};
use themealign::lda2::{WTopicHyper, WTopicSampler};
use themealign::model::{paragraph_topics, train, write_decoded, TrainOptions};
use themealign::synthetic::{generate, SyntheticConfig};
use themealign::theme::{
    concept_boost, sequence_log_prob, transition_probability, viterbi, ThemeHyper, ThemeSampler, ThemeState,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

// ---------------------------------------------------------------- 1

fn random_log_dist<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| (x / s).ln()).collect()
}

fn enumerate_best(init: &[f64], trans: &[Vec<f64>], em: &[Vec<f64>]) -> f64 {
    let (k, steps) = (init.len(), em.len());
    let total = k.pow(steps as u32);
    let mut best = f64::NEG_INFINITY;
    for code in 0..total {
        let mut c = code;
        let path: Vec<usize> = (0..steps)
            .map(|_| {
                let s = c % k;
                c /= k;
                s
            })
            .collect();
        let mut lp = init[path[0]] + em[0][path[0]];
        for t in 1..steps {
            lp += trans[path[t - 1]][path[t]] + em[t][path[t]];
        }
        best = best.max(lp);
    }
    best
}

fn viterbi_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for n in 0..100 {
        let k = rng.random_range(1..=4);
        let steps = rng.random_range(1..=8);
        let init = random_log_dist(&mut rng, k);
        let trans: Vec<Vec<f64>> = (0..k).map(|_| random_log_dist(&mut rng, k)).collect();
        let em: Vec<Vec<f64>> = (0..steps)
            .map(|_| (0..k).map(|_| rng.random_range(0.001f64..1.0).ln()).collect())
            .collect();
        let (path, score) = viterbi(&init, &trans, &em);
        let oracle = enumerate_best(&init, &trans, &em);
        let own = sequence_log_prob(&path, &init, &trans, &em);
        let gap = (score - oracle).abs().max((own - oracle).abs());
        worst = worst.max(gap);
        check(gap <= 1e-9, || format!("instance {n}: viterbi {score} vs enumeration {oracle}"))?;
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("100 instances, max gap {worst:.1e}, {took:.2?}"))
}

// ---------------------------------------------------------------- 2

fn clique_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut greedy_below = 0;
    for n in 0..200 {
        let parts = rng.random_range(1..=6);
        let candidates: Vec<Vec<Candidate>> = (0..parts)
            .map(|p| {
                let m = rng.random_range(1..=4);
                (0..m)
                    .map(|c| Candidate::new(format!("c{}", 100 * (p + 1) + c), rng.random_range(0.0..1.0 / m as f64)))
                    .collect()
            })
            .collect();
        let mut table: HashMap<(String, String), f64> = HashMap::new();
        for (p, a) in candidates.iter().enumerate() {
            for b in &candidates[p + 1..] {
                for u in a {
                    for v in b {
                        let w: f64 = rng.random_range(0.0..1.0);
                        table.insert((u.concept.clone(), v.concept.clone()), w);
                        table.insert((v.concept.clone(), u.concept.clone()), w);
                    }
                }
            }
        }
        let weight = |u: &Candidate, v: &Candidate| table[&(u.concept.clone(), v.concept.clone())];
        let inst = DisambiguationInstance::with_weights(candidates.clone(), weight);

        // enumerate every assignment straight from the weight table
        let sizes: Vec<usize> = candidates.iter().map(Vec::len).collect();
        let mut idx = vec![0usize; parts];
        let mut best = f64::NEG_INFINITY;
        loop {
            let chosen: Vec<&Candidate> = (0..parts).map(|p| &inst.candidates(p)[idx[p]]).collect();
            let mut total = 0.0;
            for p in 0..parts {
                for q in p + 1..parts {
                    total += weight(chosen[p], chosen[q]);
                }
            }
            best = best.max(total);
            let mut pos = 0;
            while pos < parts {
                idx[pos] += 1;
                if idx[pos] < sizes[pos] {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == parts {
                break;
            }
        }

        let exact = inst.solve(SolverMode::Exact, 1e6).map_err(|e| e.to_string())?;
        let greedy = inst.solve(SolverMode::Greedy, 1e6).map_err(|e| e.to_string())?;
        check(exact.objective == best, || {
            format!("instance {n}: exact {} vs enumeration {best}", exact.objective)
        })?;
        check(greedy.objective <= exact.objective, || {
            format!("instance {n}: greedy {} above exact {}", greedy.objective, exact.objective)
        })?;
        if greedy.objective < exact.objective {
            greedy_below += 1;
        }
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("200 instances, greedy strictly below exact on {greedy_below}, {took:.2?}"))
}

// ---------------------------------------------------------------- 3

fn brute_force_metrics(topics: &[usize], heads: &[usize]) -> (f64, f64) {
    let p = topics.len();
    let hs: Vec<usize> = {
        let mut v = heads.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let ks: Vec<usize> = {
        let mut v = topics.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let overlap = |h: usize, k: usize| (0..p).filter(|&i| heads[i] == h && topics[i] == k).count();
    let rec: usize = hs.iter().map(|&h| ks.iter().map(|&k| overlap(h, k)).max().unwrap()).sum();
    let prec: usize = ks.iter().map(|&k| hs.iter().map(|&h| overlap(h, k)).max().unwrap()).sum();
    (prec as f64 / p as f64, rec as f64 / p as f64)
}

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for n in 0..100 {
        let p = rng.random_range(1..=50);
        let nk = rng.random_range(1..=10);
        let nh = rng.random_range(1..=8);
        let singleton = n % 5 == 0;
        let topics: Vec<usize> = if singleton {
            (0..p).collect()
        } else {
            (0..p).map(|_| rng.random_range(0..nk)).collect()
        };
        let heads: Vec<usize> = (0..p).map(|_| rng.random_range(0..nh)).collect();
        let labels: Vec<Option<String>> = heads.iter().map(|h| Some(format!("h{h}"))).collect();
        let r = evaluate_alignment(&topics, &labels, Scope::Mono).map_err(|e| e.to_string())?;
        let (prec, rec) = brute_force_metrics(&topics, &heads);
        check(r.precision == prec && r.recall == rec, || {
            format!("config {n}: got P={} R={}, oracle P={prec} R={rec}", r.precision, r.recall)
        })?;
        if singleton {
            check(r.precision == 1.0, || format!("config {n}: singleton precision {}", r.precision))?;
        }
    }
    Ok("100 configurations (20 singleton) match brute-force overlap counts".into())
}

// ---------------------------------------------------------------- 4

fn gibbs_integrity() -> Outcome {
    let syn = generate(&SyntheticConfig { seed: 404, ..Default::default() }).map_err(|e| e.to_string())?;
    let idx = IndexedCorpus::new(&syn.corpus);
    let tables = FrequencyTables::build(&idx);
    let w = idx.vocab.len();
    let wh = WTopicHyper {
        iterations: 5,
        burn_in: 0,
        ..WTopicHyper::for_corpus(w, idx.paragraph_count(), 4)
    };
    let mut ws = WTopicSampler::new(&idx, &tables, wh).map_err(|e| e.to_string())?;
    let mut checked = 0usize;
    for (d, doc) in idx.documents.iter().enumerate() {
        for (t, par) in doc.paragraphs.iter().enumerate() {
            for i in 0..par.len() {
                let g = ws.bias(d, t, i);
                check((g.iter().sum::<f64>() - 1.0).abs() <= 1e-12, || format!("g triple {g:?} at {d}/{t}/{i}"))?;
            }
        }
    }
    for sweep in 0..5 {
        ws.sweep();
        check(ws.state().is_consistent(&idx), || format!("w-topic tables drift after sweep {sweep}"))?;
        for (d, doc) in idx.documents.iter().enumerate() {
            for (t, par) in doc.paragraphs.iter().enumerate() {
                for i in 0..par.len() {
                    let p = ws.conditional(d, t, i);
                    checked += 1;
                    check((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12, || format!("w-topic conditional {p:?}"))?;
                }
            }
        }
    }
    let state = ws.into_state();
    let tokens = state.theme_tokens(&idx);
    let th = ThemeHyper {
        iterations: 5,
        burn_in: 0,
        ..ThemeHyper::for_corpus(w, 5, 5)
    };
    let mut ts = ThemeSampler::new(&tokens, w, th, None).map_err(|e| e.to_string())?;
    check(ts.state().is_consistent(&tokens), || "theme tables inconsistent at start".into())?;
    for sweep in 0..5 {
        ts.sweep();
        check(ts.state().is_consistent(&tokens), || format!("theme tables drift after sweep {sweep}"))?;
        for (d, doc) in tokens.iter().enumerate() {
            for t in 0..doc.len() {
                let p = ts.conditional(d, t);
                checked += 1;
                check((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12, || format!("theme conditional {p:?}"))?;
            }
        }
    }
    Ok(format!("{} documents, 5 + 5 sweeps, {checked} conditionals checked", idx.documents.len()))
}

// ---------------------------------------------------------------- 5

fn synthetic_f(cfg: SyntheticConfig, kappa: f64) -> Result<(f64, f64), String> {
    let seed = cfg.seed;
    let syn = generate(&cfg).map_err(|e| e.to_string())?;
    let opts = TrainOptions {
        k: 5,
        seed,
        kappa,
        ..Default::default()
    };
    let model = train(&syn.corpus, None, &opts).map_err(|e| e.to_string())?;
    let decoded = model.training_assignments();
    let topics = paragraph_topics(&syn.corpus, &decoded).map_err(|e| e.to_string())?;
    let r = evaluate_alignment(&topics, &paragraph_headings(&syn.corpus, None), Scope::Mono)
        .map_err(|e| e.to_string())?;
    Ok((r.f1, model.theme_state().mean_switches()))
}

fn synthetic_recovery() -> Outcome {
    let start = Instant::now();
    let mut scores = Vec::new();
    for seed in [0u64, 1, 2] {
        scores.push(synthetic_f(SyntheticConfig { seed, ..Default::default() }, 1000.0)?.0);
    }
    let took = within(Duration::from_secs(120), start)?;
    let passing = scores.iter().filter(|&&f| f >= 0.75).count();
    let shown: Vec<String> = scores.iter().map(|f| format!("{f:.3}")).collect();
    check(passing >= 2, || format!("F = [{}], need >= 0.75 on 2 of 3", shown.join(", ")))?;
    Ok(format!("F = [{}], {took:.2?}", shown.join(", ")))
}

// ---------------------------------------------------------------- 6

fn stickiness() -> Outcome {
    // short paragraphs leave the emissions weak, so the transition prior
    // shows; single chains are noisy, so switches are pooled over seeds
    let mut switches = vec![0.0; 3];
    for seed in 0..6u64 {
        let weak = SyntheticConfig {
            seed,
            words_per_paragraph: 4,
            ..Default::default()
        };
        for (slot, kappa) in [1000.0, 10.0, 0.0].into_iter().enumerate() {
            switches[slot] += synthetic_f(weak.clone(), kappa)?.1 / 6.0;
        }
    }
    check(switches[0] <= switches[1] && switches[1] <= switches[2], || {
        format!("mean switches for kappa 1000/10/0 = {switches:?}")
    })?;

    let state = ThemeState::from_assignments(&[vec![vec![], vec![], vec![], vec![]]], 3, 1, vec![vec![0, 0, 1, 2]])
        .map_err(|e| e.to_string())?;
    let mut last = f64::NEG_INFINITY;
    for kappa in [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0] {
        let h = ThemeHyper { kappa, ..ThemeHyper::for_corpus(1, 3, 0) };
        let p = transition_probability(0, 0, &state, &h);
        check(p > last, || format!("self transition {p} not above {last} at kappa {kappa}"))?;
        last = p;
    }
    Ok(format!(
        "mean switches {:.2} <= {:.2} <= {:.2}; self transition increasing in kappa",
        switches[0], switches[1], switches[2]
    ))
}

// ---------------------------------------------------------------- 7

fn determinism() -> Outcome {
    let syn = generate(&SyntheticConfig { seed: 77, ..Default::default() }).map_err(|e| e.to_string())?;
    let graph = RelationGraph::from_reader("c1 c2 0.4\n".as_bytes(), "graph").map_err(|e| e.to_string())?;
    let opts = TrainOptions {
        k: 5,
        seed: 77,
        iterations: 50,
        burn_in: 10,
        ..Default::default()
    };
    let dir = std::env::temp_dir().join(format!("themealign-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run in 0..2 {
        let model = train(&syn.corpus, Some(graph.clone()), &opts).map_err(|e| e.to_string())?;
        let model_path = dir.join(format!("model{run}.json"));
        model.save(&model_path).map_err(|e| e.to_string())?;
        let decoded = model.decode(&syn.corpus).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_decoded(&mut buf, &decoded).map_err(|e| e.to_string())?;
        let assign_path = dir.join(format!("assign{run}.jsonl"));
        std::fs::write(&assign_path, &buf).map_err(|e| e.to_string())?;
        files.push((read(&model_path)?, read(&assign_path)?));
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(files[0].0 == files[1].0, || "model files differ".into())?;
    check(files[0].1 == files[1].1, || "assignment files differ".into())?;
    Ok(format!("model files of {} bytes identical, assignment files identical", files[0].0.len()))
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------- 8

fn boost_property() -> Outcome {
    // two concept sets: {c1, c2, c3} and {c4, c5}
    let vocab = Vocabulary::from_words(["c1", "c2", "c3", "c4", "c5"]);
    let graph = RelationGraph::from_reader("c1 c2 0.9\nc1 c3 0.7\nc2 c3 0.5\nc4 c5 0.8\n".as_bytes(), "graph")
        .map_err(|e| e.to_string())?;
    // c2 and c3 only in paragraphs of topic 1, c4 and c5 in topic 0
    let tokens = vec![vec![vec![1, 2, 2], vec![3, 4], vec![1]]];
    let state = ThemeState::from_assignments(&tokens, 3, 5, vec![vec![1, 0, 1]]).map_err(|e| e.to_string())?;
    for j in 0..3 {
        let b = concept_boost("c1", j, &state, &graph, &vocab);
        let want = if j == 1 { 1.0 } else { 0.0 };
        check(b == want, || format!("boost(c1, {j}) = {b}, expected {want}"))?;
    }
    let b = concept_boost("c4", 0, &state, &graph, &vocab);
    check(b == 1.0, || format!("boost(c4, 0) = {b}"))?;
    let b = concept_boost("c4", 2, &state, &graph, &vocab);
    check(b == 0.0, || format!("boost(c4, 2) = {b}"))?;
    Ok("boost is 1 for the neighbors' topic and 0 for every other topic".into())
}

// ---------------------------------------------------------------- 9

/// Expects `en.jsonl` and `fr.jsonl` (concept-annotated, with headings),
/// optionally `relations.txt` and `headings.tsv` (French to English).
fn dataset_reproduction(dir: &Path) -> Outcome {
    let load = |name: &str| Corpus::load(dir.join(name)).map_err(|e| e.to_string());
    let (en, fr) = (load("en.jsonl")?, load("fr.jsonl")?);
    let graph = match dir.join("relations.txt") {
        p if p.exists() => Some(RelationGraph::load(p).map_err(|e| e.to_string())?),
        _ => None,
    };
    let map = match dir.join("headings.tsv") {
        p if p.exists() => Some(HeadingMap::load(p).map_err(|e| e.to_string())?),
        _ => None,
    };
    let both = en.concat(&fr).map_err(|e| e.to_string())?;
    let model = train(&both, graph, &TrainOptions { k: 10, ..Default::default() }).map_err(|e| e.to_string())?;
    let topics = paragraph_topics(&both, &model.training_assignments()).map_err(|e| e.to_string())?;
    let gold = paragraph_headings(&both, map.as_ref());
    let model_f = evaluate_alignment(&topics, &gold, Scope::Bilingual).map_err(|e| e.to_string())?.f1 * 100.0;
    let base = tfidf_concept_baseline(&en, &fr, 0.5, map.as_ref()).map_err(|e| e.to_string())?;
    let base_f = base.report.map(|r| r.f1 * 100.0).unwrap_or(0.0);
    let single = evaluate_alignment(&singleton_clusters(gold.len()), &gold, Scope::Bilingual)
        .map_err(|e| e.to_string())?;
    let single_f = f1(single.precision, single.recall) * 100.0;
    let vectors = doc_specific_vectors(model.wtopic_state(), model.indexed_corpus(), DEFAULT_TOP_N);
    let (va, vb) = vectors.split_at(en.documents.len());
    let acc = align_documents(va, vb).accuracy(&gold_by_id(&en, &fr)).map_err(|e| e.to_string())? * 100.0;
    let summary = format!("model F {model_f:.2}, concept baseline F {base_f:.2}, singletons F {single_f:.2}, doc alignment {acc:.0}%");
    check((model_f - 55.65).abs() <= 5.0, || format!("{summary}: model F outside 55.65 +- 5"))?;
    check((base_f - 47.10).abs() <= 5.0, || format!("{summary}: baseline F outside 47.10 +- 5"))?;
    check((single_f - 35.13).abs() <= 1.0, || format!("{summary}: singleton F outside 35.13 +- 1"))?;
    check(acc == 100.0, || format!("{summary}: document alignment below 100%"))?;
    Ok(summary)
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("viterbi matches exhaustive enumeration", viterbi_oracle),
        ("exact clique solver matches enumeration, greedy below", clique_oracle),
        ("precision and recall match brute-force overlap", metrics_oracle),
        ("sampler count tables and conditionals stay consistent", gibbs_integrity),
        ("synthetic segmentation recovery", synthetic_recovery),
        ("stickiness orders topic switching", stickiness),
        ("identical seeds give identical files", determinism),
        ("concept boost extremes", boost_property),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({why})", n + 1);
            }
        }
    }
    match std::env::var_os("THEMEALIGN_CITIES_DIR") {
        Some(dir) => match dataset_reproduction(Path::new(&dir)) {
            Ok(detail) => println!("criterion 9: PASS  dataset reproduction ({detail})"),
            Err(why) => println!("criterion 9: FAIL  dataset reproduction ({why}); optional, not counted"),
        },
        None => println!("criterion 9: SKIP  dataset reproduction (THEMEALIGN_CITIES_DIR not set)"),
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
