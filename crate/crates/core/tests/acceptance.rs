//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::VecDeque;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forcegraph::config::{RunConfig, SplitPart};
use forcegraph::corpus::{
    load_corpus, load_document, parse_brat, serialize_brat, EntitySpan, EntityType,
};
use forcegraph::depgraph::{span_path, DepTree};
use forcegraph::eval::{bench_pipeline, PrfRow};
use forcegraph::iob::{iob_to_spans, spans_to_iob, IobTag};
use forcegraph::ner::viterbi;
use forcegraph::pipeline::{load_relnet, load_tagger, run_evaluate, run_train, TrainTarget};
use forcegraph::reference::{NER_TABLE, RE_TABLE};
use forcegraph::relext::{extract_document, MissingParse, Strategy};
use forcegraph::relnet::{
    build_vocab, Activation, OutputMode, PatternVocab, RelCandidateFeatures, RelNetConfig,
    RelNetModel, MAX_PERSONS,
};
use forcegraph::tokenize::tokenize;

/// Printed precision/recall/F1 are rounded to three places.
const CELL_TOLERANCE: f64 = 0.005;
const METRIC_BUDGET: Duration = Duration::from_secs(1);
const PATH_BUDGET: Duration = Duration::from_secs(10);
const PIPELINE_BUDGET: Duration = Duration::from_secs(300);
const GRAD_TOLERANCE: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const SDP_SECONDS_PER_LINE: f64 = 0.1;
const NN_SECONDS_PER_LINE: f64 = 0.5;

type Outcome = Result<String, String>;
type Criterion = Box<dyn Fn(&Path) -> Outcome>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let scratch = tempfile::tempdir().expect("scratch dir");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 metric reproduction", Box::new(|_| metric_reproduction())),
        ("2 format fidelity", Box::new(format_fidelity)),
        ("3 IOB fidelity", Box::new(|_| iob_fidelity())),
        ("4 path oracle", Box::new(|_| path_oracle())),
        ("5 decoder oracle", Box::new(|_| decoder_oracle())),
        ("6 gradient check", Box::new(|_| gradient_check())),
        ("7 mechanism fixtures", Box::new(mechanism_fixtures)),
        ("8 end-to-end pipeline", Box::new(end_to_end)),
        ("9 throughput", Box::new(throughput)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let t0 = Instant::now();
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(scratch.path())))
                .unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn metric_reproduction() -> Outcome {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for &(name, tp, fp, fn_, p, r, f) in NER_TABLE.iter().chain(RE_TABLE.iter()) {
        let row = PrfRow::from_counts(name, tp, fp, fn_);
        for (got, printed) in [(row.precision, p), (row.recall, r), (row.f1, f)] {
            let d = (got - printed).abs();
            worst = worst.max(d);
            ensure(d <= CELL_TOLERANCE, || {
                format!("{name}: computed {got:.4}, printed {printed}")
            })?;
        }
    }
    // The worked example from the entity table.
    let row = PrfRow::from_counts("All Classes", 993, 759, 423);
    ensure(
        (row.precision - 0.567).abs() <= CELL_TOLERANCE
            && (row.recall - 0.701).abs() <= CELL_TOLERANCE
            && (row.f1 - 0.627).abs() <= CELL_TOLERANCE,
        || format!("993/759/423 gave {:?}", row),
    )?;
    let elapsed = t0.elapsed();
    ensure(elapsed < METRIC_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} rows within {CELL_TOLERANCE}, max deviation {worst:.4}",
        NER_TABLE.len() + RE_TABLE.len()
    ))
}

const EXAMPLE_TEXT: &str = "Troops were inspected on Monday by GOC, the General Officer Commanding 3 Armoured Division of the Nigerian Army, Major General Jack Nwaogbo.\n";
const EXAMPLE_ANN: &str = "T1\tTitle_Role 35 38\tGOC\nT2\tTitle_Role 52 70\tOfficer Commanding\nT3\tOrganization 71 90\t3 Armoured Division\nT4\tOrganization 98 111\tNigerian Army\nR1 has_rank Arg1:T1 Arg2:T2\t\nR2 is_posted Arg1:T1 Arg2:T3\t\nR3 has_title Arg1:T1 Arg2:T4\t\n";
const EXAMPLE_CANONICAL: &str = "T1\tTitle_Role 35 38\tGOC\nT2\tTitle_Role 52 70\tOfficer Commanding\nT3\tOrganization 71 90\t3 Armoured Division\nT4\tOrganization 98 111\tNigerian Army\nR1\thas_rank Arg1:T1 Arg2:T2\nR2\tis_posted Arg1:T1 Arg2:T3\nR3\thas_title_role Arg1:T1 Arg2:T4\n";

fn round_trip(ann: &str, text: &str) -> Result<String, String> {
    let doc = parse_brat(ann, text).map_err(|e| e.to_string())?;
    let once = serialize_brat(&doc);
    let again = parse_brat(&once, text).map_err(|e| e.to_string())?;
    ensure(again == doc, || "reparse changed the document".into())?;
    ensure(serialize_brat(&again) == once, || {
        "second serialization differs".into()
    })?;
    Ok(once)
}

fn format_fidelity(scratch: &Path) -> Outcome {
    let canon = round_trip(EXAMPLE_ANN, EXAMPLE_TEXT)?;
    ensure(canon == EXAMPLE_CANONICAL, || {
        format!("example serialized as {canon:?}")
    })?;

    let dir = common::fixture_dir();
    let fixtures = load_corpus(&dir).map_err(|e| e.to_string())?;
    for entry in &fixtures {
        let ann = std::fs::read_to_string(dir.join(format!("{}.ann", entry.doc.doc_id))).unwrap();
        let out = round_trip(&ann, &entry.doc.text)?;
        ensure(out == ann, || {
            format!("{} not byte-stable", entry.doc.doc_id)
        })?;
    }

    let (corpus, public) = common::evaluation_corpus(scratch);
    let entries = load_corpus(&corpus).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for entry in &entries {
        for e in &entry.doc.entities {
            let s: String = entry
                .doc
                .text
                .chars()
                .skip(e.start)
                .take(e.end - e.start)
                .collect();
            ensure(s == e.surface, || {
                format!("{} {}: surface mismatch", entry.doc.doc_id, e.id)
            })?;
            checked += 1;
        }
        round_trip(&serialize_brat(&entry.doc), &entry.doc.text)?;
    }
    ensure(!public || entries.len() == 130, || {
        format!(
            "public corpus has {} documents, expected 130",
            entries.len()
        )
    })?;
    Ok(format!(
        "example canonical, {} fixtures byte-stable, {} {} documents ({checked} entities) cross-checked",
        fixtures.len(),
        entries.len(),
        if public { "public" } else { "synthetic (public corpus not fetched)" }
    ))
}

fn iob_fidelity() -> Outcome {
    let dir = common::fixture_dir();
    let entry = load_document(&dir, common::VANGUARD).map_err(|e| e.to_string())?;
    let tokens = tokenize(&entry.doc.text);
    let enc = spans_to_iob(&tokens, &entry.doc.entities).map_err(|e| e.to_string())?;
    let punct = |t: &str| t.chars().all(|c| c.is_ascii_punctuation());
    for (tok, tag) in tokens.iter().zip(&enc.tags) {
        if punct(&tok.text) {
            ensure(*tag == IobTag::O, || {
                format!("punctuation {:?} tagged {tag}", tok.text)
            })?;
        }
    }
    let words: Vec<String> = tokens
        .iter()
        .zip(&enc.tags)
        .filter(|(t, _)| !punct(&t.text))
        .map(|(_, tag)| tag.to_string())
        .collect();
    let printed = "B-TTL I-TTL I-TTL B-ORG I-ORG I-ORG I-ORG I-ORG I-ORG I-ORG B-RNK I-RNK B-PER \
                   I-PER O O O O O O O O O O O O O";
    ensure(words.join(" ") == printed, || {
        format!("got {}", words.join(" "))
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let types = [
        EntityType::Person,
        EntityType::Organization,
        EntityType::Rank,
        EntityType::TitleRole,
    ];
    for case in 0..1000 {
        let n = rng.gen_range(1..=25);
        let words: Vec<String> = (0..n)
            .map(|_| {
                let len = rng.gen_range(1..=6);
                (0..len).map(|_| rng.gen_range('a'..='z')).collect()
            })
            .collect();
        let text = format!("{}\n", words.join(" "));
        let toks = tokenize(&text);
        ensure(toks.len() == n, || {
            format!("case {case}: tokenizer split {n} words into {}", toks.len())
        })?;
        let mut spans = Vec::new();
        let mut i = 0;
        while i < n {
            if rng.gen_bool(0.4) {
                let len = rng.gen_range(1..=(n - i).min(4));
                let (start, end) = (toks[i].start, toks[i + len - 1].end);
                spans.push(EntitySpan {
                    id: format!("T{}", spans.len() + 1),
                    etype: *types.choose(&mut rng).unwrap(),
                    start,
                    end,
                    surface: text[start..end].to_string(),
                });
                i += len;
            } else {
                i += 1;
            }
        }
        let enc = spans_to_iob(&toks, &spans).map_err(|e| format!("case {case}: {e}"))?;
        let back =
            iob_to_spans(&text, &toks, &enc.tags).map_err(|e| format!("case {case}: {e}"))?;
        let key = |v: &[EntitySpan]| {
            v.iter()
                .map(|e| (e.start, e.end, e.etype))
                .collect::<Vec<_>>()
        };
        ensure(key(&back) == key(&spans), || {
            format!("case {case}: round trip changed spans")
        })?;
    }
    Ok("printed tag sequence reproduced, 1000 random layouts round-trip".into())
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    // heads[i] is 1-based, 0 for the root; attach each node to an earlier
    // node of a random permutation so the result is a tree.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n];
    for k in 1..n {
        heads[order[k]] = order[rng.gen_range(0..k)] + 1;
    }
    heads
}

fn bfs_distance(heads: &[usize], a: &[usize], b: &[usize]) -> usize {
    let n = heads.len();
    let mut adj = vec![Vec::new(); n];
    for (i, &h) in heads.iter().enumerate() {
        if h > 0 {
            adj[i].push(h - 1);
            adj[h - 1].push(i);
        }
    }
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &s in a {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    b.iter().map(|&t| dist[t]).min().unwrap()
}

fn path_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = 0;
    for case in 0..500 {
        let n = rng.gen_range(2..=15);
        let heads = random_tree(&mut rng, n);
        let labels: Vec<String> = (0..n).map(|i| format!("l{}", i % 4)).collect();
        let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let tree = DepTree::from_heads(&heads, &label_refs).map_err(|e| e.to_string())?;
        // Partition the sentence into contiguous entity spans.
        let mut spans = Vec::new();
        let mut i = 0;
        while i < n {
            let len = rng.gen_range(1..=3.min(n - i));
            spans.push((i..i + len).collect::<Vec<_>>());
            i += len;
        }
        for a in 0..spans.len() {
            for b in 0..spans.len() {
                if a == b {
                    continue;
                }
                let got = span_path(&tree, &spans[a], &spans[b])
                    .map_err(|e| e.to_string())?
                    .length();
                let want = bfs_distance(&heads, &spans[a], &spans[b]);
                ensure(got == want, || {
                    format!(
                        "case {case}: heads {heads:?} spans {:?} {:?}: {got} vs {want}",
                        spans[a], spans[b]
                    )
                })?;
                pairs += 1;
            }
        }
    }
    let elapsed = t0.elapsed();
    ensure(elapsed < PATH_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "500 trees, {pairs} span pairs match BFS in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn decoder_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let valid = |p: usize, t: usize| {
        forcegraph::iob::valid_transition(IobTag::from_index(p), IobTag::from_index(t))
    };
    for case in 0..200 {
        let n = rng.gen_range(1..=6);
        let mut draw = || rng.gen_range(-3.0..3.0);
        let emissions: Vec<[f64; 9]> = (0..n).map(|_| std::array::from_fn(|_| draw())).collect();
        let mut trans = [[0.0; 9]; 9];
        for (p, row) in trans.iter_mut().enumerate() {
            for (t, w) in row.iter_mut().enumerate() {
                *w = if valid(p, t) {
                    draw()
                } else {
                    f64::NEG_INFINITY
                };
            }
        }
        let start: [f64; 9] = std::array::from_fn(|t| {
            if valid(0, t) {
                draw()
            } else {
                f64::NEG_INFINITY
            }
        });
        let score = |seq: &[usize]| -> f64 {
            let mut s = start[seq[0]] + emissions[0][seq[0]];
            for i in 1..seq.len() {
                s += trans[seq[i - 1]][seq[i]] + emissions[i][seq[i]];
            }
            s
        };
        let mut best = f64::NEG_INFINITY;
        let mut seq = vec![0usize; n];
        for code in 0..9usize.pow(n as u32) {
            let mut c = code;
            for s in seq.iter_mut() {
                *s = c % 9;
                c /= 9;
            }
            best = best.max(score(&seq));
        }
        let decoded: Vec<usize> = viterbi(&emissions, &trans, &start)
            .iter()
            .map(|t| t.index())
            .collect();
        let got = score(&decoded);
        ensure((got - best).abs() <= 1e-9 * best.abs().max(1.0), || {
            format!("case {case}: viterbi {got} vs exhaustive {best}")
        })?;
    }
    Ok("200 random models agree with exhaustive search".into())
}

fn random_model(rng: &mut ChaCha8Rng, mode: OutputMode, activation: Activation) -> RelNetModel {
    let vocab = random_vocab(rng);
    let config = RelNetConfig {
        output_mode: mode,
        hidden: rng.gen_range(2..=8),
        activation,
        ..RelNetConfig::default()
    };
    let mut model = RelNetModel::new(config, vocab, rng.gen());
    // Move biases off zero so ReLU units are not all on a kink.
    for g in model.params.groups_mut() {
        for w in g.iter_mut() {
            *w += rng.gen_range(-0.3..0.3);
        }
    }
    model
}

fn random_vocab(rng: &mut ChaCha8Rng) -> PatternVocab {
    let heads = random_tree(rng, 10);
    let labels = [
        "nsubj", "obj", "nmod", "appos", "flat", "compound", "conj", "obl", "case", "det",
    ];
    let tree = DepTree::from_heads(&heads, &labels).unwrap();
    let mut patterns = Vec::new();
    for a in 0..10 {
        for b in 0..10 {
            if a != b {
                patterns.push(span_path(&tree, &[a], &[b]).unwrap());
            }
        }
    }
    build_vocab(&patterns, 1, true).unwrap()
}

fn random_features(rng: &mut ChaCha8Rng, dim: usize) -> RelCandidateFeatures {
    let n = rng.gen_range(1..=MAX_PERSONS);
    let mut slots = vec![vec![0.0; dim]; MAX_PERSONS];
    for slot in slots.iter_mut().take(n) {
        slot[rng.gen_range(0..dim - 1)] = 1.0;
        slot[dim - 1] = rng.gen_range(1..8) as f64 * 0.1;
    }
    let mut type_onehot = [0.0; 3];
    type_onehot[rng.gen_range(0..3)] = 1.0;
    RelCandidateFeatures {
        slots,
        type_onehot,
        n_persons: n,
        truncated: false,
    }
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let mode = if case % 2 == 0 {
            OutputMode::SelectK
        } else {
            OutputMode::Constrained3
        };
        let act = if case < 5 {
            Activation::Relu
        } else {
            Activation::Tanh
        };
        let model = random_model(&mut rng, mode, act);
        let x = random_features(&mut rng, model.slot_dim());
        let mut target = vec![0.0; model.out_dim()];
        target[rng.gen_range(0..model.out_dim())] = 1.0;
        let (_, grad) = model
            .loss_and_grad(&x, &target)
            .map_err(|e| e.to_string())?;
        for (gi, name) in forcegraph::relnet::Params::GROUPS.iter().enumerate() {
            let analytic = grad.groups()[gi].clone();
            let mut numeric = vec![0.0; analytic.len()];
            for (k, num) in numeric.iter_mut().enumerate() {
                let mut plus = model.clone();
                plus.params.groups_mut()[gi][k] += FD_STEP;
                let mut minus = model.clone();
                minus.params.groups_mut()[gi][k] -= FD_STEP;
                let lp = plus.loss(&x, &target).map_err(|e| e.to_string())?;
                let lm = minus.loss(&x, &target).map_err(|e| e.to_string())?;
                *num = (lp - lm) / (2.0 * FD_STEP);
            }
            let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
            let scale = norm(&analytic).max(norm(&numeric));
            let rel = if scale < 1e-12 {
                norm(&diff)
            } else {
                norm(&diff) / scale
            };
            worst = worst.max(rel);
            ensure(rel < GRAD_TOLERANCE, || {
                format!("case {case} group {name}: relative error {rel:e}")
            })?;
        }
    }
    Ok(format!(
        "10 models x 6 groups, worst relative error {worst:.2e}"
    ))
}

/// Train both classifier modes on the synthetic corpus; returns the models
/// directory.
fn trained_models(scratch: &Path) -> Result<std::path::PathBuf, String> {
    let models = scratch.join("mechanism-models");
    if models.join("relnet-select-k.model").exists() {
        return Ok(models);
    }
    let corpus = scratch.join("mechanism-corpus");
    common::write_synthetic(&corpus, 130, 7);
    let cfg = RunConfig {
        corpus_dir: corpus,
        output_dir: scratch.join("mechanism-out"),
        models_dir: Some(models.clone()),
        split_fraction: 1.0,
        ..RunConfig::default()
    };
    run_train(
        &cfg,
        TrainTarget::Relnet,
        &[OutputMode::SelectK, OutputMode::Constrained3],
    )
    .map_err(|e| e.to_string())?;
    Ok(models)
}

fn attachments_for(
    stem: &str,
    strategy: Strategy,
    model: Option<&RelNetModel>,
) -> Result<Vec<(String, Option<String>)>, String> {
    let entry = load_document(&common::fixture_dir(), stem).map_err(|e| e.to_string())?;
    let atts = extract_document(
        &entry.doc.doc_id,
        &entry.doc.text,
        &entry.doc.entities,
        &entry.trees,
        strategy,
        model,
        MissingParse::Error,
    )
    .map_err(|e| e.to_string())?;
    Ok(atts
        .into_iter()
        .map(|a| (a.target.surface, a.person.map(|p| p.surface)))
        .collect())
}

fn person_for(atts: &[(String, Option<String>)], target: &str) -> Option<String> {
    atts.iter()
        .find(|(t, _)| t == target)
        .and_then(|(_, p)| p.clone())
}

fn mechanism_fixtures(scratch: &Path) -> Outcome {
    let sdp = attachments_for(common::APPOINTMENT, Strategy::SdpFree, None)?;
    let sdp_pick = person_for(&sdp, "Chief of Logistics");
    ensure(sdp_pick.as_deref() == Some("M. T. Ibrahim"), || {
        format!("unconstrained SDP attached Chief of Logistics to {sdp_pick:?}")
    })?;
    let commander = person_for(&sdp, "Commander");
    ensure(commander.as_deref() == Some("M. T. Ibrahim"), || {
        format!("unconstrained SDP attached Commander to {commander:?}")
    })?;
    let attack_sdp = attachments_for(common::ATTACK, Strategy::SdpFree, None)?;
    ensure(
        person_for(&attack_sdp, "Nigerian Air Force").is_some(),
        || "SDP did not force an attachment for the unrelated organization".into(),
    )?;

    let models = trained_models(scratch)?;
    let mut notes = Vec::new();
    for (strategy, mode) in [
        (Strategy::NnFree, OutputMode::SelectK),
        (Strategy::NnConstrained, OutputMode::Constrained3),
    ] {
        let model =
            load_relnet(&models.join(format!("relnet-{mode}.model"))).map_err(|e| e.to_string())?;
        let nn = attachments_for(common::APPOINTMENT, strategy, Some(&model))?;
        let pick = person_for(&nn, "Chief of Logistics");
        ensure(
            pick.is_none() || pick.as_deref() == Some("Emmanuel Atewe"),
            || format!("{strategy} attached Chief of Logistics to {pick:?}"),
        )?;
        let attack = attachments_for(common::ATTACK, strategy, Some(&model))?;
        let org = person_for(&attack, "Nigerian Air Force");
        ensure(org.is_none(), || {
            format!("{strategy} attached the unrelated organization to {org:?}")
        })?;
        notes.push(format!(
            "{strategy}: Chief of Logistics -> {}",
            pick.as_deref().unwrap_or("abstain")
        ));
    }
    Ok(format!(
        "sdp-free: Chief of Logistics -> M. T. Ibrahim, unrelated org forced; {}; unrelated org abstained",
        notes.join("; ")
    ))
}

fn pipeline_run(corpus: &Path, out: &Path) -> Result<(String, String), String> {
    let cfg = RunConfig {
        corpus_dir: corpus.to_path_buf(),
        output_dir: out.to_path_buf(),
        eval_split: SplitPart::Test,
        ..RunConfig::default()
    };
    run_train(
        &cfg,
        TrainTarget::All,
        &[OutputMode::SelectK, OutputMode::Constrained3],
    )
    .map_err(|e| e.to_string())?;
    let report = run_evaluate(&cfg, None).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    Ok((report.to_text(), json))
}

fn end_to_end(scratch: &Path) -> Outcome {
    let (corpus, public) = common::evaluation_corpus(scratch);
    let n = load_corpus(&corpus).map_err(|e| e.to_string())?.len();
    let t0 = Instant::now();
    let (text, json) = pipeline_run(&corpus, &scratch.join("e2e-a"))?;
    let elapsed = t0.elapsed();
    ensure(elapsed < PIPELINE_BUDGET, || format!("took {elapsed:?}"))?;
    let (text2, json2) = pipeline_run(&corpus, &scratch.join("e2e-b"))?;
    ensure(json == json2 && text == text2, || {
        "seeded runs differ".into()
    })?;
    for s in Strategy::ALL {
        ensure(text.contains(s.display_name()), || {
            format!("report lacks {}", s.display_name())
        })?;
    }
    ensure(
        text.contains("True Positives") && text.contains("F1 Score"),
        || "table header missing".into(),
    )?;
    let value: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let rows = value["relations"]["rows"].as_array().map_or(0, Vec::len);
    ensure(rows == 5, || format!("JSON has {rows} strategy rows"))?;
    print!("{text}");
    Ok(format!(
        "{} corpus ({n} documents): train + all strategies in {:.1}s, text and JSON reports, reruns identical",
        if public { "public" } else { "synthetic" },
        elapsed.as_secs_f64()
    ))
}

fn throughput(scratch: &Path) -> Outcome {
    let (corpus, _) = common::evaluation_corpus(scratch);
    let out = scratch.join("e2e-a");
    let models = out.join("models");
    if !models.join("tagger.model").exists() {
        pipeline_run(&corpus, &out)?;
    }
    let entries = load_corpus(&corpus).map_err(|e| e.to_string())?;
    let tagger = load_tagger(&models.join("tagger.model")).map_err(|e| e.to_string())?;
    let relnet =
        load_relnet(&models.join("relnet-constrained3.model")).map_err(|e| e.to_string())?;
    let rows =
        bench_pipeline(&entries, Some(&tagger), Some(&relnet), 5).map_err(|e| e.to_string())?;
    let get = |prefix: &str| rows.iter().find(|r| r.component.starts_with(prefix));
    let sdp = get("Shortest")
        .and_then(|r| r.seconds_per_line)
        .ok_or("SDP row not measured")?;
    let nn_row = get("Neural").ok_or("NN row missing")?;
    let nn = nn_row.seconds_per_line.ok_or("NN row not measured")?;
    ensure(sdp < SDP_SECONDS_PER_LINE, || {
        format!("SDP {sdp:.4} s/line")
    })?;
    ensure(nn < NN_SECONDS_PER_LINE, || format!("NN {nn:.4} s/line"))?;
    let reference_params = nn_row.reference_parameters.unwrap_or(0);
    Ok(format!(
        "SDP {sdp:.2e} s/line, NN {nn:.2e} s/line; NN parameters {} vs reference {reference_params}",
        nn_row.model_parameters.unwrap_or(0)
    ))
}
