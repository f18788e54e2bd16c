//! End-to-end workflows behind the command-line subcommands.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{split_indices, NerSource, RunConfig, SplitPart};
use crate::corpus::{
    load_corpus, parse_brat, serialize_brat, CorpusEntry, Document, EntitySpan, EntityType,
    RelationEdge,
};
use crate::error::{Error, Result};
use crate::eval::{
    bench_pipeline, evaluate_strategies, format_prf_table, format_timing_table, gold_triples,
    score_entities, score_relations, PrfRow, RelationReport, SpanKey, StrategyScore, TimingRow,
};
use crate::iob::spans_to_iob;
use crate::ner::{
    gold_sentences, predict_entities, train_tagger, Featurizer, NerMode, TaggerModel,
};
use crate::reference::{METRIC_TOLERANCE, NER_TABLE, RE_TABLE};
use crate::relext::{build_contexts, extract_document, Attachment, Strategy};
use crate::relnet::{
    build_vocab, collect_patterns, examples_from_document, train, OutputMode, RelNetModel,
};
use crate::tokenize::tokenize;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_model(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Prerequisite(format!(
                "{what} not found at {}; run `forcegraph train` first or point the config at an existing file",
                path.display()
            ))
        } else {
            Error::io(path, e)
        }
    })
}

pub fn load_tagger(path: &Path) -> Result<TaggerModel> {
    TaggerModel::from_text(&read_model(path, "tagger model")?)
}

pub fn load_relnet(path: &Path) -> Result<RelNetModel> {
    RelNetModel::from_text(&read_model(path, "relation model")?)
}

/// The entries of one side of the seeded split.
pub fn select_split<'a>(
    entries: &'a [CorpusEntry],
    cfg: &RunConfig,
    part: SplitPart,
) -> Vec<&'a CorpusEntry> {
    if part == SplitPart::All {
        return entries.iter().collect();
    }
    let (train, test) = split_indices(entries.len(), cfg.split_fraction, cfg.seed);
    let pick = if part == SplitPart::Train {
        train
    } else {
        test
    };
    pick.into_iter().map(|i| &entries[i]).collect()
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Entities and attachments for one document.
#[derive(Debug, Clone)]
pub struct DocPrediction {
    pub doc_id: String,
    pub entities: Vec<EntitySpan>,
    pub attachments: Vec<Attachment>,
}

/// Predict entities (gold or tagger) and attach them with `strategy`.
pub fn predict_document(
    entry: &CorpusEntry,
    ner: NerMode<'_>,
    strategy: Strategy,
    model: Option<&RelNetModel>,
    cfg: &RunConfig,
) -> Result<DocPrediction> {
    let entities = predict_entities(ner, &entry.doc);
    let attachments = extract_document(
        &entry.doc.doc_id,
        &entry.doc.text,
        &entities,
        &entry.trees,
        strategy,
        model,
        cfg.missing_parse,
    )?;
    Ok(DocPrediction {
        doc_id: entry.doc.doc_id.clone(),
        entities,
        attachments,
    })
}

/// BRAT text for a prediction: entities, then one relation per non-abstained
/// attachment with the person as `Arg1`.
pub fn prediction_to_brat(text: &str, pred: &DocPrediction) -> String {
    let relations = pred
        .attachments
        .iter()
        .filter_map(|a| a.person.as_ref().map(|p| (a, p)))
        .enumerate()
        .map(|(i, (a, p))| RelationEdge {
            id: format!("R{}", i + 1),
            rtype: a.rtype,
            arg1: p.id.clone(),
            arg2: a.target.id.clone(),
        })
        .collect();
    serialize_brat(&Document {
        doc_id: pred.doc_id.clone(),
        text: text.to_string(),
        entities: pred.entities.clone(),
        relations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    #[serde(rename = "type")]
    pub etype: EntityType,
    pub surface: String,
    pub doc_id: String,
    pub offsets: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub rtype: crate::corpus::RelType,
    pub from: String,
    pub to: String,
    pub strategy: Strategy,
    pub doc_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub seed: u64,
    pub config_hash: String,
    pub strategy: Strategy,
    pub ner_mode: NerSource,
    pub documents: usize,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

fn node_id(doc_id: &str, entity_id: &str) -> String {
    format!("{doc_id}/{entity_id}")
}

/// Combine per-document predictions into one graph. Edges run from the
/// non-person entity to the person.
pub fn build_graph(cfg: &RunConfig, preds: &[DocPrediction]) -> Graph {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for p in preds {
        for e in &p.entities {
            nodes.push(GraphNode {
                id: node_id(&p.doc_id, &e.id),
                etype: e.etype,
                surface: e.surface.clone(),
                doc_id: p.doc_id.clone(),
                offsets: [e.start, e.end],
            });
        }
        for a in &p.attachments {
            if let Some(person) = &a.person {
                edges.push(GraphEdge {
                    rtype: a.rtype,
                    from: node_id(&p.doc_id, &a.target.id),
                    to: node_id(&p.doc_id, &person.id),
                    strategy: a.strategy,
                    doc_id: p.doc_id.clone(),
                });
            }
        }
    }
    Graph {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        strategy: cfg.strategy,
        ner_mode: cfg.ner_mode,
        documents: preds.len(),
        nodes,
        edges,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_hash: String,
    pub strategy: Strategy,
    pub ner_mode: NerSource,
    pub annotation_files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractSummary {
    pub documents: usize,
    pub entities: usize,
    pub attachments: usize,
    pub abstentions: usize,
    pub graph_path: PathBuf,
}

fn ner_models(cfg: &RunConfig) -> Result<Option<TaggerModel>> {
    match cfg.ner_mode {
        NerSource::Gold => Ok(None),
        NerSource::Model => load_tagger(&cfg.tagger_path()).map(Some),
    }
}

fn ner_mode(tagger: &Option<TaggerModel>) -> NerMode<'_> {
    match tagger {
        Some(m) => NerMode::Model(m),
        None => NerMode::Gold,
    }
}

/// Predict over the whole corpus and write `ann/<stem>.ann`, `graph.json`
/// and `manifest.json` under the output directory.
pub fn run_extract(cfg: &RunConfig) -> Result<ExtractSummary> {
    let tagger = ner_models(cfg)?;
    let relnet = match cfg.strategy.output_mode() {
        Some(mode) => Some(load_relnet(&cfg.relnet_path(mode))?),
        None => None,
    };
    let entries = load_corpus(&cfg.corpus_dir)?;
    let preds: Vec<DocPrediction> = thread_pool(cfg.workers)?.install(|| {
        entries
            .par_iter()
            .map(|e| predict_document(e, ner_mode(&tagger), cfg.strategy, relnet.as_ref(), cfg))
            .collect::<Result<Vec<_>>>()
    })?;

    let ann_dir = cfg.output_dir.join("ann");
    let mut files = Vec::new();
    for (entry, pred) in entries.iter().zip(&preds) {
        let name = format!("{}.ann", pred.doc_id);
        write_file(
            &ann_dir.join(&name),
            &prediction_to_brat(&entry.doc.text, pred),
        )?;
        files.push(format!("ann/{name}"));
    }
    let graph = build_graph(cfg, &preds);
    let graph_path = cfg.output_dir.join("graph.json");
    write_file(&graph_path, &to_json(&graph))?;
    let manifest = Manifest {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        strategy: cfg.strategy,
        ner_mode: cfg.ner_mode,
        annotation_files: files,
    };
    write_file(&cfg.output_dir.join("manifest.json"), &to_json(&manifest))?;

    let attachments: usize = preds.iter().map(|p| p.attachments.len()).sum();
    let abstentions = preds
        .iter()
        .flat_map(|p| &p.attachments)
        .filter(|a| a.person.is_none())
        .count();
    Ok(ExtractSummary {
        documents: preds.len(),
        entities: preds.iter().map(|p| p.entities.len()).sum(),
        attachments,
        abstentions,
        graph_path,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Which models `train` should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainTarget {
    Tagger,
    Relnet,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedRelnet {
    pub mode: OutputMode,
    pub path: PathBuf,
    pub parameters: usize,
    pub examples: usize,
    pub vocab_size: usize,
    pub loss_curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainSummary {
    pub training_documents: usize,
    pub tagger: Option<(PathBuf, usize)>,
    pub relnets: Vec<TrainedRelnet>,
}

/// Train a tagger on gold sentences of `docs`.
pub fn train_tagger_on(docs: &[&CorpusEntry], cfg: &RunConfig) -> Result<TaggerModel> {
    let mut sentences = Vec::new();
    for e in docs {
        sentences.extend(gold_sentences(&e.doc)?);
    }
    let plain: Vec<&Document> = docs.iter().map(|e| &e.doc).collect();
    let mut featurizer = Featurizer {
        rank_lexicon: Featurizer::rank_lexicon_from(&plain),
        ..Default::default()
    };
    if let Some(path) = &cfg.gazetteer {
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        featurizer.org_gazetteer = Featurizer::parse_gazetteer(&src);
    }
    let mut model = train_tagger(&sentences, featurizer, cfg.tagger_epochs, cfg.seed)?;
    model.config_hash = cfg.hash();
    Ok(model)
}

/// Build the vocabulary from `docs` and train one relation model.
pub fn train_relnet_on(
    docs: &[&CorpusEntry],
    cfg: &RunConfig,
    mode: OutputMode,
) -> Result<(RelNetModel, usize, Vec<f64>)> {
    let parsed: Vec<&&CorpusEntry> = docs.iter().filter(|e| !e.trees.is_empty()).collect();
    if parsed.is_empty() {
        return Err(Error::Prerequisite(
            "relation model training needs documents with .conllu parses".into(),
        ));
    }
    let patterns: Vec<_> = parsed
        .iter()
        .flat_map(|e| collect_patterns(&e.doc, &e.trees))
        .collect();
    let rcfg = cfg.relnet_config(mode);
    let vocab = build_vocab(&patterns, rcfg.min_count, rcfg.directed)?;
    let mut examples = Vec::new();
    for e in &parsed {
        examples.extend(examples_from_document(&e.doc, &e.trees, &vocab, &rcfg)?);
    }
    let mut model = RelNetModel::new(rcfg, vocab, cfg.seed);
    let curve = train(
        &mut model,
        &examples,
        cfg.relnet_epochs,
        cfg.learning_rate,
        cfg.seed.wrapping_add(1),
    )?;
    Ok((model, examples.len(), curve))
}

/// Train on the training side of the split and write model files.
pub fn run_train(
    cfg: &RunConfig,
    target: TrainTarget,
    modes: &[OutputMode],
) -> Result<TrainSummary> {
    let entries = load_corpus(&cfg.corpus_dir)?;
    let docs = select_split(&entries, cfg, SplitPart::Train);
    if docs.is_empty() {
        return Err(Error::Empty(format!(
            "training split of {} ({} documents, fraction {})",
            cfg.corpus_dir.display(),
            entries.len(),
            cfg.split_fraction
        )));
    }
    let mut summary = TrainSummary {
        training_documents: docs.len(),
        ..Default::default()
    };
    if matches!(target, TrainTarget::Tagger | TrainTarget::All) {
        let model = train_tagger_on(&docs, cfg)?;
        let path = cfg.tagger_path();
        write_file(&path, &model.to_text())?;
        info!("wrote {}", path.display());
        summary.tagger = Some((path, model.parameter_count()));
    }
    if matches!(target, TrainTarget::Relnet | TrainTarget::All) {
        for &mode in modes {
            let (model, examples, loss_curve) = train_relnet_on(&docs, cfg, mode)?;
            let path = cfg.relnet_path(mode);
            write_file(&path, &model.to_text())?;
            info!("wrote {}", path.display());
            summary.relnets.push(TrainedRelnet {
                mode,
                path,
                parameters: model.parameter_count(),
                examples,
                vocab_size: model.vocab.size(),
                loss_curve,
            });
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub config_hash: String,
    pub split: SplitPart,
    pub ner: Vec<PrfRow>,
    pub relations: RelationReport,
}

impl EvalReport {
    /// Entity table then relation table, in the published column layouts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format_prf_table("Class", &self.ner, 3));
        out.push('\n');
        let rows: Vec<PrfRow> = self.relations.rows.iter().map(|r| r.row.clone()).collect();
        out.push_str(&format_prf_table("Method", &rows, 3));
        writeln!(
            out,
            "\n{} documents, {} gold relations ({} cross-sentence, never predicted)",
            self.relations.documents,
            self.relations.gold_relations,
            self.relations.cross_sentence_gold
        )
        .unwrap();
        for r in &self.relations.rows {
            if r.abstentions > 0 {
                writeln!(out, "{}: {} abstentions", r.strategy, r.abstentions).unwrap();
            }
        }
        out
    }
}

fn entity_keys<'a>(docs: impl IntoIterator<Item = (&'a str, &'a [EntitySpan])>) -> Vec<SpanKey> {
    docs.into_iter()
        .flat_map(|(id, ents)| ents.iter().map(move |e| SpanKey::new(id, e)))
        .collect()
}

/// Score the evaluation side of the split. With `predictions`, entities and
/// relations come from `<predictions>/<stem>.ann`; otherwise every configured
/// strategy is run.
pub fn run_evaluate(cfg: &RunConfig, predictions: Option<&Path>) -> Result<EvalReport> {
    let entries = load_corpus(&cfg.corpus_dir)?;
    if entries.iter().all(|e| e.doc.entities.is_empty()) {
        return Err(Error::Empty(format!(
            "gold annotations in {} ({} documents, none annotated)",
            cfg.corpus_dir.display(),
            entries.len()
        )));
    }
    let docs: Vec<CorpusEntry> = select_split(&entries, cfg, cfg.eval_split)
        .into_iter()
        .cloned()
        .collect();
    let gold_keys = entity_keys(
        docs.iter()
            .map(|e| (e.doc.doc_id.as_str(), e.doc.entities.as_slice())),
    );

    let (ner, relations) = match predictions {
        Some(dir) => {
            let mut pred_entities = Vec::new();
            let mut attachments = Vec::new();
            for e in &docs {
                let path = dir.join(format!("{}.ann", e.doc.doc_id));
                let ann = fs::read_to_string(&path).map_err(|err| Error::io(&path, err))?;
                let pred = parse_brat(&ann, &e.doc.text)?;
                attachments.extend(attachments_from_relations(
                    &e.doc.doc_id,
                    &pred,
                    cfg.strategy,
                ));
                pred_entities.push((e.doc.doc_id.clone(), pred.entities));
            }
            let pred_keys = entity_keys(
                pred_entities
                    .iter()
                    .map(|(d, v)| (d.as_str(), v.as_slice())),
            );
            let mut gold = Vec::new();
            let mut cross = 0;
            for e in &docs {
                let (g, c) = gold_triples(&e.doc, &e.trees);
                gold.extend(g);
                cross += c;
            }
            let report = RelationReport {
                documents: docs.len(),
                gold_relations: gold.len(),
                cross_sentence_gold: cross,
                rows: vec![StrategyScore {
                    strategy: cfg.strategy,
                    row: score_relations(cfg.strategy.display_name(), &gold, &attachments),
                    abstentions: 0,
                }],
            };
            (
                score_entities(&gold_keys, &pred_keys, cfg.match_mode),
                report,
            )
        }
        None => {
            let tagger = ner_models(cfg)?;
            let predicted: Vec<Vec<EntitySpan>> = docs
                .iter()
                .map(|e| predict_entities(ner_mode(&tagger), &e.doc))
                .collect();
            let pred_keys = entity_keys(
                docs.iter()
                    .zip(&predicted)
                    .map(|(e, p)| (e.doc.doc_id.as_str(), p.as_slice())),
            );
            let strategies = cfg.evaluated_strategies();
            let mut owned: BTreeMap<OutputMode, RelNetModel> = BTreeMap::new();
            for s in &strategies {
                if let Some(mode) = s.output_mode() {
                    if let std::collections::btree_map::Entry::Vacant(slot) = owned.entry(mode) {
                        slot.insert(load_relnet(&cfg.relnet_path(mode))?);
                    }
                }
            }
            let models: HashMap<Strategy, &RelNetModel> = strategies
                .iter()
                .filter_map(|s| s.output_mode().map(|m| (*s, &owned[&m])))
                .collect();
            let report = evaluate_strategies(
                &docs,
                Some(&predicted),
                &strategies,
                &models,
                cfg.missing_parse,
            )?;
            (
                score_entities(&gold_keys, &pred_keys, cfg.match_mode),
                report,
            )
        }
    };
    Ok(EvalReport {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        split: cfg.eval_split,
        ner,
        relations,
    })
}

/// Attachments encoded in a predicted document's relations.
fn attachments_from_relations(
    doc_id: &str,
    pred: &Document,
    strategy: Strategy,
) -> Vec<Attachment> {
    pred.relations
        .iter()
        .filter_map(|r| {
            let (a, b) = (pred.entity(&r.arg1)?, pred.entity(&r.arg2)?);
            let (person, target) = if a.etype == EntityType::Person {
                (a, b)
            } else {
                (b, a)
            };
            Some(Attachment {
                doc_id: doc_id.to_string(),
                target: target.clone(),
                person: Some(person.clone()),
                rtype: r.rtype,
                strategy,
            })
        })
        .collect()
}

/// Evaluate and write `metrics.json`; returns the report and its text form.
pub fn run_evaluate_to_disk(
    cfg: &RunConfig,
    predictions: Option<&Path>,
) -> Result<(EvalReport, String)> {
    let report = run_evaluate(cfg, predictions)?;
    write_file(&cfg.output_dir.join("metrics.json"), &to_json(&report))?;
    let text = report.to_text();
    write_file(&cfg.output_dir.join("metrics.txt"), &text)?;
    Ok((report, text))
}

/// One recomputed published row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCheck {
    pub table: &'static str,
    pub row: &'static str,
    pub computed: PrfRow,
    pub printed: [f64; 3],
    pub ok: bool,
}

/// Recompute every published precision, recall and F1 from its printed
/// counts and compare within the rounding tolerance.
pub fn reference_checks() -> Vec<ReferenceCheck> {
    let mut out = Vec::new();
    for (table, rows) in [("entities", &NER_TABLE), ("relations", &RE_TABLE)] {
        for &(name, tp, fp, fn_, p, r, f) in rows.iter() {
            let computed = PrfRow::from_counts(name, tp, fp, fn_);
            let ok = [computed.precision, computed.recall, computed.f1]
                .iter()
                .zip([p, r, f])
                .all(|(c, printed)| (c - printed).abs() <= METRIC_TOLERANCE);
            out.push(ReferenceCheck {
                table,
                row: name,
                computed,
                printed: [p, r, f],
                ok,
            });
        }
    }
    out
}

pub fn format_reference_checks(checks: &[ReferenceCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        writeln!(
            out,
            "{} {:<10} {:<38} computed {:.3}/{:.3}/{:.3} printed {}/{}/{}",
            if c.ok { "ok  " } else { "FAIL" },
            c.table,
            c.row,
            c.computed.precision,
            c.computed.recall,
            c.computed.f1,
            c.printed[0],
            c.printed[1],
            c.printed[2]
        )
        .unwrap();
    }
    out
}

/// Time each component, loading whichever models exist. Writes
/// `bench.json`.
pub fn run_bench(cfg: &RunConfig) -> Result<Vec<TimingRow>> {
    let entries = load_corpus(&cfg.corpus_dir)?;
    let tagger = match load_tagger(&cfg.tagger_path()) {
        Ok(m) => Some(m),
        Err(Error::Prerequisite(msg)) => {
            info!("{msg}; NER row not measured");
            None
        }
        Err(e) => return Err(e),
    };
    let mut relnet = None;
    for mode in [OutputMode::Constrained3, OutputMode::SelectK] {
        match load_relnet(&cfg.relnet_path(mode)) {
            Ok(m) => {
                relnet = Some(m);
                break;
            }
            Err(Error::Prerequisite(msg)) => info!("{msg}"),
            Err(e) => return Err(e),
        }
    }
    let rows = bench_pipeline(&entries, tagger.as_ref(), relnet.as_ref(), cfg.repetitions)?;
    #[derive(Serialize)]
    struct BenchFile<'a> {
        seed: u64,
        config_hash: String,
        repetitions: usize,
        rows: &'a [TimingRow],
    }
    let file = BenchFile {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        repetitions: cfg.repetitions,
        rows: &rows,
    };
    write_file(&cfg.output_dir.join("bench.json"), &to_json(&file))?;
    Ok(rows)
}

pub fn format_bench(rows: &[TimingRow]) -> String {
    format_timing_table(rows)
}

/// Human-readable summary of a corpus, one document, or a model file.
pub fn run_inspect(cfg: &RunConfig, doc: Option<&str>, model: Option<&Path>) -> Result<String> {
    let mut out = String::new();
    if let Some(path) = model {
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if src.starts_with("forcegraph-relnet") {
            let m = RelNetModel::from_text(&src)?;
            writeln!(out, "relation model {}", path.display()).unwrap();
            writeln!(out, "output mode   {}", m.config.output_mode).unwrap();
            writeln!(out, "hidden        {}", m.config.hidden).unwrap();
            writeln!(out, "vocab size    {} (incl. unknown)", m.vocab.size()).unwrap();
            writeln!(out, "parameters    {}", m.parameter_count()).unwrap();
            writeln!(out, "seed          {}", m.config.seed).unwrap();
            for (key, idx) in m.vocab.patterns() {
                writeln!(out, "  pattern {idx:>3}  {key}").unwrap();
            }
        } else {
            let m = TaggerModel::from_text(&src)?;
            writeln!(out, "tagger model  {}", path.display()).unwrap();
            writeln!(out, "features      {}", m.feature_weights.len()).unwrap();
            writeln!(out, "parameters    {}", m.parameter_count()).unwrap();
            writeln!(out, "seed          {}", m.seed).unwrap();
            writeln!(out, "epochs        {}", m.epochs).unwrap();
        }
        return Ok(out);
    }
    let entries = load_corpus(&cfg.corpus_dir)?;
    match doc {
        None => {
            let mut by_type: BTreeMap<String, usize> = BTreeMap::new();
            let mut by_rel: BTreeMap<String, usize> = BTreeMap::new();
            for e in &entries {
                for ent in &e.doc.entities {
                    *by_type.entry(ent.etype.to_string()).or_default() += 1;
                }
                for r in &e.doc.relations {
                    *by_rel.entry(r.rtype.brat_name().to_string()).or_default() += 1;
                }
            }
            writeln!(out, "documents     {}", entries.len()).unwrap();
            writeln!(
                out,
                "with parses   {}",
                entries.iter().filter(|e| e.has_parse()).count()
            )
            .unwrap();
            writeln!(
                out,
                "sentences     {}",
                entries.iter().map(|e| e.trees.len()).sum::<usize>()
            )
            .unwrap();
            for (k, v) in by_type {
                writeln!(out, "entity {k:<14} {v}").unwrap();
            }
            for (k, v) in by_rel {
                writeln!(out, "relation {k:<12} {v}").unwrap();
            }
        }
        Some(stem) => {
            let e = entries
                .iter()
                .find(|e| e.doc.doc_id == stem)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "no document {stem:?} in {}",
                        cfg.corpus_dir.display()
                    ))
                })?;
            let tokens = tokenize(&e.doc.text);
            let enc = spans_to_iob(&tokens, &crate::ner::drop_overlaps(&e.doc.entities))?;
            writeln!(out, "document {stem}").unwrap();
            for (t, tag) in tokens.iter().zip(&enc.tags) {
                writeln!(
                    out,
                    "{:>3} {:>3} {:<20} {tag}",
                    t.sent_index, t.tok_index, t.text
                )
                .unwrap();
            }
            for w in &enc.warnings {
                writeln!(out, "warning: {w}").unwrap();
            }
            for r in &e.doc.relations {
                writeln!(
                    out,
                    "{}\t{} {} {}",
                    r.id,
                    r.rtype.brat_name(),
                    r.arg1,
                    r.arg2
                )
                .unwrap();
            }
            for ctx in build_contexts(&e.doc.text, &e.doc.entities, &e.trees) {
                let Some(tree) = &ctx.tree else { continue };
                for t in &ctx.targets {
                    for p in &ctx.persons {
                        let path =
                            crate::depgraph::span_path(tree, ctx.tokens_of(t), ctx.tokens_of(p))?;
                        writeln!(
                            out,
                            "{:?} -> {:?}: {} ({})",
                            t.surface,
                            p.surface,
                            path.key(true),
                            path.length()
                        )
                        .unwrap();
                    }
                }
            }
        }
    }
    Ok(out)
}
