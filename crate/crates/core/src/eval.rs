//! Scoring of entities and attachments, report tables, and per-line timing.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conllu::{align_trees, parse_conllu};
use crate::corpus::{CorpusEntry, Document, EntitySpan, EntityType, RelType};
use crate::error::{Error, Result};
use crate::ner::TaggerModel;
use crate::reference::TIMING_TABLE;
use crate::relext::{build_contexts, extract_document, Attachment, MissingParse, Strategy};
use crate::relnet::RelNetModel;
use crate::tokenize::{sentences, tokenize};

/// Counts with derived precision, recall and F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfRow {
    pub class_or_method: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrfRow {
    pub fn from_counts(name: impl Into<String>, tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        PrfRow {
            class_or_method: name.into(),
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// Entity matching rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Same start, end and type.
    #[default]
    Exact,
    /// Same type and any character overlap.
    Overlap,
}

/// An entity with the document it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanKey {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub etype: EntityType,
}

impl SpanKey {
    pub fn new(doc_id: &str, e: &EntitySpan) -> Self {
        SpanKey {
            doc_id: doc_id.to_string(),
            start: e.start,
            end: e.end,
            etype: e.etype,
        }
    }
}

/// Table row label for an entity class.
pub fn class_label(etype: EntityType) -> &'static str {
    match etype {
        EntityType::Person => "Person",
        EntityType::Rank => "Rank",
        EntityType::Organization => "Organization",
        EntityType::TitleRole => "Title/Role",
    }
}

const CLASS_ORDER: [EntityType; 4] = [
    EntityType::Person,
    EntityType::Rank,
    EntityType::Organization,
    EntityType::TitleRole,
];

/// Per-class rows in table order plus a micro-averaged "All Classes" row.
/// Each gold span matches at most one prediction.
pub fn score_entities(gold: &[SpanKey], pred: &[SpanKey], mode: MatchMode) -> Vec<PrfRow> {
    let mut rows = Vec::new();
    let (mut tp_all, mut fp_all, mut fn_all) = (0, 0, 0);
    for etype in CLASS_ORDER {
        let g: Vec<&SpanKey> = gold.iter().filter(|k| k.etype == etype).collect();
        let p: Vec<&SpanKey> = pred.iter().filter(|k| k.etype == etype).collect();
        let tp = match mode {
            MatchMode::Exact => multiset_matches(&g, &p),
            MatchMode::Overlap => overlap_matches(&g, &p),
        };
        let (fp, fn_) = (p.len() - tp, g.len() - tp);
        tp_all += tp;
        fp_all += fp;
        fn_all += fn_;
        rows.push(PrfRow::from_counts(class_label(etype), tp, fp, fn_));
    }
    rows.push(PrfRow::from_counts("All Classes", tp_all, fp_all, fn_all));
    rows
}

fn multiset_matches<K: std::hash::Hash + Eq>(gold: &[K], pred: &[K]) -> usize {
    let mut counts: HashMap<&K, usize> = HashMap::new();
    for g in gold {
        *counts.entry(g).or_default() += 1;
    }
    let mut tp = 0;
    for p in pred {
        if let Some(c) = counts.get_mut(p) {
            if *c > 0 {
                *c -= 1;
                tp += 1;
            }
        }
    }
    tp
}

// Greedy in sorted order; good enough for analysis, not used for headline numbers.
fn overlap_matches(gold: &[&SpanKey], pred: &[&SpanKey]) -> usize {
    let mut gold: Vec<&SpanKey> = gold.to_vec();
    let mut pred: Vec<&SpanKey> = pred.to_vec();
    gold.sort();
    pred.sort();
    let mut used = vec![false; gold.len()];
    let mut tp = 0;
    for p in pred {
        let hit = gold.iter().enumerate().position(|(i, g)| {
            !used[i] && g.doc_id == p.doc_id && g.start < p.end && p.start < g.end
        });
        if let Some(i) = hit {
            used[i] = true;
            tp += 1;
        }
    }
    tp
}

/// A relation reduced to its two spans (unordered) and type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelTriple {
    pub doc_id: String,
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub rtype: RelType,
}

impl RelTriple {
    pub fn new(doc_id: &str, a: &EntitySpan, b: &EntitySpan, rtype: RelType) -> Self {
        let (x, y) = ((a.start, a.end), (b.start, b.end));
        let (first, second) = if x <= y { (x, y) } else { (y, x) };
        RelTriple {
            doc_id: doc_id.to_string(),
            first,
            second,
            rtype,
        }
    }

    /// `None` for an abstention.
    pub fn from_attachment(att: &Attachment) -> Option<Self> {
        att.person
            .as_ref()
            .map(|p| RelTriple::new(&att.doc_id, p, &att.target, att.rtype))
    }
}

/// Gold relation triples of a document, plus how many of them join entities
/// in different sentences. Cross-sentence relations stay in the set.
pub fn gold_triples(doc: &Document, trees: &[crate::depgraph::DepTree]) -> (Vec<RelTriple>, usize) {
    let contexts = build_contexts(&doc.text, &doc.entities, trees);
    let sentence_of = |id: &str| {
        contexts
            .iter()
            .position(|c| c.entity_tokens.contains_key(id))
    };
    let mut triples = Vec::new();
    let mut cross = 0;
    for rel in &doc.relations {
        let (Some(a), Some(b)) = (doc.entity(&rel.arg1), doc.entity(&rel.arg2)) else {
            continue;
        };
        let (sa, sb) = (sentence_of(&a.id), sentence_of(&b.id));
        if sa.is_none() || sa != sb {
            cross += 1;
        }
        triples.push(RelTriple::new(&doc.doc_id, a, b, rel.rtype));
    }
    (triples, cross)
}

/// Exact triple matching. Abstentions only add to FN.
pub fn score_relations(name: &str, gold: &[RelTriple], pred: &[Attachment]) -> PrfRow {
    let pred: Vec<RelTriple> = pred.iter().filter_map(RelTriple::from_attachment).collect();
    let tp = multiset_matches(gold, &pred);
    PrfRow::from_counts(name, tp, pred.len() - tp, gold.len() - tp)
}

/// Relation scores for one strategy, with the cross-sentence gold count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyScore {
    pub strategy: Strategy,
    pub row: PrfRow,
    pub abstentions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub documents: usize,
    pub gold_relations: usize,
    pub cross_sentence_gold: usize,
    pub rows: Vec<StrategyScore>,
}

/// Run each strategy over `entries` and score it against their gold
/// relations. `entities` replaces each document's gold entities as
/// extraction input (predicted NER); `None` uses the gold ones.
pub fn evaluate_strategies(
    entries: &[CorpusEntry],
    entities: Option<&[Vec<EntitySpan>]>,
    strategies: &[Strategy],
    models: &HashMap<Strategy, &RelNetModel>,
    missing_parse: MissingParse,
) -> Result<RelationReport> {
    if let Some(ents) = entities {
        if ents.len() != entries.len() {
            return Err(Error::Dimension(format!(
                "{} entity lists for {} documents",
                ents.len(),
                entries.len()
            )));
        }
    }
    let mut gold = Vec::new();
    let mut cross = 0;
    for e in entries {
        let (g, c) = gold_triples(&e.doc, &e.trees);
        gold.extend(g);
        cross += c;
    }
    let mut rows = Vec::new();
    for &s in strategies {
        let mut preds = Vec::new();
        for (i, e) in entries.iter().enumerate() {
            let input = entities.map_or(e.doc.entities.as_slice(), |v| v[i].as_slice());
            preds.extend(extract_document(
                &e.doc.doc_id,
                &e.doc.text,
                input,
                &e.trees,
                s,
                models.get(&s).copied(),
                missing_parse,
            )?);
        }
        let abstentions = preds.iter().filter(|a| a.person.is_none()).count();
        rows.push(StrategyScore {
            strategy: s,
            row: score_relations(s.display_name(), &gold, &preds),
            abstentions,
        });
    }
    Ok(RelationReport {
        documents: entries.len(),
        gold_relations: gold.len(),
        cross_sentence_gold: cross,
        rows,
    })
}

/// Aligned plain-text table with the published column layout.
pub fn format_prf_table(first_header: &str, rows: &[PrfRow], decimals: usize) -> String {
    let headers = [
        first_header,
        "True Positives",
        "False Positives",
        "False Negatives",
        "Precision",
        "Recall",
        "F1 Score",
    ];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.class_or_method.clone(),
                r.tp.to_string(),
                r.fp.to_string(),
                r.fn_.to_string(),
                format!("{:.*}", decimals, r.precision),
                format!("{:.*}", decimals, r.recall),
                format!("{:.*}", decimals, r.f1),
            ]
        })
        .collect();
    let header_row: [String; 7] = headers.map(str::to_string);
    render(&header_row, &body)
}

fn render<const N: usize>(header: &[String; N], body: &[[String; N]]) -> String {
    let mut widths = std::array::from_fn::<usize, N, _>(|i| header[i].chars().count());
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String; N]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i == 0 {
                write!(s, "{cell:<w$}").unwrap();
            } else {
                write!(s, "{cell:>w$}").unwrap();
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (N - 1)));
    out.push('\n');
    for row in body {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Mean per-line time for one pipeline component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub component: String,
    /// `None` when the component could not be measured (missing model).
    pub seconds_per_line: Option<f64>,
    pub model_parameters: Option<u64>,
    pub reference_seconds: f64,
    pub reference_parameters: Option<u64>,
    pub samples: Vec<f64>,
    pub discarded: usize,
}

/// Mean after dropping values outside `[Q1 - 3 IQR, Q3 + 3 IQR]`.
/// Returns the mean and how many values were dropped.
pub fn robust_mean(values: &[f64]) -> Option<(f64, usize)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (sorted.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    let (q1, q3) = (q(0.25), q(0.75));
    let iqr = q3 - q1;
    let kept: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|v| *v >= q1 - 3.0 * iqr && *v <= q3 + 3.0 * iqr)
        .collect();
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    Some((mean, values.len() - kept.len()))
}

/// Time NER decoding, CoNLL-U ingest, SDP attachment and classifier
/// attachment per sentence, `repetitions` times each. Components whose model
/// is missing are reported unmeasured.
pub fn bench_pipeline(
    entries: &[CorpusEntry],
    tagger: Option<&TaggerModel>,
    relnet: Option<&RelNetModel>,
    repetitions: usize,
) -> Result<Vec<TimingRow>> {
    if repetitions < 3 {
        return Err(Error::Config(format!(
            "benchmarking needs at least 3 repetitions, got {repetitions}"
        )));
    }
    let token_lines: usize = entries
        .iter()
        .map(|e| sentences(&tokenize(&e.doc.text)).len())
        .sum();
    let parsed: Vec<&CorpusEntry> = entries.iter().filter(|e| e.has_parse()).collect();
    let parse_lines: usize = parsed.iter().map(|e| e.trees.len()).sum();

    let measure = |lines: usize, f: &mut dyn FnMut() -> Result<()>| -> Result<Option<Vec<f64>>> {
        if lines == 0 {
            return Ok(None);
        }
        let mut samples = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let t0 = Instant::now();
            f()?;
            let secs = t0.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
            samples.push(secs / lines as f64);
        }
        Ok(Some(samples))
    };

    let ner = match tagger {
        Some(m) => measure(token_lines, &mut || {
            for e in entries {
                let tokens = tokenize(&e.doc.text);
                for s in sentences(&tokens) {
                    std::hint::black_box(m.viterbi_decode(s));
                }
            }
            Ok(())
        })?,
        None => None,
    };
    let ingest = measure(parse_lines, &mut || {
        for e in &parsed {
            if let Some(src) = &e.conllu {
                let mut trees = parse_conllu(src)?;
                std::hint::black_box(align_trees(&e.doc.text, &mut trees));
            }
        }
        Ok(())
    })?;
    let run = |strategy: Strategy, model: Option<&RelNetModel>| {
        measure(parse_lines, &mut || {
            for e in &parsed {
                std::hint::black_box(extract_document(
                    &e.doc.doc_id,
                    &e.doc.text,
                    &e.doc.entities,
                    &e.trees,
                    strategy,
                    model,
                    MissingParse::Skip,
                )?);
            }
            Ok(())
        })
    };
    let sdp = run(Strategy::SdpConstrained, None)?;
    let nn = match relnet {
        Some(m) => {
            let s = match m.config.output_mode {
                crate::relnet::OutputMode::SelectK => Strategy::NnFree,
                crate::relnet::OutputMode::Constrained3 => Strategy::NnConstrained,
            };
            run(s, Some(m))?
        }
        None => None,
    };

    let params = [
        tagger.map(|m| m.parameter_count() as u64),
        None,
        None,
        relnet.map(|m| m.parameter_count() as u64),
    ];
    let mut rows = Vec::new();
    for (i, samples) in [ner, ingest, sdp, nn].into_iter().enumerate() {
        let (name, ref_secs, ref_params) = TIMING_TABLE[i];
        let (mean, discarded) = samples
            .as_deref()
            .and_then(robust_mean)
            .map_or((None, 0), |(m, d)| (Some(m), d));
        rows.push(TimingRow {
            component: name.to_string(),
            seconds_per_line: mean,
            model_parameters: params[i],
            reference_seconds: ref_secs,
            reference_parameters: ref_params,
            samples: samples.unwrap_or_default(),
            discarded,
        });
    }
    Ok(rows)
}

/// Measured timings next to the published ones.
pub fn format_timing_table(rows: &[TimingRow]) -> String {
    let header = [
        "Component",
        "Time (Seconds)",
        "Model Size (Parameters)",
        "Reference Time",
        "Reference Size",
    ]
    .map(str::to_string);
    let na = || "N/A".to_string();
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.component.clone(),
                r.seconds_per_line
                    .map_or_else(|| "not measured".into(), |s| format!("{s:.6}")),
                r.model_parameters.map_or_else(na, |p| p.to_string()),
                r.reference_seconds.to_string(),
                r.reference_parameters.map_or_else(na, |p| p.to_string()),
            ]
        })
        .collect();
    render(&header, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(doc: &str, s: usize, e: usize, t: EntityType) -> SpanKey {
        SpanKey {
            doc_id: doc.into(),
            start: s,
            end: e,
            etype: t,
        }
    }

    #[test]
    fn zero_denominators() {
        let r = PrfRow::from_counts("x", 0, 0, 0);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        let r = PrfRow::from_counts("x", 0, 0, 5);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn exact_vs_overlap() {
        let gold = [key("d", 0, 10, EntityType::Person)];
        let pred = [key("d", 2, 10, EntityType::Person)];
        let exact = score_entities(&gold, &pred, MatchMode::Exact);
        assert_eq!((exact[0].tp, exact[0].fp, exact[0].fn_), (0, 1, 1));
        let loose = score_entities(&gold, &pred, MatchMode::Overlap);
        assert_eq!(loose[0].tp, 1);
        assert_eq!(exact.last().unwrap().class_or_method, "All Classes");
    }

    #[test]
    fn duplicate_prediction_counts_once() {
        let gold = [key("d", 0, 4, EntityType::Rank)];
        let pred = [
            key("d", 0, 4, EntityType::Rank),
            key("d", 0, 4, EntityType::Rank),
        ];
        let rows = score_entities(&gold, &pred, MatchMode::Exact);
        assert_eq!((rows[1].tp, rows[1].fp, rows[1].fn_), (1, 1, 0));
    }

    #[test]
    fn robust_mean_drops_far_outlier() {
        let (m, d) = robust_mean(&[1.0, 1.1, 0.9, 1.0, 50.0]).unwrap();
        assert_eq!(d, 1);
        assert!((m - 1.0).abs() < 1e-12);
        let (m, d) = robust_mean(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m, d), (2.0, 0));
        assert!(robust_mean(&[]).is_none());
    }

    #[test]
    fn table_layout() {
        let t = format_prf_table("Method", &[PrfRow::from_counts("A", 1, 1, 0)], 3);
        let first = t.lines().next().unwrap();
        assert!(first.starts_with("Method"));
        assert!(first.ends_with("F1 Score"));
        assert!(t.contains("0.500"));
    }
}
