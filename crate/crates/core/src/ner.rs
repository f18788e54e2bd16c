//! Named-entity tagging: a gold pass-through provider and a discrete-feature
//! linear-chain tagger trained with the averaged perceptron and decoded with
//! Viterbi under IOB transition constraints.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, EntitySpan, EntityType};
use crate::error::{Error, Result};
use crate::iob::{iob_to_spans, valid_transition, IobTag};
use crate::tokenize::{sentences, tokenize, Token};

const N_TAGS: usize = 9;
const FORMAT_HEADER: &str = "forcegraph-tagger v1";

/// Lexicons consulted by the feature extractor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Featurizer {
    /// Lowercased tokens seen inside gold Rank spans.
    pub rank_lexicon: BTreeSet<String>,
    /// Known organization names, each as a lowercased token sequence.
    pub org_gazetteer: BTreeSet<Vec<String>>,
}

impl Featurizer {
    /// Collect the rank lexicon from the Rank spans of `docs`.
    pub fn rank_lexicon_from(docs: &[&Document]) -> BTreeSet<String> {
        docs.iter()
            .flat_map(|d| d.entities.iter())
            .filter(|e| e.etype == EntityType::Rank)
            .flat_map(|e| tokenize(&e.surface))
            .map(|t| t.text.to_lowercase())
            .collect()
    }

    /// Parse a gazetteer file: one organization name per line.
    pub fn parse_gazetteer(source: &str) -> BTreeSet<Vec<String>> {
        source
            .lines()
            .map(|l| {
                tokenize(l.trim())
                    .into_iter()
                    .map(|t| t.text.to_lowercase())
                    .collect::<Vec<_>>()
            })
            .filter(|toks: &Vec<String>| !toks.is_empty())
            .collect()
    }

    fn gazetteer_hit(&self, lower: &[String], i: usize) -> bool {
        self.org_gazetteer.iter().any(|name| {
            let n = name.len();
            ((i + 1).saturating_sub(n)..=i)
                .any(|s| s + n <= lower.len() && lower[s..s + n] == name[..])
        })
    }

    /// Features for token `i` of a sentence.
    pub fn featurize_token(&self, tokens: &[Token], i: usize) -> Vec<String> {
        let lower: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
        self.featurize_lowered(tokens, &lower, i)
    }

    fn featurize_lowered(&self, tokens: &[Token], lower: &[String], i: usize) -> Vec<String> {
        let word = &tokens[i].text;
        let lw = &lower[i];
        let chars: Vec<char> = lw.chars().collect();
        let prefix: String = chars.iter().take(3).collect();
        let suffix: String = chars[chars.len().saturating_sub(3)..].iter().collect();
        let mut f = vec![
            "bias".to_string(),
            format!("w={lw}"),
            format!("shape={}", word_shape(word)),
            format!("sshape={}", short_shape(word)),
            format!("p3={prefix}"),
            format!("s3={suffix}"),
            format!("prev={}", if i == 0 { "<s>" } else { &lower[i - 1] }),
            format!("next={}", lower.get(i + 1).map_or("</s>", |s| s.as_str())),
        ];
        if word.chars().next().is_some_and(char::is_uppercase) {
            f.push("cap".into());
        }
        if self.rank_lexicon.contains(lw) {
            f.push("rank-lex".into());
        }
        if self.gazetteer_hit(lower, i) {
            f.push("org-gaz".into());
        }
        f
    }

    fn sentence_features(&self, tokens: &[Token]) -> Vec<Vec<String>> {
        let lower: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
        (0..tokens.len())
            .map(|i| self.featurize_lowered(tokens, &lower, i))
            .collect()
    }
}

/// `Nwaogbo` -> `Xxxxxxx`, `3` -> `d`.
pub fn word_shape(word: &str) -> String {
    word.chars()
        .map(|c| {
            if c.is_uppercase() {
                'X'
            } else if c.is_lowercase() {
                'x'
            } else if c.is_ascii_digit() {
                'd'
            } else {
                c
            }
        })
        .collect()
}

/// Word shape with repeated classes collapsed: `Nwaogbo` -> `Xx`.
pub fn short_shape(word: &str) -> String {
    let mut out = String::new();
    for c in word_shape(word).chars() {
        if !out.ends_with(c) {
            out.push(c);
        }
    }
    out
}

type Row = [f64; N_TAGS];

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    pub feature_weights: HashMap<String, Row>,
    /// `transition_weights[prev][next]`; invalid transitions are `-inf`.
    pub transition_weights: [Row; N_TAGS],
    /// Weights for the first tag of a sentence; `I-X` is `-inf`.
    pub start_weights: Row,
    pub featurizer: Featurizer,
    pub seed: u64,
    pub epochs: usize,
    pub config_hash: String,
}

fn blocked_transitions() -> ([Row; N_TAGS], Row) {
    let mut trans = [[0.0; N_TAGS]; N_TAGS];
    let mut start = [0.0; N_TAGS];
    for (p, row) in trans.iter_mut().enumerate() {
        for (n, w) in row.iter_mut().enumerate() {
            if !valid_transition(IobTag::from_index(p), IobTag::from_index(n)) {
                *w = f64::NEG_INFINITY;
            }
        }
    }
    for (n, w) in start.iter_mut().enumerate() {
        if !valid_transition(IobTag::O, IobTag::from_index(n)) {
            *w = f64::NEG_INFINITY;
        }
    }
    (trans, start)
}

impl TaggerModel {
    /// All-zero weights with invalid transitions blocked.
    pub fn zero(featurizer: Featurizer) -> Self {
        let (transition_weights, start_weights) = blocked_transitions();
        TaggerModel {
            feature_weights: HashMap::new(),
            transition_weights,
            start_weights,
            featurizer,
            seed: 0,
            epochs: 0,
            config_hash: String::new(),
        }
    }

    /// Count of finite, non-zero weights.
    pub fn parameter_count(&self) -> usize {
        let nz = |w: &f64| w.is_finite() && *w != 0.0;
        self.feature_weights
            .values()
            .flatten()
            .filter(|w| nz(w))
            .count()
            + self
                .transition_weights
                .iter()
                .flatten()
                .filter(|w| nz(w))
                .count()
            + self.start_weights.iter().filter(|w| nz(w)).count()
    }

    fn emissions(&self, feats: &[Vec<String>]) -> Vec<Row> {
        emissions(&self.feature_weights, feats)
    }

    /// Score of a complete tag sequence, for checking the decoder.
    pub fn sequence_score(&self, tokens: &[Token], tags: &[IobTag]) -> f64 {
        let em = self.emissions(&self.featurizer.sentence_features(tokens));
        let mut score = 0.0;
        for (i, tag) in tags.iter().enumerate() {
            let t = tag.index();
            score += em[i][t];
            score += if i == 0 {
                self.start_weights[t]
            } else {
                self.transition_weights[tags[i - 1].index()][t]
            };
        }
        score
    }

    /// Decode one sentence.
    pub fn viterbi_decode(&self, tokens: &[Token]) -> Vec<IobTag> {
        if tokens.is_empty() {
            return Vec::new();
        }
        let em = self.emissions(&self.featurizer.sentence_features(tokens));
        viterbi(&em, &self.transition_weights, &self.start_weights)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{FORMAT_HEADER}").unwrap();
        writeln!(out, "seed\t{}", self.seed).unwrap();
        writeln!(out, "epochs\t{}", self.epochs).unwrap();
        let hash = if self.config_hash.is_empty() {
            "-"
        } else {
            &self.config_hash
        };
        writeln!(out, "config_hash\t{hash}").unwrap();
        for w in &self.featurizer.rank_lexicon {
            writeln!(out, "rank\t{w}").unwrap();
        }
        for name in &self.featurizer.org_gazetteer {
            writeln!(out, "org\t{}", name.join(" ")).unwrap();
        }
        for (t, w) in self.start_weights.iter().enumerate() {
            writeln!(out, "start\t{}\t{w}", IobTag::from_index(t)).unwrap();
        }
        for (p, row) in self.transition_weights.iter().enumerate() {
            for (n, w) in row.iter().enumerate() {
                writeln!(
                    out,
                    "trans\t{}\t{}\t{w}",
                    IobTag::from_index(p),
                    IobTag::from_index(n)
                )
                .unwrap();
            }
        }
        let mut feats: Vec<&String> = self.feature_weights.keys().collect();
        feats.sort();
        for f in feats {
            for (t, w) in self.feature_weights[f].iter().enumerate() {
                if *w != 0.0 {
                    writeln!(out, "emit\t{f}\t{}\t{w}", IobTag::from_index(t)).unwrap();
                }
            }
        }
        out
    }

    pub fn from_text(src: &str) -> Result<Self> {
        let mut lines = src.lines();
        if lines.next() != Some(FORMAT_HEADER) {
            return Err(Error::ModelFormat(format!(
                "expected header {FORMAT_HEADER:?}"
            )));
        }
        let mut model = TaggerModel::zero(Featurizer::default());
        let bad = |n: usize, l: &str| Error::ModelFormat(format!("line {}: {l:?}", n + 2));
        let num = |s: &str, n: usize, l: &str| s.parse::<f64>().map_err(|_| bad(n, l));
        let tag = |s: &str, n: usize, l: &str| s.parse::<IobTag>().map_err(|_| bad(n, l));
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split('\t').collect();
            match f.as_slice() {
                ["seed", v] => model.seed = v.parse().map_err(|_| bad(n, line))?,
                ["epochs", v] => model.epochs = v.parse().map_err(|_| bad(n, line))?,
                ["config_hash", v] => {
                    model.config_hash = if *v == "-" {
                        String::new()
                    } else {
                        v.to_string()
                    }
                }
                ["rank", w] => {
                    model.featurizer.rank_lexicon.insert(w.to_string());
                }
                ["org", name] => {
                    model
                        .featurizer
                        .org_gazetteer
                        .insert(name.split(' ').map(str::to_string).collect());
                }
                ["start", t, w] => model.start_weights[tag(t, n, line)?.index()] = num(w, n, line)?,
                ["trans", p, t, w] => {
                    model.transition_weights[tag(p, n, line)?.index()][tag(t, n, line)?.index()] =
                        num(w, n, line)?
                }
                ["emit", feat, t, w] => {
                    let row = model
                        .feature_weights
                        .entry(feat.to_string())
                        .or_insert([0.0; N_TAGS]);
                    row[tag(t, n, line)?.index()] = num(w, n, line)?;
                }
                [""] => {}
                _ => return Err(bad(n, line)),
            }
        }
        Ok(model)
    }
}

fn emissions(weights: &HashMap<String, Row>, feats: &[Vec<String>]) -> Vec<Row> {
    feats
        .iter()
        .map(|fs| {
            let mut row = [0.0; N_TAGS];
            for f in fs {
                if let Some(w) = weights.get(f) {
                    for (r, x) in row.iter_mut().zip(w) {
                        *r += x;
                    }
                }
            }
            row
        })
        .collect()
}

/// Max-scoring path through emission rows with transition and start scores.
/// Ties keep the lowest tag index.
pub fn viterbi(emissions: &[Row], trans: &[Row; N_TAGS], start: &Row) -> Vec<IobTag> {
    let n = emissions.len();
    if n == 0 {
        return Vec::new();
    }
    let mut score = [f64::NEG_INFINITY; N_TAGS];
    for t in 0..N_TAGS {
        score[t] = start[t] + emissions[0][t];
    }
    let mut back = vec![[0usize; N_TAGS]; n];
    for i in 1..n {
        let mut next = [f64::NEG_INFINITY; N_TAGS];
        for t in 0..N_TAGS {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for p in 0..N_TAGS {
                let s = score[p] + trans[p][t];
                if s > best {
                    best = s;
                    arg = p;
                }
            }
            next[t] = best + emissions[i][t];
            back[i][t] = arg;
        }
        score = next;
    }
    let mut last = 0;
    for t in 1..N_TAGS {
        if score[t] > score[last] {
            last = t;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for i in (1..n).rev() {
        path[i - 1] = back[i][path[i]];
    }
    path.into_iter().map(IobTag::from_index).collect()
}

/// Accumulator for averaged-perceptron weights: `avg = w - acc / steps`.
struct Averaged {
    weights: HashMap<String, Row>,
    acc: HashMap<String, Row>,
    trans: [Row; N_TAGS],
    trans_acc: [Row; N_TAGS],
    start: Row,
    start_acc: Row,
    step: f64,
}

impl Averaged {
    fn bump_feat(&mut self, f: &str, t: usize, delta: f64) {
        self.weights.entry(f.to_string()).or_insert([0.0; N_TAGS])[t] += delta;
        self.acc.entry(f.to_string()).or_insert([0.0; N_TAGS])[t] += self.step * delta;
    }

    fn bump_trans(&mut self, p: Option<usize>, t: usize, delta: f64) {
        match p {
            None if self.start[t].is_finite() => {
                self.start[t] += delta;
                self.start_acc[t] += self.step * delta;
            }
            Some(p) if self.trans[p][t].is_finite() => {
                self.trans[p][t] += delta;
                self.trans_acc[p][t] += self.step * delta;
            }
            _ => {}
        }
    }

    fn update(&mut self, feats: &[Vec<String>], gold: &[usize], pred: &[usize]) {
        for i in 0..gold.len() {
            if gold[i] != pred[i] {
                for f in &feats[i] {
                    self.bump_feat(f, gold[i], 1.0);
                    self.bump_feat(f, pred[i], -1.0);
                }
            }
            let gp = (i > 0).then(|| gold[i - 1]);
            let pp = (i > 0).then(|| pred[i - 1]);
            if (gp, gold[i]) != (pp, pred[i]) {
                self.bump_trans(gp, gold[i], 1.0);
                self.bump_trans(pp, pred[i], -1.0);
            }
        }
    }

    fn finish(self) -> (HashMap<String, Row>, [Row; N_TAGS], Row) {
        let avg = |w: f64, a: f64| if w.is_finite() { w - a / self.step } else { w };
        let mut weights = HashMap::with_capacity(self.weights.len());
        for (f, row) in &self.weights {
            let acc = &self.acc[f];
            let mut out = [0.0; N_TAGS];
            for t in 0..N_TAGS {
                out[t] = avg(row[t], acc[t]);
            }
            if out.iter().any(|w| *w != 0.0) {
                weights.insert(f.clone(), out);
            }
        }
        let mut trans = self.trans;
        let mut start = self.start;
        for (p, row) in trans.iter_mut().enumerate() {
            for (t, w) in row.iter_mut().enumerate() {
                *w = avg(self.trans[p][t], self.trans_acc[p][t]);
            }
            start[p] = avg(self.start[p], self.start_acc[p]);
        }
        (weights, trans, start)
    }
}

/// Train on `(sentence tokens, gold tags)` pairs. The visiting order is
/// shuffled each epoch from `seed`.
pub fn train_tagger(
    corpus: &[(Vec<Token>, Vec<IobTag>)],
    featurizer: Featurizer,
    epochs: usize,
    seed: u64,
) -> Result<TaggerModel> {
    if corpus.is_empty() {
        return Err(Error::Empty("tagger training corpus".into()));
    }
    if epochs == 0 {
        return Err(Error::Config("tagger epochs must be at least 1".into()));
    }
    for (toks, tags) in corpus {
        if toks.len() != tags.len() {
            return Err(Error::Iob(format!(
                "{} tokens but {} tags",
                toks.len(),
                tags.len()
            )));
        }
    }
    let feats: Vec<Vec<Vec<String>>> = corpus
        .iter()
        .map(|(toks, _)| featurizer.sentence_features(toks))
        .collect();
    let gold: Vec<Vec<usize>> = corpus
        .iter()
        .map(|(_, tags)| tags.iter().map(|t| t.index()).collect())
        .collect();

    let (trans, start) = blocked_transitions();
    let mut acc = Averaged {
        weights: HashMap::new(),
        acc: HashMap::new(),
        trans,
        trans_acc: [[0.0; N_TAGS]; N_TAGS],
        start,
        start_acc: [0.0; N_TAGS],
        step: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            if !feats[k].is_empty() {
                let em = emissions(&acc.weights, &feats[k]);
                let pred: Vec<usize> = viterbi(&em, &acc.trans, &acc.start)
                    .into_iter()
                    .map(|t| t.index())
                    .collect();
                if pred != gold[k] {
                    acc.update(&feats[k], &gold[k], &pred);
                }
            }
            acc.step += 1.0;
        }
    }
    let (feature_weights, transition_weights, start_weights) = acc.finish();
    Ok(TaggerModel {
        feature_weights,
        transition_weights,
        start_weights,
        featurizer,
        seed,
        epochs,
        config_hash: String::new(),
    })
}

/// Where entities come from.
#[derive(Debug, Clone, Copy)]
pub enum NerMode<'a> {
    Gold,
    Model(&'a TaggerModel),
}

/// Entities for a document: the gold annotations, or the tagger's
/// predictions decoded sentence by sentence.
pub fn predict_entities(mode: NerMode<'_>, doc: &Document) -> Vec<EntitySpan> {
    match mode {
        NerMode::Gold => doc.entities.clone(),
        NerMode::Model(model) => {
            let tokens = tokenize(&doc.text);
            let mut tags = Vec::with_capacity(tokens.len());
            for sent in sentences(&tokens) {
                tags.extend(model.viterbi_decode(sent));
            }
            iob_to_spans(&doc.text, &tokens, &tags).unwrap_or_default()
        }
    }
}

/// Gold tag sequences for a document, one per sentence. Overlapping gold
/// entities are resolved by keeping the earlier (then longer) one.
pub fn gold_sentences(doc: &Document) -> Result<Vec<(Vec<Token>, Vec<IobTag>)>> {
    let tokens = tokenize(&doc.text);
    let entities = drop_overlaps(&doc.entities);
    let enc = crate::iob::spans_to_iob(&tokens, &entities)?;
    let tags = crate::iob::repair(&tokens, &enc.tags);
    let mut out = Vec::new();
    let mut offset = 0;
    for sent in sentences(&tokens) {
        out.push((sent.to_vec(), tags[offset..offset + sent.len()].to_vec()));
        offset += sent.len();
    }
    Ok(out)
}

/// Keep a non-overlapping subset of `entities`, preferring earlier starts
/// and then longer spans.
pub fn drop_overlaps(entities: &[EntitySpan]) -> Vec<EntitySpan> {
    let mut sorted: Vec<&EntitySpan> = entities.iter().collect();
    sorted.sort_by_key(|e| (e.start, std::cmp::Reverse(e.end)));
    let mut kept: Vec<EntitySpan> = Vec::new();
    let mut seen = HashSet::new();
    for e in sorted {
        if kept.iter().all(|k| k.end <= e.start || k.start >= e.end) && seen.insert(&e.id) {
            kept.push(e.clone());
        }
    }
    kept
}
