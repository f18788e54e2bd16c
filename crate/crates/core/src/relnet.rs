//! Small feedforward relation classifier.
//!
//! Each candidate person contributes one slot: a one-hot over the path
//! pattern vocabulary (tree path from the target entity to that person) with
//! the scaled path length appended. All slots go through the same first-layer
//! weights; the target's entity-type one-hot has its own first-layer weights.
//! A dense layer over the concatenated hidden units feeds a softmax that
//! either picks a person slot ([`OutputMode::SelectK`]) or chooses among
//! left flank / right flank / other ([`OutputMode::Constrained3`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, EntitySpan, EntityType};
use crate::depgraph::{span_path, DepTree, PathPattern};
use crate::error::{Error, Result};
use crate::relext::{attach, build_contexts, sdp_argmin, Attachment, SentenceContext, Strategy};

/// Maximum number of person slots.
pub const MAX_PERSONS: usize = 7;
const TYPE_DIM: usize = 3;
const FORMAT_HEADER: &str = "forcegraph-relnet v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutputMode {
    /// One output per person slot.
    #[serde(rename = "select-k")]
    SelectK,
    /// Left flank, right flank, or some other person.
    #[serde(rename = "constrained3")]
    Constrained3,
}

impl OutputMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputMode::SelectK => "select-k",
            OutputMode::Constrained3 => "constrained3",
        }
    }
}

impl fmt::Display for OutputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "select-k" => Ok(OutputMode::SelectK),
            "constrained3" => Ok(OutputMode::Constrained3),
            _ => Err(Error::Config(format!("unknown output mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative given the pre-activation.
    fn grad(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - x.tanh().powi(2),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            _ => Err(Error::Config(format!("unknown activation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelNetConfig {
    pub output_mode: OutputMode,
    pub hidden: usize,
    pub activation: Activation,
    pub min_count: usize,
    /// Multiplier on the raw edge count before it enters a slot.
    pub length_scale: f64,
    /// Keep traversal direction in path-pattern keys.
    pub directed: bool,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Train on targets with no in-sentence gold person, aiming them at an
    /// empty slot (SelectK) or at "other" (Constrained3).
    pub train_unrelated: bool,
    pub config_hash: String,
}

impl Default for RelNetConfig {
    fn default() -> Self {
        RelNetConfig {
            output_mode: OutputMode::Constrained3,
            hidden: 8,
            activation: Activation::Relu,
            min_count: 2,
            length_scale: 0.1,
            directed: true,
            learning_rate: 0.05,
            epochs: 300,
            batch_size: 16,
            seed: 0,
            train_unrelated: true,
            config_hash: String::new(),
        }
    }
}

/// Path-pattern vocabulary. Known patterns get dense indices in sorted
/// order; everything else shares the final "unknown" index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternVocab {
    index: BTreeMap<String, usize>,
    pub min_count: usize,
    pub directed: bool,
}

impl PatternVocab {
    /// Vocabulary size including the unknown bucket.
    pub fn size(&self) -> usize {
        self.index.len() + 1
    }

    pub fn unknown_index(&self) -> usize {
        self.index.len()
    }

    pub fn lookup(&self, pattern: &PathPattern) -> usize {
        self.lookup_key(&pattern.key(self.directed))
    }

    pub fn lookup_key(&self, key: &str) -> usize {
        self.index.get(key).copied().unwrap_or(self.unknown_index())
    }

    pub fn patterns(&self) -> impl Iterator<Item = (&str, usize)> {
        self.index.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Keep patterns seen at least `min_count` times.
pub fn build_vocab<'a>(
    patterns: impl IntoIterator<Item = &'a PathPattern>,
    min_count: usize,
    directed: bool,
) -> Result<PatternVocab> {
    if min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for p in patterns {
        *counts.entry(p.key(directed)).or_default() += 1;
    }
    let index = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .enumerate()
        .map(|(i, (k, _))| (k, i))
        .collect();
    Ok(PatternVocab {
        index,
        min_count,
        directed,
    })
}

/// Network input for one target entity.
#[derive(Debug, Clone, PartialEq)]
pub struct RelCandidateFeatures {
    /// `MAX_PERSONS` slots of `vocab.size() + 1` values; absent persons are
    /// all zero.
    pub slots: Vec<Vec<f64>>,
    pub type_onehot: [f64; TYPE_DIM],
    /// Persons in the sentence before truncation.
    pub n_persons: usize,
    pub truncated: bool,
}

/// Build slots for `target` against the sentence's persons in order.
pub fn featurize(
    ctx: &SentenceContext,
    target: &EntitySpan,
    vocab: &PatternVocab,
    length_scale: f64,
) -> Result<RelCandidateFeatures> {
    let tree = ctx
        .tree
        .as_ref()
        .ok_or_else(|| Error::Prerequisite("relation classifier needs a dependency tree".into()))?;
    let type_index = target
        .etype
        .target_index()
        .ok_or_else(|| Error::Config("Person entities are not relation targets".into()))?;
    let dim = vocab.size() + 1;
    let mut slots = vec![vec![0.0; dim]; MAX_PERSONS];
    let target_toks = ctx.tokens_of(target);
    for (slot, person) in slots.iter_mut().zip(&ctx.persons) {
        let path = span_path(tree, target_toks, ctx.tokens_of(person))?;
        slot[vocab.lookup(&path)] = 1.0;
        slot[dim - 1] = path.length() as f64 * length_scale;
    }
    let mut type_onehot = [0.0; TYPE_DIM];
    type_onehot[type_index] = 1.0;
    Ok(RelCandidateFeatures {
        slots,
        type_onehot,
        n_persons: ctx.persons.len(),
        truncated: ctx.persons.len() > MAX_PERSONS,
    })
}

/// Trainable parameters, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Shared slot weights, `hidden x slot_dim`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Type weights, `hidden x 3`.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    /// Dense layer, `out x (MAX_PERSONS * hidden + hidden)`.
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

impl Params {
    pub const GROUPS: [&'static str; 6] = ["w1", "b1", "w2", "b2", "w3", "b3"];

    fn zeros_like(&self) -> Params {
        Params {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
            w3: vec![0.0; self.w3.len()],
            b3: vec![0.0; self.b3.len()],
        }
    }

    pub fn groups(&self) -> [&Vec<f64>; 6] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.w3, &self.b3]
    }

    pub fn groups_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w3,
            &mut self.b3,
        ]
    }

    fn axpy(&mut self, scale: f64, other: &Params) {
        for (dst, src) in self.groups_mut().into_iter().zip(other.groups()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }
}

struct Cache {
    slot_pre: Vec<Vec<f64>>,
    type_pre: Vec<f64>,
    hidden: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelNetModel {
    pub config: RelNetConfig,
    pub vocab: PatternVocab,
    pub params: Params,
}

impl RelNetModel {
    /// Xavier-uniform weights and small uniform biases, drawn from `seed`.
    /// The vocabulary's `min_count` and `directed` settings override the
    /// config's.
    pub fn new(mut config: RelNetConfig, vocab: PatternVocab, seed: u64) -> Self {
        config.min_count = vocab.min_count;
        config.directed = vocab.directed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = config.hidden;
        let slot_dim = vocab.size() + 1;
        let out = Self::out_dim_for(config.output_mode);
        let concat = MAX_PERSONS * h + h;
        let mut init = |n: usize, fan_in: usize, fan_out: usize| -> Vec<f64> {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-a..a)).collect()
        };
        let w1 = init(h * slot_dim, slot_dim, h);
        let w2 = init(h * TYPE_DIM, TYPE_DIM, h);
        let w3 = init(out * concat, concat, out);
        let mut bias =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect() };
        let b1 = bias(h);
        let b2 = bias(h);
        let b3 = bias(out);
        RelNetModel {
            config,
            vocab,
            params: Params {
                w1,
                b1,
                w2,
                b2,
                w3,
                b3,
            },
        }
    }

    fn out_dim_for(mode: OutputMode) -> usize {
        match mode {
            OutputMode::SelectK => MAX_PERSONS,
            OutputMode::Constrained3 => 3,
        }
    }

    pub fn out_dim(&self) -> usize {
        Self::out_dim_for(self.config.output_mode)
    }

    pub fn slot_dim(&self) -> usize {
        self.vocab.size() + 1
    }

    pub fn parameter_count(&self) -> usize {
        self.params.groups().iter().map(|g| g.len()).sum()
    }

    fn check_dims(&self, x: &RelCandidateFeatures) -> Result<()> {
        if x.slots.len() != MAX_PERSONS {
            return Err(Error::Dimension(format!(
                "expected {MAX_PERSONS} slots, got {}",
                x.slots.len()
            )));
        }
        if let Some(bad) = x.slots.iter().find(|s| s.len() != self.slot_dim()) {
            return Err(Error::Dimension(format!(
                "slot has {} values, model expects {}",
                bad.len(),
                self.slot_dim()
            )));
        }
        Ok(())
    }

    fn forward_cached(&self, x: &RelCandidateFeatures) -> Result<Cache> {
        self.check_dims(x)?;
        let h = self.config.hidden;
        let act = self.config.activation;
        let d = self.slot_dim();
        let p = &self.params;
        let mut slot_pre = Vec::with_capacity(MAX_PERSONS);
        let mut hidden = Vec::with_capacity(MAX_PERSONS * h + h);
        for slot in &x.slots {
            let pre: Vec<f64> = (0..h)
                .map(|j| p.b1[j] + dot(&p.w1[j * d..(j + 1) * d], slot))
                .collect();
            hidden.extend(pre.iter().map(|&u| act.apply(u)));
            slot_pre.push(pre);
        }
        let type_pre: Vec<f64> = (0..h)
            .map(|j| p.b2[j] + dot(&p.w2[j * TYPE_DIM..(j + 1) * TYPE_DIM], &x.type_onehot))
            .collect();
        hidden.extend(type_pre.iter().map(|&u| act.apply(u)));
        let width = hidden.len();
        let logits: Vec<f64> = (0..self.out_dim())
            .map(|o| p.b3[o] + dot(&p.w3[o * width..(o + 1) * width], &hidden))
            .collect();
        Ok(Cache {
            slot_pre,
            type_pre,
            hidden,
            probs: softmax(&logits),
        })
    }

    /// Output distribution over slots (SelectK) or left/right/other.
    pub fn forward(&self, x: &RelCandidateFeatures) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x)?.probs)
    }

    /// Cross-entropy `-sum(t * log p)`. An all-zero target has zero loss.
    pub fn loss(&self, x: &RelCandidateFeatures, target: &[f64]) -> Result<f64> {
        let cache = self.forward_cached(x)?;
        Ok(cross_entropy(&cache.probs, target))
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, x: &RelCandidateFeatures, target: &[f64]) -> Result<(f64, Params)> {
        if target.len() != self.out_dim() {
            return Err(Error::Dimension(format!(
                "target has {} entries, model outputs {}",
                target.len(),
                self.out_dim()
            )));
        }
        let cache = self.forward_cached(x)?;
        let loss = cross_entropy(&cache.probs, target);
        let h = self.config.hidden;
        let d = self.slot_dim();
        let act = self.config.activation;
        let p = &self.params;
        let mut g = p.zeros_like();

        let mass: f64 = target.iter().sum();
        let dlogits: Vec<f64> = cache
            .probs
            .iter()
            .zip(target)
            .map(|(&pr, &t)| pr * mass - t)
            .collect();
        let width = cache.hidden.len();
        let mut dhidden = vec![0.0; width];
        for (o, &dz) in dlogits.iter().enumerate() {
            g.b3[o] = dz;
            let row = &p.w3[o * width..(o + 1) * width];
            for m in 0..width {
                g.w3[o * width + m] = dz * cache.hidden[m];
                dhidden[m] += row[m] * dz;
            }
        }
        for (k, slot) in x.slots.iter().enumerate() {
            for j in 0..h {
                let du = dhidden[k * h + j] * act.grad(cache.slot_pre[k][j]);
                if du == 0.0 {
                    continue;
                }
                g.b1[j] += du;
                for (gw, &xv) in g.w1[j * d..(j + 1) * d].iter_mut().zip(slot) {
                    *gw += du * xv;
                }
            }
        }
        for j in 0..h {
            let du = dhidden[MAX_PERSONS * h + j] * act.grad(cache.type_pre[j]);
            g.b2[j] += du;
            for (gw, &xv) in g.w2[j * TYPE_DIM..(j + 1) * TYPE_DIM]
                .iter_mut()
                .zip(&x.type_onehot)
            {
                *gw += du * xv;
            }
        }
        Ok((loss, g))
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        writeln!(out, "{FORMAT_HEADER}").unwrap();
        let hash = if c.config_hash.is_empty() {
            "-"
        } else {
            &c.config_hash
        };
        for (k, v) in [
            ("config_hash", hash.to_string()),
            ("seed", c.seed.to_string()),
            ("output_mode", c.output_mode.to_string()),
            ("activation", c.activation.as_str().to_string()),
            ("hidden", c.hidden.to_string()),
            ("max_persons", MAX_PERSONS.to_string()),
            ("min_count", c.min_count.to_string()),
            ("length_scale", c.length_scale.to_string()),
            ("directed", c.directed.to_string()),
            ("learning_rate", c.learning_rate.to_string()),
            ("epochs", c.epochs.to_string()),
            ("batch_size", c.batch_size.to_string()),
            ("train_unrelated", c.train_unrelated.to_string()),
            ("vocab_size", self.vocab.size().to_string()),
            ("parameters", self.parameter_count().to_string()),
        ] {
            writeln!(out, "{k}\t{v}").unwrap();
        }
        for (key, idx) in self.vocab.patterns() {
            writeln!(out, "pattern\t{idx}\t{key}").unwrap();
        }
        for (name, values) in Params::GROUPS.iter().zip(self.params.groups()) {
            let joined: Vec<String> = values.iter().map(f64::to_string).collect();
            writeln!(out, "{name}\t{}", joined.join(" ")).unwrap();
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
        let mut fields: HashMap<String, String> = HashMap::new();
        let mut patterns = BTreeMap::new();
        let mut groups: HashMap<String, Vec<f64>> = HashMap::new();
        for (n, line) in lines.enumerate() {
            let bad = || Error::ModelFormat(format!("line {}: {line:?}", n + 2));
            let mut parts = line.splitn(3, '\t');
            let key = parts.next().unwrap_or_default();
            match key {
                "" => continue,
                "pattern" => {
                    let idx: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                    let pat = parts.next().ok_or_else(bad)?;
                    patterns.insert(pat.to_string(), idx);
                }
                k if Params::GROUPS.contains(&k) => {
                    let rest = parts.next().unwrap_or_default();
                    let values = rest
                        .split(' ')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<f64>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>>>()?;
                    groups.insert(k.to_string(), values);
                }
                k => {
                    fields.insert(k.to_string(), parts.next().ok_or_else(bad)?.to_string());
                }
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| Error::ModelFormat(format!("missing field {k}")))
        };
        fn parse<T: FromStr>(k: &str, v: String) -> Result<T> {
            v.parse()
                .map_err(|_| Error::ModelFormat(format!("bad value for {k}: {v:?}")))
        }
        let hash = get("config_hash")?;
        let config = RelNetConfig {
            output_mode: get("output_mode")?.parse()?,
            hidden: parse("hidden", get("hidden")?)?,
            activation: get("activation")?.parse()?,
            min_count: parse("min_count", get("min_count")?)?,
            length_scale: parse("length_scale", get("length_scale")?)?,
            directed: parse("directed", get("directed")?)?,
            learning_rate: parse("learning_rate", get("learning_rate")?)?,
            epochs: parse("epochs", get("epochs")?)?,
            batch_size: parse("batch_size", get("batch_size")?)?,
            seed: parse("seed", get("seed")?)?,
            train_unrelated: parse("train_unrelated", get("train_unrelated")?)?,
            config_hash: if hash == "-" { String::new() } else { hash },
        };
        let max_persons: usize = parse("max_persons", get("max_persons")?)?;
        if max_persons != MAX_PERSONS {
            return Err(Error::Dimension(format!(
                "model has {max_persons} person slots, this build supports {MAX_PERSONS}"
            )));
        }
        let vocab = PatternVocab {
            index: patterns,
            min_count: config.min_count,
            directed: config.directed,
        };
        let vocab_size: usize = parse("vocab_size", get("vocab_size")?)?;
        if vocab.size() != vocab_size {
            return Err(Error::ModelFormat(format!(
                "vocab_size says {vocab_size}, found {} patterns plus unknown",
                vocab.size() - 1
            )));
        }
        let mut take = |k: &str| {
            groups
                .remove(k)
                .ok_or_else(|| Error::ModelFormat(format!("missing weights {k}")))
        };
        let params = Params {
            w1: take("w1")?,
            b1: take("b1")?,
            w2: take("w2")?,
            b2: take("b2")?,
            w3: take("w3")?,
            b3: take("b3")?,
        };
        let model = RelNetModel {
            config,
            vocab,
            params,
        };
        let expected = RelNetModel::new(model.config.clone(), model.vocab.clone(), 0);
        for ((name, got), want) in Params::GROUPS
            .iter()
            .zip(model.params.groups())
            .zip(expected.params.groups())
        {
            if got.len() != want.len() {
                return Err(Error::Dimension(format!(
                    "{name} has {} weights, expected {}",
                    got.len(),
                    want.len()
                )));
            }
        }
        Ok(model)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn cross_entropy(probs: &[f64], target: &[f64]) -> f64 {
    probs
        .iter()
        .zip(target)
        .filter(|(_, &t)| t != 0.0)
        .map(|(&p, &t)| -t * p.max(f64::MIN_POSITIVE).ln())
        .sum()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// One training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: RelCandidateFeatures,
    pub target: Vec<f64>,
}

/// Mean loss over a dataset.
pub fn mean_loss(model: &RelNetModel, dataset: &[Example]) -> Result<f64> {
    let mut total = 0.0;
    for ex in dataset {
        total += model.loss(&ex.features, &ex.target)?;
    }
    Ok(total / dataset.len().max(1) as f64)
}

/// Mini-batch gradient descent on mean cross-entropy. Returns the loss curve:
/// the initial mean loss followed by the mean loss after each epoch.
pub fn train(
    model: &mut RelNetModel,
    dataset: &[Example],
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if dataset.is_empty() {
        return Err(Error::Empty("relation training set".into()));
    }
    let batch = model.config.batch_size.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut curve = vec![mean_loss(model, dataset)?];
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut grad = model.params.zeros_like();
            for &i in chunk {
                let (_, g) = model.loss_and_grad(&dataset[i].features, &dataset[i].target)?;
                grad.axpy(1.0, &g);
            }
            model
                .params
                .axpy(-learning_rate / chunk.len() as f64, &grad);
        }
        let loss = mean_loss(model, dataset)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "loss is {loss} after epoch {}; the learning rate {learning_rate} is probably too high",
                epoch + 1
            )));
        }
        curve.push(loss);
    }
    Ok(curve)
}

/// Fraction of examples whose argmax matches the target's argmax. All-zero
/// targets are skipped.
pub fn accuracy(model: &RelNetModel, dataset: &[Example]) -> Result<f64> {
    let mut hits = 0;
    let mut n = 0;
    for ex in dataset {
        if ex.target.iter().all(|&t| t == 0.0) {
            continue;
        }
        n += 1;
        if argmax(&model.forward(&ex.features)?) == argmax(&ex.target) {
            hits += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { hits as f64 / n as f64 })
}

/// In-sentence gold person for each target of `ctx`, by persons index.
fn gold_persons(doc: &Document, ctx: &SentenceContext) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    for target in &ctx.targets {
        let best = doc
            .relations
            .iter()
            .filter_map(|r| {
                let other = if r.arg1 == target.id {
                    &r.arg2
                } else if r.arg2 == target.id {
                    &r.arg1
                } else {
                    return None;
                };
                ctx.persons.iter().position(|p| &p.id == other)
            })
            .min();
        if let Some(i) = best {
            out.insert(target.id.clone(), i);
        }
    }
    out
}

/// Every (target, person) path pattern in the first `MAX_PERSONS` slots of
/// each parsed sentence.
pub fn collect_patterns(doc: &Document, trees: &[DepTree]) -> Vec<PathPattern> {
    let mut out = Vec::new();
    if trees.is_empty() {
        return out;
    }
    for ctx in build_contexts(&doc.text, &doc.entities, trees) {
        let Some(tree) = ctx.tree.as_ref() else {
            continue;
        };
        for target in &ctx.targets {
            for person in ctx.persons.iter().take(MAX_PERSONS) {
                if let Ok(p) = span_path(tree, ctx.tokens_of(target), ctx.tokens_of(person)) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Training target for one entity.
pub fn training_target(
    mode: OutputMode,
    ctx: &SentenceContext,
    target: &EntitySpan,
    gold: Option<usize>,
    train_unrelated: bool,
) -> Option<Vec<f64>> {
    let n = ctx.persons.len();
    let dim = RelNetModel::out_dim_for(mode);
    let mut t = vec![0.0; dim];
    if n > MAX_PERSONS {
        return Some(t);
    }
    match (mode, gold) {
        (_, None) if !train_unrelated => return None,
        (OutputMode::SelectK, Some(g)) => t[g] = 1.0,
        (OutputMode::SelectK, None) => {
            if n < MAX_PERSONS {
                t[n] = 1.0;
            }
        }
        (OutputMode::Constrained3, Some(g)) => {
            let (l, r) = ctx.flanks(target);
            let slot = if Some(g) == l {
                0
            } else if Some(g) == r {
                1
            } else {
                2
            };
            t[slot] = 1.0;
        }
        (OutputMode::Constrained3, None) => t[2] = 1.0,
    }
    Some(t)
}

/// Training examples from a document with gold entities and relations.
pub fn examples_from_document(
    doc: &Document,
    trees: &[DepTree],
    vocab: &PatternVocab,
    config: &RelNetConfig,
) -> Result<Vec<Example>> {
    let mut out = Vec::new();
    if trees.is_empty() {
        return Ok(out);
    }
    for ctx in build_contexts(&doc.text, &doc.entities, trees) {
        if ctx.persons.is_empty() {
            continue;
        }
        let gold = gold_persons(doc, &ctx);
        for target in &ctx.targets {
            let g = gold.get(&target.id).copied();
            let Some(t) =
                training_target(config.output_mode, &ctx, target, g, config.train_unrelated)
            else {
                continue;
            };
            out.push(Example {
                features: featurize(&ctx, target, vocab, config.length_scale)?,
                target: t,
            });
        }
    }
    Ok(out)
}

/// Attach `target` to the person the classifier picks, or abstain.
pub fn predict_person(
    model: &RelNetModel,
    ctx: &SentenceContext,
    target: &EntitySpan,
) -> Result<Option<Attachment>> {
    if ctx.persons.is_empty() {
        return Ok(None);
    }
    let x = featurize(ctx, target, &model.vocab, model.config.length_scale)?;
    let probs = model.forward(&x)?;
    let choice = argmax(&probs);
    let (person, strategy) = match model.config.output_mode {
        OutputMode::SelectK => {
            let present = ctx.persons.len().min(MAX_PERSONS);
            ((choice < present).then_some(choice), Strategy::NnFree)
        }
        OutputMode::Constrained3 => {
            let (l, r) = ctx.flanks(target);
            let picked = match choice {
                0 => l,
                1 => r,
                _ => {
                    let others: Vec<usize> = (0..ctx.persons.len())
                        .filter(|&i| Some(i) != l && Some(i) != r)
                        .collect();
                    sdp_argmin(ctx, target, &others)?
                }
            };
            (picked, Strategy::NnConstrained)
        }
    };
    attach(target, person.map(|i| &ctx.persons[i]), strategy).map(Some)
}

/// Non-person entity type index helper for building the type one-hot.
pub fn type_onehot(etype: EntityType) -> Option<[f64; TYPE_DIM]> {
    etype.target_index().map(|i| {
        let mut v = [0.0; TYPE_DIM];
        v[i] = 1.0;
        v
    })
}
