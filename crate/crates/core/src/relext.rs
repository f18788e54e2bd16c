//! Person attachment for non-person entities: nearest person, shortest
//! dependency path (free or restricted to the flanking persons), and the
//! learned classifier in [`crate::relnet`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::{EntitySpan, EntityType, RelType};
use crate::depgraph::{span_path, DepTree};
use crate::error::{Error, Result};
use crate::relnet::{OutputMode, RelNetModel};
use crate::tokenize::{sentences, tokenize, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "nearest-person")]
    NearestPerson,
    #[serde(rename = "sdp-free")]
    SdpFree,
    #[serde(rename = "sdp-constrained")]
    SdpConstrained,
    #[serde(rename = "nn-free")]
    NnFree,
    #[serde(rename = "nn-constrained")]
    NnConstrained,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::NearestPerson,
        Strategy::SdpFree,
        Strategy::SdpConstrained,
        Strategy::NnFree,
        Strategy::NnConstrained,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::NearestPerson => "nearest-person",
            Strategy::SdpFree => "sdp-free",
            Strategy::SdpConstrained => "sdp-constrained",
            Strategy::NnFree => "nn-free",
            Strategy::NnConstrained => "nn-constrained",
        }
    }

    /// Row label in evaluation tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Strategy::NearestPerson => "Nearest Person (Baseline)",
            Strategy::SdpFree => "Shortest Dep. Path (No constraint)",
            Strategy::SdpConstrained => "Shortest Dep. Path (With constraint)",
            Strategy::NnFree => "Neural Network (No constraint)",
            Strategy::NnConstrained => "Neural Network (With constraint)",
        }
    }

    pub fn needs_tree(self) -> bool {
        !matches!(self, Strategy::NearestPerson)
    }

    /// The classifier output mode this strategy uses, if any.
    pub fn output_mode(self) -> Option<OutputMode> {
        match self {
            Strategy::NnFree => Some(OutputMode::SelectK),
            Strategy::NnConstrained => Some(OutputMode::Constrained3),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

/// What to do with a document that has no parse when the strategy needs one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingParse {
    #[default]
    Fallback,
    Skip,
    Error,
}

impl FromStr for MissingParse {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fallback" => Ok(MissingParse::Fallback),
            "skip" => Ok(MissingParse::Skip),
            "error" => Ok(MissingParse::Error),
            _ => Err(Error::Config(format!("unknown missing-parse policy {s:?}"))),
        }
    }
}

/// A sentence with its entities split into persons and targets.
#[derive(Debug, Clone)]
pub struct SentenceContext {
    pub sent_index: usize,
    pub tokens: Vec<Token>,
    pub tree: Option<DepTree>,
    /// Person entities sorted by start offset.
    pub persons: Vec<EntitySpan>,
    /// Non-person entities sorted by start offset.
    pub targets: Vec<EntitySpan>,
    /// Token indices (within this sentence) covered by each entity id.
    pub entity_tokens: HashMap<String, Vec<usize>>,
}

impl SentenceContext {
    pub fn tokens_of(&self, entity: &EntitySpan) -> &[usize] {
        self.entity_tokens
            .get(&entity.id)
            .map_or(&[], Vec::as_slice)
    }

    /// Tree path length between two entities of this sentence.
    pub fn path_length(&self, a: &EntitySpan, b: &EntitySpan) -> Result<usize> {
        let tree = self
            .tree
            .as_ref()
            .ok_or_else(|| Error::Prerequisite("sentence has no dependency tree".into()))?;
        Ok(span_path(tree, self.tokens_of(a), self.tokens_of(b))?.length())
    }

    /// The nearest person starting before `target` and the nearest starting
    /// at or after it.
    pub fn flanks(&self, target: &EntitySpan) -> (Option<usize>, Option<usize>) {
        let split = self.persons.partition_point(|p| p.start < target.start);
        let left = split.checked_sub(1);
        let right = (split < self.persons.len()).then_some(split);
        (left, right)
    }
}

/// Split a document into sentence contexts. With trees, sentences and tokens
/// come from the parse; otherwise from [`tokenize`]. Each entity belongs to
/// the first sentence any of its tokens falls in.
pub fn build_contexts(
    text: &str,
    entities: &[EntitySpan],
    trees: &[DepTree],
) -> Vec<SentenceContext> {
    let mut contexts: Vec<SentenceContext> = if trees.is_empty() {
        let tokens = tokenize(text);
        sentences(&tokens)
            .into_iter()
            .map(|s| SentenceContext {
                sent_index: s[0].sent_index,
                tokens: s.to_vec(),
                tree: None,
                persons: Vec::new(),
                targets: Vec::new(),
                entity_tokens: HashMap::new(),
            })
            .collect()
    } else {
        trees
            .iter()
            .map(|t| SentenceContext {
                sent_index: t.sent_index,
                tokens: t.as_tokens(),
                tree: Some(t.clone()),
                persons: Vec::new(),
                targets: Vec::new(),
                entity_tokens: HashMap::new(),
            })
            .collect()
    };

    for ent in entities {
        let home = contexts.iter_mut().find_map(|ctx| {
            let covered: Vec<usize> = ctx
                .tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| t.start < ent.end && t.end > ent.start)
                .map(|(i, _)| i)
                .collect();
            (!covered.is_empty()).then_some((ctx, covered))
        });
        match home {
            Some((ctx, covered)) => {
                ctx.entity_tokens.insert(ent.id.clone(), covered);
                if ent.etype == EntityType::Person {
                    ctx.persons.push(ent.clone());
                } else {
                    ctx.targets.push(ent.clone());
                }
            }
            None => warn!(
                "entity {} ({:?}) matches no token; ignored",
                ent.id, ent.surface
            ),
        }
    }
    for ctx in &mut contexts {
        ctx.persons.sort_by_key(|e| (e.start, e.end));
        ctx.targets.sort_by_key(|e| (e.start, e.end));
    }
    contexts
}

/// A predicted relation from a non-person entity to a person. `person` is
/// `None` when a classifier strategy abstained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub doc_id: String,
    pub target: EntitySpan,
    pub person: Option<EntitySpan>,
    pub rtype: RelType,
    pub strategy: Strategy,
}

/// Relation type implied by a non-person entity class.
pub fn type_map(etype: EntityType) -> Result<RelType> {
    RelType::for_target(etype)
        .ok_or_else(|| Error::Config("Person entities are not relation targets".into()))
}

pub(crate) fn attach(
    target: &EntitySpan,
    person: Option<&EntitySpan>,
    strategy: Strategy,
) -> Result<Attachment> {
    Ok(Attachment {
        doc_id: String::new(),
        target: target.clone(),
        person: person.cloned(),
        rtype: type_map(target.etype)?,
        strategy,
    })
}

/// The first person starting at or after the target's end; failing that, the
/// person closest in characters (ties to the leftmost).
pub fn nearest_person(ctx: &SentenceContext, target: &EntitySpan) -> Result<Option<Attachment>> {
    if ctx.persons.is_empty() {
        return Ok(None);
    }
    let chosen = ctx
        .persons
        .iter()
        .find(|p| p.start >= target.end)
        .or_else(|| {
            ctx.persons
                .iter()
                .min_by_key(|p| (p.distance(target), p.start))
        });
    attach(target, chosen, Strategy::NearestPerson).map(Some)
}

/// Pick the person with the shortest tree path to `target`, among all
/// persons or only the two flanking ones. Ties go to the smaller char
/// distance, then the leftmost person. Never abstains.
pub fn sdp_attach(
    ctx: &SentenceContext,
    target: &EntitySpan,
    constrained: bool,
) -> Result<Option<Attachment>> {
    if ctx.tree.is_none() {
        return Err(Error::Prerequisite(format!(
            "sentence {} has no dependency tree",
            ctx.sent_index
        )));
    }
    let candidates: Vec<usize> = if constrained {
        let (l, r) = ctx.flanks(target);
        l.into_iter().chain(r).collect()
    } else {
        (0..ctx.persons.len()).collect()
    };
    let strategy = if constrained {
        Strategy::SdpConstrained
    } else {
        Strategy::SdpFree
    };
    let best = sdp_argmin(ctx, target, &candidates)?;
    match best {
        Some(i) => attach(target, Some(&ctx.persons[i]), strategy).map(Some),
        None => Ok(None),
    }
}

/// Index into `ctx.persons` of the shortest-path candidate.
pub(crate) fn sdp_argmin(
    ctx: &SentenceContext,
    target: &EntitySpan,
    candidates: &[usize],
) -> Result<Option<usize>> {
    let mut best: Option<((usize, usize, usize), usize)> = None;
    for &i in candidates {
        let p = &ctx.persons[i];
        let key = (ctx.path_length(target, p)?, p.distance(target), p.start);
        if best.is_none_or(|(k, _)| key < k) {
            best = Some((key, i));
        }
    }
    Ok(best.map(|(_, i)| i))
}

/// Run one strategy over a document's entities.
pub fn extract_document(
    doc_id: &str,
    text: &str,
    entities: &[EntitySpan],
    trees: &[DepTree],
    strategy: Strategy,
    model: Option<&RelNetModel>,
    missing_parse: MissingParse,
) -> Result<Vec<Attachment>> {
    if let Some(mode) = strategy.output_mode() {
        let model = model.ok_or_else(|| {
            Error::Prerequisite(format!(
                "strategy {strategy} needs a trained relation model"
            ))
        })?;
        if model.config.output_mode != mode {
            return Err(Error::Prerequisite(format!(
                "strategy {strategy} needs a {mode} model, got {}",
                model.config.output_mode
            )));
        }
    }
    let mut effective = strategy;
    if strategy.needs_tree() && trees.is_empty() {
        match missing_parse {
            MissingParse::Error => {
                return Err(Error::Prerequisite(format!(
                    "{doc_id}: strategy {strategy} needs a dependency parse"
                )))
            }
            MissingParse::Skip => return Ok(Vec::new()),
            MissingParse::Fallback => {
                warn!("{doc_id}: no parse, falling back to nearest-person");
                effective = Strategy::NearestPerson;
            }
        }
    }

    let mut out = Vec::new();
    for ctx in build_contexts(text, entities, trees) {
        if ctx.persons.is_empty() {
            continue;
        }
        for target in &ctx.targets {
            let att = match effective {
                Strategy::NearestPerson => nearest_person(&ctx, target)?,
                Strategy::SdpFree => sdp_attach(&ctx, target, false)?,
                Strategy::SdpConstrained => sdp_attach(&ctx, target, true)?,
                Strategy::NnFree | Strategy::NnConstrained => {
                    crate::relnet::predict_person(model.expect("checked above"), &ctx, target)?
                }
            };
            if let Some(mut att) = att {
                att.doc_id = doc_id.to_string();
                out.push(att);
            }
        }
    }
    Ok(out)
}
