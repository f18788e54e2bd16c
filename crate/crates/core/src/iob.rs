//! IOB tags and the conversion between entity spans and tag sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{EntitySpan, EntityType};
use crate::error::{Error, Result};
use crate::text::CharIndex;
use crate::tokenize::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Per,
    Org,
    Rnk,
    Ttl,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Per, Label::Org, Label::Rnk, Label::Ttl];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Per => "PER",
            Label::Org => "ORG",
            Label::Rnk => "RNK",
            Label::Ttl => "TTL",
        }
    }

    pub fn entity_type(self) -> EntityType {
        match self {
            Label::Per => EntityType::Person,
            Label::Org => EntityType::Organization,
            Label::Rnk => EntityType::Rank,
            Label::Ttl => EntityType::TitleRole,
        }
    }

    pub fn from_entity_type(etype: EntityType) -> Self {
        match etype {
            EntityType::Person => Label::Per,
            EntityType::Organization => Label::Org,
            EntityType::Rank => Label::Rnk,
            EntityType::TitleRole => Label::Ttl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IobTag {
    O,
    B(Label),
    I(Label),
}

impl IobTag {
    /// The full tagset in a fixed order; `index` and `from_index` follow it.
    pub const TAGSET: [IobTag; 9] = [
        IobTag::O,
        IobTag::B(Label::Per),
        IobTag::I(Label::Per),
        IobTag::B(Label::Org),
        IobTag::I(Label::Org),
        IobTag::B(Label::Rnk),
        IobTag::I(Label::Rnk),
        IobTag::B(Label::Ttl),
        IobTag::I(Label::Ttl),
    ];

    pub fn index(self) -> usize {
        let label_index = |l: Label| Label::ALL.iter().position(|&x| x == l).unwrap();
        match self {
            IobTag::O => 0,
            IobTag::B(l) => 1 + 2 * label_index(l),
            IobTag::I(l) => 2 + 2 * label_index(l),
        }
    }

    pub fn from_index(i: usize) -> Self {
        IobTag::TAGSET[i]
    }

    pub fn label(self) -> Option<Label> {
        match self {
            IobTag::O => None,
            IobTag::B(l) | IobTag::I(l) => Some(l),
        }
    }
}

impl fmt::Display for IobTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IobTag::O => f.write_str("O"),
            IobTag::B(l) => write!(f, "B-{}", l.as_str()),
            IobTag::I(l) => write!(f, "I-{}", l.as_str()),
        }
    }
}

impl FromStr for IobTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IobTag::TAGSET
            .iter()
            .copied()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| Error::Iob(format!("unknown tag {s:?}")))
    }
}

/// `false` iff `next` continues an entity (`I-X`) that `prev` did not open or
/// continue. Use `IobTag::O` as `prev` at sentence start.
pub fn valid_transition(prev: IobTag, next: IobTag) -> bool {
    match next {
        IobTag::I(x) => matches!(prev, IobTag::B(p) | IobTag::I(p) if p == x),
        _ => true,
    }
}

/// Result of [`spans_to_iob`]: one tag per token plus any boundary warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IobEncoding {
    pub tags: Vec<IobTag>,
    pub warnings: Vec<String>,
}

/// Tag `tokens` with the given entities. Entity boundaries that fall inside a
/// token are widened to the whole token.
pub fn spans_to_iob(tokens: &[Token], entities: &[EntitySpan]) -> Result<IobEncoding> {
    let mut tags = vec![IobTag::O; tokens.len()];
    let mut owner: Vec<Option<&str>> = vec![None; tokens.len()];
    let mut warnings = Vec::new();
    for ent in entities {
        let covered: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.start < ent.end && t.end > ent.start)
            .map(|(i, _)| i)
            .collect();
        let (Some(&first), Some(&last)) = (covered.first(), covered.last()) else {
            return Err(Error::Iob(format!(
                "entity {} ({}..{} {:?}) does not intersect any token",
                ent.id, ent.start, ent.end, ent.surface
            )));
        };
        if tokens[first].start < ent.start || tokens[last].end > ent.end {
            warnings.push(format!(
                "entity {} ({}..{}) cuts a token; widened to {}..{}",
                ent.id, ent.start, ent.end, tokens[first].start, tokens[last].end
            ));
        }
        let label = Label::from_entity_type(ent.etype);
        for (n, &i) in covered.iter().enumerate() {
            if let Some(other) = owner[i] {
                return Err(Error::Iob(format!(
                    "entities {other} and {} overlap at token {:?}",
                    ent.id, tokens[i].text
                )));
            }
            owner[i] = Some(&ent.id);
            tags[i] = if n == 0 {
                IobTag::B(label)
            } else {
                IobTag::I(label)
            };
        }
    }
    Ok(IobEncoding { tags, warnings })
}

/// Decode a tag sequence back into spans over `text`. A stray `I-X` (after
/// `O`, after another class, or at a sentence start) opens a new entity.
/// Spans are numbered `T1`, `T2`, ... in order.
pub fn iob_to_spans(text: &str, tokens: &[Token], tags: &[IobTag]) -> Result<Vec<EntitySpan>> {
    if tokens.len() != tags.len() {
        return Err(Error::Iob(format!(
            "{} tokens but {} tags",
            tokens.len(),
            tags.len()
        )));
    }
    let index = CharIndex::new(text);
    let mut spans = Vec::new();
    let mut open: Option<(Label, usize, usize)> = None;
    let close = |open: &mut Option<(Label, usize, usize)>, spans: &mut Vec<EntitySpan>| {
        if let Some((label, first, last)) = open.take() {
            let (start, end) = (tokens[first].start, tokens[last].end);
            spans.push(EntitySpan {
                id: format!("T{}", spans.len() + 1),
                etype: label.entity_type(),
                start,
                end,
                surface: index
                    .slice(text, start, end)
                    .unwrap_or_default()
                    .to_string(),
            });
        }
    };
    for (i, &tag) in repair(tokens, tags).iter().enumerate() {
        match tag {
            IobTag::O => close(&mut open, &mut spans),
            IobTag::B(l) => {
                close(&mut open, &mut spans);
                open = Some((l, i, i));
            }
            IobTag::I(_) => {
                if let Some(o) = open.as_mut() {
                    o.2 = i;
                }
            }
        }
    }
    close(&mut open, &mut spans);
    Ok(spans)
}

/// Apply the stray-`I` repair rule, honouring sentence boundaries.
pub fn repair(tokens: &[Token], tags: &[IobTag]) -> Vec<IobTag> {
    let mut out = Vec::with_capacity(tags.len());
    for (i, &tag) in tags.iter().enumerate() {
        let prev = match i {
            0 => IobTag::O,
            _ if tokens[i].sent_index != tokens[i - 1].sent_index => IobTag::O,
            _ => out[i - 1],
        };
        out.push(match tag {
            IobTag::I(l) if !valid_transition(prev, tag) => IobTag::B(l),
            t => t,
        });
    }
    out
}
