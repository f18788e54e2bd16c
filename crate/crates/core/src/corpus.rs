//! Corpus I/O: raw article text, BRAT standoff annotations and CoNLL-U
//! parses, paired on disk by file stem.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conllu::{align_trees, parse_conllu};
use crate::depgraph::DepTree;
use crate::error::{Error, Result};
use crate::text::CharIndex;

/// The four entity classes. Title and Role are collapsed into one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    Person,
    Organization,
    Rank,
    TitleRole,
}

impl EntityType {
    pub const ALL: [EntityType; 4] = [
        EntityType::Person,
        EntityType::Organization,
        EntityType::Rank,
        EntityType::TitleRole,
    ];

    /// Accepts the annotation-config names as well as the collapsed
    /// `Title_Role` label used in the published data.
    pub fn from_brat(name: &str) -> Option<Self> {
        match name {
            "Person" => Some(EntityType::Person),
            "Organization" | "Organisation" => Some(EntityType::Organization),
            "Rank" => Some(EntityType::Rank),
            "Title" | "Role" | "Title_Role" | "TitleRole" => Some(EntityType::TitleRole),
            _ => None,
        }
    }

    pub fn brat_name(self) -> &'static str {
        match self {
            EntityType::Person => "Person",
            EntityType::Organization => "Organization",
            EntityType::Rank => "Rank",
            EntityType::TitleRole => "Title_Role",
        }
    }

    /// Index into the 3-way non-person type one-hot (Organization, Rank,
    /// TitleRole). `None` for Person.
    pub fn target_index(self) -> Option<usize> {
        match self {
            EntityType::Person => None,
            EntityType::Organization => Some(0),
            EntityType::Rank => Some(1),
            EntityType::TitleRole => Some(2),
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.brat_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelType {
    IsPosted,
    HasRank,
    HasTitleRole,
}

impl RelType {
    pub fn from_brat(name: &str) -> Option<Self> {
        match name {
            "is_posted" => Some(RelType::IsPosted),
            "has_rank" => Some(RelType::HasRank),
            "has_title" | "has_role" | "has_title_role" => Some(RelType::HasTitleRole),
            _ => None,
        }
    }

    pub fn brat_name(self) -> &'static str {
        match self {
            RelType::IsPosted => "is_posted",
            RelType::HasRank => "has_rank",
            RelType::HasTitleRole => "has_title_role",
        }
    }

    /// The relation type a non-person entity class implies.
    pub fn for_target(etype: EntityType) -> Option<Self> {
        match etype {
            EntityType::Person => None,
            EntityType::Organization => Some(RelType::IsPosted),
            EntityType::Rank => Some(RelType::HasRank),
            EntityType::TitleRole => Some(RelType::HasTitleRole),
        }
    }
}

impl fmt::Display for RelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.brat_name())
    }
}

/// A typed text-bound annotation. `start` is inclusive, `end` exclusive, both
/// in chars.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntitySpan {
    pub id: String,
    pub etype: EntityType,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl EntitySpan {
    /// Char distance between two spans; 0 when they overlap.
    pub fn distance(&self, other: &EntitySpan) -> usize {
        if other.start >= self.end {
            other.start - self.end
        } else {
            self.start.saturating_sub(other.end)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationEdge {
    pub id: String,
    pub rtype: RelType,
    pub arg1: String,
    pub arg2: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub entities: Vec<EntitySpan>,
    pub relations: Vec<RelationEdge>,
}

impl Document {
    pub fn entity(&self, id: &str) -> Option<&EntitySpan> {
        self.entities.iter().find(|e| e.id == id)
    }

    /// Relations whose type disagrees with the schema mapping of their
    /// non-person argument. These load fine but are reported.
    pub fn schema_flags(&self) -> Vec<String> {
        let mut flags = Vec::new();
        for rel in &self.relations {
            let (Some(a), Some(b)) = (self.entity(&rel.arg1), self.entity(&rel.arg2)) else {
                continue;
            };
            let expected = match (a.etype, b.etype) {
                (EntityType::Person, t) | (t, EntityType::Person) => RelType::for_target(t),
                _ => None,
            };
            if expected != Some(rel.rtype) {
                flags.push(format!(
                    "{}: {} between {} ({}) and {} ({}) does not match the schema",
                    rel.id, rel.rtype, a.id, a.etype, b.id, b.etype
                ));
            }
        }
        flags
    }
}

/// Parse a BRAT standoff `.ann` body against its raw text.
pub fn parse_brat(ann_text: &str, raw_text: &str) -> Result<Document> {
    let index = CharIndex::new(raw_text);
    let mut doc = Document {
        text: raw_text.to_string(),
        ..Default::default()
    };
    let mut ids = HashSet::new();

    for (i, raw_line) in ann_text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        match line.as_bytes()[0] {
            b'T' => {
                let ent = parse_text_bound(line, lineno, raw_text, &index)?;
                if !ids.insert(ent.id.clone()) {
                    return Err(Error::brat(lineno, format!("duplicate id {}", ent.id)));
                }
                doc.entities.push(ent);
            }
            b'R' => {
                let rel = parse_relation(line, lineno)?;
                if !ids.insert(rel.id.clone()) {
                    return Err(Error::brat(lineno, format!("duplicate id {}", rel.id)));
                }
                doc.relations.push(rel);
            }
            _ => warn!("ann line {lineno}: skipping unsupported annotation {line:?}"),
        }
    }

    for rel in &doc.relations {
        for arg in [&rel.arg1, &rel.arg2] {
            if doc.entity(arg).is_none() {
                return Err(Error::brat(
                    0,
                    format!("{} references unknown entity {arg}", rel.id),
                ));
            }
        }
    }
    for flag in doc.schema_flags() {
        warn!("{flag}");
    }
    Ok(doc)
}

fn parse_text_bound(
    line: &str,
    lineno: usize,
    text: &str,
    index: &CharIndex,
) -> Result<EntitySpan> {
    let fields: Vec<&str> = line.splitn(3, '\t').collect();
    if fields.len() != 3 {
        return Err(Error::brat(
            lineno,
            format!(
                "text-bound needs 3 tab-separated fields, found {}",
                fields.len()
            ),
        ));
    }
    let id = fields[0].trim().to_string();
    if fields[1].contains(';') {
        return Err(Error::brat(
            lineno,
            format!("{id}: discontinuous spans are not supported"),
        ));
    }
    let header: Vec<&str> = fields[1].split_whitespace().collect();
    if header.len() != 3 {
        return Err(Error::brat(
            lineno,
            format!("{id}: expected `TYPE START END`, found {:?}", fields[1]),
        ));
    }
    let etype = EntityType::from_brat(header[0])
        .ok_or_else(|| Error::brat(lineno, format!("{id}: unknown entity type {}", header[0])))?;
    let parse_off = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::brat(lineno, format!("{id}: bad offset {s:?}")))
    };
    let start = parse_off(header[1])?;
    let end = parse_off(header[2])?;
    if start >= end {
        return Err(Error::brat(
            lineno,
            format!("{id}: empty span {start}..{end}"),
        ));
    }
    let actual = index
        .slice(text, start, end)
        .ok_or_else(|| Error::OffsetOutOfRange {
            id: id.clone(),
            start,
            end,
            len: index.len(),
        })?;
    let annotated = fields[2].trim_end();
    if flatten_ws(actual).trim_end() != annotated {
        return Err(Error::SurfaceMismatch {
            line: lineno,
            id,
            annotated: annotated.to_string(),
            actual: actual.to_string(),
        });
    }
    Ok(EntitySpan {
        id,
        etype,
        start,
        end,
        surface: actual.to_string(),
    })
}

fn parse_relation(line: &str, lineno: usize) -> Result<RelationEdge> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::brat(
            lineno,
            format!(
                "relation needs `ID TYPE Arg1:ID Arg2:ID`, found {} fields",
                fields.len()
            ),
        ));
    }
    let id = fields[0].to_string();
    let rtype = RelType::from_brat(fields[1])
        .ok_or_else(|| Error::brat(lineno, format!("{id}: unknown relation type {}", fields[1])))?;
    let arg = |field: &str, name: &str| {
        field
            .split_once(':')
            .filter(|(k, v)| *k == name && !v.is_empty())
            .map(|(_, v)| v.to_string())
            .ok_or_else(|| {
                Error::brat(lineno, format!("{id}: expected {name}:ID, found {field:?}"))
            })
    };
    let arg1 = arg(fields[2], "Arg1")?;
    let arg2 = arg(fields[3], "Arg2")?;
    if arg1 == arg2 {
        return Err(Error::brat(
            lineno,
            format!("{id}: relation from {arg1} to itself"),
        ));
    }
    Ok(RelationEdge {
        id,
        rtype,
        arg1,
        arg2,
    })
}

// Surfaces are written on one line; newlines and tabs inside a span become spaces.
fn flatten_ws(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c == '\n' || c == '\t' || c == '\r' {
                ' '
            } else {
                c
            }
        })
        .collect()
}

/// Render a document's annotations as BRAT standoff: all T lines, then all
/// R lines, in stored order.
pub fn serialize_brat(doc: &Document) -> String {
    let mut out = String::new();
    for e in &doc.entities {
        out.push_str(&format!(
            "{}\t{} {} {}\t{}\n",
            e.id,
            e.etype.brat_name(),
            e.start,
            e.end,
            flatten_ws(&e.surface)
        ));
    }
    for r in &doc.relations {
        out.push_str(&format!(
            "{}\t{} Arg1:{} Arg2:{}\n",
            r.id,
            r.rtype.brat_name(),
            r.arg1,
            r.arg2
        ));
    }
    out
}

/// One document of a corpus directory with its (possibly absent) parses.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub doc: Document,
    /// Sentence trees aligned to `doc.text`; empty when no `.conllu` exists.
    pub trees: Vec<DepTree>,
    /// The raw CoNLL-U source, kept for ingest benchmarking.
    pub conllu: Option<String>,
}

impl CorpusEntry {
    pub fn has_parse(&self) -> bool {
        self.conllu.is_some()
    }
}

/// Load every stem with a `.txt` file in `dir`, sorted by stem.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let listing = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut stems = BTreeMap::new();
    for entry in listing {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.insert(stem.to_string(), ());
            }
        }
    }
    stems
        .into_keys()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|stem| load_document(dir, stem))
        .collect()
}

/// Load one stem from `dir`.
pub fn load_document(dir: &Path, stem: &str) -> Result<CorpusEntry> {
    let read = |ext: &str| -> Result<Option<String>> {
        let path = dir.join(format!("{stem}.{ext}"));
        match fs::read_to_string(&path) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    };
    let text = read("txt")?.ok_or_else(|| {
        Error::io(
            dir.join(format!("{stem}.txt")),
            std::io::Error::from(std::io::ErrorKind::NotFound),
        )
    })?;
    let ann = read("ann")?.unwrap_or_default();
    let mut doc = parse_brat(&ann, &text).map_err(|e| annotate(stem, e))?;
    doc.doc_id = stem.to_string();

    let conllu = read("conllu")?;
    let trees = match &conllu {
        Some(src) => {
            let mut trees = parse_conllu(src).map_err(|e| annotate(stem, e))?;
            let misaligned = align_trees(&text, &mut trees);
            if misaligned > 0 {
                warn!("{stem}: {misaligned} parse tokens could not be located in the text");
            }
            trees
        }
        None => {
            warn!("{stem}: no .conllu parse; dependency-based extractors unavailable");
            Vec::new()
        }
    };
    Ok(CorpusEntry { doc, trees, conllu })
}

fn annotate(stem: &str, err: Error) -> Error {
    match err {
        Error::Brat { line, msg } => Error::Brat {
            line,
            msg: format!("{stem}: {msg}"),
        },
        Error::Conllu { line, msg } => Error::Conllu {
            line,
            msg: format!("{stem}: {msg}"),
        },
        Error::OffsetOutOfRange {
            id,
            start,
            end,
            len,
        } => Error::OffsetOutOfRange {
            id: format!("{stem}:{id}"),
            start,
            end,
            len,
        },
        Error::SurfaceMismatch {
            line,
            id,
            annotated,
            actual,
        } => Error::SurfaceMismatch {
            line,
            id: format!("{stem}:{id}"),
            annotated,
            actual,
        },
        other => other,
    }
}
