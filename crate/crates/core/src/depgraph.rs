//! Per-sentence dependency trees and the tree paths between entity spans.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::Token;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepToken {
    pub form: String,
    /// 0-based index of the head token; `None` for the root.
    pub head: Option<usize>,
    pub deprel: String,
    /// Char offsets into the document text, filled in by alignment.
    pub start: usize,
    pub end: usize,
}

/// A validated dependency tree: one root, every other token has exactly one
/// head, no cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    pub sent_index: usize,
    tokens: Vec<DepToken>,
    root: usize,
    depth: Vec<usize>,
}

impl DepTree {
    pub fn new(sent_index: usize, tokens: Vec<DepToken>) -> Result<Self> {
        let n = tokens.len();
        if n == 0 {
            return Err(Error::NotATree("sentence has no tokens".into()));
        }
        let mut root = None;
        for (i, t) in tokens.iter().enumerate() {
            match t.head {
                None if root.is_some() => {
                    return Err(Error::NotATree(format!(
                        "tokens {} and {} are both roots",
                        root.unwrap() + 1,
                        i + 1
                    )))
                }
                None => root = Some(i),
                Some(h) if h >= n => return Err(Error::TokenNotInTree(h)),
                Some(h) if h == i => {
                    return Err(Error::NotATree(format!("token {} heads itself", i + 1)))
                }
                Some(_) => {}
            }
        }
        let root = root.ok_or_else(|| Error::NotATree("no root token".into()))?;

        // Depth by walking to the root; a walk longer than n means a cycle.
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        for start in 0..n {
            let mut chain = Vec::new();
            let mut cur = start;
            while depth[cur] == usize::MAX {
                chain.push(cur);
                if chain.len() > n {
                    return Err(Error::NotATree(format!(
                        "cycle through token {}",
                        start + 1
                    )));
                }
                cur = tokens[cur].head.expect("only the root lacks a head");
            }
            let mut d = depth[cur];
            for &node in chain.iter().rev() {
                d += 1;
                depth[node] = d;
            }
        }
        Ok(DepTree {
            sent_index,
            tokens,
            root,
            depth,
        })
    }

    /// Build from CoNLL-style 1-based heads (0 = root), mostly for tests.
    pub fn from_heads(heads: &[usize], labels: &[&str]) -> Result<Self> {
        if heads.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} heads but {} labels",
                heads.len(),
                labels.len()
            )));
        }
        let tokens = heads
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (&h, &l))| {
                if h > heads.len() {
                    return Err(Error::TokenNotInTree(h));
                }
                Ok(DepToken {
                    form: format!("w{}", i + 1),
                    head: h.checked_sub(1),
                    deprel: l.to_string(),
                    start: 0,
                    end: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DepTree::new(0, tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn tokens(&self) -> &[DepToken] {
        &self.tokens
    }

    pub fn tokens_mut(&mut self) -> &mut [DepToken] {
        &mut self.tokens
    }

    pub fn head(&self, tok: usize) -> Option<usize> {
        self.tokens[tok].head
    }

    pub fn depth(&self, tok: usize) -> usize {
        self.depth[tok]
    }

    /// Maximum token depth; the root has depth 0.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// `(head, dependent, label)` for every non-root token.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &str)> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.head.map(|h| (h, i, t.deprel.as_str())))
    }

    /// Indices of tokens whose char span intersects `[start, end)`.
    pub fn tokens_overlapping(&self, start: usize, end: usize) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.start < end && t.end > start)
            .map(|(i, _)| i)
            .collect()
    }

    /// The char range covered by this sentence.
    pub fn span(&self) -> (usize, usize) {
        let start = self.tokens.iter().map(|t| t.start).min().unwrap_or(0);
        let end = self.tokens.iter().map(|t| t.end).max().unwrap_or(0);
        (start, end)
    }

    /// The tree's tokens in the shared [`Token`] form.
    pub fn as_tokens(&self) -> Vec<Token> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| Token {
                text: t.form.clone(),
                start: t.start,
                end: t.end,
                sent_index: self.sent_index,
                tok_index: i,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Dependent to head.
    Up,
    /// Head to dependent.
    Down,
}

impl Direction {
    fn flip(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub label: String,
    pub direction: Direction,
}

/// The labelled edges along a tree path, in traversal order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathPattern {
    pub steps: Vec<PathStep>,
}

impl PathPattern {
    pub fn length(&self) -> usize {
        self.steps.len()
    }

    pub fn reversed(&self) -> PathPattern {
        PathPattern {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| PathStep {
                    label: s.label.clone(),
                    direction: s.direction.flip(),
                })
                .collect(),
        }
    }

    /// Vocabulary key. With `directed` the arrows are kept (`flat↑ nsubj↓`),
    /// otherwise only the labels.
    pub fn key(&self, directed: bool) -> String {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| match (directed, s.direction) {
                (false, _) => s.label.clone(),
                (true, Direction::Up) => format!("{}\u{2191}", s.label),
                (true, Direction::Down) => format!("{}\u{2193}", s.label),
            })
            .collect();
        parts.join(" ")
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key(true))
    }
}

/// The unique tree path from `from` to `to`.
pub fn shortest_path(tree: &DepTree, from: usize, to: usize) -> Result<PathPattern> {
    for tok in [from, to] {
        if tok >= tree.len() {
            return Err(Error::TokenNotInTree(tok));
        }
    }
    let (mut a, mut b) = (from, to);
    let mut up = Vec::new();
    let mut down = Vec::new();
    while tree.depth(a) > tree.depth(b) {
        up.push(a);
        a = tree.head(a).expect("non-root");
    }
    while tree.depth(b) > tree.depth(a) {
        down.push(b);
        b = tree.head(b).expect("non-root");
    }
    while a != b {
        up.push(a);
        down.push(b);
        a = tree.head(a).expect("non-root");
        b = tree.head(b).expect("non-root");
    }
    let label = |tok: usize| tree.tokens[tok].deprel.clone();
    let steps = up
        .into_iter()
        .map(|t| PathStep {
            label: label(t),
            direction: Direction::Up,
        })
        .chain(down.into_iter().rev().map(|t| PathStep {
            label: label(t),
            direction: Direction::Down,
        }))
        .collect();
    Ok(PathPattern { steps })
}

/// Shortest path between any token of `a` and any token of `b`. Ties go to
/// the leftmost token of `a`, then the leftmost token of `b`.
pub fn span_path(tree: &DepTree, a: &[usize], b: &[usize]) -> Result<PathPattern> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::NoTokenInSentence(
            if a.is_empty() { "A" } else { "B" }.to_string(),
        ));
    }
    let mut a_sorted = a.to_vec();
    let mut b_sorted = b.to_vec();
    a_sorted.sort_unstable();
    b_sorted.sort_unstable();
    let mut best: Option<PathPattern> = None;
    for &ta in &a_sorted {
        for &tb in &b_sorted {
            let path = shortest_path(tree, ta, tb)?;
            if best.as_ref().is_none_or(|p| path.length() < p.length()) {
                best = Some(path);
            }
        }
    }
    Ok(best.expect("both sets non-empty"))
}
