//! CoNLL-U ingest. Only ID, FORM, HEAD and DEPREL are read.

use log::debug;

use crate::depgraph::{DepToken, DepTree};
use crate::error::{Error, Result};

/// Parse CoNLL-U text into one tree per sentence block. Multiword-token
/// ranges (`3-4`) and empty nodes (`5.1`) are skipped.
pub fn parse_conllu(conllu_text: &str) -> Result<Vec<DepTree>> {
    let mut trees = Vec::new();
    let mut block: Vec<(usize, DepToken, usize)> = Vec::new();
    let mut block_line = 0;

    let mut flush = |block: &mut Vec<(usize, DepToken, usize)>, first_line: usize| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let n = block.len();
        let mut tokens = Vec::with_capacity(n);
        for (expect, (id, mut tok, line)) in block.drain(..).enumerate() {
            if id != expect + 1 {
                return Err(Error::conllu(
                    line,
                    format!("expected token id {}, found {id}", expect + 1),
                ));
            }
            if let Some(h) = tok.head {
                // Heads arrive 1-based; 0 was already mapped to None.
                if h > n {
                    return Err(Error::conllu(
                        line,
                        format!("head {h} out of range 0..={n}"),
                    ));
                }
                tok.head = Some(h - 1);
            }
            tokens.push(tok);
        }
        let tree = DepTree::new(trees.len(), tokens).map_err(|e| match e {
            Error::NotATree(msg) => Error::conllu(first_line, format!("not a tree: {msg}")),
            other => other,
        })?;
        trees.push(tree);
        Ok(())
    };

    for (i, raw) in conllu_text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut block, block_line)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::conllu(
                lineno,
                format!("expected 10 columns, found {}", cols.len()),
            ));
        }
        let id_col = cols[0];
        if id_col.contains('-') || id_col.contains('.') {
            continue;
        }
        let id: usize = id_col
            .parse()
            .map_err(|_| Error::conllu(lineno, format!("bad token id {id_col:?}")))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::conllu(lineno, format!("non-integer head {:?}", cols[6])))?;
        if block.is_empty() {
            block_line = lineno;
        }
        block.push((
            id,
            DepToken {
                form: cols[1].to_string(),
                head: if head == 0 { None } else { Some(head) },
                deprel: cols[7].to_string(),
                start: 0,
                end: 0,
            },
            lineno,
        ));
    }
    flush(&mut block, block_line)?;
    Ok(trees)
}

/// Locate every tree token in `text`, left to right, and record its char
/// offsets. Returns how many tokens could not be found verbatim; those get
/// the next non-whitespace run instead.
pub fn align_trees(text: &str, trees: &mut [DepTree]) -> usize {
    const SEARCH_WINDOW: usize = 200;
    let chars: Vec<char> = text.chars().collect();
    let mut cursor = 0;
    let mut misses = 0;

    for tree in trees.iter_mut() {
        for tok in tree.tokens_mut() {
            while cursor < chars.len() && chars[cursor].is_whitespace() {
                cursor += 1;
            }
            let form: Vec<char> = tok.form.chars().collect();
            let limit = (cursor + SEARCH_WINDOW).min(chars.len());
            let found = (cursor..limit).find(|&p| chars[p..].starts_with(&form));
            match found {
                Some(p) if !form.is_empty() => {
                    tok.start = p;
                    tok.end = p + form.len();
                    cursor = tok.end;
                }
                _ => {
                    misses += 1;
                    debug!(
                        "could not align parse token {:?} at char {cursor}",
                        tok.form
                    );
                    let mut end = cursor;
                    while end < chars.len() && !chars[end].is_whitespace() {
                        end += 1;
                    }
                    tok.start = cursor.min(chars.len());
                    tok.end = end.max(tok.start + 1);
                    cursor = end;
                }
            }
        }
    }
    misses
}
