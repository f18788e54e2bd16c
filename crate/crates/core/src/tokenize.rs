//! Rule-based sentence splitting and tokenization that keeps char offsets.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub sent_index: usize,
    /// 0-based position within the sentence.
    pub tok_index: usize,
}

/// Abbreviations whose trailing period belongs to the word and never ends a
/// sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Dr.", "Gen.", "Maj.", "Lt.", "Col.", "Brig.", "Capt.", "Sgt.", "St.", "vs.",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

// Joiners kept inside a word when flanked by word characters: hyphens,
// apostrophes, and digit separators.
fn is_joiner(prev: char, c: char, next: char) -> bool {
    match c {
        '-' | '\'' | '\u{2019}' => is_word_char(prev) && is_word_char(next),
        '.' | ',' | ':' => prev.is_ascii_digit() && next.is_ascii_digit(),
        _ => false,
    }
}

/// Split `text` into tokens grouped into sentences. Sentences end at `.`,
/// `!` or `?` (plus any closing quotes) followed by whitespace and a capital
/// letter, and at line breaks.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut raw: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_word_char(c) {
            i += 1;
            while i < chars.len() {
                if is_word_char(chars[i]) {
                    i += 1;
                } else if i + 1 < chars.len() && is_joiner(chars[i - 1], chars[i], chars[i + 1]) {
                    i += 2;
                } else {
                    break;
                }
            }
            if i < chars.len() && chars[i] == '.' {
                let word: String = chars[start..i].iter().collect();
                let is_initial = i - start == 1 && c.is_uppercase();
                if is_initial || ABBREVIATIONS.contains(&format!("{word}.").as_str()) {
                    i += 1;
                }
            }
        } else {
            i += 1;
        }
        raw.push((start, i));
    }

    let mut tokens = Vec::with_capacity(raw.len());
    let mut sent_index = 0;
    let mut tok_index = 0;
    let mut close_after: Option<usize> = None;
    for (k, &(start, end)) in raw.iter().enumerate() {
        if k > 0 {
            let (_, prev_end) = raw[k - 1];
            let gap = &chars[prev_end..start];
            let newline = gap.contains(&'\n');
            let boundary =
                close_after == Some(k - 1) && !gap.is_empty() && chars[start].is_uppercase();
            if newline || boundary {
                sent_index += 1;
                tok_index = 0;
            }
        }
        let text_s: String = chars[start..end].iter().collect();
        // Track where a sentence-final punctuation run (with closers) ends.
        let closer = close_after == Some(k.wrapping_sub(1))
            && end - start == 1
            && CLOSERS.contains(&chars[start])
            && start == raw[k - 1].1;
        if matches!(text_s.as_str(), "." | "!" | "?") || closer {
            close_after = Some(k);
        }
        tokens.push(Token {
            text: text_s,
            start,
            end,
            sent_index,
            tok_index,
        });
        tok_index += 1;
    }
    tokens
}

/// Group a token list into per-sentence slices.
pub fn sentences(tokens: &[Token]) -> Vec<&[Token]> {
    let mut out = Vec::new();
    let mut begin = 0;
    for i in 1..=tokens.len() {
        if i == tokens.len() || tokens[i].sent_index != tokens[begin].sent_index {
            if i > begin {
                out.push(&tokens[begin..i]);
            }
            begin = i;
        }
    }
    out
}
