//! Whitespace tokenization with punctuation detachment.
//!
//! Each whitespace-delimited chunk is split into its leading punctuation
//! characters (one token each), a core token, and its trailing punctuation
//! characters (one token each). Punctuation inside a word (`Peter's`,
//! `T-Mobile`) stays attached. Offsets are in Unicode scalar values.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Char offset of the first character (inclusive).
    pub start: usize,
    /// Char offset past the last character (exclusive).
    pub end: usize,
    #[serde(skip)]
    pub(crate) byte_start: usize,
    #[serde(skip)]
    pub(crate) byte_end: usize,
}

impl Token {
    pub fn byte_range(&self) -> std::ops::Range<usize> {
        self.byte_start..self.byte_end
    }
}

/// Characters split off the edges of a word.
pub fn is_detachable(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{00A1}' | '\u{00A7}' | '\u{00AB}' | '\u{00B6}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}'
                | '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
                | '\u{3001}'..='\u{3003}'
                | '\u{3008}'..='\u{3011}'
        )
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    // (char_idx, byte_idx, char) for the current chunk
    let mut chunk: Vec<(usize, usize, char)> = Vec::new();
    for (ci, (bi, c)) in text.char_indices().enumerate() {
        if c.is_whitespace() {
            flush_chunk(text, &chunk, &mut tokens);
            chunk.clear();
        } else {
            chunk.push((ci, bi, c));
        }
    }
    flush_chunk(text, &chunk, &mut tokens);
    tokens
}

fn flush_chunk(text: &str, chunk: &[(usize, usize, char)], out: &mut Vec<Token>) {
    if chunk.is_empty() {
        return;
    }
    let lead = chunk
        .iter()
        .take_while(|(_, _, c)| is_detachable(*c))
        .count();
    if lead == chunk.len() {
        for i in 0..chunk.len() {
            push(text, chunk, i, i + 1, out);
        }
        return;
    }
    let trail = chunk
        .iter()
        .rev()
        .take_while(|(_, _, c)| is_detachable(*c))
        .count();
    for i in 0..lead {
        push(text, chunk, i, i + 1, out);
    }
    push(text, chunk, lead, chunk.len() - trail, out);
    for i in chunk.len() - trail..chunk.len() {
        push(text, chunk, i, i + 1, out);
    }
}

fn push(text: &str, chunk: &[(usize, usize, char)], from: usize, to: usize, out: &mut Vec<Token>) {
    let (start, byte_start, _) = chunk[from];
    let (last, last_byte, last_char) = chunk[to - 1];
    let byte_end = last_byte + last_char.len_utf8();
    out.push(Token {
        text: text[byte_start..byte_end].to_string(),
        start,
        end: last + 1,
        byte_start,
        byte_end,
    });
}

/// Unicode simple case folding, one scalar at a time.
pub fn fold_char(c: char) -> char {
    unicode_case_mapping::case_folded(c)
        .and_then(|cp| char::from_u32(cp.get()))
        .unwrap_or(c)
}

pub fn fold(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

/// Case-folded token texts.
pub fn folded_tokens(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| fold(&t.text)).collect()
}
