//! Tokenization, closed-class filtering and term mention lookup.
//!
//! Every metric and the corpus builder go through [`tokenize`], so word
//! counts agree across the whole pipeline.

use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::Result;

const DEFAULT_STOPLIST: &str = include_str!("../data/closed_class.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    /// Position in the token list.
    pub index: usize,
    pub is_word: bool,
    /// Byte range of `surface` in the tokenized text.
    pub start: usize,
    pub end: usize,
}

/// An inclusive run of tokens that matched something.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub byte_start: usize,
    pub byte_end: usize,
}

impl Span {
    pub fn from_tokens(source: &str, tokens: &[Token], start: usize, end: usize) -> Span {
        let byte_start = tokens[start].start;
        let byte_end = tokens[end].end;
        Span {
            start,
            end,
            text: source[byte_start..byte_end].to_string(),
            byte_start,
            byte_end,
        }
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.byte_start < other.byte_end && other.byte_start < self.byte_end
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits on whitespace and punctuation. Letters and digits form word
/// tokens; an apostrophe between two word characters stays inside the word
/// ("he's"), and every other punctuation character, hyphens included, is a
/// token of its own.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;

    let push = |tokens: &mut Vec<Token>, start: usize, end: usize, is_word: bool| {
        let surface = &text[start..end];
        tokens.push(Token {
            surface: surface.to_string(),
            lower: surface.to_lowercase(),
            index: tokens.len(),
            is_word,
            start,
            end,
        });
    };

    for (i, &(pos, c)) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            if word_start.is_none() {
                word_start = Some(pos);
            }
            continue;
        }
        if is_apostrophe(c) && word_start.is_some() {
            if let Some(&(_, next)) = chars.get(i + 1) {
                if next.is_alphanumeric() {
                    continue;
                }
            }
        }
        if let Some(start) = word_start.take() {
            push(&mut tokens, start, pos, true);
        }
        if !c.is_whitespace() {
            push(&mut tokens, pos, pos + c.len_utf8(), false);
        }
    }
    if let Some(start) = word_start {
        push(&mut tokens, start, text.len(), true);
    }
    tokens
}

pub fn word_count(tokens: &[Token]) -> usize {
    tokens.iter().filter(|t| t.is_word).count()
}

/// Closed-class words (pronouns, prepositions, conjunctions, determiners,
/// auxiliaries) that never contribute to norm profiles.
#[derive(Debug, Clone, Default)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    pub fn parse(source: &str) -> Stoplist {
        let words = source
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        Stoplist { words }
    }

    pub fn from_reader<R: BufRead>(mut reader: R) -> Result<Stoplist> {
        let mut buf = String::new();
        reader.read_to_string(&mut buf)?;
        Ok(Stoplist::parse(&buf))
    }

    /// The closed-class list bundled with the crate.
    pub fn bundled() -> Stoplist {
        Stoplist::parse(DEFAULT_STOPLIST)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn is_content_word(token: &Token, stoplist: &Stoplist) -> bool {
    token.is_word && !stoplist.contains(&token.lower)
}

/// All case-insensitive occurrences of `term` in `tokens`, ordered by start.
/// Occurrences may overlap each other.
pub fn find_mentions(tokens: &[Token], term: &str) -> Vec<Span> {
    let needle: Vec<String> = tokenize(term).into_iter().map(|t| t.lower).collect();
    if needle.is_empty() || needle.len() > tokens.len() {
        return Vec::new();
    }
    tokens
        .windows(needle.len())
        .enumerate()
        .filter(|(_, window)| window.iter().zip(&needle).all(|(t, n)| &t.lower == n))
        .map(|(start, window)| {
            let first = &window[0];
            let last = &window[window.len() - 1];
            Span {
                start,
                end: start + needle.len() - 1,
                text: window
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
                byte_start: first.start,
                byte_end: last.end,
            }
        })
        .collect()
}
