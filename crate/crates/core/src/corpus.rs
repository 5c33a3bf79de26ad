//! Prompt corpus construction: filtering source sentences, truncating them
//! into prompts, anonymizing group references, and grouping the result.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{find_mentions, tokenize, Span, Token};

/// Sentences shorter than this many words (inclusive) are dropped.
pub const MIN_SENTENCE_WORDS: usize = 8;
/// A group term must start within this many leading words.
pub const MENTION_WINDOW: usize = 8;
pub const MIN_PROMPT_WORDS: usize = 6;
pub const MAX_PROMPT_WORDS: usize = 9;
/// Prompts keep at least this many leading words before the mention rule.
const BASE_PREFIX_WORDS: usize = 5;

pub const PERSON_PLACEHOLDER: &str = "Person";
pub const TERM_PLACEHOLDER: &str = "XYZ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Profession,
    Gender,
    Race,
    ReligiousBelief,
    PoliticalIdeology,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::Profession,
        Domain::Gender,
        Domain::Race,
        Domain::ReligiousBelief,
        Domain::PoliticalIdeology,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Profession => "profession",
            Domain::Gender => "gender",
            Domain::Race => "race",
            Domain::ReligiousBelief => "religious_belief",
            Domain::PoliticalIdeology => "political_ideology",
        }
    }

    /// Domains whose groups are identified by a person's name.
    pub fn is_person_domain(self) -> bool {
        matches!(self, Domain::Gender | Domain::Race)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown domain {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSentence {
    pub text: String,
    pub source_title: String,
    pub domain: Domain,
    pub group: String,
    #[serde(default)]
    pub group_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    pub word_count: usize,
    pub domain: Domain,
    pub group: String,
    pub source_title: String,
    pub anonymized_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    NoPersonName,
    TermNotEarly,
    TermTruncated,
    UnregisteredGroup,
    Duplicate,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TooShort => "too_short",
            RejectReason::NoPersonName => "no_person_name",
            RejectReason::TermNotEarly => "term_not_early",
            RejectReason::TermTruncated => "term_truncated",
            RejectReason::UnregisteredGroup => "unregistered_group",
            RejectReason::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Domains → groups → group terms (profession names, person names,
/// religion or ideology terms).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Registry {
    pub domains: BTreeMap<Domain, BTreeMap<String, Vec<String>>>,
}

impl Registry {
    pub fn from_json(bytes: &[u8]) -> Result<Registry> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn terms(&self, domain: Domain, group: &str) -> Option<&[String]> {
        self.domains
            .get(&domain)
            .and_then(|groups| groups.get(group))
            .map(Vec::as_slice)
    }

    pub fn group_count(&self) -> usize {
        self.domains.values().map(BTreeMap::len).sum()
    }
}

/// Reads one [`SourceSentence`] per non-blank line.
pub fn read_sentences<R: BufRead>(reader: R) -> Result<Vec<SourceSentence>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sentence = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(sentence);
    }
    Ok(out)
}

/// Finds person-name spans in a tokenized text.
pub trait NameDetector: Send + Sync {
    fn find_names(&self, text: &str, tokens: &[Token]) -> Vec<Span>;
}

/// Name lookup against a fixed list of person names.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    names: BTreeSet<String>,
}

impl Gazetteer {
    pub fn new<I, S>(names: I) -> Gazetteer
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Gazetteer {
            names: names
                .into_iter()
                .map(Into::into)
                .filter(|n: &String| !n.trim().is_empty())
                .collect(),
        }
    }

    /// Every term registered under a person domain.
    pub fn from_registry(registry: &Registry) -> Gazetteer {
        Gazetteer::new(
            registry
                .domains
                .iter()
                .filter(|(d, _)| d.is_person_domain())
                .flat_map(|(_, groups)| groups.values().flatten().cloned()),
        )
    }

    pub fn extend<I: IntoIterator<Item = String>>(&mut self, names: I) {
        self.names
            .extend(names.into_iter().filter(|n| !n.trim().is_empty()));
    }
}

impl NameDetector for Gazetteer {
    fn find_names(&self, text: &str, tokens: &[Token]) -> Vec<Span> {
        let spans = self
            .names
            .iter()
            .flat_map(|name| find_mentions(tokens, name))
            .collect();
        merge_spans(text, tokens, spans)
    }
}

/// Unions overlapping spans into covering spans, ordered by start.
pub fn merge_spans(text: &str, tokens: &[Token], mut spans: Vec<Span>) -> Vec<Span> {
    spans.sort_by_key(|s| (s.start, s.end));
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for s in spans {
        match merged.last_mut() {
            Some(last) if s.start <= last.1 => last.1 = last.1.max(s.end),
            _ => merged.push((s.start, s.end)),
        }
    }
    merged
        .into_iter()
        .map(|(a, b)| Span::from_tokens(text, tokens, a, b))
        .collect()
}

/// Name check for person domains; other domains always pass.
pub fn require_person_name(sentence: &SourceSentence, detector: &dyn NameDetector) -> bool {
    if !sentence.domain.is_person_domain() {
        return true;
    }
    let tokens = tokenize(&sentence.text);
    !detector.find_names(&sentence.text, &tokens).is_empty()
}

/// Replaces person names with "Person" in person domains and group terms
/// with "XYZ" elsewhere. Text outside the replaced spans is untouched.
pub fn anonymize(text: &str, name_spans: &[Span], term_spans: &[Span], domain: Domain) -> Result<String> {
    let all: Vec<&Span> = name_spans.iter().chain(term_spans).collect();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            if a.overlaps(b) {
                return Err(Error::Overlap {
                    first: a.text.clone(),
                    second: b.text.clone(),
                });
            }
        }
        if a.byte_end > text.len() || a.byte_start > a.byte_end {
            return Err(Error::Domain(format!("span {:?} outside text", a.text)));
        }
    }
    let (spans, placeholder) = if domain.is_person_domain() {
        (name_spans, PERSON_PLACEHOLDER)
    } else {
        (term_spans, TERM_PLACEHOLDER)
    };
    let mut ordered: Vec<&Span> = spans.iter().collect();
    ordered.sort_by_key(|s| s.byte_start);
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for span in ordered {
        out.push_str(&text[cursor..span.byte_start]);
        out.push_str(placeholder);
        cursor = span.byte_end;
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}

/// Ordinal (1-based) of each word token, `None` for punctuation.
fn word_ordinals(tokens: &[Token]) -> Vec<Option<usize>> {
    let mut n = 0;
    tokens
        .iter()
        .map(|t| {
            t.is_word.then(|| {
                n += 1;
                n
            })
        })
        .collect()
}

fn term_mentions(tokens: &[Token], terms: &[String]) -> Vec<Span> {
    terms
        .iter()
        .filter(|t| !t.trim().is_empty())
        .flat_map(|term| find_mentions(tokens, term))
        .collect()
}

/// Truncates a sentence into a prompt around its earliest group-term
/// mention.
///
/// The sentence needs more than eight words and a mention starting within
/// the first eight. The prompt runs to the end of the mention but is at
/// least six words long (the first five words plus one), and a mention that
/// would not fit in nine words rejects the sentence.
pub fn extract_prompt(sentence: &SourceSentence) -> Result<Prompt, RejectReason> {
    let text = sentence.text.as_str();
    let tokens = tokenize(text);
    let ordinals = word_ordinals(&tokens);
    let words = ordinals.iter().flatten().count();
    if words <= MIN_SENTENCE_WORDS {
        return Err(RejectReason::TooShort);
    }

    let first_word = |s: &Span| (s.start..=s.end).find_map(|i| ordinals[i]);
    let last_word = |s: &Span| (s.start..=s.end).rev().find_map(|i| ordinals[i]);
    let early: Vec<(usize, usize)> = term_mentions(&tokens, &sentence.group_terms)
        .iter()
        .filter_map(|s| Some((first_word(s)?, last_word(s)?)))
        .filter(|(start, _)| *start <= MENTION_WINDOW)
        .collect();
    if early.is_empty() {
        return Err(RejectReason::TermNotEarly);
    }
    let prompt_len = |end: usize| {
        if end <= BASE_PREFIX_WORDS {
            BASE_PREFIX_WORDS + 1
        } else {
            end
        }
    };
    let (_, end) = early
        .iter()
        .copied()
        .filter(|(_, end)| *end <= MAX_PROMPT_WORDS)
        .min_by_key(|(start, end)| (*start, std::cmp::Reverse(*end)))
        .ok_or(RejectReason::TermTruncated)?;
    let len = prompt_len(end);

    let last_token = ordinals
        .iter()
        .position(|o| *o == Some(len))
        .expect("sentence has more words than the prompt");
    let prompt_text = &text[tokens[0].start..tokens[last_token].end];

    let anonymized_text = anonymize_prompt(prompt_text, sentence.domain, &sentence.group_terms, None)
        .expect("merged spans never overlap");
    Ok(Prompt {
        text: prompt_text.to_string(),
        word_count: len,
        domain: sentence.domain,
        group: sentence.group.clone(),
        source_title: sentence.source_title.clone(),
        anonymized_text,
    })
}

/// Anonymizes a prompt: group terms (plus detected names, for person
/// domains) become placeholders.
pub fn anonymize_prompt(
    prompt: &str,
    domain: Domain,
    terms: &[String],
    detector: Option<&dyn NameDetector>,
) -> Result<String> {
    let tokens = tokenize(prompt);
    let mut spans = term_mentions(&tokens, terms);
    if domain.is_person_domain() {
        if let Some(d) = detector {
            spans.extend(d.find_names(prompt, &tokens));
        }
    }
    let merged = merge_spans(prompt, &tokens, spans);
    if domain.is_person_domain() {
        anonymize(prompt, &merged, &[], domain)
    } else {
        anonymize(prompt, &[], &merged, domain)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    /// Position of the sentence in the input, from 0.
    pub index: usize,
    pub domain: Domain,
    pub group: String,
    pub source_title: String,
    pub text: String,
    pub reason: RejectReason,
}

/// Prompts grouped by domain, group and source title, plus the rejection
/// log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedCorpus {
    pub prompts: BTreeMap<Domain, BTreeMap<String, BTreeMap<String, Vec<Prompt>>>>,
    pub audit: Vec<AuditEntry>,
}

impl GroupedCorpus {
    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Prompts in (domain, group, source title, text) order.
    pub fn iter(&self) -> impl Iterator<Item = &Prompt> {
        self.prompts
            .values()
            .flat_map(|groups| groups.values())
            .flat_map(|sources| sources.values())
            .flatten()
    }

    /// Group → source title → prompt strings, for one domain.
    pub fn domain_json(&self, domain: Domain) -> serde_json::Value {
        let groups: BTreeMap<&str, BTreeMap<&str, Vec<&str>>> = self
            .prompts
            .get(&domain)
            .map(|groups| {
                groups
                    .iter()
                    .map(|(g, sources)| {
                        let sources = sources
                            .iter()
                            .map(|(s, ps)| (s.as_str(), ps.iter().map(|p| p.text.as_str()).collect()))
                            .collect();
                        (g.as_str(), sources)
                    })
                    .collect()
            })
            .unwrap_or_default();
        serde_json::to_value(groups).expect("string maps serialize")
    }

    /// (domain, group, prompt count) rows for a summary table.
    pub fn summary(&self) -> Vec<(Domain, usize, usize)> {
        Domain::ALL
            .iter()
            .map(|d| {
                let groups = self.prompts.get(d);
                let n_groups = groups.map_or(0, BTreeMap::len);
                let n_prompts = groups.map_or(0, |g| {
                    g.values().flat_map(BTreeMap::values).map(Vec::len).sum()
                });
                (*d, n_groups, n_prompts)
            })
            .collect()
    }
}

/// Runs the full pipeline. `detector` defaults to a gazetteer of every
/// person-domain name in the registry and in the sentences' own terms.
///
/// Duplicate prompt strings within a domain are kept once, in the
/// (group, source title) that sorts first, so the output does not depend on
/// input order.
pub fn build_corpus(
    sentences: &[SourceSentence],
    registry: &Registry,
    detector: Option<&dyn NameDetector>,
) -> GroupedCorpus {
    let default_detector;
    let detector: &dyn NameDetector = match detector {
        Some(d) => d,
        None => {
            let mut g = Gazetteer::from_registry(registry);
            g.extend(
                sentences
                    .iter()
                    .filter(|s| s.domain.is_person_domain())
                    .flat_map(|s| s.group_terms.iter().cloned()),
            );
            default_detector = g;
            &default_detector
        }
    };

    let mut audit = Vec::new();
    let reject = |audit: &mut Vec<AuditEntry>, index: usize, s: &SourceSentence, reason| {
        audit.push(AuditEntry {
            index,
            domain: s.domain,
            group: s.group.clone(),
            source_title: s.source_title.clone(),
            text: s.text.clone(),
            reason,
        })
    };

    let mut accepted: Vec<(usize, Prompt)> = Vec::new();
    for (index, sentence) in sentences.iter().enumerate() {
        let Some(registered) = registry.terms(sentence.domain, &sentence.group) else {
            reject(&mut audit, index, sentence, RejectReason::UnregisteredGroup);
            continue;
        };
        let mut terms = sentence.group_terms.clone();
        terms.extend(registered.iter().cloned());
        terms.sort();
        terms.dedup();
        let with_terms = SourceSentence {
            group_terms: terms,
            ..sentence.clone()
        };

        if tokenize(&sentence.text).iter().filter(|t| t.is_word).count() <= MIN_SENTENCE_WORDS {
            reject(&mut audit, index, sentence, RejectReason::TooShort);
            continue;
        }
        if !require_person_name(sentence, detector) {
            reject(&mut audit, index, sentence, RejectReason::NoPersonName);
            continue;
        }
        match extract_prompt(&with_terms) {
            Ok(mut prompt) => {
                prompt.anonymized_text = anonymize_prompt(
                    &prompt.text,
                    prompt.domain,
                    &with_terms.group_terms,
                    Some(detector),
                )
                .expect("merged spans never overlap");
                accepted.push((index, prompt));
            }
            Err(reason) => reject(&mut audit, index, sentence, reason),
        }
    }

    accepted.sort_by(|(ia, a), (ib, b)| {
        (a.domain, &a.group, &a.source_title, &a.text, ia)
            .cmp(&(b.domain, &b.group, &b.source_title, &b.text, ib))
    });
    let mut seen: HashSet<(Domain, String)> = HashSet::new();
    let mut corpus = GroupedCorpus::default();
    for (index, prompt) in accepted {
        if !seen.insert((prompt.domain, prompt.text.clone())) {
            reject(&mut audit, index, &sentences[index], RejectReason::Duplicate);
            continue;
        }
        corpus
            .prompts
            .entry(prompt.domain)
            .or_default()
            .entry(prompt.group.clone())
            .or_default()
            .entry(prompt.source_title.clone())
            .or_default()
            .push(prompt);
    }
    audit.sort_by_key(|a| a.index);
    corpus.audit = audit;
    corpus
}
