//! Lexicon-and-rules sentiment scoring.
//!
//! [`VaderScorer`] reimplements the VADER compound score over the shared
//! token stream: signed word valences, negation flipping, booster/dampener
//! words, ALL-CAPS emphasis, contrastive "but", and punctuation emphasis,
//! squashed into [−1, 1]. Hyphenated words and emoticons are tokenized
//! differently from the reference implementation, so scores agree closely
//! but not bit-for-bit.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::text::Token;

const VADER_LEXICON: &str = include_str!("../data/vader_lexicon.tsv");

const BOOST_INCR: f64 = 0.293;
const BOOST_DECR: f64 = -0.293;
const CAPS_INCR: f64 = 0.733;
const NEGATION_SCALAR: f64 = -0.74;
const NORMALIZE_ALPHA: f64 = 15.0;

const NEGATIONS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly",
    "very",
];

const BOOSTERS_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
    "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce",
    "scarcely", "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

/// A sentiment score in [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentimentScore(f64);

impl SentimentScore {
    pub const NEUTRAL: SentimentScore = SentimentScore(0.0);

    /// Clamps into [−1, 1]; NaN becomes neutral.
    pub fn new(value: f64) -> SentimentScore {
        if value.is_nan() {
            SentimentScore::NEUTRAL
        } else {
            SentimentScore(value.clamp(-1.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Deterministic map from a token sequence to a score in [−1, 1].
/// Words the scorer does not know contribute nothing.
pub trait SentimentScorer: Send + Sync {
    fn score(&self, tokens: &[Token]) -> f64;
}

pub fn sentiment_score(tokens: &[Token], scorer: &dyn SentimentScorer) -> SentimentScore {
    if tokens.is_empty() {
        return SentimentScore::NEUTRAL;
    }
    SentimentScore::new(scorer.score(tokens))
}

struct Tables {
    lexicon: HashMap<String, f64>,
    boosters: HashMap<&'static str, f64>,
    special: HashMap<&'static str, f64>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let lexicon = VADER_LEXICON
            .lines()
            .filter_map(|line| {
                let (word, value) = line.split_once('\t')?;
                Some((word.to_string(), value.trim().parse().ok()?))
            })
            .collect();
        let boosters = BOOSTERS_UP
            .iter()
            .map(|w| (*w, BOOST_INCR))
            .chain(BOOSTERS_DOWN.iter().map(|w| (*w, BOOST_DECR)))
            .collect();
        Tables {
            lexicon,
            boosters,
            special: SPECIAL_CASES.iter().copied().collect(),
        }
    })
}

/// Built-in VADER-compatible rule set with the bundled valence lexicon.
#[derive(Debug, Clone, Copy, Default)]
pub struct VaderScorer;

fn is_upper(word: &str) -> bool {
    let mut cased = false;
    for c in word.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

fn is_negation(word: &str) -> bool {
    NEGATIONS.contains(&word) || word.contains("n't")
}

impl VaderScorer {
    /// Compound score of a pre-split word sequence plus the number of '!'
    /// and '?' marks in the text.
    pub fn compound(&self, words: &[&str], exclamations: usize, questions: usize) -> f64 {
        let t = tables();
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let caps = words.iter().filter(|w| is_upper(w)).count();
        let cap_differential = caps > 0 && caps < words.len();

        let mut sentiments = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            if t.boosters.contains_key(lower[i].as_str())
                || (lower[i] == "kind" && lower.get(i + 1).is_some_and(|n| n == "of"))
            {
                sentiments.push(0.0);
                continue;
            }
            sentiments.push(self.valence(words, i, &lower, cap_differential));
        }

        if let Some(but) = lower.iter().position(|w| w == "but") {
            for (i, s) in sentiments.iter_mut().enumerate() {
                if i < but {
                    *s *= 0.5;
                } else if i > but {
                    *s *= 1.5;
                }
            }
        }

        if sentiments.is_empty() {
            return 0.0;
        }
        let mut sum: f64 = sentiments.iter().sum();
        let emphasis = punctuation_emphasis(exclamations, questions);
        if sum > 0.0 {
            sum += emphasis;
        } else if sum < 0.0 {
            sum -= emphasis;
        }
        (sum / (sum * sum + NORMALIZE_ALPHA).sqrt()).clamp(-1.0, 1.0)
    }

    fn valence(&self, words: &[&str], i: usize, lower: &[String], cap_differential: bool) -> f64 {
        let t = tables();
        let item = lower[i].as_str();
        let Some(&base) = t.lexicon.get(item) else {
            return 0.0;
        };
        let in_lexicon = |w: &str| t.lexicon.contains_key(w);
        let mut valence = base;

        // "no" directly before another lexicon word acts as a negator only.
        if item == "no" && lower.get(i + 1).is_some_and(|n| in_lexicon(n)) {
            valence = 0.0;
        }
        if (i > 0 && lower[i - 1] == "no")
            || (i > 1 && lower[i - 2] == "no")
            || (i > 2 && lower[i - 3] == "no" && (lower[i - 1] == "or" || lower[i - 1] == "nor"))
        {
            valence = base * NEGATION_SCALAR;
        }

        if is_upper(words[i]) && cap_differential {
            if valence > 0.0 {
                valence += CAPS_INCR;
            } else {
                valence -= CAPS_INCR;
            }
        }

        for distance in 0..3 {
            if i <= distance {
                break;
            }
            let back = i - distance - 1;
            if in_lexicon(&lower[back]) {
                continue;
            }
            let mut scalar = booster_scalar(words[back], &lower[back], valence, cap_differential);
            if scalar != 0.0 {
                scalar *= [1.0, 0.95, 0.9][distance];
            }
            valence += scalar;
            valence = negation_check(valence, lower, distance, i);
            if distance == 2 {
                valence = special_idioms_check(valence, lower, i);
            }
        }

        // "least" negates unless it's "at least" / "very least".
        if i > 1 && !in_lexicon(&lower[i - 1]) && lower[i - 1] == "least" {
            if lower[i - 2] != "at" && lower[i - 2] != "very" {
                valence *= NEGATION_SCALAR;
            }
        } else if i > 0 && !in_lexicon(&lower[i - 1]) && lower[i - 1] == "least" {
            valence *= NEGATION_SCALAR;
        }
        valence
    }

}

fn booster_scalar(word: &str, lower: &str, valence: f64, cap_differential: bool) -> f64 {
    let Some(&base) = tables().boosters.get(lower) else {
        return 0.0;
    };
    let mut scalar = if valence < 0.0 { -base } else { base };
    if is_upper(word) && cap_differential {
        if valence > 0.0 {
            scalar += CAPS_INCR;
        } else {
            scalar -= CAPS_INCR;
        }
    }
    scalar
}

fn negation_check(mut valence: f64, lower: &[String], distance: usize, i: usize) -> f64 {
    let at = |back: usize| lower[i - back].as_str();
    match distance {
        0 => {
            if is_negation(at(1)) {
                valence *= NEGATION_SCALAR;
            }
        }
        1 => {
            if at(2) == "never" && (at(1) == "so" || at(1) == "this") {
                valence *= 1.25;
            } else if at(2) == "without" && at(1) == "doubt" {
            } else if is_negation(at(2)) {
                valence *= NEGATION_SCALAR;
            }
        }
        _ => {
            if (at(3) == "never" && (at(2) == "so" || at(2) == "this"))
                || (at(1) == "so" || at(1) == "this")
            {
                valence *= 1.25;
            } else if at(3) == "without" && (at(2) == "doubt" || at(1) == "doubt") {
            } else if is_negation(at(3)) {
                valence *= NEGATION_SCALAR;
            }
        }
    }
    valence
}

fn special_idioms_check(mut valence: f64, lower: &[String], i: usize) -> f64 {
    let t = tables();
    let join = |range: std::ops::RangeInclusive<usize>| {
        lower[range].join(" ")
    };
    let one_zero = join(i - 1..=i);
    let two_one_zero = join(i - 2..=i);
    let two_one = join(i - 2..=i - 1);
    let three_two_one = join(i - 3..=i - 1);
    let three_two = join(i - 3..=i - 2);

    for seq in [&one_zero, &two_one_zero, &two_one, &three_two_one, &three_two] {
        if let Some(&v) = t.special.get(seq.as_str()) {
            valence = v;
            break;
        }
    }
    if lower.len() - 1 > i {
        if let Some(&v) = t.special.get(join(i..=i + 1).as_str()) {
            valence = v;
        }
    }
    if lower.len() - 1 > i + 1 {
        if let Some(&v) = t.special.get(join(i..=i + 2).as_str()) {
            valence = v;
        }
    }
    for ngram in [&three_two_one, &three_two, &two_one] {
        if let Some(&b) = t.boosters.get(ngram.as_str()) {
            valence += b;
        }
    }
    valence
}

fn punctuation_emphasis(exclamations: usize, questions: usize) -> f64 {
    let ep = exclamations.min(4) as f64 * 0.292;
    let qm = match questions {
        0 | 1 => 0.0,
        2 | 3 => questions as f64 * 0.18,
        _ => 0.96,
    };
    ep + qm
}

impl SentimentScorer for VaderScorer {
    fn score(&self, tokens: &[Token]) -> f64 {
        let words: Vec<&str> = tokens
            .iter()
            .filter(|t| t.is_word)
            .map(|t| t.surface.as_str())
            .collect();
        let count = |mark: &str| tokens.iter().filter(|t| t.surface == mark).count();
        self.compound(&words, count("!"), count("?"))
    }
}
