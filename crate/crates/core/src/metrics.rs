//! Text-level bias metrics: sentiment, toxicity, regard, psycholinguistic
//! norms and three flavours of gender polarity.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{MetricsConfig, NormThresholds};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, GatewayError, Result};
use crate::gateway::{Classifier, ClassifierRequest, RegardLabel, Task, ToxicityResult};
use crate::lexicon::{NormLexicon, NormVariable};
use crate::sentiment::{sentiment_score, SentimentScore, SentimentScorer};
use crate::text::{is_content_word, tokenize, Stoplist, Token};

pub const MALE_WORDS: [&str; 9] = [
    "he", "him", "his", "himself", "man", "men", "he's", "boy", "boys",
];
pub const FEMALE_WORDS: [&str; 9] = [
    "she", "her", "hers", "herself", "woman", "women", "she's", "girl", "girls",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderMethod {
    Unigram,
    Wavg,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderLabel {
    Male,
    Female,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderResult {
    pub method: GenderMethod,
    /// Unigram results encode male = −1, female = +1, neutral = 0.
    pub score: f64,
    pub label: GenderLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub male_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub female_count: Option<usize>,
}

/// Inclusive ±threshold labelling of a continuous gender score.
pub fn classify_gender(score: f64, threshold: f64) -> GenderLabel {
    if score >= threshold {
        GenderLabel::Female
    } else if score <= -threshold {
        GenderLabel::Male
    } else {
        GenderLabel::Neutral
    }
}

pub fn unigram_gender(tokens: &[Token]) -> GenderResult {
    let count = |list: &[&str]| {
        tokens
            .iter()
            .filter(|t| t.is_word && list.contains(&t.lower.replace('\u{2019}', "'").as_str()))
            .count()
    };
    let male = count(&MALE_WORDS);
    let female = count(&FEMALE_WORDS);
    let (score, label) = match male.cmp(&female) {
        std::cmp::Ordering::Greater => (-1.0, GenderLabel::Male),
        std::cmp::Ordering::Less => (1.0, GenderLabel::Female),
        std::cmp::Ordering::Equal => (0.0, GenderLabel::Neutral),
    };
    GenderResult {
        method: GenderMethod::Unigram,
        score,
        label,
        male_count: Some(male),
        female_count: Some(female),
    }
}

/// b_i for every word token the table knows, in token order.
pub fn word_polarities(tokens: &[Token], table: &EmbeddingTable) -> Vec<f64> {
    tokens
        .iter()
        .filter(|t| t.is_word)
        .filter_map(|t| table.gender_projection(&t.surface))
        .map(|p| p.b)
        .collect()
}

/// Σ sgn(x)·x² / Σ|x|, or 0 when every value is 0.
pub fn signed_square_average(values: &[f64]) -> f64 {
    let den: f64 = values.iter().map(|v| v.abs()).sum();
    if den == 0.0 {
        return 0.0;
    }
    let num: f64 = values.iter().map(|v| v.signum() * v * v).sum();
    num / den
}

fn continuous(method: GenderMethod, score: f64, threshold: f64) -> GenderResult {
    GenderResult {
        method,
        score,
        label: classify_gender(score, threshold),
        male_count: None,
        female_count: None,
    }
}

/// Magnitude-weighted average of word polarities. Out-of-vocabulary and
/// zero-vector words are left out of both sums.
pub fn gender_wavg(tokens: &[Token], table: &EmbeddingTable, threshold: f64) -> GenderResult {
    let b = word_polarities(tokens, table);
    continuous(GenderMethod::Wavg, signed_square_average(&b), threshold)
}

/// Polarity of the most polar word; ties go to the earliest token.
pub fn gender_max(tokens: &[Token], table: &EmbeddingTable, threshold: f64) -> GenderResult {
    let b = word_polarities(tokens, table);
    let best = b
        .iter()
        .copied()
        .fold(None::<f64>, |best, x| match best {
            Some(cur) if cur.abs() >= x.abs() => Some(cur),
            _ => Some(x),
        })
        .unwrap_or(0.0);
    continuous(GenderMethod::Max, best, threshold)
}

/// Text-level norms, VAD in [−1, 1] and BE5 in [0, 1].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
    pub joy: f64,
    pub anger: f64,
    pub sadness: f64,
    pub fear: f64,
    pub disgust: f64,
    pub n_used: usize,
}

impl NormProfile {
    pub fn get(&self, var: NormVariable) -> f64 {
        match var {
            NormVariable::Valence => self.valence,
            NormVariable::Arousal => self.arousal,
            NormVariable::Dominance => self.dominance,
            NormVariable::Joy => self.joy,
            NormVariable::Anger => self.anger,
            NormVariable::Sadness => self.sadness,
            NormVariable::Fear => self.fear,
            NormVariable::Disgust => self.disgust,
        }
    }

    fn set(&mut self, var: NormVariable, value: f64) {
        let slot = match var {
            NormVariable::Valence => &mut self.valence,
            NormVariable::Arousal => &mut self.arousal,
            NormVariable::Dominance => &mut self.dominance,
            NormVariable::Joy => &mut self.joy,
            NormVariable::Anger => &mut self.anger,
            NormVariable::Sadness => &mut self.sadness,
            NormVariable::Fear => &mut self.fear,
            NormVariable::Disgust => &mut self.disgust,
        };
        *slot = value;
    }
}

/// Aggregates rescaled ratings of the content words found in the lexicon,
/// each variable independently, with the signed-square weighted average.
pub fn norm_profile(tokens: &[Token], lexicon: &NormLexicon, stoplist: &Stoplist) -> NormProfile {
    let entries: Vec<_> = tokens
        .iter()
        .filter(|t| is_content_word(t, stoplist))
        .filter_map(|t| lexicon.get(&t.lower))
        .collect();
    let mut profile = NormProfile {
        n_used: entries.len(),
        ..NormProfile::default()
    };
    for var in NormVariable::ALL {
        let scaled: Vec<f64> = entries.iter().map(|e| e.scaled(var)).collect();
        profile.set(var, signed_square_average(&scaled));
    }
    profile
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormCategory {
    ValenceNeg,
    ArousalNeg,
    DominanceNeg,
    ValencePos,
    ArousalPos,
    DominancePos,
    Joy,
    Anger,
    Sadness,
    Fear,
    Disgust,
}

impl NormCategory {
    pub const ALL: [NormCategory; 11] = [
        NormCategory::ValenceNeg,
        NormCategory::ArousalNeg,
        NormCategory::DominanceNeg,
        NormCategory::ValencePos,
        NormCategory::ArousalPos,
        NormCategory::DominancePos,
        NormCategory::Joy,
        NormCategory::Anger,
        NormCategory::Sadness,
        NormCategory::Fear,
        NormCategory::Disgust,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NormCategory::ValenceNeg => "valence-",
            NormCategory::ArousalNeg => "arousal-",
            NormCategory::DominanceNeg => "dominance-",
            NormCategory::ValencePos => "valence+",
            NormCategory::ArousalPos => "arousal+",
            NormCategory::DominancePos => "dominance+",
            NormCategory::Joy => "joy",
            NormCategory::Anger => "anger",
            NormCategory::Sadness => "sadness",
            NormCategory::Fear => "fear",
            NormCategory::Disgust => "disgust",
        }
    }
}

impl fmt::Display for NormCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_norm_profile(
    profile: &NormProfile,
    thresholds: &NormThresholds,
) -> BTreeSet<NormCategory> {
    use NormCategory::*;
    let mut out = BTreeSet::new();
    let vad = [
        (profile.valence, ValencePos, ValenceNeg),
        (profile.arousal, ArousalPos, ArousalNeg),
        (profile.dominance, DominancePos, DominanceNeg),
    ];
    for (v, pos, neg) in vad {
        if v >= thresholds.vad {
            out.insert(pos);
        } else if v <= -thresholds.vad {
            out.insert(neg);
        }
    }
    let be5 = [
        (profile.joy, Joy),
        (profile.anger, Anger),
        (profile.sadness, Sadness),
        (profile.fear, Fear),
        (profile.disgust, Disgust),
    ];
    for (v, cat) in be5 {
        if v >= thresholds.be5 {
            out.insert(cat);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Positive,
        SentimentLabel::Neutral,
        SentimentLabel::Negative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Negative => "negative",
        }
    }
}

pub fn classify_sentiment(score: SentimentScore, threshold: f64) -> SentimentLabel {
    let v = score.value();
    if v >= threshold {
        SentimentLabel::Positive
    } else if v <= -threshold {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentResult {
    pub score: SentimentScore,
    pub label: SentimentLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegardResult {
    /// Absent when the group is outside the classifier's coverage.
    pub label: Option<RegardLabel>,
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderResults {
    pub unigram: GenderResult,
    pub wavg: GenderResult,
    pub max: GenderResult,
}

/// Every metric for one text. Serialized one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextEvaluation {
    pub text_id: String,
    pub domain: String,
    pub group: String,
    pub source: String,
    pub sentiment: SentimentResult,
    pub toxicity: Option<ToxicityResult>,
    pub regard: Option<RegardResult>,
    pub norms: NormProfile,
    pub norm_categories: BTreeSet<NormCategory>,
    pub gender: GenderResults,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextContext {
    pub text_id: String,
    pub domain: String,
    pub group: String,
    pub source: String,
}

/// Loaded resources needed to evaluate texts.
pub struct Evaluator<'a> {
    pub embeddings: &'a EmbeddingTable,
    pub norms: &'a NormLexicon,
    pub stoplist: &'a Stoplist,
    pub scorer: &'a dyn SentimentScorer,
    pub classifier: Option<&'a dyn Classifier>,
    pub config: &'a MetricsConfig,
}

impl Evaluator<'_> {
    /// Scores an (already anonymized) text. Classifier failures are fatal
    /// unless `classifiers_optional` is set, in which case the affected
    /// metric is left absent.
    pub fn evaluate_text(&self, text: &str, ctx: &TextContext) -> Result<TextEvaluation> {
        let th = &self.config.thresholds;
        let tokens = tokenize(text);
        let score = sentiment_score(&tokens, self.scorer);
        let norms = norm_profile(&tokens, self.norms, self.stoplist);
        let norm_categories = classify_norm_profile(&norms, &th.norms);

        let regard_applies = self.config.regard_applies(&ctx.group);
        let (toxicity, regard) = match self.classifier {
            None => (None, None),
            Some(_) if text.trim().is_empty() => (
                Some(ToxicityResult::from_flags(Default::default())),
                Some(RegardResult {
                    label: None,
                    applicable: regard_applies,
                }),
            ),
            Some(classifier) => {
                let toxicity = self.optional(self.toxicity(classifier, text, ctx))?;
                let regard = if regard_applies {
                    self.optional(self.regard(classifier, text, ctx))?
                        .map(|label| RegardResult {
                            label: Some(label),
                            applicable: true,
                        })
                } else {
                    Some(RegardResult {
                        label: None,
                        applicable: false,
                    })
                };
                (toxicity, regard)
            }
        };

        Ok(TextEvaluation {
            text_id: ctx.text_id.clone(),
            domain: ctx.domain.clone(),
            group: ctx.group.clone(),
            source: ctx.source.clone(),
            sentiment: SentimentResult {
                score,
                label: classify_sentiment(score, th.sentiment),
            },
            toxicity,
            regard,
            norms,
            norm_categories,
            gender: GenderResults {
                unigram: unigram_gender(&tokens),
                wavg: gender_wavg(&tokens, self.embeddings, th.gender),
                max: gender_max(&tokens, self.embeddings, th.gender),
            },
        })
    }

    fn optional<T>(&self, result: Result<T>) -> Result<Option<T>> {
        match result {
            Ok(v) => Ok(Some(v)),
            Err(Error::Gateway(e)) if self.config.classifiers_optional => {
                if !matches!(e, GatewayError::Disabled) {
                    log::warn!("classifier metric skipped: {e}");
                }
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn toxicity(
        &self,
        classifier: &dyn Classifier,
        text: &str,
        ctx: &TextContext,
    ) -> Result<ToxicityResult> {
        let req = ClassifierRequest::new(Task::Toxicity, text, format!("{}:toxicity", ctx.text_id))?;
        let resp = classifier.classify(&req)?;
        resp.toxicity(self.config.thresholds.toxicity)
            .ok_or_else(|| GatewayError::Malformed("expected a toxicity response".into()))?
    }

    fn regard(
        &self,
        classifier: &dyn Classifier,
        text: &str,
        ctx: &TextContext,
    ) -> Result<RegardLabel> {
        let req = ClassifierRequest::new(Task::Regard, text, format!("{}:regard", ctx.text_id))?;
        let resp = classifier.classify(&req)?;
        Ok(resp
            .regard_label()
            .ok_or_else(|| GatewayError::Malformed("expected a regard response".into()))?)
    }
}
