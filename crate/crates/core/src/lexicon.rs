//! VAD/BE5 psycholinguistic norm lexicon.
//!
//! Valence, arousal and dominance are rated on 1..9 (5 neutral); joy,
//! anger, sadness, fear and disgust on 1..5 (1 neutral). Aggregation works
//! on the rescaled values: VAD to [−1, 1], BE5 to [0, 1].

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NORM_TSV_HEADER: &str =
    "word\tvalence\tarousal\tdominance\tjoy\tanger\tsadness\tfear\tdisgust";

const VAD_RANGE: (f64, f64) = (1.0, 9.0);
const BE5_RANGE: (f64, f64) = (1.0, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormVariable {
    Valence,
    Arousal,
    Dominance,
    Joy,
    Anger,
    Sadness,
    Fear,
    Disgust,
}

impl NormVariable {
    pub const ALL: [NormVariable; 8] = [
        NormVariable::Valence,
        NormVariable::Arousal,
        NormVariable::Dominance,
        NormVariable::Joy,
        NormVariable::Anger,
        NormVariable::Sadness,
        NormVariable::Fear,
        NormVariable::Disgust,
    ];

    pub fn is_vad(self) -> bool {
        matches!(
            self,
            NormVariable::Valence | NormVariable::Arousal | NormVariable::Dominance
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            NormVariable::Valence => "valence",
            NormVariable::Arousal => "arousal",
            NormVariable::Dominance => "dominance",
            NormVariable::Joy => "joy",
            NormVariable::Anger => "anger",
            NormVariable::Sadness => "sadness",
            NormVariable::Fear => "fear",
            NormVariable::Disgust => "disgust",
        }
    }

    fn raw_range(self) -> (f64, f64) {
        if self.is_vad() {
            VAD_RANGE
        } else {
            BE5_RANGE
        }
    }

    /// Maps a raw rating onto the scaled range used for aggregation.
    pub fn rescale(self, raw: f64) -> Result<f64> {
        if self.is_vad() {
            rescale_vad(raw)
        } else {
            rescale_be5(raw)
        }
    }
}

impl fmt::Display for NormVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_range(field: &'static str, raw: f64, (min, max): (f64, f64)) -> Result<()> {
    if (min..=max).contains(&raw) {
        Ok(())
    } else {
        Err(Error::Range {
            line: None,
            field,
            value: raw,
            min,
            max,
        })
    }
}

/// (raw − 5) / 4: 1 → −1, 5 → 0, 9 → 1.
pub fn rescale_vad(raw: f64) -> Result<f64> {
    check_range("vad", raw, VAD_RANGE)?;
    Ok((raw - 5.0) / 4.0)
}

/// (raw − 1) / 4: 1 → 0, 5 → 1.
pub fn rescale_be5(raw: f64) -> Result<f64> {
    check_range("be5", raw, BE5_RANGE)?;
    Ok((raw - 1.0) / 4.0)
}

/// Raw (unscaled) ratings of one word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub word: String,
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
    pub joy: f64,
    pub anger: f64,
    pub sadness: f64,
    pub fear: f64,
    pub disgust: f64,
}

impl NormEntry {
    /// Validates every rating against its scale.
    pub fn new(word: impl Into<String>, raw: [f64; 8]) -> Result<NormEntry> {
        for (var, value) in NormVariable::ALL.iter().zip(raw) {
            check_range(var.name(), value, var.raw_range())?;
        }
        let [valence, arousal, dominance, joy, anger, sadness, fear, disgust] = raw;
        Ok(NormEntry {
            word: word.into().to_lowercase(),
            valence,
            arousal,
            dominance,
            joy,
            anger,
            sadness,
            fear,
            disgust,
        })
    }

    pub fn raw(&self, var: NormVariable) -> f64 {
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

    pub fn scaled(&self, var: NormVariable) -> f64 {
        // Entries are range-checked on construction.
        var.rescale(self.raw(var))
            .expect("norm entry holds an out-of-range rating")
    }
}

#[derive(Debug, Clone, Default)]
pub struct NormLexicon {
    entries: HashMap<String, NormEntry>,
}

impl NormLexicon {
    pub fn from_entries<I: IntoIterator<Item = NormEntry>>(entries: I) -> Result<NormLexicon> {
        let mut map = HashMap::new();
        for (i, entry) in entries.into_iter().enumerate() {
            if map.contains_key(&entry.word) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate word {:?}", entry.word),
                });
            }
            map.insert(entry.word.clone(), entry);
        }
        Ok(NormLexicon { entries: map })
    }

    /// Case-insensitive lookup; words outside the lexicon are absent.
    pub fn get(&self, word: &str) -> Option<&NormEntry> {
        self.entries
            .get(word)
            .or_else(|| self.entries.get(&word.to_lowercase()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Parses the tab-separated norm table. The first non-blank line must be
/// the header; an input with no lines at all yields an empty lexicon.
pub fn load_norm_lexicon<R: BufRead>(reader: R) -> Result<NormLexicon> {
    let mut entries: HashMap<String, NormEntry> = HashMap::new();
    let mut seen_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line != NORM_TSV_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected header {NORM_TSV_HEADER:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 9 tab-separated fields, found {}", fields.len()),
            });
        }
        let word = fields[0].trim();
        if word.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty word".into(),
            });
        }
        let mut raw = [0.0; 8];
        for (slot, field) in raw.iter_mut().zip(&fields[1..]) {
            *slot = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: format!("invalid rating {field:?}"),
                })?;
        }
        let entry = NormEntry::new(word, raw).map_err(|e| match e {
            Error::Range {
                field,
                value,
                min,
                max,
                ..
            } => Error::Range {
                line: Some(lineno),
                field,
                value,
                min,
                max,
            },
            other => other,
        })?;
        if entries.contains_key(&entry.word) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("duplicate word {:?}", entry.word),
            });
        }
        entries.insert(entry.word.clone(), entry);
    }
    Ok(NormLexicon { entries })
}
