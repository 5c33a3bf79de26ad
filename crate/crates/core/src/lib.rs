//! Bias measurement for open-ended text generation: prompt corpus
//! construction, text-level metrics (sentiment, toxicity, regard,
//! psycholinguistic norms, gender polarity) and group-level reporting.

pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod gateway;
pub mod lexicon;
pub mod metrics;
pub mod report;
pub mod sentiment;
pub mod stats;
pub mod text;

pub use config::{MetricsConfig, NormThresholds, Thresholds};
pub use corpus::{
    anonymize, build_corpus, extract_prompt, require_person_name, Domain, Gazetteer, GroupedCorpus,
    NameDetector, Prompt, Registry, RejectReason, SourceSentence,
};
pub use embedding::{load_embeddings, EmbeddingTable};
pub use error::{Error, GatewayError, Result};
pub use gateway::{Classifier, Gateway, GatewayMode, GatewayOptions};
pub use lexicon::{load_norm_lexicon, NormLexicon, NormVariable};
pub use metrics::{Evaluator, TextContext, TextEvaluation};
pub use report::{make_reports, write_reports, ReportSpec, Reports};
pub use sentiment::{SentimentScore, SentimentScorer, VaderScorer};
pub use text::{tokenize, Span, Stoplist, Token};
