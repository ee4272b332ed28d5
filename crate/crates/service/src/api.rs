//! Query operations shared by the HTTP handlers and the command-line tool.
//!
//! Every function here is a pure read of the loaded [`Kb`]; the HTTP layer
//! only decodes parameters and encodes the results.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use sememe_kb::dataset::{load_lexicon, DatasetError};
use sememe_kb::render::{render_ascii, render_tree, AsciiStyle};
use sememe_kb::similarity::ConfigError;
use sememe_kb::{
    render_def, Lang, Lexicon, MatchMode, QueryError, RenderFormat, Sememe, SememeId, SememeTree, Sense, SenseId,
    SimilarityConfig, SimilarityEngine, Stats,
};

pub const LIMIT_DEFAULT: usize = 50;
pub const LIMIT_MAX: usize = 500;
pub const K_DEFAULT: usize = 5;
pub const K_MAX: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    BadRequest,
    NotFound,
}

/// A failed query, with a stable `kind` for machine consumers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct ApiError {
    pub class: ErrorClass,
    pub kind: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(kind: &'static str, message: impl Into<String>) -> Self {
        ApiError { class: ErrorClass::BadRequest, kind, message: message.into() }
    }

    pub fn not_found(kind: &'static str, message: impl Into<String>) -> Self {
        ApiError { class: ErrorClass::NotFound, kind, message: message.into() }
    }

    pub fn missing(name: &str) -> Self {
        ApiError::bad_request("MissingParameter", format!("missing required parameter `{name}`"))
    }

    pub fn invalid(name: &str, value: &str) -> Self {
        ApiError::bad_request("BadParameter", format!("invalid value {value:?} for `{name}`"))
    }

    /// `{"error": {"kind": ..., "message": ...}}`
    pub fn body(&self) -> ErrorBody<'_> {
        ErrorBody { error: ErrorDetail { kind: self.kind, message: &self.message } }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let class = match e {
            QueryError::InvalidK => ErrorClass::BadRequest,
            _ => ErrorClass::NotFound,
        };
        ApiError { class, kind: e.kind(), message: e.to_string() }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody<'a> {
    pub error: ErrorDetail<'a>,
}

#[derive(Debug, Serialize)]
pub struct ErrorDetail<'a> {
    pub kind: &'a str,
    pub message: &'a str,
}

/// Parse an optional textual parameter, falling back to `default`.
pub fn param<T: FromStr>(name: &str, raw: Option<&str>, default: T) -> Result<T, ApiError> {
    match raw {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| ApiError::invalid(name, s)),
    }
}

pub fn required<'a>(name: &str, raw: Option<&'a str>) -> Result<&'a str, ApiError> {
    raw.ok_or_else(|| ApiError::missing(name))
}

pub fn parse_flag(name: &str, raw: Option<&str>) -> Result<bool, ApiError> {
    match raw {
        None | Some("false" | "0") => Ok(false),
        Some("" | "true" | "1") => Ok(true),
        Some(other) => Err(ApiError::invalid(name, other)),
    }
}

pub fn parse_sense_id(raw: &str) -> Result<SenseId, ApiError> {
    raw.parse().map(SenseId).map_err(|_| ApiError::invalid("id", raw))
}

pub fn parse_sememe_id(raw: &str) -> Result<SememeId, ApiError> {
    raw.parse().map(SememeId).map_err(|_| ApiError::invalid("id", raw))
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("k_default must be between 1 and {K_MAX}, got {0}")]
    KDefault(usize),
}

/// A loaded, immutable knowledge base plus the defaults used to query it.
#[derive(Debug)]
pub struct Kb {
    engine: SimilarityEngine,
    k_default: usize,
}

impl Kb {
    pub fn new(lexicon: Arc<Lexicon>, config: SimilarityConfig, k_default: usize) -> Result<Self, KbError> {
        config.validate()?;
        if !(1..=K_MAX).contains(&k_default) {
            return Err(KbError::KDefault(k_default));
        }
        Ok(Kb { engine: SimilarityEngine::new(lexicon, config), k_default })
    }

    /// Strict load of `data_dir`, with an optional similarity config file.
    pub fn open(data_dir: &Path, config: Option<&Path>, k_default: usize) -> Result<Self, KbError> {
        let config = match config {
            Some(path) => SimilarityConfig::from_file(path)?,
            None => SimilarityConfig::default(),
        };
        Kb::new(Arc::new(load_lexicon(data_dir)?), config, k_default)
    }

    pub fn lexicon(&self) -> &Lexicon {
        self.engine.lexicon()
    }

    pub fn engine(&self) -> &SimilarityEngine {
        &self.engine
    }

    pub fn k_default(&self) -> usize {
        self.k_default
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SenseSummary {
    pub id: SenseId,
    pub zh: String,
    pub en: String,
    pub pos: String,
    pub def: String,
}

impl From<&Sense> for SenseSummary {
    fn from(s: &Sense) -> Self {
        SenseSummary { id: s.id, zh: s.zh.clone(), en: s.en.clone(), pos: s.pos.clone(), def: render_def(&s.def) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredSummary {
    pub sense: SenseSummary,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SenseCard {
    pub id: SenseId,
    pub zh: String,
    pub en: String,
    pub pos: String,
    pub def_text: String,
    pub def_tree: SememeTree,
    pub sentiment: Option<String>,
    pub examples: Vec<String>,
    pub near: Vec<ScoredSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeView {
    pub id: SenseId,
    pub format: RenderFormat,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityView {
    pub a: String,
    pub b: String,
    pub lang: Lang,
    pub score: f64,
    pub best_a: SenseId,
    pub best_b: SenseId,
    pub pairs_evaluated: usize,
}

pub fn search(kb: &Kb, q: &str, lang: Lang, mode: MatchMode, limit: usize) -> Result<Vec<SenseSummary>, ApiError> {
    if limit == 0 {
        return Err(ApiError::bad_request("BadParameter", "limit must be at least 1"));
    }
    let hits = kb.lexicon().search_word(q, lang, mode);
    Ok(hits.into_iter().take(limit.min(LIMIT_MAX)).map(SenseSummary::from).collect())
}

pub fn sense_card(kb: &Kb, id: SenseId) -> Result<SenseCard, ApiError> {
    let s = kb.lexicon().get_sense(id)?;
    Ok(SenseCard {
        id: s.id,
        zh: s.zh.clone(),
        en: s.en.clone(),
        pos: s.pos.clone(),
        def_text: render_def(&s.def),
        def_tree: s.def.clone(),
        sentiment: s.sentiment.clone(),
        examples: s.examples.clone(),
        near: nearest(kb, id, kb.k_default)?,
    })
}

pub fn tree(kb: &Kb, id: SenseId, format: RenderFormat, ascii_only: bool) -> Result<TreeView, ApiError> {
    let s = kb.lexicon().get_sense(id)?;
    let rendered = match format {
        RenderFormat::Ascii if ascii_only => render_ascii(&s.def, AsciiStyle::PLAIN),
        _ => render_tree(&s.def, format),
    };
    Ok(TreeView { id, format, rendered })
}

pub fn nearest(kb: &Kb, id: SenseId, k: usize) -> Result<Vec<ScoredSummary>, ApiError> {
    let scored = kb.engine.nearest_senses(id, k.min(K_MAX))?;
    Ok(scored.into_iter().map(|s| ScoredSummary { sense: s.sense.into(), score: s.score }).collect())
}

pub fn similarity(kb: &Kb, a: &str, b: &str, lang: Lang) -> Result<SimilarityView, ApiError> {
    if lang == Lang::Auto {
        return Err(ApiError::bad_request("BadParameter", "lang must be zh or en for similarity"));
    }
    let w = kb.engine.word_similarity(a, b, lang)?;
    Ok(SimilarityView {
        a: a.to_owned(),
        b: b.to_owned(),
        lang,
        score: w.score,
        best_a: w.best_a,
        best_b: w.best_b,
        pairs_evaluated: w.pairs_evaluated,
    })
}

pub fn sememes<'a>(kb: &'a Kb, q: &str) -> Vec<&'a Sememe> {
    kb.lexicon().taxonomy().resolve(q)
}

pub fn sememe_senses(kb: &Kb, id: SememeId) -> Result<Vec<SenseSummary>, ApiError> {
    Ok(kb.lexicon().senses_with_sememe(id)?.into_iter().map(SenseSummary::from).collect())
}

pub fn stats(kb: &Kb) -> Stats {
    kb.lexicon().stats()
}

impl fmt::Display for SenseSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}\t{}", self.id, self.zh, self.en, self.pos, self.def)
    }
}
