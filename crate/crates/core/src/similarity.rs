//! Sememe-tree similarity.
//!
//! Two sememes in the same category tree score `alpha / (alpha + d)` where `d`
//! is their path distance; sememes in different trees score `cross_tree_sim`.
//! Two trees score
//!
//! ```text
//! beta_root * head_score + (1 - beta_root) * children_score
//! ```
//!
//! where `children_score` is 1 for two leaves and otherwise the mean, over the
//! union of role names, of a per-role score. Children sharing a role are paired
//! greedily (highest pair score first, each child used at most once) and the
//! per-role score is the sum of paired scores divided by the larger of the two
//! child counts, so unmatched children pull the score down.
//!
//! Pair scores are evaluated with the two trees in canonical order, which
//! makes every level exactly symmetric including greedy tie-breaks.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::QueryError;
use crate::kdml::{NodeHead, Placeholder, SememeTree};
use crate::lexicon::{Lang, Lexicon, Sense, SenseId};
use crate::taxonomy::{SememeId, Taxonomy};

/// Tunable constants of the tree comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityConfig {
    /// Path-distance smoothing, must be positive.
    pub alpha: f64,
    /// Weight of the head comparison, in `[0, 1]`.
    pub beta_root: f64,
    /// Score of two sememes in different category trees, in `[0, 1]`.
    pub cross_tree_sim: f64,
    /// Score of two identical placeholders, in `[0, 1]`.
    pub placeholder_match: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig { alpha: 1.6, beta_root: 0.5, cross_tree_sim: 0.1, placeholder_match: 1.0 }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field} = {value} is out of range ({range})")]
    OutOfRange { field: &'static str, value: f64, range: &'static str },
    #[error("cannot read similarity config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid similarity config: {0}")]
    Json(#[from] serde_json::Error),
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ConfigError::OutOfRange { field: "alpha", value: self.alpha, range: "> 0" });
        }
        for (field, value) in [
            ("beta_root", self.beta_root),
            ("cross_tree_sim", self.cross_tree_sim),
            ("placeholder_match", self.placeholder_match),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::OutOfRange { field, value, range: "[0, 1]" });
            }
        }
        Ok(())
    }

    /// Parse a JSON config; absent fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: SimilarityConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone)]
enum Head {
    Sememe(usize),
    Placeholder(Placeholder),
    Literal(Box<str>),
}

/// Tree with sememes resolved to dense taxonomy indices, roles grouped and
/// sorted, children sorted by canonical key.
#[derive(Debug, Clone)]
struct Prepared {
    key: Box<str>,
    head: Head,
    roles: Vec<(Box<str>, Vec<Prepared>)>,
}

impl Prepared {
    fn new(tree: &SememeTree, taxonomy: &Taxonomy) -> Result<Self, QueryError> {
        let head = match &tree.head {
            NodeHead::Sememe(label) => Head::Sememe(taxonomy.dense_index_of_ref(label)?),
            NodeHead::Placeholder(p) => Head::Placeholder(*p),
            NodeHead::Literal(s) => Head::Literal(s.as_str().into()),
        };
        let mut roles: Vec<(Box<str>, Vec<Prepared>)> = Vec::new();
        let mut children: Vec<(&str, Prepared)> = tree
            .children
            .iter()
            .map(|c| Ok((c.role.as_str(), Prepared::new(&c.tree, taxonomy)?)))
            .collect::<Result<_, QueryError>>()?;
        children.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.key.cmp(&b.1.key)));
        for (role, child) in children {
            match roles.last_mut() {
                Some((r, group)) if &**r == role => group.push(child),
                _ => roles.push((role.into(), vec![child])),
            }
        }
        Ok(Prepared { key: tree.canonical_key().into(), head, roles })
    }
}

struct Scorer<'a> {
    taxonomy: &'a Taxonomy,
    config: &'a SimilarityConfig,
}

impl Scorer<'_> {
    fn sememe(&self, a: usize, b: usize) -> f64 {
        match self.taxonomy.dense_distance(a, b) {
            Some(d) => self.config.alpha / (self.config.alpha + f64::from(d)),
            None => self.config.cross_tree_sim,
        }
    }

    fn head(&self, a: &Head, b: &Head) -> f64 {
        match (a, b) {
            (Head::Sememe(x), Head::Sememe(y)) => self.sememe(*x, *y),
            (Head::Placeholder(x), Head::Placeholder(y)) if x == y => self.config.placeholder_match,
            (Head::Literal(x), Head::Literal(y)) if x == y => 1.0,
            _ => 0.0,
        }
    }

    fn tree(&self, a: &Prepared, b: &Prepared) -> f64 {
        let (a, b) = if a.key <= b.key { (a, b) } else { (b, a) };
        let beta = self.config.beta_root;
        let score = beta * self.head(&a.head, &b.head) + (1.0 - beta) * self.children(a, b);
        score.clamp(0.0, 1.0)
    }

    fn children(&self, a: &Prepared, b: &Prepared) -> f64 {
        if a.roles.is_empty() && b.roles.is_empty() {
            return 1.0;
        }
        let (mut i, mut j) = (0, 0);
        let mut total = 0.0;
        let mut count = 0usize;
        while i < a.roles.len() || j < b.roles.len() {
            let order = match (a.roles.get(i), b.roles.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match order {
                Ordering::Equal => {
                    total += self.role(&a.roles[i].1, &b.roles[j].1);
                    i += 1;
                    j += 1;
                }
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
            }
            count += 1;
        }
        total / count as f64
    }

    /// Greedy disjoint pairing of two non-empty child groups.
    fn role(&self, xs: &[Prepared], ys: &[Prepared]) -> f64 {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(xs.len() * ys.len());
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                pairs.push((self.tree(x, y), i, j));
            }
        }
        pairs.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
        let mut used_x = vec![false; xs.len()];
        let mut used_y = vec![false; ys.len()];
        let mut sum = 0.0;
        let mut left = xs.len().min(ys.len());
        for (score, i, j) in pairs {
            if left == 0 {
                break;
            }
            if !used_x[i] && !used_y[j] {
                used_x[i] = true;
                used_y[j] = true;
                sum += score;
                left -= 1;
            }
        }
        sum / xs.len().max(ys.len()) as f64
    }
}

/// Similarity of two sememes under `config`.
pub fn sememe_similarity(
    a: SememeId,
    b: SememeId,
    taxonomy: &Taxonomy,
    config: &SimilarityConfig,
) -> Result<f64, QueryError> {
    let a = taxonomy.dense_index(a)?;
    let b = taxonomy.dense_index(b)?;
    Ok(Scorer { taxonomy, config }.sememe(a, b))
}

/// Similarity of two arbitrary trees; every sememe head must resolve.
pub fn tree_similarity(
    a: &SememeTree,
    b: &SememeTree,
    taxonomy: &Taxonomy,
    config: &SimilarityConfig,
) -> Result<f64, QueryError> {
    let a = Prepared::new(a, taxonomy)?;
    let b = Prepared::new(b, taxonomy)?;
    Ok(Scorer { taxonomy, config }.tree(&a, &b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSense<'a> {
    pub sense: &'a Sense,
    pub score: f64,
}

/// Best sense pair behind a word similarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordSimilarity {
    pub score: f64,
    pub best_a: SenseId,
    pub best_b: SenseId,
    pub pairs_evaluated: usize,
}

/// Similarity queries over a loaded lexicon. Definitions are prepared once at
/// construction.
pub struct SimilarityEngine {
    lexicon: Arc<Lexicon>,
    config: SimilarityConfig,
    prepared: Vec<Prepared>,
}

impl fmt::Debug for SimilarityEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimilarityEngine")
            .field("senses", &self.lexicon.len())
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl SimilarityEngine {
    pub fn new(lexicon: Arc<Lexicon>, config: SimilarityConfig) -> Self {
        let prepared = lexicon
            .senses()
            .par_iter()
            .map(|s| Prepared::new(&s.def, lexicon.taxonomy()).expect("definitions are validated at load"))
            .collect();
        SimilarityEngine { lexicon, config, prepared }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn lexicon_arc(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.config
    }

    fn scorer(&self) -> Scorer<'_> {
        Scorer { taxonomy: self.lexicon.taxonomy(), config: &self.config }
    }

    pub fn sense_similarity(&self, a: SenseId, b: SenseId) -> Result<f64, QueryError> {
        let a = self.lexicon.position(a)?;
        let b = self.lexicon.position(b)?;
        Ok(self.scorer().tree(&self.prepared[a], &self.prepared[b]))
    }

    /// Maximum similarity over all sense pairs of the two words. Ties keep the
    /// pair with the smallest ids.
    pub fn word_similarity(&self, a: &str, b: &str, lang: Lang) -> Result<WordSimilarity, QueryError> {
        let xs = self.lexicon.word_positions(a, lang);
        if xs.is_empty() {
            return Err(QueryError::NoSuchWord(a.to_owned()));
        }
        let ys = self.lexicon.word_positions(b, lang);
        if ys.is_empty() {
            return Err(QueryError::NoSuchWord(b.to_owned()));
        }
        let scorer = self.scorer();
        let senses = self.lexicon.senses();
        let mut best: Option<WordSimilarity> = None;
        for &x in &xs {
            for &y in &ys {
                let score = scorer.tree(&self.prepared[x], &self.prepared[y]);
                if best.is_none_or(|b| score > b.score) {
                    best =
                        Some(WordSimilarity { score, best_a: senses[x].id, best_b: senses[y].id, pairs_evaluated: 0 });
                }
            }
        }
        let mut best = best.expect("both sense lists are non-empty");
        best.pairs_evaluated = xs.len() * ys.len();
        Ok(best)
    }

    /// Top `k` senses by similarity to `target`, excluding the target itself.
    /// Descending score, ascending id on ties.
    pub fn nearest_senses(&self, target: SenseId, k: usize) -> Result<Vec<ScoredSense<'_>>, QueryError> {
        if k == 0 {
            return Err(QueryError::InvalidK);
        }
        let t = self.lexicon.position(target)?;
        let scorer = self.scorer();
        let mut scored: Vec<(f64, usize)> = self
            .prepared
            .par_iter()
            .enumerate()
            .filter(|(i, _)| *i != t)
            .map(|(i, p)| (scorer.tree(&self.prepared[t], p), i))
            .collect();
        // Positions follow ascending sense id, so they break ties directly.
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_unstable_by(by_rank);
        let senses = self.lexicon.senses();
        Ok(scored.into_iter().map(|(score, i)| ScoredSense { sense: &senses[i], score }).collect())
    }
}
