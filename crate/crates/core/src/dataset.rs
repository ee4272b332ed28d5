//! Flat-file dataset layout: `taxonomy.jsonl` and `senses.jsonl` in one
//! directory, one JSON object per line.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use thiserror::Error;

use crate::lexicon::{Lexicon, LexiconError, LoadMode, SenseRecord};
use crate::taxonomy::{SememeRecord, Taxonomy, TaxonomyError};

pub const TAXONOMY_FILE: &str = "taxonomy.jsonl";
pub const SENSES_FILE: &str = "senses.jsonl";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("{TAXONOMY_FILE}: {0}")]
    Taxonomy(#[from] TaxonomyError),
    #[error("{SENSES_FILE}: {0}")]
    Lexicon(#[from] LexiconError),
}

/// A loaded dataset and, in lenient mode, everything that was skipped.
#[derive(Debug)]
pub struct Loaded {
    pub lexicon: Lexicon,
    pub issues: Vec<DatasetError>,
}

/// Parse a JSON Lines file. Blank lines are ignored; line numbers are 1-based.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<Result<T, DatasetError>>, DatasetError> {
    let io_err = |source| DatasetError::Io { path: path.to_owned(), source };
    let file = File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| DatasetError::Json {
            path: path.to_owned(),
            line: n + 1,
            source,
        }));
    }
    Ok(out)
}

pub fn load_taxonomy(dir: &Path) -> Result<Taxonomy, DatasetError> {
    let records = read_jsonl::<SememeRecord>(&dir.join(TAXONOMY_FILE))?.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Taxonomy::load(records)?)
}

/// Load a dataset directory. The taxonomy must always be clean; sense
/// problems abort in strict mode and are collected in lenient mode.
pub fn load_dir(dir: &Path, mode: LoadMode) -> Result<Loaded, DatasetError> {
    let taxonomy = load_taxonomy(dir)?;
    let mut issues = Vec::new();
    let mut records = Vec::new();
    for record in read_jsonl::<SenseRecord>(&dir.join(SENSES_FILE))? {
        match record {
            Ok(r) => records.push(r),
            Err(e) if mode == LoadMode::Lenient => issues.push(e),
            Err(e) => return Err(e),
        }
    }
    let outcome = Lexicon::load_with(records, taxonomy, mode)?;
    issues.extend(outcome.skipped.into_iter().map(DatasetError::Lexicon));
    Ok(Loaded { lexicon: outcome.lexicon, issues })
}

/// Strict load of a dataset directory.
pub fn load_lexicon(dir: &Path) -> Result<Lexicon, DatasetError> {
    load_dir(dir, LoadMode::Strict).map(|l| l.lexicon)
}
