//! Sense records and the immutable indices used for retrieval.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::QueryError;
use crate::kdml::{parse_def, ParseError, SememeRef, SememeTree};
use crate::taxonomy::{SememeId, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SenseId(pub u64);

impl fmt::Display for SenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One line of `senses.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseRecord {
    pub id: SenseId,
    pub zh: String,
    pub en: String,
    pub pos: String,
    pub def: String,
    #[serde(default)]
    pub sentiment: Option<String>,
    #[serde(default)]
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sense {
    pub id: SenseId,
    pub zh: String,
    pub en: String,
    pub pos: String,
    pub def: SememeTree,
    pub sentiment: Option<String>,
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("duplicate sense id {0}")]
    DuplicateSenseId(SenseId),
    #[error("sense {id}: empty {field} word form")]
    EmptyWordForm { id: SenseId, field: &'static str },
    #[error("sense {id}: cannot parse definition: {source}")]
    DefinitionParseError { id: SenseId, source: ParseError },
    #[error("sense {id}: definition uses unknown sememe {label}")]
    UnknownSememeInDef { id: SenseId, label: SememeRef },
}

impl LexiconError {
    pub fn sense_id(&self) -> SenseId {
        match self {
            LexiconError::DuplicateSenseId(id)
            | LexiconError::EmptyWordForm { id, .. }
            | LexiconError::DefinitionParseError { id, .. }
            | LexiconError::UnknownSememeInDef { id, .. } => *id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// First bad record aborts the load.
    #[default]
    Strict,
    /// Bad records are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    Zh,
    En,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {what} {value:?}")]
pub struct ParseOptionError {
    pub what: &'static str,
    pub value: String,
}

impl FromStr for Lang {
    type Err = ParseOptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zh" => Ok(Lang::Zh),
            "en" => Ok(Lang::En),
            "auto" => Ok(Lang::Auto),
            _ => Err(ParseOptionError { what: "language", value: s.to_owned() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Exact,
    Prefix,
    Substring,
}

impl FromStr for MatchMode {
    type Err = ParseOptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(MatchMode::Exact),
            "prefix" => Ok(MatchMode::Prefix),
            "substring" => Ok(MatchMode::Substring),
            _ => Err(ParseOptionError { what: "match mode", value: s.to_owned() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub sense_count: usize,
    pub distinct_zh_words: usize,
    pub distinct_en_words: usize,
    pub sememe_count: usize,
}

/// Result of a load: the lexicon plus whatever lenient mode skipped.
#[derive(Debug)]
pub struct LoadOutcome {
    pub lexicon: Lexicon,
    pub skipped: Vec<LexiconError>,
}

type WordIndex = BTreeMap<String, Vec<usize>>;

#[derive(Debug)]
pub struct Lexicon {
    taxonomy: Taxonomy,
    senses: Vec<Sense>,
    index_of: HashMap<SenseId, usize>,
    zh_index: WordIndex,
    en_index: WordIndex,
    /// Dense taxonomy index -> senses whose definition mentions that sememe.
    sememe_index: Vec<Vec<usize>>,
}

impl Lexicon {
    /// Strict load: any bad record fails the whole load.
    pub fn load(records: impl IntoIterator<Item = SenseRecord>, taxonomy: Taxonomy) -> Result<Self, LexiconError> {
        Self::load_with(records, taxonomy, LoadMode::Strict).map(|o| o.lexicon)
    }

    pub fn load_with(
        records: impl IntoIterator<Item = SenseRecord>,
        taxonomy: Taxonomy,
        mode: LoadMode,
    ) -> Result<LoadOutcome, LexiconError> {
        let mut senses: Vec<Sense> = Vec::new();
        let mut seen = HashSet::new();
        let mut skipped = Vec::new();
        for record in records {
            match check_record(record, &taxonomy, &seen) {
                Ok(sense) => {
                    seen.insert(sense.id);
                    senses.push(sense);
                }
                Err(e) if mode == LoadMode::Lenient => skipped.push(e),
                Err(e) => return Err(e),
            }
        }
        senses.sort_by_key(|s| s.id);

        let mut index_of = HashMap::with_capacity(senses.len());
        let mut zh_index = WordIndex::new();
        let mut en_index = WordIndex::new();
        let mut sememe_index = vec![Vec::new(); taxonomy.len()];
        for (i, sense) in senses.iter().enumerate() {
            index_of.insert(sense.id, i);
            zh_index.entry(sense.zh.clone()).or_default().push(i);
            en_index.entry(sense.en.clone()).or_default().push(i);
            for label in sense.def.sememes() {
                let s = taxonomy.dense_index_of_ref(label).expect("definition validated at load");
                let list: &mut Vec<usize> = &mut sememe_index[s];
                if list.last() != Some(&i) {
                    list.push(i);
                }
            }
        }

        Ok(LoadOutcome { lexicon: Lexicon { taxonomy, senses, index_of, zh_index, en_index, sememe_index }, skipped })
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn len(&self) -> usize {
        self.senses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }

    /// All senses in ascending id order.
    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn get_sense(&self, id: SenseId) -> Result<&Sense, QueryError> {
        self.position(id).map(|i| &self.senses[i])
    }

    pub(crate) fn position(&self, id: SenseId) -> Result<usize, QueryError> {
        self.index_of.get(&id).copied().ok_or(QueryError::UnknownSense(id))
    }

    fn indices(&self, lang: Lang) -> impl Iterator<Item = &WordIndex> {
        let (zh, en) = match lang {
            Lang::Zh => (true, false),
            Lang::En => (false, true),
            Lang::Auto => (true, true),
        };
        zh.then_some(&self.zh_index).into_iter().chain(en.then_some(&self.en_index))
    }

    /// Positions of senses whose word form equals `word`, ascending id.
    pub(crate) fn word_positions(&self, word: &str, lang: Lang) -> Vec<usize> {
        let mut out: Vec<usize> = self.indices(lang).filter_map(|ix| ix.get(word)).flatten().copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Senses whose word form is exactly `word`.
    pub fn senses_for_word(&self, word: &str, lang: Lang) -> Vec<&Sense> {
        self.word_positions(word, lang).into_iter().map(|i| &self.senses[i]).collect()
    }

    /// Ranked word search: exact hits, then prefix hits, then substring hits,
    /// each band in ascending sense id. The empty query matches nothing.
    pub fn search_word(&self, query: &str, lang: Lang, mode: MatchMode) -> Vec<&Sense> {
        if query.is_empty() {
            return Vec::new();
        }
        let mut band: HashMap<usize, u8> = HashMap::new();
        let mut note = |positions: &[usize], b: u8| {
            for &p in positions {
                band.entry(p).and_modify(|old| *old = (*old).min(b)).or_insert(b);
            }
        };
        for index in self.indices(lang) {
            match mode {
                MatchMode::Exact => {
                    if let Some(hits) = index.get(query) {
                        note(hits, 0);
                    }
                }
                MatchMode::Prefix => {
                    for (key, hits) in index.range(query.to_owned()..) {
                        if !key.starts_with(query) {
                            break;
                        }
                        note(hits, if key == query { 0 } else { 1 });
                    }
                }
                MatchMode::Substring => {
                    for (key, hits) in index {
                        let b = if key == query {
                            0
                        } else if key.starts_with(query) {
                            1
                        } else if key.contains(query) {
                            2
                        } else {
                            continue;
                        };
                        note(hits, b);
                    }
                }
            }
        }
        let mut ranked: Vec<(u8, usize)> = band.into_iter().map(|(p, b)| (b, p)).collect();
        ranked.sort_unstable();
        ranked.into_iter().map(|(_, p)| &self.senses[p]).collect()
    }

    /// Senses whose definition contains `sememe` at any depth, ascending id.
    pub fn senses_with_sememe(&self, sememe: SememeId) -> Result<Vec<&Sense>, QueryError> {
        let s = self.taxonomy.dense_index(sememe)?;
        Ok(self.sememe_index[s].iter().map(|&i| &self.senses[i]).collect())
    }

    pub fn senses_with_sememe_ref(&self, label: &SememeRef) -> Result<Vec<&Sense>, QueryError> {
        let s = self.taxonomy.dense_index_of_ref(label)?;
        Ok(self.sememe_index[s].iter().map(|&i| &self.senses[i]).collect())
    }

    pub fn stats(&self) -> Stats {
        Stats {
            sense_count: self.senses.len(),
            distinct_zh_words: self.zh_index.len(),
            distinct_en_words: self.en_index.len(),
            sememe_count: self.taxonomy.len(),
        }
    }
}

fn check_record(record: SenseRecord, taxonomy: &Taxonomy, seen: &HashSet<SenseId>) -> Result<Sense, LexiconError> {
    let id = record.id;
    if seen.contains(&id) {
        return Err(LexiconError::DuplicateSenseId(id));
    }
    if record.zh.is_empty() {
        return Err(LexiconError::EmptyWordForm { id, field: "zh" });
    }
    if record.en.is_empty() {
        return Err(LexiconError::EmptyWordForm { id, field: "en" });
    }
    let def = parse_def(&record.def).map_err(|source| LexiconError::DefinitionParseError { id, source })?;
    if let Some(label) = def.sememes().find(|r| taxonomy.get_by_ref(r).is_none()) {
        return Err(LexiconError::UnknownSememeInDef { id, label: label.clone() });
    }
    Ok(Sense {
        id,
        zh: record.zh,
        en: record.en,
        pos: record.pos,
        def,
        sentiment: record.sentiment,
        examples: record.examples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdml::ParseErrorKind;
    use crate::taxonomy::{Category, SememeRecord};

    fn taxonomy() -> Taxonomy {
        let rec = |id, en: &str, zh: &str, parent: Option<u32>| SememeRecord {
            id: SememeId(id),
            en: en.into(),
            zh: zh.into(),
            category: Category::Thing,
            parent: parent.map(SememeId),
        };
        Taxonomy::load([
            rec(0, "thing", "万物", None),
            rec(1, "fruit", "水果", Some(0)),
            rec(2, "tree", "树", Some(0)),
            rec(3, "computer", "电脑", Some(0)),
        ])
        .unwrap()
    }

    fn sense(id: u64, zh: &str, en: &str, def: &str) -> SenseRecord {
        SenseRecord {
            id: SenseId(id),
            zh: zh.into(),
            en: en.into(),
            pos: "noun".into(),
            def: def.into(),
            sentiment: None,
            examples: vec![],
        }
    }

    fn sample() -> Lexicon {
        Lexicon::load(
            [
                sense(3, "苹果", "apple", "{fruit|水果}"),
                sense(1, "苹果", "apple", "{computer|电脑}"),
                sense(2, "苹果树", "apple tree", "{tree|树:product={fruit|水果}}"),
                sense(4, "菠萝", "pineapple", "{fruit|水果}"),
                sense(5, "应用", "app", "{computer|电脑}"),
            ],
            taxonomy(),
        )
        .unwrap()
    }

    fn ids(senses: Vec<&Sense>) -> Vec<u64> {
        senses.iter().map(|s| s.id.0).collect()
    }

    #[test]
    fn empty_stream() {
        let lex = Lexicon::load([], taxonomy()).unwrap();
        assert_eq!(lex.stats(), Stats { sense_count: 0, distinct_zh_words: 0, distinct_en_words: 0, sememe_count: 4 });
    }

    #[test]
    fn single_record() {
        let lex = Lexicon::load([sense(0, "树", "tree", "{tree|树}")], taxonomy()).unwrap();
        assert_eq!(lex.get_sense(SenseId(0)).unwrap().en, "tree");
        assert_eq!(lex.get_sense(SenseId(9)), Err(QueryError::UnknownSense(SenseId(9))));
    }

    #[test]
    fn strict_errors() {
        let bad = Lexicon::load([sense(7, "苹果", "apple", "{fruit|水果")], taxonomy()).unwrap_err();
        match bad {
            LexiconError::DefinitionParseError { id, source } => {
                assert_eq!(id, SenseId(7));
                assert_eq!(source.kind, ParseErrorKind::UnbalancedBraces);
            }
            other => panic!("unexpected {other:?}"),
        }
        let dup = Lexicon::load([sense(1, "a", "a", "{fruit|水果}"), sense(1, "b", "b", "{fruit|水果}")], taxonomy());
        assert_eq!(dup.unwrap_err(), LexiconError::DuplicateSenseId(SenseId(1)));
        let unknown = Lexicon::load([sense(1, "a", "a", "{unicorn|独角兽}")], taxonomy());
        assert!(matches!(unknown.unwrap_err(), LexiconError::UnknownSememeInDef { .. }));
        let empty = Lexicon::load([sense(1, "", "a", "{fruit|水果}")], taxonomy());
        assert!(matches!(empty.unwrap_err(), LexiconError::EmptyWordForm { field: "zh", .. }));
    }

    #[test]
    fn lenient_skips() {
        let outcome = Lexicon::load_with(
            [
                sense(1, "a", "a", "{fruit|水果}"),
                sense(2, "b", "b", "{fruit|水果"),
                sense(1, "c", "c", "{fruit|水果}"),
                sense(3, "d", "d", "{tree|树}"),
            ],
            taxonomy(),
            LoadMode::Lenient,
        )
        .unwrap();
        assert_eq!(outcome.lexicon.len(), 2);
        let skipped: Vec<u64> = outcome.skipped.iter().map(|e| e.sense_id().0).collect();
        assert_eq!(skipped, [2, 1]);
    }

    #[test]
    fn search_bands() {
        let lex = sample();
        assert_eq!(ids(lex.search_word("apple", Lang::En, MatchMode::Exact)), [1, 3]);
        assert_eq!(ids(lex.search_word("apple", Lang::En, MatchMode::Prefix)), [1, 3, 2]);
        assert_eq!(ids(lex.search_word("app", Lang::En, MatchMode::Prefix)), [5, 1, 2, 3]);
        assert_eq!(ids(lex.search_word("apple", Lang::En, MatchMode::Substring)), [1, 3, 2, 4]);
        assert_eq!(ids(lex.search_word("苹果", Lang::Auto, MatchMode::Prefix)), [1, 3, 2]);
        assert_eq!(ids(lex.search_word("apple", Lang::Zh, MatchMode::Exact)), Vec::<u64>::new());
        for mode in [MatchMode::Exact, MatchMode::Prefix, MatchMode::Substring] {
            assert!(lex.search_word("", Lang::Auto, mode).is_empty());
        }
    }

    #[test]
    fn sememe_postings() {
        let lex = sample();
        assert_eq!(ids(lex.senses_with_sememe(SememeId(1)).unwrap()), [2, 3, 4]);
        assert_eq!(ids(lex.senses_with_sememe(SememeId(0)).unwrap()), Vec::<u64>::new());
        assert_eq!(lex.senses_with_sememe(SememeId(42)), Err(QueryError::UnknownSememe(SememeId(42))));
        let label: SememeRef = "tree|树".parse().unwrap();
        assert_eq!(ids(lex.senses_with_sememe_ref(&label).unwrap()), [2]);
    }

    #[test]
    fn stats_count_keys() {
        let lex = sample();
        assert_eq!(lex.stats(), Stats { sense_count: 5, distinct_zh_words: 4, distinct_en_words: 4, sememe_count: 4 });
    }

    #[test]
    fn option_parsing() {
        assert_eq!("auto".parse::<Lang>().unwrap(), Lang::Auto);
        assert_eq!("substring".parse::<MatchMode>().unwrap(), MatchMode::Substring);
        assert!("fr".parse::<Lang>().is_err());
        assert!("fuzzy".parse::<MatchMode>().is_err());
    }
}
