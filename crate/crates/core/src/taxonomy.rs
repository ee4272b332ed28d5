//! Sememe inventory organised as one tree per top-level category.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::QueryError;
use crate::kdml::{InvalidName, SememeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Thing,
    Part,
    Attribute,
    Time,
    Space,
    AttributeValue,
    Event,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Thing,
        Category::Part,
        Category::Attribute,
        Category::Time,
        Category::Space,
        Category::AttributeValue,
        Category::Event,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Thing => "Thing",
            Category::Part => "Part",
            Category::Attribute => "Attribute",
            Category::Time => "Time",
            Category::Space => "Space",
            Category::AttributeValue => "AttributeValue",
            Category::Event => "Event",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| UnknownCategory(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SememeId(pub u32);

impl fmt::Display for SememeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One line of `taxonomy.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SememeRecord {
    pub id: SememeId,
    pub en: String,
    pub zh: String,
    pub category: Category,
    pub parent: Option<SememeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(into = "SememeRecord")]
pub struct Sememe {
    pub id: SememeId,
    pub label: SememeRef,
    pub category: Category,
    pub parent: Option<SememeId>,
}

impl From<Sememe> for SememeRecord {
    fn from(s: Sememe) -> Self {
        SememeRecord {
            id: s.id,
            en: s.label.english().to_owned(),
            zh: s.label.chinese().to_owned(),
            category: s.category,
            parent: s.parent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("sememe {id}: {source}")]
    InvalidLabel { id: SememeId, source: InvalidName },
    #[error("duplicate sememe id {0}")]
    DuplicateId(SememeId),
    #[error("sememe {id}: label {label} already used by sememe {first}")]
    DuplicateRef { id: SememeId, label: SememeRef, first: SememeId },
    #[error("sememe {id}: parent {parent} does not exist")]
    DanglingParent { id: SememeId, parent: SememeId },
    #[error("sememe {id} ({category}): parent {parent} is in category {parent_category}")]
    ParentCategoryMismatch { id: SememeId, category: Category, parent: SememeId, parent_category: Category },
    #[error("sememe {0} lies on a parent cycle")]
    CycleDetected(SememeId),
}

/// Validated, immutable sememe forest.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    sememes: Vec<Sememe>,
    index_of: HashMap<SememeId, usize>,
    by_ref: HashMap<SememeRef, usize>,
    by_english: HashMap<String, Vec<usize>>,
    by_chinese: HashMap<String, Vec<usize>>,
    parent: Vec<Option<usize>>,
    depth: Vec<u32>,
    root: Vec<usize>,
}

impl Taxonomy {
    /// Build a taxonomy, checking every forest invariant.
    pub fn load(records: impl IntoIterator<Item = SememeRecord>) -> Result<Self, TaxonomyError> {
        let mut sememes: Vec<Sememe> = Vec::new();
        let mut index_of = HashMap::new();
        let mut by_ref: HashMap<SememeRef, usize> = HashMap::new();
        for record in records {
            let label = SememeRef::new(record.en, record.zh)
                .map_err(|source| TaxonomyError::InvalidLabel { id: record.id, source })?;
            if index_of.contains_key(&record.id) {
                return Err(TaxonomyError::DuplicateId(record.id));
            }
            if let Some(&first) = by_ref.get(&label) {
                return Err(TaxonomyError::DuplicateRef { id: record.id, label, first: sememes[first].id });
            }
            let idx = sememes.len();
            index_of.insert(record.id, idx);
            by_ref.insert(label.clone(), idx);
            sememes.push(Sememe { id: record.id, label, category: record.category, parent: record.parent });
        }

        let mut parent = Vec::with_capacity(sememes.len());
        for s in &sememes {
            let p = match s.parent {
                None => None,
                Some(pid) => {
                    let &p = index_of.get(&pid).ok_or(TaxonomyError::DanglingParent { id: s.id, parent: pid })?;
                    if sememes[p].category != s.category {
                        return Err(TaxonomyError::ParentCategoryMismatch {
                            id: s.id,
                            category: s.category,
                            parent: pid,
                            parent_category: sememes[p].category,
                        });
                    }
                    Some(p)
                }
            };
            parent.push(p);
        }

        let (depth, root) = depths(&parent).map_err(|i| TaxonomyError::CycleDetected(sememes[i].id))?;

        // Re-index in id order so iteration and query results are id-sorted.
        let mut order: Vec<usize> = (0..sememes.len()).collect();
        order.sort_by_key(|&i| sememes[i].id);
        let mut new_pos = vec![0; sememes.len()];
        for (new, &old) in order.iter().enumerate() {
            new_pos[old] = new;
        }
        let sememes: Vec<Sememe> = order.iter().map(|&i| sememes[i].clone()).collect();
        let parent = order.iter().map(|&i| parent[i].map(|p| new_pos[p])).collect();
        let depth = order.iter().map(|&i| depth[i]).collect();
        let root = order.iter().map(|&i| new_pos[root[i]]).collect();

        let mut taxonomy = Taxonomy {
            index_of: HashMap::with_capacity(sememes.len()),
            by_ref: HashMap::with_capacity(sememes.len()),
            by_english: HashMap::new(),
            by_chinese: HashMap::new(),
            sememes,
            parent,
            depth,
            root,
        };
        for (i, s) in taxonomy.sememes.iter().enumerate() {
            taxonomy.index_of.insert(s.id, i);
            taxonomy.by_ref.insert(s.label.clone(), i);
            taxonomy.by_english.entry(s.label.english().to_owned()).or_default().push(i);
            taxonomy.by_chinese.entry(s.label.chinese().to_owned()).or_default().push(i);
        }
        Ok(taxonomy)
    }

    pub fn len(&self) -> usize {
        self.sememes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sememes.is_empty()
    }

    /// All sememes in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &Sememe> {
        self.sememes.iter()
    }

    pub fn get(&self, id: SememeId) -> Option<&Sememe> {
        self.index_of.get(&id).map(|&i| &self.sememes[i])
    }

    pub fn get_by_ref(&self, label: &SememeRef) -> Option<&Sememe> {
        self.by_ref.get(label).map(|&i| &self.sememes[i])
    }

    pub(crate) fn dense_index(&self, id: SememeId) -> Result<usize, QueryError> {
        self.index_of.get(&id).copied().ok_or(QueryError::UnknownSememe(id))
    }

    pub(crate) fn dense_index_of_ref(&self, label: &SememeRef) -> Result<usize, QueryError> {
        self.by_ref.get(label).copied().ok_or_else(|| QueryError::UnresolvedSememe(label.clone()))
    }

    /// Roots of the category trees, ascending id.
    pub fn roots(&self, category: Category) -> Vec<&Sememe> {
        self.sememes
            .iter()
            .enumerate()
            .filter(|(i, s)| s.category == category && self.parent[*i].is_none())
            .map(|(_, s)| s)
            .collect()
    }

    /// `en|zh` is an exact label lookup; anything else matches either label.
    pub fn resolve(&self, query: &str) -> Vec<&Sememe> {
        if query.contains('|') {
            return match query.parse::<SememeRef>() {
                Ok(label) => self.get_by_ref(&label).into_iter().collect(),
                Err(_) => Vec::new(),
            };
        }
        let mut hits: Vec<usize> =
            self.by_english.get(query).into_iter().chain(self.by_chinese.get(query)).flatten().copied().collect();
        hits.sort_unstable();
        hits.dedup();
        hits.into_iter().map(|i| &self.sememes[i]).collect()
    }

    /// Parent chain up to the root, nearest first, `id` itself excluded.
    pub fn ancestors(&self, id: SememeId) -> Result<Vec<&Sememe>, QueryError> {
        let mut cur = self.dense_index(id)?;
        let mut out = Vec::with_capacity(self.depth[cur] as usize);
        while let Some(p) = self.parent[cur] {
            out.push(&self.sememes[p]);
            cur = p;
        }
        Ok(out)
    }

    /// Edges between `id` and its root.
    pub fn depth(&self, id: SememeId) -> Result<u32, QueryError> {
        Ok(self.depth[self.dense_index(id)?])
    }

    pub fn root_of(&self, id: SememeId) -> Result<&Sememe, QueryError> {
        Ok(&self.sememes[self.root[self.dense_index(id)?]])
    }

    /// Number of edges on the path between `a` and `b`, or `None` when they
    /// sit in different trees.
    pub fn path_distance(&self, a: SememeId, b: SememeId) -> Result<Option<u32>, QueryError> {
        let a = self.dense_index(a)?;
        let b = self.dense_index(b)?;
        Ok(self.dense_distance(a, b))
    }

    pub(crate) fn dense_distance(&self, mut a: usize, mut b: usize) -> Option<u32> {
        if self.root[a] != self.root[b] {
            return None;
        }
        let mut steps = 0;
        while self.depth[a] > self.depth[b] {
            a = self.parent[a]?;
            steps += 1;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b]?;
            steps += 1;
        }
        while a != b {
            a = self.parent[a]?;
            b = self.parent[b]?;
            steps += 2;
        }
        Some(steps)
    }
}

/// Depth and root index per node; `Err(i)` names a node on a cycle.
fn depths(parent: &[Option<usize>]) -> Result<(Vec<u32>, Vec<usize>), usize> {
    const UNSET: u32 = u32::MAX;
    let mut depth = vec![UNSET; parent.len()];
    let mut root = vec![usize::MAX; parent.len()];
    let mut on_path = vec![false; parent.len()];
    let mut path = Vec::new();
    for start in 0..parent.len() {
        let mut cur = start;
        while depth[cur] == UNSET {
            if on_path[cur] {
                return Err(cur);
            }
            on_path[cur] = true;
            path.push(cur);
            match parent[cur] {
                Some(p) => cur = p,
                None => {
                    depth[cur] = 0;
                    root[cur] = cur;
                    path.pop();
                    on_path[cur] = false;
                    break;
                }
            }
        }
        while let Some(node) = path.pop() {
            on_path[node] = false;
            let p = parent[node].expect("non-root on path");
            depth[node] = depth[p] + 1;
            root[node] = root[p];
        }
    }
    Ok((depth, root))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u32, en: &str, zh: &str, category: Category, parent: Option<u32>) -> SememeRecord {
        SememeRecord { id: SememeId(id), en: en.into(), zh: zh.into(), category, parent: parent.map(SememeId) }
    }

    fn small() -> Taxonomy {
        Taxonomy::load([
            rec(0, "human", "人", Category::Thing, None),
            rec(1, "child", "儿童", Category::Thing, Some(0)),
            rec(2, "adult", "成人", Category::Thing, Some(0)),
            rec(3, "infant", "婴儿", Category::Thing, Some(1)),
            rec(10, "ProperName", "专", Category::AttributeValue, None),
            rec(11, "human", "人类", Category::AttributeValue, Some(10)),
        ])
        .unwrap()
    }

    #[test]
    fn two_records_one_root() {
        let t = Taxonomy::load([
            rec(0, "human", "人", Category::Thing, None),
            rec(1, "child", "儿童", Category::Thing, Some(0)),
        ])
        .unwrap();
        assert_eq!(t.roots(Category::Thing).len(), 1);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn load_errors() {
        let dangling = Taxonomy::load([rec(5, "a", "甲", Category::Thing, Some(999))]);
        assert_eq!(dangling.unwrap_err(), TaxonomyError::DanglingParent { id: SememeId(5), parent: SememeId(999) });

        let dup = Taxonomy::load([rec(0, "a", "甲", Category::Thing, None), rec(0, "b", "乙", Category::Thing, None)]);
        assert_eq!(dup.unwrap_err(), TaxonomyError::DuplicateId(SememeId(0)));

        let dup_ref =
            Taxonomy::load([rec(0, "a", "甲", Category::Thing, None), rec(1, "a", "甲", Category::Event, None)]);
        assert!(matches!(dup_ref.unwrap_err(), TaxonomyError::DuplicateRef { id: SememeId(1), .. }));

        let cross =
            Taxonomy::load([rec(0, "a", "甲", Category::Thing, None), rec(1, "b", "乙", Category::Event, Some(0))]);
        assert!(matches!(cross.unwrap_err(), TaxonomyError::ParentCategoryMismatch { id: SememeId(1), .. }));

        let cycle = Taxonomy::load([
            rec(0, "a", "甲", Category::Thing, None),
            rec(1, "b", "乙", Category::Thing, Some(2)),
            rec(2, "c", "丙", Category::Thing, Some(1)),
        ]);
        assert!(matches!(cycle.unwrap_err(), TaxonomyError::CycleDetected(_)));

        let self_loop = Taxonomy::load([rec(7, "a", "甲", Category::Thing, Some(7))]);
        assert_eq!(self_loop.unwrap_err(), TaxonomyError::CycleDetected(SememeId(7)));

        let bad_label = Taxonomy::load([rec(0, "a|b", "甲", Category::Thing, None)]);
        assert!(matches!(bad_label.unwrap_err(), TaxonomyError::InvalidLabel { .. }));
    }

    #[test]
    fn resolve_queries() {
        let t = small();
        let ids = |q: &str| t.resolve(q).iter().map(|s| s.id.0).collect::<Vec<_>>();
        assert_eq!(ids("human|人"), [0]);
        assert_eq!(ids("human"), [0, 11]);
        assert_eq!(ids("人"), [0]);
        assert_eq!(ids("ProperName|专"), [10]);
        assert_eq!(ids("nobody"), Vec::<u32>::new());
        assert_eq!(ids("human|"), Vec::<u32>::new());
    }

    #[test]
    fn distances_and_ancestry() {
        let t = small();
        let d = |a, b| t.path_distance(SememeId(a), SememeId(b)).unwrap();
        assert_eq!(d(3, 3), Some(0));
        assert_eq!(d(0, 1), Some(1));
        assert_eq!(d(3, 2), Some(3));
        assert_eq!(d(3, 11), None);
        assert_eq!(t.path_distance(SememeId(3), SememeId(99)), Err(QueryError::UnknownSememe(SememeId(99))));

        let chain: Vec<u32> = t.ancestors(SememeId(3)).unwrap().iter().map(|s| s.id.0).collect();
        assert_eq!(chain, [1, 0]);
        assert!(t.ancestors(SememeId(0)).unwrap().is_empty());
        assert_eq!(t.depth(SememeId(3)).unwrap(), 2);
        assert_eq!(t.root_of(SememeId(3)).unwrap().id, SememeId(0));
    }

    #[test]
    fn category_text_is_stable() {
        for c in Category::ALL {
            assert_eq!(c.as_str().parse::<Category>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{c}\""));
        }
        assert!("thing".parse::<Category>().is_err());
    }
}
