//! Test support: fixture access, reference oracles and generators.
//!
//! The oracles here deliberately avoid the library's own algorithms. Sememe
//! distances come from a breadth-first search over the raw taxonomy records,
//! tree similarity uses exhaustive assignment instead of greedy pairing, and
//! nearest-sense answers come from a full sort of every candidate.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use rand::Rng;
use serde::Deserialize;
use serde_json::Value;

use sememe_kb::kdml::{Child, NodeHead, Placeholder, RoleName, SememeRef, SememeTree};
use sememe_kb::SimilarityConfig;

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root")
}

pub fn fixture_dir() -> PathBuf {
    workspace_root().join("fixtures/mini")
}

#[derive(Debug, Clone, Deserialize)]
pub struct SearchCase {
    pub query: String,
    pub lang: String,
    pub mode: String,
    pub ids: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SenseSummary {
    pub zh: String,
    pub en: String,
    pub pos: String,
}

/// Hand-checked expectations shipped next to the mini fixture.
#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub stats: Value,
    pub category_roots: BTreeMap<String, usize>,
    pub category_sizes: BTreeMap<String, usize>,
    pub ancestors: BTreeMap<String, Vec<u32>>,
    pub sense_ids: Vec<u64>,
    pub senses_by_id: BTreeMap<String, SenseSummary>,
    pub sememe_senses: BTreeMap<String, Vec<u64>>,
    pub search: Vec<SearchCase>,
    pub word_sense_counts: BTreeMap<String, usize>,
}

pub fn manifest() -> Manifest {
    let text = std::fs::read_to_string(fixture_dir().join("manifest.json")).expect("manifest.json");
    serde_json::from_str(&text).expect("manifest parses")
}

/// Raw lines of a fixture JSONL file.
pub fn fixture_lines(name: &str) -> Vec<Value> {
    read_lines(&fixture_dir().join(name))
}

pub fn read_lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .expect("fixture file")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("fixture line"))
        .collect()
}

/// Undirected adjacency over raw taxonomy records, searched breadth-first.
pub struct BfsTaxonomy {
    adjacency: HashMap<u32, Vec<u32>>,
    labels: HashMap<String, u32>,
    pub ids: Vec<u32>,
}

impl BfsTaxonomy {
    pub fn from_records(records: &[Value]) -> Self {
        let mut adjacency: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut labels = HashMap::new();
        let mut ids = Vec::new();
        for r in records {
            let id = r["id"].as_u64().unwrap() as u32;
            ids.push(id);
            adjacency.entry(id).or_default();
            labels.insert(format!("{}|{}", r["en"].as_str().unwrap(), r["zh"].as_str().unwrap()), id);
            if let Some(p) = r["parent"].as_u64() {
                adjacency.entry(id).or_default().push(p as u32);
                adjacency.entry(p as u32).or_default().push(id);
            }
        }
        ids.sort_unstable();
        BfsTaxonomy { adjacency, labels, ids }
    }

    pub fn fixture() -> Self {
        Self::from_records(&fixture_lines("taxonomy.jsonl"))
    }

    pub fn id_of(&self, label: &SememeRef) -> u32 {
        self.labels[&label.to_string()]
    }

    pub fn distance(&self, from: u32, to: u32) -> Option<u32> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([(from, 0u32)]);
        while let Some((node, d)) = queue.pop_front() {
            if node == to {
                return Some(d);
            }
            for &next in &self.adjacency[&node] {
                if seen.insert(next) {
                    queue.push_back((next, d + 1));
                }
            }
        }
        None
    }
}

/// Tree similarity with optimal (exhaustive) pairing of same-role children.
pub struct ExhaustiveOracle<'a> {
    pub taxonomy: &'a BfsTaxonomy,
    pub config: SimilarityConfig,
}

impl ExhaustiveOracle<'_> {
    fn head(&self, a: &NodeHead, b: &NodeHead) -> f64 {
        match (a, b) {
            (NodeHead::Sememe(x), NodeHead::Sememe(y)) => {
                match self.taxonomy.distance(self.taxonomy.id_of(x), self.taxonomy.id_of(y)) {
                    Some(d) => self.config.alpha / (self.config.alpha + d as f64),
                    None => self.config.cross_tree_sim,
                }
            }
            (NodeHead::Placeholder(x), NodeHead::Placeholder(y)) if x == y => self.config.placeholder_match,
            (NodeHead::Literal(x), NodeHead::Literal(y)) if x == y => 1.0,
            _ => 0.0,
        }
    }

    pub fn tree(&self, a: &SememeTree, b: &SememeTree) -> f64 {
        let head = self.head(&a.head, &b.head);
        let children = if a.children.is_empty() && b.children.is_empty() {
            1.0
        } else {
            let group = |t: &'_ SememeTree| {
                let mut m: BTreeMap<String, Vec<SememeTree>> = BTreeMap::new();
                for c in &t.children {
                    m.entry(c.role.to_string()).or_default().push(c.tree.clone());
                }
                m
            };
            let (ga, gb) = (group(a), group(b));
            let roles: BTreeSet<&String> = ga.keys().chain(gb.keys()).collect();
            let mut total = 0.0;
            for role in &roles {
                total += match (ga.get(*role), gb.get(*role)) {
                    (Some(xs), Some(ys)) => self.best_assignment(xs, ys) / xs.len().max(ys.len()) as f64,
                    _ => 0.0,
                };
            }
            total / roles.len() as f64
        };
        let beta = self.config.beta_root;
        (beta * head + (1.0 - beta) * children).clamp(0.0, 1.0)
    }

    /// Maximum total score over all injective pairings of the smaller side.
    fn best_assignment(&self, xs: &[SememeTree], ys: &[SememeTree]) -> f64 {
        let (xs, ys, swap) = if xs.len() <= ys.len() { (xs, ys, false) } else { (ys, xs, true) };
        let scores: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| ys.iter().map(|y| if swap { self.tree(y, x) } else { self.tree(x, y) }).collect())
            .collect();
        fn go(scores: &[Vec<f64>], row: usize, used: &mut Vec<bool>, picked: &mut Vec<f64>, best: &mut f64) {
            if row == scores.len() {
                let mut sorted = picked.clone();
                sorted.sort_by(|a, b| b.total_cmp(a));
                let sum: f64 = sorted.iter().sum();
                if sum > *best {
                    *best = sum;
                }
                return;
            }
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    picked.push(scores[row][j]);
                    go(scores, row + 1, used, picked, best);
                    picked.pop();
                    used[j] = false;
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        go(&scores, 0, &mut vec![false; ys.len()], &mut Vec::new(), &mut best);
        best
    }
}

/// Parsed fixture senses straight from the JSONL, independent of the lexicon.
pub struct OracleSense {
    pub id: u64,
    pub zh: String,
    pub en: String,
    pub def: SememeTree,
}

pub fn oracle_senses(records: &[Value]) -> Vec<OracleSense> {
    records
        .iter()
        .map(|r| OracleSense {
            id: r["id"].as_u64().unwrap(),
            zh: r["zh"].as_str().unwrap().to_owned(),
            en: r["en"].as_str().unwrap().to_owned(),
            def: sememe_kb::parse_def(r["def"].as_str().unwrap()).unwrap(),
        })
        .collect()
}

/// Full scan: score every other sense, sort by (score desc, id asc), take k.
pub fn brute_force_nearest(
    oracle: &ExhaustiveOracle<'_>,
    senses: &[OracleSense],
    target: u64,
    k: usize,
) -> Vec<(u64, f64)> {
    let t = senses.iter().find(|s| s.id == target).expect("target sense");
    let mut all: Vec<(u64, f64)> =
        senses.iter().filter(|s| s.id != target).map(|s| (s.id, oracle.tree(&t.def, &s.def))).collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Largest number of children sharing one role at any node.
pub fn max_role_multiplicity(tree: &SememeTree) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for c in &tree.children {
        *counts.entry(c.role.as_str()).or_default() += 1;
    }
    let here = counts.values().copied().max().unwrap_or(0);
    tree.children.iter().map(|c| max_role_multiplicity(&c.tree)).fold(here, usize::max)
}

const ENGLISH: &[&str] = &["human", "child", "fruit", "ProperName", "a", "$x", "~tilde", "名字", "x_1"];
const CHINESE: &[&str] = &["人", "儿童", "水果", "专", "b", "?", "一二三"];
const ROLES: &[&str] = &["modifier", "agent", "patient", "PatientProduct", "r", "x9", "a_b"];
const LITERALS: &[&str] = &["", "春节", "with space", "quote\"inside", "back\\slash", "{:,=|}"];

fn arb_head() -> impl Strategy<Value = NodeHead> {
    prop_oneof![
        6 => (prop::sample::select(ENGLISH), prop::sample::select(CHINESE))
            .prop_map(|(e, z)| NodeHead::Sememe(SememeRef::new(e, z).unwrap())),
        1 => prop::sample::select(vec![Placeholder::Dollar, Placeholder::Tilde, Placeholder::Question])
            .prop_map(NodeHead::Placeholder),
        1 => prop::sample::select(LITERALS).prop_map(|s| NodeHead::Literal(s.to_owned())),
    ]
}

/// Random trees of depth at most `depth` (counting nodes) with at most
/// `branching` children per node.
pub fn arb_tree(depth: u32, branching: usize) -> impl Strategy<Value = SememeTree> {
    let leaf = arb_head().prop_map(SememeTree::leaf);
    leaf.prop_recursive(depth.saturating_sub(1), 256, branching as u32, move |inner| {
        (arb_head(), prop::collection::vec((prop::sample::select(ROLES), inner), 0..=branching)).prop_map(
            |(head, kids)| SememeTree {
                head,
                children: kids.into_iter().map(|(r, tree)| Child { role: RoleName::new(r).unwrap(), tree }).collect(),
            },
        )
    })
}

/// Random definition built only from fixture sememes and common roles, used
/// for synthetic scale tests.
pub fn random_fixture_def<R: Rng>(rng: &mut R, labels: &[String], depth: u32) -> String {
    let mut out = String::from("{");
    out.push_str(&labels[rng.random_range(0..labels.len())]);
    if depth > 1 && rng.random_bool(0.6) {
        let n = rng.random_range(1..=3);
        for i in 0..n {
            out.push(if i == 0 { ':' } else { ',' });
            out.push_str(ROLES[rng.random_range(0..ROLES.len())]);
            out.push('=');
            out.push_str(&random_fixture_def(rng, labels, depth - 1));
        }
    }
    out.push('}');
    out
}

/// `key=value` pairs of a DOT attribute list.
pub type DotAttrs = Vec<(String, String)>;

/// Statements of a parsed DOT digraph.
#[derive(Debug, Default)]
pub struct DotGraph {
    pub directed: bool,
    pub nodes: Vec<(String, DotAttrs)>,
    pub edges: Vec<(String, String, DotAttrs)>,
}

#[derive(Debug, Clone, PartialEq)]
enum DotToken {
    Id(String),
    Punct(&'static str),
}

fn dot_tokens(text: &str) -> Result<Vec<DotToken>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(DotToken::Id(s));
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(DotToken::Punct("->"));
            i += 2;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            out.push(DotToken::Punct("--"));
            i += 2;
        } else if let Some(p) = ["{", "}", "[", "]", "=", ";", ","].into_iter().find(|p| p.starts_with(c)) {
            out.push(DotToken::Punct(p));
            i += 1;
        } else if c.is_alphanumeric() || c == '_' || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push(DotToken::Id(chars[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

/// Parse the node/edge/attribute subset of the DOT language.
pub fn parse_dot(text: &str) -> Result<DotGraph, String> {
    let tokens = dot_tokens(text)?;
    let mut pos = 0;
    let id = |pos: &mut usize| -> Result<String, String> {
        match tokens.get(*pos) {
            Some(DotToken::Id(s)) => {
                *pos += 1;
                Ok(s.clone())
            }
            other => Err(format!("expected identifier, found {other:?}")),
        }
    };
    let punct = |pos: &mut usize, p: &str| -> bool {
        match tokens.get(*pos) {
            Some(DotToken::Punct(q)) if *q == p => {
                *pos += 1;
                true
            }
            _ => false,
        }
    };
    let mut graph = DotGraph::default();
    let mut kw = id(&mut pos)?;
    if kw == "strict" {
        kw = id(&mut pos)?;
    }
    graph.directed = match kw.as_str() {
        "digraph" => true,
        "graph" => false,
        _ => return Err(format!("expected graph keyword, found {kw}")),
    };
    if matches!(tokens.get(pos), Some(DotToken::Id(_))) {
        pos += 1;
    }
    if !punct(&mut pos, "{") {
        return Err("expected '{'".into());
    }
    let edge_op = if graph.directed { "->" } else { "--" };
    loop {
        if punct(&mut pos, "}") {
            break;
        }
        let first = id(&mut pos)?;
        if punct(&mut pos, "=") {
            id(&mut pos)?;
        } else {
            let mut chain = vec![first];
            while punct(&mut pos, edge_op) {
                chain.push(id(&mut pos)?);
            }
            let mut attrs = Vec::new();
            if punct(&mut pos, "[") {
                while !punct(&mut pos, "]") {
                    let k = id(&mut pos)?;
                    if !punct(&mut pos, "=") {
                        return Err("expected '=' in attribute list".into());
                    }
                    attrs.push((k, id(&mut pos)?));
                    let _ = punct(&mut pos, ",") || punct(&mut pos, ";");
                }
            }
            if chain.len() == 1 {
                graph.nodes.push((chain.pop().unwrap(), attrs));
            } else {
                for w in chain.windows(2) {
                    graph.edges.push((w[0].clone(), w[1].clone(), attrs.clone()));
                }
            }
        }
        let _ = punct(&mut pos, ";");
    }
    if pos != tokens.len() {
        return Err("trailing tokens after graph".into());
    }
    Ok(graph)
}

/// Write a dataset of `n` synthetic senses over the fixture taxonomy into
/// `dir`. Word forms are drawn from a pool of `n / 2` per language so most
/// words have several senses. Returns the English word with the most senses.
pub fn write_synthetic_dataset(dir: &Path, n: usize, seed: u64) -> std::io::Result<String> {
    use rand::SeedableRng;
    use std::io::Write;

    let fixture = fixture_dir();
    std::fs::copy(fixture.join("taxonomy.jsonl"), dir.join("taxonomy.jsonl"))?;
    let labels: Vec<String> = fixture_lines("taxonomy.jsonl")
        .iter()
        .map(|r| format!("{}|{}", r["en"].as_str().unwrap(), r["zh"].as_str().unwrap()))
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pool = (n / 2).max(1);
    let mut counts = vec![0usize; pool];
    let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join("senses.jsonl"))?);
    for id in 0..n {
        let w = rng.random_range(0..pool);
        counts[w] += 1;
        let record = serde_json::json!({
            "id": id,
            "zh": format!("词{}", rng.random_range(0..pool)),
            "en": format!("w{w}"),
            "pos": "noun",
            "def": random_fixture_def(&mut rng, &labels, 4),
        });
        writeln!(out, "{record}")?;
    }
    out.flush()?;
    let busiest = (0..pool).max_by_key(|&w| (counts[w], std::cmp::Reverse(w))).unwrap();
    Ok(format!("w{busiest}"))
}
