//! Definition expressions: the text form of sememe trees.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! def       := '{' head ( ':' role ( ',' role )* )? '}'
//! head      := sememeRef | '$' | '~' | '?' | '"' chars '"'
//! role      := roleName '=' def
//! sememeRef := english '|' chinese
//! ```
//!
//! Role values are always full `def` nodes, so a bare sememe child is written
//! `{en|zh}`. Trees compare equal when their heads match and, for every role,
//! the children under that role match as a multiset; child order is kept for
//! rendering but carries no meaning.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::Taxonomy;

/// Deepest nesting accepted by [`parse_def`].
pub const MAX_DEPTH: usize = 64;

const RESERVED: [char; 7] = ['|', '{', '}', ':', ',', '=', '"'];

fn is_label_char(c: char) -> bool {
    !c.is_whitespace() && !RESERVED.contains(&c)
}

/// Why a label or role name was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidName {
    #[error("label is empty")]
    Empty,
    #[error("label {0:?} contains whitespace or reserved punctuation")]
    BadChar(String),
    #[error("role name {0:?} must match [A-Za-z][A-Za-z0-9_]*")]
    BadRole(String),
    #[error("sememe reference {0:?} must have the form english|chinese")]
    BadRef(String),
}

fn check_label(label: &str) -> Result<(), InvalidName> {
    if label.is_empty() {
        Err(InvalidName::Empty)
    } else if !label.chars().all(is_label_char) {
        Err(InvalidName::BadChar(label.to_owned()))
    } else {
        Ok(())
    }
}

/// Bilingual sememe label, written `english|chinese`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SememeRef {
    english: String,
    chinese: String,
}

impl SememeRef {
    pub fn new(english: impl Into<String>, chinese: impl Into<String>) -> Result<Self, InvalidName> {
        let english = english.into();
        let chinese = chinese.into();
        check_label(&english)?;
        check_label(&chinese)?;
        Ok(SememeRef { english, chinese })
    }

    pub fn english(&self) -> &str {
        &self.english
    }

    pub fn chinese(&self) -> &str {
        &self.chinese
    }
}

impl fmt::Display for SememeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.english, self.chinese)
    }
}

impl FromStr for SememeRef {
    type Err = InvalidName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (en, zh) = s.split_once('|').ok_or_else(|| InvalidName::BadRef(s.to_owned()))?;
        SememeRef::new(en, zh)
    }
}

impl Serialize for SememeRef {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SememeRef {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Name of a dynamic role labelling a parent-child edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RoleName(String);

impl RoleName {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidName> {
        let name = name.into();
        let mut chars = name.chars();
        let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ok {
            Ok(RoleName(name))
        } else {
            Err(InvalidName::BadRole(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RoleName {
    type Error = InvalidName;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        RoleName::new(value)
    }
}

impl From<RoleName> for String {
    fn from(value: RoleName) -> Self {
        value.0
    }
}

impl fmt::Display for RoleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Placeholder heads. Their meaning is opaque to this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Placeholder {
    #[serde(rename = "$")]
    Dollar,
    #[serde(rename = "~")]
    Tilde,
    #[serde(rename = "?")]
    Question,
}

impl Placeholder {
    pub fn as_char(self) -> char {
        match self {
            Placeholder::Dollar => '$',
            Placeholder::Tilde => '~',
            Placeholder::Question => '?',
        }
    }

    fn from_label(label: &str) -> Option<Self> {
        match label {
            "$" => Some(Placeholder::Dollar),
            "~" => Some(Placeholder::Tilde),
            "?" => Some(Placeholder::Question),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeHead {
    Sememe(SememeRef),
    Placeholder(Placeholder),
    Literal(String),
}

impl NodeHead {
    pub fn as_sememe(&self) -> Option<&SememeRef> {
        match self {
            NodeHead::Sememe(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for NodeHead {
    /// Same spelling as in a definition expression.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeHead::Sememe(r) => r.fmt(f),
            NodeHead::Placeholder(p) => write!(f, "{}", p.as_char()),
            NodeHead::Literal(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Child {
    pub role: RoleName,
    pub tree: SememeTree,
}

/// A parsed definition: a head plus role-labelled subtrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SememeTree {
    pub head: NodeHead,
    pub children: Vec<Child>,
}

impl SememeTree {
    pub fn leaf(head: NodeHead) -> Self {
        SememeTree { head, children: Vec::new() }
    }

    pub fn sememe(sref: SememeRef) -> Self {
        SememeTree::leaf(NodeHead::Sememe(sref))
    }

    pub fn with_child(mut self, role: RoleName, tree: SememeTree) -> Self {
        self.children.push(Child { role, tree });
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Nodes in preorder, children in stored order.
    pub fn nodes(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }

    pub fn size(&self) -> usize {
        self.nodes().count()
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.tree.depth()).max().unwrap_or(0)
    }

    /// Every sememe head in preorder, repeats included.
    pub fn sememes(&self) -> impl Iterator<Item = &SememeRef> {
        self.nodes().filter_map(|n| n.head.as_sememe())
    }

    /// Canonical text with children sorted by role and then by their own
    /// canonical key. Two trees are equal iff their keys are equal.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        self.write_key(&mut out);
        out
    }

    fn write_key(&self, out: &mut String) {
        out.push('{');
        out.push_str(&self.head.to_string());
        if !self.children.is_empty() {
            let mut parts: Vec<(&str, String)> =
                self.children.iter().map(|c| (c.role.as_str(), c.tree.canonical_key())).collect();
            parts.sort();
            for (i, (role, key)) in parts.iter().enumerate() {
                out.push(if i == 0 { ':' } else { ',' });
                out.push_str(role);
                out.push('=');
                out.push_str(key);
            }
        }
        out.push('}');
    }
}

impl PartialEq for SememeTree {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head
            && self.children.len() == other.children.len()
            && self.canonical_key() == other.canonical_key()
    }
}

impl Eq for SememeTree {}

impl Hash for SememeTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_key().hash(state);
    }
}

impl fmt::Display for SememeTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_def(self))
    }
}

impl FromStr for SememeTree {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_def(s)
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a SememeTree>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a SememeTree;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev().map(|c| &c.tree));
        Some(node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParseErrorKind {
    UnexpectedToken,
    UnbalancedBraces,
    EmptyHead,
    BadRoleName,
    TrailingInput,
}

/// Parse failure; `offset` counts characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{kind:?} at offset {offset}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub message: String,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self, kind: ParseErrorKind, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError { kind, offset, message: message.into() }
    }

    /// Error for a missing token; running out of input means a brace is open.
    fn expected(&self, what: &str) -> ParseError {
        match self.peek() {
            None => {
                self.error(ParseErrorKind::UnbalancedBraces, self.pos, format!("input ended while expecting {what}"))
            }
            Some(c) => self.error(ParseErrorKind::UnexpectedToken, self.pos, format!("expected {what}, found {c:?}")),
        }
    }

    fn label_run(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(is_label_char) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn node(&mut self, depth: usize) -> Result<SememeTree, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('{') => {}
            None => return Err(self.error(ParseErrorKind::UnbalancedBraces, self.pos, "expected '{'")),
            Some(c) => {
                return Err(self.error(
                    ParseErrorKind::UnbalancedBraces,
                    self.pos,
                    format!("expected '{{', found {c:?}"),
                ))
            }
        }
        if depth > MAX_DEPTH {
            return Err(self.error(
                ParseErrorKind::UnexpectedToken,
                self.pos,
                format!("nesting deeper than {MAX_DEPTH}"),
            ));
        }
        self.pos += 1;
        self.skip_ws();
        let head = self.head()?;
        self.skip_ws();
        let mut tree = SememeTree::leaf(head);
        if self.peek() == Some(':') {
            loop {
                self.pos += 1;
                self.skip_ws();
                let role_at = self.pos;
                let role = self.label_run();
                if role.is_empty() && self.peek().is_none() {
                    return Err(self.expected("a role name"));
                }
                let role =
                    RoleName::new(role).map_err(|e| self.error(ParseErrorKind::BadRoleName, role_at, e.to_string()))?;
                self.skip_ws();
                if self.peek() != Some('=') {
                    return Err(self.expected("'='"));
                }
                self.pos += 1;
                let child = self.node(depth + 1)?;
                tree.children.push(Child { role, tree: child });
                self.skip_ws();
                if self.peek() != Some(',') {
                    break;
                }
            }
        }
        self.skip_ws();
        if self.peek() != Some('}') {
            return Err(self.expected("'}'"));
        }
        self.pos += 1;
        Ok(tree)
    }

    fn head(&mut self) -> Result<NodeHead, ParseError> {
        match self.peek() {
            None => Err(self.expected("a head")),
            Some('}') | Some(':') => Err(self.error(ParseErrorKind::EmptyHead, self.pos, "node has no head")),
            Some('"') => self.literal(),
            Some(c) if is_label_char(c) => {
                let english = self.label_run();
                self.skip_ws();
                if self.peek() != Some('|') {
                    if let Some(p) = Placeholder::from_label(&english) {
                        return Ok(NodeHead::Placeholder(p));
                    }
                    return Err(self.expected("'|'"));
                }
                self.pos += 1;
                self.skip_ws();
                let chinese = self.label_run();
                if chinese.is_empty() {
                    return Err(self.expected("a Chinese label"));
                }
                Ok(NodeHead::Sememe(SememeRef { english, chinese }))
            }
            Some(c) => {
                Err(self.error(ParseErrorKind::UnexpectedToken, self.pos, format!("expected a head, found {c:?}")))
            }
        }
    }

    fn literal(&mut self) -> Result<NodeHead, ParseError> {
        let open = self.pos;
        self.pos += 1;
        let mut text = String::new();
        loop {
            match self.peek() {
                None => {
                    return Err(self.error(
                        ParseErrorKind::UnbalancedBraces,
                        self.pos,
                        format!("unterminated literal opened at offset {open}"),
                    ))
                }
                Some('"') => {
                    self.pos += 1;
                    return Ok(NodeHead::Literal(text));
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c) => {
                            text.push(c);
                            self.pos += 1;
                        }
                        None => continue,
                    }
                }
                Some(c) => {
                    text.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

/// Parse a definition expression into a tree.
pub fn parse_def(text: &str) -> Result<SememeTree, ParseError> {
    let mut parser = Parser { chars: text.chars().collect(), pos: 0 };
    let tree = parser.node(1)?;
    parser.skip_ws();
    if let Some(c) = parser.peek() {
        return Err(parser.error(
            ParseErrorKind::TrailingInput,
            parser.pos,
            format!("unexpected {c:?} after the closing brace"),
        ));
    }
    Ok(tree)
}

/// Canonical serialization: no whitespace, children in stored order.
pub fn render_def(tree: &SememeTree) -> String {
    let mut out = String::new();
    write_def(tree, &mut out);
    out
}

fn write_def(tree: &SememeTree, out: &mut String) {
    out.push('{');
    out.push_str(&tree.head.to_string());
    for (i, child) in tree.children.iter().enumerate() {
        out.push(if i == 0 { ':' } else { ',' });
        out.push_str(child.role.as_str());
        out.push('=');
        write_def(&child.tree, out);
    }
    out.push('}');
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "sememe")]
pub enum Issue {
    UnknownSememe(SememeRef),
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::UnknownSememe(r) => write!(f, "unknown sememe {r}"),
        }
    }
}

/// One issue per sememe head that the taxonomy cannot resolve, in preorder.
pub fn validate_def(tree: &SememeTree, taxonomy: &Taxonomy) -> Vec<Issue> {
    tree.sememes().filter(|r| taxonomy.get_by_ref(r).is_none()).map(|r| Issue::UnknownSememe(r.clone())).collect()
}

impl PartialOrd for SememeTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SememeTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}
