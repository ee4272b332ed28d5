//! Human-facing renderings of sememe trees.

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kdml::{NodeHead, SememeTree};
use crate::lexicon::ParseOptionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Ascii,
    Dot,
    Json,
}

impl FromStr for RenderFormat {
    type Err = ParseOptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(RenderFormat::Ascii),
            "dot" => Ok(RenderFormat::Dot),
            "json" => Ok(RenderFormat::Json),
            _ => Err(ParseOptionError { what: "render format", value: s.to_owned() }),
        }
    }
}

/// Connector glyphs for the indented text view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsciiStyle {
    pub branch: &'static str,
    pub last: &'static str,
    pub pipe: &'static str,
    pub blank: &'static str,
}

impl AsciiStyle {
    pub const UNICODE: AsciiStyle =
        AsciiStyle { branch: "├── ", last: "└── ", pipe: "│   ", blank: "    " };
    pub const PLAIN: AsciiStyle = AsciiStyle { branch: "|- ", last: "`- ", pipe: "|  ", blank: "   " };
}

pub fn render_tree(tree: &SememeTree, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => render_ascii(tree, AsciiStyle::UNICODE),
        RenderFormat::Dot => render_dot(tree),
        RenderFormat::Json => render_json(tree),
    }
}

/// One node per line; edges show their role as `[role]`.
pub fn render_ascii(tree: &SememeTree, style: AsciiStyle) -> String {
    let mut out = tree.head.to_string();
    out.push('\n');
    ascii_children(tree, style, &mut String::new(), &mut out);
    out
}

fn ascii_children(tree: &SememeTree, style: AsciiStyle, prefix: &mut String, out: &mut String) {
    let n = tree.children.len();
    for (i, child) in tree.children.iter().enumerate() {
        let last = i + 1 == n;
        let _ = writeln!(
            out,
            "{prefix}{}[{}] {}",
            if last { style.last } else { style.branch },
            child.role,
            child.tree.head
        );
        let keep = prefix.len();
        prefix.push_str(if last { style.blank } else { style.pipe });
        ascii_children(&child.tree, style, prefix, out);
        prefix.truncate(keep);
    }
}

fn dot_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

fn dot_label(head: &NodeHead) -> String {
    dot_escape(&head.to_string())
}

/// Directed graph; node ids are preorder indices `n0`, `n1`, ...
pub fn render_dot(tree: &SememeTree) -> String {
    let mut nodes = String::new();
    let mut edges = String::new();
    let mut next = 0usize;
    dot_walk(tree, &mut next, &mut nodes, &mut edges);
    format!("digraph sememe_tree {{\n{nodes}{edges}}}\n")
}

fn dot_walk(tree: &SememeTree, next: &mut usize, nodes: &mut String, edges: &mut String) {
    let id = *next;
    *next += 1;
    let _ = writeln!(nodes, "  n{id} [label=\"{}\"];", dot_label(&tree.head));
    for child in &tree.children {
        let _ = writeln!(edges, "  n{id} -> n{} [label=\"{}\"];", *next, child.role);
        dot_walk(&child.tree, next, nodes, edges);
    }
}

/// Compact JSON: `{"head": ..., "children": [{"role": ..., "tree": ...}]}`.
pub fn render_json(tree: &SememeTree) -> String {
    serde_json::to_string(tree).expect("tree serialization is infallible")
}

pub fn tree_from_json(text: &str) -> Result<SememeTree, serde_json::Error> {
    serde_json::from_str(text)
}
