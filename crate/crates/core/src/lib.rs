//! Sememe-based lexical knowledge base.
//!
//! Senses are annotated with sememe trees written in a compact brace syntax
//! (`{human|人:modifier={child|儿童}}`). This crate parses those definitions,
//! keeps the sememe inventory as a category-rooted forest, indexes senses for
//! bilingual lookup, compares senses by sememe-tree similarity and renders
//! trees as text, Graphviz or JSON.
//!
//! ```
//! use sememe_kb::kdml::{parse_def, render_def};
//!
//! let tree = parse_def("{ human|人 : modifier = {child|儿童} }").unwrap();
//! assert_eq!(render_def(&tree), "{human|人:modifier={child|儿童}}");
//! ```

pub mod dataset;
pub mod error;
pub mod kdml;
pub mod lexicon;
pub mod render;
pub mod similarity;
pub mod taxonomy;

pub use error::QueryError;
pub use kdml::{parse_def, render_def, NodeHead, ParseError, ParseErrorKind, SememeRef, SememeTree};
pub use lexicon::{Lang, Lexicon, MatchMode, Sense, SenseId, Stats};
pub use render::{render_tree, RenderFormat};
pub use similarity::{SimilarityConfig, SimilarityEngine};
pub use taxonomy::{Category, Sememe, SememeId, Taxonomy};
