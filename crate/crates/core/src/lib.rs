//! Italian educational crossword pipeline.
//!
//! Wikipedia lead sections are curated into contexts, an LLM endpoint writes
//! clues in one of four syntactic formats, clues are checked mechanically and
//! scored with ROUGE against their context, stored as an instruct dataset, and
//! the clues an educator accepts are laid out as a criss-cross puzzle.

pub mod clock;
pub mod config;
pub mod curation;
pub mod dataset;
pub mod fsutil;
pub mod gateway;
pub mod grid;
pub mod http;
pub mod replay;
pub mod rouge;
pub mod service;
pub mod styles;
pub mod text;
pub mod validator;
pub mod wiki;

pub use curation::{filter_article, filter_keyword, rank_articles, CurationConfig, CurationVerdict};
pub use styles::{parse_clue_list, render_prompt, style_descriptor, ClueStyle};
pub use validator::{classify_structure, contains_answer_leak, validate, ItalianLexicon, ValidationReport};
pub use wiki::{ArticleRecord, RawArticle};
