//! Text, JSON and printable HTML output.
//!
//! JSON schema, version 1:
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "width": 4, "height": 5,
//!   "cells": [[null | {"letter": "R", "number": 1 | null}, ...], ...],   // rows
//!   "across": [{"number", "entry_id", "row", "col", "length", "clue", "answer", "answer_display"}],
//!   "down":   [ same as across ],
//!   "unplaced": [{"entry_id", "answer_display", "clue"}],
//!   "budget_exhausted": false
//! }
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{intersections_of, validate_layout, CrosswordLayout, Direction, Entry, GridError, Placement};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Json,
    PrintableHtml,
}

impl std::str::FromStr for RenderFormat {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(RenderFormat::Text),
            "json" => Ok(RenderFormat::Json),
            "html" | "printable_html" => Ok(RenderFormat::PrintableHtml),
            other => Err(GridError::Schema(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuzzleCell {
    pub letter: char,
    pub number: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuzzleClue {
    pub number: usize,
    pub entry_id: String,
    pub row: usize,
    pub col: usize,
    pub length: usize,
    pub clue: String,
    pub answer: String,
    pub answer_display: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnplacedClue {
    pub entry_id: String,
    pub answer_display: String,
    pub clue: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuzzleDocument {
    pub schema_version: u32,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Vec<Option<PuzzleCell>>>,
    pub across: Vec<PuzzleClue>,
    pub down: Vec<PuzzleClue>,
    pub unplaced: Vec<UnplacedClue>,
    pub budget_exhausted: bool,
}

impl PuzzleDocument {
    /// Requires a layout that passes [`validate_layout`].
    pub fn from_layout(layout: &CrosswordLayout, entries: &[Entry]) -> Result<Self, GridError> {
        let check = validate_layout(layout, entries);
        if !check.valid {
            return Err(GridError::InvalidLayout(check.issues));
        }
        let by_id: HashMap<&str, &Entry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
        let numbers = layout.numbering();
        let mut cells = vec![vec![None; layout.width]; layout.height];
        let (mut across, mut down) = (Vec::new(), Vec::new());
        for p in &layout.placements {
            let e = by_id[p.entry_id.as_str()];
            for ((r, c), letter) in p.cells(e.answer_grid.len()).zip(e.answer_grid.chars()) {
                cells[r][c] = Some(PuzzleCell { letter, number: numbers.get(&(r, c)).copied() });
            }
            let clue = PuzzleClue {
                number: numbers[&(p.row, p.col)],
                entry_id: e.id.clone(),
                row: p.row,
                col: p.col,
                length: e.answer_grid.len(),
                clue: e.clue.clone(),
                answer: e.answer_grid.clone(),
                answer_display: e.answer_display.clone(),
            };
            match p.direction {
                Direction::Across => across.push(clue),
                Direction::Down => down.push(clue),
            }
        }
        across.sort_by_key(|c| c.number);
        down.sort_by_key(|c| c.number);
        let unplaced = layout
            .unplaced
            .iter()
            .map(|id| {
                let e = by_id[id.as_str()];
                UnplacedClue { entry_id: e.id.clone(), answer_display: e.answer_display.clone(), clue: e.clue.clone() }
            })
            .collect();
        Ok(PuzzleDocument {
            schema_version: SCHEMA_VERSION,
            width: layout.width,
            height: layout.height,
            cells,
            across,
            down,
            unplaced,
            budget_exhausted: layout.budget_exhausted,
        })
    }

    /// Rebuilds the layout and entries the document was made from.
    pub fn to_layout(&self) -> Result<(CrosswordLayout, Vec<Entry>), GridError> {
        let mut entries = Vec::new();
        let mut placements = Vec::new();
        for (dir, list) in [(Direction::Across, &self.across), (Direction::Down, &self.down)] {
            for c in list {
                entries.push(Entry {
                    id: c.entry_id.clone(),
                    answer_display: c.answer_display.clone(),
                    answer_grid: c.answer.clone(),
                    clue: c.clue.clone(),
                });
                placements.push(Placement { entry_id: c.entry_id.clone(), row: c.row, col: c.col, direction: dir });
            }
        }
        for u in &self.unplaced {
            entries.push(Entry {
                id: u.entry_id.clone(),
                answer_grid: super::normalize_answer(&u.answer_display)?,
                answer_display: u.answer_display.clone(),
                clue: u.clue.clone(),
            });
        }
        for e in &entries {
            e.check()?;
        }
        placements.sort_by_key(|p| (p.row, p.col, p.direction));
        let by_id: HashMap<&str, &Entry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
        if by_id.len() != entries.len() {
            return Err(GridError::Schema("entry ids repeat".into()));
        }
        let lengths_ok = self.across.iter().chain(&self.down).all(|c| c.length == c.answer.len());
        if !lengths_ok {
            return Err(GridError::Schema("clue length disagrees with its answer".into()));
        }
        let layout = CrosswordLayout {
            width: self.width,
            height: self.height,
            intersections: intersections_of(&placements, &by_id),
            placements,
            unplaced: self.unplaced.iter().map(|u| u.entry_id.clone()).collect(),
            budget_exhausted: self.budget_exhausted,
        };
        Ok((layout, entries))
    }
}

/// Parses and fully checks a layout document: schema, layout rules, and
/// agreement between the cell matrix and the clue lists.
pub fn parse_puzzle_json(bytes: &[u8]) -> Result<PuzzleDocument, GridError> {
    let doc: PuzzleDocument = serde_json::from_slice(bytes).map_err(|e| GridError::Schema(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(GridError::Schema(format!("unsupported schema version {}", doc.schema_version)));
    }
    if doc.width > 1000 || doc.height > 1000 {
        return Err(GridError::Schema("grid too large".into()));
    }
    let (layout, entries) = doc.to_layout()?;
    let rebuilt = PuzzleDocument::from_layout(&layout, &entries)?;
    if rebuilt != doc {
        return Err(GridError::Schema("cells or numbering disagree with the clue lists".into()));
    }
    Ok(doc)
}

fn word_lengths(display: &str, grid_len: usize) -> String {
    let parts: Vec<usize> = display
        .split_whitespace()
        .filter_map(|w| super::normalize_answer(w).ok())
        .map(|w| w.len())
        .collect();
    if parts.len() > 1 && parts.iter().sum::<usize>() == grid_len {
        parts.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
    } else {
        grid_len.to_string()
    }
}

fn render_text(doc: &PuzzleDocument, entries: &HashMap<&str, &Entry>) -> String {
    let mut out = String::new();
    for row in &doc.cells {
        let line: Vec<String> = row.iter().map(|c| c.as_ref().map_or('#', |c| c.letter).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    for (label, list) in [("Across", &doc.across), ("Down", &doc.down)] {
        if list.is_empty() {
            continue;
        }
        out.push('\n');
        out.push_str(label);
        out.push('\n');
        for c in list {
            let display = entries.get(c.entry_id.as_str()).map_or(c.answer_display.as_str(), |e| &e.answer_display);
            out.push_str(&format!("{} {label}: {} ({})\n", c.number, c.clue, word_lengths(display, c.length)));
        }
    }
    if !doc.unplaced.is_empty() {
        out.push_str("\nUnplaced\n");
        for u in &doc.unplaced {
            out.push_str(&format!("- {}: {}\n", u.answer_display, u.clue));
        }
    }
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

const HTML_STYLE: &str = "body{font-family:Georgia,serif;margin:2em}\
table.grid{border-collapse:collapse;margin:1em 0}\
table.grid td{width:2em;height:2em;border:1px solid #000;position:relative;text-align:center;vertical-align:middle;font-size:1.1em}\
table.grid td.block{background:#000}\
table.grid td span.num{position:absolute;top:1px;left:2px;font-size:0.55em}\
.clues{display:flex;gap:3em}\
.clues ol{list-style:none;padding-left:0}\
.solution{page-break-before:always}\
@media print{body{margin:0}}";

fn html_grid(doc: &PuzzleDocument, with_letters: bool) -> String {
    let mut out = String::from("<table class=\"grid\">\n");
    for row in &doc.cells {
        out.push_str("<tr>");
        for cell in row {
            match cell {
                None => out.push_str("<td class=\"block\"></td>"),
                Some(c) => {
                    out.push_str("<td>");
                    if let Some(n) = c.number {
                        out.push_str(&format!("<span class=\"num\">{n}</span>"));
                    }
                    if with_letters {
                        out.push(c.letter);
                    }
                    out.push_str("</td>");
                }
            }
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n");
    out
}

fn render_html(doc: &PuzzleDocument) -> String {
    let mut out = format!(
        "<!DOCTYPE html>\n<html lang=\"it\">\n<head>\n<meta charset=\"utf-8\">\n<title>Cruciverba</title>\n<style>{HTML_STYLE}</style>\n</head>\n<body>\n<h1>Cruciverba</h1>\n"
    );
    out.push_str(&html_grid(doc, false));
    out.push_str("<div class=\"clues\">\n");
    for (label, list) in [("Orizzontali", &doc.across), ("Verticali", &doc.down)] {
        out.push_str(&format!("<section>\n<h2>{label}</h2>\n<ol>\n"));
        for c in list {
            out.push_str(&format!(
                "<li><b>{}</b> {} ({})</li>\n",
                c.number,
                escape(&c.clue),
                word_lengths(&c.answer_display, c.length)
            ));
        }
        out.push_str("</ol>\n</section>\n");
    }
    out.push_str("</div>\n<div class=\"solution\">\n<h2>Soluzione</h2>\n");
    out.push_str(&html_grid(doc, true));
    out.push_str("</div>\n</body>\n</html>\n");
    out
}

pub fn render(layout: &CrosswordLayout, entries: &[Entry], format: RenderFormat) -> Result<Vec<u8>, GridError> {
    let doc = PuzzleDocument::from_layout(layout, entries)?;
    let by_id: HashMap<&str, &Entry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    Ok(match format {
        RenderFormat::Text => render_text(&doc, &by_id).into_bytes(),
        RenderFormat::Json => {
            let mut v = serde_json::to_vec_pretty(&doc).expect("document serialises");
            v.push(b'\n');
            v
        }
        RenderFormat::PrintableHtml => render_html(&doc).into_bytes(),
    })
}
