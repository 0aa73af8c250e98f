//! Criss-cross crossword layout.
//!
//! Answers are laid on an unbounded board and only meet at crossings; there
//! are no block squares. [`build`] searches for a layout, [`validate_layout`]
//! checks one from scratch, and [`render`] turns it into text, JSON or HTML.

mod render;
mod search;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::fold_accents;

pub use render::{parse_puzzle_json, render, PuzzleCell, PuzzleClue, PuzzleDocument, RenderFormat, UnplacedClue, SCHEMA_VERSION};
pub use search::build;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("answer {0:?} is empty after normalisation")]
    EmptyAfterNormalization(String),
    #[error("answer {0:?} contains characters that cannot go in the grid")]
    InvalidAnswer(String),
    #[error("no entries given")]
    NoEntries,
    #[error("{0} entries given, at most {MAX_ENTRIES} are supported")]
    TooManyEntries(usize),
    #[error("entry id {0:?} used twice")]
    DuplicateId(String),
    #[error("no entry fits inside the grid bounds")]
    NoPlacement,
    #[error("layout is invalid: {}", .0.join("; "))]
    InvalidLayout(Vec<String>),
    #[error("layout document: {0}")]
    Schema(String),
}

impl GridError {
    pub fn code(&self) -> &'static str {
        match self {
            GridError::EmptyAfterNormalization(_) => "EmptyAfterNormalization",
            GridError::InvalidAnswer(_) => "InvalidAnswer",
            GridError::NoEntries => "EmptySelection",
            GridError::TooManyEntries(_) => "TooManyEntries",
            GridError::DuplicateId(_) => "DuplicateId",
            GridError::NoPlacement => "NoPlacement",
            GridError::InvalidLayout(_) => "InvalidLayout",
            GridError::Schema(_) => "SchemaError",
        }
    }
}

pub const MAX_ENTRIES: usize = 50;

/// Grid form of an answer: accents folded, upper case, spaces removed.
pub fn normalize_answer(raw: &str) -> Result<String, GridError> {
    let folded: String = fold_accents(raw)
        .chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '\'' | '\u{2019}' | '-'))
        .flat_map(char::to_uppercase)
        .collect();
    if folded.is_empty() {
        return Err(GridError::EmptyAfterNormalization(raw.to_string()));
    }
    if !folded.bytes().all(|b| b.is_ascii_uppercase()) {
        return Err(GridError::InvalidAnswer(raw.to_string()));
    }
    Ok(folded)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub answer_display: String,
    pub answer_grid: String,
    pub clue: String,
}

impl Entry {
    pub fn new(id: impl Into<String>, answer: &str, clue: impl Into<String>) -> Result<Self, GridError> {
        let answer_grid = normalize_answer(answer)?;
        if answer_grid.len() < 2 {
            return Err(GridError::InvalidAnswer(answer.to_string()));
        }
        Ok(Entry {
            id: id.into(),
            answer_display: answer.trim().to_string(),
            answer_grid,
            clue: clue.into(),
        })
    }

    fn check(&self) -> Result<(), GridError> {
        if self.answer_grid.len() < 2 || !self.answer_grid.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(GridError::InvalidAnswer(self.answer_grid.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Across,
    Down,
}

impl Direction {
    pub fn step(self) -> (i64, i64) {
        match self {
            Direction::Across => (0, 1),
            Direction::Down => (1, 0),
        }
    }

    pub fn other(self) -> Direction {
        match self {
            Direction::Across => Direction::Down,
            Direction::Down => Direction::Across,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Across => "Across",
            Direction::Down => "Down",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub entry_id: String,
    pub row: usize,
    pub col: usize,
    pub direction: Direction,
}

impl Placement {
    pub fn cells(&self, len: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (dr, dc) = self.direction.step();
        (0..len).map(move |k| (self.row + k * dr as usize, self.col + k * dc as usize))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Intersection {
    pub across: String,
    pub down: String,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub max_width: usize,
    pub max_height: usize,
    pub node_budget: u64,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { max_width: 25, max_height: 25, node_budget: 100_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswordLayout {
    pub width: usize,
    pub height: usize,
    /// Ordered by (row, col, direction).
    pub placements: Vec<Placement>,
    pub intersections: Vec<Intersection>,
    /// Ids of entries left out, in input order.
    pub unplaced: Vec<String>,
    pub budget_exhausted: bool,
}

impl CrosswordLayout {
    pub fn placement(&self, entry_id: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.entry_id == entry_id)
    }

    /// Clue numbers in reading order: a cell gets a number when a word starts there.
    pub fn numbering(&self) -> BTreeMap<(usize, usize), usize> {
        let starts: BTreeSet<(usize, usize)> = self.placements.iter().map(|p| (p.row, p.col)).collect();
        starts.into_iter().enumerate().map(|(i, cell)| (cell, i + 1)).collect()
    }

    pub fn number_of(&self, p: &Placement) -> usize {
        self.numbering()[&(p.row, p.col)]
    }
}

/// Outcome of [`validate_layout`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayoutCheck {
    pub valid: bool,
    pub issues: Vec<String>,
}

/// Checks a layout from scratch against the criss-cross rules: every letter
/// cell belongs to a word, shared cells agree, every maximal run of two or
/// more letters is exactly one placed word in that direction, and the words
/// form one connected piece.
pub fn validate_layout(layout: &CrosswordLayout, entries: &[Entry]) -> LayoutCheck {
    let mut issues = Vec::new();
    let by_id: HashMap<&str, &Entry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    if layout.width == 0 || layout.height == 0 {
        issues.push("grid has a zero dimension".to_string());
    }
    let mut seen = HashSet::new();
    let mut grid: HashMap<(usize, usize), u8> = HashMap::new();
    let mut cover: HashMap<(usize, usize, Direction), &str> = HashMap::new();
    let mut words: HashMap<(usize, usize, Direction), usize> = HashMap::new();
    for p in &layout.placements {
        let Some(entry) = by_id.get(p.entry_id.as_str()) else {
            issues.push(format!("placement refers to unknown entry {:?}", p.entry_id));
            continue;
        };
        if !seen.insert(p.entry_id.as_str()) {
            issues.push(format!("entry {:?} placed twice", p.entry_id));
            continue;
        }
        words.insert((p.row, p.col, p.direction), entry.answer_grid.len());
        for ((r, c), letter) in p.cells(entry.answer_grid.len()).zip(entry.answer_grid.bytes()) {
            if r >= layout.height || c >= layout.width {
                issues.push(format!("entry {:?} leaves the grid at ({r}, {c})", p.entry_id));
                break;
            }
            match grid.insert((r, c), letter) {
                Some(prev) if prev != letter => issues.push(format!(
                    "cell ({r}, {c}) holds both {:?} and {:?}",
                    prev as char, letter as char
                )),
                _ => {}
            }
            if let Some(other) = cover.insert((r, c, p.direction), p.entry_id.as_str()) {
                issues.push(format!(
                    "{:?} and {:?} share cell ({r}, {c}) in the same direction",
                    other, p.entry_id
                ));
            }
        }
    }
    for id in &layout.unplaced {
        if !by_id.contains_key(id.as_str()) {
            issues.push(format!("unplaced list names unknown entry {id:?}"));
        } else if seen.contains(id.as_str()) {
            issues.push(format!("entry {id:?} is both placed and unplaced"));
        }
    }
    for e in entries {
        if !seen.contains(e.id.as_str()) && !layout.unplaced.contains(&e.id) {
            issues.push(format!("entry {:?} is neither placed nor reported unplaced", e.id));
        }
    }
    if !issues.is_empty() {
        return LayoutCheck { valid: false, issues };
    }

    for dir in [Direction::Across, Direction::Down] {
        let (dr, dc) = dir.step();
        let (dr, dc) = (dr as usize, dc as usize);
        for &(r, c) in grid.keys() {
            let starts_run = match dir {
                Direction::Across => c == 0 || !grid.contains_key(&(r, c - 1)),
                Direction::Down => r == 0 || !grid.contains_key(&(r - 1, c)),
            };
            if !starts_run {
                continue;
            }
            let mut len = 0;
            while grid.contains_key(&(r + len * dr, c + len * dc)) {
                len += 1;
            }
            match words.get(&(r, c, dir)) {
                Some(&wlen) if wlen == len => {}
                Some(&wlen) => issues.push(format!(
                    "{dir} word at ({r}, {c}) has {wlen} letters but sits in a run of {len}"
                )),
                None if len >= 2 => issues.push(format!("stray {dir} run of {len} letters at ({r}, {c})")),
                None => {}
            }
        }
        for &(r, c, d) in words.keys() {
            if d == dir {
                let before = match dir {
                    Direction::Across => c > 0 && grid.contains_key(&(r, c - 1)),
                    Direction::Down => r > 0 && grid.contains_key(&(r - 1, c)),
                };
                if before {
                    issues.push(format!("{dir} word at ({r}, {c}) touches another letter at its start"));
                }
            }
        }
    }

    let mut expected = Vec::new();
    for (&(r, c, d), across) in &cover {
        if d == Direction::Across {
            if let Some(down) = cover.get(&(r, c, Direction::Down)) {
                expected.push(Intersection { across: across.to_string(), down: down.to_string(), row: r, col: c });
            }
        }
    }
    expected.sort();
    let mut listed = layout.intersections.clone();
    listed.sort();
    if expected != listed {
        issues.push("intersection list does not match the placements".to_string());
    }

    if layout.placements.len() >= 2 {
        let ids: Vec<&str> = layout.placements.iter().map(|p| p.entry_id.as_str()).collect();
        let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
        for x in &expected {
            adj.entry(x.across.as_str()).or_default().push(x.down.as_str());
            adj.entry(x.down.as_str()).or_default().push(x.across.as_str());
        }
        let mut reached = HashSet::from([ids[0]]);
        let mut stack = vec![ids[0]];
        while let Some(n) = stack.pop() {
            for &m in adj.get(n).into_iter().flatten() {
                if reached.insert(m) {
                    stack.push(m);
                }
            }
        }
        if reached.len() != ids.len() {
            issues.push("words are not all connected through crossings".to_string());
        }
    }
    LayoutCheck { valid: issues.is_empty(), issues }
}

pub(crate) fn intersections_of(placements: &[Placement], entries: &HashMap<&str, &Entry>) -> Vec<Intersection> {
    let mut across: HashMap<(usize, usize), &str> = HashMap::new();
    for p in placements.iter().filter(|p| p.direction == Direction::Across) {
        for cell in p.cells(entries[p.entry_id.as_str()].answer_grid.len()) {
            across.insert(cell, &p.entry_id);
        }
    }
    let mut out = Vec::new();
    for p in placements.iter().filter(|p| p.direction == Direction::Down) {
        for (r, c) in p.cells(entries[p.entry_id.as_str()].answer_grid.len()) {
            if let Some(a) = across.get(&(r, c)) {
                out.push(Intersection { across: a.to_string(), down: p.entry_id.clone(), row: r, col: c });
            }
        }
    }
    out.sort();
    out
}
