//! Mechanical clue checks: left-edge structure classification, answer-leak
//! detection and length bounds.
//!
//! Only what can be decided from the surface string is automated. The
//! semantic rating levels (vague, incomplete, too generic) stay human
//! judgments recorded through the service.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::styles::ClueStyle;
use crate::text::{edit_distance_within, fold_accents};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("lexicon line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

/// Closed word lists driving [`classify_structure`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItalianLexicon {
    pub version: u32,
    pub definite_articles: BTreeSet<String>,
    pub copula_forms: BTreeSet<String>,
    /// Definite articles plus every other determiner.
    pub determiner_set: BTreeSet<String>,
}

fn normalize_apostrophes(s: &str) -> String {
    s.replace(['\u{2019}', '\u{2018}', '`'], "'")
}

impl ItalianLexicon {
    pub fn builtin() -> &'static ItalianLexicon {
        static LEX: LazyLock<ItalianLexicon> = LazyLock::new(|| {
            ItalianLexicon::parse(include_str!("../assets/lexicon.txt")).expect("shipped lexicon is valid")
        });
        &LEX
    }

    /// Parses the plain-text lexicon format: `#` comments, a `version = N`
    /// line, and `[definite_articles]`, `[copula_forms]`, `[determiners]`
    /// sections of whitespace-separated words.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut version = None;
        let mut section: Option<usize> = None;
        let mut sets: [BTreeSet<String>; 3] = Default::default();
        let mut seen = [false; 3];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| LexiconError { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let idx = match name.trim() {
                    "definite_articles" => 0,
                    "copula_forms" => 1,
                    "determiners" => 2,
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                if seen[idx] {
                    return Err(err(format!("duplicate section [{}]", name.trim())));
                }
                seen[idx] = true;
                section = Some(idx);
                continue;
            }
            if let Some(v) = line.strip_prefix("version") {
                let v = v.trim_start().strip_prefix('=').ok_or_else(|| err("expected `version = N`".into()))?;
                version = Some(v.trim().parse::<u32>().map_err(|_| err("version must be an integer".into()))?);
                continue;
            }
            let Some(idx) = section else {
                return Err(err("word outside of a section".into()));
            };
            for word in line.split_whitespace() {
                let word = normalize_apostrophes(&word.to_lowercase());
                if !word.chars().all(|c| c.is_alphabetic() || c == '\'') {
                    return Err(err(format!("invalid entry {word:?}")));
                }
                sets[idx].insert(word);
            }
        }
        let version = version.ok_or(LexiconError { line: 0, message: "missing version".into() })?;
        if let Some(missing) = seen.iter().position(|s| !s) {
            let name = ["definite_articles", "copula_forms", "determiners"][missing];
            return Err(LexiconError { line: 0, message: format!("missing section [{name}]") });
        }
        let [definite_articles, copula_forms, others] = sets;
        let determiner_set = definite_articles.union(&others).cloned().collect();
        Ok(ItalianLexicon {
            version,
            definite_articles,
            copula_forms,
            determiner_set,
        })
    }
}

/// First word of a clue, lowercased; leading quotes and punctuation are skipped,
/// trailing punctuation dropped, and an elided article (`l'`, `un'`) returned with
/// its apostrophe.
fn first_token(clue: &str) -> Option<String> {
    let lowered = normalize_apostrophes(&clue.to_lowercase());
    let start = lowered.find(|c: char| c.is_alphanumeric())?;
    let rest = &lowered[start..];
    let word = rest.split_whitespace().next()?;
    if let Some(pos) = word.find('\'') {
        return Some(word[..=pos].to_string());
    }
    Some(word.trim_end_matches(|c: char| !c.is_alphanumeric()).to_string())
}

/// Left-edge rule cascade. `None` means the clue fits none of the three
/// structures (e.g. it opens with an indefinite article or a demonstrative).
pub fn classify_structure(clue: &str, lex: &ItalianLexicon) -> Option<ClueStyle> {
    let token = first_token(clue)?;
    if lex.copula_forms.contains(&token) {
        Some(ClueStyle::CopularSentence)
    } else if lex.definite_articles.contains(&token) {
        Some(ClueStyle::DefiniteDeterminerPhrase)
    } else if lex.determiner_set.contains(&token) {
        None
    } else {
        Some(ClueStyle::BareNounPhrase)
    }
}

fn leak_tokens(s: &str) -> Vec<String> {
    fold_accents(&s.to_lowercase())
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Whether the clue gives the answer away. After lowercasing, accent folding
/// and punctuation removal: the whole answer occurs in the clue, or some clue
/// token equals, or is one edit away from, an answer word of 4+ characters.
pub fn contains_answer_leak(clue: &str, answer: &str) -> bool {
    let answer_tokens = leak_tokens(answer);
    if answer_tokens.is_empty() {
        return false;
    }
    let clue_tokens = leak_tokens(clue);
    if clue_tokens.join(" ").contains(&answer_tokens.join(" ")) {
        return true;
    }
    answer_tokens
        .iter()
        .filter(|w| w.chars().count() >= 4)
        .any(|w| clue_tokens.iter().any(|t| t == w || edit_distance_within(t, w, 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Issue {
    EmptyClue,
    AnswerLeak,
    StyleMismatch,
    UnknownStructure,
    TooShort,
    TooLong,
}

impl Issue {
    /// Warnings are shown to the educator but do not fail a clue.
    pub fn is_warning(self) -> bool {
        matches!(self, Issue::UnknownStructure | Issue::TooShort | Issue::TooLong)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBounds {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for LengthBounds {
    fn default() -> Self {
        LengthBounds {
            min_tokens: 4,
            max_tokens: 55,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub requested_style: ClueStyle,
    pub detected_style: Option<ClueStyle>,
    pub style_matches_request: bool,
    pub answer_leak: bool,
    pub length_ok: bool,
    pub token_count: usize,
    pub issues: Vec<Issue>,
    pub passed: bool,
}

pub fn validate(clue: &str, answer: &str, requested: ClueStyle, lex: &ItalianLexicon) -> ValidationReport {
    validate_with(clue, answer, requested, lex, LengthBounds::default())
}

pub fn validate_with(
    clue: &str,
    answer: &str,
    requested: ClueStyle,
    lex: &ItalianLexicon,
    bounds: LengthBounds,
) -> ValidationReport {
    let mut issues = Vec::new();
    let token_count = clue.split_whitespace().count();
    if token_count == 0 {
        issues.push(Issue::EmptyClue);
    }
    let detected_style = classify_structure(clue, lex);
    if detected_style.is_none() && token_count > 0 {
        issues.push(Issue::UnknownStructure);
    }
    let style_matches_request = requested == ClueStyle::Unrestricted || detected_style == Some(requested);
    if !style_matches_request {
        issues.push(Issue::StyleMismatch);
    }
    let answer_leak = contains_answer_leak(clue, answer);
    if answer_leak {
        issues.push(Issue::AnswerLeak);
    }
    if token_count > 0 && token_count < bounds.min_tokens {
        issues.push(Issue::TooShort);
    }
    if token_count > bounds.max_tokens {
        issues.push(Issue::TooLong);
    }
    let length_ok = (bounds.min_tokens..=bounds.max_tokens).contains(&token_count);
    issues.sort();
    let passed = issues.iter().all(|i| i.is_warning());
    ValidationReport {
        requested_style: requested,
        detected_style,
        style_matches_request,
        answer_leak,
        length_ok,
        token_count,
        issues,
        passed,
    }
}

/// Human quality rating, best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rating {
    A,
    B,
    C,
    D,
    E,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rating {0:?}: expected one of A, B, C, D, E")]
pub struct InvalidRating(pub String);

impl FromStr for Rating {
    type Err = InvalidRating;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Rating::A),
            "B" | "b" => Ok(Rating::B),
            "C" | "c" => Ok(Rating::C),
            "D" | "d" => Ok(Rating::D),
            "E" | "e" => Ok(Rating::E),
            _ => Err(InvalidRating(s.to_string())),
        }
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

const CODEBOOK: [(Rating, &str); 5] = [
    (
        Rating::A,
        "Coherent and valid: consistent with the context, the answer and the requested structure.",
    ),
    (
        Rating::B,
        "Acceptable overall, with minor problems of wording or structure.",
    ),
    (
        Rating::C,
        "Points to the answer but is only loosely tied to the context, or states correct facts poorly.",
    ),
    (
        Rating::D,
        "Sticks to the context but does not single out the answer.",
    ),
    (
        Rating::E,
        "Unacceptable: ungrammatical, contains the answer or a form of it, or does not identify the answer.",
    ),
];

/// The five rating levels with their descriptions, ordered A (best) to E.
pub fn rating_codebook() -> &'static [(Rating, &'static str)] {
    &CODEBOOK
}
