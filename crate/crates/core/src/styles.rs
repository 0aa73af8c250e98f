//! Clue formats and the generation prompts that request them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClueStyle {
    Unrestricted,
    BareNounPhrase,
    DefiniteDeterminerPhrase,
    CopularSentence,
}

impl ClueStyle {
    pub const ALL: [ClueStyle; 4] = [
        ClueStyle::Unrestricted,
        ClueStyle::BareNounPhrase,
        ClueStyle::DefiniteDeterminerPhrase,
        ClueStyle::CopularSentence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClueStyle::Unrestricted => "unrestricted",
            ClueStyle::BareNounPhrase => "bare_noun_phrase",
            ClueStyle::DefiniteDeterminerPhrase => "definite_determiner_phrase",
            ClueStyle::CopularSentence => "copular_sentence",
        }
    }
}

impl fmt::Display for ClueStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClueStyle {
    type Err = StyleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "unrestricted" | "free" => Ok(ClueStyle::Unrestricted),
            "bare_noun_phrase" | "bare_np" | "np" => Ok(ClueStyle::BareNounPhrase),
            "definite_determiner_phrase" | "definite_dp" | "dp" => Ok(ClueStyle::DefiniteDeterminerPhrase),
            "copular_sentence" | "copular" => Ok(ClueStyle::CopularSentence),
            _ => Err(StyleError::UnknownStyle(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StyleError {
    #[error("template is missing placeholder {{{0}}}")]
    MissingPlaceholder(&'static str),
    #[error("template repeats placeholder {{{0}}}")]
    DuplicatePlaceholder(&'static str),
    #[error("template uses unknown placeholder {{{0}}}")]
    UnknownPlaceholder(String),
    #[error("copular template must carry the exemplar and only it may")]
    ExemplarMismatch,
    #[error("context is empty")]
    EmptyContext,
    #[error("keyword is empty")]
    EmptyKeyword,
    #[error("at least one clue must be requested")]
    ZeroClues,
    #[error("no clues could be extracted from the response")]
    UnparseableResponse,
    #[error("unknown clue style {0:?}")]
    UnknownStyle(String),
    #[error("template I/O: {0}")]
    Io(String),
}

impl StyleError {
    pub fn code(&self) -> &'static str {
        match self {
            StyleError::MissingPlaceholder(_) => "MissingPlaceholder",
            StyleError::DuplicatePlaceholder(_) => "DuplicatePlaceholder",
            StyleError::UnknownPlaceholder(_) => "UnknownPlaceholder",
            StyleError::ExemplarMismatch => "ExemplarMismatch",
            StyleError::EmptyContext => "EmptyContext",
            StyleError::EmptyKeyword => "EmptyKeyword",
            StyleError::ZeroClues => "ZeroClues",
            StyleError::UnparseableResponse => "UnparseableResponse",
            StyleError::UnknownStyle(_) => "UnknownStyle",
            StyleError::Io(_) => "IoError",
        }
    }
}

/// Italian instruction fragment describing the structure a style requires.
pub fn style_descriptor(style: ClueStyle) -> &'static str {
    match style {
        ClueStyle::Unrestricted => {
            "nessun vincolo sulla struttura sintattica: scegli liberamente la forma più adatta a ciascuna definizione."
        }
        ClueStyle::BareNounPhrase => {
            "ogni definizione deve essere un sintagma nominale senza articolo né altro determinante iniziale, cioè un nome comune eventualmente accompagnato da aggettivi, complementi o frasi relative."
        }
        ClueStyle::DefiniteDeterminerPhrase => {
            "ogni definizione deve iniziare con un articolo determinativo (il, lo, la, i, gli, le, l') seguito da un nome e dai suoi modificatori, e deve descrivere la soluzione come l'unico referente che soddisfa la descrizione."
        }
        ClueStyle::CopularSentence => {
            "ogni definizione deve essere una frase che inizia con una forma del verbo essere (come «è» o «sono») seguita dal predicato, con il soggetto sottinteso: il soggetto omesso è la soluzione."
        }
    }
}

/// Exemplar embedded in the copular template.
pub const COPULAR_EXEMPLAR: &str =
    "Soluzione: Vesuvio\nDefinizione: è il vulcano attivo che domina il golfo di Napoli";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placeholder {
    Context,
    Keyword,
    NClues,
    Structure,
}

impl Placeholder {
    fn name(self) -> &'static str {
        match self {
            Placeholder::Context => "context",
            Placeholder::Keyword => "keyword",
            Placeholder::NClues => "n_clues",
            Placeholder::Structure => "structure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(Placeholder),
}

/// A validated prompt template. `{context}`, `{keyword}` and `{n_clues}` must
/// each appear exactly once; `{structure}` at most once. Any other `{word}` is
/// rejected, other braces are literal text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub style: ClueStyle,
    pub template_text: String,
    pub includes_exemplar: bool,
    segments: Vec<Segment>,
}

static PLACEHOLDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([a-z_]+)\}").unwrap());

impl PromptTemplate {
    pub fn parse(style: ClueStyle, text: &str) -> Result<Self, StyleError> {
        let mut segments = Vec::new();
        let mut seen: Vec<Placeholder> = Vec::new();
        let mut last = 0;
        for cap in PLACEHOLDER.captures_iter(text) {
            let whole = cap.get(0).unwrap();
            let slot = match &cap[1] {
                "context" => Placeholder::Context,
                "keyword" => Placeholder::Keyword,
                "n_clues" => Placeholder::NClues,
                "structure" => Placeholder::Structure,
                other => return Err(StyleError::UnknownPlaceholder(other.to_string())),
            };
            if seen.contains(&slot) {
                return Err(StyleError::DuplicatePlaceholder(slot.name()));
            }
            seen.push(slot);
            if whole.start() > last {
                segments.push(Segment::Literal(text[last..whole.start()].to_string()));
            }
            segments.push(Segment::Slot(slot));
            last = whole.end();
        }
        if last < text.len() {
            segments.push(Segment::Literal(text[last..].to_string()));
        }
        for required in [Placeholder::Context, Placeholder::Keyword, Placeholder::NClues] {
            if !seen.contains(&required) {
                return Err(StyleError::MissingPlaceholder(required.name()));
            }
        }
        let includes_exemplar = text.contains(COPULAR_EXEMPLAR);
        if includes_exemplar != (style == ClueStyle::CopularSentence) {
            return Err(StyleError::ExemplarMismatch);
        }
        Ok(PromptTemplate {
            style,
            template_text: text.to_string(),
            includes_exemplar,
            segments,
        })
    }

    /// Single-pass substitution: braces inside the inserted values are never expanded.
    pub fn render(&self, context: &str, keyword: &str, n_clues: usize) -> Result<String, StyleError> {
        if context.trim().is_empty() {
            return Err(StyleError::EmptyContext);
        }
        if keyword.trim().is_empty() {
            return Err(StyleError::EmptyKeyword);
        }
        if n_clues == 0 {
            return Err(StyleError::ZeroClues);
        }
        let n = n_clues.to_string();
        let mut out = String::with_capacity(self.template_text.len() + context.len() + 64);
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.push_str(s),
                Segment::Slot(Placeholder::Context) => out.push_str(context),
                Segment::Slot(Placeholder::Keyword) => out.push_str(keyword),
                Segment::Slot(Placeholder::NClues) => out.push_str(&n),
                Segment::Slot(Placeholder::Structure) => out.push_str(style_descriptor(self.style)),
            }
        }
        Ok(out)
    }
}

fn asset_name(style: ClueStyle) -> String {
    format!("{}.txt", style.as_str())
}

fn builtin_text(style: ClueStyle) -> &'static str {
    match style {
        ClueStyle::Unrestricted => include_str!("../assets/prompts/unrestricted.txt"),
        ClueStyle::BareNounPhrase => include_str!("../assets/prompts/bare_noun_phrase.txt"),
        ClueStyle::DefiniteDeterminerPhrase => {
            include_str!("../assets/prompts/definite_determiner_phrase.txt")
        }
        ClueStyle::CopularSentence => include_str!("../assets/prompts/copular_sentence.txt"),
    }
}

/// One template per style.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: [PromptTemplate; 4],
}

impl TemplateSet {
    pub fn builtin() -> Self {
        static BUILTIN: LazyLock<TemplateSet> = LazyLock::new(|| TemplateSet {
            templates: ClueStyle::ALL
                .map(|s| PromptTemplate::parse(s, builtin_text(s)).expect("shipped template is valid")),
        });
        BUILTIN.clone()
    }

    /// Loads `<style>.txt` files from `dir`; styles without a file keep the built-in template.
    pub fn load_dir(dir: &Path) -> Result<Self, StyleError> {
        let mut set = Self::builtin();
        for (i, style) in ClueStyle::ALL.into_iter().enumerate() {
            let path = dir.join(asset_name(style));
            match std::fs::read_to_string(&path) {
                Ok(text) => set.templates[i] = PromptTemplate::parse(style, &text)?,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(StyleError::Io(format!("{}: {e}", path.display()))),
            }
        }
        Ok(set)
    }

    pub fn get(&self, style: ClueStyle) -> &PromptTemplate {
        &self.templates[ClueStyle::ALL.iter().position(|s| *s == style).unwrap()]
    }

    pub fn render(&self, context: &str, keyword: &str, n_clues: usize, style: ClueStyle) -> Result<String, StyleError> {
        self.get(style).render(context, keyword, n_clues)
    }
}

/// Renders with the built-in templates.
pub fn render_prompt(context: &str, keyword: &str, n_clues: usize, style: ClueStyle) -> Result<String, StyleError> {
    TemplateSet::builtin().render(context, keyword, n_clues, style)
}

/// A list marker at the start of a line: `1.`, `2)`, `(3)`, `4:` or a bullet,
/// followed by whitespace or end of line.
pub static LIST_MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*(?:\(?\d{1,2}\s*[.):\]]|[-*•–—+])(?:\s+|$)").unwrap()
});

const QUOTE_PAIRS: [(&str, &str); 6] = [
    ("\"", "\""),
    ("“", "”"),
    ("«", "»"),
    ("'", "'"),
    ("**", "**"),
    ("*", "*"),
];

fn strip_decorations(line: &str) -> String {
    let mut s = line.trim().to_string();
    loop {
        let before = s.clone();
        if let Some(m) = LIST_MARKER.find(&s) {
            s = s[m.end()..].trim().to_string();
        }
        for (open, close) in QUOTE_PAIRS {
            if s.len() >= open.len() + close.len() && s.starts_with(open) && s.ends_with(close) {
                s = s[open.len()..s.len() - close.len()].trim().to_string();
            }
        }
        if s == before {
            return s;
        }
    }
}

/// Extracts up to `expected_n` clues from an LLM reply. When some lines carry
/// list markers only those lines count; otherwise every non-empty line does.
/// Lines without letters or digits, and preamble lines ending in `:`, are dropped.
pub fn parse_clue_list(raw_llm_output: &str, expected_n: usize) -> Result<Vec<String>, StyleError> {
    let lines: Vec<&str> = raw_llm_output.lines().filter(|l| !l.trim().is_empty()).collect();
    let any_marked = lines.iter().any(|l| LIST_MARKER.is_match(l));
    let clues: Vec<String> = lines
        .into_iter()
        .filter(|l| !any_marked || LIST_MARKER.is_match(l))
        .map(strip_decorations)
        .filter(|c| c.chars().any(char::is_alphanumeric) && !c.ends_with(':'))
        .take(expected_n)
        .collect();
    if clues.is_empty() {
        return Err(StyleError::UnparseableResponse);
    }
    Ok(clues)
}
