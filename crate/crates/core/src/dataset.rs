//! Instruct-format clue dataset.
//!
//! Layout of a data directory:
//!
//! * `clues.jsonl`: one [`ClueRecord`] per line, append only. A later line
//!   with the same id is a newer revision of that record.
//! * `tombstones.jsonl`: ids hidden from default exports.
//! * `index.json`: sidecar with the id counter and record count.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::curation::{filter_keyword, CurationConfig};
use crate::fsutil::write_atomic;
use crate::gateway::{ClueDraft, GenerationParams};
use crate::rouge::PairScores;
use crate::styles::{style_descriptor, ClueStyle};
use crate::text::normalize_whitespace;
use crate::validator::{validate, ItalianLexicon, Rating, ValidationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClueRecord {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub url: String,
    #[serde(default)]
    pub category: String,
    pub context: String,
    pub keyword: String,
    pub style: ClueStyle,
    pub clue: String,
    #[serde(default)]
    pub model_id: String,
    #[serde(default)]
    pub rating: Option<Rating>,
    pub validation: ValidationReport,
    #[serde(default)]
    pub rouge1: Option<f64>,
    #[serde(default)]
    pub rouge2: Option<f64>,
    #[serde(default, rename = "rougeL")]
    pub rouge_l: Option<f64>,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub revision: u32,
}

impl ClueRecord {
    pub fn from_draft(
        draft: &ClueDraft,
        validation: ValidationReport,
        scores: Option<PairScores>,
        created_at: DateTime<Utc>,
    ) -> Self {
        ClueRecord {
            id: String::new(),
            title: draft.title.clone(),
            url: draft.url.clone(),
            category: draft.category.clone(),
            context: draft.context.clone(),
            keyword: draft.keyword.clone(),
            style: draft.style,
            clue: draft.clue.clone(),
            model_id: draft.model_id.clone(),
            rating: None,
            validation,
            rouge1: scores.map(|s| s.rouge1.f1),
            rouge2: scores.map(|s| s.rouge2.f1),
            rouge_l: scores.map(|s| s.rouge_l.f1),
            created_at,
            revision: 0,
        }
    }

    pub fn check_invariants(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvariantViolation(m));
        if !filter_keyword(&self.keyword, &CurationConfig::default()) {
            return bad(format!("keyword {:?} is not a valid answer", self.keyword));
        }
        if self.clue.trim().is_empty() {
            return bad("clue is empty".into());
        }
        if self.context.trim().is_empty() {
            return bad("context is empty".into());
        }
        for (name, v) in [("rouge1", self.rouge1), ("rouge2", self.rouge2), ("rougeL", self.rouge_l)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("{name} = {v} outside [0, 1]"));
                }
            }
        }
        if self.validation.requested_style != self.style {
            return bad("validation report was computed for another style".into());
        }
        Ok(())
    }

    /// Normalised (context hash, keyword, style, clue) tuple used to reject duplicates.
    pub fn dedup_key(&self) -> String {
        let ctx = hex::encode(Sha256::digest(normalize_whitespace(&self.context).as_bytes()));
        format!(
            "{ctx}\u{1f}{}\u{1f}{}\u{1f}{}",
            normalize_whitespace(&self.keyword).to_lowercase(),
            self.style,
            normalize_whitespace(&self.clue).to_lowercase()
        )
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("duplicate record (same as {0})")]
    DuplicateRecord(String),
    #[error("record violates invariants: {0}")]
    InvariantViolation(String),
    #[error("unknown record id {0:?}")]
    UnknownId(String),
    #[error("line {line}: {message}")]
    SchemaError { line: usize, message: String },
    #[error("dataset is empty")]
    EmptySet,
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::DuplicateRecord(_) => "DuplicateRecord",
            DatasetError::InvariantViolation(_) => "InvariantViolation",
            DatasetError::UnknownId(_) => "UnknownId",
            DatasetError::SchemaError { .. } => "SchemaError",
            DatasetError::EmptySet => "EmptySet",
            DatasetError::Io(_) => "IoError",
        }
    }
}

impl From<crate::validator::InvalidRating> for DatasetError {
    fn from(e: crate::validator::InvalidRating) -> Self {
        DatasetError::InvariantViolation(e.to_string())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct IndexSidecar {
    next_id: u64,
    records: usize,
    tombstones: usize,
}

struct Inner {
    records: BTreeMap<String, ClueRecord>,
    dedup: HashMap<String, String>,
    tombstones: HashSet<String>,
    next_id: u64,
    log: File,
}

/// Single-writer, append-only record store.
pub struct DatasetStore {
    dir: PathBuf,
    inner: Mutex<Inner>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExportFilter {
    pub include_tombstoned: bool,
    pub styles: Option<Vec<ClueStyle>>,
    /// Keep records rated at least this well. Unrated records are dropped when set.
    pub min_rating: Option<Rating>,
}

impl ExportFilter {
    fn keeps(&self, r: &ClueRecord) -> bool {
        if let Some(styles) = &self.styles {
            if !styles.contains(&r.style) {
                return false;
            }
        }
        match (self.min_rating, r.rating) {
            (Some(min), Some(got)) => got <= min,
            (Some(_), None) => false,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    pub imported: usize,
    pub errors: Vec<LineError>,
}

fn numeric_id(id: &str) -> Option<u64> {
    id.strip_prefix("clue-")?.parse().ok()
}

impl DatasetStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, DatasetError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let clues_path = dir.join("clues.jsonl");
        let mut records: BTreeMap<String, ClueRecord> = BTreeMap::new();
        let mut max_id = 0;
        if clues_path.exists() {
            for (i, line) in BufReader::new(File::open(&clues_path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: ClueRecord = serde_json::from_str(&line).map_err(|e| DatasetError::SchemaError {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                max_id = max_id.max(numeric_id(&rec.id).unwrap_or(0));
                records.insert(rec.id.clone(), rec);
            }
        }
        let mut tombstones = HashSet::new();
        let tomb_path = dir.join("tombstones.jsonl");
        if tomb_path.exists() {
            for line in BufReader::new(File::open(&tomb_path)?).lines() {
                if let Ok(id) = serde_json::from_str::<String>(&line?) {
                    tombstones.insert(id);
                }
            }
        }
        let sidecar: IndexSidecar = std::fs::read(dir.join("index.json"))
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok())
            .unwrap_or_default();
        let dedup = records.values().map(|r| (r.dedup_key(), r.id.clone())).collect();
        let log = OpenOptions::new().create(true).append(true).open(&clues_path)?;
        Ok(DatasetStore {
            dir,
            inner: Mutex::new(Inner {
                records,
                dedup,
                tombstones,
                next_id: sidecar.next_id.max(max_id + 1),
                log,
            }),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write_line(inner: &mut Inner, rec: &ClueRecord) -> Result<(), DatasetError> {
        let mut line = serde_json::to_string(rec).map_err(std::io::Error::from)?;
        line.push('\n');
        inner.log.write_all(line.as_bytes())?;
        inner.log.sync_data()?;
        Ok(())
    }

    fn write_sidecar(&self, inner: &Inner) -> Result<(), DatasetError> {
        let sidecar = IndexSidecar {
            next_id: inner.next_id,
            records: inner.records.len(),
            tombstones: inner.tombstones.len(),
        };
        write_atomic(&self.dir.join("index.json"), &serde_json::to_vec_pretty(&sidecar).map_err(std::io::Error::from)?)?;
        Ok(())
    }

    /// Appends a new record. An empty `id` is assigned from the counter;
    /// a caller-supplied id is kept if unused.
    pub fn append(&self, mut record: ClueRecord) -> Result<String, DatasetError> {
        record.check_invariants()?;
        let mut inner = self.inner.lock().unwrap();
        let key = record.dedup_key();
        if let Some(existing) = inner.dedup.get(&key) {
            return Err(DatasetError::DuplicateRecord(existing.clone()));
        }
        if record.id.is_empty() {
            record.id = format!("clue-{:06}", inner.next_id);
        } else if inner.records.contains_key(&record.id) {
            return Err(DatasetError::DuplicateRecord(record.id.clone()));
        }
        if let Some(n) = numeric_id(&record.id) {
            inner.next_id = inner.next_id.max(n + 1);
        }
        record.revision = 0;
        Self::write_line(&mut inner, &record)?;
        inner.dedup.insert(key, record.id.clone());
        let id = record.id.clone();
        inner.records.insert(id.clone(), record);
        self.write_sidecar(&inner)?;
        Ok(id)
    }

    /// Appends a new revision of an existing record.
    pub fn update(&self, mut record: ClueRecord) -> Result<ClueRecord, DatasetError> {
        record.check_invariants()?;
        let mut inner = self.inner.lock().unwrap();
        let previous = inner
            .records
            .get(&record.id)
            .cloned()
            .ok_or_else(|| DatasetError::UnknownId(record.id.clone()))?;
        let key = record.dedup_key();
        if let Some(other) = inner.dedup.get(&key) {
            if *other != record.id {
                return Err(DatasetError::DuplicateRecord(other.clone()));
            }
        }
        record.revision = previous.revision + 1;
        Self::write_line(&mut inner, &record)?;
        inner.dedup.remove(&previous.dedup_key());
        inner.dedup.insert(key, record.id.clone());
        inner.records.insert(record.id.clone(), record.clone());
        self.write_sidecar(&inner)?;
        Ok(record)
    }

    pub fn tombstone(&self, id: &str) -> Result<(), DatasetError> {
        let mut inner = self.inner.lock().unwrap();
        if !inner.records.contains_key(id) {
            return Err(DatasetError::UnknownId(id.to_string()));
        }
        if inner.tombstones.insert(id.to_string()) {
            let mut f = OpenOptions::new().create(true).append(true).open(self.dir.join("tombstones.jsonl"))?;
            writeln!(f, "{}", serde_json::to_string(id).map_err(std::io::Error::from)?)?;
            f.sync_data()?;
            self.write_sidecar(&inner)?;
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<ClueRecord> {
        self.inner.lock().unwrap().records.get(id).cloned()
    }

    pub fn is_tombstoned(&self, id: &str) -> bool {
        self.inner.lock().unwrap().tombstones.contains(id)
    }

    /// Latest revision of every live record, ordered by id.
    pub fn snapshot(&self) -> Vec<ClueRecord> {
        self.select(&ExportFilter::default())
    }

    pub fn select(&self, filter: &ExportFilter) -> Vec<ClueRecord> {
        let inner = self.inner.lock().unwrap();
        inner
            .records
            .values()
            .filter(|r| filter.include_tombstoned || !inner.tombstones.contains(&r.id))
            .filter(|r| filter.keeps(r))
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.snapshot().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn export_jsonl(&self, filter: &ExportFilter, path: &Path) -> Result<usize, DatasetError> {
        let records = self.select(filter);
        write_jsonl(path, &records)?;
        Ok(records.len())
    }

    /// Imports native records, one JSON object per line. Failing lines are
    /// reported and skipped; the rest are appended.
    pub fn import_jsonl(&self, path: &Path) -> Result<ImportReport, DatasetError> {
        self.import_with(path, |v| {
            serde_json::from_value::<ClueRecord>(v).map_err(|e| e.to_string())
        })
    }

    /// Imports rows of the published clue dataset through [`record_from_published_row`].
    pub fn import_published(&self, path: &Path, created_at: DateTime<Utc>) -> Result<ImportReport, DatasetError> {
        let lex = ItalianLexicon::builtin();
        self.import_with(path, |v| record_from_published_row(&v, lex, created_at))
    }

    fn import_with(
        &self,
        path: &Path,
        mut convert: impl FnMut(serde_json::Value) -> Result<ClueRecord, String>,
    ) -> Result<ImportReport, DatasetError> {
        let reader = BufReader::new(File::open(path)?);
        let mut report = ImportReport::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let outcome = serde_json::from_str::<serde_json::Value>(&line)
                .map_err(|e| e.to_string())
                .and_then(&mut convert)
                .and_then(|rec| self.append(rec).map_err(|e| e.to_string()));
            match outcome {
                Ok(_) => report.imported += 1,
                Err(message) => report.errors.push(LineError { line: i + 1, message }),
            }
        }
        Ok(report)
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DatasetError> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item).map_err(std::io::Error::from)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)?;
    Ok(())
}

/// Reads native records without touching a store; fails on the first bad line.
pub fn read_jsonl(path: &Path) -> Result<Vec<ClueRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_record_line(&line).map_err(|message| DatasetError::SchemaError { line: i + 1, message })?);
    }
    Ok(out)
}

/// Parses and checks one native JSONL line.
pub fn parse_record_line(line: &str) -> Result<ClueRecord, String> {
    let rec: ClueRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    rec.check_invariants().map_err(|e| e.to_string())?;
    Ok(rec)
}

const CONTEXT_KEYS: &[&str] = &["context", "text", "input", "contesto"];
const KEYWORD_KEYS: &[&str] = &["keyword", "answer", "solution", "soluzione", "parola_chiave"];
const CLUE_KEYS: &[&str] = &["clue", "output", "definition", "definizione"];
const STYLE_KEYS: &[&str] = &["style", "type", "clue_type", "tipo"];
const CATEGORY_KEYS: &[&str] = &["category", "categoria"];
const TITLE_KEYS: &[&str] = &["title", "titolo"];
const URL_KEYS: &[&str] = &["url", "link"];
const MODEL_KEYS: &[&str] = &["model", "model_id"];

/// Maps a free-text clue-type label onto a style.
pub fn style_from_label(label: &str) -> Option<ClueStyle> {
    let l = label.trim().to_lowercase().replace(['-', '_'], " ");
    if l.contains("copular") || l.contains("copula") {
        Some(ClueStyle::CopularSentence)
    } else if l.contains("determiner") || l == "dp" || l.contains("definite") {
        Some(ClueStyle::DefiniteDeterminerPhrase)
    } else if l.contains("noun") || l == "np" || l.contains("bare") {
        Some(ClueStyle::BareNounPhrase)
    } else if l.is_empty() || l.contains("unrestricted") || l.contains("free") || l.contains("general") {
        Some(ClueStyle::Unrestricted)
    } else {
        None
    }
}

fn pick<'a>(row: &'a serde_json::Value, keys: &[&str]) -> Option<&'a str> {
    keys.iter().find_map(|k| row.get(*k)?.as_str())
}

/// Converts a row of the published dataset. Column names vary between
/// releases, so each field is looked up under several aliases. The
/// validation report is recomputed; ROUGE is left empty.
pub fn record_from_published_row(
    row: &serde_json::Value,
    lex: &ItalianLexicon,
    created_at: DateTime<Utc>,
) -> Result<ClueRecord, String> {
    let context = pick(row, CONTEXT_KEYS).ok_or("missing context column")?;
    let keyword = pick(row, KEYWORD_KEYS).ok_or("missing keyword/answer column")?.trim();
    let clue = pick(row, CLUE_KEYS).ok_or("missing clue column")?.trim();
    let label = pick(row, STYLE_KEYS).unwrap_or("");
    let style = style_from_label(label).ok_or_else(|| format!("unknown clue type {label:?}"))?;
    let rec = ClueRecord {
        id: String::new(),
        title: pick(row, TITLE_KEYS).unwrap_or("").to_string(),
        url: pick(row, URL_KEYS).unwrap_or("").to_string(),
        category: pick(row, CATEGORY_KEYS).unwrap_or("").to_string(),
        context: context.to_string(),
        keyword: keyword.to_string(),
        style,
        clue: clue.to_string(),
        model_id: pick(row, MODEL_KEYS).unwrap_or("gpt-4o").to_string(),
        rating: None,
        validation: validate(clue, keyword, style, lex),
        rouge1: None,
        rouge2: None,
        rouge_l: None,
        created_at,
        revision: 0,
    };
    Ok(rec)
}

/// Token counter used for dataset statistics.
pub trait TokenCounter {
    fn count(&self, text: &str) -> usize;
}

pub struct WhitespaceTokenizer;

impl TokenCounter for WhitespaceTokenizer {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

/// Letter/digit runs, the tokenisation ROUGE uses.
pub struct WordTokenizer;

impl TokenCounter for WordTokenizer {
    fn count(&self, text: &str) -> usize {
        crate::rouge::tokenize(text).len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub record_count: usize,
    pub context_bucket_width: usize,
    pub clue_bucket_width: usize,
    /// Bucket start → count.
    pub context_token_histogram: BTreeMap<usize, usize>,
    pub clue_token_histogram: BTreeMap<usize, usize>,
    pub category_counts: BTreeMap<String, usize>,
    pub style_counts: BTreeMap<ClueStyle, usize>,
    pub min_context_tokens: usize,
    pub max_context_tokens: usize,
    pub min_clue_tokens: usize,
    pub max_clue_tokens: usize,
}

pub fn compute_stats(records: &[ClueRecord], tokenizer: &dyn TokenCounter) -> Result<DatasetStats, DatasetError> {
    compute_stats_with(records, tokenizer, 50, 5)
}

pub fn compute_stats_with(
    records: &[ClueRecord],
    tokenizer: &dyn TokenCounter,
    context_bucket_width: usize,
    clue_bucket_width: usize,
) -> Result<DatasetStats, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptySet);
    }
    let cw = context_bucket_width.max(1);
    let kw = clue_bucket_width.max(1);
    let mut stats = DatasetStats {
        record_count: records.len(),
        context_bucket_width: cw,
        clue_bucket_width: kw,
        context_token_histogram: BTreeMap::new(),
        clue_token_histogram: BTreeMap::new(),
        category_counts: BTreeMap::new(),
        style_counts: BTreeMap::new(),
        min_context_tokens: usize::MAX,
        max_context_tokens: 0,
        min_clue_tokens: usize::MAX,
        max_clue_tokens: 0,
    };
    for r in records {
        let c = tokenizer.count(&r.context);
        let k = tokenizer.count(&r.clue);
        *stats.context_token_histogram.entry(c / cw * cw).or_default() += 1;
        *stats.clue_token_histogram.entry(k / kw * kw).or_default() += 1;
        *stats.category_counts.entry(r.category.clone()).or_default() += 1;
        *stats.style_counts.entry(r.style).or_default() += 1;
        stats.min_context_tokens = stats.min_context_tokens.min(c);
        stats.max_context_tokens = stats.max_context_tokens.max(c);
        stats.min_clue_tokens = stats.min_clue_tokens.min(k);
        stats.max_clue_tokens = stats.max_clue_tokens.max(k);
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Deterministic 90/5/5 split on the first 8 bytes of SHA-256(id).
pub fn split_of(id: &str) -> Split {
    let digest = Sha256::digest(id.as_bytes());
    let v = u64::from_be_bytes(digest[..8].try_into().unwrap()) % 100;
    match v {
        0..=89 => Split::Train,
        90..=94 => Split::Val,
        _ => Split::Test,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub id: String,
    pub instruction: String,
    pub input: String,
    pub output: String,
}

impl TrainingExample {
    pub fn from_record(r: &ClueRecord) -> Self {
        TrainingExample {
            id: r.id.clone(),
            instruction: format!(
                "Scrivi una definizione da cruciverba per la soluzione indicata, basandoti sul testo. Struttura richiesta: {}",
                style_descriptor(r.style)
            ),
            input: format!("Testo: {}\nSoluzione: {}", r.context, r.keyword),
            output: r.clue.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub file: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceSettings {
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: u32,
}

/// Fine-tuning hyperparameters and the dataset splits they apply to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub format_version: u32,
    pub method: String,
    pub base_models: Vec<String>,
    pub lora_r: u32,
    pub lora_alpha: u32,
    pub epochs: u32,
    pub batch_size: u32,
    pub learning_rate: f64,
    pub checkpoint_selection: String,
    pub inference: InferenceSettings,
    pub split_rule: String,
    pub train: SplitInfo,
    pub val: SplitInfo,
    pub test: SplitInfo,
}

/// Writes `train.jsonl`, `val.jsonl`, `test.jsonl` and `manifest.json` into
/// `dir`. Records whose validation found an answer leak are left out.
pub fn export_training_manifest(records: &[ClueRecord], dir: &Path) -> Result<TrainingManifest, DatasetError> {
    std::fs::create_dir_all(dir)?;
    let usable: Vec<&ClueRecord> = records.iter().filter(|r| !r.validation.answer_leak).collect();
    let mut parts: [Vec<TrainingExample>; 3] = Default::default();
    for r in &usable {
        let idx = match split_of(&r.id) {
            Split::Train => 0,
            Split::Val => 1,
            Split::Test => 2,
        };
        parts[idx].push(TrainingExample::from_record(r));
    }
    let total = usable.len().max(1) as f64;
    let mut infos = Vec::new();
    for (name, examples) in ["train", "val", "test"].iter().zip(&parts) {
        let file = format!("{name}.jsonl");
        write_jsonl(&dir.join(&file), examples)?;
        infos.push(SplitInfo {
            file,
            count: examples.len(),
            fraction: if usable.is_empty() { 0.0 } else { examples.len() as f64 / total },
        });
    }
    let [train, val, test]: [SplitInfo; 3] = infos.try_into().unwrap();
    let gen = GenerationParams::default();
    let manifest = TrainingManifest {
        format_version: 1,
        method: "lora".into(),
        base_models: vec!["Mistral-7B-Instruct-v0.3".into(), "Llama3-8b-Instruct".into()],
        lora_r: 16,
        lora_alpha: 32,
        epochs: 3,
        batch_size: 64,
        learning_rate: 3e-4,
        checkpoint_selection: "minimum validation loss".into(),
        inference: InferenceSettings {
            temperature: gen.temperature,
            top_p: gen.top_p,
            top_k: gen.top_k,
        },
        split_rule: "sha256(id)[0..8] as big-endian u64 mod 100: 0-89 train, 90-94 val, 95-99 test".into(),
        train,
        val,
        test,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::from)?;
    text.push('\n');
    write_atomic(&dir.join("manifest.json"), text.as_bytes())?;
    Ok(manifest)
}
