//! Article and keyword filtering rules, and popularity ranking of the pool.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::word_count;
use crate::wiki::ArticleRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationConfig {
    pub min_words: usize,
    pub max_words: usize,
    pub keyword_min_chars: usize,
    pub keyword_max_chars: usize,
    pub keyword_max_words: usize,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            min_words: 50,
            max_words: 1200,
            keyword_min_chars: 3,
            keyword_max_chars: 20,
            keyword_max_words: 2,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid curation config: {0}")]
pub struct ConfigError(pub &'static str);

impl CurationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_words == 0
            || self.max_words == 0
            || self.keyword_min_chars == 0
            || self.keyword_max_chars == 0
            || self.keyword_max_words == 0
        {
            return Err(ConfigError("all bounds must be positive"));
        }
        if self.min_words >= self.max_words {
            return Err(ConfigError("min_words must be below max_words"));
        }
        if self.keyword_min_chars > self.keyword_max_chars {
            return Err(ConfigError("keyword_min_chars exceeds keyword_max_chars"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RejectReason {
    TooShort,
    TooLong,
    NoValidKeyword,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::TooShort => "TooShort",
            RejectReason::TooLong => "TooLong",
            RejectReason::NoValidKeyword => "NoValidKeyword",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationVerdict {
    pub accepted: bool,
    pub reasons: Vec<RejectReason>,
    /// Keywords that survived [`filter_keyword`], trimmed, in original order.
    pub keywords: Vec<String>,
}

/// Letters and single internal spaces only, 3–20 characters, at most two words
/// (with the default config). Accented letters count as letters; digits,
/// apostrophes, hyphens and other punctuation do not.
pub fn filter_keyword(keyword: &str, cfg: &CurationConfig) -> bool {
    let kw = keyword.trim();
    if kw.is_empty() {
        return false;
    }
    let mut chars = 0usize;
    let mut words = 1usize;
    let mut prev_space = false;
    for c in kw.chars() {
        if c == ' ' {
            if prev_space {
                return false;
            }
            prev_space = true;
            words += 1;
        } else if c.is_alphabetic() {
            prev_space = false;
        } else {
            return false;
        }
        chars += 1;
    }
    (cfg.keyword_min_chars..=cfg.keyword_max_chars).contains(&chars) && words <= cfg.keyword_max_words
}

pub fn filter_article(article: &ArticleRecord, cfg: &CurationConfig) -> CurationVerdict {
    let mut reasons = Vec::new();
    let words = word_count(&article.intro_text);
    if words < cfg.min_words {
        reasons.push(RejectReason::TooShort);
    }
    if words > cfg.max_words {
        reasons.push(RejectReason::TooLong);
    }
    let mut keywords: Vec<String> = Vec::new();
    for kw in &article.bold_keywords {
        let kw = kw.trim();
        if filter_keyword(kw, cfg) && !keywords.iter().any(|k| k == kw) {
            keywords.push(kw.to_string());
        }
    }
    if keywords.is_empty() {
        reasons.push(RejectReason::NoValidKeyword);
    }
    CurationVerdict {
        accepted: reasons.is_empty(),
        reasons,
        keywords,
    }
}

/// Descending by view count, ties broken by title.
pub fn rank_articles(mut pool: Vec<ArticleRecord>) -> Vec<ArticleRecord> {
    pool.sort_by(|a, b| b.view_count.cmp(&a.view_count).then_with(|| a.title.cmp(&b.title)));
    pool
}
