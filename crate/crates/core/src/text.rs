//! Small text helpers shared across modules.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Collapses every whitespace run to a single space and trims both ends.
pub fn normalize_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Removes diacritics: `è` → `e`, `À` → `A`.
pub fn fold_accents(s: &str) -> String {
    s.nfd().filter(|c| !is_combining_mark(*c)).nfc().collect()
}

pub fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Levenshtein distance over chars, bailing out early once it exceeds `limit`.
pub fn edit_distance_within(a: &str, b: &str, limit: usize) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.len().abs_diff(b.len()) > limit {
        return false;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > limit {
            return false;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()] <= limit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace() {
        assert_eq!(normalize_whitespace("  a \n\t b  "), "a b");
        assert_eq!(normalize_whitespace(""), "");
    }

    #[test]
    fn accents() {
        assert_eq!(fold_accents("àèéìòù ÀÈ"), "aeeiou AE");
        assert_eq!(fold_accents("Roma"), "Roma");
    }

    #[test]
    fn distance() {
        assert!(edit_distance_within("terrier", "terrier", 0));
        assert!(edit_distance_within("terrier", "terriers", 1));
        assert!(edit_distance_within("roma", "rima", 1));
        assert!(!edit_distance_within("roma", "amor", 1));
        assert!(!edit_distance_within("a", "abc", 1));
    }
}
