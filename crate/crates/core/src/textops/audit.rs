use regex::bytes::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scope::Scope;
use crate::snapshot::Snapshot;

pub fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// True for names matching `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic() || b == b'_') && bytes.all(is_word_byte)
}

#[derive(Clone, Debug)]
pub enum MatchPattern {
    /// A literal that matches only where neither neighbor is `[A-Za-z0-9_]`.
    Word(String),
    Regex(Regex),
}

impl MatchPattern {
    pub fn word(literal: &str) -> Result<Self> {
        if literal.is_empty() {
            return Err(Error::Audit("empty search literal".into()));
        }
        Ok(MatchPattern::Word(literal.to_string()))
    }

    pub fn regex(pattern: &str) -> Result<Self> {
        Ok(MatchPattern::Regex(Regex::new(pattern)?))
    }

    pub fn describe(&self) -> String {
        match self {
            MatchPattern::Word(w) => format!("\\<{w}\\>"),
            MatchPattern::Regex(r) => r.as_str().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchSite {
    pub path: String,
    /// 1-based line number.
    pub line: usize,
    /// 1-based byte column.
    pub column: usize,
    /// The matching line, without its terminator.
    pub text: String,
    #[serde(skip)]
    pub(crate) offset: usize,
    #[serde(skip)]
    pub(crate) len: usize,
}

/// Every match of a pattern in scope, in (path, line, column) order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchAudit {
    pub pattern: String,
    pub count: usize,
    pub sites: Vec<MatchSite>,
    /// For word patterns: case-insensitive occurrences that are not word
    /// matches (e.g. `xspress3.dbd`, `XSPRESS3_ROOT`), listed for manual
    /// review of possible indirect references.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub near_misses: Vec<MatchSite>,
}

fn site_at(path: &str, bytes: &[u8], offset: usize, len: usize) -> MatchSite {
    let line_start = bytes[..offset].iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    let line_end = bytes[offset..].iter().position(|b| *b == b'\n').map_or(bytes.len(), |i| offset + i);
    let line = bytes[..offset].iter().filter(|b| **b == b'\n').count() + 1;
    MatchSite {
        path: path.to_string(),
        line,
        column: offset - line_start + 1,
        text: String::from_utf8_lossy(&bytes[line_start..line_end]).into_owned(),
        offset,
        len,
    }
}

/// Offsets of word-bounded occurrences of `word` in `bytes`.
pub(crate) fn word_matches(bytes: &[u8], word: &[u8]) -> Vec<usize> {
    let mut out = Vec::new();
    if word.is_empty() || bytes.len() < word.len() {
        return out;
    }
    for i in 0..=bytes.len() - word.len() {
        if &bytes[i..i + word.len()] != word {
            continue;
        }
        let before_ok = i == 0 || !is_word_byte(bytes[i - 1]);
        let after_ok = bytes.get(i + word.len()).is_none_or(|b| !is_word_byte(*b));
        if before_ok && after_ok {
            out.push(i);
        }
    }
    out
}

/// Lists every match of `pattern` in the files selected by `scope`.
pub fn audit_matches(snap: &Snapshot, pattern: &MatchPattern, scope: &Scope) -> MatchAudit {
    let mut sites = Vec::new();
    let mut near = Vec::new();
    for (path, bytes) in snap.iter_scoped(scope) {
        match pattern {
            MatchPattern::Word(w) => {
                let hits = word_matches(bytes, w.as_bytes());
                for &i in &hits {
                    sites.push(site_at(path, bytes, i, w.len()));
                }
                let lower = w.to_ascii_lowercase();
                if bytes.len() >= w.len() {
                    for i in 0..=bytes.len() - w.len() {
                        if !hits.contains(&i) && bytes[i..i + w.len()].eq_ignore_ascii_case(lower.as_bytes()) {
                            near.push(site_at(path, bytes, i, w.len()));
                        }
                    }
                }
            }
            MatchPattern::Regex(r) => {
                for m in r.find_iter(bytes) {
                    sites.push(site_at(path, bytes, m.start(), m.len()));
                }
            }
        }
    }
    sites.sort();
    near.sort();
    MatchAudit {
        pattern: pattern.describe(),
        count: sites.len(),
        sites,
        near_misses: near,
    }
}
