//! Reference-recognition rules: regular expressions whose single capture
//! group is a path reference.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    PathRef,
}

/// Plan-file form of a rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub pattern: String,
    pub kind: RuleKind,
}

#[derive(Clone, Debug)]
pub struct RefRule {
    pub regex: Regex,
    pub kind: RuleKind,
}

impl RefRule {
    pub fn path_ref(pattern: &str) -> Result<Self> {
        let regex = Regex::new(pattern)?;
        if regex.captures_len() != 2 {
            return Err(Error::Plan(format!(
                "reference rule {pattern:?} must have exactly one capture group"
            )));
        }
        Ok(RefRule {
            regex,
            kind: RuleKind::PathRef,
        })
    }

    pub fn from_spec(spec: &RuleSpec) -> Result<Self> {
        match spec.kind {
            RuleKind::PathRef => Self::path_ref(&spec.pattern),
        }
    }

    pub fn spec(&self) -> RuleSpec {
        RuleSpec {
            pattern: self.regex.as_str().to_string(),
            kind: self.kind,
        }
    }

    /// Byte ranges of every captured reference in `text`.
    pub fn references<'a, 't>(&'a self, text: &'t str) -> impl Iterator<Item = (std::ops::Range<usize>, &'t str)> + use<'a, 't> {
        self.regex.captures_iter(text).filter_map(|c| c.get(1)).map(|m| (m.range(), m.as_str()))
    }
}

impl PartialEq for RefRule {
    fn eq(&self, other: &Self) -> bool {
        self.regex.as_str() == other.regex.as_str() && self.kind == other.kind
    }
}
