use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A single edit made by a pass.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EditSite {
    pub path: String,
    /// 1-based line in the input file; 0 for whole-file operations.
    pub line: usize,
    pub before: String,
    pub after: String,
}

/// What a pass did: every edit site, aggregate counts, and warnings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassReport {
    pub edits: Vec<EditSite>,
    pub counts: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

impl PassReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn edit(&mut self, path: &str, line: usize, before: impl Into<String>, after: impl Into<String>) {
        self.edits.push(EditSite {
            path: path.to_string(),
            line,
            before: before.into(),
            after: after.into(),
        });
    }

    pub fn add_count(&mut self, key: &str, n: usize) {
        *self.counts.entry(key.to_string()).or_default() += n;
    }

    pub fn count(&self, key: &str) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Sorts edit sites into path/line order and sets the `edits` count.
    pub(crate) fn finish(mut self) -> Self {
        self.edits.sort();
        self.counts.insert("edits".into(), self.edits.len());
        self
    }

    pub(crate) fn merge(&mut self, other: PassReport) {
        self.edits.extend(other.edits);
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
        self.warnings.extend(other.warnings);
    }
}
