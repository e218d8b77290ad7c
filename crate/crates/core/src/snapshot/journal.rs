use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DiffResidual, Snapshot, DIGEST_ALGORITHM};
use crate::equiv::EquivalenceVerdict;
use crate::error::{Error, Result};
use crate::report::PassReport;

/// Files touched by one record: new contents, or `None` for a deletion.
pub type FileDelta = BTreeMap<String, Option<Vec<u8>>>;

pub(crate) fn delta_between(before: &Snapshot, after: &Snapshot) -> FileDelta {
    let mut delta = FileDelta::new();
    for (p, b) in before.iter() {
        match after.get(p) {
            Some(a) if a == b => {}
            Some(a) => {
                delta.insert(p.to_string(), Some(a.to_vec()));
            }
            None => {
                delta.insert(p.to_string(), None);
            }
        }
    }
    for (p, a) in after.iter() {
        if !before.contains(p) {
            delta.insert(p.to_string(), Some(a.to_vec()));
        }
    }
    delta
}

pub(crate) fn apply_delta(snap: &Snapshot, delta: &FileDelta) -> Snapshot {
    let mut edit = snap.edit();
    for (p, v) in delta {
        match v {
            Some(bytes) => edit.insert(p.clone(), bytes).expect("delta paths are validated"),
            None => {
                edit.remove(p);
            }
        }
    }
    edit.finish()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalHeader {
    pub digest: String,
    pub seed: String,
    pub plan_digest: String,
    pub normalizers: String,
    pub base_id: String,
    pub final_id: String,
    pub records: usize,
    pub halted: bool,
}

/// One completed pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub name: String,
    pub kind: String,
    pub plan_index: usize,
    pub input_id: String,
    pub output_id: String,
    pub report: PassReport,
    /// Equivalence verdict, absent when the pass was run with `skip`.
    pub verdict: Option<EquivalenceVerdict>,
    /// Raw (unnormalized) diff from input to output; persisted as `diff.patch`.
    #[serde(skip)]
    pub diff: DiffResidual,
    #[serde(skip)]
    pub delta: FileDelta,
}

impl PassRecord {
    pub fn touched_files(&self) -> impl Iterator<Item = &str> {
        self.delta.keys().map(String::as_str)
    }
}

/// The pass at which a pipeline halted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub name: String,
    pub kind: String,
    pub plan_index: usize,
    pub input_id: String,
    pub error: String,
    pub report: Option<PassReport>,
    pub verdict: Option<EquivalenceVerdict>,
}

/// Ordered record of applied passes.
#[derive(Clone, Debug)]
pub struct Journal {
    pub seed: String,
    pub plan_digest: String,
    pub normalizers: String,
    pub base: Snapshot,
    pub records: Vec<PassRecord>,
    pub failure: Option<FailureRecord>,
    final_snapshot: Snapshot,
}

impl Journal {
    pub(crate) fn new(base: Snapshot, seed: String, plan_digest: String, normalizers: String) -> Self {
        Journal {
            seed,
            plan_digest,
            normalizers,
            final_snapshot: base.clone(),
            base,
            records: Vec::new(),
            failure: None,
        }
    }

    pub(crate) fn push(&mut self, record: PassRecord, output: Snapshot) {
        debug_assert_eq!(record.input_id, self.final_snapshot.id());
        debug_assert_eq!(record.output_id, output.id());
        self.records.push(record);
        self.final_snapshot = output;
    }

    pub(crate) fn set_records(&mut self, records: Vec<PassRecord>) {
        let mut snap = self.base.clone();
        let mut fixed = Vec::with_capacity(records.len());
        for mut r in records {
            r.input_id = snap.id().to_string();
            let next = apply_delta(&snap, &r.delta);
            r.output_id = next.id().to_string();
            snap = next;
            fixed.push(r);
        }
        self.records = fixed;
        if let Some(f) = &mut self.failure {
            f.input_id = snap.id().to_string();
        }
        self.final_snapshot = snap;
    }

    pub(crate) fn fail(&mut self, failure: FailureRecord) {
        self.failure = Some(failure);
    }

    /// Snapshot after the last completed record.
    pub fn final_snapshot(&self) -> &Snapshot {
        &self.final_snapshot
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// Replays the recorded deltas from the base, yielding the snapshot after
    /// each record.
    pub fn replay(&self) -> Vec<Snapshot> {
        let mut out = Vec::with_capacity(self.records.len());
        let mut snap = self.base.clone();
        for r in &self.records {
            snap = apply_delta(&snap, &r.delta);
            out.push(snap.clone());
        }
        out
    }

    pub fn header(&self) -> JournalHeader {
        JournalHeader {
            digest: DIGEST_ALGORITHM.to_string(),
            seed: self.seed.clone(),
            plan_digest: self.plan_digest.clone(),
            normalizers: self.normalizers.clone(),
            base_id: self.base.id().to_string(),
            final_id: self.final_snapshot.id().to_string(),
            records: self.records.len(),
            halted: self.failure.is_some(),
        }
    }

    /// Persists the journal as `dir/journal.json` plus one
    /// `dir/NNN-<name>/{report.json,diff.patch}` directory per record.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(&dir.join("journal.json"), &self.header())?;
        for (i, r) in self.records.iter().enumerate() {
            let sub = dir.join(record_dir_name(i, &r.name));
            fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
            write_json(&sub.join("report.json"), r)?;
            let patch = sub.join("diff.patch");
            fs::write(&patch, r.diff.to_patch(false)).map_err(|e| Error::io(&patch, e))?;
        }
        if let Some(f) = &self.failure {
            let sub = dir.join(record_dir_name(self.records.len(), &f.name));
            fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
            write_json(&sub.join("failure.json"), f)?;
            if let Some(v) = &f.verdict {
                let patch = sub.join("residual.patch");
                fs::write(&patch, v.residual.to_patch(false)).map_err(|e| Error::io(&patch, e))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn record_dir_name(index: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{:03}-{clean}", index + 1)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
