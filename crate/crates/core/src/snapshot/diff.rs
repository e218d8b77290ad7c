use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use similar::{Algorithm, DiffOp};

use super::Snapshot;
use crate::equiv::NormalizerChain;

const CONTEXT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileStatus {
    Added,
    Removed,
    Modified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineTag {
    Context,
    Removed,
    Added,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub tag: LineTag,
    /// Line text including its terminating newline, if it had one.
    pub text: String,
}

/// One unified-diff hunk. Start/length fields are the numbers printed in the
/// `@@ -s,l +s,l @@` header.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: usize,
    pub old_len: usize,
    pub new_start: usize,
    pub new_len: usize,
    pub lines: Vec<DiffLine>,
}

impl Hunk {
    pub fn changed_lines(&self) -> usize {
        self.lines.iter().filter(|l| l.tag != LineTag::Context).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDiff {
    pub path: String,
    pub status: FileStatus,
    pub hunks: Vec<Hunk>,
    pub changed_lines: usize,
}

/// Normalized per-file differences between two snapshots.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffResidual {
    pub entries: Vec<FileDiff>,
    pub changed_lines: usize,
}

impl DiffResidual {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn push(&mut self, entry: FileDiff) {
        self.changed_lines += entry.changed_lines;
        self.entries.push(entry);
    }

    /// Renders the residual as a unified patch with `a/` and `b/` prefixes.
    /// With `hide_deleted`, removed files are listed by header only.
    pub fn to_patch(&self, hide_deleted: bool) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let (old, new) = match e.status {
                FileStatus::Added => ("/dev/null".to_string(), format!("b/{}", e.path)),
                FileStatus::Removed => (format!("a/{}", e.path), "/dev/null".to_string()),
                FileStatus::Modified => (format!("a/{}", e.path), format!("b/{}", e.path)),
            };
            let _ = writeln!(out, "--- {old}");
            let _ = writeln!(out, "+++ {new}");
            if hide_deleted && e.status == FileStatus::Removed {
                continue;
            }
            for h in &e.hunks {
                render_hunk(&mut out, h);
            }
        }
        out
    }
}

fn render_range(start: usize, len: usize) -> String {
    if len == 1 {
        start.to_string()
    } else {
        format!("{start},{len}")
    }
}

fn render_hunk(out: &mut String, h: &Hunk) {
    let _ = writeln!(
        out,
        "@@ -{} +{} @@",
        render_range(h.old_start, h.old_len),
        render_range(h.new_start, h.new_len)
    );
    for l in &h.lines {
        out.push(match l.tag {
            LineTag::Context => ' ',
            LineTag::Removed => '-',
            LineTag::Added => '+',
        });
        out.push_str(&l.text);
        if !l.text.ends_with('\n') {
            out.push_str("\n\\ No newline at end of file\n");
        }
    }
}

pub(crate) fn split_lines(bytes: &[u8]) -> Vec<&[u8]> {
    bytes.split_inclusive(|b| *b == b'\n').collect()
}

pub(crate) fn line_ops(old: &[&[u8]], new: &[&[u8]]) -> Vec<DiffOp> {
    similar::capture_diff_slices(Algorithm::Myers, old, new)
}

/// Line-level unified diff of two byte strings with three lines of context.
pub fn diff_bytes(old: &[u8], new: &[u8]) -> Vec<Hunk> {
    let old_lines = split_lines(old);
    let new_lines = split_lines(new);
    let ops = line_ops(&old_lines, &new_lines);
    let text = |b: &[u8]| String::from_utf8_lossy(b).into_owned();

    let mut hunks = Vec::new();
    for group in similar::group_diff_ops(ops, CONTEXT) {
        let (Some(first), Some(last)) = (group.first(), group.last()) else {
            continue;
        };
        let old_range = first.old_range().start..last.old_range().end;
        let new_range = first.new_range().start..last.new_range().end;
        let mut lines = Vec::new();
        for op in &group {
            for change in op.iter_changes(&old_lines, &new_lines) {
                let tag = match change.tag() {
                    similar::ChangeTag::Equal => LineTag::Context,
                    similar::ChangeTag::Delete => LineTag::Removed,
                    similar::ChangeTag::Insert => LineTag::Added,
                };
                lines.push(DiffLine {
                    tag,
                    text: text(change.value()),
                });
            }
        }
        let header_start = |r: &std::ops::Range<usize>| if r.is_empty() { r.start } else { r.start + 1 };
        hunks.push(Hunk {
            old_start: header_start(&old_range),
            old_len: old_range.len(),
            new_start: header_start(&new_range),
            new_len: new_range.len(),
            lines,
        });
    }
    hunks
}

fn file_diff(path: &str, status: FileStatus, old: &[u8], new: &[u8]) -> FileDiff {
    let hunks = diff_bytes(old, new);
    let counted: usize = hunks.iter().map(Hunk::changed_lines).sum();
    // An added or removed empty file has no lines but is still a change.
    FileDiff {
        path: path.to_string(),
        status,
        hunks,
        changed_lines: counted.max(1),
    }
}

/// Diffs two snapshots after normalizing every file with `chain`. Files that
/// are equal after normalization produce no entry.
pub fn diff_snapshots(a: &Snapshot, b: &Snapshot, chain: &NormalizerChain) -> DiffResidual {
    let paths: BTreeSet<&str> = a.paths().chain(b.paths()).collect();
    let mut residual = DiffResidual::default();
    for path in paths {
        let entry = match (a.get(path), b.get(path)) {
            (Some(x), Some(y)) => {
                if x == y {
                    continue;
                }
                let nx = chain.apply(path, x);
                let ny = chain.apply(path, y);
                if nx == ny {
                    continue;
                }
                file_diff(path, FileStatus::Modified, &nx, &ny)
            }
            (Some(x), None) => file_diff(path, FileStatus::Removed, &chain.apply(path, x), b""),
            (None, Some(y)) => file_diff(path, FileStatus::Added, b"", &chain.apply(path, y)),
            (None, None) => unreachable!(),
        };
        residual.push(entry);
    }
    residual
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn snap(files: &[(&str, &str)]) -> Snapshot {
        Snapshot::from_files(files.iter().copied()).unwrap()
    }

    #[test]
    fn identical_snapshots_have_empty_residual() {
        let s = snap(&[("x.txt", "a\n"), ("y", "b")]);
        let r = diff_snapshots(&s, &s, &NormalizerChain::empty());
        assert!(r.is_empty());
        assert_eq!(r.changed_lines, 0);
    }

    #[test]
    fn single_line_change_counts_two() {
        let a = snap(&[("x.txt", "a\n")]);
        let b = snap(&[("x.txt", "b\n")]);
        let r = diff_snapshots(&a, &b, &NormalizerChain::empty());
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.changed_lines, 2);
        assert_eq!(
            r.to_patch(false),
            "--- a/x.txt\n+++ b/x.txt\n@@ -1 +1 @@\n-a\n+b\n"
        );
    }

    #[test]
    fn missing_trailing_newline_is_marked() {
        let hunks = diff_bytes(b"a\nb", b"a\nc");
        let mut out = String::new();
        render_hunk(&mut out, &hunks[0]);
        assert_eq!(
            out,
            "@@ -1,2 +1,2 @@\n a\n-b\n\\ No newline at end of file\n+c\n\\ No newline at end of file\n"
        );
    }

    #[test]
    fn empty_file_addition_still_counts() {
        let a = snap(&[]);
        let b = snap(&[("e", "")]);
        let r = diff_snapshots(&a, &b, &NormalizerChain::empty());
        assert_eq!(r.entries[0].status, FileStatus::Added);
        assert_eq!(r.changed_lines, 1);
    }

    #[test]
    fn hide_deleted_drops_removed_hunks() {
        let a = snap(&[("gone", "1\n2\n")]);
        let b = snap(&[]);
        let r = diff_snapshots(&a, &b, &NormalizerChain::empty());
        assert_eq!(r.to_patch(true), "--- a/gone\n+++ /dev/null\n");
        assert!(r.to_patch(false).contains("@@ -1,2 +0,0 @@"));
    }

    fn arb_lines() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!["a\n", "b\n", "c\n", "\n", "d"]), 0..12)
            .prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn swap_inverts_status_and_polarity(x in arb_lines(), y in arb_lines(), z in arb_lines()) {
            let a = snap(&[("f", &x), ("only_a", &z)]);
            let b = snap(&[("f", &y), ("only_b", &z)]);
            let chain = NormalizerChain::empty();
            let ab = diff_snapshots(&a, &b, &chain);
            let ba = diff_snapshots(&b, &a, &chain);
            prop_assert_eq!(ab.changed_lines, ba.changed_lines);
            prop_assert_eq!(ab.changed_lines == 0, ab.entries.is_empty());
            for (e1, e2) in ab.entries.iter().zip(&ba.entries) {
                prop_assert_eq!(&e1.path, &e2.path);
                let flipped = match e1.status {
                    FileStatus::Added => FileStatus::Removed,
                    FileStatus::Removed => FileStatus::Added,
                    FileStatus::Modified => FileStatus::Modified,
                };
                prop_assert_eq!(e2.status, flipped);
                let removed1: usize = e1.hunks.iter().flat_map(|h| &h.lines).filter(|l| l.tag == LineTag::Removed).count();
                let added2: usize = e2.hunks.iter().flat_map(|h| &h.lines).filter(|l| l.tag == LineTag::Added).count();
                prop_assert_eq!(removed1, added2);
            }
        }
    }
}
