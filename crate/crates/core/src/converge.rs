//! Bringing two variants of a codebase together: a line-counting distance,
//! per-pass convergence tracking and a three-way merge.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use similar::DiffOp;

use crate::equiv::NormalizerChain;
use crate::error::Result;
use crate::passes::{run_pipeline_with, PipelinePlan};
use crate::snapshot::{diff_snapshots, line_ops, split_lines, FileStatus, Journal, Snapshot};

/// Changes on the two sides closer than this many unchanged base lines are
/// merged as one region, and conflict unless they agree.
pub const MERGE_SLACK: usize = 3;

/// Paths only in `a`, plus paths only in `b`, plus changed lines between the
/// normalized contents of every common path.
pub fn tree_distance(a: &Snapshot, b: &Snapshot, chain: &NormalizerChain) -> usize {
    diff_snapshots(a, b, chain)
        .entries
        .iter()
        .map(|e| match e.status {
            FileStatus::Added | FileStatus::Removed => 1,
            FileStatus::Modified => e.changed_lines,
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictKind {
    /// Overlapping edits with different results.
    Content,
    /// Deleted on one side, modified on the other.
    DeleteModify,
    /// Added on both sides with different contents.
    AddAdd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub path: String,
    pub kind: ConflictKind,
    /// 1-based first base line of the conflicting region and its length.
    pub base_start: usize,
    pub base_len: usize,
    /// The region as each side has it; `None` when the side deleted the file.
    pub a: Option<String>,
    pub b: Option<String>,
}

impl Conflict {
    fn mirrored(&self) -> Self {
        Conflict {
            a: self.b.clone(),
            b: self.a.clone(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeOutcome {
    /// The merged tree; conflicting regions keep the base text.
    pub snapshot: Snapshot,
    pub conflicts: Vec<Conflict>,
}

/// Three-way merge of `a` and `b` against their common ancestor `base`.
///
/// Symmetric: swapping `a` and `b` gives the same tree with mirrored
/// conflicts.
pub fn three_way_merge(base: &Snapshot, a: &Snapshot, b: &Snapshot) -> MergeOutcome {
    let paths: BTreeSet<&str> = base.paths().chain(a.paths()).chain(b.paths()).collect();
    let mut edit = Snapshot::empty().edit();
    let mut conflicts = Vec::new();
    for path in paths {
        let (o, x, y) = (base.get(path), a.get(path), b.get(path));
        let keep = if x == y {
            x.map(<[u8]>::to_vec)
        } else if x == o {
            y.map(<[u8]>::to_vec)
        } else if y == o {
            x.map(<[u8]>::to_vec)
        } else {
            match (o, x, y) {
                (Some(o), Some(x), Some(y)) => {
                    let (merged, mut c) = merge_text(path, o, x, y);
                    conflicts.append(&mut c);
                    Some(merged)
                }
                (None, Some(x), Some(y)) => {
                    conflicts.push(Conflict {
                        path: path.to_string(),
                        kind: ConflictKind::AddAdd,
                        base_start: 0,
                        base_len: 0,
                        a: Some(lossy(x)),
                        b: Some(lossy(y)),
                    });
                    None
                }
                (Some(o), x, y) => {
                    conflicts.push(Conflict {
                        path: path.to_string(),
                        kind: ConflictKind::DeleteModify,
                        base_start: 1,
                        base_len: split_lines(o).len(),
                        a: x.map(lossy),
                        b: y.map(lossy),
                    });
                    Some(o.to_vec())
                }
                (None, _, _) => unreachable!("x != y with both absent"),
            }
        };
        if let Some(bytes) = keep {
            edit.insert(path, bytes).expect("paths come from snapshots");
        }
    }
    MergeOutcome {
        snapshot: edit.finish(),
        conflicts,
    }
}

/// Mirror of `outcome.conflicts`, i.e. what merging with sides swapped
/// reports.
pub fn mirror_conflicts(conflicts: &[Conflict]) -> Vec<Conflict> {
    conflicts.iter().map(Conflict::mirrored).collect()
}

fn lossy(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[derive(Clone, Debug)]
struct Region<'a> {
    side: Branch,
    base: Range<usize>,
    lines: Vec<&'a [u8]>,
}

fn regions<'a>(side: Branch, base: &[&[u8]], other: &[&'a [u8]]) -> Vec<Region<'a>> {
    let mut out: Vec<Region<'a>> = Vec::new();
    for op in line_ops(base, other) {
        if matches!(op, DiffOp::Equal { .. }) {
            continue;
        }
        let (old, new) = (op.old_range(), op.new_range());
        match out.last_mut() {
            Some(r) if r.base.end == old.start && r.side == side => {
                r.base.end = old.end;
                r.lines.extend_from_slice(&other[new]);
            }
            _ => out.push(Region {
                side,
                base: old,
                lines: other[new].to_vec(),
            }),
        }
    }
    out
}

/// The text one side gives to base lines `range`, applying its regions.
fn side_text(base: &[&[u8]], range: &Range<usize>, regions: &[&Region]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut pos = range.start;
    for r in regions {
        for l in &base[pos..r.base.start] {
            out.extend_from_slice(l);
        }
        for l in &r.lines {
            out.extend_from_slice(l);
        }
        pos = r.base.end;
    }
    for l in &base[pos..range.end] {
        out.extend_from_slice(l);
    }
    out
}

fn merge_text(path: &str, o: &[u8], x: &[u8], y: &[u8]) -> (Vec<u8>, Vec<Conflict>) {
    let base = split_lines(o);
    let (xl, yl) = (split_lines(x), split_lines(y));
    let mut all = regions(Branch::A, &base, &xl);
    all.extend(regions(Branch::B, &base, &yl));
    all.sort_by_key(|r| (r.base.start, r.base.end, r.side));

    let mut clusters: Vec<(Range<usize>, Vec<Region>)> = Vec::new();
    for r in all {
        match clusters.last_mut() {
            Some((range, members)) if r.base.start < range.end + MERGE_SLACK => {
                range.end = range.end.max(r.base.end);
                members.push(r);
            }
            _ => clusters.push((r.base.clone(), vec![r])),
        }
    }

    let mut out = Vec::with_capacity(o.len().max(x.len()).max(y.len()));
    let mut conflicts = Vec::new();
    let mut pos = 0;
    for (range, members) in &clusters {
        for l in &base[pos..range.start] {
            out.extend_from_slice(l);
        }
        let of = |side| members.iter().filter(|r| r.side == side).collect::<Vec<_>>();
        let (ra, rb) = (of(Branch::A), of(Branch::B));
        let ta = side_text(&base, range, &ra);
        let tb = side_text(&base, range, &rb);
        if rb.is_empty() || ta == tb {
            out.extend_from_slice(&ta);
        } else if ra.is_empty() {
            out.extend_from_slice(&tb);
        } else {
            for l in &base[range.clone()] {
                out.extend_from_slice(l);
            }
            conflicts.push(Conflict {
                path: path.to_string(),
                kind: ConflictKind::Content,
                base_start: range.start + 1,
                base_len: range.len(),
                a: Some(lossy(&ta)),
                b: Some(lossy(&tb)),
            });
        }
        pos = range.end;
    }
    for l in &base[pos..] {
        out.extend_from_slice(l);
    }
    (out, conflicts)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceStep {
    pub branch: Branch,
    pub pass: String,
    pub distance: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub seed: String,
    pub normalizers: String,
    pub initial_distance: usize,
    pub final_distance: usize,
    pub steps: Vec<ConvergenceStep>,
    /// Set when a branch pipeline halted; names the branch and the failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halted: Option<String>,
}

impl ConvergenceReport {
    /// True when no step increased the distance.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial_distance;
        self.steps.iter().all(|s| {
            let ok = s.distance <= prev;
            prev = s.distance;
            ok
        })
    }
}

#[derive(Clone, Debug)]
pub struct Convergence {
    pub report: ConvergenceReport,
    pub journal_a: Journal,
    pub journal_b: Journal,
}

impl Convergence {
    pub fn final_a(&self) -> &Snapshot {
        self.journal_a.final_snapshot()
    }

    pub fn final_b(&self) -> &Snapshot {
        self.journal_b.final_snapshot()
    }
}

/// Runs `plan_a` on `a`, then `plan_b` on `b`, recording the distance
/// between the two current trees after every completed pass.
pub fn run_convergence(
    a: &Snapshot,
    b: &Snapshot,
    plan_a: &PipelinePlan,
    plan_b: &PipelinePlan,
    chain: &NormalizerChain,
    seed: &str,
) -> Result<Convergence> {
    let initial = tree_distance(a, b, chain);
    let journal_a = run_pipeline_with(a, plan_a, seed)?;
    let mut steps = Vec::new();
    for (r, snap) in journal_a.records.iter().zip(journal_a.replay()) {
        steps.push(ConvergenceStep {
            branch: Branch::A,
            pass: r.name.clone(),
            distance: tree_distance(&snap, b, chain),
        });
    }
    let final_a = journal_a.final_snapshot().clone();
    let journal_b = run_pipeline_with(b, plan_b, seed)?;
    for (r, snap) in journal_b.records.iter().zip(journal_b.replay()) {
        steps.push(ConvergenceStep {
            branch: Branch::B,
            pass: r.name.clone(),
            distance: tree_distance(&final_a, &snap, chain),
        });
    }
    let halted = [(Branch::A, &journal_a), (Branch::B, &journal_b)]
        .into_iter()
        .find_map(|(br, j)| j.failure.as_ref().map(|f| format!("{br:?}: pass {}: {}", f.name, f.error)));
    let report = ConvergenceReport {
        seed: seed.to_string(),
        normalizers: chain.id(),
        initial_distance: initial,
        final_distance: tree_distance(journal_a.final_snapshot(), journal_b.final_snapshot(), chain),
        steps,
        halted,
    };
    Ok(Convergence {
        report,
        journal_a,
        journal_b,
    })
}
