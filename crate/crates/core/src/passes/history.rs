use std::collections::BTreeSet;

use super::{Pass, PassParams, RelocateParams, RenameParams};
use crate::equiv::{EquivalenceVerdict, NormalizerChain};
use crate::error::{Error, Result};
use crate::snapshot::{apply_delta, diff_snapshots, DiffResidual, FileDelta, Journal, PassRecord};

/// The pass that undoes `p`: rename and relocate swap their mappings,
/// outline and inline swap kinds.
pub fn invert_pass(p: &Pass) -> Result<Pass> {
    let params = match &p.params {
        PassParams::Rename(r) => PassParams::Rename(RenameParams {
            old: r.new.clone(),
            new: r.old.clone(),
            force: false,
        }),
        PassParams::Relocate(r) => PassParams::Relocate(RelocateParams { moves: r.moves.inverse() }),
        PassParams::Outline(f) => PassParams::Inline(f.clone()),
        PassParams::Inline(f) => PassParams::Outline(f.clone()),
        _ => return Err(Error::NotInvertible(format!("{} ({})", p.name, p.kind()))),
    };
    Ok(Pass {
        name: format!("invert:{}", p.name),
        params,
        scope: p.scope.clone(),
        check: p.check,
    })
}

fn touched(r: &PassRecord) -> BTreeSet<&str> {
    r.delta.keys().map(String::as_str).collect()
}

/// Replaces the records at `indices` (0-based) with one record holding
/// their combined effect, placed at the position of the first of them.
///
/// Records skipped over between the first and last selected index must
/// touch files disjoint from every selected record; otherwise reordering
/// could change the result and the squash is refused.
pub fn journal_squash(j: &Journal, indices: &BTreeSet<usize>) -> Result<Journal> {
    let (Some(&first), Some(&last)) = (indices.first(), indices.last()) else {
        return Err(Error::Plan("squash needs at least one record".into()));
    };
    if last >= j.records.len() {
        return Err(Error::Plan(format!("record {last} out of range ({} records)", j.records.len())));
    }
    let mut conflicts = BTreeSet::new();
    for skipped in (first..=last).filter(|i| !indices.contains(i)) {
        let skipped_files = touched(&j.records[skipped]);
        for &s in indices {
            conflicts.extend(touched(&j.records[s]).intersection(&skipped_files).map(|f| f.to_string()));
        }
    }
    if !conflicts.is_empty() {
        return Err(Error::NonCommuting {
            files: conflicts.into_iter().collect(),
        });
    }

    let selected: Vec<&PassRecord> = indices.iter().map(|&i| &j.records[i]).collect();
    let mut delta = FileDelta::new();
    for r in &selected {
        for (p, v) in &r.delta {
            delta.insert(p.clone(), v.clone());
        }
    }
    let snapshots = j.replay();
    let before = if first == 0 { j.base.clone() } else { snapshots[first - 1].clone() };
    let after = apply_delta(&before, &delta);
    let mut report = selected[0].report.clone();
    for r in &selected[1..] {
        report.merge(r.report.clone());
    }
    let squashed = PassRecord {
        name: format!("squash:{}", selected.iter().map(|r| r.name.as_str()).collect::<Vec<_>>().join("+")),
        kind: if selected.len() == 1 {
            selected[0].kind.clone()
        } else {
            "squash".to_string()
        },
        plan_index: selected[0].plan_index,
        input_id: before.id().to_string(),
        output_id: after.id().to_string(),
        report,
        verdict: combine_verdicts(&selected),
        diff: diff_snapshots(&before, &after, &NormalizerChain::empty()),
        delta,
    };

    let mut records = Vec::with_capacity(j.records.len() + 1 - indices.len());
    for (i, r) in j.records.iter().enumerate() {
        if i == first {
            records.push(squashed.clone());
        } else if !indices.contains(&i) {
            records.push(r.clone());
        }
    }
    let mut out = j.clone();
    out.set_records(records);
    debug_assert_eq!(out.final_snapshot().id(), j.final_snapshot().id());
    Ok(out)
}

/// `None` if any constituent was unchecked; otherwise the concatenation of
/// the residuals.
fn combine_verdicts(records: &[&PassRecord]) -> Option<EquivalenceVerdict> {
    let verdicts: Vec<&EquivalenceVerdict> = records.iter().map(|r| r.verdict.as_ref()).collect::<Option<_>>()?;
    let mut residual = DiffResidual::default();
    let mut notes = Vec::new();
    for v in &verdicts {
        for e in &v.residual.entries {
            residual.push(e.clone());
        }
        notes.extend(v.notes.iter().cloned());
    }
    let first = verdicts[0];
    let mut combined = first.clone();
    combined.residual = residual;
    combined.notes = notes;
    combined.ir_based = verdicts.iter().all(|v| v.ir_based);
    combined.status = if verdicts.iter().all(|v| v.is_equivalent()) {
        crate::equiv::VerdictStatus::Equivalent
    } else {
        crate::equiv::VerdictStatus::NotEquivalent
    };
    Some(combined)
}
