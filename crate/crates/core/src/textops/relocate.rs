use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::macrolang::{parse_macros, quote, walk_units, Directive};
use crate::report::PassReport;
use crate::rules::RefRule;
use crate::scope::Scope;
use crate::snapshot::{validate_rel_path, Snapshot};

/// Moves requested by a relocation pass. Keys and values are either file
/// paths or directory prefixes (without trailing slash).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelocationMap {
    moves: BTreeMap<String, String>,
}

impl RelocationMap {
    pub fn new<I, A, B>(moves: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut map = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for (from, to) in moves {
            let (from, to) = (from.into(), to.into());
            validate_rel_path(&from)?;
            validate_rel_path(&to)?;
            if from == to {
                return Err(Error::Audit(format!("relocation of {from} onto itself")));
            }
            if !targets.insert(to.clone()) {
                return Err(Error::Audit(format!("relocation map is not injective: two sources move to {to}")));
            }
            if map.insert(from.clone(), to).is_some() {
                return Err(Error::Audit(format!("{from} is relocated twice")));
            }
        }
        Ok(RelocationMap { moves: map })
    }

    pub fn moves(&self) -> &BTreeMap<String, String> {
        &self.moves
    }

    pub fn inverse(&self) -> Self {
        RelocationMap {
            moves: self.moves.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// Resolves directory moves against `snap` into a file-level map.
    pub fn file_moves(&self, snap: &Snapshot) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        for (from, to) in &self.moves {
            if snap.contains(from) {
                out.insert(from.clone(), to.clone());
                continue;
            }
            let prefix = format!("{from}/");
            let dest_prefix = format!("{to}/");
            let under: Vec<&str> = snap.paths().filter(|p| p.starts_with(&prefix)).collect();
            if under.is_empty() {
                return Err(Error::Audit(format!("nothing to relocate at {from}")));
            }
            if let Some(p) = snap.paths().find(|p| p.starts_with(&dest_prefix) || *p == to) {
                return Err(Error::Audit(format!("destination directory {to} already exists ({p})")));
            }
            for p in under {
                out.insert(p.to_string(), format!("{dest_prefix}{}", &p[prefix.len()..]));
            }
        }
        let mut seen = BTreeSet::new();
        for to in out.values() {
            if !seen.insert(to.as_str()) {
                return Err(Error::Audit(format!("relocation map is not injective at {to}")));
            }
        }
        let mut finals: BTreeSet<&str> = snap.paths().filter(|p| !out.contains_key(*p)).collect();
        for to in out.values() {
            if !finals.insert(to) {
                return Err(Error::Audit(format!("relocation target {to} already exists")));
            }
        }
        for p in &finals {
            let dir = format!("{p}/");
            if let Some(q) = finals.range::<&str, _>(dir.as_str()..).next().filter(|q| q.starts_with(&dir)) {
                return Err(Error::Audit(format!("relocation makes {p} both a file and a directory ({q})")));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Reference {
    pub range: Range<usize>,
    pub target: String,
    pub quoted: bool,
}

/// References in one file: `link` arguments, include-marker targets and
/// rule captures. Overlapping references keep the first one found.
pub(crate) fn references(path: &str, text: &str, rules: &[RefRule], marker: Option<&str>) -> Result<Vec<Reference>> {
    let mut refs = Vec::new();
    if text.contains("<?js") || text.contains("<$js") {
        let segments = parse_macros(path, text)?;
        walk_units(&segments, |u| {
            for d in u.directives() {
                if let (Directive::Link(target), Some(span)) = (&d.directive, &d.string_span) {
                    refs.push(Reference {
                        range: span.clone(),
                        target: target.clone(),
                        quoted: true,
                    });
                }
            }
        });
    }
    if let Some(marker) = marker {
        let mut pos = 0;
        for line in text.split_inclusive('\n') {
            let body = line.strip_suffix('\n').unwrap_or(line);
            if let Some(rest) = body.strip_prefix(marker) {
                let lead = rest.len() - rest.trim_start().len();
                let target = rest.trim();
                if !target.is_empty() {
                    let start = pos + marker.len() + lead;
                    refs.push(Reference {
                        range: start..start + target.len(),
                        target: target.to_string(),
                        quoted: false,
                    });
                }
            }
            pos += line.len();
        }
    }
    push_rule_refs(&mut refs, text, rules);
    Ok(dedup(refs))
}

fn push_rule_refs(refs: &mut Vec<Reference>, text: &str, rules: &[RefRule]) {
    for rule in rules {
        for (range, target) in rule.references(text) {
            refs.push(Reference {
                range,
                target: target.to_string(),
                quoted: false,
            });
        }
    }
}

fn dedup(mut refs: Vec<Reference>) -> Vec<Reference> {
    refs.sort_by_key(|r| (r.range.start, r.range.end));
    let mut out: Vec<Reference> = Vec::with_capacity(refs.len());
    for r in refs {
        if out.last().is_none_or(|l| l.range.end <= r.range.start) {
            out.push(r);
        }
    }
    out
}

/// Rewrites references whose target is exactly a key of `moves`.
pub(crate) fn rewrite_text(text: &str, refs: &[Reference], moves: &BTreeMap<String, String>) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    let mut n = 0;
    for r in refs {
        let Some(to) = moves.get(&r.target) else { continue };
        out.push_str(&text[pos..r.range.start]);
        if r.quoted {
            out.push_str(&quote(to));
        } else {
            out.push_str(to);
        }
        pos = r.range.end;
        n += 1;
    }
    out.push_str(&text[pos..]);
    (out, n)
}

/// Rewrites rule-captured references in already expanded text.
pub fn rewrite_rule_references(text: &str, moves: &BTreeMap<String, String>, rules: &[RefRule]) -> String {
    let mut refs = Vec::new();
    push_rule_refs(&mut refs, text, rules);
    rewrite_text(text, &dedup(refs), moves).0
}

fn is_partial_match(target: &str, moved: &str) -> bool {
    if target == moved {
        return false;
    }
    let stripped = target.trim_start_matches("./");
    stripped == moved || target.ends_with(&format!("/{moved}")) || moved.ends_with(&format!("/{target}"))
}

fn line_at(text: &str, pos: usize) -> (usize, &str) {
    let start = text[..pos].rfind('\n').map_or(0, |i| i + 1);
    let end = text[pos..].find('\n').map_or(text.len(), |i| pos + i);
    (text[..pos].matches('\n').count() + 1, &text[start..end])
}

/// Moves files or directories and rewrites every exact reference to a moved
/// file in the files selected by `scope`.
///
/// References that resemble a moved path without matching it exactly are
/// reported, never rewritten. The pass refuses to run when some reference
/// already names a destination path, since the move could not be undone.
pub fn relocate(snap: &Snapshot, map: &RelocationMap, rules: &[RefRule], scope: &Scope, include_marker: &str) -> Result<(Snapshot, PassReport)> {
    let moves = map.file_moves(snap)?;
    let dests: BTreeSet<&str> = moves.values().map(String::as_str).filter(|d| !moves.contains_key(*d)).collect();
    let mut report = PassReport::new();
    let mut rewritten: BTreeMap<String, String> = BTreeMap::new();
    let mut total = 0;
    for (path, bytes) in snap.iter() {
        let Ok(text) = std::str::from_utf8(bytes) else { continue };
        let refs = references(path, text, rules, Some(include_marker))?;
        for r in &refs {
            if dests.contains(r.target.as_str()) {
                let (line, _) = line_at(text, r.range.start);
                return Err(Error::Audit(format!(
                    "{path}:{line} already refers to relocation target {}",
                    r.target
                )));
            }
        }
        let in_scope = scope.matches(path);
        for r in &refs {
            let (line, _) = line_at(text, r.range.start);
            if let Some(m) = moves.keys().find(|m| is_partial_match(&r.target, m)) {
                report.warn(format!("{path}:{line}: partial match {:?} for moved {m}, not rewritten", r.target));
            } else if !in_scope && moves.contains_key(&r.target) {
                report.warn(format!("{path}:{line}: reference to moved {} is out of scope", r.target));
            }
        }
        if !in_scope {
            continue;
        }
        let (new_text, n) = rewrite_text(text, &refs, &moves);
        if n > 0 {
            for r in refs.iter().filter(|r| moves.contains_key(&r.target)) {
                let (line, before) = line_at(text, r.range.start);
                let to = &moves[&r.target];
                report.edit(path, line, before, before.replacen(&r.target, to, 1));
            }
            total += n;
            rewritten.insert(path.to_string(), new_text);
        }
    }
    let mut edit = snap.edit();
    for (path, text) in rewritten {
        edit.insert(path, text)?;
    }
    let mut contents = Vec::new();
    for from in moves.keys() {
        contents.push((from.clone(), edit.remove(from).expect("moved file exists")));
    }
    for (from, bytes) in contents {
        let to = &moves[&from];
        report.edit(&from, 0, from.clone(), to.clone());
        edit.insert(to.clone(), bytes)?;
    }
    let out = edit.finish();
    report.add_count("files-moved", moves.len());
    report.add_count("references-rewritten", total);

    for (path, bytes) in out.iter_scoped(scope) {
        let Ok(text) = std::str::from_utf8(bytes) else { continue };
        for r in references(path, text, rules, Some(include_marker))? {
            let was_moved_target = moves.values().any(|t| *t == r.target);
            if (was_moved_target || moves.contains_key(&r.target))
                && !out.contains(&r.target) {
                    let (line, _) = line_at(text, r.range.start);
                    report.warn(format!("{path}:{line}: dangling reference {}", r.target));
                }
        }
    }
    Ok((out, report.finish()))
}
