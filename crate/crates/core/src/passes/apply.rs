use std::collections::BTreeSet;

use regex::Regex;

use super::{CustomRewriteParams, Pass, PassParams};
use crate::depgraph::{build_graph, eliminate_dead};
use crate::error::{Error, Result};
use crate::macrolang::{restructure_macros, RestructureMode, DEFAULT_INCLUDE_MARKER};
use crate::report::PassReport;
use crate::rules::RefRule;
use crate::scope::Scope;
use crate::snapshot::{diff_bytes, LineTag, Snapshot};
use crate::textops::{inline_fragment, outline_fragment, relocate, rename_identifier};

/// Plan-wide settings a pass may need.
#[derive(Clone, Debug, PartialEq)]
pub struct PassEnv {
    pub rules: Vec<RefRule>,
    pub include_marker: String,
    pub seed: String,
}

impl Default for PassEnv {
    fn default() -> Self {
        PassEnv {
            rules: Vec::new(),
            include_marker: DEFAULT_INCLUDE_MARKER.to_string(),
            seed: "0".to_string(),
        }
    }
}

/// Applies `pass` with default settings (no reference rules, default
/// include marker).
pub fn apply_pass(snap: &Snapshot, pass: &Pass) -> Result<(Snapshot, PassReport)> {
    apply_pass_in(snap, pass, &PassEnv::default())
}

pub fn apply_pass_in(snap: &Snapshot, pass: &Pass, env: &PassEnv) -> Result<(Snapshot, PassReport)> {
    pass.validate()?;
    let scope = &pass.scope;
    match &pass.params {
        PassParams::Rename(p) => {
            let out = rename_identifier(snap, &p.old, &p.new, scope, p.force)?;
            Ok((out.snapshot, out.report))
        }
        PassParams::Relocate(p) => relocate(snap, &p.moves, &env.rules, scope, &env.include_marker),
        PassParams::Outline(p) => {
            let marker = p.marker.as_deref().unwrap_or(&env.include_marker);
            outline_fragment(snap, p.block.as_bytes(), &p.shared_path, marker, scope)
        }
        PassParams::Inline(p) => {
            let marker = p.marker.as_deref().unwrap_or(&env.include_marker);
            inline_fragment(snap, p.block.as_bytes(), &p.shared_path, marker, scope)
        }
        PassParams::Redelimit => restructure_macros(snap, RestructureMode::Redelimit, scope),
        PassParams::Unnest => restructure_macros(snap, RestructureMode::Unnest, scope),
        PassParams::EliminateDead(p) => {
            let g = build_graph(snap, &env.rules, p.include_links, &env.include_marker)?;
            let roots: BTreeSet<String> = p.roots.iter().cloned().collect();
            eliminate_dead(snap, &g, &roots, scope)
        }
        PassParams::CustomRewrite(p) => custom_rewrite(snap, p, scope),
    }
}

enum Compiled<'a> {
    Literal(&'a str),
    Regex(Regex),
}

/// Applies ordered substitution rules; each must match exactly `expect`
/// times across the files in scope.
fn custom_rewrite(snap: &Snapshot, params: &CustomRewriteParams, scope: &Scope) -> Result<(Snapshot, PassReport)> {
    let mut report = PassReport::new();
    if params.rules.is_empty() {
        return Ok((snap.clone(), report.finish()));
    }
    let mut files: Vec<(String, String)> = snap
        .iter_scoped(scope)
        .filter_map(|(p, b)| std::str::from_utf8(b).ok().map(|t| (p.to_string(), t.to_string())))
        .collect();
    for (i, rule) in params.rules.iter().enumerate() {
        let compiled = if rule.regex {
            Compiled::Regex(Regex::new(&rule.find)?)
        } else {
            Compiled::Literal(&rule.find)
        };
        let mut found = 0;
        for (_, text) in files.iter_mut() {
            let (n, next) = match &compiled {
                Compiled::Literal(lit) => (text.matches(lit).count(), text.replace(lit, &rule.replace)),
                Compiled::Regex(re) => (re.find_iter(text).count(), re.replace_all(text, rule.replace.as_str()).into_owned()),
            };
            found += n;
            *text = next;
        }
        if found != rule.expect {
            return Err(Error::Audit(format!(
                "rule {} ({:?}): expected {} match(es), found {found}",
                i + 1,
                rule.find,
                rule.expect
            )));
        }
        report.add_count("matches", found);
    }
    let mut edit = snap.edit();
    for (path, text) in files {
        let before = snap.get(&path).expect("scoped path exists");
        if before == text.as_bytes() {
            continue;
        }
        record_line_edits(&mut report, &path, before, text.as_bytes());
        edit.insert(path, text)?;
    }
    Ok((edit.finish(), report.finish()))
}

/// Adds one edit per changed line, pairing removed and added lines within
/// each hunk.
pub(crate) fn record_line_edits(report: &mut PassReport, path: &str, before: &[u8], after: &[u8]) {
    for h in diff_bytes(before, after) {
        let mut line = h.old_start.max(1);
        let mut removed: Vec<(usize, String)> = Vec::new();
        let mut added: Vec<String> = Vec::new();
        let mut flush = |removed: &mut Vec<(usize, String)>, added: &mut Vec<String>, at: usize| {
            let n = removed.len().max(added.len());
            for k in 0..n {
                let (l, b) = removed.get(k).cloned().unwrap_or((at, String::new()));
                let a = added.get(k).cloned().unwrap_or_default();
                report.edit(path, l, b, a);
            }
            removed.clear();
            added.clear();
        };
        for dl in &h.lines {
            let text = dl.text.trim_end_matches('\n').to_string();
            match dl.tag {
                LineTag::Context => {
                    flush(&mut removed, &mut added, line);
                    line += 1;
                }
                LineTag::Removed => {
                    removed.push((line, text));
                    line += 1;
                }
                LineTag::Added => added.push(text),
            }
        }
        flush(&mut removed, &mut added, line);
    }
}
