use std::collections::BTreeSet;

use super::{apply_pass_in, CheckPolicy, Pass, PassEnv, PassParams, PipelinePlan};
use crate::depgraph::DependencyGraph;
use crate::equiv::{compare_expansions, expand_side, EquivalenceVerdict, NormalizerChain};
use crate::error::Result;
use crate::macrolang::{constant_value, parse_macros, resolve_includes, walk_units, Directive, ExpandOptions, Expansion, Strategy};
use crate::snapshot::{delta_between, diff_snapshots, FailureRecord, Journal, PassRecord, Snapshot};
use crate::textops::{is_word_byte, replace_words, rewrite_rule_references};

/// Runs `plan` with its own seed (or `"0"`).
pub fn run_pipeline(snap: &Snapshot, plan: &PipelinePlan) -> Result<Journal> {
    let seed = plan.seed.clone().unwrap_or_else(|| "0".to_string());
    run_pipeline_with(snap, plan, &seed)
}

/// Applies the passes of `plan` in order, checking each one according to its
/// policy. Stops at the first pass that errors or fails its check; the
/// journal then holds the completed records and a failure record.
///
/// Only an invalid plan is reported as `Err`.
pub fn run_pipeline_with(snap: &Snapshot, plan: &PipelinePlan, seed: &str) -> Result<Journal> {
    plan.validate()?;
    let env = PassEnv {
        seed: seed.to_string(),
        ..plan.env()
    };
    let mut journal = Journal::new(snap.clone(), seed.to_string(), plan.digest(), plan.normalizers.id());
    let mut current = snap.clone();
    let mut current_ir: Option<Expansion> = None;
    for (index, pass) in plan.passes.iter().enumerate() {
        let fail = |error: String, report, verdict| FailureRecord {
            name: pass.name.clone(),
            kind: pass.kind().to_string(),
            plan_index: index,
            input_id: current.id().to_string(),
            error,
            report,
            verdict,
        };
        let (out, report) = match apply_pass_in(&current, pass, &env) {
            Ok(r) => r,
            Err(e) => {
                journal.fail(fail(e.to_string(), None, None));
                return Ok(journal);
            }
        };
        let opts = ExpandOptions::new(Strategy::TwoPhase, seed).with_marker(pass_marker(pass, &env));
        let checked = match pass.check {
            CheckPolicy::Skip => Ok((None, None)),
            CheckPolicy::NormalizedEqual => Ok((
                Some(EquivalenceVerdict::from_residual(
                    diff_snapshots(&current, &out, &plan.normalizers),
                    &plan.normalizers,
                    false,
                    Vec::new(),
                )),
                None,
            )),
            CheckPolicy::IrEqual => ir_check(&current, current_ir.take(), &out, pass, &env, &opts, &plan.normalizers)
                .map(|(v, after)| (Some(v), Some(after))),
        };
        let (verdict, after_ir) = match checked {
            Ok(v) => v,
            Err(e) => {
                journal.fail(fail(e.to_string(), Some(report), None));
                return Ok(journal);
            }
        };
        if let Some(v) = &verdict {
            if !v.is_equivalent() {
                let msg = format!(
                    "{} check failed: {} residual line(s) in {} file(s)",
                    if v.ir_based { "ir-equal" } else { "normalized-equal" },
                    v.residual.changed_lines,
                    v.residual.entries.len()
                );
                journal.fail(fail(msg, Some(report), verdict.clone()));
                return Ok(journal);
            }
        }
        // The expansion can be reused only when the next pass expands with
        // the same include marker.
        current_ir = after_ir.filter(|_| pass_marker(pass, &env) == env.include_marker);
        let record = PassRecord {
            name: pass.name.clone(),
            kind: pass.kind().to_string(),
            plan_index: index,
            input_id: current.id().to_string(),
            output_id: out.id().to_string(),
            report,
            verdict,
            diff: diff_snapshots(&current, &out, &NormalizerChain::empty()),
            delta: delta_between(&current, &out),
        };
        journal.push(record, out.clone());
        current = out;
    }
    Ok(journal)
}

fn pass_marker<'a>(pass: &'a Pass, env: &'a PassEnv) -> &'a str {
    match &pass.params {
        PassParams::Outline(p) | PassParams::Inline(p) => p.marker.as_deref().unwrap_or(&env.include_marker),
        _ => &env.include_marker,
    }
}

fn ir_check(
    before: &Snapshot,
    cached: Option<Expansion>,
    after: &Snapshot,
    pass: &Pass,
    env: &PassEnv,
    opts: &ExpandOptions,
    chain: &NormalizerChain,
) -> Result<(EquivalenceVerdict, Expansion)> {
    let before_ir = match cached.filter(|_| opts.include_marker == env.include_marker) {
        Some(e) => e,
        None => expand_side(before, opts, "before")?,
    };
    let after_ir = expand_side(after, opts, "after")?;
    let expected = project(&before_ir, before, after, pass, env, opts)?;
    Ok((compare_expansions(&expected, &after_ir, chain), after_ir))
}

/// The expansion a pass is expected to produce, derived from the expansion
/// of its input. Passes that move or delete files, or rename identifiers,
/// map the IR accordingly; all others must leave it unchanged.
pub(crate) fn project(ir: &Expansion, before: &Snapshot, after: &Snapshot, pass: &Pass, env: &PassEnv, opts: &ExpandOptions) -> Result<Expansion> {
    match &pass.params {
        PassParams::Rename(p) => {
            let mut edit = Snapshot::empty().edit();
            for (path, bytes) in ir.ir.iter() {
                let source = path.strip_suffix(".i").unwrap_or(path);
                match std::str::from_utf8(bytes) {
                    Ok(text) if pass.scope.matches(source) => edit.insert(path, replace_words(text, &p.old, &p.new))?,
                    _ => edit.insert(path, bytes)?,
                }
            }
            let graph = map_edge_targets(&ir.graph, |from, to| {
                if pass.scope.matches(from) {
                    replace_words(to, &p.old, &p.new)
                } else {
                    to.to_string()
                }
            });
            Ok(Expansion {
                ir: edit.finish(),
                graph,
                passthrough: ir.passthrough.clone(),
            })
        }
        PassParams::Relocate(p) => {
            let moves = p.moves.file_moves(before)?;
            let view = resolve_includes(before, &opts.include_marker)?;
            let mut edit = Snapshot::empty().edit();
            for (path, bytes) in ir.ir.iter() {
                let source = path.strip_suffix(".i").unwrap_or(path);
                let target = moves.get(source).map_or_else(|| path.to_string(), |m| format!("{m}.i"));
                let Ok(text) = std::str::from_utf8(bytes) else {
                    edit.insert(target, bytes)?;
                    continue;
                };
                let mut text = if pass.scope.matches(source) {
                    rewrite_rule_references(text, &moves, &env.rules)
                } else {
                    text.to_string()
                };
                if let (Some(to), Some(src)) = (moves.get(source), view.files.get(source)) {
                    text = remap_constants(&text, src, source, to, &opts.seed)?;
                }
                edit.insert(target, text)?;
            }
            let graph = ir.graph.map_nodes(|n| moves.get(n).cloned().unwrap_or_else(|| n.to_string()));
            Ok(Expansion {
                ir: edit.finish(),
                graph: refile(graph, after),
                passthrough: ir.passthrough.iter().map(|p| moves.get(p).cloned().unwrap_or_else(|| p.clone())).collect(),
            })
        }
        PassParams::EliminateDead(_) => {
            let removed: BTreeSet<String> = before.paths().filter(|p| !after.contains(p)).map(str::to_string).collect();
            let mut edit = ir.ir.edit();
            for p in &removed {
                edit.remove(&format!("{p}.i"));
            }
            Ok(Expansion {
                ir: edit.finish(),
                graph: refile(ir.graph.without_nodes(&removed), after),
                passthrough: ir.passthrough.iter().filter(|p| !removed.contains(*p)).cloned().collect(),
            })
        }
        PassParams::Outline(_)
        | PassParams::Inline(_)
        | PassParams::Redelimit
        | PassParams::Unnest
        | PassParams::CustomRewrite(_) => Ok(ir.clone()),
    }
}

fn refile(mut g: DependencyGraph, snap: &Snapshot) -> DependencyGraph {
    g.mark_files(snap);
    g
}

fn map_edge_targets(g: &DependencyGraph, f: impl Fn(&str, &str) -> String) -> DependencyGraph {
    let mut out = DependencyGraph::new();
    let connected: BTreeSet<&str> = g.edges().flat_map(|e| [e.from.as_str(), e.to.as_str()]).collect();
    for n in g.nodes().filter(|n| g.is_file(n) || !connected.contains(n)) {
        out.add_node(n);
    }
    for e in g.edges() {
        out.add_edge(&e.from, &f(&e.from, &e.to), e.provenance);
    }
    out.set_files(g.nodes().filter(|n| g.is_file(n)));
    out
}

/// Seeded identifiers depend on the file path; rewrites those of a moved
/// file to the values they take at the new path.
fn remap_constants(ir_text: &str, source: &[u8], from: &str, to: &str, seed: &str) -> Result<String> {
    let Ok(src) = std::str::from_utf8(source) else {
        return Ok(ir_text.to_string());
    };
    let segments = parse_macros(from, src)?;
    let mut names = BTreeSet::new();
    walk_units(&segments, |u| {
        for d in u.directives() {
            if let Directive::Constant(n) = &d.directive {
                names.insert(n.clone());
            }
        }
    });
    let mut text = ir_text.to_string();
    for n in names {
        let old = constant_value(seed, from, &n);
        let new = constant_value(seed, to, &n);
        text = replace_token(&text, &old, &new);
    }
    Ok(text)
}

fn replace_token(text: &str, old: &str, new: &str) -> String {
    if old.bytes().all(is_word_byte) {
        replace_words(text, old, new)
    } else {
        text.replace(old, new)
    }
}
