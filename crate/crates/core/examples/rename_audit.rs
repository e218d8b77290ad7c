//! Audit an identifier, rename it with word boundaries, and show the
//! before/after counts and the near misses the audit reports.
//!
//! cargo run --example rename_audit [OLD] [NEW]

use std::path::PathBuf;

use micropass::textops::{audit_matches, rename_identifier, MatchPattern};
use micropass::{load_tree, Scope};

fn main() -> micropass::Result<()> {
    let mut args = std::env::args().skip(1);
    let old = args.next().unwrap_or_else(|| "XSPRESS3".to_string());
    let new = args.next().unwrap_or_else(|| "ADXSPRESS3".to_string());
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/dualioc/base");
    let snap = load_tree(&dir, &[] as &[&str])?.snapshot;

    let before = audit_matches(&snap, &MatchPattern::word(&old)?, &Scope::all());
    println!("{} before: {} match(es)", before.pattern, before.count);
    for s in &before.sites {
        println!("  {}:{}:{}  {}", s.path, s.line, s.column, s.text.trim_end());
    }
    println!("near misses (not renamed): {}", before.near_misses.len());
    for s in before.near_misses.iter().take(5) {
        println!("  {}:{}:{}  {}", s.path, s.line, s.column, s.text.trim_end());
    }

    let out = rename_identifier(&snap, &old, &new, &Scope::all(), false)?;
    let old_after = audit_matches(&out.snapshot, &MatchPattern::word(&old)?, &Scope::all());
    let new_after = audit_matches(&out.snapshot, &MatchPattern::word(&new)?, &Scope::all());
    println!("after: {old} x{}, {new} x{}", old_after.count, new_after.count);
    for w in &out.report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
