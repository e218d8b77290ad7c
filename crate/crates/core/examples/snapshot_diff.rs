//! Load a tree, edit a copy in memory, and print the unified diff with and
//! without whitespace normalization.
//!
//! cargo run --example snapshot_diff [DIR]

use std::path::PathBuf;

use micropass::{diff_snapshots, load_tree, NormalizerChain, NormalizerKind};

fn main() -> micropass::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/minicjdns"));
    let loaded = load_tree(&dir, &[] as &[&str])?;
    let before = loaded.snapshot;
    println!("{} files, id {}", before.len(), before.id());

    let mut edit = before.edit();
    let main_c = before.get_str("main.c").unwrap_or_default().replace("int main", "int  main");
    edit.insert("main.c", main_c)?;
    edit.insert("NOTES", "added in the copy\n")?;
    let after = edit.finish();

    let raw = diff_snapshots(&before, &after, &NormalizerChain::empty());
    println!("raw: {} file(s), {} changed line(s)", raw.entries.len(), raw.changed_lines);
    print!("{}", raw.to_patch(false));

    let chain = NormalizerChain::of(&[NormalizerKind::SpaceRuns])?;
    let normalized = diff_snapshots(&before, &after, &chain);
    println!("with {}: {} file(s), {} changed line(s)", chain.id(), normalized.entries.len(), normalized.changed_lines);
    Ok(())
}
