//! Build the dependency graph of the minicjdns corpus, list dead files, find
//! the roots of an obsolete subgraph, and delete the dead files.
//!
//! cargo run --example dead_code

use std::collections::BTreeSet;
use std::path::PathBuf;

use micropass::depgraph::{eliminate_dead, obsolete_roots};
use micropass::{build_graph, dead_closure, load_tree, DependencyGraph, RefRule, Scope};

fn main() -> micropass::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/minicjdns");
    let snap = load_tree(&dir, &[] as &[&str])?.snapshot;
    let rules = vec![RefRule::path_ref(r"(?m)^SRC \+= (\S+)$")?];
    let g = build_graph(&snap, &rules, true, "//@include ")?;
    println!("{} nodes, {} edges", g.nodes().count(), g.edges().count());

    let roots: BTreeSet<String> = ["main.c", "Makefile", "README.md"].iter().map(|s| s.to_string()).collect();
    let live = dead_closure(&g, &roots)?;
    println!("dead: {:?}", live.dead);

    let removal = BTreeSet::from(["legacy/OldCrypto.c".to_string()]);
    println!("obsolete roots above {:?}: {:?}", removal, obsolete_roots(&g, &roots, &removal)?);

    // The same question on a small hand-made graph: `p` is the only caller of
    // `s`, and nothing live reaches `p`.
    let small = DependencyGraph::from_edges(["main", "x", "p", "s"], [("main", "x"), ("p", "s")]);
    let r = obsolete_roots(&small, &BTreeSet::from(["main".to_string()]), &BTreeSet::from(["s".to_string()]))?;
    println!("small graph: obsolete roots {r:?}");

    let (after, report) = eliminate_dead(&snap, &g, &roots, &Scope::all())?;
    println!("removed {} file(s); {} -> {} files", report.count("removed"), snap.len(), after.len());
    Ok(())
}
