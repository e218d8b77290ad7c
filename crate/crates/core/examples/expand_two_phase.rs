//! Expand a tree with both strategies and compare the results. On trees
//! without shared-state macros the two must agree byte for byte.
//!
//! cargo run --example expand_two_phase [DIR] [SEED]

use std::path::PathBuf;

use micropass::macrolang::{classify_unit, parse_macros, walk_units, MacroClass};
use micropass::{expand, load_tree, Strategy};

fn main() -> micropass::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/minicjdns"));
    let seed = args.next().unwrap_or_else(|| "0".to_string());
    let snap = load_tree(&dir, &[] as &[&str])?.snapshot;

    let (mut pure, mut dependency, mut unsafe_) = (0, 0, 0);
    for (path, text) in snap.iter().filter_map(|(p, b)| std::str::from_utf8(b).ok().map(|t| (p, t))) {
        let segments = parse_macros(path, text)?;
        walk_units(&segments, |u| match classify_unit(u) {
            MacroClass::Pure => pure += 1,
            MacroClass::Dependency => dependency += 1,
            MacroClass::Unsafe => unsafe_ += 1,
        });
    }
    println!("units: {pure} pure, {dependency} dependency, {unsafe_} unsafe");

    let two = expand(&snap, Strategy::TwoPhase, &seed)?;
    let mono = expand(&snap, Strategy::Monolithic, &seed)?;
    println!("two-phase IR id  {}", two.ir.id());
    println!("monolithic IR id {}", mono.ir.id());
    println!("graphs equal: {}", two.graph == mono.graph);
    print!("{}", two.graph.to_text());
    if let Some(ir) = two.ir.get_str("main.c.i") {
        println!("--- main.c.i\n{ir}");
    }
    Ok(())
}
