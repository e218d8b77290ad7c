//! Equivalence checks under normalizer chains: seeded identifiers, `./`
//! path prefixes, and blank lines.
//!
//! cargo run --example normalize_equivalence

use std::path::PathBuf;

use micropass::equiv::compare_expansions;
use micropass::{check_equivalence, expand, load_tree, NormalizerChain, NormalizerKind, Snapshot, Strategy};

fn main() -> micropass::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/minicjdns");
    let snap = load_tree(&dir, &[] as &[&str])?.snapshot;
    let e0 = expand(&snap, Strategy::TwoPhase, "0")?;
    let e1 = expand(&snap, Strategy::TwoPhase, "1")?;
    let plain = compare_expansions(&e0, &e1, &NormalizerChain::empty());
    println!(
        "seed 0 vs 1, no normalizers: {:?} ({} residual lines)",
        plain.status,
        plain.residual.changed_lines
    );
    let masked = compare_expansions(&e0, &e1, &NormalizerChain::of(&[NormalizerKind::SeededIds])?);
    println!("seed 0 vs 1, seeded-ids:     {:?}", masked.status);

    let a = Snapshot::from_files([("build.sh", "cc -c ./path/to/file.c\n\nld file.o\n")])?;
    let b = Snapshot::from_files([("build.sh", "cc -c path/to/file.c\nld file.o\n")])?;
    for kinds in [
        &[][..],
        &[NormalizerKind::DotSlashPaths][..],
        &[NormalizerKind::DotSlashPaths, NormalizerKind::BlankLines][..],
    ] {
        let chain = NormalizerChain::of(kinds)?;
        let v = check_equivalence(&a, &b, &chain, false, "0")?;
        println!("raw check with [{}]: {:?}", chain.id(), v.status);
    }
    Ok(())
}
