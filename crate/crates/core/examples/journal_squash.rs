//! Build a small journal, squash two of its records, and undo a pass with
//! its inverse.
//!
//! cargo run --example journal_squash

use std::collections::BTreeSet;

use micropass::passes::{apply_pass, invert_pass, journal_squash, run_pipeline, Pass, PassParams, PipelinePlan, RenameParams};
use micropass::Snapshot;

fn rename(name: &str, old: &str, new: &str) -> micropass::Result<Pass> {
    Pass::new(
        name,
        PassParams::Rename(RenameParams {
            old: old.into(),
            new: new.into(),
            force: false,
        }),
    )
}

fn main() -> micropass::Result<()> {
    let snap = Snapshot::from_files([
        ("log.h", "void Log_debug(const char *msg);\n"),
        ("main.c", "#include \"log.h\"\nint main(void) { Log_debug(\"up\"); return 0; }\n"),
        ("util.c", "static int counter;\n"),
    ])?;
    let plan = PipelinePlan::new(vec![
        rename("debug-to-trace", "Log_debug", "Log_trace")?,
        rename("counter-to-ticks", "counter", "ticks")?,
        rename("trace-to-verbose", "Log_trace", "Log_verbose")?,
    ])?;
    let journal = run_pipeline(&snap, &plan)?;
    for r in &journal.records {
        println!("{:<40} {} -> {}", r.name, &r.input_id[..12], &r.output_id[..12]);
    }

    let squashed = journal_squash(&journal, &BTreeSet::from([0, 2]))?;
    println!("after squashing records 1 and 3:");
    for r in &squashed.records {
        println!("{:<40} {} -> {}", r.name, &r.input_id[..12], &r.output_id[..12]);
    }
    println!(
        "final id unchanged: {}",
        squashed.final_snapshot().id() == journal.final_snapshot().id()
    );
    match journal_squash(&journal, &BTreeSet::from([0, 1, 2])) {
        Ok(j) => println!("all three squash into {} record", j.records.len()),
        Err(e) => println!("refused: {e}"),
    }

    let forward = &plan.passes[1];
    let (renamed, _) = apply_pass(&snap, forward)?;
    let (restored, _) = apply_pass(&renamed, &invert_pass(forward)?)?;
    println!("{} then its inverse is the identity: {}", forward.name, restored == snap);
    Ok(())
}
