//! Run the bundled six-pass plan over the minicjdns corpus and print the
//! verdict for every pass. With an output directory, also write the journal.
//!
//! cargo run --example pipeline_minicjdns [OUT_DIR]

use std::path::{Path, PathBuf};

use micropass::passes::{run_pipeline, PipelinePlan};
use micropass::load_tree;

fn main() -> micropass::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let snap = load_tree(&root.join("minicjdns"), &[] as &[&str])?.snapshot;
    let plan = PipelinePlan::load(&root.join("plans/minicjdns.json"))?;
    let journal = run_pipeline(&snap, &plan)?;

    println!("seed {} plan {}", journal.seed, journal.plan_digest);
    for r in &journal.records {
        let verdict = match &r.verdict {
            Some(v) if v.is_equivalent() => "equivalent".to_string(),
            Some(v) => format!("NOT equivalent ({} residual lines)", v.residual.changed_lines),
            None => "unchecked".to_string(),
        };
        println!("{:<22} {:<15} {:>3} edit(s)  {verdict}", r.name, r.kind, r.report.edits.len());
    }
    if let Some(f) = &journal.failure {
        println!("halted: {f:?}");
    }
    let fin = journal.final_snapshot();
    println!("final tree: {} files, id {}", fin.len(), fin.id());

    if let Some(out) = std::env::args().nth(1) {
        journal.write(Path::new(&out))?;
        println!("journal written to {out}");
    }
    Ok(())
}
