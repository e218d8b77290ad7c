//! Converge two diverged branches with per-branch plans, then merge them.
//!
//! cargo run --example converge_dualioc

use std::path::PathBuf;

use micropass::converge::{run_convergence, three_way_merge};
use micropass::passes::PipelinePlan;
use micropass::{load_tree, NormalizerChain};

fn main() -> micropass::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let load = |p: &str| load_tree(&root.join(p), &[] as &[&str]).map(|t| t.snapshot);
    let (base, a, b) = (load("dualioc/base")?, load("dualioc/a")?, load("dualioc/b")?);
    let plan_a = PipelinePlan::load(&root.join("plans/dualioc-a.json"))?;
    let plan_b = PipelinePlan::load(&root.join("plans/dualioc-b.json"))?;

    let conv = run_convergence(&a, &b, &plan_a, &plan_b, &NormalizerChain::empty(), "0")?;
    let report = &conv.report;
    println!("initial distance {}", report.initial_distance);
    for s in &report.steps {
        println!("  {:?} {:<26} {}", s.branch, s.pass, s.distance);
    }
    println!("final distance {} (monotone: {})", report.final_distance, report.is_monotone());

    let naive = three_way_merge(&base, &a, &b);
    println!("merging the original branches: {} conflict(s)", naive.conflicts.len());
    let merged = three_way_merge(&base, conv.final_a(), conv.final_b());
    println!("merging the converged branches: {} conflict(s), {} files", merged.conflicts.len(), merged.snapshot.len());
    Ok(())
}
