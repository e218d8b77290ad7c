//! Command-line front end.
//!
//! Exit codes: 0 success or equivalent, 1 not equivalent or pipeline halted,
//! 2 usage or I/O error.

use std::collections::{BTreeSet, HashMap};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::converge::{run_convergence, three_way_merge};
use crate::depgraph::{build_graph, dead_closure, obsolete_roots};
use crate::equiv::{check_equivalence, NormalizerChain, NormalizerKind};
use crate::error::{Error, Result};
use crate::macrolang::{expand_with, ExpandOptions, Strategy, DEFAULT_INCLUDE_MARKER};
use crate::passes::{run_pipeline_with, PipelinePlan};
use crate::snapshot::{load_tree, write_tree, Snapshot, DEFAULT_IGNORE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFFERENT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "micropass", version, about = "Audited, reversible refactoring passes over source trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the content-addressed manifest of a tree.
    Snap {
        dir: PathBuf,
        /// Write the manifest here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a pipeline plan and write the journal and resulting tree.
    Run {
        dir: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        seed: Option<String>,
        /// Receives `journal/` and `tree/`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two trees; exit 0 when equivalent, 1 when not.
    Check {
        a: PathBuf,
        b: PathBuf,
        /// Compare macro expansions instead of raw files.
        #[arg(long)]
        ir: bool,
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        norm: NormFlags,
        /// List removed files by header only in the printed patch.
        #[arg(long)]
        hide_deleted: bool,
        /// Also write `verdict.json` and `residual.patch` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand macros and write the IR tree plus dependency graph.
    Expand {
        dir: PathBuf,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Use the legacy shared-state expander.
        #[arg(long)]
        monolithic: bool,
        /// Also write `graph.dot`.
        #[arg(long)]
        dot: bool,
        #[arg(long, default_value = DEFAULT_INCLUDE_MARKER)]
        include_marker: String,
    },
    /// Print the dependency graph of a tree.
    Graph {
        dir: PathBuf,
        /// Take reference rules and include marker from this plan.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        dot: bool,
        /// Leave out edges from `link` directives.
        #[arg(long)]
        no_links: bool,
    },
    /// Report dead files and the obsolete roots of a removal set.
    Deadcode {
        dir: PathBuf,
        #[arg(long = "root", required = true)]
        roots: Vec<String>,
        /// Files to be removed; their obsolete roots are reported.
        #[arg(long = "remove")]
        remove: Vec<String>,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Converge two variants and merge them.
    #[command(subcommand)]
    Converge(ConvergeCommand),
    /// Summarize a journal written by `run`.
    Report { journal: PathBuf },
}

#[derive(Subcommand, Debug)]
enum ConvergeCommand {
    Run(ConvergeArgs),
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    plan_a: PathBuf,
    #[arg(long)]
    plan_b: PathBuf,
    #[arg(long, default_value_t = 0)]
    merge_threshold: usize,
    #[arg(long)]
    seed: Option<String>,
    #[command(flatten)]
    norm: NormFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct NormFlags {
    #[arg(long)]
    ignore_space_change: bool,
    #[arg(long)]
    ignore_blank_lines: bool,
    #[arg(long)]
    canon_paths: bool,
    #[arg(long)]
    mask_seeded_ids: bool,
}

impl NormFlags {
    fn chain(&self) -> Result<NormalizerChain> {
        let mut kinds = Vec::new();
        let flags = [
            (self.ignore_space_change, NormalizerKind::SpaceRuns),
            (self.ignore_blank_lines, NormalizerKind::BlankLines),
            (self.canon_paths, NormalizerKind::DotSlashPaths),
            (self.mask_seeded_ids, NormalizerKind::SeededIds),
        ];
        for (on, kind) in flags {
            if on {
                kinds.push(kind);
            }
        }
        NormalizerChain::of(&kinds)
    }
}

/// `--seed`, then `SOURCE_DATE_EPOCH`, then the plan's seed, then `"0"`.
pub fn resolve_seed(flag: Option<&str>, env: &HashMap<String, String>, plan_seed: Option<&str>) -> String {
    flag.map(str::to_string)
        .or_else(|| env.get("SOURCE_DATE_EPOCH").filter(|s| !s.is_empty()).cloned())
        .or_else(|| plan_seed.map(str::to_string))
        .unwrap_or_else(|| "0".to_string())
}

/// Runs the command line `argv` (program name first), printing to the
/// process's standard streams.
pub fn run_cli<I, T>(argv: I, env: &HashMap<String, String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, env, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, T>(argv: I, env: &HashMap<String, String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, env, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn load(dir: &Path, err: &mut dyn Write) -> Result<Snapshot> {
    let tree = load_tree(dir, DEFAULT_IGNORE)?;
    for s in &tree.skipped {
        let _ = writeln!(err, "warning: skipped {s}");
    }
    Ok(tree.snapshot)
}

fn write_file(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn dispatch(cmd: Command, env: &HashMap<String, String>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match cmd {
        Command::Snap { dir, out: dest } => {
            let snap = load(&dir, err)?;
            let text = to_json(&snap.manifest());
            match dest {
                Some(p) => write_file(&p, text)?,
                None => out.write_all(text.as_bytes()).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Run { dir, plan, seed, out: dest } => {
            let plan = PipelinePlan::load(&plan)?;
            let snap = load(&dir, err)?;
            let seed = resolve_seed(seed.as_deref(), env, plan.seed.as_deref());
            let _ = writeln!(err, "seed={seed} plan={}", plan.digest());
            let journal = run_pipeline_with(&snap, &plan, &seed)?;
            journal.write(&dest.join("journal"))?;
            write_tree(journal.final_snapshot(), &dest.join("tree"), true)?;
            for r in &journal.records {
                let _ = writeln!(err, "ok   {} ({}) {} edit(s)", r.name, r.kind, r.report.edits.len());
            }
            match &journal.failure {
                Some(f) => {
                    let _ = writeln!(err, "FAIL {} ({}): {}", f.name, f.kind, f.error);
                    Ok(EXIT_DIFFERENT)
                }
                None => Ok(EXIT_OK),
            }
        }
        Command::Check {
            a,
            b,
            ir,
            seed,
            norm,
            hide_deleted,
            out: dest,
        } => {
            let chain = norm.chain()?;
            let seed = resolve_seed(seed.as_deref(), env, None);
            let (sa, sb) = (load(&a, err)?, load(&b, err)?);
            let verdict = check_equivalence(&sa, &sb, &chain, ir, &seed)?;
            let patch = verdict.residual.to_patch(hide_deleted);
            out.write_all(patch.as_bytes()).map_err(io)?;
            let _ = writeln!(
                err,
                "seed={seed} normalizers={} {}: {} changed line(s) in {} file(s)",
                verdict.chain_used,
                if verdict.is_equivalent() { "equivalent" } else { "not-equivalent" },
                verdict.residual.changed_lines,
                verdict.residual.entries.len()
            );
            if let Some(d) = dest {
                write_file(&d.join("verdict.json"), to_json(&verdict))?;
                write_file(&d.join("residual.patch"), patch)?;
            }
            Ok(if verdict.is_equivalent() { EXIT_OK } else { EXIT_DIFFERENT })
        }
        Command::Expand {
            dir,
            seed,
            out: dest,
            monolithic,
            dot,
            include_marker,
        } => {
            let snap = load(&dir, err)?;
            let seed = resolve_seed(seed.as_deref(), env, None);
            let strategy = if monolithic { Strategy::Monolithic } else { Strategy::TwoPhase };
            let exp = expand_with(&snap, &ExpandOptions::new(strategy, seed.as_str()).with_marker(include_marker))?;
            write_tree(&exp.ir, &dest.join("ir"), true)?;
            write_file(&dest.join("graph.txt"), exp.graph.to_text())?;
            if dot {
                write_file(&dest.join("graph.dot"), exp.graph.to_dot())?;
            }
            let _ = writeln!(err, "seed={seed} {} IR file(s)", exp.ir.len());
            Ok(EXIT_OK)
        }
        Command::Graph { dir, plan, dot, no_links } => {
            let plan = match plan {
                Some(p) => PipelinePlan::load(&p)?,
                None => PipelinePlan::default(),
            };
            let snap = load(&dir, err)?;
            let g = build_graph(&snap, &plan.rules, !no_links, &plan.include_marker)?;
            let text = if dot { g.to_dot() } else { g.to_text() };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Deadcode { dir, roots, remove, plan } => {
            let plan = match plan {
                Some(p) => PipelinePlan::load(&p)?,
                None => PipelinePlan::default(),
            };
            let snap = load(&dir, err)?;
            let g = build_graph(&snap, &plan.rules, true, &plan.include_marker)?;
            let roots: BTreeSet<String> = roots.into_iter().collect();
            let liveness = dead_closure(&g, &roots)?;
            let mut report = serde_json::json!({ "liveness": liveness });
            if !remove.is_empty() {
                let removal: BTreeSet<String> = remove.into_iter().collect();
                report["obsolete_roots"] = match obsolete_roots(&g, &roots, &removal) {
                    Ok(r) => serde_json::json!(r),
                    Err(e) => serde_json::json!({ "error": e.to_string() }),
                };
            }
            out.write_all(to_json(&report).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Converge(ConvergeCommand::Run(args)) => converge(args, env, out, err),
        Command::Report { journal } => {
            out.write_all(render_report(&journal)?.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

fn converge(args: ConvergeArgs, env: &HashMap<String, String>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let plan_a = PipelinePlan::load(&args.plan_a)?;
    let plan_b = PipelinePlan::load(&args.plan_b)?;
    let base = load(&args.base, err)?;
    let a = load(&args.a, err)?;
    let b = load(&args.b, err)?;
    let chain = args.norm.chain()?;
    let seed = resolve_seed(args.seed.as_deref(), env, plan_a.seed.as_deref());
    let _ = writeln!(err, "seed={seed} plan-a={} plan-b={}", plan_a.digest(), plan_b.digest());
    let conv = run_convergence(&a, &b, &plan_a, &plan_b, &chain, &seed)?;
    write_file(&args.out.join("convergence.json"), to_json(&conv.report))?;
    conv.journal_a.write(&args.out.join("journal-a"))?;
    conv.journal_b.write(&args.out.join("journal-b"))?;
    let r = &conv.report;
    let _ = writeln!(out, "initial distance {}", r.initial_distance);
    for s in &r.steps {
        let _ = writeln!(out, "{:?} {:<24} {}", s.branch, s.pass, s.distance);
    }
    let _ = writeln!(out, "final distance {}", r.final_distance);
    if let Some(h) = &r.halted {
        let _ = writeln!(err, "halted: {h}");
        return Ok(EXIT_DIFFERENT);
    }
    if r.final_distance > args.merge_threshold {
        let _ = writeln!(err, "distance {} above merge threshold {}; not merging", r.final_distance, args.merge_threshold);
        return Ok(EXIT_DIFFERENT);
    }
    let merged = three_way_merge(&base, conv.final_a(), conv.final_b());
    write_tree(&merged.snapshot, &args.out.join("merged"), true)?;
    write_file(&args.out.join("conflicts.json"), to_json(&merged.conflicts))?;
    let _ = writeln!(out, "merged with {} conflict(s)", merged.conflicts.len());
    Ok(if merged.conflicts.is_empty() { EXIT_OK } else { EXIT_DIFFERENT })
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Plain-text summary of a journal directory.
pub fn render_report(dir: &Path) -> Result<String> {
    use std::fmt::Write as _;
    let header = read_json(&dir.join("journal.json"))?;
    let field = |k: &str| header[k].as_str().unwrap_or("?").to_string();
    let mut s = String::new();
    let _ = writeln!(s, "seed {}  plan {}  normalizers {}", field("seed"), field("plan_digest"), field("normalizers"));
    let _ = writeln!(s, "base  {}", field("base_id"));
    let _ = writeln!(s, "final {}", field("final_id"));
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for sub in subdirs {
        let name = sub.file_name().unwrap_or_default().to_string_lossy().into_owned();
        if sub.join("report.json").exists() {
            let r = read_json(&sub.join("report.json"))?;
            let edits = r["report"]["edits"].as_array().map_or(0, Vec::len);
            let verdict = match &r["verdict"] {
                serde_json::Value::Null => "unchecked".to_string(),
                v => format!(
                    "{} ({} residual line(s))",
                    v["status"].as_str().unwrap_or("?"),
                    v["residual"]["changed_lines"]
                ),
            };
            let _ = writeln!(s, "{name:<32} {:<14} {edits:>5} edit(s)  {verdict}", r["kind"].as_str().unwrap_or("?"));
        } else if sub.join("failure.json").exists() {
            let f = read_json(&sub.join("failure.json"))?;
            let _ = writeln!(s, "{name:<32} FAILED: {}", f["error"].as_str().unwrap_or("?"));
        }
    }
    let halted = header["halted"].as_bool().unwrap_or(false);
    let _ = writeln!(s, "{} record(s){}", header["records"], if halted { ", halted" } else { "" });
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let argv = std::iter::once("micropass").chain(args.iter().copied());
        let code = run_cli_with(argv, &HashMap::new(), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn seed_resolution_order() {
        let env = HashMap::from([("SOURCE_DATE_EPOCH".to_string(), "1700000000".to_string())]);
        assert_eq!(resolve_seed(Some("7"), &env, Some("3")), "7");
        assert_eq!(resolve_seed(None, &env, Some("3")), "1700000000");
        assert_eq!(resolve_seed(None, &HashMap::new(), Some("3")), "3");
        assert_eq!(resolve_seed(None, &HashMap::new(), None), "0");
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (code, _, err) = run(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"), "{err}");
    }

    #[test]
    fn missing_plan_names_file() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let (code, _, err) = run(&["run", d, "--plan", "missing.json", "--out", d]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("missing.json"), "{err}");
    }

    #[test]
    fn check_same_dir_is_equivalent() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.c"), "<?js emit \"x\" ?>\n").unwrap();
        let d = dir.path().to_str().unwrap();
        assert_eq!(run(&["check", d, d]).0, EXIT_OK);
        assert_eq!(run(&["check", "--ir", d, d]).0, EXIT_OK);
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("converge"));
    }
}
