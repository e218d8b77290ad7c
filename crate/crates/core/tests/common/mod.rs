//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use micropass::{load_tree, Snapshot};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn load_corpus(rel: &str) -> Snapshot {
    load_tree(&corpus_root().join(rel), &[] as &[&str]).expect("corpus loads").snapshot
}

pub fn plan_path(name: &str) -> PathBuf {
    corpus_root().join("plans").join(name)
}

const WORDS: &[&str] = &["alpha", "beta", "gamma", "x", "", "a b", "q\"uote", "tab\there"];
const NAMES: &[&str] = &["N", "ID", "TAG", "SALT"];

/// Random corpus using only `emit`, `define`, `use`, `constant` and `link`.
/// `link` directives live in link-only units, so no unit mixes links with
/// output and no dependency unit has children.
pub fn random_safe_corpus(rng: &mut impl Rng) -> Snapshot {
    let nfiles = rng.gen_range(5..=20);
    let paths: Vec<String> = (0..nfiles).map(|i| format!("d{}/f{i}.c", i % 3)).collect();
    let mut files = BTreeMap::new();
    for path in &paths {
        let mut text = String::new();
        let mut defined: Vec<&str> = Vec::new();
        for _ in 0..rng.gen_range(0..=5) {
            text.push_str(&format!("line {}\n", rng.gen_range(0..100)));
            text.push_str(&random_unit(rng, &paths, &mut defined, 0));
            text.push('\n');
        }
        text.push_str("end\n");
        files.insert(path.clone(), text);
    }
    Snapshot::from_files(files).unwrap()
}

fn random_unit(rng: &mut impl Rng, paths: &[String], defined: &mut Vec<&str>, depth: usize) -> String {
    // One directive kind drawn uniformly from the five safe ones decides the
    // unit's shape; link units hold links only.
    let kind = rng.gen_range(0..5);
    if kind == 4 {
        let open = if rng.gen_bool(0.5) { ("<?js", "?>") } else { ("<$js", "$>") };
        let n = rng.gen_range(1..=2);
        let links: Vec<String> = (0..n)
            .map(|_| {
                let target = if rng.gen_bool(0.9) { paths.choose(rng).unwrap().clone() } else { "missing.h".to_string() };
                format!("link \"{target}\"")
            })
            .collect();
        return format!("{} {} {}", open.0, links.join("; "), open.1);
    }
    let mut kinds = vec![kind];
    for _ in 0..rng.gen_range(0..3) {
        kinds.push(rng.gen_range(0..4));
    }
    // Items are generated in document order so `use` only sees earlier
    // definitions.
    let nest_at = (depth < 2 && rng.gen_bool(0.25)).then(|| rng.gen_range(0..=kinds.len()));
    let mut parts = Vec::new();
    for (i, k) in kinds.into_iter().enumerate() {
        if nest_at == Some(i) {
            parts.push(random_unit(rng, paths, defined, depth + 1));
        }
        parts.push(random_pure_directive(rng, k, defined));
    }
    if nest_at == Some(parts.len()) {
        parts.push(random_unit(rng, paths, defined, depth + 1));
    }
    format!("<?js {} ?>", parts.join("; "))
}

fn random_pure_directive(rng: &mut impl Rng, kind: usize, defined: &mut Vec<&str>) -> String {
    let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
    match kind {
        0 => format!("emit {}", quote(WORDS.choose(rng).unwrap())),
        1 => {
            let n = *NAMES.choose(rng).unwrap();
            defined.push(n);
            format!("define {n} {}", quote(WORDS.choose(rng).unwrap()))
        }
        2 => match defined.choose(rng) {
            Some(n) => format!("use {n}; emit \" \""),
            None => format!("emit {}", quote("unbound")),
        },
        _ => {
            let n = *NAMES.choose(rng).unwrap();
            defined.push(n);
            // A trailing separator keeps seeded ids at a word boundary.
            format!("constant {n}; emit \" \"")
        }
    }
}

/// Random directed graph with `n` nodes named `n0..`.
pub fn random_digraph(rng: &mut impl Rng, n: usize) -> (Vec<String>, Vec<(String, String)>) {
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let p = rng.gen_range(0.05..0.4);
    let mut edges = Vec::new();
    for a in &nodes {
        for b in &nodes {
            if rng.gen_bool(p) {
                edges.push((a.clone(), b.clone()));
            }
        }
    }
    (nodes, edges)
}

/// Nodes at the end of some walk from `roots`, found by enumerating every
/// simple path.
pub fn reachable_by_paths(edges: &[(String, String)], roots: &BTreeSet<String>) -> BTreeSet<String> {
    fn walk(at: &str, edges: &[(String, String)], path: &mut Vec<String>, seen: &mut BTreeSet<String>) {
        seen.insert(at.to_string());
        for (a, b) in edges {
            if a == at && !path.contains(b) {
                path.push(b.clone());
                walk(b, edges, path, seen);
                path.pop();
            }
        }
    }
    let mut seen = BTreeSet::new();
    for r in roots {
        walk(r, edges, &mut vec![r.clone()], &mut seen);
    }
    seen
}

/// Every node that has a path into `removal`, plus `removal`.
pub fn ancestors_by_paths(edges: &[(String, String)], removal: &BTreeSet<String>) -> BTreeSet<String> {
    let reversed: Vec<(String, String)> = edges.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    reachable_by_paths(&reversed, removal)
}

/// All smallest subsets of `t` whose forward closure covers `t`.
pub fn minimum_covers(edges: &[(String, String)], t: &BTreeSet<String>) -> Vec<BTreeSet<String>> {
    let items: Vec<&String> = t.iter().collect();
    let mut best: Vec<BTreeSet<String>> = Vec::new();
    let mut best_len = usize::MAX;
    for mask in 0u32..(1 << items.len()) {
        let subset: BTreeSet<String> = items.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| (*s).clone()).collect();
        if subset.len() > best_len {
            continue;
        }
        let reach = reachable_by_paths(edges, &subset);
        if t.is_subset(&reach) {
            if subset.len() < best_len {
                best_len = subset.len();
                best.clear();
            }
            best.push(subset);
        }
    }
    best
}

/// Byte offsets of `word` in `text` where neither neighbour is `[A-Za-z0-9_]`.
pub fn scan_word(text: &[u8], word: &[u8]) -> Vec<usize> {
    let is_word = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut out = Vec::new();
    if word.is_empty() || text.len() < word.len() {
        return out;
    }
    for i in 0..=text.len() - word.len() {
        if &text[i..i + word.len()] != word {
            continue;
        }
        let left_ok = i == 0 || !is_word(text[i - 1]);
        let right_ok = i + word.len() == text.len() || !is_word(text[i + word.len()]);
        if left_ok && right_ok {
            out.push(i);
        }
    }
    out
}

/// Added plus removed lines reported by the system `diff -u`.
pub fn diff_u_changed_lines(a: &[u8], b: &[u8]) -> usize {
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a"), dir.path().join("b"));
    std::fs::write(&pa, a).unwrap();
    std::fs::write(&pb, b).unwrap();
    let out = Command::new("diff").arg("-u").arg(&pa).arg(&pb).output().expect("diff runs");
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| (l.starts_with('+') && !l.starts_with("+++")) || (l.starts_with('-') && !l.starts_with("---")))
        .count()
}

/// Recursive byte comparison of two directories.
pub fn dirs_equal(a: &Path, b: &Path) -> bool {
    fn collect(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
        walkdir(root)
            .into_iter()
            .map(|p| (p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()))
            .collect()
    }
    fn walkdir(dir: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                out.extend(walkdir(&p));
            } else {
                out.push(p);
            }
        }
        out
    }
    collect(a) == collect(b)
}
