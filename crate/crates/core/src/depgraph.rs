//! Dependency graphs over files, liveness, and obsolete-subgraph roots.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::macrolang::{self, parse_macros};
use crate::report::PassReport;
use crate::rules::RefRule;
use crate::scope::Scope;
use crate::snapshot::Snapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    LinkDirective,
    PatternRule,
    IncludeMarker,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::LinkDirective => "link-directive",
            Provenance::PatternRule => "pattern-rule",
            Provenance::IncludeMarker => "include-marker",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    nodes: BTreeSet<String>,
    edges: BTreeSet<Edge>,
    /// Nodes that exist as files in the snapshot the graph was built from.
    files: BTreeSet<String>,
    declared_roots: BTreeSet<String>,
}

impl DependencyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from bare `(from, to)` pairs; every node counts as a file.
    pub fn from_edges<'a>(nodes: impl IntoIterator<Item = &'a str>, edges: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut g = Self::new();
        for n in nodes {
            g.add_node(n);
        }
        for (a, b) in edges {
            g.add_edge(a, b, Provenance::LinkDirective);
        }
        g.files = g.nodes.clone();
        g
    }

    pub fn add_node(&mut self, node: &str) {
        self.nodes.insert(node.to_string());
    }

    pub fn add_edge(&mut self, from: &str, to: &str, provenance: Provenance) {
        self.add_node(from);
        self.add_node(to);
        self.edges.insert(Edge {
            from: from.to_string(),
            to: to.to_string(),
            provenance,
        });
    }

    pub fn declare_root(&mut self, node: &str) {
        self.declared_roots.insert(node.to_string());
    }

    pub(crate) fn mark_files(&mut self, snap: &Snapshot) {
        self.files = self.nodes.iter().filter(|n| snap.contains(n)).cloned().collect();
    }

    pub(crate) fn set_files<'a>(&mut self, files: impl IntoIterator<Item = &'a str>) {
        self.files = files.into_iter().map(str::to_string).collect();
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn declared_roots(&self) -> &BTreeSet<String> {
        &self.declared_roots
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.contains(node)
    }

    pub fn is_file(&self, node: &str) -> bool {
        self.files.contains(node)
    }

    /// Edges whose target is not a file.
    pub fn dangling(&self) -> Vec<&Edge> {
        self.edges.iter().filter(|e| !self.files.contains(&e.to)).collect()
    }

    fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut m: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            m.entry(e.from.as_str()).or_default().push(e.to.as_str());
        }
        m
    }

    fn predecessors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut m: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            m.entry(e.to.as_str()).or_default().push(e.from.as_str());
        }
        m
    }

    /// Graph with `removed` nodes and every edge touching them dropped.
    pub fn without_nodes(&self, removed: &BTreeSet<String>) -> Self {
        let mut g = Self::new();
        for n in self.nodes.iter().filter(|n| !removed.contains(*n)) {
            if self.files.contains(n) || self.edges.iter().any(|e| (&e.from == n || &e.to == n) && !removed.contains(&e.from) && !removed.contains(&e.to)) {
                g.add_node(n);
            }
        }
        for e in self.edges.iter().filter(|e| !removed.contains(&e.from) && !removed.contains(&e.to)) {
            g.add_edge(&e.from, &e.to, e.provenance);
        }
        g.files = self.files.iter().filter(|f| !removed.contains(*f)).cloned().collect();
        g.declared_roots = self.declared_roots.iter().filter(|r| !removed.contains(*r)).cloned().collect();
        g
    }

    /// Graph with every node name passed through `f`.
    pub fn map_nodes(&self, f: impl Fn(&str) -> String) -> Self {
        let mut g = Self::new();
        for n in &self.nodes {
            g.add_node(&f(n));
        }
        for e in &self.edges {
            g.add_edge(&f(&e.from), &f(&e.to), e.provenance);
        }
        g.files = self.files.iter().map(|n| f(n)).collect();
        g.declared_roots = self.declared_roots.iter().map(|n| f(n)).collect();
        g
    }

    /// One `from -> to [provenance]` line per edge, followed by a
    /// `node` line for each node without edges; sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(out, "{} -> {} [{}]", e.from, e.to, e.provenance.as_str());
        }
        let connected: BTreeSet<&str> = self.edges.iter().flat_map(|e| [e.from.as_str(), e.to.as_str()]).collect();
        for n in self.nodes.iter().filter(|n| !connected.contains(n.as_str())) {
            let _ = writeln!(out, "{n}");
        }
        out
    }

    /// Graphviz digraph; dangling targets are drawn dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependencies {\n");
        for n in &self.nodes {
            let style = if self.files.contains(n) { "" } else { " [style=dashed]" };
            let _ = writeln!(out, "  {n:?}{style};");
        }
        for e in &self.edges {
            let _ = writeln!(out, "  {:?} -> {:?} [label={:?}];", e.from, e.to, e.provenance.as_str());
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the dependency graph of `snap`: include-marker edges, link edges
/// from dependency units (when `include_links`), and edges for every
/// reference captured by `rules`.
pub fn build_graph(snap: &Snapshot, rules: &[RefRule], include_links: bool, include_marker: &str) -> Result<DependencyGraph> {
    let view = macrolang::resolve_includes(snap, include_marker)?;
    let mut g = DependencyGraph::new();
    for p in snap.paths() {
        g.add_node(p);
    }
    for (from, to) in &view.includes {
        g.add_edge(from, to, Provenance::IncludeMarker);
    }
    if include_links {
        for (path, bytes) in &view.files {
            let Ok(text) = std::str::from_utf8(bytes) else { continue };
            let segments = parse_macros(path, text)?;
            for l in macrolang::dependency_links(path, text, &segments)? {
                g.add_edge(path, &l, Provenance::LinkDirective);
            }
        }
    }
    for (path, bytes) in snap.iter() {
        let Ok(text) = std::str::from_utf8(bytes) else { continue };
        for rule in rules {
            for (_, target) in rule.references(text) {
                g.add_edge(path, target, Provenance::PatternRule);
            }
        }
    }
    g.mark_files(snap);
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LivenessReport {
    pub live: BTreeSet<String>,
    pub dead: BTreeSet<String>,
    pub dangling: Vec<Edge>,
}

fn check_known(g: &DependencyGraph, nodes: &BTreeSet<String>, what: &str) -> Result<()> {
    let unknown: Vec<&str> = nodes.iter().filter(|n| !g.contains(n)).map(String::as_str).collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::Graph(format!("unknown {what}: {}", unknown.join(", "))))
    }
}

fn forward_closure<'a>(succ: &BTreeMap<&'a str, Vec<&'a str>>, start: impl IntoIterator<Item = &'a str>) -> BTreeSet<&'a str> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for s in start {
        if seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(n) = queue.pop_front() {
        for m in succ.get(n).into_iter().flatten() {
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    seen
}

/// Splits the graph's nodes into those reachable from `roots` and the rest.
pub fn dead_closure(g: &DependencyGraph, roots: &BTreeSet<String>) -> Result<LivenessReport> {
    check_known(g, roots, "root")?;
    let succ = g.successors();
    let live: BTreeSet<String> = forward_closure(&succ, roots.iter().map(String::as_str))
        .into_iter()
        .map(str::to_string)
        .collect();
    let dead = g.nodes.iter().filter(|n| !live.contains(*n)).cloned().collect();
    Ok(LivenessReport {
        live,
        dead,
        dangling: g.dangling().into_iter().cloned().collect(),
    })
}

/// Every node with a directed path into `removal`, plus `removal` itself.
pub fn reverse_closure(g: &DependencyGraph, removal: &BTreeSet<String>) -> BTreeSet<String> {
    let pred = g.predecessors();
    let closure: BTreeSet<String> = forward_closure(&pred, removal.iter().map(String::as_str))
        .into_iter()
        .map(str::to_string)
        .collect();
    assert!(
        g.edges.iter().all(|e| !closure.contains(&e.to) || closure.contains(&e.from)),
        "reverse closure has an in-edge from outside itself"
    );
    closure
}

fn path_between(g: &DependencyGraph, from: &str, targets: &BTreeSet<String>) -> Vec<String> {
    let succ = g.successors();
    let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(n) = queue.pop_front() {
        if targets.contains(n) {
            let mut path = vec![n.to_string()];
            let mut cur = n;
            while let Some(p) = parent.get(cur) {
                path.push(p.to_string());
                cur = p;
            }
            path.reverse();
            return path;
        }
        for m in succ.get(n).into_iter().flatten() {
            if seen.insert(m) {
                parent.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    Vec::new()
}

/// Finds the roots of the obsolete subgraph above `removal`: one node per
/// source component of its reverse closure (the node itself when it has no
/// in-edges, otherwise the smallest member of a cycle nothing else reaches).
/// Deleting everything they reach removes `removal` without leaving dangling
/// references.
pub fn obsolete_roots(g: &DependencyGraph, roots: &BTreeSet<String>, removal: &BTreeSet<String>) -> Result<BTreeSet<String>> {
    check_known(g, removal, "removal node")?;
    let t = reverse_closure(g, removal);
    if let Some(root) = roots.iter().find(|r| t.contains(*r)) {
        let path = path_between(g, root, removal);
        return Err(Error::Graph(format!(
            "live root depends on removal set: {root} (via {})",
            path.join(" -> ")
        )));
    }
    let succ = g.successors();
    let pred = g.predecessors();
    let mut out = BTreeSet::new();
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    for n in &t {
        if covered.contains(n.as_str()) {
            continue;
        }
        let ancestors = forward_closure(&pred, [n.as_str()]);
        let descendants = forward_closure(&succ, [n.as_str()]);
        if ancestors.is_subset(&descendants) {
            out.insert(n.clone());
            covered.extend(ancestors);
        }
    }
    Ok(out)
}

/// Removes every dead file in `scope` from `snap`. Refuses when a surviving
/// node would be left referencing a removed file.
pub fn eliminate_dead(snap: &Snapshot, g: &DependencyGraph, roots: &BTreeSet<String>, scope: &Scope) -> Result<(Snapshot, PassReport)> {
    let liveness = dead_closure(g, roots)?;
    let removed: BTreeSet<String> = liveness
        .dead
        .iter()
        .filter(|n| snap.contains(n) && scope.matches(n))
        .cloned()
        .collect();
    let new_dangling: Vec<String> = g
        .edges
        .iter()
        .filter(|e| removed.contains(&e.to) && !removed.contains(&e.from))
        .map(|e| format!("{} -> {}", e.from, e.to))
        .collect();
    if !new_dangling.is_empty() {
        return Err(Error::Graph(format!(
            "deletion would leave dangling references: {}",
            new_dangling.join(", ")
        )));
    }
    let mut report = PassReport::new();
    let mut edit = snap.edit();
    for p in &removed {
        edit.remove(p);
        report.edit(p, 0, "<file>", "");
    }
    report.add_count("removed", removed.len());
    for e in g.dangling() {
        report.warn(format!("dangling reference {} -> {}", e.from, e.to));
    }
    Ok((edit.finish(), report.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn chain() -> DependencyGraph {
        DependencyGraph::from_edges(["a", "b", "c"], [("a", "b"), ("b", "c")])
    }

    #[test]
    fn chain_from_head_is_all_live() {
        let r = dead_closure(&chain(), &set(&["a"])).unwrap();
        assert!(r.dead.is_empty());
    }

    #[test]
    fn chain_from_middle() {
        let r = dead_closure(&chain(), &set(&["b"])).unwrap();
        assert_eq!(r.dead, set(&["a"]));
        assert_eq!(r.live, set(&["b", "c"]));
    }

    #[test]
    fn unknown_root_is_error() {
        assert!(dead_closure(&chain(), &set(&["zz"])).is_err());
    }

    #[test]
    fn obsolete_root_pattern() {
        let g = DependencyGraph::from_edges(["main", "x", "p", "s"], [("main", "x"), ("p", "s")]);
        assert_eq!(reverse_closure(&g, &set(&["s"])), set(&["p", "s"]));
        assert_eq!(obsolete_roots(&g, &set(&["main"]), &set(&["s"])).unwrap(), set(&["p"]));
    }

    #[test]
    fn removal_reached_from_live_root_is_error() {
        let g = DependencyGraph::from_edges(["main", "x", "s"], [("main", "x"), ("x", "s")]);
        let err = obsolete_roots(&g, &set(&["main"]), &set(&["s"])).unwrap_err();
        assert!(err.to_string().contains("main -> x -> s"), "{err}");
    }

    #[test]
    fn removal_without_in_edges_is_its_own_root() {
        let g = DependencyGraph::from_edges(["main", "s", "t"], [("s", "t")]);
        assert_eq!(obsolete_roots(&g, &set(&["main"]), &set(&["s"])).unwrap(), set(&["s"]));
    }

    #[test]
    fn cycle_inside_removal_closure() {
        let g = DependencyGraph::from_edges(["main", "p", "q", "s"], [("p", "q"), ("q", "p"), ("q", "s")]);
        let r = obsolete_roots(&g, &set(&["main"]), &set(&["s"])).unwrap();
        assert_eq!(r, set(&["p"]));
        assert_eq!(reverse_closure(&g, &set(&["s"])), set(&["p", "q", "s"]));
    }

    #[test]
    fn build_graph_links_rules_and_dangling() {
        let snap = Snapshot::from_files([
            ("a.c", "<$js link \"b.h\" $>\n#include \"c.h\"\n#include \"ghost.h\"\n"),
            ("b.h", ""),
            ("c.h", ""),
        ])
        .unwrap();
        let rule = RefRule::path_ref(r#"#include "([^"]+)""#).unwrap();
        let g = build_graph(&snap, &[rule], true, macrolang::DEFAULT_INCLUDE_MARKER).unwrap();
        assert_eq!(
            g.to_text(),
            "a.c -> b.h [link-directive]\na.c -> c.h [pattern-rule]\na.c -> ghost.h [pattern-rule]\n"
        );
        let d: Vec<_> = g.dangling().iter().map(|e| e.to.clone()).collect();
        assert_eq!(d, ["ghost.h"]);
    }

    #[test]
    fn build_graph_without_links() {
        let snap = Snapshot::from_files([("a.c", "<$js link \"b.h\" $>"), ("b.h", "")]).unwrap();
        let g = build_graph(&snap, &[], false, macrolang::DEFAULT_INCLUDE_MARKER).unwrap();
        assert_eq!(g.edges().count(), 0);
        assert_eq!(g.nodes().collect::<Vec<_>>(), ["a.c", "b.h"]);
    }

    #[test]
    fn eliminate_dead_removes_only_dead_files() {
        let snap = Snapshot::from_files([("main.c", "m"), ("used.h", "u"), ("orphan.c", "o")]).unwrap();
        let g = DependencyGraph::from_edges(["main.c", "used.h", "orphan.c"], [("main.c", "used.h")]);
        let (out, rep) = eliminate_dead(&snap, &g, &set(&["main.c"]), &Scope::all()).unwrap();
        assert_eq!(out.paths().collect::<Vec<_>>(), ["main.c", "used.h"]);
        assert_eq!(rep.count("removed"), 1);
    }

    #[test]
    fn eliminate_dead_respects_scope_and_refuses_new_dangling() {
        let snap = Snapshot::from_files([("main.c", ""), ("Makefile", ""), ("old.c", "")]).unwrap();
        let g = DependencyGraph::from_edges(["main.c", "Makefile", "old.c"], [("Makefile", "old.c")]);
        let scope = Scope::new(&["**/*.c"]).unwrap();
        assert!(eliminate_dead(&snap, &g, &set(&["main.c"]), &scope).is_err());
        let g2 = DependencyGraph::from_edges(["main.c", "Makefile", "old.c"], []);
        let (out, _) = eliminate_dead(&snap, &g2, &set(&["main.c"]), &scope).unwrap();
        assert_eq!(out.paths().collect::<Vec<_>>(), ["Makefile", "main.c"]);
    }

    #[test]
    fn dot_output_is_stable() {
        let g = DependencyGraph::from_edges(["a", "b"], [("a", "b")]);
        assert_eq!(
            g.to_dot(),
            "digraph dependencies {\n  \"a\";\n  \"b\";\n  \"a\" -> \"b\" [label=\"link-directive\"];\n}\n"
        );
    }
}
