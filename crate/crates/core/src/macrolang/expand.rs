use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::parse::{line_col, parse_macros, Delimiter, Directive, Item, MacroUnit, Segment};
use super::{classify_unit, is_link_only, MacroClass, DEFAULT_INCLUDE_MARKER};
use crate::depgraph::{DependencyGraph, Provenance};
use crate::error::{Error, Result};
use crate::snapshot::Snapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    TwoPhase,
    Monolithic,
}

#[derive(Clone, Debug)]
pub struct ExpandOptions {
    pub strategy: Strategy,
    pub seed: String,
    pub include_marker: String,
}

impl ExpandOptions {
    pub fn new(strategy: Strategy, seed: impl Into<String>) -> Self {
        ExpandOptions {
            strategy,
            seed: seed.into(),
            include_marker: DEFAULT_INCLUDE_MARKER.to_string(),
        }
    }

    pub fn with_marker(mut self, marker: impl Into<String>) -> Self {
        self.include_marker = marker.into();
        self
    }
}

/// The IR tree (`p.i` for every source `p`) and the link graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub ir: Snapshot,
    pub graph: DependencyGraph,
    /// Sources that are not UTF-8 and were copied through unexpanded.
    pub passthrough: Vec<String>,
}

pub const FNV_OFFSET: u64 = 14695981039346656037;
pub const FNV_PRIME: u64 = 1099511628211;

pub fn fnv1a64(chunks: &[&[u8]]) -> u64 {
    let mut h = FNV_OFFSET;
    for chunk in chunks {
        for b in *chunk {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Value emitted by `constant name` in file `path`: `name_` followed by the
/// low 32 bits of FNV-1a-64(seed, 0, path, 0, name) as 8 hex digits.
pub fn constant_value(seed: &str, path: &str, name: &str) -> String {
    let h = fnv1a64(&[seed.as_bytes(), &[0], path.as_bytes(), &[0], name.as_bytes()]);
    format!("{name}_{:08x}", h & 0xffff_ffff)
}

/// Sources with include markers resolved.
#[derive(Clone, Debug, Default)]
pub struct SourceView {
    /// Every non-fragment file, with marker lines replaced by fragment text.
    pub files: BTreeMap<String, Vec<u8>>,
    /// Files referenced by at least one marker; they are not expanded on
    /// their own.
    pub fragments: BTreeSet<String>,
    /// `(including file, fragment)` pairs.
    pub includes: BTreeSet<(String, String)>,
    /// Marker lines whose target does not exist, as `(file, target)`.
    pub dangling: Vec<(String, String)>,
}

/// Replaces every line of the form `<marker><path>` whose `path` exists in
/// `snap` with that file's (recursively resolved) contents.
pub fn resolve_includes(snap: &Snapshot, marker: &str) -> Result<SourceView> {
    let mut view = SourceView::default();
    let mut resolved: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for (path, _) in snap.iter() {
        let mut stack = Vec::new();
        let bytes = resolve_file(snap, marker, path, &mut stack, &mut view)?;
        resolved.insert(path.to_string(), bytes);
    }
    for (path, bytes) in resolved {
        if !view.fragments.contains(&path) {
            view.files.insert(path, bytes);
        }
    }
    Ok(view)
}

fn resolve_file(
    snap: &Snapshot,
    marker: &str,
    path: &str,
    stack: &mut Vec<String>,
    view: &mut SourceView,
) -> Result<Vec<u8>> {
    let bytes = snap.get(path).expect("caller checks existence");
    let Ok(text) = std::str::from_utf8(bytes) else {
        return Ok(bytes.to_vec());
    };
    if !text.contains(marker) {
        return Ok(bytes.to_vec());
    }
    stack.push(path.to_string());
    let mut out = Vec::with_capacity(bytes.len());
    for line in text.split_inclusive('\n') {
        let body = line.strip_suffix('\n').unwrap_or(line);
        let target = body.strip_prefix(marker).map(str::trim);
        match target {
            Some(t) if snap.contains(t) => {
                if stack.iter().any(|s| s == t) {
                    return Err(Error::Expansion {
                        path: path.to_string(),
                        message: format!("include cycle through {t}"),
                    });
                }
                view.fragments.insert(t.to_string());
                view.includes.insert((path.to_string(), t.to_string()));
                out.extend(resolve_file(snap, marker, t, stack, view)?);
            }
            Some(t) => {
                view.dangling.push((path.to_string(), t.to_string()));
                out.extend_from_slice(line.as_bytes());
            }
            None => out.extend_from_slice(line.as_bytes()),
        }
    }
    stack.pop();
    Ok(out)
}

/// Expands every source in `snap` with the default include marker.
pub fn expand(snap: &Snapshot, strategy: Strategy, seed: &str) -> Result<Expansion> {
    expand_with(snap, &ExpandOptions::new(strategy, seed))
}

pub fn expand_with(snap: &Snapshot, opts: &ExpandOptions) -> Result<Expansion> {
    let view = resolve_includes(snap, &opts.include_marker)?;
    let mut parsed: Vec<(&str, &str, Vec<Segment>)> = Vec::new();
    let mut passthrough = Vec::new();
    let mut ir = Snapshot::empty().edit();
    for (path, bytes) in &view.files {
        match std::str::from_utf8(bytes) {
            Ok(text) => parsed.push((path, text, parse_macros(path, text)?)),
            Err(_) => {
                passthrough.push(path.clone());
                ir.insert(format!("{path}.i"), bytes)?;
            }
        }
    }

    let mut graph = DependencyGraph::new();
    for path in view.files.keys() {
        graph.add_node(path);
    }

    match opts.strategy {
        Strategy::Monolithic => {
            let mut globals = BTreeMap::new();
            for (path, text, segments) in &parsed {
                let mut ctx = FileCtx::new(path, text, &opts.seed, Some(&mut globals));
                let out = ctx.render(segments)?;
                for l in ctx.links {
                    graph.add_edge(path, &l, Provenance::LinkDirective);
                }
                ir.insert(format!("{path}.i"), out)?;
            }
        }
        Strategy::TwoPhase => {
            // Phase 1: dependency units only.
            for (path, text, segments) in &parsed {
                for l in dependency_links(path, text, segments)? {
                    graph.add_edge(path, &l, Provenance::LinkDirective);
                }
            }
            // Phase 2: isolated per-file expansion.
            for (path, text, segments) in &parsed {
                let mut ctx = FileCtx::new(path, text, &opts.seed, None);
                let out = ctx.render(segments)?;
                ir.insert(format!("{path}.i"), out)?;
            }
        }
    }
    graph.mark_files(snap);
    Ok(Expansion {
        ir: ir.finish(),
        graph,
        passthrough,
    })
}

fn unit_error(path: &str, text: &str, pos: usize, message: impl std::fmt::Display) -> Error {
    let (line, col) = line_col(text, pos);
    Error::Expansion {
        path: path.to_string(),
        message: format!("{line}:{col}: {message}"),
    }
}

/// Links declared by dependency-classified units, in document order.
pub fn dependency_links(path: &str, text: &str, segments: &[Segment]) -> Result<Vec<String>> {
    fn visit(path: &str, text: &str, unit: &MacroUnit, links: &mut Vec<String>) -> Result<()> {
        if unit.delimiter == Delimiter::Dependency && !is_link_only(unit) {
            return Err(unit_error(
                path,
                text,
                unit.span.start,
                "dependency unit may only contain `link` directives",
            ));
        }
        if classify_unit(unit) == MacroClass::Dependency {
            for d in unit.directives() {
                if let Directive::Link(t) = &d.directive {
                    links.push(t.clone());
                }
            }
        }
        for n in unit.nested() {
            visit(path, text, n, links)?;
        }
        Ok(())
    }
    let mut links = Vec::new();
    for s in segments {
        if let Segment::Unit(u) = s {
            visit(path, text, u, &mut links)?;
        }
    }
    Ok(links)
}

struct FileCtx<'a> {
    path: &'a str,
    text: &'a str,
    seed: &'a str,
    bindings: HashMap<String, String>,
    /// Shared builder state; `None` in two-phase mode.
    globals: Option<&'a mut BTreeMap<String, String>>,
    links: Vec<String>,
}

impl<'a> FileCtx<'a> {
    fn new(path: &'a str, text: &'a str, seed: &'a str, globals: Option<&'a mut BTreeMap<String, String>>) -> Self {
        FileCtx {
            path,
            text,
            seed,
            bindings: HashMap::new(),
            globals,
            links: Vec::new(),
        }
    }

    fn two_phase(&self) -> bool {
        self.globals.is_none()
    }

    fn render(&mut self, segments: &[Segment]) -> Result<String> {
        let mut out = String::with_capacity(self.text.len());
        for s in segments {
            match s {
                Segment::Literal(r) => out.push_str(&self.text[r.clone()]),
                Segment::Unit(u) => self.unit(u, &mut out)?,
            }
        }
        Ok(out)
    }

    fn unit(&mut self, unit: &MacroUnit, out: &mut String) -> Result<()> {
        if self.two_phase() && classify_unit(unit) == MacroClass::Dependency {
            // Evaluated in phase 1; contributes nothing to the IR.
            return Ok(());
        }
        for item in &unit.items {
            match item {
                Item::Nested(n) => self.unit(n, out)?,
                Item::Directive(d) => {
                    let pos = d.span.start;
                    match &d.directive {
                        Directive::Emit(s) => out.push_str(s),
                        Directive::Define(n, s) => {
                            self.bindings.insert(n.clone(), s.clone());
                        }
                        Directive::Use(n) => {
                            let global = self.globals.as_ref().and_then(|g| g.get(n));
                            match global.or_else(|| self.bindings.get(n)) {
                                Some(v) => out.push_str(v),
                                None => return Err(unit_error(self.path, self.text, pos, format!("`use {n}`: unbound name"))),
                            }
                        }
                        Directive::Constant(n) => {
                            let v = constant_value(self.seed, self.path, n);
                            out.push_str(&v);
                            self.bindings.insert(n.clone(), v);
                        }
                        Directive::Link(t) => {
                            if !self.two_phase() {
                                self.links.push(t.clone());
                            }
                        }
                        Directive::Global(n, s) => {
                            if let Some(g) = self.globals.as_deref_mut() {
                                g.insert(n.clone(), s.clone());
                            }
                        }
                        Directive::UseGlobal(n) => match self.globals.as_deref() {
                            None => {
                                return Err(unit_error(
                                    self.path,
                                    self.text,
                                    pos,
                                    format!("`useglobal {n}` is not available in two-phase expansion"),
                                ))
                            }
                            Some(g) => match g.get(n) {
                                Some(v) => out.push_str(v),
                                None => {
                                    return Err(unit_error(self.path, self.text, pos, format!("`useglobal {n}`: unbound name")))
                                }
                            },
                        },
                    }
                }
            }
        }
        Ok(())
    }
}
