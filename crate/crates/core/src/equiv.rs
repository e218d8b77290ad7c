//! Normalizers and the equivalence harness.
//!
//! A [`NormalizerChain`] erases differences that do not matter for a given
//! comparison (whitespace, blank lines, `./` path prefixes, seeded
//! identifiers, order of selected lines). [`check_equivalence`] diffs two
//! trees, either raw or as expanded IR, after normalization and reports
//! whatever residue is left.

use std::borrow::Cow;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::macrolang::{expand_with, ExpandOptions, Expansion, Strategy};
use crate::scope::Scope;
use crate::snapshot::{diff_bytes, diff_snapshots, DiffResidual, FileDiff, FileStatus, Hunk, Snapshot};

/// Pseudo-path under which dependency-graph differences appear in a residual.
pub const GRAPH_ENTRY: &str = "@dependency-graph";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerKind {
    SpaceRuns,
    BlankLines,
    DotSlashPaths,
    SeededIds,
    SortLines,
}

impl NormalizerKind {
    pub const ALL: [NormalizerKind; 5] = [
        NormalizerKind::SpaceRuns,
        NormalizerKind::BlankLines,
        NormalizerKind::DotSlashPaths,
        NormalizerKind::SeededIds,
        NormalizerKind::SortLines,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NormalizerKind::SpaceRuns => "space-runs",
            NormalizerKind::BlankLines => "blank-lines",
            NormalizerKind::DotSlashPaths => "dot-slash-paths",
            NormalizerKind::SeededIds => "seeded-ids",
            NormalizerKind::SortLines => "sort-lines",
        }
    }
}

impl fmt::Display for NormalizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Plan-file form of a normalizer: either a bare kind name or an object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormalizerSpec {
    Kind(NormalizerKind),
    Full {
        kind: NormalizerKind,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        scope: Vec<String>,
        /// Line selection for `sort-lines`; identifier-name pattern for
        /// `seeded-ids`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pattern: Option<String>,
    },
}

#[derive(Clone, Debug)]
pub struct Normalizer {
    pub kind: NormalizerKind,
    scope: Scope,
    pattern: Option<String>,
    regex: Option<Regex>,
}

impl Normalizer {
    pub fn new(kind: NormalizerKind) -> Result<Self> {
        Self::with_options(kind, &[] as &[&str], None)
    }

    pub fn with_options<S: AsRef<str>>(kind: NormalizerKind, scope: &[S], pattern: Option<&str>) -> Result<Self> {
        let regex = match kind {
            NormalizerKind::SeededIds => {
                let name = pattern.unwrap_or("[A-Za-z_][A-Za-z0-9_]*");
                Some(Regex::new(&format!(r"\b({name})_[0-9a-f]{{8}}\b"))?)
            }
            NormalizerKind::SortLines => {
                let Some(p) = pattern else {
                    return Err(Error::Plan("sort-lines needs a line-selection pattern".into()));
                };
                Some(Regex::new(p)?)
            }
            _ => None,
        };
        Ok(Normalizer {
            kind,
            scope: Scope::new(scope)?,
            pattern: pattern.map(str::to_string),
            regex,
        })
    }

    pub fn from_spec(spec: &NormalizerSpec) -> Result<Self> {
        match spec {
            NormalizerSpec::Kind(k) => Self::new(*k),
            NormalizerSpec::Full { kind, scope, pattern } => Self::with_options(*kind, scope, pattern.as_deref()),
        }
    }

    pub fn spec(&self) -> NormalizerSpec {
        if self.scope.globs().is_empty() && self.pattern.is_none() {
            NormalizerSpec::Kind(self.kind)
        } else {
            NormalizerSpec::Full {
                kind: self.kind,
                scope: self.scope.globs().to_vec(),
                pattern: self.pattern.clone(),
            }
        }
    }

    pub fn applies_to(&self, path: &str) -> bool {
        self.scope.matches(path)
    }

    pub fn apply(&self, text: &str) -> String {
        match self.kind {
            NormalizerKind::SpaceRuns => space_runs(text),
            NormalizerKind::BlankLines => blank_lines(text),
            NormalizerKind::DotSlashPaths => dot_slash_paths(text),
            NormalizerKind::SeededIds => self
                .regex
                .as_ref()
                .expect("compiled in constructor")
                .replace_all(text, "${1}_########")
                .into_owned(),
            NormalizerKind::SortLines => sort_lines(text, self.regex.as_ref().expect("compiled in constructor")),
        }
    }
}

fn is_space(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\r' | '\x0b' | '\x0c')
}

/// Collapses runs of horizontal whitespace to one space and drops trailing
/// whitespace on every line.
fn space_runs(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let (body, nl) = match line.strip_suffix('\n') {
            Some(b) => (b, "\n"),
            None => (line, ""),
        };
        let mut in_run = false;
        let start = out.len();
        for c in body.chars() {
            if is_space(c) {
                if !in_run {
                    out.push(' ');
                }
                in_run = true;
            } else {
                out.push(c);
                in_run = false;
            }
        }
        let trimmed = out[start..].trim_end_matches(' ').len();
        out.truncate(start + trimmed);
        out.push_str(nl);
    }
    out
}

/// Drops lines that are empty or whitespace-only.
fn blank_lines(text: &str) -> String {
    text.split_inclusive('\n')
        .filter(|l| !l.chars().all(|c| c == '\n' || is_space(c)))
        .collect()
}

/// Strips `./` prefixes at the start of whitespace-delimited tokens and
/// quoted strings.
fn dot_slash_paths(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at_token_start = true;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if at_token_start && rest.starts_with("./") {
            rest = &rest[2..];
            continue;
        }
        out.push(c);
        at_token_start = c.is_whitespace() || c == '"' || c == '\'';
        rest = &rest[c.len_utf8()..];
    }
    out
}

/// Sorts the lines selected by `select` among their own positions.
fn sort_lines(text: &str, select: &Regex) -> String {
    let lines: Vec<(&str, &str)> = text
        .split_inclusive('\n')
        .map(|l| match l.strip_suffix('\n') {
            Some(b) => (b, "\n"),
            None => (l, ""),
        })
        .collect();
    let mut picked: Vec<&str> = lines.iter().filter(|(b, _)| select.is_match(b)).map(|(b, _)| *b).collect();
    picked.sort_unstable();
    let mut picked = picked.into_iter();
    let mut out = String::with_capacity(text.len());
    for (body, nl) in &lines {
        if select.is_match(body) {
            out.push_str(picked.next().expect("same count"));
        } else {
            out.push_str(body);
        }
        out.push_str(nl);
    }
    out
}

impl PartialEq for Normalizer {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
}

/// An ordered list of normalizers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormalizerChain {
    normalizers: Vec<Normalizer>,
}

impl NormalizerChain {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(normalizers: Vec<Normalizer>) -> Self {
        NormalizerChain { normalizers }
    }

    pub fn of(kinds: &[NormalizerKind]) -> Result<Self> {
        Ok(Self::new(kinds.iter().map(|k| Normalizer::new(*k)).collect::<Result<_>>()?))
    }

    pub fn from_specs(specs: &[NormalizerSpec]) -> Result<Self> {
        Ok(Self::new(specs.iter().map(Normalizer::from_spec).collect::<Result<_>>()?))
    }

    pub fn specs(&self) -> Vec<NormalizerSpec> {
        self.normalizers.iter().map(Normalizer::spec).collect()
    }

    pub fn normalizers(&self) -> &[Normalizer] {
        &self.normalizers
    }

    pub fn is_empty(&self) -> bool {
        self.normalizers.is_empty()
    }

    /// Short identifier such as `space-runs+blank-lines`, or `none`.
    pub fn id(&self) -> String {
        if self.normalizers.is_empty() {
            return "none".into();
        }
        self.normalizers.iter().map(|n| n.kind.as_str()).collect::<Vec<_>>().join("+")
    }

    /// Normalizes the contents of `path`. Non-UTF-8 bytes are returned as is.
    pub fn apply<'a>(&self, path: &str, bytes: &'a [u8]) -> Cow<'a, [u8]> {
        if self.normalizers.iter().all(|n| !n.applies_to(path)) {
            return Cow::Borrowed(bytes);
        }
        let Ok(text) = std::str::from_utf8(bytes) else {
            return Cow::Borrowed(bytes);
        };
        let mut s = text.to_string();
        for n in self.normalizers.iter().filter(|n| n.applies_to(path)) {
            s = n.apply(&s);
        }
        Cow::Owned(s.into_bytes())
    }
}

/// Output of [`normalize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub bytes: Vec<u8>,
    /// Set when the input was not UTF-8 and was passed through unchanged.
    pub passthrough: bool,
}

/// Applies every normalizer in `chain`, in order, ignoring their path scopes.
pub fn normalize(text: &[u8], chain: &NormalizerChain) -> Normalized {
    match std::str::from_utf8(text) {
        Ok(s) => {
            let mut s = s.to_string();
            for n in &chain.normalizers {
                s = n.apply(&s);
            }
            Normalized {
                bytes: s.into_bytes(),
                passthrough: false,
            }
        }
        Err(_) => Normalized {
            bytes: text.to_vec(),
            passthrough: true,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Equivalent,
    NotEquivalent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub status: VerdictStatus,
    pub residual: DiffResidual,
    pub chain_used: String,
    pub ir_based: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl EquivalenceVerdict {
    pub(crate) fn from_residual(residual: DiffResidual, chain: &NormalizerChain, ir_based: bool, notes: Vec<String>) -> Self {
        let status = if residual.changed_lines == 0 {
            VerdictStatus::Equivalent
        } else {
            VerdictStatus::NotEquivalent
        };
        EquivalenceVerdict {
            status,
            residual,
            chain_used: chain.id(),
            ir_based,
            notes,
        }
    }

    pub fn is_equivalent(&self) -> bool {
        self.status == VerdictStatus::Equivalent
    }
}

/// Compares two expansions: IR trees after normalization, plus the
/// dependency graphs (a graph difference shows up as a residual entry under
/// [`GRAPH_ENTRY`]).
pub fn compare_expansions(before: &Expansion, after: &Expansion, chain: &NormalizerChain) -> EquivalenceVerdict {
    let mut residual = diff_snapshots(&before.ir, &after.ir, chain);
    let mut notes = Vec::new();
    if before.graph != after.graph {
        let (a, b) = (before.graph.to_text(), after.graph.to_text());
        let hunks: Vec<Hunk> = diff_bytes(a.as_bytes(), b.as_bytes());
        let changed = hunks.iter().map(Hunk::changed_lines).sum::<usize>().max(1);
        notes.push(format!("dependency graphs differ ({changed} changed edge lines)"));
        residual.push(FileDiff {
            path: GRAPH_ENTRY.to_string(),
            status: FileStatus::Modified,
            hunks,
            changed_lines: changed,
        });
    }
    EquivalenceVerdict::from_residual(residual, chain, true, notes)
}

pub(crate) fn expand_side(snap: &Snapshot, opts: &ExpandOptions, side: &str) -> Result<Expansion> {
    expand_with(snap, opts).map_err(|e| match e {
        Error::Expansion { path, message } => Error::Expansion {
            path,
            message: format!("{side} side: {message}"),
        },
        Error::Parse { path, line, column, message } => Error::Expansion {
            path,
            message: format!("{side} side: {line}:{column}: {message}"),
        },
        other => other,
    })
}

/// Checks whether `after` is equivalent to `before` under `chain`. With `ir`
/// set, both trees are expanded two-phase with `seed` and their IR trees
/// and dependency graphs are compared; otherwise raw files are compared.
pub fn check_equivalence(before: &Snapshot, after: &Snapshot, chain: &NormalizerChain, ir: bool, seed: &str) -> Result<EquivalenceVerdict> {
    if ir {
        let opts = ExpandOptions::new(Strategy::TwoPhase, seed);
        let b = expand_side(before, &opts, "before")?;
        let a = expand_side(after, &opts, "after")?;
        Ok(compare_expansions(&b, &a, chain))
    } else {
        Ok(EquivalenceVerdict::from_residual(diff_snapshots(before, after, chain), chain, false, Vec::new()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(kind: NormalizerKind, text: &str) -> String {
        Normalizer::new(kind).unwrap().apply(text)
    }

    #[test]
    fn space_runs_example() {
        assert_eq!(norm(NormalizerKind::SpaceRuns, "a  \t b \n"), "a b\n");
        assert_eq!(norm(NormalizerKind::SpaceRuns, "  x\ty  "), " x y");
    }

    #[test]
    fn blank_lines_drops_whitespace_only_lines() {
        assert_eq!(norm(NormalizerKind::BlankLines, "a\n\n  \nb\n \t"), "a\nb\n");
    }

    #[test]
    fn dot_slash_paths_examples() {
        let n = |s| norm(NormalizerKind::DotSlashPaths, s);
        assert_eq!(n("./path/to/file"), "path/to/file");
        assert_eq!(n("cc -o ./out \"./src/x.c\" '././y'"), "cc -o out \"src/x.c\" 'y'");
        assert_eq!(n("../up a/./b x=./z 1./2"), "../up a/./b x=./z 1./2");
    }

    #[test]
    fn seeded_ids_example() {
        assert_eq!(norm(NormalizerKind::SeededIds, "FOO_1a2b3c4d"), "FOO_########");
        assert_eq!(norm(NormalizerKind::SeededIds, "x FOO_1A2B3C4D y_123"), "x FOO_1A2B3C4D y_123");
        let named = Normalizer::with_options(NormalizerKind::SeededIds, &[] as &[&str], Some("KEY")).unwrap();
        assert_eq!(named.apply("KEY_deadbeef OTHER_deadbeef"), "KEY_######## OTHER_deadbeef");
    }

    #[test]
    fn sort_lines_only_touches_selected_lines() {
        let n = Normalizer::with_options(NormalizerKind::SortLines, &[] as &[&str], Some("^dep ")).unwrap();
        assert_eq!(n.apply("head\ndep c\nmid\ndep a\ndep b"), "head\ndep a\nmid\ndep b\ndep c");
        assert!(Normalizer::new(NormalizerKind::SortLines).is_err());
    }

    #[test]
    fn chain_scope_limits_paths() {
        let n = Normalizer::with_options(NormalizerKind::SpaceRuns, &["**/*.c"], None).unwrap();
        let chain = NormalizerChain::new(vec![n]);
        assert_eq!(&*chain.apply("a.c", b"x  y"), b"x y");
        assert_eq!(&*chain.apply("a.h", b"x  y"), b"x  y");
    }

    #[test]
    fn non_utf8_passes_through() {
        let chain = NormalizerChain::of(&[NormalizerKind::SpaceRuns]).unwrap();
        let n = normalize(&[0xff, b' ', b' '], &chain);
        assert!(n.passthrough);
        assert_eq!(n.bytes, [0xff, b' ', b' ']);
    }

    #[test]
    fn chain_ids() {
        assert_eq!(NormalizerChain::empty().id(), "none");
        let c = NormalizerChain::of(&[NormalizerKind::SpaceRuns, NormalizerKind::BlankLines]).unwrap();
        assert_eq!(c.id(), "space-runs+blank-lines");
    }

    #[test]
    fn spec_round_trip_through_json() {
        let json = r#"["space-runs", {"kind": "sort-lines", "pattern": "^x", "scope": ["*.mk"]}]"#;
        let specs: Vec<NormalizerSpec> = serde_json::from_str(json).unwrap();
        let chain = NormalizerChain::from_specs(&specs).unwrap();
        assert_eq!(chain.specs(), specs);
    }

    #[test]
    fn relative_path_forms_compare_equal_with_canon_paths() {
        let a = Snapshot::from_files([("m.mk", "CC ./path/to/file\n")]).unwrap();
        let b = Snapshot::from_files([("m.mk", "CC path/to/file\n")]).unwrap();
        let plain = check_equivalence(&a, &b, &NormalizerChain::empty(), false, "0").unwrap();
        assert!(!plain.is_equivalent());
        let canon = NormalizerChain::of(&[NormalizerKind::DotSlashPaths]).unwrap();
        assert!(check_equivalence(&a, &b, &canon, false, "0").unwrap().is_equivalent());
    }

    #[test]
    fn blank_line_difference() {
        let a = Snapshot::from_files([("f", "a\nb\n")]).unwrap();
        let b = Snapshot::from_files([("f", "a\n\nb\n")]).unwrap();
        assert!(!check_equivalence(&a, &b, &NormalizerChain::empty(), false, "0").unwrap().is_equivalent());
        let c = NormalizerChain::of(&[NormalizerKind::BlankLines]).unwrap();
        assert!(check_equivalence(&a, &b, &c, false, "0").unwrap().is_equivalent());
    }

    #[test]
    fn changed_emit_is_reported_against_ir_file() {
        let a = Snapshot::from_files([("x.c", "<?js emit \"one\" ?>\n")]).unwrap();
        let b = Snapshot::from_files([("x.c", "<?js emit \"two\" ?>\n")]).unwrap();
        let v = check_equivalence(&a, &b, &NormalizerChain::empty(), true, "0").unwrap();
        assert_eq!(v.status, VerdictStatus::NotEquivalent);
        assert_eq!(v.residual.entries[0].path, "x.c.i");
        assert_eq!(v.residual.to_patch(false), "--- a/x.c.i\n+++ b/x.c.i\n@@ -1 +1 @@\n-one\n+two\n");
    }

    #[test]
    fn graph_difference_is_not_equivalent() {
        let a = Snapshot::from_files([("x.c", "<$js link \"a.h\" $>")]).unwrap();
        let b = Snapshot::from_files([("x.c", "<$js link \"b.h\" $>")]).unwrap();
        let v = check_equivalence(&a, &b, &NormalizerChain::empty(), true, "0").unwrap();
        assert!(!v.is_equivalent());
        assert_eq!(v.residual.entries[0].path, GRAPH_ENTRY);
        assert_eq!(v.notes.len(), 1);
    }

    #[test]
    fn expansion_error_names_side() {
        let good = Snapshot::from_files([("x.c", "ok")]).unwrap();
        let bad = Snapshot::from_files([("x.c", "<?js use NOPE ?>")]).unwrap();
        let err = check_equivalence(&good, &bad, &NormalizerChain::empty(), true, "0").unwrap_err();
        assert!(err.to_string().contains("after side"), "{err}");
    }

    proptest! {
        #[test]
        fn every_normalizer_is_idempotent(text in "[ a.\t/\"'_0-9a-fA-Z\n]{0,60}") {
            for kind in NormalizerKind::ALL {
                let n = match kind {
                    NormalizerKind::SortLines => Normalizer::with_options(kind, &[] as &[&str], Some("a")).unwrap(),
                    _ => Normalizer::new(kind).unwrap(),
                };
                let once = n.apply(&text);
                prop_assert_eq!(n.apply(&once), once.clone(), "{}", kind);
            }
        }
    }
}
