use super::audit::{audit_matches, is_identifier, MatchAudit, MatchPattern, MatchSite};
use crate::error::{Error, Result};
use crate::report::PassReport;
use crate::scope::Scope;
use crate::snapshot::Snapshot;

#[derive(Clone, Debug)]
pub struct RenameOutcome {
    pub snapshot: Snapshot,
    /// Audit of the old name taken before rewriting.
    pub audit: MatchAudit,
    pub report: PassReport,
}

fn line_of(text: &[u8], offset: usize) -> (usize, usize) {
    let start = text[..offset].iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    let end = text[offset..].iter().position(|b| *b == b'\n').map_or(text.len(), |i| offset + i);
    (start, end)
}

/// Replaces every word-bounded occurrence of `old` with `new` in scope.
///
/// Refuses when `new` already occurs in scope, unless `force` is set.
pub fn rename_identifier(snap: &Snapshot, old: &str, new: &str, scope: &Scope, force: bool) -> Result<RenameOutcome> {
    for name in [old, new] {
        if !is_identifier(name) {
            return Err(Error::Audit(format!("{name:?} is not an identifier")));
        }
    }
    if old == new {
        return Err(Error::Audit(format!("rename of {old} to itself")));
    }
    let new_pattern = MatchPattern::word(new)?;
    let existing_new = audit_matches(snap, &new_pattern, scope);
    if existing_new.count > 0 && !force {
        return Err(Error::Collision {
            new: new.to_string(),
            sites: existing_new.sites.iter().map(|s| format!("{}:{}:{}", s.path, s.line, s.column)).collect(),
        });
    }

    let old_pattern = MatchPattern::word(old)?;
    let audit = audit_matches(snap, &old_pattern, scope);
    let mut report = PassReport::new();
    report.add_count("matches", audit.count);
    if audit.count == 0 {
        report.warn(format!("no occurrences of {old} in scope"));
        return Ok(RenameOutcome {
            snapshot: snap.clone(),
            audit,
            report: report.finish(),
        });
    }

    let mut by_file: std::collections::BTreeMap<&str, Vec<&MatchSite>> = Default::default();
    for s in &audit.sites {
        by_file.entry(s.path.as_str()).or_default().push(s);
    }
    let mut edit = snap.edit();
    for (path, sites) in by_file {
        let src = snap.get(path).expect("audited path exists");
        let mut out = Vec::with_capacity(src.len() + sites.len() * new.len());
        let mut pos = 0;
        for s in &sites {
            out.extend_from_slice(&src[pos..s.offset]);
            out.extend_from_slice(new.as_bytes());
            pos = s.offset + s.len;
        }
        out.extend_from_slice(&src[pos..]);
        for s in &sites {
            let (ls, le) = line_of(src, s.offset);
            let line = &src[ls..le];
            let after = String::from_utf8_lossy(line).into_owned();
            let after = replace_words(&after, old, new);
            report.edit(path, s.line, s.text.clone(), after);
        }
        edit.insert(path, out)?;
    }
    let renamed = edit.finish();

    let left = audit_matches(&renamed, &old_pattern, scope);
    if left.count != 0 {
        return Err(Error::Audit(format!("{} occurrence(s) of {old} remain after rename", left.count)));
    }
    let now_new = audit_matches(&renamed, &new_pattern, scope);
    if now_new.count != existing_new.count + audit.count {
        return Err(Error::Audit(format!(
            "expected {} occurrence(s) of {new}, found {}",
            existing_new.count + audit.count,
            now_new.count
        )));
    }
    Ok(RenameOutcome {
        snapshot: renamed,
        audit,
        report: report.finish(),
    })
}

/// Word-bounded replacement on a single string.
pub(crate) fn replace_words(text: &str, old: &str, new: &str) -> String {
    let bytes = text.as_bytes();
    let hits = super::audit::word_matches(bytes, old.as_bytes());
    if hits.is_empty() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for i in hits {
        out.push_str(&text[pos..i]);
        out.push_str(new);
        pos = i + old.len();
    }
    out.push_str(&text[pos..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(files: &[(&str, &str)]) -> Snapshot {
        Snapshot::from_files(files.iter().copied()).unwrap()
    }

    #[test]
    fn renames_every_word_occurrence() {
        let s = snap(&[
            ("Makefile", "DIRS += $(XSPRESS3)/db\nDBD += xspress3.dbd\n"),
            ("st.cmd", "epicsEnvSet(XSPRESS3, 1) # XSPRESS3\n"),
        ]);
        let out = rename_identifier(&s, "XSPRESS3", "ADXSPRESS3", &Scope::all(), false).unwrap();
        assert_eq!(out.audit.count, 3);
        assert_eq!(out.report.edits.len(), 3);
        assert_eq!(out.snapshot.get_str("Makefile").unwrap(), "DIRS += $(ADXSPRESS3)/db\nDBD += xspress3.dbd\n");
        assert_eq!(out.snapshot.get_str("st.cmd").unwrap(), "epicsEnvSet(ADXSPRESS3, 1) # ADXSPRESS3\n");
        assert_eq!(out.report.edits[0].after, "DIRS += $(ADXSPRESS3)/db");
    }

    #[test]
    fn collision_lists_existing_sites() {
        let s = snap(&[("a", "OLD NEW\n")]);
        match rename_identifier(&s, "OLD", "NEW", &Scope::all(), false).unwrap_err() {
            Error::Collision { new, sites } => {
                assert_eq!(new, "NEW");
                assert_eq!(sites, ["a:1:5"]);
            }
            e => panic!("{e}"),
        }
        let forced = rename_identifier(&s, "OLD", "NEW", &Scope::all(), true).unwrap();
        assert_eq!(forced.snapshot.get_str("a").unwrap(), "NEW NEW\n");
    }

    #[test]
    fn zero_matches_is_identity_with_warning() {
        let s = snap(&[("a", "nothing here\n")]);
        let out = rename_identifier(&s, "GHOST", "SPIRIT", &Scope::all(), false).unwrap();
        assert_eq!(out.snapshot, s);
        assert_eq!(out.report.warnings.len(), 1);
    }

    #[test]
    fn scope_limits_rename() {
        let s = snap(&[("a.c", "X\n"), ("b.h", "X\n")]);
        let out = rename_identifier(&s, "X", "Y", &Scope::new(&["*.c"]).unwrap(), false).unwrap();
        assert_eq!(out.snapshot.get_str("a.c").unwrap(), "Y\n");
        assert_eq!(out.snapshot.get_str("b.h").unwrap(), "X\n");
    }

    #[test]
    fn rejects_non_identifiers() {
        let s = snap(&[("a", "x")]);
        assert!(rename_identifier(&s, "a-b", "c", &Scope::all(), false).is_err());
        assert!(rename_identifier(&s, "a", "a", &Scope::all(), false).is_err());
    }
}
