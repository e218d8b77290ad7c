use crate::error::{Error, Result};
use crate::report::PassReport;
use crate::scope::Scope;
use crate::snapshot::{validate_rel_path, Snapshot};

fn marker_line(marker: &str, shared_path: &str) -> String {
    format!("{marker}{shared_path}\n")
}

/// Lines (with offsets) of `text` that are include markers for `target`.
fn marker_sites(text: &[u8], marker: &str, target: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut pos = 0;
    for line in text.split_inclusive(|b| *b == b'\n') {
        let body = line.strip_suffix(b"\n").unwrap_or(line);
        if let Some(rest) = body.strip_prefix(marker.as_bytes()) {
            if rest.trim_ascii() == target.as_bytes() {
                out.push((pos, line.len()));
            }
        }
        pos += line.len();
    }
    out
}

fn line_number(text: &[u8], pos: usize) -> usize {
    text[..pos].iter().filter(|b| **b == b'\n').count() + 1
}

fn first_line(block: &[u8]) -> String {
    let end = block.iter().position(|b| *b == b'\n').unwrap_or(block.len());
    String::from_utf8_lossy(&block[..end]).into_owned()
}

fn check_block(block: &[u8]) -> Result<()> {
    if block.is_empty() {
        return Err(Error::Audit("empty block".into()));
    }
    if !block.ends_with(b"\n") {
        return Err(Error::Audit("block must end with a newline".into()));
    }
    Ok(())
}

/// Line-aligned, non-overlapping occurrences of `block` in `text`.
fn block_occurrences(text: &[u8], block: &[u8]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + block.len() <= text.len() {
        if (i == 0 || text[i - 1] == b'\n') && &text[i..i + block.len()] == block {
            out.push(i);
            i += block.len();
        } else {
            i += 1;
        }
    }
    out
}

/// Moves every line-aligned copy of `block` in scope into `shared_path` and
/// replaces each copy with an include marker line.
pub fn outline_fragment(snap: &Snapshot, block: &[u8], shared_path: &str, marker: &str, scope: &Scope) -> Result<(Snapshot, PassReport)> {
    check_block(block)?;
    validate_rel_path(shared_path)?;
    if snap.contains(shared_path) {
        return Err(Error::Audit(format!("{shared_path} already exists")));
    }
    for (path, bytes) in snap.iter() {
        if let Some((pos, _)) = marker_sites(bytes, marker, shared_path).first() {
            return Err(Error::Audit(format!(
                "{path}:{} already includes {shared_path}",
                line_number(bytes, *pos)
            )));
        }
    }
    let line = marker_line(marker, shared_path);
    let mut report = PassReport::new();
    let mut edit = snap.edit();
    let mut total = 0;
    for (path, bytes) in snap.iter_scoped(scope) {
        let hits = block_occurrences(bytes, block);
        if hits.is_empty() {
            continue;
        }
        let mut out = Vec::with_capacity(bytes.len());
        let mut pos = 0;
        for &h in &hits {
            out.extend_from_slice(&bytes[pos..h]);
            out.extend_from_slice(line.as_bytes());
            pos = h + block.len();
            report.edit(path, line_number(bytes, h), first_line(block), line.trim_end());
        }
        out.extend_from_slice(&bytes[pos..]);
        total += hits.len();
        edit.insert(path, out)?;
    }
    if total == 0 {
        return Err(Error::Audit("block does not occur in scope".into()));
    }
    edit.insert(shared_path, block)?;
    report.add_count("occurrences", total);
    Ok((edit.finish(), report.finish()))
}

/// Inverse of [`outline_fragment`]: replaces every marker line for
/// `shared_path` in scope with `block` and deletes `shared_path`.
pub fn inline_fragment(snap: &Snapshot, block: &[u8], shared_path: &str, marker: &str, scope: &Scope) -> Result<(Snapshot, PassReport)> {
    check_block(block)?;
    match snap.get(shared_path) {
        None => return Err(Error::Audit(format!("{shared_path} does not exist"))),
        Some(b) if b != block => return Err(Error::Audit(format!("{shared_path} does not hold the expected block"))),
        Some(_) => {}
    }
    let mut report = PassReport::new();
    let mut edit = snap.edit();
    let mut total = 0;
    for (path, bytes) in snap.iter() {
        let sites = marker_sites(bytes, marker, shared_path);
        if sites.is_empty() {
            continue;
        }
        if !scope.matches(path) || path == shared_path {
            return Err(Error::Audit(format!(
                "{path}:{} includes {shared_path} but is not inlined",
                line_number(bytes, sites[0].0)
            )));
        }
        let mut out = Vec::with_capacity(bytes.len() + sites.len() * block.len());
        let mut pos = 0;
        for &(start, len) in &sites {
            out.extend_from_slice(&bytes[pos..start]);
            out.extend_from_slice(block);
            pos = start + len;
            let before = String::from_utf8_lossy(&bytes[start..start + len]).trim_end().to_string();
            report.edit(path, line_number(bytes, start), before, first_line(block));
        }
        out.extend_from_slice(&bytes[pos..]);
        total += sites.len();
        edit.insert(path, out)?;
    }
    if total == 0 {
        report.warn(format!("no file includes {shared_path}"));
    }
    edit.remove(shared_path);
    report.add_count("occurrences", total);
    Ok((edit.finish(), report.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MARK: &str = "//@include ";
    const BLOCK: &str = "static int a;\nstatic int b;\n";

    fn snap(files: &[(&str, &str)]) -> Snapshot {
        Snapshot::from_files(files.iter().copied()).unwrap()
    }

    #[test]
    fn outline_then_inline_roundtrips() {
        let x = format!("int x;\n{BLOCK}int y;\n");
        let s = snap(&[
            ("x.c", &x),
            ("y.c", BLOCK),
            ("z.c", "static int a;\n"),
        ]);
        let (o, rep) = outline_fragment(&s, BLOCK.as_bytes(), "shared/ab.inc", MARK, &Scope::all()).unwrap();
        assert_eq!(rep.count("occurrences"), 2);
        assert_eq!(o.get_str("x.c").unwrap(), "int x;\n//@include shared/ab.inc\nint y;\n");
        assert_eq!(o.get_str("shared/ab.inc").unwrap(), BLOCK);
        let (back, _) = inline_fragment(&o, BLOCK.as_bytes(), "shared/ab.inc", MARK, &Scope::all()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn occurrences_must_be_line_aligned() {
        let s = snap(&[("x.c", &format!("// {BLOCK}"))]);
        assert!(outline_fragment(&s, BLOCK.as_bytes(), "ab.inc", MARK, &Scope::all()).is_err());
    }

    #[test]
    fn refuses_existing_target_or_marker() {
        let s = snap(&[("x.c", BLOCK), ("ab.inc", "")]);
        assert!(outline_fragment(&s, BLOCK.as_bytes(), "ab.inc", MARK, &Scope::all()).is_err());
        let s = snap(&[("x.c", &format!("{BLOCK}//@include ab.inc\n"))]);
        assert!(outline_fragment(&s, BLOCK.as_bytes(), "ab.inc", MARK, &Scope::all()).is_err());
    }

    #[test]
    fn inline_checks_shared_content() {
        let s = snap(&[("x.c", "//@include ab.inc\n"), ("ab.inc", "other\n")]);
        assert!(inline_fragment(&s, BLOCK.as_bytes(), "ab.inc", MARK, &Scope::all()).is_err());
    }

    #[test]
    fn block_validation() {
        let s = snap(&[("x.c", "a\n")]);
        assert!(outline_fragment(&s, b"", "f", MARK, &Scope::all()).is_err());
        assert!(outline_fragment(&s, b"a", "f", MARK, &Scope::all()).is_err());
    }
}
