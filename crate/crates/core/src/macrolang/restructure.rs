use serde::{Deserialize, Serialize};

use super::parse::{line_col, parse_macros, Delimiter, Item, MacroUnit, Segment};
use super::{classify_unit, is_link_only, MacroClass};
use crate::error::{Error, Result};
use crate::report::PassReport;
use crate::scope::Scope;
use crate::snapshot::Snapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestructureMode {
    /// Move dependency units to the `<$js ... $>` delimiters.
    Redelimit,
    /// Flatten nested units into sibling units.
    Unnest,
}

fn site(path: &str, text: &str, unit: &MacroUnit) -> String {
    let (l, c) = line_col(text, unit.span.start);
    format!("{path}:{l}:{c}")
}

/// Rewrites macro units in every UTF-8 file in `scope` without changing
/// their two-phase expansion.
pub fn restructure_macros(snap: &Snapshot, mode: RestructureMode, scope: &Scope) -> Result<(Snapshot, PassReport)> {
    let mut report = PassReport::new();
    let mut unsafe_sites = Vec::new();
    let mut refused = Vec::new();
    let mut rewrites: Vec<(String, String)> = Vec::new();

    for (path, bytes) in snap.iter_scoped(scope) {
        let Ok(text) = std::str::from_utf8(bytes) else {
            continue;
        };
        let segments = parse_macros(path, text)?;
        let mut out = String::with_capacity(text.len());
        let mut changed = false;
        for seg in &segments {
            match seg {
                Segment::Literal(r) => out.push_str(&text[r.clone()]),
                Segment::Unit(u) => {
                    let before = &text[u.span.clone()];
                    let after = match mode {
                        RestructureMode::Redelimit => {
                            let mut s = String::new();
                            redelimit(path, text, u, &mut s, &mut unsafe_sites, &mut refused, &mut report);
                            s
                        }
                        RestructureMode::Unnest => unnest(path, text, u, &mut refused),
                    };
                    if after != before {
                        changed = true;
                        let (line, _) = line_col(text, u.span.start);
                        report.edit(path, line, before, after.clone());
                    }
                    out.push_str(&after);
                }
            }
        }
        if changed {
            rewrites.push((path.to_string(), out));
        }
    }

    if !unsafe_sites.is_empty() {
        return Err(Error::UnsafeMacro { sites: unsafe_sites });
    }
    if !refused.is_empty() {
        return Err(Error::Audit(refused.join("; ")));
    }
    let mut edit = snap.edit();
    report.add_count("files", rewrites.len());
    for (p, text) in rewrites {
        edit.insert(p, text)?;
    }
    Ok((edit.finish(), report.finish()))
}

/// Appends the redelimited form of `unit` to `out`.
fn redelimit(
    path: &str,
    text: &str,
    unit: &MacroUnit,
    out: &mut String,
    unsafe_sites: &mut Vec<String>,
    refused: &mut Vec<String>,
    report: &mut PassReport,
) {
    let class = classify_unit(unit);
    if class == MacroClass::Unsafe {
        unsafe_sites.push(site(path, text, unit));
    }
    let target = match class {
        MacroClass::Dependency if !is_link_only(unit) => {
            refused.push(format!(
                "{}: dependency unit mixes `link` with other directives or nested units",
                site(path, text, unit)
            ));
            unit.delimiter
        }
        MacroClass::Dependency => Delimiter::Dependency,
        MacroClass::Pure if unit.delimiter == Delimiter::Dependency => {
            report.warn(format!("{}: `<$js` unit declares no dependency", site(path, text, unit)));
            unit.delimiter
        }
        _ => unit.delimiter,
    };
    out.push_str(target.open());
    let mut pos = unit.span.start + 4;
    for item in &unit.items {
        if let Item::Nested(n) = item {
            out.push_str(&text[pos..n.span.start]);
            redelimit(path, text, n, out, unsafe_sites, refused, report);
            pos = n.span.end;
        }
    }
    out.push_str(&text[pos..unit.span.end - 2]);
    out.push_str(target.close());
}

/// Returns the flattened form of `unit`, or its original text when it has no
/// nested units or flattening is refused.
fn unnest(path: &str, text: &str, unit: &MacroUnit, refused: &mut Vec<String>) -> String {
    let original = text[unit.span.clone()].to_string();
    if !unit.has_nested() {
        return original;
    }
    let mut problems = Vec::new();
    unit.walk(&mut |u| {
        let class = classify_unit(u);
        if class == MacroClass::Unsafe {
            problems.push(format!("{}: unsafe unit inside a nest", site(path, text, u)));
        } else if class == MacroClass::Dependency && u.has_nested() {
            problems.push(format!("{}: units nested under a dependency unit", site(path, text, u)));
        }
    });
    if !problems.is_empty() {
        refused.extend(problems);
        return original;
    }
    let mut pieces: Vec<(Delimiter, Vec<&str>)> = Vec::new();
    flatten(text, unit, &mut pieces);
    pieces
        .into_iter()
        .map(|(d, dirs)| format!("{} {} {}", d.open(), dirs.join("; "), d.close()))
        .collect()
}

fn flatten<'t>(text: &'t str, unit: &MacroUnit, pieces: &mut Vec<(Delimiter, Vec<&'t str>)>) {
    let mut current: Vec<&str> = Vec::new();
    for item in &unit.items {
        match item {
            Item::Directive(d) => current.push(&text[d.span.clone()]),
            Item::Nested(n) => {
                if !current.is_empty() {
                    pieces.push((unit.delimiter, std::mem::take(&mut current)));
                }
                flatten(text, n, pieces);
            }
        }
    }
    if !current.is_empty() {
        pieces.push((unit.delimiter, current));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macrolang::{expand, Strategy};

    fn one(text: &str, mode: RestructureMode) -> Result<String> {
        let s = Snapshot::from_files([("f.c", text)]).unwrap();
        let (out, _) = restructure_macros(&s, mode, &Scope::all())?;
        Ok(out.get_str("f.c").unwrap().to_string())
    }

    #[test]
    fn redelimit_moves_link_units() {
        assert_eq!(
            one(r#"<?js link "a.h" ?>"#, RestructureMode::Redelimit).unwrap(),
            r#"<$js link "a.h" $>"#
        );
    }

    #[test]
    fn redelimit_leaves_pure_units() {
        let t = r#"x <?js emit "a" ?> y"#;
        assert_eq!(one(t, RestructureMode::Redelimit).unwrap(), t);
    }

    #[test]
    fn redelimit_handles_nested_dependency_units() {
        let t = r#"<?js emit "a"; <?js link "b.h" ?> ?>"#;
        assert_eq!(
            one(t, RestructureMode::Redelimit).unwrap(),
            r#"<?js emit "a"; <$js link "b.h" $> ?>"#
        );
    }

    #[test]
    fn redelimit_rejects_unsafe_units() {
        let err = one(r#"ok
<?js global G "1" ?>"#, RestructureMode::Redelimit)
        .unwrap_err();
        match err {
            Error::UnsafeMacro { sites } => assert_eq!(sites, ["f.c:2:1"]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn redelimit_rejects_mixed_units() {
        assert!(matches!(
            one(r#"<?js link "a.h"; emit "x" ?>"#, RestructureMode::Redelimit),
            Err(Error::Audit(_))
        ));
    }

    #[test]
    fn unnest_flattens_in_order() {
        let t = r#"<?js emit "a"; <?js emit "b" ?>; emit "c" ?>"#;
        let out = one(t, RestructureMode::Unnest).unwrap();
        assert_eq!(out, r#"<?js emit "a" ?><?js emit "b" ?><?js emit "c" ?>"#);
        let before = expand(&Snapshot::from_files([("f.c", t)]).unwrap(), Strategy::TwoPhase, "0").unwrap();
        let after = expand(&Snapshot::from_files([("f.c", out)]).unwrap(), Strategy::TwoPhase, "0").unwrap();
        assert_eq!(before.ir, after.ir);
    }

    #[test]
    fn unnest_deep_nesting() {
        let t = r#"<?js define A "1"; <?js emit "x"; <$js link "l.h" $> ?>; use A ?>"#;
        assert_eq!(
            one(t, RestructureMode::Unnest).unwrap(),
            r#"<?js define A "1" ?><?js emit "x" ?><$js link "l.h" $><?js use A ?>"#
        );
    }

    #[test]
    fn unnest_refuses_nesting_under_dependency_unit() {
        assert!(one(r#"<?js link "a.h"; <?js emit "b" ?> ?>"#, RestructureMode::Unnest).is_err());
    }

    #[test]
    fn unnest_leaves_flat_units_alone() {
        let t = r#"<?js   emit "a"   ?>"#;
        assert_eq!(one(t, RestructureMode::Unnest).unwrap(), t);
    }
}
