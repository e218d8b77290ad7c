//! A small two-delimiter macro language embedded in C-like sources.
//!
//! `<?js ... ?>` units hold ordinary macros; `<$js ... $>` units are
//! reserved for dependency declarations. A unit body is a `;`-separated list
//! of directives and nested units:
//!
//! | directive        | effect                                              |
//! |------------------|-----------------------------------------------------|
//! | `emit "s"`       | emits `s`                                           |
//! | `define N "s"`   | binds `N` in the file's bindings                    |
//! | `use N`          | emits the binding of `N`                            |
//! | `constant N`     | binds and emits a seeded identifier `N_xxxxxxxx`    |
//! | `link "path"`    | records a dependency edge to `path`                 |
//! | `global N "s"`   | writes shared builder state (legacy only)           |
//! | `useglobal N`    | reads shared builder state (legacy only)            |
//!
//! Two expanders are provided: a legacy monolithic one that threads shared
//! state through every file, and a two-phase one that collects dependency
//! edges first and then expands each file in isolation.

mod expand;
mod parse;
mod restructure;

use serde::{Deserialize, Serialize};

pub use expand::{constant_value, dependency_links, expand, expand_with, fnv1a64, resolve_includes, ExpandOptions, Expansion, SourceView, Strategy};
pub use parse::{
    line_col, parse_bytes, parse_macros, quote, walk_units, Delimiter, Directive, Item, MacroUnit, Segment,
    SpannedDirective,
};
pub use restructure::{restructure_macros, RestructureMode};

pub const DEFAULT_INCLUDE_MARKER: &str = "//@include ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacroClass {
    Pure,
    Dependency,
    Unsafe,
}

/// Classifies a directive sequence: `unsafe` if it touches shared state,
/// `dependency` if it records links, `pure` otherwise.
pub fn classify_macro<'a>(program: impl IntoIterator<Item = &'a Directive>) -> MacroClass {
    let mut class = MacroClass::Pure;
    for d in program {
        match d {
            Directive::Global(..) | Directive::UseGlobal(_) => return MacroClass::Unsafe,
            Directive::Link(_) => class = MacroClass::Dependency,
            _ => {}
        }
    }
    class
}

/// Classification of a unit by its own directives (nested units excluded).
pub fn classify_unit(unit: &MacroUnit) -> MacroClass {
    classify_macro(unit.directives().map(|d| &d.directive))
}

/// True when the unit consists of `link` directives only.
pub fn is_link_only(unit: &MacroUnit) -> bool {
    unit.items
        .iter()
        .all(|i| matches!(i, Item::Directive(d) if matches!(d.directive, Directive::Link(_))))
}
