//! Lexical transforms: identifier audit and rename, file relocation with
//! reference rewriting, and fragment outlining.

mod audit;
mod outline;
mod relocate;
mod rename;

pub use audit::{audit_matches, is_identifier, is_word_byte, MatchAudit, MatchPattern, MatchSite};
pub use outline::{inline_fragment, outline_fragment};
pub use relocate::{relocate, rewrite_rule_references, RelocationMap};
pub use rename::{rename_identifier, RenameOutcome};

pub(crate) use rename::replace_words;
