//! Include-glob scopes shared by passes, audits, and normalizers.

use globset::{GlobBuilder, GlobSet, GlobSetBuilder};

use crate::error::Result;

/// A set of include globs. An empty glob list matches every path.
#[derive(Clone, Debug)]
pub struct Scope {
    globs: Vec<String>,
    set: Option<GlobSet>,
}

impl Scope {
    pub fn all() -> Self {
        Scope {
            globs: Vec::new(),
            set: None,
        }
    }

    pub fn new<S: AsRef<str>>(globs: &[S]) -> Result<Self> {
        if globs.is_empty() {
            return Ok(Self::all());
        }
        let mut builder = GlobSetBuilder::new();
        for g in globs {
            builder.add(GlobBuilder::new(g.as_ref()).literal_separator(true).build()?);
        }
        Ok(Scope {
            globs: globs.iter().map(|g| g.as_ref().to_string()).collect(),
            set: Some(builder.build()?),
        })
    }

    pub fn matches(&self, path: &str) -> bool {
        match &self.set {
            None => true,
            Some(set) => set.is_match(path),
        }
    }

    pub fn globs(&self) -> &[String] {
        &self.globs
    }
}

impl Default for Scope {
    fn default() -> Self {
        Self::all()
    }
}

impl PartialEq for Scope {
    fn eq(&self, other: &Self) -> bool {
        self.globs == other.globs
    }
}

impl Eq for Scope {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scope_matches_everything() {
        let s = Scope::new::<&str>(&[]).unwrap();
        assert!(s.matches("a/b/c.txt"));
    }

    #[test]
    fn double_star_matches_top_level() {
        let s = Scope::new(&["**/*.c"]).unwrap();
        assert!(s.matches("main.c"));
        assert!(s.matches("util/log.c"));
        assert!(!s.matches("util/log.h"));
    }

    #[test]
    fn single_star_does_not_cross_directories() {
        let s = Scope::new(&["*.c"]).unwrap();
        assert!(s.matches("main.c"));
        assert!(!s.matches("util/log.c"));
    }
}
