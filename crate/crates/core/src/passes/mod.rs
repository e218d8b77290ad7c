//! Passes as data, and the pipeline that runs them.
//!
//! A plan is a JSON document:
//!
//! ```json
//! {
//!   "seed": "0",
//!   "normalizers": ["space-runs", {"kind": "seeded-ids", "scope": ["*.i"]}],
//!   "rules": [{"pattern": "^include (\\S+)$", "kind": "path-ref"}],
//!   "passes": [
//!     {"name": "adx", "kind": "rename", "params": {"old": "XSPRESS3", "new": "ADXSPRESS3"}},
//!     {"name": "mv", "kind": "relocate", "params": {"moves": {"util": "lib"}}, "scope": ["**/*.c"]}
//!   ]
//! }
//! ```
//!
//! Every pass accepts `scope` (include globs, default all files) and `check`
//! (`ir-equal` by default, `normalized-equal` or `skip`).

mod apply;
mod history;
mod pipeline;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::equiv::{NormalizerChain, NormalizerSpec};
use crate::error::{Error, Result};
use crate::macrolang::DEFAULT_INCLUDE_MARKER;
use crate::rules::{RefRule, RuleSpec};
use crate::scope::Scope;
use crate::textops::{is_identifier, RelocationMap};

pub use apply::{apply_pass, apply_pass_in, PassEnv};
pub use history::{invert_pass, journal_squash};
pub use pipeline::{run_pipeline, run_pipeline_with};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassKind {
    Rename,
    Relocate,
    Outline,
    Inline,
    Redelimit,
    Unnest,
    EliminateDead,
    CustomRewrite,
}

impl PassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PassKind::Rename => "rename",
            PassKind::Relocate => "relocate",
            PassKind::Outline => "outline",
            PassKind::Inline => "inline",
            PassKind::Redelimit => "redelimit",
            PassKind::Unnest => "unnest",
            PassKind::EliminateDead => "eliminate_dead",
            PassKind::CustomRewrite => "custom_rewrite",
        }
    }
}

impl std::fmt::Display for PassKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckPolicy {
    /// Expanded IR of the output must equal the pass's projection of the
    /// input IR, modulo the plan's normalizers.
    #[default]
    IrEqual,
    /// Raw output files must equal the raw input files modulo the plan's
    /// normalizers.
    NormalizedEqual,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenameParams {
    pub old: String,
    pub new: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub force: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelocateParams {
    pub moves: RelocationMap,
}

/// Shared by `outline` and `inline`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentParams {
    pub block: String,
    pub shared_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EliminateDeadParams {
    pub roots: Vec<String>,
    #[serde(default = "yes")]
    pub include_links: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewriteRule {
    pub find: String,
    pub replace: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub regex: bool,
    /// Exact number of matches the rule must find in scope.
    pub expect: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomRewriteParams {
    #[serde(default)]
    pub rules: Vec<RewriteRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PassParams {
    Rename(RenameParams),
    Relocate(RelocateParams),
    Outline(FragmentParams),
    Inline(FragmentParams),
    Redelimit,
    Unnest,
    EliminateDead(EliminateDeadParams),
    CustomRewrite(CustomRewriteParams),
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NoParams {}

impl PassParams {
    pub fn kind(&self) -> PassKind {
        match self {
            PassParams::Rename(_) => PassKind::Rename,
            PassParams::Relocate(_) => PassKind::Relocate,
            PassParams::Outline(_) => PassKind::Outline,
            PassParams::Inline(_) => PassKind::Inline,
            PassParams::Redelimit => PassKind::Redelimit,
            PassParams::Unnest => PassKind::Unnest,
            PassParams::EliminateDead(_) => PassKind::EliminateDead,
            PassParams::CustomRewrite(_) => PassKind::CustomRewrite,
        }
    }

    pub fn from_value(kind: PassKind, value: serde_json::Value) -> Result<Self> {
        let value = if value.is_null() { serde_json::json!({}) } else { value };
        let bad = |e: serde_json::Error| Error::Plan(format!("invalid {kind} params: {e}"));
        Ok(match kind {
            PassKind::Rename => PassParams::Rename(serde_json::from_value(value).map_err(bad)?),
            PassKind::Relocate => PassParams::Relocate(serde_json::from_value(value).map_err(bad)?),
            PassKind::Outline => PassParams::Outline(serde_json::from_value(value).map_err(bad)?),
            PassKind::Inline => PassParams::Inline(serde_json::from_value(value).map_err(bad)?),
            PassKind::Redelimit => {
                serde_json::from_value::<NoParams>(value).map_err(bad)?;
                PassParams::Redelimit
            }
            PassKind::Unnest => {
                serde_json::from_value::<NoParams>(value).map_err(bad)?;
                PassParams::Unnest
            }
            PassKind::EliminateDead => PassParams::EliminateDead(serde_json::from_value(value).map_err(bad)?),
            PassKind::CustomRewrite => PassParams::CustomRewrite(serde_json::from_value(value).map_err(bad)?),
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        let v = match self {
            PassParams::Rename(p) => serde_json::to_value(p),
            PassParams::Relocate(p) => serde_json::to_value(p),
            PassParams::Outline(p) | PassParams::Inline(p) => serde_json::to_value(p),
            PassParams::Redelimit | PassParams::Unnest => serde_json::to_value(NoParams {}),
            PassParams::EliminateDead(p) => serde_json::to_value(p),
            PassParams::CustomRewrite(p) => serde_json::to_value(p),
        };
        v.expect("params serialize")
    }

    /// Checks parameter values that serde cannot.
    pub fn validate(&self) -> Result<()> {
        match self {
            PassParams::Rename(p) => {
                for n in [&p.old, &p.new] {
                    if !is_identifier(n) {
                        return Err(Error::Plan(format!("rename: {n:?} is not an identifier")));
                    }
                }
                if p.old == p.new {
                    return Err(Error::Plan(format!("rename: {} to itself", p.old)));
                }
            }
            PassParams::Relocate(p) => {
                RelocationMap::new(p.moves.moves().clone())?;
                if p.moves.moves().is_empty() {
                    return Err(Error::Plan("relocate: no moves".into()));
                }
            }
            PassParams::Outline(p) | PassParams::Inline(p) => {
                crate::snapshot::validate_rel_path(&p.shared_path)?;
                if p.block.is_empty() || !p.block.ends_with('\n') {
                    return Err(Error::Plan("block must be non-empty and end with a newline".into()));
                }
                if p.marker.as_deref() == Some("") {
                    return Err(Error::Plan("empty include marker".into()));
                }
            }
            PassParams::EliminateDead(p) => {
                if p.roots.is_empty() {
                    return Err(Error::Plan("eliminate_dead: at least one root is required".into()));
                }
            }
            PassParams::CustomRewrite(p) => {
                for r in p.rules.iter().filter(|r| r.regex) {
                    regex::Regex::new(&r.find)?;
                }
                if let Some(r) = p.rules.iter().find(|r| r.find.is_empty()) {
                    return Err(Error::Plan(format!("custom_rewrite: empty pattern (replacement {:?})", r.replace)));
                }
            }
            PassParams::Redelimit | PassParams::Unnest => {}
        }
        Ok(())
    }
}

/// One named, parameterized transformation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPass", into = "RawPass")]
pub struct Pass {
    pub name: String,
    pub params: PassParams,
    pub scope: Scope,
    pub check: CheckPolicy,
}

impl Pass {
    pub fn new(name: impl Into<String>, params: PassParams) -> Result<Self> {
        let pass = Pass {
            name: name.into(),
            params,
            scope: Scope::all(),
            check: CheckPolicy::default(),
        };
        pass.validate()?;
        Ok(pass)
    }

    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    pub fn with_check(mut self, check: CheckPolicy) -> Self {
        self.check = check;
        self
    }

    pub fn kind(&self) -> PassKind {
        self.params.kind()
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Plan("pass name must not be empty".into()));
        }
        self.params.validate().map_err(|e| match e {
            Error::Plan(m) => Error::Plan(format!("pass {:?}: {m}", self.name)),
            other => Error::Plan(format!("pass {:?}: {other}", self.name)),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPass {
    name: String,
    kind: PassKind,
    #[serde(default)]
    params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    scope: Vec<String>,
    #[serde(default)]
    check: CheckPolicy,
}

impl TryFrom<RawPass> for Pass {
    type Error = Error;

    fn try_from(raw: RawPass) -> Result<Self> {
        let pass = Pass {
            params: PassParams::from_value(raw.kind, raw.params).map_err(|e| Error::Plan(format!("pass {:?}: {e}", raw.name)))?,
            scope: Scope::new(&raw.scope)?,
            check: raw.check,
            name: raw.name,
        };
        pass.validate()?;
        Ok(pass)
    }
}

impl From<Pass> for RawPass {
    fn from(p: Pass) -> Self {
        RawPass {
            kind: p.kind(),
            params: p.params.to_value(),
            scope: p.scope.globs().to_vec(),
            check: p.check,
            name: p.name,
        }
    }
}

/// An ordered list of passes plus the settings they share.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelinePlan {
    /// Seed for `constant` expansion; callers may override it.
    pub seed: Option<String>,
    pub normalizers: NormalizerChain,
    /// Reference rules used by `relocate` and `eliminate_dead`.
    pub rules: Vec<RefRule>,
    pub include_marker: String,
    pub passes: Vec<Pass>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<String>,
    #[serde(default)]
    normalizers: Vec<NormalizerSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    rules: Vec<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    include_marker: Option<String>,
    #[serde(default)]
    passes: Vec<Pass>,
}

impl Default for PipelinePlan {
    fn default() -> Self {
        PipelinePlan {
            seed: None,
            normalizers: NormalizerChain::empty(),
            rules: Vec::new(),
            include_marker: DEFAULT_INCLUDE_MARKER.to_string(),
            passes: Vec::new(),
        }
    }
}

impl PipelinePlan {
    pub fn new(passes: Vec<Pass>) -> Result<Self> {
        let plan = PipelinePlan {
            passes,
            ..Default::default()
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::BTreeSet::new();
        for p in &self.passes {
            p.validate()?;
            if !names.insert(p.name.as_str()) {
                return Err(Error::Plan(format!("duplicate pass name {:?}", p.name)));
            }
        }
        if self.include_marker.trim().is_empty() {
            return Err(Error::Plan("empty include marker".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawPlan = serde_json::from_str(text).map_err(|e| Error::Plan(e.to_string()))?;
        let plan = PipelinePlan {
            seed: raw.seed,
            normalizers: NormalizerChain::from_specs(&raw.normalizers)?,
            rules: raw.rules.iter().map(RefRule::from_spec).collect::<Result<_>>()?,
            include_marker: raw.include_marker.unwrap_or_else(|| DEFAULT_INCLUDE_MARKER.to_string()),
            passes: raw.passes,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Plan(m) => Error::Plan(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawPlan {
            seed: self.seed.clone(),
            normalizers: self.normalizers.specs(),
            rules: self.rules.iter().map(RefRule::spec).collect(),
            include_marker: (self.include_marker != DEFAULT_INCLUDE_MARKER).then(|| self.include_marker.clone()),
            passes: self.passes.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("plan serializes")
    }

    /// sha256 of the compact canonical JSON form, excluding the seed so that
    /// a seed override does not change the digest.
    pub fn digest(&self) -> String {
        let mut unseeded = self.clone();
        unseeded.seed = None;
        let v: serde_json::Value = serde_json::from_str(&unseeded.to_json()).expect("round trip");
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn env(&self) -> PassEnv {
        PassEnv {
            rules: self.rules.clone(),
            include_marker: self.include_marker.clone(),
            seed: self.seed.clone().unwrap_or_else(|| "0".to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan_defaults() {
        let p = PipelinePlan::from_json("{}").unwrap();
        assert!(p.passes.is_empty());
        assert_eq!(p.include_marker, DEFAULT_INCLUDE_MARKER);
    }

    #[test]
    fn plan_round_trips_through_json() {
        let text = r#"{
            "seed": "7",
            "normalizers": ["space-runs", {"kind": "seeded-ids", "scope": ["*.i"]}],
            "rules": [{"pattern": "^include (\\S+)$", "kind": "path-ref"}],
            "passes": [
                {"name": "r", "kind": "rename", "params": {"old": "A", "new": "B"}},
                {"name": "m", "kind": "relocate", "params": {"moves": {"x": "y"}}, "scope": ["*.c"], "check": "skip"},
                {"name": "d", "kind": "redelimit"}
            ]
        }"#;
        let p = PipelinePlan::from_json(text).unwrap();
        assert_eq!(p.passes[1].check, CheckPolicy::Skip);
        assert_eq!(p.passes[0].check, CheckPolicy::IrEqual);
        let again = PipelinePlan::from_json(&p.to_json()).unwrap();
        assert_eq!(again, p);
        assert_eq!(again.digest(), p.digest());
    }

    #[test]
    fn digest_ignores_seed() {
        let mut p = PipelinePlan::from_json(r#"{"passes":[{"name":"u","kind":"unnest"}]}"#).unwrap();
        let d = p.digest();
        p.seed = Some("9".into());
        assert_eq!(p.digest(), d);
        assert_eq!(d.len(), 64);
    }

    #[test]
    fn validation_errors() {
        for bad in [
            r#"{"passes":[{"name":"a","kind":"unnest"},{"name":"a","kind":"unnest"}]}"#,
            r#"{"passes":[{"name":"a","kind":"rename","params":{"old":"x-y","new":"z"}}]}"#,
            r#"{"passes":[{"name":"a","kind":"rename","params":{"old":"x"}}]}"#,
            r#"{"passes":[{"name":"a","kind":"unnest","params":{"x":1}}]}"#,
            r#"{"passes":[{"name":"a","kind":"teleport"}]}"#,
            r#"{"passes":[{"name":"a","kind":"eliminate_dead","params":{"roots":[]}}]}"#,
            r#"{"passes":[{"name":"a","kind":"custom_rewrite","params":{"rules":[{"find":"(","replace":"","regex":true,"expect":0}]}}]}"#,
            r#"{"bogus": 1}"#,
        ] {
            assert!(PipelinePlan::from_json(bad).is_err(), "{bad}");
        }
    }
}
