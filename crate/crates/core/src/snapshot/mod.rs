//! Immutable codebase snapshots, directory I/O, snapshot diffs, and the pass journal.

mod diff;
mod journal;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scope::Scope;

pub use diff::{diff_bytes, diff_snapshots, DiffLine, DiffResidual, FileDiff, FileStatus, Hunk, LineTag};
pub use journal::{FailureRecord, FileDelta, Journal, JournalHeader, PassRecord};
pub(crate) use diff::{line_ops, split_lines};
pub(crate) use journal::{apply_delta, delta_between};

/// Name of the content digest used for snapshot ids. Journals written with a
/// different algorithm are not comparable.
pub const DIGEST_ALGORITHM: &str = "sha256";

pub const DEFAULT_IGNORE: &[&str] = &[".git/**", "journal/**"];

/// Checks that `path` is a normalized relative path: `/`-separated, no empty,
/// `.` or `..` components, no backslashes, no leading `./`.
pub fn validate_rel_path(path: &str) -> Result<()> {
    let bad = path.is_empty()
        || path.contains('\\')
        || path.contains('\0')
        || path
            .split('/')
            .any(|c| c.is_empty() || c == "." || c == "..");
    if bad {
        Err(Error::InvalidPath(path.to_string()))
    } else {
        Ok(())
    }
}

/// An immutable map from relative paths to file contents.
///
/// Contents are shared behind `Arc`, so deriving a new snapshot from an old
/// one only copies the files that actually change.
#[derive(Clone, PartialEq, Eq)]
pub struct Snapshot {
    files: BTreeMap<String, Arc<[u8]>>,
    id: String,
}

impl Snapshot {
    pub fn empty() -> Self {
        Self::from_map(BTreeMap::new())
    }

    /// Builds a snapshot from `(path, contents)` pairs. Later duplicates win.
    pub fn from_files<I, P, B>(files: I) -> Result<Self>
    where
        I: IntoIterator<Item = (P, B)>,
        P: Into<String>,
        B: AsRef<[u8]>,
    {
        let mut map = BTreeMap::new();
        for (p, b) in files {
            let p = p.into();
            validate_rel_path(&p)?;
            map.insert(p, Arc::from(b.as_ref()));
        }
        Ok(Self::from_map(map))
    }

    fn from_map(files: BTreeMap<String, Arc<[u8]>>) -> Self {
        let id = digest_files(&files);
        Snapshot { files, id }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(|b| &b[..])
    }

    pub fn get_str(&self, path: &str) -> Option<&str> {
        self.get(path).and_then(|b| std::str::from_utf8(b).ok())
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains_key(path)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u8])> {
        self.files.iter().map(|(p, b)| (p.as_str(), &b[..]))
    }

    /// Iterates over files whose path is matched by `scope`.
    pub fn iter_scoped<'a>(&'a self, scope: &'a Scope) -> impl Iterator<Item = (&'a str, &'a [u8])> {
        self.iter().filter(move |(p, _)| scope.matches(p))
    }

    /// Starts an edit session; the snapshot itself is left untouched.
    pub fn edit(&self) -> SnapshotEdit {
        SnapshotEdit {
            files: self.files.clone(),
        }
    }
}

impl fmt::Debug for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Snapshot")
            .field("id", &self.id)
            .field("files", &self.files.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Mutable working copy produced by [`Snapshot::edit`].
#[derive(Clone, Debug)]
pub struct SnapshotEdit {
    files: BTreeMap<String, Arc<[u8]>>,
}

impl SnapshotEdit {
    pub fn insert(&mut self, path: impl Into<String>, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = path.into();
        validate_rel_path(&path)?;
        self.files.insert(path, Arc::from(bytes.as_ref()));
        Ok(())
    }

    pub fn remove(&mut self, path: &str) -> Option<Vec<u8>> {
        self.files.remove(path).map(|b| b.to_vec())
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(|b| &b[..])
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains_key(path)
    }

    pub fn finish(self) -> Snapshot {
        Snapshot::from_map(self.files)
    }
}

fn digest_files(files: &BTreeMap<String, Arc<[u8]>>) -> String {
    let mut h = Sha256::new();
    for (path, bytes) in files {
        h.update((path.len() as u64).to_le_bytes());
        h.update(path.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Result of [`load_tree`]: the snapshot plus entries that were skipped.
#[derive(Debug)]
pub struct LoadedTree {
    pub snapshot: Snapshot,
    /// Symlinks and special files, as `path: reason`.
    pub skipped: Vec<String>,
}

/// Loads every regular file under `root` that no `ignore_globs` pattern matches.
pub fn load_tree<S: AsRef<str>>(root: &Path, ignore_globs: &[S]) -> Result<LoadedTree> {
    let meta = fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::other("not a directory"),
        ));
    }
    let ignore = if ignore_globs.is_empty() {
        None
    } else {
        Some(Scope::new(ignore_globs)?)
    };

    let mut files = BTreeMap::new();
    let mut skipped = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .min_depth(1);
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walkdir yields paths under root");
        let mut parts = Vec::new();
        for c in rel.components() {
            match c.as_os_str().to_str() {
                Some(s) => parts.push(s),
                None => return Err(Error::NonUtf8Name(entry.path().to_path_buf())),
            }
        }
        let rel = parts.join("/");
        let ft = entry.file_type();
        if ft.is_dir() {
            continue;
        }
        if ignore.as_ref().is_some_and(|s| s.matches(&rel)) {
            continue;
        }
        if ft.is_symlink() {
            skipped.push(format!("{rel}: symlink"));
            continue;
        }
        if !ft.is_file() {
            skipped.push(format!("{rel}: special file"));
            continue;
        }
        validate_rel_path(&rel)?;
        let bytes = fs::read(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
        files.insert(rel, Arc::from(bytes));
    }
    Ok(LoadedTree {
        snapshot: Snapshot::from_map(files),
        skipped,
    })
}

/// Writes `snap` under `root`. A non-empty `root` is refused unless
/// `overwrite` is set, in which case its previous contents are removed first.
pub fn write_tree(snap: &Snapshot, root: &Path, overwrite: bool) -> Result<()> {
    if root.exists() {
        let mut entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
        if entries.next().is_some() {
            if !overwrite {
                return Err(Error::TargetNotEmpty(root.to_path_buf()));
            }
            fs::remove_dir_all(root).map_err(|e| Error::io(root, e))?;
        }
    }
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    for (rel, bytes) in snap.iter() {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Serializable listing of a snapshot, used by the `snap` command.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Manifest {
    pub digest: String,
    pub id: String,
    pub files: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub size: usize,
    pub sha256: String,
}

impl Snapshot {
    pub fn manifest(&self) -> Manifest {
        Manifest {
            digest: DIGEST_ALGORITHM.to_string(),
            id: self.id.clone(),
            files: self
                .iter()
                .map(|(p, b)| ManifestEntry {
                    path: p.to_string(),
                    size: b.len(),
                    sha256: hex::encode(Sha256::digest(b)),
                })
                .collect(),
        }
    }
}
