mod common;

use std::collections::BTreeMap;

use micropass::snapshot::FileStatus;
use micropass::{diff_snapshots, load_tree, write_tree, NormalizerChain, NormalizerKind, Snapshot};
use proptest::prelude::*;

#[test]
fn minicjdns_listing_matches_frozen_find_output() {
    let expected: Vec<String> = include_str!("fixtures/minicjdns.list").lines().map(str::to_string).collect();
    let snap = common::load_corpus("minicjdns");
    let paths: Vec<String> = snap.paths().map(str::to_string).collect();
    assert_eq!(paths, expected);
}

#[test]
fn minicjdns_round_trips_through_disk() {
    let snap = common::load_corpus("minicjdns");
    let dir = tempfile::tempdir().unwrap();
    write_tree(&snap, dir.path(), false).unwrap();
    assert!(common::dirs_equal(dir.path(), &common::corpus_root().join("minicjdns")));
    assert_eq!(load_tree(dir.path(), &[] as &[&str]).unwrap().snapshot, snap);
}

#[test]
fn single_line_change_counts_like_diff_u() {
    let a = Snapshot::from_files([("x.txt", "a\n")]).unwrap();
    let b = Snapshot::from_files([("x.txt", "b\n")]).unwrap();
    let r = diff_snapshots(&a, &b, &NormalizerChain::empty());
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.changed_lines, common::diff_u_changed_lines(b"a\n", b"b\n"));
    assert_eq!(r.changed_lines, 2);
}

#[test]
fn dot_slash_reference_normalizes_away() {
    let a = Snapshot::from_files([("build", "cc ./path/to/file\n")]).unwrap();
    let b = Snapshot::from_files([("build", "cc path/to/file\n")]).unwrap();
    assert!(!diff_snapshots(&a, &b, &NormalizerChain::empty()).is_empty());
    let chain = NormalizerChain::of(&[NormalizerKind::DotSlashPaths]).unwrap();
    assert!(diff_snapshots(&a, &b, &chain).is_empty());
}

#[test]
fn added_and_removed_files_are_reported() {
    let a = Snapshot::from_files([("old", "1\n2\n"), ("same", "s\n")]).unwrap();
    let b = Snapshot::from_files([("new", "1\n"), ("same", "s\n")]).unwrap();
    let r = diff_snapshots(&a, &b, &NormalizerChain::empty());
    let statuses: Vec<(&str, FileStatus)> = r.entries.iter().map(|e| (e.path.as_str(), e.status)).collect();
    assert_eq!(statuses, [("new", FileStatus::Added), ("old", FileStatus::Removed)]);
    let patch = r.to_patch(true);
    assert!(patch.contains("+++ b/new"));
    assert!(!patch.contains("-2"));
}

fn file_map() -> impl Strategy<Value = BTreeMap<String, String>> {
    prop::collection::btree_map("[a-c]{1,2}(/[a-c]{1,2})?\\.(c|h)", "([a-z ]{0,6}\n){0,6}", 0..8)
}

fn texts() -> impl Strategy<Value = String> {
    "([ab \t]{0,4}\n){0,12}[ab]{0,2}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disk_round_trip(files in file_map()) {
        // A path cannot be both a file and a directory on disk.
        let keys: Vec<&String> = files.keys().collect();
        prop_assume!(!keys.iter().any(|a| keys.iter().any(|b| b.starts_with(&format!("{a}/")))));
        let s = Snapshot::from_files(files).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_tree(&s, dir.path(), false).unwrap();
        prop_assert_eq!(load_tree(dir.path(), &[] as &[&str]).unwrap().snapshot, s);
    }

    #[test]
    fn self_diff_is_empty(files in file_map()) {
        let s = Snapshot::from_files(files).unwrap();
        for kinds in [&[][..], &NormalizerKind::ALL[..4]] {
            prop_assert!(diff_snapshots(&s, &s, &NormalizerChain::of(kinds).unwrap()).is_empty());
        }
    }

    #[test]
    fn id_ignores_insertion_order(files in file_map()) {
        let forward = Snapshot::from_files(files.iter().map(|(k, v)| (k.clone(), v.clone()))).unwrap();
        let backward = Snapshot::from_files(files.iter().rev().map(|(k, v)| (k.clone(), v.clone()))).unwrap();
        prop_assert_eq!(forward.id(), backward.id());
    }

    #[test]
    fn changed_lines_agree_with_diff_u(a in texts(), b in texts()) {
        let sa = Snapshot::from_files([("f", a.as_str())]).unwrap();
        let sb = Snapshot::from_files([("f", b.as_str())]).unwrap();
        let r = diff_snapshots(&sa, &sb, &NormalizerChain::empty());
        let oracle = common::diff_u_changed_lines(a.as_bytes(), b.as_bytes());
        if a == b {
            prop_assert!(r.is_empty());
        } else {
            // Both sides use minimal edit scripts; only the count is compared.
            prop_assert_eq!(r.changed_lines, oracle.max(1));
        }
    }
}
