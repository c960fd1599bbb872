//! The ten key-value mappings between git entity types, built from an
//! [`ObjectStore`]: c2a, a2c, p2c, c2p, c2f, f2c, c2b, b2c, f2b, a2p.
//!
//! A (path, blob) pair is *introduced* by a commit when no parent holds
//! that same blob at that same path. Root commits introduce their whole
//! tree. The same blob at a different path still counts as introduced;
//! renames are not detected.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::object::{reachable_commits, EntryKind, ObjectId, ObjectStore, TreeRecord};

/// A repository-relative `/`-joined path together with the blob stored
/// there.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathBlobPair {
    pub path: String,
    pub blob: ObjectId,
}

pub const MAP_NAMES: [&str; 10] = [
    "c2a", "a2c", "p2c", "c2p", "c2f", "f2c", "c2b", "b2c", "f2b", "a2p",
];

/// All ten materialized maps. Multi-valued maps use sorted sets so every
/// derived artifact is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaseMaps {
    pub c2a: BTreeMap<String, String>,
    pub a2c: BTreeMap<String, BTreeSet<String>>,
    pub p2c: BTreeMap<String, BTreeSet<String>>,
    pub c2p: BTreeMap<String, BTreeSet<String>>,
    pub c2f: BTreeMap<String, BTreeSet<String>>,
    pub f2c: BTreeMap<String, BTreeSet<String>>,
    pub c2b: BTreeMap<String, BTreeSet<String>>,
    pub b2c: BTreeMap<String, BTreeSet<String>>,
    pub f2b: BTreeMap<String, BTreeSet<String>>,
    pub a2p: BTreeMap<String, BTreeSet<String>>,
}

fn tree_of<'a>(store: &'a ObjectStore, id: &ObjectId, referrer: &str) -> Result<&'a TreeRecord> {
    store.trees.get(id).ok_or_else(|| Error::Dangling {
        kind: "tree",
        id: id.to_string(),
        referrer: referrer.to_string(),
    })
}

/// Full (path, blob) expansion of a tree.
pub fn expand_tree(store: &ObjectStore, root: &ObjectId) -> Result<BTreeSet<PathBlobPair>> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<(String, ObjectId)> = vec![(String::new(), root.clone())];
    while let Some((prefix, id)) = stack.pop() {
        let tree = tree_of(store, &id, "expand")?;
        for e in &tree.entries {
            let path = if prefix.is_empty() {
                e.name.clone()
            } else {
                format!("{prefix}/{}", e.name)
            };
            match e.kind {
                EntryKind::Tree => stack.push((path, e.child.clone())),
                EntryKind::Blob => {
                    out.insert(PathBlobPair {
                        path,
                        blob: e.child.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Pairs present in `ours` but not at the same path with the same blob in
/// `theirs`. Identical subtree ids are pruned without descending.
fn diff_against_parent(
    store: &ObjectStore,
    ours: &ObjectId,
    theirs: &ObjectId,
    prefix: &str,
    out: &mut BTreeSet<PathBlobPair>,
) -> Result<()> {
    if ours == theirs {
        return Ok(());
    }
    let our_tree = tree_of(store, ours, "diff")?;
    let their_tree = tree_of(store, theirs, "diff")?;
    let their_by_name: BTreeMap<&str, (&EntryKind, &ObjectId)> = their_tree
        .entries
        .iter()
        .map(|e| (e.name.as_str(), (&e.kind, &e.child)))
        .collect();

    for e in &our_tree.entries {
        let path = if prefix.is_empty() {
            e.name.clone()
        } else {
            format!("{prefix}/{}", e.name)
        };
        match (e.kind, their_by_name.get(e.name.as_str())) {
            (EntryKind::Blob, Some((EntryKind::Blob, theirs_id))) if *theirs_id == &e.child => {}
            (EntryKind::Blob, _) => {
                out.insert(PathBlobPair {
                    path,
                    blob: e.child.clone(),
                });
            }
            (EntryKind::Tree, Some((EntryKind::Tree, theirs_id))) => {
                diff_against_parent(store, &e.child, theirs_id, &path, out)?;
            }
            (EntryKind::Tree, _) => {
                for pair in expand_tree(store, &e.child)? {
                    out.insert(PathBlobPair {
                        path: format!("{path}/{}", pair.path),
                        blob: pair.blob,
                    });
                }
            }
        }
    }
    Ok(())
}

/// The (path, blob) pairs this commit introduces relative to all of its
/// parents.
pub fn introduced_files(store: &ObjectStore, commit: &ObjectId) -> Result<BTreeSet<PathBlobPair>> {
    let rec = store.commits.get(commit).ok_or_else(|| Error::Dangling {
        kind: "commit",
        id: commit.to_string(),
        referrer: "introduced_files".into(),
    })?;
    if rec.parents.is_empty() {
        return expand_tree(store, &rec.tree);
    }
    // introduced against every parent = intersection of per-parent diffs
    let mut result: Option<BTreeSet<PathBlobPair>> = None;
    for parent in &rec.parents {
        let parent_tree = &store.commits[parent].tree;
        let mut diff = BTreeSet::new();
        diff_against_parent(store, &rec.tree, parent_tree, "", &mut diff)?;
        result = Some(match result {
            None => diff,
            Some(acc) => acc.intersection(&diff).cloned().collect(),
        });
        if result.as_ref().is_some_and(|s| s.is_empty()) {
            break;
        }
    }
    Ok(result.unwrap_or_default())
}

/// Builds all ten maps. Per-commit introduction scans run in parallel;
/// the merge is a set union, so output is independent of worker order.
pub fn build_basemaps(store: &ObjectStore) -> Result<BaseMaps> {
    let mut maps = BaseMaps::default();

    for proj in &store.projects {
        let commits = reachable_commits(store, &proj.heads)?;
        for c in &commits {
            maps.c2p
                .entry(c.to_string())
                .or_default()
                .insert(proj.project_id.clone());
        }
        maps.p2c.insert(
            proj.project_id.clone(),
            commits.iter().map(|c| c.to_string()).collect(),
        );
    }

    for (id, rec) in &store.commits {
        let author = rec.author.raw().to_string();
        maps.c2a.insert(id.to_string(), author.clone());
        maps.a2c.entry(author).or_default().insert(id.to_string());
    }

    let introductions: Vec<(String, BTreeSet<PathBlobPair>)> = store
        .commits
        .keys()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|id| Ok((id.to_string(), introduced_files(store, id)?)))
        .collect::<Result<Vec<_>>>()?;

    for (commit, pairs) in introductions {
        for pair in pairs {
            let path = pair.path;
            let blob = pair.blob.to_string();
            maps.c2f.entry(commit.clone()).or_default().insert(path.clone());
            maps.f2c.entry(path.clone()).or_default().insert(commit.clone());
            maps.c2b.entry(commit.clone()).or_default().insert(blob.clone());
            maps.b2c.entry(blob.clone()).or_default().insert(commit.clone());
            maps.f2b.entry(path).or_default().insert(blob);
        }
    }

    // a2p = a2c composed with c2p
    for (author, commits) in &maps.a2c {
        let mut projects = BTreeSet::new();
        for c in commits {
            if let Some(ps) = maps.c2p.get(c) {
                projects.extend(ps.iter().cloned());
            }
        }
        if !projects.is_empty() {
            maps.a2p.insert(author.clone(), projects);
        }
    }
    Ok(maps)
}

impl BaseMaps {
    /// Sorted values for one key of one named map; empty for absent keys.
    pub fn lookup(&self, map_name: &str, key: &str) -> Result<Vec<String>> {
        let from_set = |m: &BTreeMap<String, BTreeSet<String>>| {
            m.get(key)
                .map(|s| s.iter().cloned().collect::<Vec<_>>())
                .unwrap_or_default()
        };
        Ok(match map_name {
            "c2a" => self.c2a.get(key).map(|v| vec![v.clone()]).unwrap_or_default(),
            "a2c" => from_set(&self.a2c),
            "p2c" => from_set(&self.p2c),
            "c2p" => from_set(&self.c2p),
            "c2f" => from_set(&self.c2f),
            "f2c" => from_set(&self.f2c),
            "c2b" => from_set(&self.c2b),
            "b2c" => from_set(&self.b2c),
            "f2b" => from_set(&self.f2b),
            "a2p" => from_set(&self.a2p),
            other => return Err(Error::UnknownMap(other.to_string())),
        })
    }

    /// All blobs introduced by this project's commits.
    pub fn project_blobs(&self, project_id: &str) -> Result<BTreeSet<String>> {
        let commits = self
            .p2c
            .get(project_id)
            .ok_or_else(|| Error::UnknownProject(project_id.to_string()))?;
        let mut blobs = BTreeSet::new();
        for c in commits {
            if let Some(bs) = self.c2b.get(c) {
                blobs.extend(bs.iter().cloned());
            }
        }
        Ok(blobs)
    }

    /// All paths introduced by this project's commits.
    pub fn project_paths(&self, project_id: &str) -> Result<BTreeSet<String>> {
        let commits = self
            .p2c
            .get(project_id)
            .ok_or_else(|| Error::UnknownProject(project_id.to_string()))?;
        let mut paths = BTreeSet::new();
        for c in commits {
            if let Some(fs) = self.c2f.get(c) {
                paths.extend(fs.iter().cloned());
            }
        }
        Ok(paths)
    }
}

/// Brute-force oracle for `introduced_files`: fully expands this commit's
/// tree and every parent's tree, then compares (path, blob) sets. Kept
/// deliberately naive and independent of the pruned diff path.
pub fn introduced_files_oracle(
    store: &ObjectStore,
    commit: &ObjectId,
) -> Result<BTreeSet<PathBlobPair>> {
    let rec = &store.commits[commit];
    let ours = expand_tree(store, &rec.tree)?;
    if rec.parents.is_empty() {
        return Ok(ours);
    }
    let parent_expansions: Vec<BTreeSet<PathBlobPair>> = rec
        .parents
        .iter()
        .map(|p| expand_tree(store, &store.commits[p].tree))
        .collect::<Result<_>>()?;
    Ok(ours
        .into_iter()
        .filter(|pair| parent_expansions.iter().all(|exp| !exp.contains(pair)))
        .collect())
}
