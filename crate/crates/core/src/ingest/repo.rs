//! Scans one on-disk git directory (bare repository or `.git`) into an
//! [`ObjectStore`] delta. Loose objects only; packfile-backed history is
//! rejected with a pointer at the object-stream path.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ingest::loose::{blob_stats, parse_commit, parse_loose_object, parse_tree, ObjectKind};
use crate::object::{EntryKind, ObjectId, ObjectStore, ProjectRef};

fn read_ref_file(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.trim().to_string())
}

/// Union of loose branch refs under `refs/heads/` and `packed-refs` branch
/// lines. Loose refs win on conflict (git semantics).
fn collect_heads(git_dir: &Path) -> Result<HashMap<String, ObjectId>> {
    let mut heads = HashMap::new();

    let packed = git_dir.join("packed-refs");
    if packed.is_file() {
        let text = fs::read_to_string(&packed).map_err(|e| Error::io(&packed, e))?;
        for line in text.lines() {
            if line.starts_with('#') || line.starts_with('^') || line.is_empty() {
                continue;
            }
            if let Some((sha, name)) = line.split_once(' ') {
                if let Some(branch) = name.strip_prefix("refs/heads/") {
                    heads.insert(branch.to_string(), ObjectId::new(sha.to_string())?);
                }
            }
        }
    }

    let heads_dir = git_dir.join("refs/heads");
    if heads_dir.is_dir() {
        let mut stack = vec![heads_dir.clone()];
        while let Some(dir) = stack.pop() {
            for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let entry = entry.map_err(|e| Error::io(&dir, e))?;
                let path = entry.path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let sha = read_ref_file(&path)?;
                    if sha.starts_with("ref:") {
                        continue; // symbolic refs are not branch tips
                    }
                    let branch = path
                        .strip_prefix(&heads_dir)
                        .unwrap()
                        .to_string_lossy()
                        .into_owned();
                    heads.insert(branch, ObjectId::new(sha)?);
                }
            }
        }
    }
    Ok(heads)
}

fn has_packfiles(git_dir: &Path) -> bool {
    let pack_dir = git_dir.join("objects/pack");
    fs::read_dir(&pack_dir)
        .map(|rd| {
            rd.flatten()
                .any(|e| e.path().extension().is_some_and(|x| x == "pack"))
        })
        .unwrap_or(false)
}

fn loose_path(git_dir: &Path, id: &ObjectId) -> PathBuf {
    let hex = id.as_str();
    git_dir.join("objects").join(&hex[..2]).join(&hex[2..])
}

fn load_object(git_dir: &Path, id: &ObjectId, project_id: &str) -> Result<(ObjectKind, Vec<u8>)> {
    let path = loose_path(git_dir, id);
    let compressed = match fs::read(&path) {
        Ok(c) => c,
        Err(_) if has_packfiles(git_dir) => {
            return Err(Error::PackfileOnly(project_id.to_string()))
        }
        Err(e) => return Err(Error::io(&path, e)),
    };
    parse_loose_object(&compressed)
}

/// Loads everything reachable from the repository's branch heads.
/// Unreachable loose objects are ignored. Returns the store delta and
/// the project ref for merging into a corpus.
pub fn scan_repository(repo_root: &Path, project_id: &str) -> Result<(ObjectStore, ProjectRef)> {
    // accept either a work tree (with .git) or a bare/git directory
    let git_dir = if repo_root.join(".git").is_dir() {
        repo_root.join(".git")
    } else {
        repo_root.to_path_buf()
    };
    if !git_dir.join("objects").is_dir() {
        return Err(Error::Config(format!(
            "{} does not look like a git directory (no objects/)",
            git_dir.display()
        )));
    }

    let heads_by_name = collect_heads(&git_dir)?;
    if heads_by_name.is_empty() {
        return Err(Error::NoHeads(project_id.to_string()));
    }
    let mut head_ids: Vec<ObjectId> = heads_by_name.into_values().collect();
    head_ids.sort();
    head_ids.dedup();

    let mut store = ObjectStore::default();
    let mut commit_queue: Vec<ObjectId> = head_ids.clone();
    let mut seen_commits: HashSet<ObjectId> = HashSet::new();
    let mut tree_queue: Vec<ObjectId> = Vec::new();

    while let Some(id) = commit_queue.pop() {
        if !seen_commits.insert(id.clone()) {
            continue;
        }
        let (kind, payload) = load_object(&git_dir, &id, project_id)?;
        if kind != ObjectKind::Commit {
            return Err(Error::HeadNotCommit {
                project: project_id.to_string(),
                head: id.to_string(),
            });
        }
        let rec = parse_commit(id.clone(), &payload)?;
        tree_queue.push(rec.tree.clone());
        commit_queue.extend(rec.parents.iter().cloned());
        store.commits.insert(id, rec);
    }

    let mut seen_trees: HashSet<ObjectId> = HashSet::new();
    while let Some(id) = tree_queue.pop() {
        if !seen_trees.insert(id.clone()) || store.trees.contains_key(&id) {
            continue;
        }
        let (kind, payload) = load_object(&git_dir, &id, project_id)?;
        if kind != ObjectKind::Tree {
            return Err(Error::MalformedObject(format!(
                "{id} expected to be a tree, found {kind:?}"
            )));
        }
        let rec = parse_tree(id.clone(), &payload)?;
        for e in &rec.entries {
            match e.kind {
                EntryKind::Tree => tree_queue.push(e.child.clone()),
                EntryKind::Blob => {
                    if !store.blobs.contains_key(&e.child) {
                        let (bkind, bpayload) = load_object(&git_dir, &e.child, project_id)?;
                        if bkind != ObjectKind::Blob {
                            return Err(Error::MalformedObject(format!(
                                "{} expected to be a blob, found {bkind:?}",
                                e.child
                            )));
                        }
                        let stats = blob_stats(e.child.clone(), &bpayload);
                        store.blobs.insert(e.child.clone(), stats);
                    }
                }
            }
        }
        store.trees.insert(id, rec);
    }

    let project = ProjectRef {
        project_id: project_id.to_string(),
        heads: head_ids,
    };
    store.projects.push(project.clone());
    store.validate()?;
    Ok((store, project))
}
