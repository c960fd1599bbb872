//! Domain types for the object catalog: ids, commits, trees, blob stats,
//! project refs, and the immutable [`ObjectStore`] they live in.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// 40-char lowercase hex identifier. In stream mode it is opaque and need
/// not be a verified hash.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(hex: impl Into<String>) -> Result<Self> {
        let hex = hex.into();
        if hex.len() == 40 && hex.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            Ok(ObjectId(hex))
        } else {
            Err(Error::InvalidValue {
                what: "object id",
                value: hex,
            })
        }
    }

    pub fn from_raw_bytes(raw: &[u8; 20]) -> Self {
        let mut s = String::with_capacity(40);
        for b in raw {
            s.push_str(&format!("{b:02x}"));
        }
        ObjectId(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Raw `Name <email>` identity as recorded in commit headers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuthorId {
    raw: String,
}

impl AuthorId {
    pub fn new(raw: impl Into<String>) -> Result<Self> {
        let raw = raw.into();
        let lt = raw.find('<');
        let gt = raw.find('>');
        let ok = match (lt, gt) {
            (Some(l), Some(g)) => {
                l < g
                    && raw.matches('<').count() == 1
                    && raw.matches('>').count() == 1
                    && !raw.contains('\t')
                    && !raw.contains('\n')
            }
            _ => false,
        };
        if ok {
            Ok(AuthorId { raw })
        } else {
            Err(Error::InvalidValue {
                what: "author id",
                value: raw,
            })
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Substring before ` <`, trimmed of the separating space.
    pub fn name(&self) -> &str {
        let lt = self.raw.find('<').unwrap();
        self.raw[..lt].trim_end()
    }

    /// Substring inside the angle brackets.
    pub fn email(&self) -> &str {
        let lt = self.raw.find('<').unwrap();
        let gt = self.raw.find('>').unwrap();
        &self.raw[lt + 1..gt]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub id: ObjectId,
    pub tree: ObjectId,
    pub parents: Vec<ObjectId>,
    pub author: AuthorId,
    pub author_ts: i64,
    pub committer: AuthorId,
    pub commit_ts: i64,
}

impl CommitRecord {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for p in &self.parents {
            if p == &self.id {
                return Err(Error::InvalidValue {
                    what: "commit parent",
                    value: format!("{} lists itself as parent", self.id),
                });
            }
            if !seen.insert(p) {
                return Err(Error::InvalidValue {
                    what: "commit parent",
                    value: format!("{} has duplicate parent {p}", self.id),
                });
            }
        }
        if self.author_ts < 0 || self.commit_ts < 0 {
            return Err(Error::InvalidValue {
                what: "commit timestamp",
                value: format!("{}: negative timestamp", self.id),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryKind {
    Blob,
    Tree,
}

impl EntryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntryKind::Blob => "blob",
            EntryKind::Tree => "tree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEntry {
    pub mode: String,
    pub kind: EntryKind,
    pub child: ObjectId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRecord {
    pub id: ObjectId,
    pub entries: Vec<TreeEntry>,
}

/// Name rules shared by tree entries and repository paths.
pub fn valid_path_segment(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && !name.contains(['/', '\t', '\0', '\n'])
}

impl TreeRecord {
    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for e in &self.entries {
            if !valid_path_segment(&e.name) {
                return Err(Error::InvalidValue {
                    what: "tree entry name",
                    value: format!("{}: {:?}", self.id, e.name),
                });
            }
            if !names.insert(e.name.as_str()) {
                return Err(Error::InvalidValue {
                    what: "tree entry name",
                    value: format!("{}: duplicate {:?}", self.id, e.name),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlobStats {
    pub id: ObjectId,
    pub size: u64,
    pub line_count: u64,
    pub is_binary: bool,
}

impl BlobStats {
    pub fn validate(&self) -> Result<()> {
        if (self.is_binary || self.size == 0) && self.line_count != 0 {
            return Err(Error::InvalidValue {
                what: "blob stats",
                value: format!("{}: line_count must be 0", self.id),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectRef {
    pub project_id: String,
    pub heads: Vec<ObjectId>,
}

/// Immutable catalog of commits, trees, blob stats, and project refs.
///
/// Safe for concurrent reads once built; construction is single-writer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectStore {
    pub commits: BTreeMap<ObjectId, CommitRecord>,
    pub trees: BTreeMap<ObjectId, TreeRecord>,
    pub blobs: BTreeMap<ObjectId, BlobStats>,
    pub projects: Vec<ProjectRef>,
}

impl ObjectStore {
    /// Checks every store invariant: resolvability of all references,
    /// per-record invariants, project id uniqueness, and graph acyclicity.
    pub fn validate(&self) -> Result<()> {
        for (id, c) in &self.commits {
            c.validate()?;
            if !self.trees.contains_key(&c.tree) {
                return Err(Error::Dangling {
                    kind: "tree",
                    id: c.tree.to_string(),
                    referrer: format!("commit {id}"),
                });
            }
            for p in &c.parents {
                if !self.commits.contains_key(p) {
                    return Err(Error::Dangling {
                        kind: "commit",
                        id: p.to_string(),
                        referrer: format!("commit {id}"),
                    });
                }
            }
        }
        for (id, t) in &self.trees {
            t.validate()?;
            for e in &t.entries {
                let resolved = match e.kind {
                    EntryKind::Tree => self.trees.contains_key(&e.child),
                    EntryKind::Blob => self.blobs.contains_key(&e.child),
                };
                if !resolved {
                    return Err(Error::Dangling {
                        kind: e.kind.as_str(),
                        id: e.child.to_string(),
                        referrer: format!("tree {id}"),
                    });
                }
            }
        }
        for b in self.blobs.values() {
            b.validate()?;
        }
        let mut ids = HashSet::new();
        for p in &self.projects {
            if p.heads.is_empty() {
                return Err(Error::NoHeads(p.project_id.clone()));
            }
            if p.project_id.is_empty() || p.project_id.contains(['\t', '\n']) {
                return Err(Error::InvalidValue {
                    what: "project id",
                    value: p.project_id.clone(),
                });
            }
            if !ids.insert(p.project_id.as_str()) {
                return Err(Error::InvalidValue {
                    what: "project id",
                    value: format!("duplicate {:?}", p.project_id),
                });
            }
            for h in &p.heads {
                if !self.commits.contains_key(h) {
                    return Err(Error::HeadNotCommit {
                        project: p.project_id.clone(),
                        head: h.to_string(),
                    });
                }
            }
        }
        self.check_acyclic()?;
        Ok(())
    }

    /// Kahn-style check over the parent relation. Git guarantees a DAG, so
    /// a cycle means corrupt input.
    fn check_acyclic(&self) -> Result<()> {
        let mut indegree: BTreeMap<&ObjectId, usize> =
            self.commits.keys().map(|k| (k, 0)).collect();
        for c in self.commits.values() {
            for p in &c.parents {
                *indegree.get_mut(p).unwrap() += 1;
            }
        }
        let mut queue: Vec<&ObjectId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(k, _)| *k)
            .collect();
        let mut visited = 0usize;
        while let Some(id) = queue.pop() {
            visited += 1;
            for p in &self.commits[id].parents {
                let d = indegree.get_mut(p).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push(p);
                }
            }
        }
        if visited != self.commits.len() {
            let culprit = indegree
                .iter()
                .find(|(_, d)| **d > 0)
                .map(|(k, _)| k.to_string())
                .unwrap_or_default();
            return Err(Error::CommitCycle { id: culprit });
        }
        Ok(())
    }

    /// Merges another store into this one. Duplicate ids with identical
    /// content are idempotent; conflicting content is an error. Projects
    /// are kept sorted by project id.
    pub fn merge(&mut self, other: ObjectStore) -> Result<()> {
        for (id, c) in other.commits {
            if let Some(existing) = self.commits.get(&id) {
                if *existing != c {
                    return Err(Error::ConflictingDuplicate { id: id.to_string() });
                }
            } else {
                self.commits.insert(id, c);
            }
        }
        for (id, t) in other.trees {
            if let Some(existing) = self.trees.get(&id) {
                if *existing != t {
                    return Err(Error::ConflictingDuplicate { id: id.to_string() });
                }
            } else {
                self.trees.insert(id, t);
            }
        }
        for (id, b) in other.blobs {
            if let Some(existing) = self.blobs.get(&id) {
                if *existing != b {
                    return Err(Error::ConflictingDuplicate { id: id.to_string() });
                }
            } else {
                self.blobs.insert(id, b);
            }
        }
        for p in other.projects {
            if self.projects.iter().any(|q| q.project_id == p.project_id) {
                return Err(Error::InvalidValue {
                    what: "project id",
                    value: format!("duplicate {:?}", p.project_id),
                });
            }
            self.projects.push(p);
        }
        self.projects.sort_by(|a, b| a.project_id.cmp(&b.project_id));
        Ok(())
    }

    pub fn project(&self, project_id: &str) -> Option<&ProjectRef> {
        self.projects.iter().find(|p| p.project_id == project_id)
    }
}

/// All commits reachable from `heads` by following parent edges, heads
/// included. Result is independent of head order.
pub fn reachable_commits(
    store: &ObjectStore,
    heads: &[ObjectId],
) -> Result<BTreeSet<ObjectId>> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&ObjectId> = Vec::new();
    for h in heads {
        if !store.commits.contains_key(h) {
            return Err(Error::Dangling {
                kind: "commit",
                id: h.to_string(),
                referrer: "head list".into(),
            });
        }
        stack.push(h);
    }
    while let Some(id) = stack.pop() {
        if !seen.insert(id.clone()) {
            continue;
        }
        for p in &store.commits[id].parents {
            if !seen.contains(p) {
                stack.push(p);
            }
        }
    }
    Ok(seen)
}
