//! Synthetic corpus builders used by unit, integration, and acceptance
//! tests. Ids are deterministic fake hashes, so identical subtrees and
//! blobs share ids exactly like content-addressed git objects.

use std::collections::BTreeMap;

use crate::object::{
    AuthorId, BlobStats, CommitRecord, EntryKind, ObjectId, ObjectStore, ProjectRef,
    TreeEntry, TreeRecord,
};
use crate::shards::fnv1a64;

pub fn oid(hex: &str) -> ObjectId {
    ObjectId::new(hex).unwrap()
}

fn fake_id(tag: &str, content: &str) -> ObjectId {
    let h = fnv1a64(format!("{tag}\0{content}").as_bytes());
    let h2 = fnv1a64(format!("{tag}\x01{content}").as_bytes());
    ObjectId::new(format!("{h:016x}{h2:016x}00000000")).unwrap()
}

#[derive(Default)]
pub struct StoreBuilder {
    store: ObjectStore,
    commit_seq: u64,
    blob_overrides: BTreeMap<String, (u64, u64, bool)>,
}

impl StoreBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pin size/line_count/is_binary for a blob token before any commit
    /// references it.
    pub fn blob(&mut self, token: &str, size: u64, line_count: u64, is_binary: bool) {
        self.blob_overrides
            .insert(token.to_string(), (size, line_count, is_binary));
    }

    fn blob_id(&mut self, token: &str) -> ObjectId {
        let id = fake_id("blob", token);
        if !self.store.blobs.contains_key(&id) {
            let (size, line_count, is_binary) = self
                .blob_overrides
                .get(token)
                .copied()
                .unwrap_or((100, 10, false));
            self.store.blobs.insert(
                id.clone(),
                BlobStats {
                    id: id.clone(),
                    size,
                    line_count,
                    is_binary,
                },
            );
        }
        id
    }

    /// Builds the nested tree for a full snapshot of `/`-joined paths and
    /// returns the root tree id. Identical snapshots share tree ids.
    fn tree_for(&mut self, files: &[(&str, &str)]) -> ObjectId {
        #[derive(Default)]
        struct Node<'a> {
            blobs: BTreeMap<String, &'a str>,
            dirs: BTreeMap<String, Node<'a>>,
        }
        let mut root = Node::default();
        for (path, token) in files {
            let mut node = &mut root;
            let segs: Vec<&str> = path.split('/').collect();
            for seg in &segs[..segs.len() - 1] {
                node = node.dirs.entry(seg.to_string()).or_default();
            }
            node.blobs.insert(segs[segs.len() - 1].to_string(), token);
        }
        fn emit(b: &mut StoreBuilder, node: &Node) -> ObjectId {
            let mut entries = Vec::new();
            for (name, sub) in &node.dirs {
                let child = emit(b, sub);
                entries.push(TreeEntry {
                    mode: "040000".into(),
                    kind: EntryKind::Tree,
                    child,
                    name: name.clone(),
                });
            }
            for (name, token) in &node.blobs {
                let child = b.blob_id(token);
                entries.push(TreeEntry {
                    mode: "100644".into(),
                    kind: EntryKind::Blob,
                    child,
                    name: name.clone(),
                });
            }
            entries.sort_by(|a, b| a.name.cmp(&b.name));
            let canon: String = entries
                .iter()
                .map(|e| format!("{} {} {}\n", e.mode, e.child, e.name))
                .collect();
            let id = fake_id("tree", &canon);
            b.store
                .trees
                .entry(id.clone())
                .or_insert_with(|| TreeRecord {
                    id: id.clone(),
                    entries,
                });
            id
        }
        emit(self, &root)
    }

    /// Adds a commit whose tree is the full snapshot `files`. `author` is a
    /// short handle expanded to `author <author@example.com>`. Returns the
    /// commit id hex.
    pub fn commit(
        &mut self,
        author: &str,
        ts: i64,
        parents: &[&str],
        files: &[(&str, &str)],
    ) -> String {
        self.commit_with_committer(author, author, ts, parents, files)
    }

    pub fn commit_with_committer(
        &mut self,
        author: &str,
        committer: &str,
        ts: i64,
        parents: &[&str],
        files: &[(&str, &str)],
    ) -> String {
        let tree = self.tree_for(files);
        self.commit_seq += 1;
        let id = fake_id("commit", &format!("{}", self.commit_seq));
        let author = AuthorId::new(format!("{author} <{author}@example.com>")).unwrap();
        let committer =
            AuthorId::new(format!("{committer} <{committer}@example.com>")).unwrap();
        let rec = CommitRecord {
            id: id.clone(),
            tree,
            parents: parents.iter().map(|p| oid(p)).collect(),
            author,
            author_ts: ts,
            committer,
            commit_ts: ts,
        };
        self.store.commits.insert(id.clone(), rec);
        id.to_string()
    }

    /// Adds a commit with a fully spelled-out raw author id.
    pub fn commit_raw_author(
        &mut self,
        raw_author: &str,
        ts: i64,
        parents: &[&str],
        files: &[(&str, &str)],
    ) -> String {
        let tree = self.tree_for(files);
        self.commit_seq += 1;
        let id = fake_id("commit", &format!("{}", self.commit_seq));
        let author = AuthorId::new(raw_author).unwrap();
        let rec = CommitRecord {
            id: id.clone(),
            tree,
            parents: parents.iter().map(|p| oid(p)).collect(),
            author: author.clone(),
            author_ts: ts,
            committer: author,
            commit_ts: ts,
        };
        self.store.commits.insert(id.clone(), rec);
        id.to_string()
    }

    pub fn project(&mut self, project_id: &str, heads: &[&str]) {
        self.store.projects.push(ProjectRef {
            project_id: project_id.to_string(),
            heads: heads.iter().map(|h| oid(h)).collect(),
        });
    }

    pub fn build(mut self) -> ObjectStore {
        self.store
            .projects
            .sort_by(|a, b| a.project_id.cmp(&b.project_id));
        self.store.validate().expect("builder produced invalid store");
        self.store
    }
}

/// Tiny deterministic RNG for corpus generation (same recurrence the
/// sampler pins, reused here so tests need no external RNG crate).
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// Generates a random but valid store: several projects, root/linear/merge
/// commits, a handful of authors and file paths, occasional shared history.
pub fn random_store(seed: u64, n_projects: usize, commits_per_project: usize) -> ObjectStore {
    let mut rng = TestRng::new(seed);
    let mut b = StoreBuilder::new();
    let authors = ["ann", "bob", "cat", "dan", "eve", "fay"];
    let exts = ["py", "c", "rs", "java", "txt", "md"];
    let mut all_heads: Vec<Vec<String>> = Vec::new();

    for p in 0..n_projects {
        // some projects fork off an earlier project's history
        let fork_base: Option<String> = if p > 0 && rng.below(4) == 0 {
            let donor = &all_heads[rng.below(p as u64) as usize];
            Some(donor[rng.below(donor.len() as u64) as usize].clone())
        } else {
            None
        };
        let mut tips: Vec<String> = fork_base.into_iter().collect();
        let mut snapshot: Vec<(String, String)> = Vec::new();
        let base_ts = 1_400_000_000 + (p as i64) * 10_000;
        for i in 0..commits_per_project {
            let author = authors[rng.below(authors.len() as u64) as usize];
            let ts = base_ts + (i as i64) * 3_600 + rng.below(3_600) as i64;
            // mutate the snapshot
            let n_edits = 1 + rng.below(3);
            for _ in 0..n_edits {
                let ext = exts[rng.below(exts.len() as u64) as usize];
                let fname = format!("src/f{}.{ext}", rng.below(12));
                let token = format!("v{}", rng.below(40));
                snapshot.retain(|(f, _)| *f != fname);
                snapshot.push((fname, token));
            }
            snapshot.sort();
            let files: Vec<(&str, &str)> = snapshot
                .iter()
                .map(|(f, t)| (f.as_str(), t.as_str()))
                .collect();
            let parents: Vec<&str> = match tips.len() {
                0 => vec![],
                1 => vec![tips[0].as_str()],
                _ => {
                    if rng.below(5) == 0 {
                        // merge the two most recent tips
                        vec![tips[tips.len() - 1].as_str(), tips[tips.len() - 2].as_str()]
                    } else {
                        vec![tips[tips.len() - 1].as_str()]
                    }
                }
            };
            let merged = parents.len() > 1;
            let c = b.commit(author, ts, &parents, &files);
            if merged {
                tips.pop();
                tips.pop();
            } else if !tips.is_empty() && rng.below(6) == 0 && tips.len() < 3 {
                // start a side branch: keep the old tip too
            } else if !tips.is_empty() {
                tips.pop();
            }
            tips.push(c);
        }
        let head_refs: Vec<&str> = tips.iter().map(|s| s.as_str()).collect();
        b.project(&format!("proj{p:03}"), &head_refs);
        all_heads.push(tips);
    }
    b.build()
}
