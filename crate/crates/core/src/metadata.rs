//! Per-project and per-author metadata documents aggregated from the
//! store and base maps, exported as version-tagged JSONL files.
//!
//! `n_files` counts distinct paths ever introduced, not the tip tree's
//! size. Activity ranges use committer timestamps.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basemaps::BaseMaps;
use crate::error::{Error, Result};
use crate::langclass::ExtensionTable;
use crate::object::{ObjectId, ObjectStore};

/// Single uppercase letter labeling one complete dataset build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetVersion(pub char);

impl DatasetVersion {
    pub fn new(letter: char) -> Result<Self> {
        if letter.is_ascii_uppercase() {
            Ok(DatasetVersion(letter))
        } else {
            Err(Error::InvalidValue {
                what: "dataset version",
                value: letter.to_string(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjMetadata {
    pub project_id: String,
    pub n_authors: u64,
    pub n_commits: u64,
    pub n_files: u64,
    pub first_ts: i64,
    pub last_ts: i64,
    pub lang_counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fork_of: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stars: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthMetadata {
    pub author_id: String,
    pub n_commits: u64,
    pub n_blobs: u64,
    pub n_files: u64,
    pub n_projects: u64,
    pub first_ts: i64,
    pub last_ts: i64,
    pub lang_counts: BTreeMap<String, u64>,
}

fn lang_counts_for(paths: &BTreeSet<String>, table: &ExtensionTable) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for p in paths {
        if let Some(lang) = table.classify_path(p) {
            *counts.entry(lang.as_str().to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// One document per project ref, sorted by project id.
pub fn aggregate_projects(
    maps: &BaseMaps,
    store: &ObjectStore,
    table: &ExtensionTable,
) -> Result<Vec<ProjMetadata>> {
    let mut docs = Vec::with_capacity(store.projects.len());
    for proj in &store.projects {
        let commits = maps
            .p2c
            .get(&proj.project_id)
            .ok_or_else(|| Error::UnknownProject(proj.project_id.clone()))?;
        let mut authors = BTreeSet::new();
        let mut first_ts = i64::MAX;
        let mut last_ts = i64::MIN;
        for c in commits {
            authors.insert(maps.c2a[c].as_str());
            let ts = store.commits[&ObjectId::new(c.clone())?].commit_ts;
            first_ts = first_ts.min(ts);
            last_ts = last_ts.max(ts);
        }
        let paths = maps.project_paths(&proj.project_id)?;
        docs.push(ProjMetadata {
            project_id: proj.project_id.clone(),
            n_authors: authors.len() as u64,
            n_commits: commits.len() as u64,
            n_files: paths.len() as u64,
            first_ts,
            last_ts,
            lang_counts: lang_counts_for(&paths, table),
            fork_of: None,
            stars: None,
        });
    }
    docs.sort_by(|a, b| a.project_id.cmp(&b.project_id));
    Ok(docs)
}

/// One document per distinct raw author id appearing as a commit author.
pub fn aggregate_authors(
    maps: &BaseMaps,
    store: &ObjectStore,
    table: &ExtensionTable,
) -> Result<Vec<AuthMetadata>> {
    let mut docs = Vec::with_capacity(maps.a2c.len());
    for (author, commits) in &maps.a2c {
        let mut blobs = BTreeSet::new();
        let mut paths = BTreeSet::new();
        let mut first_ts = i64::MAX;
        let mut last_ts = i64::MIN;
        for c in commits {
            if let Some(bs) = maps.c2b.get(c) {
                blobs.extend(bs.iter().cloned());
            }
            if let Some(fs) = maps.c2f.get(c) {
                paths.extend(fs.iter().cloned());
            }
            let ts = store.commits[&ObjectId::new(c.clone())?].commit_ts;
            first_ts = first_ts.min(ts);
            last_ts = last_ts.max(ts);
        }
        let n_projects = maps.a2p.get(author).map(|p| p.len()).unwrap_or(0) as u64;
        docs.push(AuthMetadata {
            author_id: author.clone(),
            n_commits: commits.len() as u64,
            n_blobs: blobs.len() as u64,
            n_files: paths.len() as u64,
            n_projects,
            first_ts,
            last_ts,
            lang_counts: lang_counts_for(&paths, table),
        });
    }
    docs.sort_by(|a, b| a.author_id.cmp(&b.author_id));
    Ok(docs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collection {
    ProjMetadata,
    AuthMetadata,
}

impl Collection {
    pub fn as_str(&self) -> &'static str {
        match self {
            Collection::ProjMetadata => "proj_metadata",
            Collection::AuthMetadata => "auth_metadata",
        }
    }
}

/// Writes `<collection>.<letter>.jsonl`, one document per line, sorted by
/// id, fixed key order, byte-reproducible. Returns the file path.
pub fn export_documents<T: Serialize>(
    docs: &[T],
    collection: Collection,
    version: DatasetVersion,
    out: &Path,
) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join(format!("{}.{}.jsonl", collection.as_str(), version.0));
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    for doc in docs {
        let line = serde_json::to_string(doc).expect("document serialization cannot fail");
        writeln!(f, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    Ok(path)
}

pub fn read_proj_documents(path: &Path) -> Result<Vec<ProjMetadata>> {
    read_documents(path)
}

pub fn read_auth_documents(path: &Path) -> Result<Vec<AuthMetadata>> {
    read_documents(path)
}

fn read_documents<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(idx, line)| {
            serde_json::from_str(line).map_err(|e| Error::Syntax {
                line: idx + 1,
                msg: format!("bad document: {e}"),
            })
        })
        .collect()
}

/// Applies `project_id,stars` CSV lines to project documents. Returns the
/// number of rows that matched no project. An optional header is skipped.
pub fn import_stars(csv_text: &str, docs: &mut [ProjMetadata]) -> Result<usize> {
    let mut by_id: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, d) in docs.iter().enumerate() {
        by_id.insert(&d.project_id, i);
    }
    let mut updates: Vec<(usize, u64)> = Vec::new();
    let mut unmatched = 0usize;
    for (idx, line) in csv_text.lines().enumerate() {
        let row = idx + 1;
        if line.is_empty() {
            continue;
        }
        let Some((project, stars)) = line.rsplit_once(',') else {
            return Err(Error::StarsRow {
                row,
                msg: "expected project_id,stars".into(),
            });
        };
        if row == 1 && stars.trim().parse::<u64>().is_err() && stars.trim() == "stars" {
            continue; // header
        }
        let stars = stars.trim();
        if stars.starts_with('-') {
            return Err(Error::StarsRow {
                row,
                msg: format!("negative stars {stars:?}"),
            });
        }
        let stars: u64 = stars.parse().map_err(|_| Error::StarsRow {
            row,
            msg: format!("bad stars value {stars:?}"),
        })?;
        match by_id.get(project) {
            Some(&i) => updates.push((i, stars)),
            None => unmatched += 1,
        }
    }
    for (i, stars) in updates {
        docs[i].stars = Some(stars);
    }
    Ok(unmatched)
}
