//! Object Stream v1: a portable, line-oriented serialization of an
//! [`ObjectStore`]. Tab-separated fields, LF endings, `#` comments.
//! References may be forward; everything must resolve by end of stream.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::object::{
    AuthorId, BlobStats, CommitRecord, EntryKind, ObjectId, ObjectStore, ProjectRef,
    TreeEntry, TreeRecord,
};

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_id(tok: &str, line: usize) -> Result<ObjectId> {
    ObjectId::new(tok.to_string()).map_err(|_| syntax(line, format!("bad object id {tok:?}")))
}

/// Reads a full Object Stream v1 document and returns a validated store.
/// Duplicate records with identical content are idempotent.
pub fn read_object_stream(reader: impl BufRead) -> Result<ObjectStore> {
    let mut store = ObjectStore::default();
    let mut lines = reader.lines().enumerate();
    let mut pending_tree: Option<(TreeRecord, usize)> = None;

    while let Some((idx, line)) = lines.next() {
        let lineno = idx + 1;
        let line = line.map_err(|e| syntax(lineno, format!("read error: {e}")))?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();

        if let Some((ref mut tree, remaining)) = pending_tree {
            if fields[0] != "E" {
                return Err(syntax(
                    lineno,
                    format!("expected E line for tree {}, got {:?}", tree.id, fields[0]),
                ));
            }
            if fields.len() != 5 {
                return Err(syntax(lineno, "E line needs 5 fields"));
            }
            let kind = match fields[2] {
                "blob" => EntryKind::Blob,
                "tree" => EntryKind::Tree,
                other => return Err(syntax(lineno, format!("bad entry kind {other:?}"))),
            };
            tree.entries.push(TreeEntry {
                mode: fields[1].to_string(),
                kind,
                child: parse_id(fields[3], lineno)?,
                name: fields[4].to_string(),
            });
            if tree.entries.len() == remaining {
                let (tree, _) = pending_tree.take().unwrap();
                tree.validate()?;
                insert_tree(&mut store, tree)?;
            }
            continue;
        }

        match fields[0] {
            "C" => {
                if fields.len() != 8 {
                    return Err(syntax(lineno, "C line needs 8 fields"));
                }
                let id = parse_id(fields[1], lineno)?;
                let tree = parse_id(fields[2], lineno)?;
                let parents = if fields[3] == "-" {
                    Vec::new()
                } else {
                    fields[3]
                        .split(',')
                        .map(|t| parse_id(t, lineno))
                        .collect::<Result<Vec<_>>>()?
                };
                let author = AuthorId::new(fields[4].to_string())
                    .map_err(|_| syntax(lineno, format!("bad author id {:?}", fields[4])))?;
                let author_ts: i64 = fields[5]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad author timestamp"))?;
                let committer = AuthorId::new(fields[6].to_string())
                    .map_err(|_| syntax(lineno, format!("bad committer id {:?}", fields[6])))?;
                let commit_ts: i64 = fields[7]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad commit timestamp"))?;
                let rec = CommitRecord {
                    id: id.clone(),
                    tree,
                    parents,
                    author,
                    author_ts,
                    committer,
                    commit_ts,
                };
                rec.validate()?;
                if let Some(existing) = store.commits.get(&id) {
                    if *existing != rec {
                        return Err(Error::ConflictingDuplicate { id: id.to_string() });
                    }
                } else {
                    store.commits.insert(id, rec);
                }
            }
            "T" => {
                if fields.len() != 3 {
                    return Err(syntax(lineno, "T line needs 3 fields"));
                }
                let id = parse_id(fields[1], lineno)?;
                let n: usize = fields[2]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad entry count"))?;
                let tree = TreeRecord {
                    id,
                    entries: Vec::with_capacity(n),
                };
                if n == 0 {
                    tree.validate()?;
                    insert_tree(&mut store, tree)?;
                } else {
                    pending_tree = Some((tree, n));
                }
            }
            "B" => {
                if fields.len() != 5 {
                    return Err(syntax(lineno, "B line needs 5 fields"));
                }
                let id = parse_id(fields[1], lineno)?;
                let size: u64 = fields[2].parse().map_err(|_| syntax(lineno, "bad size"))?;
                let line_count: u64 = fields[3]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad line count"))?;
                let is_binary = match fields[4] {
                    "0" => false,
                    "1" => true,
                    other => return Err(syntax(lineno, format!("bad binary flag {other:?}"))),
                };
                let rec = BlobStats {
                    id: id.clone(),
                    size,
                    line_count,
                    is_binary,
                };
                rec.validate()?;
                if let Some(existing) = store.blobs.get(&id) {
                    if *existing != rec {
                        return Err(Error::ConflictingDuplicate { id: id.to_string() });
                    }
                } else {
                    store.blobs.insert(id, rec);
                }
            }
            "P" => {
                if fields.len() != 3 {
                    return Err(syntax(lineno, "P line needs 3 fields"));
                }
                let heads = fields[2]
                    .split(',')
                    .map(|t| parse_id(t, lineno))
                    .collect::<Result<Vec<_>>>()?;
                store.projects.push(ProjectRef {
                    project_id: fields[1].to_string(),
                    heads,
                });
            }
            other => return Err(syntax(lineno, format!("unknown record type {other:?}"))),
        }
    }

    if let Some((tree, n)) = pending_tree {
        return Err(syntax(
            0,
            format!("stream ended inside tree {} ({} of {n} entries)", tree.id, tree.entries.len()),
        ));
    }
    store.projects.sort_by(|a, b| a.project_id.cmp(&b.project_id));
    store.validate()?;
    Ok(store)
}

fn insert_tree(store: &mut ObjectStore, tree: TreeRecord) -> Result<()> {
    if let Some(existing) = store.trees.get(&tree.id) {
        if *existing != tree {
            return Err(Error::ConflictingDuplicate {
                id: tree.id.to_string(),
            });
        }
        Ok(())
    } else {
        store.trees.insert(tree.id.clone(), tree);
        Ok(())
    }
}

/// Serializes a store in a canonical order (commits, trees, blobs,
/// projects, each sorted by id), so identical stores produce identical
/// bytes.
pub fn write_object_stream(store: &ObjectStore, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "# object stream v1")?;
    for c in store.commits.values() {
        let parents = if c.parents.is_empty() {
            "-".to_string()
        } else {
            c.parents
                .iter()
                .map(|p| p.as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(
            w,
            "C\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.id,
            c.tree,
            parents,
            c.author.raw(),
            c.author_ts,
            c.committer.raw(),
            c.commit_ts
        )?;
    }
    for t in store.trees.values() {
        writeln!(w, "T\t{}\t{}", t.id, t.entries.len())?;
        for e in &t.entries {
            writeln!(
                w,
                "E\t{}\t{}\t{}\t{}",
                e.mode,
                e.kind.as_str(),
                e.child,
                e.name
            )?;
        }
    }
    for b in store.blobs.values() {
        writeln!(
            w,
            "B\t{}\t{}\t{}\t{}",
            b.id,
            b.size,
            b.line_count,
            if b.is_binary { 1 } else { 0 }
        )?;
    }
    for p in &store.projects {
        let heads = p
            .heads
            .iter()
            .map(|h| h.as_str())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "P\t{}\t{}", p.project_id, heads)?;
    }
    Ok(())
}
