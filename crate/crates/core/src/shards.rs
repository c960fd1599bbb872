//! Sharded sorted key-value persistence for [`BaseMaps`].
//!
//! Layout: `<out>/<map_name>.<i>.kv` plus a `MANIFEST`. Each shard holds
//! UTF-8 lines `key<TAB>v1;v2;…`, keys sorted bytewise ascending, LF
//! endings. A key lands in shard `fnv1a64(key) % shard_count`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::basemaps::{BaseMaps, MAP_NAMES};
use crate::error::{Error, Result};

/// The pinned shard hash: FNV-1a 64 over the raw key bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 14_695_981_039_346_656_037;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(1_099_511_628_211);
    }
    h
}

pub fn shard_index(key: &str, shard_count: u32) -> u32 {
    (fnv1a64(key.as_bytes()) % shard_count as u64) as u32
}

fn escape_value(v: &str) -> String {
    v.replace('\\', "\\\\").replace(';', "\\;")
}

fn split_values(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(next) = chars.next() {
                    cur.push(next);
                }
            }
            ';' => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn check_shard_count(shard_count: u32) -> Result<()> {
    if !(1..=256).contains(&shard_count) || !shard_count.is_power_of_two() {
        return Err(Error::Config(format!(
            "shard count must be a power of two in 1..=256, got {shard_count}"
        )));
    }
    Ok(())
}

fn write_map(
    out_dir: &Path,
    map_name: &str,
    entries: impl Iterator<Item = (String, Vec<String>)>,
    shard_count: u32,
) -> Result<()> {
    let mut shards: Vec<Vec<(String, Vec<String>)>> = vec![Vec::new(); shard_count as usize];
    for (key, values) in entries {
        shards[shard_index(&key, shard_count) as usize].push((key, values));
    }
    for (i, mut shard) in shards.into_iter().enumerate() {
        shard.sort_by(|a, b| a.0.cmp(&b.0));
        let path = out_dir.join(format!("{map_name}.{i}.kv"));
        let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        for (key, values) in shard {
            let joined = values
                .iter()
                .map(|v| escape_value(v))
                .collect::<Vec<_>>()
                .join(";");
            writeln!(f, "{key}\t{joined}").map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

/// Writes all ten maps plus a MANIFEST. Output bytes are reproducible for
/// identical input.
pub fn write_shards(
    maps: &BaseMaps,
    out_dir: &Path,
    shard_count: u32,
    version: char,
) -> Result<()> {
    check_shard_count(shard_count)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let set_entries = |m: &BTreeMap<String, BTreeSet<String>>| {
        m.iter()
            .map(|(k, vs)| (k.clone(), vs.iter().cloned().collect::<Vec<_>>()))
            .collect::<Vec<_>>()
    };
    write_map(
        out_dir,
        "c2a",
        maps.c2a.iter().map(|(k, v)| (k.clone(), vec![v.clone()])),
        shard_count,
    )?;
    for (name, m) in [
        ("a2c", &maps.a2c),
        ("p2c", &maps.p2c),
        ("c2p", &maps.c2p),
        ("c2f", &maps.c2f),
        ("f2c", &maps.f2c),
        ("c2b", &maps.c2b),
        ("b2c", &maps.b2c),
        ("f2b", &maps.f2b),
        ("a2p", &maps.a2p),
    ] {
        write_map(out_dir, name, set_entries(m).into_iter(), shard_count)?;
    }

    let manifest = out_dir.join("MANIFEST");
    let mut f = fs::File::create(&manifest).map_err(|e| Error::io(&manifest, e))?;
    writeln!(f, "version\t{version}").map_err(|e| Error::io(&manifest, e))?;
    writeln!(f, "shard_count\t{shard_count}").map_err(|e| Error::io(&manifest, e))?;
    writeln!(f, "maps\t{}", MAP_NAMES.join(",")).map_err(|e| Error::io(&manifest, e))?;
    Ok(())
}

/// Reads the MANIFEST of a shard directory; returns (version, shard_count).
pub fn read_manifest(dir: &Path) -> Result<(char, u32)> {
    let path = dir.join("MANIFEST");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut version = None;
    let mut shard_count = None;
    for line in text.lines() {
        match line.split_once('\t') {
            Some(("version", v)) => version = v.chars().next(),
            Some(("shard_count", v)) => shard_count = v.parse().ok(),
            _ => {}
        }
    }
    match (version, shard_count) {
        (Some(v), Some(s)) => Ok((v, s)),
        _ => Err(Error::Config(format!(
            "{} is missing version or shard_count",
            path.display()
        ))),
    }
}

fn read_map_raw(dir: &Path, map_name: &str, shard_count: u32) -> Result<Vec<(String, Vec<String>)>> {
    let mut out = Vec::new();
    for i in 0..shard_count {
        let path: PathBuf = dir.join(format!("{map_name}.{i}.kv"));
        if !path.is_file() {
            return Err(Error::MissingShard(path));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        for (idx, line) in text.lines().enumerate() {
            let Some((key, values)) = line.split_once('\t') else {
                return Err(Error::ShardLine {
                    file: path.clone(),
                    line: idx + 1,
                });
            };
            out.push((key.to_string(), split_values(values)));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Inverse of [`write_shards`]: reloads one named map slice from disk.
pub fn read_map(dir: &Path, map_name: &str) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let (_, shard_count) = read_manifest(dir)?;
    let raw = read_map_raw(dir, map_name, shard_count)?;
    Ok(raw
        .into_iter()
        .map(|(k, vs)| (k, vs.into_iter().collect()))
        .collect())
}

/// Reloads every map into a [`BaseMaps`].
pub fn read_shards(dir: &Path) -> Result<BaseMaps> {
    let (_, shard_count) = read_manifest(dir)?;
    let mut maps = BaseMaps::default();
    for (key, mut values) in read_map_raw(dir, "c2a", shard_count)? {
        if values.len() != 1 {
            return Err(Error::Config(format!("c2a key {key} has {} values", values.len())));
        }
        maps.c2a.insert(key, values.pop().unwrap());
    }
    for (name, target) in [
        ("a2c", &mut maps.a2c),
        ("p2c", &mut maps.p2c),
        ("c2p", &mut maps.c2p),
        ("c2f", &mut maps.c2f),
        ("f2c", &mut maps.f2c),
        ("c2b", &mut maps.c2b),
        ("b2c", &mut maps.b2c),
        ("f2b", &mut maps.f2b),
        ("a2p", &mut maps.a2p),
    ] {
        for (key, values) in read_map_raw(dir, name, shard_count)? {
            target.insert(key, values.into_iter().collect());
        }
    }
    Ok(maps)
}
