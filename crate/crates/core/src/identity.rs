//! Author-identity disambiguation: normalized-name similarity, commit
//! hour patterns, and touched-file overlap, merged via union-find above a
//! threshold. Commit-message stylometry is deliberately not implemented.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use crate::basemaps::BaseMaps;
use crate::error::{Error, Result};
use crate::object::{ObjectId, ObjectStore};

pub const DEFAULT_THETA: f64 = 0.75;

/// Feature weights for the similarity score. The defaults are declared
/// configuration, not derived values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub name: f64,
    pub email: f64,
    pub hour: f64,
    pub file: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            name: 0.4,
            email: 0.2,
            hour: 0.2,
            file: 0.2,
        }
    }
}

/// Disjoint author groups with a bytewise-least representative each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityPartition {
    pub groups: Vec<BTreeSet<String>>,
}

impl IdentityPartition {
    pub fn representative(group: &BTreeSet<String>) -> &str {
        group.iter().next().expect("groups are non-empty")
    }

    /// Groups sorted by representative.
    pub fn sorted(mut self) -> Self {
        self.groups.sort_by(|a, b| {
            Self::representative(a).cmp(Self::representative(b))
        });
        self
    }
}

/// Lowercases the name, collapses punctuation and repeated whitespace to
/// single spaces, and extracts the lowercased email and its local part.
pub fn normalize_author(raw: &str) -> (String, String, String) {
    let lt = raw.find('<').unwrap_or(raw.len());
    let name_part = &raw[..lt];
    let mut name = String::new();
    let mut last_space = true;
    for c in name_part.to_lowercase().chars() {
        if c.is_alphanumeric() {
            name.push(c);
            last_space = false;
        } else if !last_space {
            name.push(' ');
            last_space = true;
        }
    }
    let name = name.trim_end().to_string();

    let email = match (raw.find('<'), raw.find('>')) {
        (Some(l), Some(g)) if l < g => raw[l + 1..g].to_lowercase(),
        _ => String::new(),
    };
    let local = email.split('@').next().unwrap_or("").to_string();
    (name, email, local)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn name_similarity(a: &str, b: &str) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let max_len = a.chars().count().max(b.chars().count());
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

/// 24-bin histogram of the author's commit hours, UTC.
pub fn hour_histogram(author: &str, maps: &BaseMaps, store: &ObjectStore) -> Result<[u64; 24]> {
    let commits = maps
        .a2c
        .get(author)
        .ok_or_else(|| Error::UnknownAuthor(author.to_string()))?;
    let mut bins = [0u64; 24];
    for c in commits {
        let ts = store.commits[&ObjectId::new(c.clone())?].commit_ts;
        bins[((ts / 3600) % 24) as usize] += 1;
    }
    Ok(bins)
}

fn cosine(a: &[u64; 24], b: &[u64; 24]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| (*x as f64) * (*y as f64)).sum();
    let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        // authors always have commits; this covers degenerate inputs only
        return f64::from(u8::from(na == nb));
    }
    dot / (na * nb)
}

fn touched_paths<'a>(author: &str, maps: &'a BaseMaps) -> BTreeSet<&'a str> {
    let mut paths = BTreeSet::new();
    if let Some(commits) = maps.a2c.get(author) {
        for c in commits {
            if let Some(fs) = maps.c2f.get(c) {
                paths.extend(fs.iter().map(|s| s.as_str()));
            }
        }
    }
    paths
}

fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    inter / union
}

/// Weighted similarity in [0,1]. When either normalized name is empty the
/// name weight is redistributed equally to the other three features.
pub fn similarity(
    a: &str,
    b: &str,
    weights: Weights,
    maps: &BaseMaps,
    store: &ObjectStore,
) -> Result<f64> {
    let (name_a, _, local_a) = normalize_author(a);
    let (name_b, _, local_b) = normalize_author(b);

    let email_match = f64::from(u8::from(local_a == local_b));
    let hour_sim = cosine(
        &hour_histogram(a, maps, store)?,
        &hour_histogram(b, maps, store)?,
    );
    let file_overlap = jaccard(&touched_paths(a, maps), &touched_paths(b, maps));

    let score = if name_a.is_empty() || name_b.is_empty() {
        let extra = weights.name / 3.0;
        (weights.email + extra) * email_match
            + (weights.hour + extra) * hour_sim
            + (weights.file + extra) * file_overlap
    } else {
        weights.name * name_similarity(&name_a, &name_b)
            + weights.email * email_match
            + weights.hour * hour_sim
            + weights.file * file_overlap
    };
    Ok(score.clamp(0.0, 1.0))
}

/// Candidate pairs that share a name token, an email local part, or at
/// least one touched path. Keeps scoring sub-quadratic and reproducible.
fn candidate_pairs(authors: &[String], maps: &BaseMaps) -> BTreeSet<(usize, usize)> {
    let mut by_token: HashMap<String, Vec<usize>> = HashMap::new();
    let mut by_local: HashMap<String, Vec<usize>> = HashMap::new();
    let mut by_path: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, a) in authors.iter().enumerate() {
        let (name, _, local) = normalize_author(a);
        for tok in name.split(' ').filter(|t| !t.is_empty()) {
            by_token.entry(tok.to_string()).or_default().push(i);
        }
        if !local.is_empty() {
            by_local.entry(local).or_default().push(i);
        }
        for p in touched_paths(a, maps) {
            by_path.entry(p).or_default().push(i);
        }
    }
    let mut pairs = BTreeSet::new();
    let buckets = by_token
        .values()
        .chain(by_local.values())
        .chain(by_path.values());
    for bucket in buckets {
        for i in 0..bucket.len() {
            for j in i + 1..bucket.len() {
                let (x, y) = (bucket[i].min(bucket[j]), bucket[i].max(bucket[j]));
                if x != y {
                    pairs.insert((x, y));
                }
            }
        }
    }
    pairs
}

/// Union-find over candidate pairs scoring ≥ theta. Transitive closure is
/// intentional; the result does not depend on enumeration order.
pub fn merge(
    authors: &[String],
    theta: f64,
    weights: Weights,
    maps: &BaseMaps,
    store: &ObjectStore,
) -> Result<IdentityPartition> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Config(format!("theta must be in (0,1], got {theta}")));
    }
    let mut sorted: Vec<String> = authors.to_vec();
    sorted.sort();
    sorted.dedup();

    let mut parent: Vec<usize> = (0..sorted.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }

    for (i, j) in candidate_pairs(&sorted, maps) {
        if similarity(&sorted[i], &sorted[j], weights, maps, store)? >= theta {
            let ri = find(&mut parent, i);
            let rj = find(&mut parent, j);
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for i in 0..sorted.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(sorted[i].clone());
    }
    Ok(IdentityPartition {
        groups: groups.into_values().collect(),
    }
    .sorted())
}

/// `identities.<version>.txt`: `representative<TAB>alias1;alias2;…`
/// sorted by representative. Singleton groups emit an empty alias list so
/// the file describes the full partition.
pub fn write_partition(partition: &IdentityPartition, mut w: impl Write) -> std::io::Result<()> {
    for group in &partition.groups {
        let rep = IdentityPartition::representative(group);
        let aliases: Vec<&str> = group
            .iter()
            .map(|s| s.as_str())
            .filter(|s| *s != rep)
            .collect();
        writeln!(w, "{rep}\t{}", aliases.join(";"))?;
    }
    Ok(())
}
