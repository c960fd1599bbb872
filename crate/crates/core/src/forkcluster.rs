//! Fork-cluster detection: projects sharing commit history are grouped by
//! connected components over an overlap-coefficient graph, with widely
//! shared utility commits excluded so vendored dependencies do not glue
//! unrelated projects together.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::basemaps::BaseMaps;
use crate::error::{Error, Result};
use crate::metadata::ProjMetadata;
use crate::object::{ObjectId, ObjectStore};

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_K_MAX: usize = 100;

/// One unordered project pair with shared eligible-commit statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ForkEdge {
    pub a: String,
    pub b: String,
    pub shared: u64,
    /// shared / min(|p2c(a)|, |p2c(b)|)
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForkCluster {
    pub members: BTreeSet<String>,
    pub original: String,
}

/// Commits shared by at least two and at most `k_max` projects. Wider
/// sharing marks a utility commit, not a fork relation.
pub fn eligible_commits(maps: &BaseMaps, k_max: usize) -> BTreeSet<String> {
    maps.c2p
        .iter()
        .filter(|(_, ps)| ps.len() >= 2 && ps.len() <= k_max)
        .map(|(c, _)| c.clone())
        .collect()
}

/// One edge per project pair sharing ≥1 eligible commit.
pub fn shared_commit_graph(maps: &BaseMaps, k_max: usize) -> Vec<ForkEdge> {
    let eligible = eligible_commits(maps, k_max);
    let mut shared: BTreeMap<(String, String), u64> = BTreeMap::new();
    for c in &eligible {
        let projects = &maps.c2p[c];
        let list: Vec<&String> = projects.iter().collect();
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                *shared
                    .entry((list[i].clone(), list[j].clone()))
                    .or_insert(0) += 1;
            }
        }
    }
    shared
        .into_iter()
        .map(|((a, b), count)| {
            let min_size = maps.p2c[&a].len().min(maps.p2c[&b].len()) as f64;
            ForkEdge {
                a,
                b,
                shared: count,
                overlap: count as f64 / min_size,
            }
        })
        .collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components over edges with overlap ≥ tau; singletons are
/// dropped. Originals are not elected here.
pub fn cluster(edges: &[ForkEdge], tau: f64) -> Result<Vec<BTreeSet<String>>> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Config(format!("tau must be in (0,1], got {tau}")));
    }
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for e in edges {
        let n = ids.len();
        ids.entry(&e.a).or_insert(n);
        let n = ids.len();
        ids.entry(&e.b).or_insert(n);
    }
    let mut uf = UnionFind::new(ids.len());
    for e in edges {
        if e.overlap >= tau {
            uf.union(ids[e.a.as_str()], ids[e.b.as_str()]);
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (name, &idx) in &ids {
        groups
            .entry(uf.find(idx))
            .or_default()
            .insert(name.to_string());
    }
    Ok(groups.into_values().filter(|g| g.len() >= 2).collect())
}

/// The member holding the earliest commit over the union of members'
/// commits wins; ties break by earliest commit id bytewise, then by
/// project id bytewise.
pub fn elect_original(
    members: &BTreeSet<String>,
    maps: &BaseMaps,
    store: &ObjectStore,
) -> Result<String> {
    assert!(members.len() >= 2, "clusters have at least two members");
    let mut earliest: Option<(i64, String)> = None;
    for m in members {
        let commits = maps
            .p2c
            .get(m)
            .ok_or_else(|| Error::UnknownProject(m.clone()))?;
        for c in commits {
            let ts = store.commits[&ObjectId::new(c.clone())?].commit_ts;
            let candidate = (ts, c.clone());
            if earliest.as_ref().is_none_or(|e| candidate < *e) {
                earliest = Some(candidate);
            }
        }
    }
    let (_, commit) = earliest.expect("members have commits");
    // bytewise-least member containing the earliest commit
    let original = members
        .iter()
        .find(|m| maps.p2c[*m].contains(&commit))
        .expect("some member contains the earliest commit");
    Ok(original.clone())
}

/// Full pass: graph, components, election. Clusters come back sorted by
/// original.
pub fn fork_clusters(
    maps: &BaseMaps,
    store: &ObjectStore,
    tau: f64,
    k_max: usize,
) -> Result<Vec<ForkCluster>> {
    if k_max < 2 {
        return Err(Error::Config(format!("k_max must be >= 2, got {k_max}")));
    }
    let edges = shared_commit_graph(maps, k_max);
    let mut clusters = Vec::new();
    for members in cluster(&edges, tau)? {
        let original = elect_original(&members, maps, store)?;
        clusters.push(ForkCluster { members, original });
    }
    clusters.sort_by(|a, b| a.original.cmp(&b.original));
    Ok(clusters)
}

/// Sets `fork_of` on every non-original member's document.
pub fn apply_fork_of(clusters: &[ForkCluster], docs: &mut [ProjMetadata]) {
    let mut fork_of: BTreeMap<&str, &str> = BTreeMap::new();
    for c in clusters {
        for m in &c.members {
            if *m != c.original {
                fork_of.insert(m, &c.original);
            }
        }
    }
    for d in docs {
        if let Some(orig) = fork_of.get(d.project_id.as_str()) {
            d.fork_of = Some(orig.to_string());
        }
    }
}

/// `fork_clusters.<version>.txt`: lines `original<TAB>member1;member2;…`,
/// sorted by original.
pub fn write_clusters(clusters: &[ForkCluster], mut w: impl Write) -> std::io::Result<()> {
    for c in clusters {
        let members: Vec<&str> = c.members.iter().map(|m| m.as_str()).collect();
        writeln!(w, "{}\t{}", c.original, members.join(";"))?;
    }
    Ok(())
}
