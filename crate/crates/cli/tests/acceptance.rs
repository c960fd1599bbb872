//! Acceptance gate: ten end-to-end criteria, one test (and one printed
//! pass/fail line) each. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion lines.
//!
//! Oracles here are deliberately naive reimplementations living inside the
//! test, independent of the library's optimized paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use gitmap_core::basemaps::{
    build_basemaps, expand_tree, introduced_files, introduced_files_oracle,
};
use gitmap_core::forkcluster;
use gitmap_core::identity::{self, Weights};
use gitmap_core::ingest::{read_object_stream, scan_repository, write_object_stream};
use gitmap_core::langclass::ExtensionTable;
use gitmap_core::metadata::{aggregate_authors, aggregate_projects};
use gitmap_core::object::{reachable_commits, ObjectId, ObjectStore};
use gitmap_core::sampler;
use gitmap_core::shards::{read_shards, write_shards};
use gitmap_core::testutil::{random_store, StoreBuilder, TestRng};

fn report(n: u32, what: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("criterion {n} ({what}): PASS"),
        Err(e) => {
            println!("criterion {n} ({what}): FAIL");
            resume_unwind(e);
        }
    }
}

fn gitmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gitmap"))
        .args(args)
        .output()
        .expect("spawn gitmap")
}

fn write_stream(store: &ObjectStore, dir: &Path) {
    let mut buf = Vec::new();
    write_object_stream(store, &mut buf).unwrap();
    fs::write(dir.join("store.stream"), buf).unwrap();
}

/// 8 projects x (1 root + 6 diamond blocks of 4 commits) = 200 commits,
/// 48 of them merges. Blob tokens are tied to their path so content never
/// crosses paths.
fn merge_heavy_corpus() -> ObjectStore {
    let mut b = StoreBuilder::new();
    let authors = ["ann", "bob", "cat", "dan"];
    for p in 0..8 {
        let pfx = format!("p{p}");
        let mut snapshot: Vec<(String, String)> = vec![
            (format!("{pfx}/README.md"), format!("{pfx}/README.md#0")),
            (format!("{pfx}/src/main.py"), format!("{pfx}/src/main.py#0")),
        ];
        let ts0 = 1_500_000_000 + p as i64 * 100_000;
        let files: Vec<(&str, &str)> =
            snapshot.iter().map(|(f, t)| (f.as_str(), t.as_str())).collect();
        let mut mainline = b.commit(authors[p % 4], ts0, &[], &files);
        for k in 0..6 {
            let ts = ts0 + 1000 * (k as i64 + 1);
            // straight side: edit an existing file
            let edited = format!("{pfx}/src/main.py");
            let mut snap_a = snapshot.clone();
            snap_a.retain(|(f, _)| *f != edited);
            snap_a.push((edited.clone(), format!("{edited}#a{k}")));
            snap_a.sort();
            let fa: Vec<(&str, &str)> =
                snap_a.iter().map(|(f, t)| (f.as_str(), t.as_str())).collect();
            let a = b.commit(authors[k % 4], ts, &[&mainline], &fa);

            // branch side: two commits adding new files
            let nf1 = format!("{pfx}/src/mod{k}.py");
            let mut snap_b1 = snapshot.clone();
            snap_b1.push((nf1.clone(), format!("{nf1}#0")));
            snap_b1.sort();
            let fb1: Vec<(&str, &str)> =
                snap_b1.iter().map(|(f, t)| (f.as_str(), t.as_str())).collect();
            let b1 = b.commit(authors[(k + 1) % 4], ts + 10, &[&mainline], &fb1);

            let nf2 = format!("{pfx}/docs/ch{k}.md");
            let mut snap_b2 = snap_b1.clone();
            snap_b2.push((nf2.clone(), format!("{nf2}#0")));
            snap_b2.sort();
            let fb2: Vec<(&str, &str)> =
                snap_b2.iter().map(|(f, t)| (f.as_str(), t.as_str())).collect();
            let b2 = b.commit(authors[(k + 2) % 4], ts + 20, &[&b1], &fb2);

            // merge takes the union plus its own conflict-resolution edit
            let mut snap_m = snap_b2.clone();
            snap_m.retain(|(f, _)| *f != edited);
            snap_m.push((edited.clone(), format!("{edited}#m{k}")));
            snap_m.sort();
            let fm: Vec<(&str, &str)> =
                snap_m.iter().map(|(f, t)| (f.as_str(), t.as_str())).collect();
            let m = b.commit(authors[(k + 3) % 4], ts + 30, &[&a, &b2], &fm);
            snapshot = snap_m;
            mainline = m;
        }
        b.project(&pfx, &[&mainline]);
    }
    b.build()
}

#[test]
fn criterion_01_introduced_files_oracle() {
    report(1, "introduced_files matches brute-force oracle", || {
        let start = Instant::now();
        let store = merge_heavy_corpus();
        assert!(store.commits.len() >= 200, "{} commits", store.commits.len());
        let merges = store.commits.values().filter(|c| c.parents.len() >= 2).count();
        assert!(merges >= 20, "{merges} merges");
        let roots = store.commits.values().filter(|c| c.parents.is_empty()).count();
        assert!(roots > 0);
        for id in store.commits.keys() {
            let fast = introduced_files(&store, id).unwrap();
            let slow = introduced_files_oracle(&store, id).unwrap();
            assert_eq!(fast, slow, "mismatch at {id}");
        }
        assert!(start.elapsed().as_secs() < 10, "took {:?}", start.elapsed());
    });
}

fn big_corpus() -> ObjectStore {
    random_store(2024, 55, 20)
}

fn assert_inverse(fwd: &BTreeMap<String, BTreeSet<String>>, rev: &BTreeMap<String, BTreeSet<String>>) {
    for (x, ys) in fwd {
        for y in ys {
            assert!(rev.get(y).is_some_and(|xs| xs.contains(x)), "{x} -> {y} not inverted");
        }
    }
    for (y, xs) in rev {
        for x in xs {
            assert!(fwd.get(x).is_some_and(|ys| ys.contains(y)), "{y} -> {x} not inverted");
        }
    }
}

#[test]
fn criterion_02_inverse_map_consistency() {
    report(2, "bidirectional maps invert, author commits conserve", || {
        let start = Instant::now();
        let store = big_corpus();
        assert!(store.commits.len() >= 1000);
        assert!(store.projects.len() >= 50);
        let maps = build_basemaps(&store).unwrap();

        // c2a is single-valued; lift it for the shared check
        let c2a_lifted: BTreeMap<String, BTreeSet<String>> = maps
            .c2a
            .iter()
            .map(|(c, a)| (c.clone(), BTreeSet::from([a.clone()])))
            .collect();
        assert_inverse(&c2a_lifted, &maps.a2c);
        assert_inverse(&maps.p2c, &maps.c2p);
        assert_inverse(&maps.c2f, &maps.f2c);
        assert_inverse(&maps.c2b, &maps.b2c);

        let auth = aggregate_authors(&maps, &store, &ExtensionTable::default()).unwrap();
        let total: u64 = auth.iter().map(|d| d.n_commits).sum();
        let heads: Vec<ObjectId> = store
            .projects
            .iter()
            .flat_map(|p| p.heads.iter().cloned())
            .collect();
        let distinct = reachable_commits(&store, &heads).unwrap().len() as u64;
        assert_eq!(total, distinct);
        assert!(start.elapsed().as_secs() < 20, "took {:?}", start.elapsed());
    });
}

#[test]
fn criterion_03_metadata_oracle() {
    report(3, "project metadata matches naive traversal", || {
        let store = big_corpus();
        let maps = build_basemaps(&store).unwrap();
        let table = ExtensionTable::default();
        let docs = aggregate_projects(&maps, &store, &table).unwrap();
        let by_id: BTreeMap<&str, _> =
            docs.iter().map(|d| (d.project_id.as_str(), d)).collect();

        let mut rng = TestRng::new(99);
        for _ in 0..10 {
            let proj = &store.projects[rng.below(store.projects.len() as u64) as usize];

            // naive traversal: walk parents by hand, expand trees fully
            let mut stack: Vec<ObjectId> = proj.heads.clone();
            let mut seen: BTreeSet<ObjectId> = BTreeSet::new();
            while let Some(id) = stack.pop() {
                if seen.insert(id.clone()) {
                    stack.extend(store.commits[&id].parents.iter().cloned());
                }
            }
            let mut authors = BTreeSet::new();
            let mut paths = BTreeSet::new();
            let mut first = i64::MAX;
            let mut last = i64::MIN;
            for id in &seen {
                let rec = &store.commits[id];
                authors.insert(rec.author.raw().to_string());
                first = first.min(rec.commit_ts);
                last = last.max(rec.commit_ts);
                for pair in introduced_files_oracle(&store, id).unwrap() {
                    paths.insert(pair.path);
                }
            }
            let mut langs: BTreeMap<String, u64> = BTreeMap::new();
            for p in &paths {
                if let Some(l) = table.classify_path(p) {
                    *langs.entry(l.as_str().to_string()).or_insert(0) += 1;
                }
            }

            let doc = by_id[proj.project_id.as_str()];
            assert_eq!(doc.n_authors, authors.len() as u64, "{}", proj.project_id);
            assert_eq!(doc.n_commits, seen.len() as u64, "{}", proj.project_id);
            assert_eq!(doc.n_files, paths.len() as u64, "{}", proj.project_id);
            assert_eq!(doc.first_ts, first, "{}", proj.project_id);
            assert_eq!(doc.last_ts, last, "{}", proj.project_id);
            assert_eq!(doc.lang_counts, langs, "{}", proj.project_id);
        }
    });
}

/// 30 projects, exactly 7 of which pass both the metadata query
/// `lang.Python>=20 AND n_authors>=5` and the deep LOC filter
/// (Python, >=50 lines, >=20 files).
fn sam_corpus() -> (ObjectStore, Vec<String>) {
    let mut b = StoreBuilder::new();
    let mut qualifying = Vec::new();
    let add_project = |b: &mut StoreBuilder,
                           id: &str,
                           n_authors: usize,
                           n_py: usize,
                           py_lines: u64| {
        let mut snapshot: Vec<(String, String)> = Vec::new();
        let mut tip: Option<String> = None;
        let per_commit = n_py.div_ceil(n_authors);
        let mut file_no = 0;
        for a in 0..n_authors {
            for _ in 0..per_commit {
                if file_no < n_py {
                    let path = format!("{id}/m{file_no}.py");
                    let token = format!("{path}#v0");
                    b.blob(&token, py_lines * 8, py_lines, false);
                    snapshot.push((path, token));
                    file_no += 1;
                }
            }
            snapshot.push((format!("{id}/note{a}.txt"), format!("{id}/note{a}.txt#v0")));
            snapshot.sort();
            snapshot.dedup();
            let files: Vec<(&str, &str)> =
                snapshot.iter().map(|(f, t)| (f.as_str(), t.as_str())).collect();
            let author = format!("{id}-dev{a}");
            let parents: Vec<&str> = tip.iter().map(|t| t.as_str()).collect();
            let ts = 1_600_000_000 + a as i64 * 7200;
            tip = Some(b.commit(&author, ts, &parents, &files));
        }
        b.project(id, &[tip.as_ref().unwrap()]);
    };

    for i in 0..7 {
        let id = format!("sam{i:02}");
        add_project(&mut b, &id, 5, 22, 60);
        qualifying.push(id);
    }
    for i in 0..10 {
        // plenty of Python, too few authors
        add_project(&mut b, &format!("few-auth{i:02}"), 2, 22, 60);
    }
    for i in 0..6 {
        // enough authors, too little Python
        add_project(&mut b, &format!("few-py{i:02}"), 5, 10, 60);
    }
    for i in 0..7 {
        // passes the metadata query but every blob is under 50 lines
        add_project(&mut b, &format!("short{i:02}"), 5, 22, 40);
    }
    qualifying.sort();
    (b.build(), qualifying)
}

#[test]
fn criterion_04_sam_scenario() {
    report(4, "Sam query + deep LOC sample with shortfall", || {
        let tmp = tempfile::tempdir().unwrap();
        let (store, qualifying) = sam_corpus();
        assert_eq!(store.projects.len(), 30);
        write_stream(&store, tmp.path());
        let data = tmp.path().to_str().unwrap();
        assert!(gitmap(&["build-maps", "--data", data]).status.success());
        assert!(gitmap(&["aggregate", "--data", data]).status.success());
        let out = gitmap(&[
            "sample", "--data", data,
            "--query", "lang.Python>=20 AND n_authors>=5",
            "--n", "20", "--seed", "7",
            "--deep-loc", "Python,50,20",
        ]);
        assert_eq!(out.status.code(), Some(3), "{out:?}");
        let doc: serde_json::Value =
            serde_json::from_str(String::from_utf8_lossy(&out.stdout).trim()).unwrap();
        let matched: Vec<String> = doc["matched"]
            .as_array().unwrap().iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        assert_eq!(matched, qualifying);
        let mut sampled: Vec<String> = doc["sampled"]
            .as_array().unwrap().iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        sampled.sort();
        assert_eq!(sampled, qualifying);
        assert_eq!(doc["shortfall"], serde_json::Value::Bool(true));
    });
}

#[test]
fn criterion_05_determinism() {
    report(5, "byte-identical outputs across runs, shards, threads", || {
        let (store, _) = sam_corpus();

        let mut sample_outs: Vec<Vec<u8>> = Vec::new();
        let mut aggregate_outs: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
        for (shards, threads) in [("1", "1"), ("4", "4"), ("16", "1"), ("4", "4"), ("4", "1")] {
            let tmp = tempfile::tempdir().unwrap();
            write_stream(&store, tmp.path());
            let data = tmp.path().to_str().unwrap();
            assert!(gitmap(&["build-maps", "--data", data, "--shards", shards, "--threads", threads])
                .status
                .success());
            assert!(gitmap(&["aggregate", "--data", data, "--threads", threads])
                .status
                .success());
            aggregate_outs.push((
                fs::read(tmp.path().join("proj_metadata.A.jsonl")).unwrap(),
                fs::read(tmp.path().join("auth_metadata.A.jsonl")).unwrap(),
            ));
            let out = gitmap(&[
                "sample", "--data", data, "--query", "n_authors>=5", "--n", "3", "--seed", "99",
            ]);
            assert_eq!(out.status.code(), Some(0), "{out:?}");
            sample_outs.push(out.stdout);
        }
        // 5 independent runs over shard_count {1,4,16} and threads {1,4}
        for w in sample_outs.windows(2) {
            assert_eq!(w[0], w[1]);
        }
        for w in aggregate_outs.windows(2) {
            assert_eq!(w[0], w[1]);
        }
    });
}

#[test]
fn criterion_06_fork_clustering() {
    report(6, "fork detected, utility commit ignored", || {
        // (a) project B carries all 50 of A's commits plus 5 of its own
        let mut b = StoreBuilder::new();
        let mut tip = String::new();
        for i in 0..50 {
            let parents: Vec<&str> = if i == 0 { vec![] } else { vec![tip.as_str()] };
            tip = b.commit("ann", 1000 + i, &parents, &[("a.py", "v0")]);
        }
        let a_head = tip.clone();
        for i in 0..5 {
            tip = b.commit("bob", 2000 + i, &[tip.as_str()], &[("a.py", &format!("w{i}"))]);
        }
        b.project("A", &[&a_head]);
        b.project("B", &[&tip]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let clusters =
            forkcluster::fork_clusters(&maps, &store, forkcluster::DEFAULT_TAU, forkcluster::DEFAULT_K_MAX)
                .unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].members, BTreeSet::from(["A".to_string(), "B".to_string()]));
        assert_eq!(clusters[0].original, "A");

        // (b) 150 projects sharing exactly one ancient utility commit
        let mut b = StoreBuilder::new();
        let util = b.commit("lib", 1, &[], &[("util.c", "u0")]);
        for p in 0..150 {
            let own = format!("own{p}.c");
            let c1 = b.commit("dev", 100 + p, &[&util], &[("util.c", "u0"), (&own, &format!("{own}#0"))]);
            let c2 = b.commit("dev", 200 + p, &[&c1], &[("util.c", "u0"), (&own, &format!("{own}#1"))]);
            b.project(&format!("user{p:03}"), &[&c2]);
        }
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let clusters = forkcluster::fork_clusters(&maps, &store, forkcluster::DEFAULT_TAU, 100).unwrap();
        assert!(clusters.is_empty(), "{clusters:?}");
    });
}

#[test]
fn criterion_07_identity_thresholds_and_refinement() {
    report(7, "0.8 pair merges at 0.75 not 0.9; theta refines", || {
        // hand-computed 0.8 pair: same normalized name, hour bin, and
        // touched path, different email locals
        let mut b = StoreBuilder::new();
        let a1 = "John Doe <jd@x.com>";
        let a2 = "john doe <john@y.com>";
        let c1 = b.commit_raw_author(a1, 3600, &[], &[("f.py", "b1")]);
        let c2 = b.commit_raw_author(a2, 3600 * 25, &[&c1], &[("f.py", "b2")]);
        b.project("p", &[&c2]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let s = identity::similarity(a1, a2, Weights::default(), &maps, &store).unwrap();
        assert!((s - 0.8).abs() < 1e-9, "similarity {s}");
        let authors = vec![a1.to_string(), a2.to_string()];
        let merged = identity::merge(&authors, 0.75, Weights::default(), &maps, &store).unwrap();
        assert_eq!(merged.groups.len(), 1);
        let split = identity::merge(&authors, 0.9, Weights::default(), &maps, &store).unwrap();
        assert_eq!(split.groups.len(), 2);

        // refinement under increasing theta, checked on 100 random pairs
        let mut b = StoreBuilder::new();
        let mut rng = TestRng::new(4242);
        let firsts = ["john", "jon", "jane", "bob", "rob", "alice", "ali"];
        let lasts = ["doe", "dole", "smith", "smyth", "chan", "chang"];
        let hosts = ["x.com", "y.org"];
        let mut raw_authors = Vec::new();
        let mut tip: Option<String> = None;
        for i in 0..60 {
            let f = firsts[rng.below(firsts.len() as u64) as usize];
            let l = lasts[rng.below(lasts.len() as u64) as usize];
            let h = hosts[rng.below(hosts.len() as u64) as usize];
            let raw = format!("{f} {l} <{f}{i}@{h}>");
            let path = format!("src/f{}.py", rng.below(8));
            let ts = (rng.below(400) * 3600) as i64;
            let parents: Vec<&str> = tip.iter().map(|t| t.as_str()).collect();
            tip = Some(b.commit_raw_author(&raw, ts, &parents, &[(&path, "blob")]));
            raw_authors.push(raw);
        }
        b.project("p", &[tip.as_ref().unwrap()]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        raw_authors.sort();
        raw_authors.dedup();

        let group_of = |part: &identity::IdentityPartition, a: &str| -> usize {
            part.groups.iter().position(|g| g.contains(a)).unwrap()
        };
        let thetas = [0.55, 0.75, 0.9];
        let parts: Vec<_> = thetas
            .iter()
            .map(|&t| identity::merge(&raw_authors, t, Weights::default(), &maps, &store).unwrap())
            .collect();
        let mut pair_rng = TestRng::new(7);
        for _ in 0..100 {
            let i = pair_rng.below(raw_authors.len() as u64) as usize;
            let j = pair_rng.below(raw_authors.len() as u64) as usize;
            let (a, b2) = (&raw_authors[i], &raw_authors[j]);
            // merged at a higher theta implies merged at every lower one
            for w in parts.windows(2) {
                if group_of(&w[1], a) == group_of(&w[1], b2) {
                    assert_eq!(group_of(&w[0], a), group_of(&w[0], b2), "{a} / {b2}");
                }
            }
        }
        // and full refinement: each finer group sits inside one coarser group
        for w in parts.windows(2) {
            for g in &w[1].groups {
                assert!(w[0].groups.iter().any(|coarse| g.is_subset(coarse)));
            }
        }
    });
}

#[test]
fn criterion_08_round_trips() {
    report(8, "stream and shard round trips on 100 random stores", || {
        for seed in 0..100u64 {
            let store = random_store(seed, 3, 5);
            let mut buf = Vec::new();
            write_object_stream(&store, &mut buf).unwrap();
            let back = read_object_stream(&buf[..]).unwrap();
            assert_eq!(store, back, "stream round trip, seed {seed}");

            let maps = build_basemaps(&store).unwrap();
            let tmp = tempfile::tempdir().unwrap();
            let shard_count = [1u32, 4, 16][(seed % 3) as usize];
            write_shards(&maps, tmp.path(), shard_count, 'A').unwrap();
            let maps_back = read_shards(tmp.path()).unwrap();
            assert_eq!(maps, maps_back, "shard round trip, seed {seed}");
        }
    });
}

#[test]
fn criterion_09_real_repository() {
    report(9, "git-created repository ingests with matching counts", || {
        let tmp = tempfile::tempdir().unwrap();
        let repo = tmp.path();
        let git = |args: &[&str]| -> String {
            let out = Command::new("git")
                .args(args)
                .current_dir(repo)
                .env("GIT_AUTHOR_DATE", "2021-03-01T10:00:00 +0000")
                .env("GIT_COMMITTER_DATE", "2021-03-01T10:00:00 +0000")
                .output()
                .expect("run git");
            assert!(out.status.success(), "git {args:?}: {out:?}");
            String::from_utf8_lossy(&out.stdout).into_owned()
        };
        git(&["init", "-q", "-b", "main"]);
        git(&["config", "user.name", "Ann Example"]);
        git(&["config", "user.email", "ann@example.com"]);
        git(&["config", "commit.gpgsign", "false"]);

        let commit_file = |git: &dyn Fn(&[&str]) -> String, path: &str, text: &str, msg: &str, author: Option<&str>| {
            let full = repo.join(path);
            if let Some(dir) = full.parent() {
                fs::create_dir_all(dir).unwrap();
            }
            fs::write(full, text).unwrap();
            git(&["add", "."]);
            match author {
                Some(a) => git(&["commit", "-q", "-m", msg, "--author", a]),
                None => git(&["commit", "-q", "-m", msg]),
            };
        };

        for i in 0..6 {
            let author = if i % 2 == 0 { None } else { Some("Bob Other <bob@example.com>") };
            commit_file(&git, &format!("src/f{i}.py"), &format!("line\n{i}\n"), &format!("c{i}"), author);
        }
        git(&["checkout", "-q", "-b", "feature"]);
        for i in 0..3 {
            commit_file(&git, &format!("docs/d{i}.md"), &format!("doc {i}\n"), &format!("f{i}"), None);
        }
        git(&["checkout", "-q", "main"]);
        commit_file(&git, "src/main.c", "int main(){return 0;}\n", "mainline", None);
        git(&["merge", "-q", "--no-ff", "-m", "merge feature", "feature"]);
        commit_file(&git, "README.md", "readme\n", "post-merge", None);

        let (store, proj) = scan_repository(repo, "real").unwrap();
        assert!(proj.heads.len() >= 2);

        let count: usize = git(&["rev-list", "--branches", "--count"]).trim().parse().unwrap();
        assert!(count >= 10);
        assert_eq!(store.commits.len(), count);
        let merges = store.commits.values().filter(|c| c.parents.len() >= 2).count();
        assert_eq!(merges, 1);

        let log = git(&["log", "--branches", "--format=%an <%ae>"]);
        let git_authors: BTreeSet<&str> = log.lines().collect();
        let our_authors: BTreeSet<String> = store
            .commits
            .values()
            .map(|c| c.author.raw().to_string())
            .collect();
        assert_eq!(our_authors, git_authors.iter().map(|s| s.to_string()).collect());

        let tip = git(&["rev-parse", "main"]).trim().to_string();
        let ls = git(&["ls-tree", "-r", "--name-only", &tip]);
        let git_paths: BTreeSet<&str> = ls.lines().collect();
        let tree = &store.commits[&ObjectId::new(tip).unwrap()].tree;
        let our_paths: BTreeSet<String> = expand_tree(&store, tree)
            .unwrap()
            .into_iter()
            .map(|p| p.path)
            .collect();
        assert_eq!(our_paths, git_paths.iter().map(|s| s.to_string()).collect());
    });
}

#[test]
fn criterion_10_trend_and_change_counts() {
    report(10, "lang_trend and file_change_counts match brute force", || {
        let store = merge_heavy_corpus();
        let maps = build_basemaps(&store).unwrap();
        let table = ExtensionTable::default();

        // brute-force year: count days since epoch the slow way
        fn year_of(ts: i64) -> i64 {
            assert!(ts >= 0);
            let mut days = ts.div_euclid(86_400);
            let mut year = 1970;
            loop {
                let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
                let len = if leap { 366 } else { 365 };
                if days < len {
                    return year;
                }
                days -= len;
                year += 1;
            }
        }

        let mut trend_oracle: BTreeMap<(i64, String), u64> = BTreeMap::new();
        for (id, rec) in &store.commits {
            let langs: BTreeSet<String> = introduced_files_oracle(&store, id)
                .unwrap()
                .into_iter()
                .filter_map(|p| table.classify_path(&p.path))
                .map(|l| l.as_str().to_string())
                .collect();
            for l in langs {
                *trend_oracle.entry((year_of(rec.commit_ts), l)).or_insert(0) += 1;
            }
        }
        let trend: BTreeMap<(i64, String), u64> = sampler::lang_trend(&maps, &store, &table)
            .unwrap()
            .into_iter()
            .map(|(y, l, n)| ((y, l.as_str().to_string()), n))
            .collect();
        assert_eq!(trend, trend_oracle);

        for proj in &store.projects {
            let commits = reachable_commits(&store, &proj.heads).unwrap();
            let mut oracle: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
            for id in &commits {
                for pair in introduced_files_oracle(&store, id).unwrap() {
                    oracle.entry(pair.path).or_default().insert(pair.blob.to_string());
                }
            }
            let oracle_counts: BTreeMap<String, u64> = oracle
                .into_iter()
                .map(|(p, blobs)| (p, blobs.len() as u64))
                .collect();
            let counts = sampler::file_change_counts(&proj.project_id, &maps).unwrap();
            assert_eq!(counts, oracle_counts, "{}", proj.project_id);
        }
    });
}
