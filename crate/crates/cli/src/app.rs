//! Subcommand dispatch for the `gitmap` binary. All randomness is seeded,
//! no output depends on wall-clock time, and re-running a pipeline on
//! identical inputs produces byte-identical files.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error, 3 sample
//! shortfall.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use gitmap_core::basemaps::{build_basemaps, BaseMaps};
use gitmap_core::error::Error;
use gitmap_core::forkcluster;
use gitmap_core::identity::{self, Weights};
use gitmap_core::ingest::{read_object_stream, scan_repository, write_object_stream};
use gitmap_core::langclass::{ExtensionTable, Language};
use gitmap_core::metadata::{
    aggregate_authors, aggregate_projects, export_documents, import_stars, read_auth_documents,
    read_proj_documents, Collection, DatasetVersion,
};
use gitmap_core::object::ObjectStore;
use gitmap_core::sampler::{self, parse_query, SampleSpec};
use gitmap_core::shards::{fnv1a64, read_shards, write_shards};

const STORE_FILE: &str = "store.stream";

#[derive(Parser)]
#[command(name = "gitmap", version, about = "Desk-scale git repository mining")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataDir {
    /// Dataset directory (defaults to $GITMAP_DATA_DIR)
    #[arg(long, env = "GITMAP_DATA_DIR")]
    data: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Scan repositories and/or object streams into a dataset directory
    Ingest {
        /// Git directory (bare or with .git) to scan; repeatable
        #[arg(long)]
        repo: Vec<PathBuf>,
        /// Project id for the corresponding --repo, in order; defaults to
        /// the directory name
        #[arg(long)]
        project_id: Vec<String>,
        /// Object Stream v1 file to merge; repeatable
        #[arg(long)]
        stream: Vec<PathBuf>,
        /// Output dataset directory (defaults to $GITMAP_DATA_DIR)
        #[arg(long, env = "GITMAP_DATA_DIR")]
        out: PathBuf,
        #[arg(long, default_value = "A")]
        version: char,
    },
    /// Build the ten base maps and persist them as sorted shards
    BuildMaps {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, default_value_t = 16)]
        shards: u32,
        #[arg(long, default_value = "A")]
        version: char,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Aggregate project and author metadata documents
    Aggregate {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, default_value = "A")]
        version: char,
        #[arg(long)]
        threads: Option<usize>,
        /// Extension override file: lines `ext<TAB>LanguageName`
        #[arg(long)]
        lang_table: Option<PathBuf>,
    },
    /// Attach star counts from a `project_id,stars` CSV
    ImportStars {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, default_value = "A")]
        version: char,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Detect fork clusters and set fork_of on project documents
    ForkClusters {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, default_value = "A")]
        version: char,
        #[arg(long, default_value_t = forkcluster::DEFAULT_TAU)]
        tau: f64,
        #[arg(long, default_value_t = forkcluster::DEFAULT_K_MAX)]
        k_max: usize,
    },
    /// Merge probable author aliases into an identity partition
    IdentMerge {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, default_value = "A")]
        version: char,
        #[arg(long, default_value_t = identity::DEFAULT_THETA)]
        theta: f64,
        /// name,email,hour,file weights
        #[arg(long, default_value = "0.4,0.2,0.2,0.2")]
        weights: String,
    },
    /// Evaluate a criteria query and draw a deterministic sample
    Sample {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, default_value = "A")]
        version: char,
        /// Conjunctive query, e.g. "lang.Python>=20 AND n_authors>=5"
        #[arg(long)]
        query: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deep LOC filter: Language,min_lines,min_files
        #[arg(long)]
        deep_loc: Option<String>,
        /// Query author documents instead of project documents
        #[arg(long)]
        authors: bool,
    },
    /// Commits per year per language, as CSV
    LangTrend {
        #[command(flatten)]
        data: DataDir,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        lang_table: Option<PathBuf>,
    },
    /// Distinct blobs introduced per path of one project
    FileChanges {
        #[command(flatten)]
        data: DataDir,
        #[arg(long)]
        project: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // ignore failure when a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_store(data: &Path) -> Result<ObjectStore, Error> {
    let path = data.join(STORE_FILE);
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    read_object_stream(BufReader::new(file))
}

fn load_maps(data: &Path, store: &ObjectStore) -> Result<BaseMaps, Error> {
    if data.join("MANIFEST").is_file() && data.join("c2a.0.kv").is_file() {
        read_shards(data)
    } else {
        build_basemaps(store)
    }
}

fn load_lang_table(path: Option<&PathBuf>) -> Result<ExtensionTable, Error> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            ExtensionTable::with_overrides(&text)
        }
        None => Ok(ExtensionTable::default()),
    }
}

/// Merges key/value pairs into `<dir>/MANIFEST`, keeping existing keys
/// and writing lines sorted by key.
fn update_manifest(dir: &Path, updates: &[(&str, String)]) -> Result<(), Error> {
    let path = dir.join("MANIFEST");
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    if let Ok(text) = fs::read_to_string(&path) {
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('\t') {
                entries.insert(k.to_string(), v.to_string());
            }
        }
    }
    for (k, v) in updates {
        entries.insert(k.to_string(), v.clone());
    }
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    for (k, v) in entries {
        writeln!(f, "{k}\t{v}").map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn store_digest(data: &Path) -> Result<String, Error> {
    let path = data.join(STORE_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(format!("{:016x}", fnv1a64(&bytes)))
}

fn parse_version(letter: char) -> Result<DatasetVersion, Error> {
    DatasetVersion::new(letter)
}

fn parse_weights(text: &str) -> Result<Weights, Error> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad weights {text:?}")))?;
    if parts.len() != 4 {
        return Err(Error::Config("weights need 4 comma-separated values".into()));
    }
    Ok(Weights {
        name: parts[0],
        email: parts[1],
        hour: parts[2],
        file: parts[3],
    })
}

fn parse_deep_loc(text: &str) -> Result<(Language, u64, u64), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "--deep-loc needs Language,min_lines,min_files, got {text:?}"
        )));
    }
    let lang = Language::from_name(parts[0])
        .ok_or_else(|| Error::Config(format!("unknown language {:?}", parts[0])))?;
    let min_lines: u64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("bad min_lines {:?}", parts[1])))?;
    let min_files: u64 = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("bad min_files {:?}", parts[2])))?;
    Ok((lang, min_lines, min_files))
}

fn proj_docs_path(data: &Path, version: DatasetVersion) -> PathBuf {
    data.join(format!("proj_metadata.{}.jsonl", version.0))
}

fn auth_docs_path(data: &Path, version: DatasetVersion) -> PathBuf {
    data.join(format!("auth_metadata.{}.jsonl", version.0))
}

fn dispatch(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Ingest {
            repo,
            project_id,
            stream,
            out,
            version,
        } => {
            let version = parse_version(version)?;
            if repo.is_empty() && stream.is_empty() {
                return Err(Error::Config("nothing to ingest: pass --repo or --stream".into()));
            }
            if project_id.len() > repo.len() {
                return Err(Error::Config("more --project-id values than --repo values".into()));
            }
            let mut store = ObjectStore::default();
            // deterministic merge order: lexicographic project id
            let mut scans: Vec<(String, PathBuf)> = repo
                .iter()
                .enumerate()
                .map(|(i, path)| {
                    let id = project_id.get(i).cloned().unwrap_or_else(|| {
                        path.file_name()
                            .map(|n| n.to_string_lossy().into_owned())
                            .unwrap_or_else(|| path.display().to_string())
                    });
                    (id, path.clone())
                })
                .collect();
            scans.sort_by(|a, b| a.0.cmp(&b.0));
            for (id, path) in scans {
                let (delta, _) = scan_repository(&path, &id)?;
                store.merge(delta)?;
                eprintln!("scanned {id} from {}", path.display());
            }
            for path in &stream {
                let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
                let delta = read_object_stream(BufReader::new(file))?;
                store.merge(delta)?;
                eprintln!("merged stream {}", path.display());
            }
            store.validate()?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let store_path = out.join(STORE_FILE);
            let mut buf = Vec::new();
            write_object_stream(&store, &mut buf).map_err(|e| Error::io(&store_path, e))?;
            fs::write(&store_path, &buf).map_err(|e| Error::io(&store_path, e))?;
            update_manifest(
                &out,
                &[
                    ("version", version.0.to_string()),
                    ("store_digest", format!("{:016x}", fnv1a64(&buf))),
                ],
            )?;
            println!(
                "ingested {} commits, {} trees, {} blobs, {} projects -> {}",
                store.commits.len(),
                store.trees.len(),
                store.blobs.len(),
                store.projects.len(),
                store_path.display()
            );
            Ok(0)
        }

        Command::BuildMaps {
            data,
            shards,
            version,
            threads,
        } => {
            init_threads(threads);
            let version = parse_version(version)?;
            let store = load_store(&data.data)?;
            let maps = build_basemaps(&store)?;
            write_shards(&maps, &data.data, shards, version.0)?;
            update_manifest(&data.data, &[("store_digest", store_digest(&data.data)?)])?;
            println!(
                "built {} maps over {} commits into {} shards",
                gitmap_core::basemaps::MAP_NAMES.len(),
                store.commits.len(),
                shards
            );
            Ok(0)
        }

        Command::Aggregate {
            data,
            version,
            threads,
            lang_table,
        } => {
            init_threads(threads);
            let version = parse_version(version)?;
            let table = load_lang_table(lang_table.as_ref())?;
            let store = load_store(&data.data)?;
            let maps = load_maps(&data.data, &store)?;
            let proj = aggregate_projects(&maps, &store, &table)?;
            let auth = aggregate_authors(&maps, &store, &table)?;
            let proj_path =
                export_documents(&proj, Collection::ProjMetadata, version, &data.data)?;
            let auth_path =
                export_documents(&auth, Collection::AuthMetadata, version, &data.data)?;
            update_manifest(
                &data.data,
                &[
                    ("version", version.0.to_string()),
                    ("store_digest", store_digest(&data.data)?),
                ],
            )?;
            println!(
                "aggregated {} projects -> {}, {} authors -> {}",
                proj.len(),
                proj_path.display(),
                auth.len(),
                auth_path.display()
            );
            Ok(0)
        }

        Command::ImportStars { data, version, csv } => {
            let version = parse_version(version)?;
            let path = proj_docs_path(&data.data, version);
            let mut docs = read_proj_documents(&path)?;
            let text = fs::read_to_string(&csv).map_err(|e| Error::io(&csv, e))?;
            let unmatched = import_stars(&text, &mut docs)?;
            export_documents(&docs, Collection::ProjMetadata, version, &data.data)?;
            if unmatched > 0 {
                eprintln!("warning: {unmatched} star rows matched no project");
            }
            println!("stars imported into {}", path.display());
            Ok(0)
        }

        Command::ForkClusters {
            data,
            version,
            tau,
            k_max,
        } => {
            let version = parse_version(version)?;
            let store = load_store(&data.data)?;
            let maps = load_maps(&data.data, &store)?;
            let clusters = forkcluster::fork_clusters(&maps, &store, tau, k_max)?;
            let out_path = data.data.join(format!("fork_clusters.{}.txt", version.0));
            let mut buf = Vec::new();
            forkcluster::write_clusters(&clusters, &mut buf)
                .map_err(|e| Error::io(&out_path, e))?;
            fs::write(&out_path, buf).map_err(|e| Error::io(&out_path, e))?;
            // update fork_of in existing project documents, if present
            let docs_path = proj_docs_path(&data.data, version);
            if docs_path.is_file() {
                let mut docs = read_proj_documents(&docs_path)?;
                forkcluster::apply_fork_of(&clusters, &mut docs);
                export_documents(&docs, Collection::ProjMetadata, version, &data.data)?;
            }
            update_manifest(
                &data.data,
                &[("tau", format!("{tau}")), ("k_max", format!("{k_max}"))],
            )?;
            println!("{} fork clusters -> {}", clusters.len(), out_path.display());
            Ok(0)
        }

        Command::IdentMerge {
            data,
            version,
            theta,
            weights,
        } => {
            let version = parse_version(version)?;
            let weights = parse_weights(&weights)?;
            let store = load_store(&data.data)?;
            let maps = load_maps(&data.data, &store)?;
            let authors: Vec<String> = maps.a2c.keys().cloned().collect();
            let partition = identity::merge(&authors, theta, weights, &maps, &store)?;
            let out_path = data.data.join(format!("identities.{}.txt", version.0));
            let mut buf = Vec::new();
            identity::write_partition(&partition, &mut buf)
                .map_err(|e| Error::io(&out_path, e))?;
            fs::write(&out_path, buf).map_err(|e| Error::io(&out_path, e))?;
            update_manifest(&data.data, &[("theta", format!("{theta}"))])?;
            println!(
                "{} authors in {} identity groups -> {}",
                authors.len(),
                partition.groups.len(),
                out_path.display()
            );
            Ok(0)
        }

        Command::Sample {
            data,
            version,
            query,
            n,
            seed,
            deep_loc,
            authors,
        } => {
            if n < 1 {
                return Err(Error::Config("--n must be >= 1".into()));
            }
            let version = parse_version(version)?;
            let predicate = parse_query(&query)?;
            let spec = SampleSpec { n, seed };
            let result = if authors {
                let docs = read_auth_documents(&auth_docs_path(&data.data, version))?;
                sampler::run_query(&predicate, &docs, &spec)?
            } else {
                let docs = read_proj_documents(&proj_docs_path(&data.data, version))?;
                if let Some(spec_text) = &deep_loc {
                    let (lang, min_lines, min_files) = parse_deep_loc(spec_text)?;
                    let table = ExtensionTable::default();
                    let store = load_store(&data.data)?;
                    let maps = load_maps(&data.data, &store)?;
                    let mut matched = Vec::new();
                    for d in &docs {
                        if sampler::eval(&predicate, d)?
                            && sampler::deep_loc_filter(
                                &d.project_id,
                                lang,
                                min_lines,
                                min_files,
                                &table,
                                &maps,
                                &store,
                            )?
                        {
                            matched.push(d.project_id.clone());
                        }
                    }
                    matched.sort();
                    let sampled = sampler::sample(&matched, &spec);
                    let shortfall = matched.len() < n;
                    sampler::QueryResult {
                        matched,
                        sampled,
                        shortfall,
                    }
                } else {
                    sampler::run_query(&predicate, &docs, &spec)?
                }
            };
            println!("{}", serde_json::to_string(&result).expect("serialize"));
            eprintln!(
                "matched {} documents, sampled {}{}",
                result.matched.len(),
                result.sampled.len(),
                if result.shortfall { " (shortfall)" } else { "" }
            );
            Ok(if result.shortfall { 3 } else { 0 })
        }

        Command::LangTrend {
            data,
            out,
            lang_table,
        } => {
            let table = load_lang_table(lang_table.as_ref())?;
            let store = load_store(&data.data)?;
            let maps = load_maps(&data.data, &store)?;
            let rows = sampler::lang_trend(&maps, &store, &table)?;
            let mut csv = String::from("year,language,commits\n");
            for (year, lang, n) in &rows {
                csv.push_str(&format!("{year},{lang},{n}\n"));
            }
            match out {
                Some(path) => {
                    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
                    println!("{} rows -> {}", rows.len(), path.display());
                }
                None => print!("{csv}"),
            }
            Ok(0)
        }

        Command::FileChanges { data, project, out } => {
            let store = load_store(&data.data)?;
            let maps = load_maps(&data.data, &store)?;
            let counts = sampler::file_change_counts(&project, &maps)?;
            let mut text = String::new();
            for (path, n) in &counts {
                text.push_str(&format!("{path}\t{n}\n"));
            }
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
                    println!("{} paths -> {}", counts.len(), path.display());
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}
