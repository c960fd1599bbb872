//! Python bindings over gitmap-core. `Store` and `Maps` wrap the Rust
//! structures; metadata documents cross the boundary as plain dicts.

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use gitmap_core::basemaps::{build_basemaps, BaseMaps};
use gitmap_core::forkcluster;
use gitmap_core::identity::{self, Weights};
use gitmap_core::ingest::{read_object_stream, scan_repository, write_object_stream};
use gitmap_core::langclass::{ExtensionTable, Language};
use gitmap_core::metadata::{aggregate_authors, aggregate_projects};
use gitmap_core::object::ObjectStore;
use gitmap_core::sampler::{self, parse_query, SampleSpec};

fn err(e: gitmap_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().unbind().into(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.unbind().into()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.unbind().into()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.unbind().into()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.unbind().into(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.unbind().into()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.unbind().into()
        }
    })
}

fn docs_to_py<T: serde::Serialize>(py: Python<'_>, docs: &[T]) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(docs).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// An in-memory object store: commits, trees, blob stats, project refs.
#[pyclass]
struct Store {
    inner: ObjectStore,
}

#[pymethods]
impl Store {
    /// Parses an Object Stream v1 file.
    #[staticmethod]
    fn load_stream(path: PathBuf) -> PyResult<Self> {
        let file = fs::File::open(&path)
            .map_err(|e| PyValueError::new_err(format!("{}: {e}", path.display())))?;
        let inner = read_object_stream(BufReader::new(file)).map_err(err)?;
        Ok(Store { inner })
    }

    /// Scans a local git directory (loose objects only).
    #[staticmethod]
    fn scan_repository(path: PathBuf, project_id: &str) -> PyResult<Self> {
        let (inner, _) = scan_repository(&path, project_id).map_err(err)?;
        Ok(Store { inner })
    }

    /// Writes the canonical Object Stream v1 serialization.
    fn write_stream(&self, path: PathBuf) -> PyResult<()> {
        let mut buf = Vec::new();
        write_object_stream(&self.inner, &mut buf)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        fs::write(&path, buf).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n_commits(&self) -> usize {
        self.inner.commits.len()
    }

    #[getter]
    fn n_trees(&self) -> usize {
        self.inner.trees.len()
    }

    #[getter]
    fn n_blobs(&self) -> usize {
        self.inner.blobs.len()
    }

    #[getter]
    fn project_ids(&self) -> Vec<String> {
        self.inner.projects.iter().map(|p| p.project_id.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Store(commits={}, trees={}, blobs={}, projects={})",
            self.inner.commits.len(),
            self.inner.trees.len(),
            self.inner.blobs.len(),
            self.inner.projects.len()
        )
    }
}

/// The ten base maps, built once from a Store.
#[pyclass]
struct Maps {
    inner: BaseMaps,
}

#[pymethods]
impl Maps {
    #[new]
    fn new(store: &Store) -> PyResult<Self> {
        Ok(Maps {
            inner: build_basemaps(&store.inner).map_err(err)?,
        })
    }

    /// Looks up one key in one named map (c2a, a2c, p2c, c2p, c2f, f2c,
    /// c2b, b2c, f2b, a2p); returns the sorted value list.
    fn lookup(&self, map_name: &str, key: &str) -> PyResult<Vec<String>> {
        self.inner.lookup(map_name, key).map_err(err)
    }
}

/// Maps a file path to its language name via the extension table.
#[pyfunction]
fn classify_path(path: &str) -> Option<&'static str> {
    ExtensionTable::default().classify_path(path).map(|l| l.as_str())
}

/// Project metadata documents as a list of dicts, sorted by project id.
#[pyfunction]
fn project_metadata(py: Python<'_>, store: &Store, maps: &Maps) -> PyResult<Py<PyAny>> {
    let docs =
        aggregate_projects(&maps.inner, &store.inner, &ExtensionTable::default()).map_err(err)?;
    docs_to_py(py, &docs)
}

/// Author metadata documents as a list of dicts, sorted by author id.
#[pyfunction]
fn author_metadata(py: Python<'_>, store: &Store, maps: &Maps) -> PyResult<Py<PyAny>> {
    let docs =
        aggregate_authors(&maps.inner, &store.inner, &ExtensionTable::default()).map_err(err)?;
    docs_to_py(py, &docs)
}

/// Runs a conjunctive query over project metadata and draws the seeded
/// sample; returns {"matched", "sampled", "shortfall"}.
#[pyfunction]
fn query_projects(
    py: Python<'_>,
    store: &Store,
    maps: &Maps,
    query: &str,
    n: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let predicate = parse_query(query).map_err(err)?;
    let docs =
        aggregate_projects(&maps.inner, &store.inner, &ExtensionTable::default()).map_err(err)?;
    let result = sampler::run_query(&predicate, &docs, &SampleSpec { n, seed }).map_err(err)?;
    let value = serde_json::to_value(&result).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// Deterministic Fisher-Yates sample of a sorted id list.
#[pyfunction]
fn sample(matched: Vec<String>, n: usize, seed: u64) -> Vec<String> {
    sampler::sample(&matched, &SampleSpec { n, seed })
}

/// Fork clusters as (original, sorted member list) pairs.
#[pyfunction]
#[pyo3(signature = (store, maps, tau=forkcluster::DEFAULT_TAU, k_max=forkcluster::DEFAULT_K_MAX))]
fn fork_clusters(
    store: &Store,
    maps: &Maps,
    tau: f64,
    k_max: usize,
) -> PyResult<Vec<(String, Vec<String>)>> {
    let clusters = forkcluster::fork_clusters(&maps.inner, &store.inner, tau, k_max).map_err(err)?;
    Ok(clusters
        .into_iter()
        .map(|c| (c.original, c.members.into_iter().collect()))
        .collect())
}

/// Pairwise author similarity in [0, 1].
#[pyfunction]
fn author_similarity(a: &str, b: &str, store: &Store, maps: &Maps) -> PyResult<f64> {
    identity::similarity(a, b, Weights::default(), &maps.inner, &store.inner).map_err(err)
}

/// Identity partition at threshold theta: list of sorted alias groups.
#[pyfunction]
#[pyo3(signature = (store, maps, theta=identity::DEFAULT_THETA))]
fn identity_groups(store: &Store, maps: &Maps, theta: f64) -> PyResult<Vec<Vec<String>>> {
    let authors: Vec<String> = maps.inner.a2c.keys().cloned().collect();
    let partition =
        identity::merge(&authors, theta, Weights::default(), &maps.inner, &store.inner)
            .map_err(err)?;
    Ok(partition
        .groups
        .into_iter()
        .map(|g| g.into_iter().collect())
        .collect())
}

/// (year, language, commit_count) rows.
#[pyfunction]
fn lang_trend(store: &Store, maps: &Maps) -> PyResult<Vec<(i64, String, u64)>> {
    let rows =
        sampler::lang_trend(&maps.inner, &store.inner, &ExtensionTable::default()).map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|(y, l, n): (i64, Language, u64)| (y, l.as_str().to_string(), n))
        .collect())
}

/// Distinct introduced blobs per path for one project.
#[pyfunction]
fn file_change_counts(
    py: Python<'_>,
    maps: &Maps,
    project_id: &str,
) -> PyResult<Py<PyDict>> {
    let counts = sampler::file_change_counts(project_id, &maps.inner).map_err(err)?;
    let dict = PyDict::new(py);
    for (path, n) in counts {
        dict.set_item(path, n)?;
    }
    Ok(dict.unbind())
}

#[pymodule]
fn gitmap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Store>()?;
    m.add_class::<Maps>()?;
    m.add_function(wrap_pyfunction!(classify_path, m)?)?;
    m.add_function(wrap_pyfunction!(project_metadata, m)?)?;
    m.add_function(wrap_pyfunction!(author_metadata, m)?)?;
    m.add_function(wrap_pyfunction!(query_projects, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(fork_clusters, m)?)?;
    m.add_function(wrap_pyfunction!(author_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(identity_groups, m)?)?;
    m.add_function(wrap_pyfunction!(lang_trend, m)?)?;
    m.add_function(wrap_pyfunction!(file_change_counts, m)?)?;
    Ok(())
}
