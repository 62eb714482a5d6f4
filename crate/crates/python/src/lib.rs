//! Python bindings for `bibliomap`.

use std::path::PathBuf;

use bibliomap::indicators::{self, Period, ReferenceBase};
use bibliomap::keywords::{self, KeywordNormalizer, PatternMap};
use bibliomap::mesh::{self, CompiledQuery, LoadOptions, MeshThesaurus, QueryExpr};
use bibliomap::pipeline::{self, MapConfig, RunConfig};
use bibliomap::records::{self, BibRecord, SourceTag};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: bibliomap::Error) -> PyErr {
    match e {
        bibliomap::Error::Io { .. } | bibliomap::Error::Stream(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// One publication record.
#[pyclass(name = "Record", module = "pybibliomap", from_py_object)]
#[derive(Clone)]
struct PyRecord {
    inner: BibRecord,
}

#[pymethods]
impl PyRecord {
    /// Parses one JSON line.
    #[staticmethod]
    fn from_json(line: &str) -> PyResult<Self> {
        serde_json::from_str(line)
            .map(|inner| PyRecord { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        self.inner.to_json_line()
    }

    #[getter]
    fn pmid(&self) -> Option<String> {
        self.inner.pmid.clone()
    }

    #[getter]
    fn wos_id(&self) -> Option<String> {
        self.inner.wos_id.clone()
    }

    #[getter]
    fn doi(&self) -> Option<String> {
        self.inner.doi.clone()
    }

    #[getter]
    fn title(&self) -> String {
        self.inner.title.clone()
    }

    #[getter]
    fn year(&self) -> i32 {
        self.inner.year
    }

    #[getter]
    fn doc_type(&self) -> &'static str {
        self.inner.doc_type.as_str()
    }

    #[getter]
    fn countries(&self) -> Vec<String> {
        self.inner.countries.iter().cloned().collect()
    }

    #[getter]
    fn categories(&self) -> Vec<String> {
        self.inner.categories.iter().cloned().collect()
    }

    #[getter]
    fn keywords(&self) -> Vec<String> {
        self.inner.author_keywords.clone()
    }

    #[getter]
    fn citations(&self) -> Vec<i32> {
        self.inner.citations.clone()
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.display_id()
    }

    fn __repr__(&self) -> String {
        format!("Record({}, {})", self.inner.display_id(), self.inner.year)
    }
}

fn unwrap_records(records: &[PyRecord]) -> Vec<BibRecord> {
    records.iter().map(|r| r.inner.clone()).collect()
}

/// Parses line-delimited records. Returns `(records, malformed, rejected)`.
#[pyfunction]
fn parse_records(text: &str) -> PyResult<(Vec<PyRecord>, usize, usize)> {
    let p = records::parse_records(text.as_bytes(), SourceTag::MedlineLike).map_err(py_err)?;
    let recs = p.records.into_iter().map(|inner| PyRecord { inner }).collect();
    Ok((recs, p.malformed, p.rejected))
}

/// Descriptor thesaurus with tree positions.
#[pyclass(name = "Thesaurus", module = "pybibliomap")]
struct PyThesaurus {
    inner: MeshThesaurus,
}

#[pymethods]
impl PyThesaurus {
    /// Builds from tab-separated `name<TAB>tree number` text.
    #[staticmethod]
    fn from_tsv(text: &str) -> PyResult<Self> {
        let t = mesh::load_thesaurus(text.as_bytes(), LoadOptions::default()).map_err(py_err)?;
        Ok(PyThesaurus { inner: t.thesaurus })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let t = mesh::load_thesaurus_file(&path, LoadOptions::default()).map_err(py_err)?;
        Ok(PyThesaurus { inner: t.thesaurus })
    }

    /// The descriptor and everything below it, sorted.
    fn explode(&self, descriptor: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.explode(descriptor).map_err(py_err)?.into_iter().collect())
    }

    fn __contains__(&self, descriptor: &str) -> bool {
        self.inner.contains(descriptor)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Parsed boolean query.
#[pyclass(name = "Query", module = "pybibliomap")]
struct PyQuery {
    expr: QueryExpr,
}

#[pymethods]
impl PyQuery {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyQuery {
            expr: mesh::parse_query(text).map_err(py_err)?,
        })
    }

    fn matches(&self, record: &PyRecord, thesaurus: &PyThesaurus) -> PyResult<bool> {
        mesh::eval_query(&record.inner, &self.expr, &thesaurus.inner).map_err(py_err)
    }

    /// Records the query selects, in input order.
    fn select(&self, records: Vec<PyRecord>, thesaurus: &PyThesaurus) -> PyResult<Vec<PyRecord>> {
        let q = CompiledQuery::compile(&self.expr, &thesaurus.inner).map_err(py_err)?;
        Ok(records.into_iter().filter(|r| q.matches(&r.inner)).collect())
    }

    fn __str__(&self) -> String {
        self.expr.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Query({:?})", self.expr.to_string())
    }
}

/// Folds case, diacritics, dashes and whitespace. `None` for junk keywords.
#[pyfunction]
fn fold_keyword(raw: &str) -> Option<String> {
    keywords::fold_keyword(raw)
}

/// Canonical form of `raw`; plural forms merge onto a singular found in `vocabulary`.
#[pyfunction]
#[pyo3(signature = (raw, vocabulary = Vec::new()))]
fn normalize_keyword(raw: &str, vocabulary: Vec<String>) -> Option<String> {
    let n = KeywordNormalizer::from_keywords(vocabulary.iter().map(String::as_str));
    n.normalize(raw).map(|t| t.canon)
}

/// Anchored SQL LIKE match with `%` wildcards.
#[pyfunction]
fn like_match(pattern: &str, text: &str) -> bool {
    keywords::like_match(pattern, text)
}

/// Canonical Covid-19 term for a keyword under the bundled pattern map.
#[pyfunction]
fn covid_classify(keyword: &str) -> Option<String> {
    PatternMap::covid_default().classify(keyword).map(str::to_owned)
}

/// Builds, clusters and lays out the keyword map of `records`.
#[pyfunction]
#[pyo3(signature = (records, min_occ = 1, resolution = 1.0, seed = 0, max_iter = 1000))]
fn topic_map<'py>(
    py: Python<'py>,
    records: Vec<PyRecord>,
    min_occ: u64,
    resolution: f64,
    seed: u64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let settings = MapConfig {
        min_occ,
        resolution,
        max_iter,
        tol: 1e-10,
        countries: Vec::new(),
    };
    let m = pipeline::build_map(unwrap_records(&records), &settings, seed).map_err(py_err)?;
    let net = &m.network;
    let d = PyDict::new(py);
    d.set_item("terms", net.nodes.iter().map(|n| n.term.clone()).collect::<Vec<_>>())?;
    d.set_item("occurrences", net.nodes.iter().map(|n| n.occ).collect::<Vec<_>>())?;
    d.set_item("clusters", net.clusters.clone())?;
    d.set_item(
        "coords",
        net.coords
            .as_ref()
            .map(|c| c.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>()),
    )?;
    d.set_item(
        "edges",
        net.edges.iter().map(|e| (e.i, e.j, e.cooc, e.sim)).collect::<Vec<_>>(),
    )?;
    d.set_item("removed_documents", m.cleaning.removed)?;
    Ok(d)
}

/// `(D_c / T_c) / (D_w / T_w)`; `None` when undefined.
#[pyfunction]
fn specialization_index(d_c: u64, t_c: u64, d_w: u64, t_w: u64) -> Option<f64> {
    indicators::specialization_from_counts(d_c, t_c, d_w, t_w)
}

/// Relative change between two counts; `None` on a zero baseline.
#[pyfunction]
fn growth(from: u64, to: u64) -> Option<f64> {
    indicators::growth(from, to)
}

/// Field-normalized citation impact of `country` ("WORLD" for all) over
/// `start..=end`, against the publications in `reference`.
#[pyfunction]
#[pyo3(signature = (corpus, reference, country, start, end, window = 2, complete_through = None))]
fn impact_index(
    corpus: Vec<PyRecord>,
    reference: Vec<PyRecord>,
    country: &str,
    start: i32,
    end: i32,
    window: u32,
    complete_through: Option<i32>,
) -> PyResult<Option<f64>> {
    let corpus = unwrap_records(&corpus);
    let reference = unwrap_records(&reference);
    let through = complete_through
        .or_else(|| {
            reference
                .iter()
                .flat_map(|r| r.citations.iter().copied().chain([r.year]))
                .max()
        })
        .unwrap_or(end);
    let base = ReferenceBase::from_records(&reference, through);
    let period = Period::span(start, end).map_err(py_err)?;
    indicators::impact_index(&corpus, &base, country, &period, window).map_err(py_err)
}

/// Runs every pipeline stage for a TOML config and returns the summary table.
#[pyfunction]
#[pyo3(signature = (config, out = None))]
fn run_report(config: PathBuf, out: Option<PathBuf>) -> PyResult<String> {
    let mut cfg = RunConfig::load(&config).map_err(py_err)?;
    if let Some(o) = out {
        cfg.out = o;
    }
    pipeline::cmd_report(&cfg).map_err(py_err)
}

#[pymodule]
pub fn pybibliomap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRecord>()?;
    m.add_class::<PyThesaurus>()?;
    m.add_class::<PyQuery>()?;
    m.add_function(wrap_pyfunction!(parse_records, m)?)?;
    m.add_function(wrap_pyfunction!(fold_keyword, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_keyword, m)?)?;
    m.add_function(wrap_pyfunction!(like_match, m)?)?;
    m.add_function(wrap_pyfunction!(covid_classify, m)?)?;
    m.add_function(wrap_pyfunction!(topic_map, m)?)?;
    m.add_function(wrap_pyfunction!(specialization_index, m)?)?;
    m.add_function(wrap_pyfunction!(growth, m)?)?;
    m.add_function(wrap_pyfunction!(impact_index, m)?)?;
    m.add_function(wrap_pyfunction!(run_report, m)?)?;
    m.add("WORLD", indicators::WORLD)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
