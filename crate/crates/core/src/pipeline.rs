//! Subcommand orchestration over a declarative run configuration.
//!
//! Every command writes its outputs under `<out>/<command>/` together with a
//! `manifest.json` recording the effective settings, a hash of them and
//! SHA-256 digests of every input file. Outputs carry no timestamps and no
//! absolute paths, so identical inputs give byte-identical trees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{self, CoverageReport, LinkedCorpus, MatchPolicy};
use crate::error::{Error, Result};
use crate::indicators::{self, IndicatorRequest, IndicatorTable, Period, ReferenceBase, Theme};
use crate::keywords::{self, CleanOutcome, PatternMap};
use crate::mesh::{self, CompiledQuery, LoadOptions, MeshThesaurus, QueryExpr, TraceLine};
use crate::records::{self, BibRecord, DocType, ParsedSource, SourceTag};
use crate::topicmap::{self, ClusterParams, LayoutParams, MapTables, TermNetwork};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub source_a: PathBuf,
    pub source_b: PathBuf,
    pub thesaurus: PathBuf,
    /// Keyword pattern map; the built-in Covid map when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patterns: Option<PathBuf>,
    /// All-domain reference records; source B when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default = "default_max_depth")]
    pub max_tree_depth: usize,
}

fn default_max_depth() -> usize {
    mesh::MAX_TREE_DEPTH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub categories: Vec<String>,
    #[serde(default = "default_keep_types")]
    pub keep_types: Vec<DocType>,
    #[serde(default = "yes")]
    pub match_doi: bool,
    #[serde(default = "yes")]
    pub match_title: bool,
}

fn default_keep_types() -> Vec<DocType> {
    corpus::default_keep_types().into_iter().collect()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    #[serde(default = "default_min_occ")]
    pub min_occ: u64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Countries to overlay as activity columns.
    #[serde(default)]
    pub countries: Vec<String>,
}

fn default_min_occ() -> u64 {
    topicmap::DEFAULT_MIN_OCC
}
fn default_resolution() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    1000
}
fn default_tol() -> f64 {
    1e-10
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            min_occ: default_min_occ(),
            resolution: default_resolution(),
            max_iter: default_max_iter(),
            tol: default_tol(),
            countries: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    /// Citation baselines from the domain corpus itself.
    Domain,
    /// Citation baselines from the reference records.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    #[serde(default = "default_window")]
    pub window: u32,
    /// `"2000"` or `"2005-2009"`; every publication year when empty.
    #[serde(default)]
    pub periods: Vec<String>,
    /// Periods with impact computed; all of `periods` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact_periods: Option<Vec<String>>,
    /// Every country in the domain corpus when empty.
    #[serde(default)]
    pub countries: Vec<String>,
    /// Last year with complete citation data; the latest reference
    /// publication year when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citations_complete_through: Option<i32>,
    #[serde(default = "default_baseline")]
    pub baseline: Baseline,
}

fn default_window() -> u32 {
    indicators::DEFAULT_CITATION_WINDOW
}
fn default_baseline() -> Baseline {
    Baseline::Domain
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        IndicatorConfig {
            window: default_window(),
            periods: Vec::new(),
            impact_periods: None,
            countries: Vec::new(),
            citations_complete_through: None,
            baseline: default_baseline(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovidConfig {
    #[serde(default = "default_covid_first")]
    pub first_year: i32,
    #[serde(default = "default_covid_last")]
    pub last_year: i32,
}

fn default_covid_first() -> i32 {
    2019
}
fn default_covid_last() -> i32 {
    2020
}

impl Default for CovidConfig {
    fn default() -> Self {
        CovidConfig {
            first_year: default_covid_first(),
            last_year: default_covid_last(),
        }
    }
}

/// Full run configuration. Relative paths resolve against `base_dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    pub inputs: InputPaths,
    pub query: QueryConfig,
    pub build: BuildConfig,
    #[serde(default)]
    pub map: MapConfig,
    #[serde(default)]
    pub covid: CovidConfig,
    #[serde(default)]
    pub indicators: IndicatorConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_toml(&text, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Output directory; relative paths resolve against the working
    /// directory, not the config location.
    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    /// Checks paths and value ranges.
    pub fn validate(&self) -> Result<()> {
        let mut paths = vec![&self.inputs.source_a, &self.inputs.source_b, &self.inputs.thesaurus];
        paths.extend(self.inputs.patterns.iter());
        paths.extend(self.inputs.reference.iter());
        paths.extend(self.query.file.iter());
        for p in paths {
            let r = self.resolve(p);
            if !r.is_file() {
                return Err(Error::Config(format!("input {} does not exist", p.display())));
            }
        }
        match (&self.query.text, &self.query.file) {
            (Some(_), Some(_)) => return Err(Error::Config("set only one of query.text and query.file".into())),
            (None, None) => return Err(Error::Config("query.text or query.file is required".into())),
            _ => {}
        }
        if self.build.categories.is_empty() {
            return Err(Error::Config("build.categories is empty".into()));
        }
        if self.map.min_occ < 1 {
            return Err(Error::Config("map.min_occ must be at least 1".into()));
        }
        if !(self.map.resolution.is_finite() && self.map.resolution > 0.0) {
            return Err(Error::Config("map.resolution must be positive".into()));
        }
        if self.map.max_iter == 0 {
            return Err(Error::Config("map.max_iter must be at least 1".into()));
        }
        if !(self.map.tol.is_finite() && self.map.tol >= 0.0) {
            return Err(Error::Config("map.tol must be non-negative".into()));
        }
        if self.indicators.window == 0 {
            return Err(Error::Config("indicators.window must be at least 1".into()));
        }
        if self.covid.first_year > self.covid.last_year {
            return Err(Error::Config("covid.first_year is after covid.last_year".into()));
        }
        for p in self
            .indicators
            .periods
            .iter()
            .chain(self.indicators.impact_periods.iter().flatten())
        {
            Period::parse(p)?;
        }
        Ok(())
    }

    /// Query text, read from file when configured that way.
    pub fn query_text(&self) -> Result<String> {
        let text = match (&self.query.text, &self.query.file) {
            (Some(t), _) => t.clone(),
            (None, Some(f)) => {
                let p = self.resolve(f);
                fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?
            }
            (None, None) => String::new(),
        };
        if text.trim().is_empty() {
            return Err(Error::Config("query is empty".into()));
        }
        Ok(text)
    }

    /// SHA-256 of the effective configuration (output directory excluded).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    config: &'a RunConfig,
    inputs: BTreeMap<&'a str, String>,
    settings: serde_json::Value,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn stage_dir(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    let dir = cfg.out_dir().join(name);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_manifest(
    cfg: &RunConfig,
    dir: &Path,
    command: &str,
    inputs: &[(&'static str, PathBuf)],
    settings: serde_json::Value,
) -> Result<()> {
    let mut digests = BTreeMap::new();
    for (name, p) in inputs {
        digests.insert(*name, sha256_file(p)?);
    }
    let m = Manifest {
        command,
        version: VERSION,
        config_sha256: cfg.hash(),
        config: cfg,
        inputs: digests,
        settings,
    };
    let mut json = serde_json::to_string_pretty(&m).expect("manifest serializes");
    json.push('\n');
    write_file(&dir.join("manifest.json"), &json)
}

fn records_jsonl(records: &[BibRecord]) -> Result<String> {
    let mut buf = Vec::new();
    records::write_records(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("records serialize as UTF-8"))
}

fn source_tsv(sources: &[(&str, &ParsedSource)]) -> String {
    let mut s = String::from("source\taccepted\tmalformed\trejected\n");
    for (name, p) in sources {
        let _ = writeln!(s, "{name}\t{}\t{}\t{}", p.accepted(), p.malformed, p.rejected);
    }
    s
}

/// Loaded thesaurus, compiled query and source A.
pub struct QueryStage {
    pub expr: QueryExpr,
    pub compiled: CompiledQuery,
    pub thesaurus: MeshThesaurus,
    pub source_a: ParsedSource,
    pub selected: Vec<BibRecord>,
}

pub fn run_query_stage(cfg: &RunConfig) -> Result<QueryStage> {
    let expr = mesh::parse_query(&cfg.query_text()?)?;
    let thesaurus = mesh::load_thesaurus_file(
        &cfg.resolve(&cfg.inputs.thesaurus),
        LoadOptions {
            max_depth: Some(cfg.query.max_tree_depth),
        },
    )?
    .thesaurus;
    let compiled = CompiledQuery::compile(&expr, &thesaurus)?;
    let source_a = records::parse_records_file(&cfg.resolve(&cfg.inputs.source_a), SourceTag::MedlineLike)?;
    let selected = source_a
        .records
        .iter()
        .filter(|r| compiled.matches(r))
        .cloned()
        .collect();
    Ok(QueryStage {
        expr,
        compiled,
        thesaurus,
        source_a,
        selected,
    })
}

fn query_inputs(cfg: &RunConfig) -> Vec<(&'static str, PathBuf)> {
    let mut v = vec![
        ("source_a", cfg.resolve(&cfg.inputs.source_a)),
        ("thesaurus", cfg.resolve(&cfg.inputs.thesaurus)),
    ];
    if let Some(f) = &cfg.query.file {
        v.push(("query", cfg.resolve(f)));
    }
    v
}

pub struct QueryOutcome {
    pub hits: usize,
    pub stage: QueryStage,
}

/// Selects source-A records; writes `query/selection.tsv`,
/// `query/ledger.tsv` and the manifest.
pub fn cmd_query(cfg: &RunConfig) -> Result<QueryOutcome> {
    cfg.validate()?;
    let stage = run_query_stage(cfg)?;
    let dir = stage_dir(cfg, "query")?;
    let mut sel = String::from("id\n");
    for r in &stage.selected {
        let _ = writeln!(sel, "{}", r.display_id());
    }
    write_file(&dir.join("selection.tsv"), &sel)?;
    write_file(
        &dir.join("ledger.tsv"),
        &format!(
            "stage\tcount\nrecords_A\t{}\nmalformed_A\t{}\nrejected_A\t{}\nselected_A\t{}\n",
            stage.source_a.accepted(),
            stage.source_a.malformed,
            stage.source_a.rejected,
            stage.selected.len()
        ),
    )?;
    write_manifest(
        cfg,
        &dir,
        "query",
        &query_inputs(cfg),
        serde_json::json!({ "query": stage.expr.to_string() }),
    )?;
    Ok(QueryOutcome {
        hits: stage.selected.len(),
        stage,
    })
}

/// Evaluation trace of the query on the source-A record whose PMID,
/// citation-index id or display id equals `id`.
pub fn explain(cfg: &RunConfig, id: &str) -> Result<Vec<TraceLine>> {
    let stage = run_query_stage(cfg)?;
    let r = stage
        .source_a
        .records
        .iter()
        .find(|r| r.pmid.as_deref() == Some(id) || r.wos_id.as_deref() == Some(id) || r.display_id() == id)
        .ok_or_else(|| Error::Config(format!("no source-A record with id {id}")))?;
    Ok(stage.compiled.explain(r))
}

pub fn format_trace(trace: &[TraceLine]) -> String {
    let mut s = String::new();
    for t in trace {
        let _ = writeln!(s, "{}{} => {}", "  ".repeat(t.depth), t.label, t.value);
    }
    s
}

pub struct BuildOutcome {
    pub corpus: LinkedCorpus,
    pub report: CoverageReport,
    pub source_b: ParsedSource,
}

fn build_inputs(cfg: &RunConfig) -> Vec<(&'static str, PathBuf)> {
    let mut v = query_inputs(cfg);
    v.push(("source_b", cfg.resolve(&cfg.inputs.source_b)));
    v
}

/// Query, link, category union, filters and coverage report; writes
/// `build/corpus.jsonl`, `provenance.tsv`, `ledger.tsv`, `coverage.tsv`,
/// `sources.tsv` and the manifest.
pub fn cmd_build(cfg: &RunConfig) -> Result<BuildOutcome> {
    cfg.validate()?;
    let q = run_query_stage(cfg)?;
    let source_b = records::parse_records_file(&cfg.resolve(&cfg.inputs.source_b), SourceTag::CitationIndexLike)?;
    let policy = MatchPolicy {
        use_doi: cfg.build.match_doi,
        use_title: cfg.build.match_title,
    };
    let linked = corpus::link(&q.selected, &source_b.records, policy);
    linked.ledger.check()?;
    let categories: BTreeSet<String> = cfg.build.categories.iter().cloned().collect();
    let unioned = corpus::union_with_categories(linked, &source_b.records, &categories)?;
    let keep: BTreeSet<DocType> = cfg.build.keep_types.iter().copied().collect();
    let filtered = corpus::apply_filters(unioned, &keep);
    filtered.ledger.check()?;
    let report = corpus::coverage_report(&filtered.ledger);

    let dir = stage_dir(cfg, "build")?;
    write_file(&dir.join("corpus.jsonl"), &records_jsonl(&filtered.bib_records())?)?;
    write_file(&dir.join("provenance.tsv"), &filtered.provenance_tsv())?;
    write_file(&dir.join("ledger.tsv"), &filtered.ledger.to_tsv())?;
    write_file(&dir.join("coverage.tsv"), &report.to_tsv())?;
    let mut ledger_json = serde_json::to_string_pretty(&report).expect("report serializes");
    ledger_json.push('\n');
    write_file(&dir.join("ledger.json"), &ledger_json)?;
    write_file(
        &dir.join("sources.tsv"),
        &source_tsv(&[("A", &q.source_a), ("B", &source_b)]),
    )?;
    write_manifest(
        cfg,
        &dir,
        "build",
        &build_inputs(cfg),
        serde_json::json!({
            "query": q.expr.to_string(),
            "match_tiers": ["pmid", "doi", "title+year"],
            "ambiguity": "keys shared by several records on either side are withheld from every later tier",
        }),
    )?;
    Ok(BuildOutcome {
        corpus: filtered,
        report,
        source_b,
    })
}

/// Analysis corpus: read from `corpus` when given (a `build/corpus.jsonl`
/// from an earlier run), otherwise built in process.
fn analysis_corpus(cfg: &RunConfig, corpus: Option<&Path>) -> Result<(Vec<BibRecord>, Vec<(&'static str, PathBuf)>)> {
    match corpus {
        Some(p) => {
            let parsed = records::parse_records_file(p, SourceTag::CitationIndexLike)?;
            if parsed.skipped() > 0 {
                return Err(Error::Invalid(format!(
                    "{} unreadable lines in {}",
                    parsed.skipped(),
                    p.display()
                )));
            }
            Ok((parsed.records, vec![("corpus", p.to_path_buf())]))
        }
        None => Ok((cmd_build(cfg)?.corpus.bib_records(), build_inputs(cfg))),
    }
}

pub struct MapOutcome {
    pub cleaning: CleanOutcome,
    pub network: TermNetwork,
    pub tables: MapTables,
}

/// Cleans keywords of the records that carry any and builds the clustered,
/// laid-out map.
pub fn build_map(records: Vec<BibRecord>, settings: &MapConfig, seed: u64) -> Result<MapOutcome> {
    let with_keywords: Vec<BibRecord> = records.into_iter().filter(|r| !r.author_keywords.is_empty()).collect();
    let cleaning = keywords::clean_corpus(with_keywords);
    let mut net = topicmap::build_network(&cleaning.records, settings.min_occ)?;
    if net.is_empty() {
        return Err(Error::Invalid(format!(
            "no keyword reaches min_occ = {} ({} documents after cleaning)",
            settings.min_occ,
            cleaning.kept()
        )));
    }
    topicmap::association_strength(&mut net);
    net.clusters = Some(topicmap::cluster(
        &net,
        ClusterParams {
            resolution: settings.resolution,
            seed,
        },
    ));
    let lay = topicmap::layout(
        &net,
        LayoutParams {
            seed,
            max_iter: settings.max_iter,
            tol: settings.tol,
        },
    )?;
    net.coords = Some(lay.coords);
    let mut activity = Vec::new();
    for c in &settings.countries {
        activity.push((c.clone(), topicmap::country_activity_overlay(&net, c)?));
    }
    let tables = MapTables::from_network(&net, activity);
    Ok(MapOutcome {
        cleaning,
        network: net,
        tables,
    })
}

/// Writes `map/nodes.tsv`, `edges.tsv`, `cleaning.tsv` and the manifest.
pub fn cmd_map(cfg: &RunConfig, corpus: Option<&Path>) -> Result<MapOutcome> {
    cfg.validate()?;
    let (records, inputs) = analysis_corpus(cfg, corpus)?;
    let out = build_map(records, &cfg.map, cfg.seed)?;
    let dir = stage_dir(cfg, "map")?;
    write_file(&dir.join("nodes.tsv"), &out.tables.nodes_tsv())?;
    write_file(&dir.join("edges.tsv"), &out.tables.edges_tsv())?;
    write_file(
        &dir.join("cleaning.tsv"),
        &format!(
            "stage\tcount\nwith_keywords\t{}\nremoved\t{}\nkept\t{}\n",
            out.cleaning.input,
            out.cleaning.removed,
            out.cleaning.kept()
        ),
    )?;
    write_manifest(
        cfg,
        &dir,
        "map",
        &inputs,
        serde_json::json!({
            "counting": "full",
            "similarity": "association strength",
            "nodes": out.network.len(),
            "edges": out.network.edges.len(),
            "clusters": out.network.clusters.as_ref().map_or(0, |c| c.iter().max().map_or(0, |m| m + 1)),
        }),
    )?;
    Ok(out)
}

fn pattern_map(cfg: &RunConfig) -> Result<PatternMap> {
    match &cfg.inputs.patterns {
        Some(p) => PatternMap::load(&cfg.resolve(p)),
        None => Ok(PatternMap::covid_default()),
    }
}

/// Covid sub-corpus of an analysis corpus: keywords cleaned, then filtered
/// by the pattern map within the configured years.
pub fn covid_subcorpus(cfg: &RunConfig, records: Vec<BibRecord>) -> Result<Vec<BibRecord>> {
    let cleaned = keywords::clean_corpus(records);
    keywords::covid_filter(
        &cleaned.records,
        &pattern_map(cfg)?,
        cfg.covid.first_year..=cfg.covid.last_year,
    )
}

fn with_patterns(cfg: &RunConfig, mut inputs: Vec<(&'static str, PathBuf)>) -> Vec<(&'static str, PathBuf)> {
    if let Some(p) = &cfg.inputs.patterns {
        inputs.push(("patterns", cfg.resolve(p)));
    }
    inputs
}

/// Writes `covid/corpus.jsonl`, `covid/terms.tsv` and the manifest.
pub fn cmd_covid(cfg: &RunConfig, corpus: Option<&Path>) -> Result<Vec<BibRecord>> {
    cfg.validate()?;
    let (records, inputs) = analysis_corpus(cfg, corpus)?;
    let sub = covid_subcorpus(cfg, records)?;
    let map = pattern_map(cfg)?;
    let canon = map.canonical_terms();
    let mut counts: BTreeMap<&str, usize> = canon.iter().map(|&t| (t, 0)).collect();
    for r in &sub {
        for k in &r.author_keywords {
            if let Some(c) = counts.get_mut(k.as_str()) {
                *c += 1;
            }
        }
    }
    let mut terms = String::from("term\tdocuments\n");
    for (t, c) in &counts {
        let _ = writeln!(terms, "{t}\t{c}");
    }
    let dir = stage_dir(cfg, "covid")?;
    write_file(&dir.join("corpus.jsonl"), &records_jsonl(&sub)?)?;
    write_file(&dir.join("terms.tsv"), &terms)?;
    write_manifest(
        cfg,
        &dir,
        "covid",
        &with_patterns(cfg, inputs),
        serde_json::json!({ "patterns": map.len(), "documents": sub.len() }),
    )?;
    Ok(sub)
}

fn reference_records(cfg: &RunConfig) -> Result<(Vec<BibRecord>, PathBuf)> {
    let path = cfg.resolve(cfg.inputs.reference.as_ref().unwrap_or(&cfg.inputs.source_b));
    let parsed = records::parse_records_file(&path, SourceTag::CitationIndexLike)?;
    let keep: BTreeSet<DocType> = cfg.build.keep_types.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let records = parsed
        .records
        .into_iter()
        .filter(|r| keep.contains(&r.doc_type) && !r.retracted && !r.countries.is_empty() && !r.categories.is_empty())
        .filter(|r| match r.wos_id.clone().or_else(|| r.pmid.clone()) {
            Some(k) => seen.insert(k),
            None => true,
        })
        .collect();
    Ok((records, path))
}

fn parse_periods(specs: &[String]) -> Result<Vec<Period>> {
    specs.iter().map(|s| Period::parse(s)).collect()
}

/// Builds the indicator table for the domain and its Covid sub-corpus.
pub fn compute_indicators(
    cfg: &RunConfig,
    domain: &[BibRecord],
    reference_pool: &[BibRecord],
) -> Result<IndicatorTable> {
    let s = &cfg.indicators;
    let complete = match s.citations_complete_through {
        Some(y) => y,
        None => reference_pool
            .iter()
            .map(|r| r.year)
            .max()
            .ok_or_else(|| Error::Invalid("reference set is empty".into()))?,
    };
    let mut reference = ReferenceBase::from_records(reference_pool, complete);
    if s.baseline == Baseline::Domain {
        reference = reference.with_baseline(domain);
    }
    let domain_counts = indicators::count_series(domain);
    reference.check_dominates(&domain_counts)?;

    let periods = if s.periods.is_empty() {
        let years: BTreeSet<i32> = domain.iter().map(|r| r.year).collect();
        years.into_iter().map(Period::year).collect()
    } else {
        parse_periods(&s.periods)?
    };
    let impact_periods = match &s.impact_periods {
        Some(p) => parse_periods(p)?,
        None => periods.clone(),
    };
    let countries: Vec<String> = if s.countries.is_empty() {
        let all: BTreeSet<&String> = domain.iter().flat_map(|r| &r.countries).collect();
        all.into_iter().cloned().collect()
    } else {
        s.countries.clone()
    };
    let covid = covid_subcorpus(cfg, domain.to_vec())?;
    let req = IndicatorRequest {
        countries,
        periods,
        impact_periods,
        window: s.window,
    };
    indicators::indicator_table(
        &[
            Theme {
                name: "domain",
                records: domain,
            },
            Theme {
                name: "covid",
                records: &covid,
            },
        ],
        &reference,
        &req,
    )
}

/// Writes `indicators/indicators.tsv`, `counts.tsv` and the manifest.
pub fn cmd_indicators(cfg: &RunConfig, corpus: Option<&Path>) -> Result<IndicatorTable> {
    cfg.validate()?;
    let (domain, mut inputs) = analysis_corpus(cfg, corpus)?;
    let (reference, ref_path) = reference_records(cfg)?;
    if cfg.inputs.reference.is_some() {
        inputs.push(("reference", ref_path));
    }
    let table = compute_indicators(cfg, &domain, &reference)?;
    let dir = stage_dir(cfg, "indicators")?;
    write_file(&dir.join("indicators.tsv"), &table.to_tsv())?;
    write_file(&dir.join("counts.tsv"), &indicators::count_series(&domain).to_tsv())?;
    let s = &cfg.indicators;
    write_manifest(
        cfg,
        &dir,
        "indicators",
        &with_patterns(cfg, inputs),
        serde_json::json!({
            "counting": "whole",
            "window": s.window,
            "periods": s.periods,
            "impact_periods": s.impact_periods.as_ref().unwrap_or(&s.periods),
            "category_fractionation": "1/k",
            "cell_weighting": "fractional publication count",
            "baseline": s.baseline,
        }),
    )?;
    Ok(table)
}

/// Runs every stage from the sources, writing all stage directories plus
/// `report/summary.tsv`. Later stages read the freshly written build corpus.
pub fn cmd_report(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let q = cmd_query(cfg)?;
    let build = cmd_build(cfg)?;
    let corpus_path = cfg.out_dir().join("build").join("corpus.jsonl");
    let map = cmd_map(cfg, Some(&corpus_path))?;
    let covid = cmd_covid(cfg, Some(&corpus_path))?;
    let table = cmd_indicators(cfg, Some(&corpus_path))?;

    let mut s = build.report.to_tsv();
    let clusters = map
        .network
        .clusters
        .as_ref()
        .map_or(0, |c| c.iter().max().map_or(0, |m| m + 1));
    for (name, v) in [
        ("query_selected_lines", q.hits),
        ("keyword_input", map.cleaning.input),
        ("keyword_removed", map.cleaning.removed),
        ("keyword_kept", map.cleaning.kept()),
        ("map_nodes", map.network.len()),
        ("map_edges", map.network.edges.len()),
        ("map_clusters", clusters),
        ("covid_documents", covid.len()),
        ("indicator_rows", table.rows.len()),
    ] {
        let _ = writeln!(s, "{name}\t{v}");
    }
    let dir = stage_dir(cfg, "report")?;
    write_file(&dir.join("summary.tsv"), &s)?;
    write_manifest(
        cfg,
        &dir,
        "report",
        &with_patterns(cfg, build_inputs(cfg)),
        serde_json::json!({}),
    )?;
    Ok(s)
}
