//! Publication records and the line-delimited record format.
//!
//! Each input line is one JSON object with the fixed field names `pmid`,
//! `wos_id`, `doi`, `title`, `year`, `doc_type`, `countries`, `categories`,
//! `mesh` (objects `{"d": name, "maj": bool}`), `keywords`, `cites` (one
//! citing year per citation event) and `retracted`. Absent optional fields
//! are omitted on output.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Accepted publication years.
pub const YEAR_RANGE: RangeInclusive<i32> = 1900..=2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DocType {
    Article,
    ProceedingsPaper,
    Review,
    Letter,
    #[serde(other)]
    Other,
}

impl DocType {
    pub const ALL: [DocType; 5] = [
        DocType::Article,
        DocType::ProceedingsPaper,
        DocType::Review,
        DocType::Letter,
        DocType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "Article",
            DocType::ProceedingsPaper => "ProceedingsPaper",
            DocType::Review => "Review",
            DocType::Letter => "Letter",
            DocType::Other => "Other",
        }
    }

    pub fn parse(s: &str) -> Option<DocType> {
        DocType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which input stream a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceTag {
    /// Thesaurus-indexed bibliographic database (PMID keyed).
    MedlineLike,
    /// Citation index with journal categories and citation links.
    CitationIndexLike,
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceTag::MedlineLike => "medline",
            SourceTag::CitationIndexLike => "citation-index",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeshTerm {
    #[serde(rename = "d")]
    pub descriptor: String,
    #[serde(rename = "maj", default)]
    pub major: bool,
}

impl MeshTerm {
    pub fn new(descriptor: impl Into<String>, major: bool) -> Self {
        MeshTerm {
            descriptor: descriptor.into(),
            major,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibRecord {
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "de_identifier")]
    pub pmid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "de_identifier")]
    pub wos_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "de_doi")]
    pub doi: Option<String>,
    #[serde(default)]
    pub title: String,
    pub year: i32,
    pub doc_type: DocType,
    #[serde(default)]
    pub countries: BTreeSet<String>,
    #[serde(default)]
    pub categories: BTreeSet<String>,
    #[serde(rename = "mesh", default)]
    pub mesh_terms: Vec<MeshTerm>,
    #[serde(rename = "keywords", default)]
    pub author_keywords: Vec<String>,
    #[serde(rename = "cites", default)]
    pub citations: Vec<i32>,
    #[serde(default)]
    pub retracted: bool,
}

impl BibRecord {
    /// A minimal record with no metadata beyond its identifiers, year and type.
    pub fn new(pmid: Option<&str>, wos_id: Option<&str>, year: i32, doc_type: DocType) -> Self {
        BibRecord {
            pmid: pmid.map(str::to_owned),
            wos_id: wos_id.map(str::to_owned),
            doi: None,
            title: String::new(),
            year,
            doc_type,
            countries: BTreeSet::new(),
            categories: BTreeSet::new(),
            mesh_terms: Vec::new(),
            author_keywords: Vec::new(),
            citations: Vec::new(),
            retracted: false,
        }
    }

    /// Identifier used in selection files: `pmid:<id>` when present, else `wos:<id>`.
    pub fn display_id(&self) -> String {
        match (&self.pmid, &self.wos_id) {
            (Some(p), _) => format!("pmid:{p}"),
            (None, Some(w)) => format!("wos:{w}"),
            (None, None) => "unidentified".to_owned(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }
}

/// Lowercases and strips resolver prefixes from a DOI.
pub fn normalize_doi(raw: &str) -> Option<String> {
    let lower = raw.trim().to_lowercase();
    let mut s = lower.as_str();
    for prefix in [
        "https://doi.org/",
        "http://doi.org/",
        "https://dx.doi.org/",
        "http://dx.doi.org/",
        "doi:",
    ] {
        if let Some(rest) = s.strip_prefix(prefix) {
            s = rest;
            break;
        }
    }
    let s = s.trim();
    (!s.is_empty()).then(|| s.to_owned())
}

fn de_identifier<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let v: Option<String> = Option::deserialize(d)?;
    Ok(v.map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()))
}

fn de_doi<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let v: Option<String> = Option::deserialize(d)?;
    Ok(v.as_deref().and_then(normalize_doi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    MissingIdentifier,
    YearOutOfRange,
    CitationBeforePublication,
}

impl Violation {
    pub fn label(self) -> &'static str {
        match self {
            Violation::MissingIdentifier => "missing_identifier",
            Violation::YearOutOfRange => "year_out_of_range",
            Violation::CitationBeforePublication => "citation_before_publication",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Lists every record invariant the record breaks.
pub fn validate_record(record: &BibRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    let present = |id: &Option<String>| id.as_deref().is_some_and(|s| !s.trim().is_empty());
    if !present(&record.pmid) && !present(&record.wos_id) {
        out.push(Violation::MissingIdentifier);
    }
    if !YEAR_RANGE.contains(&record.year) {
        out.push(Violation::YearOutOfRange);
    }
    if record.citations.iter().any(|&c| c < record.year) {
        out.push(Violation::CitationBeforePublication);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineIssue {
    Malformed(String),
    Rejected(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based line number.
    pub line: usize,
    pub issue: LineIssue,
}

impl fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.issue {
            LineIssue::Malformed(msg) => write!(f, "line {}: malformed: {}", self.line, msg),
            LineIssue::Rejected(v) => {
                let labels: Vec<_> = v.iter().map(|v| v.label()).collect();
                write!(f, "line {}: rejected: {}", self.line, labels.join(","))
            }
        }
    }
}

/// Records parsed from one stream, with per-line diagnostics.
#[derive(Debug, Clone)]
pub struct ParsedSource {
    pub source: SourceTag,
    pub records: Vec<BibRecord>,
    pub malformed: usize,
    pub rejected: usize,
    pub diagnostics: Vec<LineDiagnostic>,
}

impl ParsedSource {
    pub fn accepted(&self) -> usize {
        self.records.len()
    }

    /// Lines skipped for any reason.
    pub fn skipped(&self) -> usize {
        self.malformed + self.rejected
    }
}

/// Parses a line-delimited record stream. Blank lines count as malformed.
pub fn parse_records<R: BufRead>(reader: R, source: SourceTag) -> Result<ParsedSource> {
    let mut out = ParsedSource {
        source,
        records: Vec::new(),
        malformed: 0,
        rejected: 0,
        diagnostics: Vec::new(),
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            out.malformed += 1;
            out.diagnostics.push(LineDiagnostic {
                line: lineno,
                issue: LineIssue::Malformed("blank line".into()),
            });
            continue;
        }
        match serde_json::from_str::<BibRecord>(&line) {
            Err(e) => {
                out.malformed += 1;
                out.diagnostics.push(LineDiagnostic {
                    line: lineno,
                    issue: LineIssue::Malformed(e.to_string()),
                });
            }
            Ok(record) => {
                let violations = validate_record(&record);
                if violations.is_empty() {
                    out.records.push(record);
                } else {
                    out.rejected += 1;
                    out.diagnostics.push(LineDiagnostic {
                        line: lineno,
                        issue: LineIssue::Rejected(violations),
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn parse_records_file(path: &Path, source: SourceTag) -> Result<ParsedSource> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_records(BufReader::new(file), source)
}

pub fn write_records<W: Write>(mut writer: W, records: &[BibRecord]) -> Result<()> {
    for r in records {
        writeln!(writer, "{}", r.to_json_line())?;
    }
    Ok(())
}
