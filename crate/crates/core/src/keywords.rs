//! Author keyword normalization and the keyword pattern filter used to carve
//! out the Covid-19 sub-corpus.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::ops::RangeInclusive;
use std::path::Path;

use crate::error::{Error, Result};
use crate::records::BibRecord;
use crate::text::{collapse_whitespace, fold_diacritics_lower, is_dash};

/// Minimum stem length (in characters) for plural merging.
pub const MIN_STEM_CHARS: usize = 4;

/// The six canonical terms the default Covid pattern map resolves to.
pub const COVID_CANONICAL_TERMS: [&str; 6] = [
    "2019 ncov",
    "coronavirus",
    "covid",
    "sars cov 2",
    "wuhan seafood market pneumonia virus",
    "sars cov2",
];

const DEFAULT_COVID_PATTERNS: &str = include_str!("../data/covid_patterns.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeywordToken {
    pub raw: String,
    pub canon: String,
}

/// Case, diacritic, hyphen and whitespace folding without plural merging.
/// `None` when nothing alphanumeric survives.
pub fn fold_keyword(raw: &str) -> Option<String> {
    let folded: String = fold_diacritics_lower(raw)
        .chars()
        .map(|c| if is_dash(c) { ' ' } else { c })
        .collect();
    let collapsed = collapse_whitespace(&folded);
    let trimmed = collapsed.trim_matches(|c: char| !c.is_alphanumeric());
    is_canonical_form(trimmed).then(|| trimmed.to_owned())
}

/// Checks the canonical-token invariants (plural merging aside).
pub fn is_canonical_form(s: &str) -> bool {
    !s.is_empty()
        && s.chars().any(char::is_alphanumeric)
        && fold_diacritics_lower(s) == s
        && collapse_whitespace(s) == s
}

/// Two-pass normalizer: the first pass records the folded vocabulary of the
/// corpus, the second folds each keyword and merges plural forms onto a
/// singular that occurs in that vocabulary.
#[derive(Debug, Clone, Default)]
pub struct KeywordNormalizer {
    vocabulary: HashSet<String>,
}

impl KeywordNormalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keywords<'a, I: IntoIterator<Item = &'a str>>(keywords: I) -> Self {
        KeywordNormalizer {
            vocabulary: keywords.into_iter().filter_map(fold_keyword).collect(),
        }
    }

    pub fn from_records(records: &[BibRecord]) -> Self {
        Self::from_keywords(
            records
                .iter()
                .flat_map(|r| r.author_keywords.iter().map(String::as_str)),
        )
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn normalize(&self, raw: &str) -> Option<KeywordToken> {
        let folded = fold_keyword(raw)?;
        Some(KeywordToken {
            raw: raw.to_owned(),
            canon: self.merge_plural(folded),
        })
    }

    fn singular_of(&self, s: &str) -> Option<String> {
        for suffix in ["s", "es"] {
            if let Some(stem) = s.strip_suffix(suffix) {
                if stem.chars().count() >= MIN_STEM_CHARS && self.vocabulary.contains(stem) {
                    return Some(stem.to_owned());
                }
            }
        }
        None
    }

    // Iterates to a fixed point so that normalizing a canonical form is a no-op.
    fn merge_plural(&self, mut s: String) -> String {
        while let Some(stem) = self.singular_of(&s) {
            s = stem;
        }
        s
    }

    /// Distinct canonical forms of `keywords`, in first-seen order.
    pub fn canonical_list(&self, keywords: &[String]) -> Vec<String> {
        let mut seen = HashSet::new();
        keywords
            .iter()
            .filter_map(|k| self.normalize(k))
            .map(|t| t.canon)
            .filter(|c| seen.insert(c.clone()))
            .collect()
    }
}

/// Convenience wrapper around [`KeywordNormalizer::normalize`].
pub fn normalize_keyword(raw: &str, normalizer: &KeywordNormalizer) -> Option<KeywordToken> {
    normalizer.normalize(raw)
}

#[derive(Debug, Clone)]
pub struct CleanOutcome {
    pub records: Vec<BibRecord>,
    pub input: usize,
    pub removed: usize,
}

impl CleanOutcome {
    pub fn kept(&self) -> usize {
        self.records.len()
    }
}

/// Rewrites keyword lists to canonical forms and drops records left with none.
pub fn clean_corpus(records: Vec<BibRecord>) -> CleanOutcome {
    let normalizer = KeywordNormalizer::from_records(&records);
    clean_corpus_with(records, &normalizer)
}

pub fn clean_corpus_with(records: Vec<BibRecord>, normalizer: &KeywordNormalizer) -> CleanOutcome {
    let input = records.len();
    let kept: Vec<BibRecord> = records
        .into_iter()
        .filter_map(|mut r| {
            r.author_keywords = normalizer.canonical_list(&r.author_keywords);
            (!r.author_keywords.is_empty()).then_some(r)
        })
        .collect();
    CleanOutcome {
        removed: input - kept.len(),
        input,
        records: kept,
    }
}

/// SQL-LIKE match where `%` stands for any (possibly empty) sequence.
/// Anchored at both ends; no other metacharacters.
pub fn like_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut backtrack: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && p[pi] == '%' {
            backtrack = Some((pi, ti));
            pi += 1;
        } else if pi < p.len() && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if let Some((bp, bt)) = backtrack {
            pi = bp + 1;
            ti = bt + 1;
            backtrack = Some((bp, bt + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '%')
}

/// Folds a pattern the way keywords are folded, keeping `%` intact.
fn fold_pattern(raw: &str) -> Option<String> {
    let folded: String = fold_diacritics_lower(raw)
        .chars()
        .map(|c| if is_dash(c) { ' ' } else { c })
        .collect();
    let collapsed = collapse_whitespace(&folded);
    let trimmed = collapsed.trim_matches(|c: char| !c.is_alphanumeric() && c != '%');
    (!trimmed.is_empty()).then(|| trimmed.to_owned())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRow {
    /// As written in the map file.
    pub raw: String,
    /// Folded pattern matched against canonical keywords.
    pub pattern: String,
    pub canonical: String,
}

/// Ordered (pattern, canonical term) rows; the first matching row wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMap {
    rows: Vec<PatternRow>,
}

impl PatternMap {
    pub fn from_rows<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(rows: I) -> Result<PatternMap> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (i, (raw, canonical)) in rows.into_iter().enumerate() {
            let line = i + 1;
            let pattern = fold_pattern(raw).ok_or_else(|| Error::PatternMap {
                line,
                message: format!("empty pattern \"{raw}\""),
            })?;
            let canonical = fold_keyword(canonical).ok_or_else(|| Error::PatternMap {
                line,
                message: format!("invalid canonical term \"{canonical}\""),
            })?;
            if !seen.insert(pattern.clone()) {
                return Err(Error::PatternMap {
                    line,
                    message: format!("duplicate pattern \"{raw}\""),
                });
            }
            out.push(PatternRow {
                raw: raw.to_owned(),
                pattern,
                canonical,
            });
        }
        Ok(PatternMap { rows: out })
    }

    /// Reads a two-column tab-separated (pattern, canonical) file.
    pub fn parse(text: &str) -> Result<PatternMap> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (p, c) = line.split_once('\t').ok_or_else(|| Error::PatternMap {
                line: i + 1,
                message: "expected <pattern>\\t<canonical>".into(),
            })?;
            rows.push((p, c));
        }
        Self::from_rows(rows)
    }

    pub fn load(path: &Path) -> Result<PatternMap> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        for line in BufReader::new(file).lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::parse(&text)
    }

    /// The 32-row Covid keyword map shipped with the crate.
    pub fn covid_default() -> PatternMap {
        Self::parse(DEFAULT_COVID_PATTERNS).expect("bundled pattern map is valid")
    }

    pub fn rows(&self) -> &[PatternRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn canonical_terms(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.canonical.as_str()).collect()
    }

    /// Canonical term of the first row matching `keyword`.
    pub fn classify(&self, keyword: &str) -> Option<&str> {
        let folded = fold_keyword(keyword)?;
        self.rows
            .iter()
            .find(|r| like_match(&r.pattern, &folded))
            .map(|r| r.canonical.as_str())
    }
}

/// Records published in `years` carrying at least one keyword matched by
/// `map`. Matched keywords are rewritten to their canonical term.
pub fn covid_filter(records: &[BibRecord], map: &PatternMap, years: RangeInclusive<i32>) -> Result<Vec<BibRecord>> {
    if map.is_empty() {
        return Err(Error::Config("pattern map is empty".into()));
    }
    let mut out = Vec::new();
    for r in records.iter().filter(|r| years.contains(&r.year)) {
        let mut hit = false;
        let mut seen = HashSet::new();
        let mut rewritten = Vec::with_capacity(r.author_keywords.len());
        for k in &r.author_keywords {
            let mapped = match map.classify(k) {
                Some(c) => {
                    hit = true;
                    c.to_owned()
                }
                None => k.clone(),
            };
            if seen.insert(mapped.clone()) {
                rewritten.push(mapped);
            }
        }
        if hit {
            let mut sel = r.clone();
            sel.author_keywords = rewritten;
            out.push(sel);
        }
    }
    Ok(out)
}
