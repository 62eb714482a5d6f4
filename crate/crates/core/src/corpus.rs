//! Cross-source record linkage, category-based completion, analysis filters,
//! and the counts ledger that audits each stage.
//!
//! Linkage runs three exact-key tiers in order: PMID, normalized DOI, then
//! normalized title with identical year. Within a tier a pair is linked only
//! when the key is unique among the still-unlinked records on *both* sides;
//! every record sharing a key that is duplicated on either side is marked
//! ambiguous and withheld from later tiers. The rule is symmetric, so
//! swapping the sources yields the same pairing.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{BibRecord, DocType};
use crate::text::normalize_title;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchTier {
    Pmid,
    Doi,
    Title,
    None,
}

impl MatchTier {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchTier::Pmid => "pmid",
            MatchTier::Doi => "doi",
            MatchTier::Title => "title",
            MatchTier::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub in_source_a: bool,
    pub in_source_b: bool,
    pub matched_by: MatchTier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedRecord {
    pub record: BibRecord,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchPolicy {
    pub use_doi: bool,
    pub use_title: bool,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy {
            use_doi: true,
            use_title: true,
        }
    }
}

/// Stage counters. Field names double as the fixed stage labels of the
/// tab-separated ledger.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsLedger {
    pub query_hits_a: usize,
    pub duplicates_a: usize,
    pub duplicates_b: usize,
    pub matched_ab: usize,
    pub matched_by_pmid: usize,
    pub matched_by_doi: usize,
    pub matched_by_title: usize,
    pub ambiguous_a: usize,
    pub ambiguous_b: usize,
    pub a_only: usize,
    pub a_in_categories: usize,
    pub b_category_hits: usize,
    pub b_only: usize,
    pub union_total: usize,
    pub in_source_b: usize,
    pub after_filters: Option<usize>,
}

impl CountsLedger {
    pub fn stages(&self) -> Vec<(&'static str, Option<usize>)> {
        vec![
            ("query_hits_A", Some(self.query_hits_a)),
            ("duplicates_A", Some(self.duplicates_a)),
            ("duplicates_B", Some(self.duplicates_b)),
            ("matched_AB", Some(self.matched_ab)),
            ("matched_by_pmid", Some(self.matched_by_pmid)),
            ("matched_by_doi", Some(self.matched_by_doi)),
            ("matched_by_title", Some(self.matched_by_title)),
            ("ambiguous_A", Some(self.ambiguous_a)),
            ("ambiguous_B", Some(self.ambiguous_b)),
            ("A_only", Some(self.a_only)),
            ("A_in_categories", Some(self.a_in_categories)),
            ("B_category_hits", Some(self.b_category_hits)),
            ("B_only", Some(self.b_only)),
            ("union_total", Some(self.union_total)),
            ("in_source_B", Some(self.in_source_b)),
            ("after_filters", self.after_filters),
        ]
    }

    /// Checks the ledger identities; returns every broken one.
    pub fn check(&self) -> Result<()> {
        let mut broken = Vec::new();
        if self.matched_ab + self.a_only != self.query_hits_a {
            broken.push("matched_AB + A_only = query_hits_A");
        }
        if self.matched_by_pmid + self.matched_by_doi + self.matched_by_title != self.matched_ab {
            broken.push("per-tier matches sum to matched_AB");
        }
        if self.union_total != self.matched_ab + self.a_only + self.b_only {
            broken.push("union_total = matched_AB + A_only + B_only");
        }
        if self.in_source_b != self.matched_ab + self.b_only {
            broken.push("in_source_B = matched_AB + B_only");
        }
        if self.a_in_categories > self.matched_ab {
            broken.push("A_in_categories <= matched_AB");
        }
        if self.b_only > self.b_category_hits {
            broken.push("B_only <= B_category_hits");
        }
        if let Some(f) = self.after_filters {
            if f > self.union_total {
                broken.push("after_filters <= union_total");
            }
        }
        if broken.is_empty() {
            Ok(())
        } else {
            Err(Error::Ledger(broken.join("; ")))
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("stage\tcount\n");
        for (name, v) in self.stages() {
            let _ = writeln!(s, "{name}\t{}", v.map_or("NA".to_owned(), |v| v.to_string()));
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkedCorpus {
    pub records: Vec<LinkedRecord>,
    pub ledger: CountsLedger,
}

impl LinkedCorpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn bib_records(&self) -> Vec<BibRecord> {
        self.records.iter().map(|r| r.record.clone()).collect()
    }

    /// Tab-separated provenance table in corpus order.
    pub fn provenance_tsv(&self) -> String {
        let mut s = String::from("id\tpmid\twos_id\tin_source_A\tin_source_B\tmatched_by\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.record.display_id(),
                r.record.pmid.as_deref().unwrap_or(""),
                r.record.wos_id.as_deref().unwrap_or(""),
                r.provenance.in_source_a,
                r.provenance.in_source_b,
                r.provenance.matched_by.as_str()
            );
        }
        s
    }

    fn recount(&mut self) {
        let l = &mut self.ledger;
        l.matched_ab = 0;
        l.matched_by_pmid = 0;
        l.matched_by_doi = 0;
        l.matched_by_title = 0;
        l.a_only = 0;
        l.b_only = 0;
        for r in &self.records {
            let p = r.provenance;
            match (p.in_source_a, p.in_source_b) {
                (true, true) => {
                    l.matched_ab += 1;
                    match p.matched_by {
                        MatchTier::Pmid => l.matched_by_pmid += 1,
                        MatchTier::Doi => l.matched_by_doi += 1,
                        MatchTier::Title => l.matched_by_title += 1,
                        MatchTier::None => {}
                    }
                }
                (true, false) => l.a_only += 1,
                (false, true) => l.b_only += 1,
                (false, false) => {}
            }
        }
        l.union_total = self.records.len();
        l.in_source_b = l.matched_ab + l.b_only;
    }
}

/// Key used to decide whether a source-B record is already in the corpus.
fn b_key(r: &BibRecord) -> Option<String> {
    match (&r.wos_id, &r.pmid) {
        (Some(w), _) => Some(format!("wos:{w}")),
        (None, Some(p)) => Some(format!("pmid:{p}")),
        (None, None) => None,
    }
}

fn a_key(r: &BibRecord) -> Option<String> {
    match (&r.pmid, &r.wos_id) {
        (Some(p), _) => Some(format!("pmid:{p}")),
        (None, Some(w)) => Some(format!("wos:{w}")),
        (None, None) => None,
    }
}

/// Keeps the first record per key; returns survivors and the duplicate count.
fn dedup<'a>(records: &'a [BibRecord], key: fn(&BibRecord) -> Option<String>) -> (Vec<&'a BibRecord>, usize) {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    let mut dups = 0;
    for r in records {
        match key(r) {
            Some(k) if seen.contains(&k) => dups += 1,
            Some(k) => {
                seen.insert(k);
                out.push(r);
            }
            None => out.push(r),
        }
    }
    (out, dups)
}

/// Linkage key of a record under a tier, if it has one.
pub fn tier_key(r: &BibRecord, tier: MatchTier) -> Option<String> {
    match tier {
        MatchTier::Pmid => r.pmid.clone(),
        MatchTier::Doi => r.doi.clone(),
        MatchTier::Title => {
            let t = normalize_title(&r.title);
            (!t.is_empty()).then(|| format!("{}|{}", r.year, t))
        }
        MatchTier::None => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Open,
    Ambiguous,
    Linked,
}

/// Pairing produced by the tiered matcher, as (index in A, index in B, tier).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize, MatchTier)>,
    pub ambiguous_a: Vec<usize>,
    pub ambiguous_b: Vec<usize>,
}

/// Runs the tiered unique-key matcher over two record lists.
pub fn match_records(a: &[&BibRecord], b: &[&BibRecord], policy: MatchPolicy) -> Pairing {
    let mut tiers = vec![MatchTier::Pmid];
    if policy.use_doi {
        tiers.push(MatchTier::Doi);
    }
    if policy.use_title {
        tiers.push(MatchTier::Title);
    }
    let mut sa = vec![Slot::Open; a.len()];
    let mut sb = vec![Slot::Open; b.len()];
    let mut pairing = Pairing::default();
    for tier in tiers {
        let mut groups: HashMap<String, (Vec<usize>, Vec<usize>)> = HashMap::new();
        let mut order: Vec<String> = Vec::new();
        for (i, r) in a.iter().enumerate() {
            if sa[i] != Slot::Open {
                continue;
            }
            if let Some(k) = tier_key(r, tier) {
                let g = groups.entry(k.clone()).or_default();
                if g.0.is_empty() {
                    order.push(k);
                }
                g.0.push(i);
            }
        }
        for (j, r) in b.iter().enumerate() {
            if sb[j] != Slot::Open {
                continue;
            }
            if let Some(k) = tier_key(r, tier) {
                if let Some(g) = groups.get_mut(&k) {
                    g.1.push(j);
                }
            }
        }
        for k in order {
            let (ga, gb) = &groups[&k];
            if gb.is_empty() {
                continue;
            }
            if ga.len() == 1 && gb.len() == 1 {
                sa[ga[0]] = Slot::Linked;
                sb[gb[0]] = Slot::Linked;
                pairing.pairs.push((ga[0], gb[0], tier));
            } else {
                for &i in ga {
                    sa[i] = Slot::Ambiguous;
                }
                for &j in gb {
                    sb[j] = Slot::Ambiguous;
                }
            }
        }
    }
    pairing.pairs.sort_unstable();
    pairing.ambiguous_a = (0..a.len()).filter(|&i| sa[i] == Slot::Ambiguous).collect();
    pairing.ambiguous_b = (0..b.len()).filter(|&j| sb[j] == Slot::Ambiguous).collect();
    pairing
}

fn union_in_order(a: &[String], b: &[String]) -> Vec<String> {
    let mut seen = HashSet::new();
    a.iter().chain(b).filter(|k| seen.insert(k.as_str())).cloned().collect()
}

/// Field-wise merge: B supplies bibliographic type, year, categories and
/// citations; A supplies thesaurus terms; countries and keywords are unioned.
pub fn merge_pair(a: &BibRecord, b: &BibRecord) -> BibRecord {
    BibRecord {
        pmid: a.pmid.clone().or_else(|| b.pmid.clone()),
        wos_id: b.wos_id.clone().or_else(|| a.wos_id.clone()),
        doi: a.doi.clone().or_else(|| b.doi.clone()),
        title: if a.title.trim().is_empty() {
            b.title.clone()
        } else {
            a.title.clone()
        },
        year: b.year,
        doc_type: b.doc_type,
        countries: a.countries.union(&b.countries).cloned().collect(),
        categories: b.categories.clone(),
        mesh_terms: a.mesh_terms.clone(),
        author_keywords: union_in_order(&a.author_keywords, &b.author_keywords),
        citations: b.citations.clone(),
        retracted: a.retracted || b.retracted,
    }
}

/// Links source-A (query hits) to source-B records. Unmatched A records are
/// kept as A-only; unmatched B records are not added here.
pub fn link(a_records: &[BibRecord], b_records: &[BibRecord], policy: MatchPolicy) -> LinkedCorpus {
    let (a, dup_a) = dedup(a_records, a_key);
    let (b, dup_b) = dedup(b_records, b_key);
    let pairing = match_records(&a, &b, policy);
    let partner: HashMap<usize, (usize, MatchTier)> = pairing.pairs.iter().map(|&(i, j, t)| (i, (j, t))).collect();

    let records = a
        .iter()
        .enumerate()
        .map(|(i, ra)| match partner.get(&i) {
            Some(&(j, tier)) => LinkedRecord {
                record: merge_pair(ra, b[j]),
                provenance: Provenance {
                    in_source_a: true,
                    in_source_b: true,
                    matched_by: tier,
                },
            },
            None => LinkedRecord {
                record: (*ra).clone(),
                provenance: Provenance {
                    in_source_a: true,
                    in_source_b: false,
                    matched_by: MatchTier::None,
                },
            },
        })
        .collect();

    let mut corpus = LinkedCorpus {
        records,
        ledger: CountsLedger {
            query_hits_a: a.len(),
            duplicates_a: dup_a,
            duplicates_b: dup_b,
            ambiguous_a: pairing.ambiguous_a.len(),
            ambiguous_b: pairing.ambiguous_b.len(),
            ..CountsLedger::default()
        },
    };
    corpus.recount();
    corpus
}

/// Adds every source-B record in one of `categories` that is not already
/// present, as a B-only record.
pub fn union_with_categories(
    mut linked: LinkedCorpus,
    b_records: &[BibRecord],
    categories: &BTreeSet<String>,
) -> Result<LinkedCorpus> {
    if categories.is_empty() {
        return Err(Error::Config("category list is empty".into()));
    }
    let in_categories = |r: &BibRecord| r.categories.iter().any(|c| categories.contains(c));
    let mut present: HashSet<String> = linked
        .records
        .iter()
        .filter(|r| r.provenance.in_source_b)
        .filter_map(|r| b_key(&r.record))
        .collect();
    let (b, _) = dedup(b_records, b_key);
    let mut hits = 0;
    for rb in b {
        if !in_categories(rb) {
            continue;
        }
        hits += 1;
        let Some(k) = b_key(rb) else { continue };
        if present.insert(k) {
            linked.records.push(LinkedRecord {
                record: rb.clone(),
                provenance: Provenance {
                    in_source_a: false,
                    in_source_b: true,
                    matched_by: MatchTier::None,
                },
            });
        }
    }
    linked.ledger.b_category_hits = hits;
    linked.ledger.a_in_categories = linked
        .records
        .iter()
        .filter(|r| r.provenance.in_source_a && r.provenance.in_source_b && in_categories(&r.record))
        .count();
    linked.recount();
    linked.ledger.check()?;
    Ok(linked)
}

/// The analysis filter predicate.
pub fn passes_filters(r: &LinkedRecord, keep_types: &BTreeSet<DocType>) -> bool {
    keep_types.contains(&r.record.doc_type)
        && !r.record.countries.is_empty()
        && !r.record.categories.is_empty()
        && !r.record.retracted
        && r.provenance.in_source_b
}

/// Document types retained for analysis by default.
pub fn default_keep_types() -> BTreeSet<DocType> {
    BTreeSet::from([
        DocType::Article,
        DocType::ProceedingsPaper,
        DocType::Review,
        DocType::Letter,
    ])
}

/// Keeps source-B-backed, non-retracted records of the listed types that
/// carry both countries and categories.
pub fn apply_filters(mut corpus: LinkedCorpus, keep_types: &BTreeSet<DocType>) -> LinkedCorpus {
    corpus.records.retain(|r| passes_filters(r, keep_types));
    corpus.ledger.after_filters = Some(corpus.records.len());
    corpus
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub ledger: CountsLedger,
    /// Share of query hits absent from source B.
    pub a_absent_share: Option<f64>,
    /// Share of query hits whose source-B record is in a selected category.
    pub a_in_category_share: Option<f64>,
    /// Share of category-selected source-B records absent from the query hits.
    pub b_category_only_share: Option<f64>,
    pub overlap: Option<f64>,
}

pub fn coverage_report(ledger: &CountsLedger) -> CoverageReport {
    let absent = ratio(ledger.a_only, ledger.query_hits_a);
    CoverageReport {
        ledger: ledger.clone(),
        a_absent_share: absent,
        a_in_category_share: ratio(ledger.a_in_categories, ledger.query_hits_a),
        b_category_only_share: ratio(ledger.b_only, ledger.b_category_hits),
        overlap: absent.map(|s| 1.0 - s),
    }
}

impl CoverageReport {
    pub fn ratios(&self) -> [(&'static str, Option<f64>); 4] {
        [
            ("A_absent_share", self.a_absent_share),
            ("A_in_category_share", self.a_in_category_share),
            ("B_category_only_share", self.b_category_only_share),
            ("overlap", self.overlap),
        ]
    }

    pub fn to_tsv(&self) -> String {
        let mut s = self.ledger.to_tsv();
        for (name, v) in self.ratios() {
            let _ = writeln!(s, "{name}\t{}", v.map_or("NA".to_owned(), |v| format!("{v:.6}")));
        }
        s
    }
}
