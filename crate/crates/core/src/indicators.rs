//! Country-level publication counts, growth, specialization and
//! field-normalized citation impact.
//!
//! Countries are counted whole: a publication with addresses in FR and US
//! adds one to each, and one to the world row.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::BibRecord;

/// Row label for world totals.
pub const WORLD: &str = "WORLD";

/// Default citation window: publication year plus the following year.
pub const DEFAULT_CITATION_WINDOW: u32 = 2;

/// A single year or an inclusive span of years.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Period {
    pub start: i32,
    pub end: i32,
}

impl Period {
    pub fn year(y: i32) -> Period {
        Period { start: y, end: y }
    }

    pub fn span(start: i32, end: i32) -> Result<Period> {
        if start > end {
            return Err(Error::Config(format!("period {start}-{end} ends before it starts")));
        }
        Ok(Period { start, end })
    }

    /// Parses `2000` or `2005-2009`.
    pub fn parse(s: &str) -> Result<Period> {
        let bad = || Error::Config(format!("bad period \"{s}\""));
        match s.trim().split_once('-') {
            None => Ok(Period::year(s.trim().parse().map_err(|_| bad())?)),
            Some((a, b)) => Period::span(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ),
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}-{}", self.start, self.end)
        }
    }
}

/// Whole-counted publications per (country, year), with a [`WORLD`] row that
/// counts every publication once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    cells: BTreeMap<String, BTreeMap<i32, u64>>,
}

impl CountTable {
    pub fn add(&mut self, key: &str, year: i32, n: u64) {
        *self.cells.entry(key.to_owned()).or_default().entry(year).or_default() += n;
    }

    pub fn get(&self, key: &str, year: i32) -> u64 {
        self.cells.get(key).and_then(|m| m.get(&year)).copied().unwrap_or(0)
    }

    pub fn sum(&self, key: &str, period: &Period) -> u64 {
        self.cells
            .get(key)
            .map_or(0, |m| m.range(period.start..=period.end).map(|(_, v)| v).sum())
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Row keys, including [`WORLD`].
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.cells.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32, u64)> {
        self.cells
            .iter()
            .flat_map(|(k, m)| m.iter().map(move |(&y, &v)| (k.as_str(), y, v)))
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("country\tyear\tpub_count\n");
        for (k, y, v) in self.iter() {
            let _ = writeln!(s, "{k}\t{y}\t{v}");
        }
        s
    }
}

/// Whole-counted publication series by country and year.
pub fn count_series(records: &[BibRecord]) -> CountTable {
    let mut t = CountTable::default();
    for r in records {
        t.add(WORLD, r.year, 1);
        for c in &r.countries {
            t.add(c, r.year, 1);
        }
    }
    t
}

/// Relative change `(to − from) / from`; `None` on a zero baseline.
pub fn growth(from: u64, to: u64) -> Option<f64> {
    (from > 0).then(|| (to as f64 - from as f64) / from as f64)
}

pub fn growth_rate(series: &CountTable, country: &str, from: &Period, to: &Period) -> Option<f64> {
    growth(series.sum(country, from), series.sum(country, to))
}

/// A publication reduced to what normalization needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedPublication {
    pub year: i32,
    pub countries: BTreeSet<String>,
    pub categories: BTreeSet<String>,
    pub cites: Vec<i32>,
}

impl From<&BibRecord> for CitedPublication {
    fn from(r: &BibRecord) -> Self {
        CitedPublication {
            year: r.year,
            countries: r.countries.clone(),
            categories: r.categories.clone(),
            cites: r.citations.clone(),
        }
    }
}

/// All-domain totals and the publication pool used for citation baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBase {
    pub totals: CountTable,
    pub publications: Vec<CitedPublication>,
    /// Last calendar year for which citation data is complete.
    pub citations_complete_through: i32,
}

impl ReferenceBase {
    pub fn from_records(records: &[BibRecord], citations_complete_through: i32) -> ReferenceBase {
        ReferenceBase {
            totals: count_series(records),
            publications: records.iter().map(CitedPublication::from).collect(),
            citations_complete_through,
        }
    }

    /// Replaces the citation baseline pool, keeping the totals.
    pub fn with_baseline(mut self, records: &[BibRecord]) -> ReferenceBase {
        self.publications = records.iter().map(CitedPublication::from).collect();
        self
    }

    /// Checks that every domain cell is bounded by its reference cell.
    pub fn check_dominates(&self, domain: &CountTable) -> Result<()> {
        for (k, y, v) in domain.iter() {
            let r = self.totals.get(k, y);
            if v > r {
                return Err(Error::Invalid(format!(
                    "domain count {v} exceeds reference total {r} for {k} {y}"
                )));
            }
        }
        Ok(())
    }
}

/// `(D_c / T_c) / (D_w / T_w)` over `period`. `None` when `T_c`, `T_w` or
/// `D_w` is zero.
pub fn specialization_index(
    domain: &CountTable,
    reference: &ReferenceBase,
    country: &str,
    period: &Period,
) -> Option<f64> {
    specialization_from_counts(
        domain.sum(country, period),
        reference.totals.sum(country, period),
        domain.sum(WORLD, period),
        reference.totals.sum(WORLD, period),
    )
}

pub fn specialization_from_counts(d_c: u64, t_c: u64, d_w: u64, t_w: u64) -> Option<f64> {
    if t_c == 0 || t_w == 0 || d_w == 0 {
        return None;
    }
    let num = d_c as u128 * t_w as u128;
    let den = t_c as u128 * d_w as u128;
    Some(num as f64 / den as f64)
}

/// Citations received in `[year, year + window − 1]`.
pub fn windowed_citations(year: i32, cites: &[i32], window: u32) -> u64 {
    let last = year + window as i32 - 1;
    cites.iter().filter(|&&c| c >= year && c <= last).count() as u64
}

/// Publication years in `period` whose window runs past the citation data.
pub fn incomplete_years(period: &Period, window: u32, complete_through: i32) -> Vec<i32> {
    period
        .years()
        .filter(|y| y + window as i32 - 1 > complete_through)
        .collect()
}

/// Fractional accumulator for one (category, year) cell. Publications are
/// grouped by their category count `k`, so integer tallies stay exact and
/// the 1/k weights are applied once per group.
#[derive(Debug, Clone, Default)]
struct CellAcc {
    by_k: BTreeMap<usize, (u64, u64)>,
}

impl CellAcc {
    fn add(&mut self, k: usize, cites: u64) {
        let e = self.by_k.entry(k).or_default();
        e.0 += 1;
        e.1 += cites;
    }

    fn weight(&self) -> f64 {
        self.by_k.iter().map(|(&k, &(n, _))| n as f64 / k as f64).sum()
    }

    fn cite_sum(&self) -> f64 {
        self.by_k.iter().map(|(&k, &(_, c))| c as f64 / k as f64).sum()
    }

    fn mean(&self) -> Option<f64> {
        let w = self.weight();
        (w > 0.0).then(|| self.cite_sum() / w)
    }
}

type Cells = BTreeMap<(String, i32), CellAcc>;

fn accumulate<'a, I>(pubs: I, period: &Period, window: u32) -> Cells
where
    I: Iterator<Item = (i32, &'a BTreeSet<String>, &'a [i32])>,
{
    let mut cells = Cells::new();
    for (year, categories, cites) in pubs {
        if !period.contains(year) || categories.is_empty() {
            continue;
        }
        let c = windowed_citations(year, cites, window);
        let k = categories.len();
        for cat in categories {
            cells.entry((cat.clone(), year)).or_default().add(k, c);
        }
    }
    cells
}

/// Field-normalized impact of `country` (or [`WORLD`]) over `period`.
///
/// For each (category, year) cell the baseline is the mean windowed
/// citation count of the reference pool; multi-category publications count
/// 1/k in each of their k categories. The index is the average over cells
/// of (country mean / baseline), weighted by the country's fractional
/// publication count per cell. Cells with a zero baseline are skipped.
///
/// Fails when the window for any year in `period` reaches past the
/// reference's citation horizon. `Ok(None)` when the country has no
/// publication in a usable cell.
pub fn impact_index(
    corpus: &[BibRecord],
    reference: &ReferenceBase,
    country: &str,
    period: &Period,
    window: u32,
) -> Result<Option<f64>> {
    if window == 0 {
        return Err(Error::Config("citation window must be at least 1 year".into()));
    }
    let missing = incomplete_years(period, window, reference.citations_complete_through);
    if !missing.is_empty() {
        return Err(Error::IncompleteCitations {
            needed: period.end + window as i32 - 1,
            available: reference.citations_complete_through,
            years: missing,
        });
    }
    let baseline = accumulate(
        reference
            .publications
            .iter()
            .map(|p| (p.year, &p.categories, p.cites.as_slice())),
        period,
        window,
    );
    let own = accumulate(
        corpus
            .iter()
            .filter(|r| country == WORLD || r.countries.contains(country))
            .map(|r| (r.year, &r.categories, r.citations.as_slice())),
        period,
        window,
    );
    let mut num = 0.0;
    let mut den = 0.0;
    for (cell, acc) in &own {
        let Some(base) = baseline.get(cell).and_then(CellAcc::mean) else {
            continue;
        };
        if base <= 0.0 {
            continue;
        }
        let Some(mean) = acc.mean() else { continue };
        let w = acc.weight();
        num += w * (mean / base);
        den += w;
    }
    Ok((den > 0.0).then(|| num / den))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub country: String,
    pub period: Period,
    pub theme: String,
    pub pub_count: u64,
    pub spec_index: Option<f64>,
    pub impact_index: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTable {
    pub rows: Vec<IndicatorRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |v| v.to_string())
}

impl IndicatorTable {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("country\tperiod\ttheme\tpub_count\tspec_index\timpact_index\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.country,
                r.period,
                r.theme,
                r.pub_count,
                opt(r.spec_index),
                opt(r.impact_index)
            );
        }
        s
    }

    pub fn get(&self, country: &str, period: &Period, theme: &str) -> Option<&IndicatorRow> {
        self.rows
            .iter()
            .find(|r| r.country == country && &r.period == period && r.theme == theme)
    }
}

/// One theme's domain corpus.
pub struct Theme<'a> {
    pub name: &'a str,
    pub records: &'a [BibRecord],
}

#[derive(Debug, Clone)]
pub struct IndicatorRequest {
    pub countries: Vec<String>,
    pub periods: Vec<Period>,
    /// Periods for which impact is computed; every one must be covered by
    /// the citation data.
    pub impact_periods: Vec<Period>,
    pub window: u32,
}

/// Rows for every (theme, country, period), countries including [`WORLD`].
pub fn indicator_table(
    themes: &[Theme<'_>],
    reference: &ReferenceBase,
    req: &IndicatorRequest,
) -> Result<IndicatorTable> {
    let mut blocked = BTreeSet::new();
    for p in &req.impact_periods {
        blocked.extend(incomplete_years(p, req.window, reference.citations_complete_through));
    }
    if !blocked.is_empty() {
        let years: Vec<i32> = blocked.into_iter().collect();
        return Err(Error::IncompleteCitations {
            needed: years.last().unwrap() + req.window as i32 - 1,
            available: reference.citations_complete_through,
            years,
        });
    }
    let mut countries: Vec<String> = vec![WORLD.to_owned()];
    countries.extend(req.countries.iter().filter(|c| c.as_str() != WORLD).cloned());

    let mut rows = Vec::new();
    for theme in themes {
        let counts = count_series(theme.records);
        for country in &countries {
            for period in &req.periods {
                let impact = if req.impact_periods.contains(period) {
                    impact_index(theme.records, reference, country, period, req.window)?
                } else {
                    None
                };
                rows.push(IndicatorRow {
                    country: country.clone(),
                    period: period.clone(),
                    theme: theme.name.to_owned(),
                    pub_count: counts.sum(country, period),
                    spec_index: specialization_index(&counts, reference, country, period),
                    impact_index: impact,
                });
            }
        }
    }
    Ok(IndicatorTable { rows })
}
