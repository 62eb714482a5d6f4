//! Generators and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the library's algorithms;
//! only its data types are reused.

#![allow(dead_code)]

pub mod fixture;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use bibliomap::mesh::{Date, DateRange, QueryExpr, TermClause};
use bibliomap::records::{BibRecord, DocType, MeshTerm};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- forests

/// A random thesaurus: nodes with explicit parent links. Some descriptors
/// sit at two tree positions.
#[derive(Debug, Clone)]
pub struct Forest {
    /// (tree number, descriptor, parent node index)
    pub nodes: Vec<(String, String, Option<usize>)>,
    pub descriptors: Vec<String>,
}

impl Forest {
    pub fn tsv(&self) -> String {
        let mut s = String::new();
        for (tn, d, _) in &self.nodes {
            s.push_str(&format!("{d}\t{tn}\n"));
        }
        s
    }

    pub fn pairs(&self) -> Vec<(&str, &str)> {
        self.nodes.iter().map(|(tn, d, _)| (d.as_str(), tn.as_str())).collect()
    }

    /// Depth-first transitive closure over explicit child links.
    pub fn explode_dfs(&self, descriptor: &str) -> BTreeSet<String> {
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (i, (_, _, p)) in self.nodes.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].1 == descriptor)
            .collect();
        while let Some(i) = stack.pop() {
            out.insert(self.nodes[i].1.clone());
            stack.extend(&children[i]);
        }
        out
    }

    /// Parent tree number by scanning every node.
    pub fn parent_scan(&self, tn: &str) -> Option<String> {
        let i = self.nodes.iter().position(|n| n.0 == tn)?;
        self.nodes[i].2.map(|p| self.nodes[p].0.clone())
    }
}

pub fn random_forest(r: &mut ChaCha8Rng, n_nodes: usize, max_depth: usize) -> Forest {
    let mut nodes: Vec<(String, String, Option<usize>)> = Vec::new();
    let mut child_count: Vec<usize> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut roots: BTreeMap<char, usize> = BTreeMap::new();
    let mut descriptors = Vec::new();
    for i in 0..n_nodes {
        let reuse = i > 4 && r.gen_bool(0.08);
        let name = if reuse {
            descriptors.choose(r).cloned().unwrap()
        } else {
            let d = format!("Desc {i}");
            descriptors.push(d.clone());
            d
        };
        let parent_ok: Vec<usize> = (0..nodes.len()).filter(|&p| depth[p] < max_depth).collect();
        let as_root = nodes.is_empty() || r.gen_bool(0.1) || parent_ok.is_empty();
        if as_root {
            let letter = (b'A' + r.gen_range(0..6u8)) as char;
            let k = roots.entry(letter).or_insert(0);
            *k += 1;
            nodes.push((format!("{letter}{:02}", *k), name, None));
            depth.push(1);
        } else {
            let p = *parent_ok.choose(r).unwrap();
            child_count[p] += 1;
            nodes.push((format!("{}.{:03}", nodes[p].0, child_count[p]), name, Some(p)));
            depth.push(depth[p] + 1);
        }
        child_count.push(0);
    }
    // A descriptor reused under its own subtree would make explosion cyclic
    // only through names, which is allowed; nothing to fix up.
    Forest { nodes, descriptors }
}

// ---------------------------------------------------------------- queries

/// Brute-force query evaluation: term sets are recomputed per call by DFS.
pub fn eval_brute(expr: &QueryExpr, r: &BibRecord, forest: &Forest) -> bool {
    match expr {
        QueryExpr::Term(t) => {
            let accepted: BTreeSet<String> = if t.explode {
                forest.explode_dfs(&t.descriptor)
            } else {
                BTreeSet::from([t.descriptor.clone()])
            };
            r.mesh_terms
                .iter()
                .any(|m| accepted.contains(&m.descriptor) && (m.major || !t.major_only))
        }
        QueryExpr::Date(d) => d.from.year <= r.year && r.year <= d.to.year,
        QueryExpr::And(xs) => xs.iter().all(|x| eval_brute(x, r, forest)),
        QueryExpr::Or(xs) => xs.iter().any(|x| eval_brute(x, r, forest)),
    }
}

/// Production query shape: an OR of 16 clauses (one without explosion)
/// AND a publication-date range.
pub fn boolean_search_query(r: &mut ChaCha8Rng, forest: &Forest) -> QueryExpr {
    let mut ds = forest.descriptors.clone();
    ds.shuffle(r);
    let clauses: Vec<QueryExpr> = ds
        .iter()
        .take(16)
        .enumerate()
        .map(|(i, d)| QueryExpr::Term(TermClause::new(d.clone(), i != 13, false)))
        .collect();
    QueryExpr::And(vec![
        QueryExpr::Or(clauses),
        QueryExpr::Date(DateRange {
            from: Date::new(2000, 1, 1).unwrap(),
            to: Date::new(2020, 12, 1).unwrap(),
        }),
    ])
}

pub fn random_query(r: &mut ChaCha8Rng, forest: &Forest, depth: usize) -> QueryExpr {
    if depth == 0 || r.gen_bool(0.35) {
        if r.gen_bool(0.15) {
            let a = r.gen_range(1995..2022);
            let b = r.gen_range(a..2023);
            return QueryExpr::Date(DateRange {
                from: Date::new(a, r.gen_range(1..=12), 1).unwrap(),
                to: Date::new(b, 12, r.gen_range(1..=31)).unwrap(),
            });
        }
        let d = forest.descriptors.choose(r).unwrap().clone();
        return QueryExpr::Term(TermClause::new(d, r.gen_bool(0.6), r.gen_bool(0.3)));
    }
    let n = r.gen_range(2..=4);
    let kids = (0..n).map(|_| random_query(r, forest, depth - 1)).collect();
    if r.gen_bool(0.5) {
        QueryExpr::And(kids)
    } else {
        QueryExpr::Or(kids)
    }
}

pub fn random_mesh_corpus(r: &mut ChaCha8Rng, forest: &Forest, n: usize) -> Vec<BibRecord> {
    (0..n)
        .map(|i| {
            let mut rec = BibRecord::new(
                Some(&format!("{}", 1000 + i)),
                None,
                r.gen_range(1996..2023),
                DocType::Article,
            );
            rec.title = format!("record {i}");
            for _ in 0..r.gen_range(0..5) {
                let d = forest.descriptors.choose(r).unwrap().clone();
                rec.mesh_terms.push(MeshTerm::new(d, r.gen_bool(0.4)));
            }
            rec
        })
        .collect()
}

// ---------------------------------------------------------------- linkage

/// Independent title key: compatibility decomposition, marks removed,
/// lowercase, alphanumerics and single spaces only.
pub fn title_key_ref(title: &str) -> String {
    let mut words = Vec::new();
    let mut cur = String::new();
    for c in title.nfkd() {
        if is_combining_mark(c) {
            continue;
        }
        for l in c.to_lowercase().collect::<String>().nfkd() {
            if is_combining_mark(l) {
                continue;
            }
            if l.is_alphanumeric() {
                cur.push(l);
            } else if l.is_whitespace() && !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
        }
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words.join(" ")
}

pub fn key_ref(r: &BibRecord, tier: usize) -> Option<String> {
    match tier {
        0 => r.pmid.clone(),
        1 => r.doi.clone(),
        _ => {
            let t = title_key_ref(&r.title);
            (!t.is_empty()).then(|| format!("{}#{}", r.year, t))
        }
    }
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct BrutePairing {
    pub pairs: BTreeSet<(usize, usize, usize)>,
    pub ambiguous_a: BTreeSet<usize>,
    pub ambiguous_b: BTreeSet<usize>,
}

/// O(n·m) matcher: for every open A record, scan all open records on both
/// sides for its key at each tier.
pub fn brute_match(a: &[BibRecord], b: &[BibRecord], tiers: &[usize]) -> BrutePairing {
    let mut out = BrutePairing::default();
    let mut open_a = vec![true; a.len()];
    let mut open_b = vec![true; b.len()];
    for &tier in tiers {
        let ka: Vec<Option<String>> = a.iter().map(|r| key_ref(r, tier)).collect();
        let kb: Vec<Option<String>> = b.iter().map(|r| key_ref(r, tier)).collect();
        let mut link = Vec::new();
        let mut amb_a = BTreeSet::new();
        let mut amb_b = BTreeSet::new();
        for i in 0..a.len() {
            let Some(k) = ka[i].as_ref().filter(|_| open_a[i]) else {
                continue;
            };
            let same_b: Vec<usize> = (0..b.len())
                .filter(|&j| open_b[j] && kb[j].as_ref() == Some(k))
                .collect();
            if same_b.is_empty() {
                continue;
            }
            let same_a: Vec<usize> = (0..a.len())
                .filter(|&x| open_a[x] && ka[x].as_ref() == Some(k))
                .collect();
            if same_a.len() == 1 && same_b.len() == 1 {
                link.push((i, same_b[0]));
            } else {
                amb_a.extend(same_a);
                amb_b.extend(same_b);
            }
        }
        for (i, j) in link {
            open_a[i] = false;
            open_b[j] = false;
            out.pairs.insert((i, j, tier));
        }
        for &i in &amb_a {
            open_a[i] = false;
        }
        for &j in &amb_b {
            open_b[j] = false;
        }
        out.ambiguous_a.extend(amb_a);
        out.ambiguous_b.extend(amb_b);
    }
    out
}

/// Two sources with planted matches at every tier plus ambiguous groups.
/// Keys are unique within each source except where ambiguity is planted.
pub fn planted_linkage(r: &mut ChaCha8Rng, n: usize) -> (Vec<BibRecord>, Vec<BibRecord>) {
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let titles = [
        "Épidémiologie du paludisme",
        "Vaccine trial",
        "HIV cohort",
        "Sepsis outcomes",
        "TB screening",
    ];
    for i in 0..n {
        let year = r.gen_range(2000..=2020);
        let title = format!("{} {} – part {i}", titles[i % titles.len()], r.gen_range(0..1000));
        let mut ra = BibRecord::new(Some(&format!("{}", 5_000_000 + i)), None, year, DocType::Article);
        ra.title = title.clone();
        ra.doi = Some(format!("10.5555/a.{i}"));
        let mut rb = BibRecord::new(None, Some(&format!("W{i:07}")), year, DocType::Article);
        match r.gen_range(0..10) {
            0..=3 => {
                rb.pmid = ra.pmid.clone();
                rb.title = title.to_uppercase();
            }
            4 | 5 => {
                rb.doi = ra.doi.clone();
                rb.title = format!("{title}!");
            }
            6 | 7 => {
                rb.title = format!("  {}. ", title.to_lowercase());
            }
            8 => {
                // Same title, different year: never links.
                rb.title = title.clone();
                rb.year = year + 1;
            }
            _ => {
                rb.title = format!("Unrelated {i}");
            }
        }
        a.push(ra);
        b.push(rb);
    }
    // Ambiguity: B duplicates of a title key, an A-side title clash, a DOI
    // shared by two B records.
    for k in 0..n / 100 {
        let i = r.gen_range(0..n);
        let mut extra = b[i].clone();
        extra.wos_id = Some(format!("X{k:07}"));
        extra.pmid = None;
        extra.doi = None;
        extra.title = a[i].title.clone();
        extra.year = a[i].year;
        b.push(extra);

        let j = r.gen_range(0..n);
        let mut twin = a[j].clone();
        twin.pmid = Some(format!("{}", 9_000_000 + k));
        twin.doi = None;
        a.push(twin);

        let d = r.gen_range(0..n);
        let mut doi_twin = b[d].clone();
        doi_twin.wos_id = Some(format!("Y{k:07}"));
        doi_twin.pmid = None;
        doi_twin.doi = a[d].doi.clone();
        doi_twin.title = format!("Doi twin {k}");
        b.push(doi_twin);
        let mut doi_twin2 = doi_twin_clone(&b[b.len() - 1], k);
        doi_twin2.title = format!("Doi twin bis {k}");
        b.push(doi_twin2);
    }
    a.shuffle(r);
    b.shuffle(r);
    (a, b)
}

fn doi_twin_clone(r: &BibRecord, k: usize) -> BibRecord {
    let mut c = r.clone();
    c.wos_id = Some(format!("Z{k:07}"));
    c
}

// ---------------------------------------------------------------- keywords

/// Reference keyword fold.
pub fn fold_ref(raw: &str) -> Option<String> {
    let mut s = String::new();
    for c in raw.nfkd() {
        if is_combining_mark(c) {
            continue;
        }
        for l in c.to_lowercase() {
            for d in l.nfkd() {
                if !is_combining_mark(d) {
                    s.push(d);
                }
            }
        }
    }
    let s: String = s
        .chars()
        .map(|c| {
            if matches!(c, '-' | '\u{2010}'..='\u{2015}' | '\u{2212}') {
                ' '
            } else {
                c
            }
        })
        .collect();
    let words: Vec<&str> = s.split_whitespace().collect();
    let joined = words.join(" ");
    let t = joined.trim_matches(|c: char| !c.is_alphanumeric()).to_string();
    t.chars().any(|c| c.is_alphanumeric()).then_some(t)
}

/// Reference plural merge: repeatedly drop a terminal "s", else "es",
/// while the stem has at least four characters and is in `vocab`.
pub fn merge_ref(word: &str, vocab: &BTreeSet<String>) -> String {
    let mut w = word.to_string();
    loop {
        let n = w.chars().count();
        let s_stem: Option<String> = (n >= 5 && w.ends_with('s')).then(|| w.chars().take(n - 1).collect());
        let es_stem: Option<String> = (n >= 6 && w.ends_with("es")).then(|| w.chars().take(n - 2).collect());
        if let Some(s) = s_stem.filter(|s| vocab.contains(s)) {
            w = s;
        } else if let Some(s) = es_stem.filter(|s| vocab.contains(s)) {
            w = s;
        } else {
            return w;
        }
    }
}

/// Exhaustive LIKE matcher: tries every split for each `%`.
pub fn like_ref(p: &[char], t: &[char]) -> bool {
    match p.split_first() {
        None => t.is_empty(),
        Some(('%', rest)) => (0..=t.len()).any(|k| like_ref(rest, &t[k..])),
        Some((c, rest)) => t.first() == Some(c) && like_ref(rest, &t[1..]),
    }
}

// ---------------------------------------------------------------- clustering

/// Quality of a partition on a dense similarity matrix, with node weights
/// equal to strengths divided by their mean.
pub fn quality_ref(sim: &[Vec<f64>], part: &[usize], gamma: f64) -> f64 {
    let n = sim.len();
    let k: Vec<f64> = sim.iter().map(|row| row.iter().sum()).collect();
    let mean = k.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = k.iter().map(|x| x / mean).collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if part[i] == part[j] {
                q += sim[i][j] - gamma * w[i] * w[j];
            }
        }
    }
    q
}

/// Every set partition of `0..n` as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            if i == 0 && c > 0 {
                break;
            }
            cur.push(c);
            rec(i + 1, n, if i == 0 { 0 } else { max.max(c) }, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Canonical relabeling (first occurrence order) for partition comparison.
pub fn relabel(part: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    part.iter()
        .map(|c| {
            let next = map.len();
            *map.entry(*c).or_insert(next)
        })
        .collect()
}

/// Documents whose keywords form `k` planted communities of `size` terms:
/// dense co-occurrence inside a community, a few cross links.
pub fn planted_docs(r: &mut ChaCha8Rng, k: usize, size: usize, docs_per: usize) -> (Vec<BibRecord>, Vec<Vec<String>>) {
    let comms: Vec<Vec<String>> = (0..k)
        .map(|c| (0..size).map(|t| format!("c{c}term{t}")).collect())
        .collect();
    let mut docs = Vec::new();
    for (c, terms) in comms.iter().enumerate() {
        for _ in 0..docs_per {
            let mut kw: Vec<String> = terms.choose_multiple(r, 3).cloned().collect();
            if r.gen_bool(0.05) {
                let other = (c + 1 + r.gen_range(0..k - 1)) % k;
                kw.push(comms[other].choose(r).unwrap().clone());
            }
            let mut d = BibRecord::new(Some("1"), None, 2010, DocType::Article);
            d.author_keywords = kw;
            docs.push(d);
        }
    }
    (docs, comms)
}

// ---------------------------------------------------------------- indicators

/// Per-publication impact oracle. Materializes every (category, year)
/// cell's baseline and country mean with plain f64 sums.
pub fn impact_ref(
    corpus: &[BibRecord],
    baseline_pool: &[BibRecord],
    country: Option<&str>,
    years: std::ops::RangeInclusive<i32>,
    window: i32,
) -> Option<f64> {
    let wc = |r: &BibRecord| {
        r.citations
            .iter()
            .filter(|&&c| c >= r.year && c <= r.year + window - 1)
            .count() as f64
    };
    let mut cells: BTreeSet<(String, i32)> = BTreeSet::new();
    for r in corpus.iter().filter(|r| years.contains(&r.year)) {
        for c in &r.categories {
            cells.insert((c.clone(), r.year));
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (cat, year) in cells {
        let mut bw = 0.0;
        let mut bc = 0.0;
        for p in baseline_pool {
            if p.year == year && p.categories.contains(&cat) {
                let f = 1.0 / p.categories.len() as f64;
                bw += f;
                bc += f * wc(p);
            }
        }
        if bw == 0.0 || bc == 0.0 {
            continue;
        }
        let mut cw = 0.0;
        let mut cc = 0.0;
        for p in corpus {
            if p.year == year && p.categories.contains(&cat) && country.map_or(true, |c| p.countries.contains(c)) {
                let f = 1.0 / p.categories.len() as f64;
                cw += f;
                cc += f * wc(p);
            }
        }
        if cw == 0.0 {
            continue;
        }
        num += cw * ((cc / cw) / (bc / bw));
        den += cw;
    }
    (den > 0.0).then(|| num / den)
}

pub fn random_cited_corpus(
    r: &mut ChaCha8Rng,
    n: usize,
    countries: &[&str],
    cats: &[&str],
    years: std::ops::RangeInclusive<i32>,
) -> Vec<BibRecord> {
    (0..n)
        .map(|i| {
            let year = r.gen_range(years.clone());
            let mut rec = BibRecord::new(Some(&i.to_string()), Some(&format!("W{i}")), year, DocType::Article);
            let nc = r.gen_range(1..=2);
            rec.countries = countries.choose_multiple(r, nc).map(|c| c.to_string()).collect();
            let nk = r.gen_range(1..=3);
            rec.categories = cats.choose_multiple(r, nk).map(|c| c.to_string()).collect();
            let ncit = r.gen_range(0..10);
            rec.citations = (0..ncit).map(|_| r.gen_range(year..=year + 4)).collect();
            rec
        })
        .collect()
}
