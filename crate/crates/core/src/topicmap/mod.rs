//! Keyword co-occurrence maps: network construction, association-strength
//! similarity, clustering, 2-D layout, and per-term overlays.

mod cluster;
mod export;
mod layout;
mod overlay;

use std::collections::{BTreeMap, HashMap};

pub use cluster::{cluster, partition_quality, ClusterParams};
pub use export::{read_map, write_map, MapTables};
pub use layout::{layout, pair_objective, LayoutParams, LayoutResult};
pub use overlay::{country_activity_overlay, temporal_overlay, TemporalScore};

use crate::error::{Error, Result};
use crate::records::BibRecord;

/// Default minimum occurrence count for a term to become a node.
pub const DEFAULT_MIN_OCC: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TermNode {
    pub term: String,
    pub occ: u64,
    pub occ_by_year: BTreeMap<i32, u64>,
    pub occ_by_country: BTreeMap<String, u64>,
}

/// Undirected edge between node indices `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocEdge {
    pub i: usize,
    pub j: usize,
    pub cooc: u64,
    pub sim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermNetwork {
    /// Documents in the mapped corpus.
    pub total_docs: u64,
    /// Sorted by term, so node order is lexicographic.
    pub nodes: Vec<TermNode>,
    /// Sorted by `(i, j)`.
    pub edges: Vec<CoocEdge>,
    pub clusters: Option<Vec<usize>>,
    pub coords: Option<Vec<[f64; 2]>>,
}

impl TermNetwork {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.term.as_str().cmp(term)).ok()
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&CoocEdge> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.edges
            .binary_search_by(|e| (e.i, e.j).cmp(&(i, j)))
            .ok()
            .map(|k| &self.edges[k])
    }

    /// Neighbour lists with similarity weights.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.i].push((e.j, e.sim));
            adj[e.j].push((e.i, e.sim));
        }
        adj
    }
}

/// Builds the co-occurrence network with full counting: every document adds
/// one to each distinct term it carries and one to each unordered pair of
/// its distinct retained terms.
pub fn build_network(records: &[BibRecord], min_occ: u64) -> Result<TermNetwork> {
    if min_occ < 1 {
        return Err(Error::Config("min_occ must be at least 1".into()));
    }
    let doc_terms: Vec<Vec<&str>> = records
        .iter()
        .map(|r| {
            let mut t: Vec<&str> = r.author_keywords.iter().map(String::as_str).collect();
            t.sort_unstable();
            t.dedup();
            t
        })
        .collect();

    let mut occ: HashMap<&str, u64> = HashMap::new();
    for terms in &doc_terms {
        for t in terms {
            *occ.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<&str> = occ.iter().filter(|(_, &c)| c >= min_occ).map(|(&t, _)| t).collect();
    kept.sort_unstable();
    let index: HashMap<&str, usize> = kept.iter().enumerate().map(|(i, &t)| (t, i)).collect();

    let mut nodes: Vec<TermNode> = kept
        .iter()
        .map(|t| TermNode {
            term: (*t).to_owned(),
            occ: 0,
            occ_by_year: BTreeMap::new(),
            occ_by_country: BTreeMap::new(),
        })
        .collect();
    let mut pairs: HashMap<(usize, usize), u64> = HashMap::new();
    for (r, terms) in records.iter().zip(&doc_terms) {
        // `terms` is sorted and `index` is order-preserving, so ids ascend.
        let ids: Vec<usize> = terms.iter().filter_map(|t| index.get(t).copied()).collect();
        for &i in &ids {
            let n = &mut nodes[i];
            n.occ += 1;
            *n.occ_by_year.entry(r.year).or_default() += 1;
            for c in &r.countries {
                *n.occ_by_country.entry(c.clone()).or_default() += 1;
            }
        }
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                *pairs.entry((i, j)).or_default() += 1;
            }
        }
    }
    let mut edges: Vec<CoocEdge> = pairs
        .into_iter()
        .map(|((i, j), cooc)| CoocEdge { i, j, cooc, sim: 0.0 })
        .collect();
    edges.sort_unstable_by_key(|e| (e.i, e.j));

    Ok(TermNetwork {
        total_docs: records.len() as u64,
        nodes,
        edges,
        clusters: None,
        coords: None,
    })
}

/// `2 T cooc / (occ_i occ_j)` where `T` is the number of mapped documents.
pub fn association_strength_value(total_docs: u64, cooc: u64, occ_i: u64, occ_j: u64) -> f64 {
    if cooc == 0 {
        return 0.0;
    }
    (2.0 * total_docs as f64 * cooc as f64) / (occ_i as f64 * occ_j as f64)
}

/// Fills `sim` on every edge.
pub fn association_strength(network: &mut TermNetwork) {
    let t = network.total_docs;
    for e in &mut network.edges {
        e.sim = association_strength_value(t, e.cooc, network.nodes[e.i].occ, network.nodes[e.j].occ);
    }
}
