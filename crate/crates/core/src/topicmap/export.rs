//! Tab-separated map tables.
//!
//! `nodes.tsv`: `term occ cluster x y mean_year activity_<CC>...`
//! `edges.tsv`: `term_i term_j cooc sim`
//!
//! Floats are written in shortest round-trip form; missing values are `NA`.

use std::fmt::Write as _;

use super::{temporal_overlay, CoocEdge, TermNetwork, TermNode};
use crate::error::{Error, Result};

/// Map data as exported: the network plus per-node overlay columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MapTables {
    pub network: TermNetwork,
    pub mean_year: Vec<Option<f64>>,
    /// (country code, index per node)
    pub activity: Vec<(String, Vec<f64>)>,
}

fn na<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_owned(), |v| v.to_string())
}

impl MapTables {
    pub fn from_network(network: &TermNetwork, activity: Vec<(String, Vec<f64>)>) -> MapTables {
        let mean_year = temporal_overlay(network)
            .into_iter()
            .zip(&network.nodes)
            .map(|(t, n)| (!n.occ_by_year.is_empty()).then_some(t.mean_year))
            .collect();
        MapTables {
            network: network.clone(),
            mean_year,
            activity,
        }
    }

    pub fn nodes_tsv(&self) -> String {
        let mut s = String::from("term\tocc\tcluster\tx\ty\tmean_year");
        for (c, _) in &self.activity {
            let _ = write!(s, "\tactivity_{c}");
        }
        s.push('\n');
        let net = &self.network;
        for (i, n) in net.nodes.iter().enumerate() {
            let cluster = net.clusters.as_ref().map(|c| c[i]);
            let xy = net.coords.as_ref().map(|c| c[i]);
            let _ = write!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                n.term,
                n.occ,
                na(cluster),
                na(xy.map(|p| p[0])),
                na(xy.map(|p| p[1])),
                na(self.mean_year[i])
            );
            for (_, v) in &self.activity {
                let _ = write!(s, "\t{}", v[i]);
            }
            s.push('\n');
        }
        s
    }

    pub fn edges_tsv(&self) -> String {
        let mut s = String::from("term_i\tterm_j\tcooc\tsim\n");
        let nodes = &self.network.nodes;
        for e in &self.network.edges {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", nodes[e.i].term, nodes[e.j].term, e.cooc, e.sim);
        }
        s
    }
}

pub fn write_map(network: &TermNetwork, activity: Vec<(String, Vec<f64>)>) -> (String, String) {
    let t = MapTables::from_network(network, activity);
    (t.nodes_tsv(), t.edges_tsv())
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::MapTable {
        line,
        message: message.into(),
    }
}

fn parse_opt<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<Option<T>> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| bad(line, format!("bad {what} \"{s}\"")))
}

/// Reads tables written by [`write_map`]. Per-year and per-country
/// occurrence tallies are not part of the format and come back empty.
pub fn read_map(nodes_tsv: &str, edges_tsv: &str) -> Result<MapTables> {
    let mut lines = nodes_tsv.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad(1, "missing header"))?
        .split('\t')
        .collect();
    if header.len() < 6 || header[..6] != ["term", "occ", "cluster", "x", "y", "mean_year"] {
        return Err(bad(1, "unexpected nodes header"));
    }
    let countries: Vec<String> = header[6..]
        .iter()
        .map(|h| {
            h.strip_prefix("activity_")
                .map(str::to_owned)
                .ok_or_else(|| bad(1, format!("unexpected column {h}")))
        })
        .collect::<Result<_>>()?;

    let mut nodes = Vec::new();
    let mut clusters = Vec::new();
    let mut coords = Vec::new();
    let mut mean_year = Vec::new();
    let mut activity: Vec<Vec<f64>> = vec![Vec::new(); countries.len()];
    for (k, line) in lines.enumerate() {
        let ln = k + 2;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != header.len() {
            return Err(bad(ln, format!("expected {} columns, found {}", header.len(), f.len())));
        }
        let occ: u64 = f[1].parse().map_err(|_| bad(ln, "bad occ"))?;
        nodes.push(TermNode {
            term: f[0].to_owned(),
            occ,
            occ_by_year: Default::default(),
            occ_by_country: Default::default(),
        });
        clusters.push(parse_opt::<usize>(f[2], ln, "cluster")?);
        let x = parse_opt::<f64>(f[3], ln, "x")?;
        let y = parse_opt::<f64>(f[4], ln, "y")?;
        coords.push(x.zip(y));
        mean_year.push(parse_opt::<f64>(f[5], ln, "mean_year")?);
        for (c, v) in f[6..].iter().enumerate() {
            activity[c].push(v.parse().map_err(|_| bad(ln, "bad activity"))?);
        }
    }
    if nodes.windows(2).any(|w| w[0].term >= w[1].term) {
        return Err(bad(2, "terms must be unique and sorted"));
    }

    let index = |t: &str, ln: usize| {
        nodes
            .binary_search_by(|n: &TermNode| n.term.as_str().cmp(t))
            .map_err(|_| bad(ln, format!("unknown term \"{t}\"")))
    };
    let mut elines = edges_tsv.lines();
    if elines.next() != Some("term_i\tterm_j\tcooc\tsim") {
        return Err(bad(1, "unexpected edges header"));
    }
    let mut edges = Vec::new();
    for (k, line) in elines.enumerate() {
        let ln = k + 2;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(bad(ln, "expected 4 columns"));
        }
        let (a, b) = (index(f[0], ln)?, index(f[1], ln)?);
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        edges.push(CoocEdge {
            i,
            j,
            cooc: f[2].parse().map_err(|_| bad(ln, "bad cooc"))?,
            sim: f[3].parse().map_err(|_| bad(ln, "bad sim"))?,
        });
    }
    edges.sort_by_key(|e| (e.i, e.j));

    let all = |v: &[Option<usize>]| v.iter().all(Option::is_some);
    let network = TermNetwork {
        total_docs: 0,
        clusters: all(&clusters).then(|| clusters.iter().map(|c| c.unwrap()).collect()),
        coords: coords.iter().all(Option::is_some).then(|| {
            coords
                .iter()
                .map(|c| {
                    let (x, y) = c.unwrap();
                    [x, y]
                })
                .collect()
        }),
        nodes,
        edges,
    };
    Ok(MapTables {
        network,
        mean_year,
        activity: countries.into_iter().zip(activity).collect(),
    })
}
