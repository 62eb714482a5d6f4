use std::collections::BTreeMap;

use super::TermNetwork;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalScore {
    pub mean_year: f64,
    /// Share of the term's occurrences per publication year; sums to 1.
    pub concentration: BTreeMap<i32, f64>,
}

/// Per-node year concentration and occurrence-weighted mean year.
pub fn temporal_overlay(network: &TermNetwork) -> Vec<TemporalScore> {
    network
        .nodes
        .iter()
        .map(|n| {
            let total = n.occ as f64;
            let concentration: BTreeMap<i32, f64> =
                n.occ_by_year.iter().map(|(&y, &c)| (y, c as f64 / total)).collect();
            let mean_year = concentration.iter().map(|(&y, &s)| y as f64 * s).sum();
            TemporalScore {
                mean_year,
                concentration,
            }
        })
        .collect()
}

/// Activity index of `country` per node: the term's share of the country's
/// occurrences over its share of all occurrences. Terms the country never
/// uses get 0.
pub fn country_activity_overlay(network: &TermNetwork, country: &str) -> Result<Vec<f64>> {
    let country_total: u64 = network
        .nodes
        .iter()
        .map(|n| n.occ_by_country.get(country).copied().unwrap_or(0))
        .sum();
    if country_total == 0 {
        return Err(Error::UnknownCountry(country.to_owned()));
    }
    let world_total: u64 = network.nodes.iter().map(|n| n.occ).sum();
    Ok(network
        .nodes
        .iter()
        .map(|n| {
            let c = n.occ_by_country.get(country).copied().unwrap_or(0);
            if c == 0 {
                0.0
            } else {
                (c as f64 * world_total as f64) / (country_total as f64 * n.occ as f64)
            }
        })
        .collect())
}
