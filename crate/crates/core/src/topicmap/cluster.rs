//! Resolution-parameterized clustering of the similarity network.
//!
//! Objective, over unordered same-cluster pairs:
//!
//! ```text
//! Q = Σ_{i<j, c_i = c_j} (s_ij − γ · n_i · n_j)
//! ```
//!
//! with `n_i = k_i / mean(k)` and `k_i = Σ_j s_ij`. The node weights are
//! scale-free, so scaling every `s_ij` and `γ` by the same factor scales `Q`
//! and leaves the optimal partition unchanged.
//!
//! Optimization is greedy local moving (seeded random visiting order, best
//! strictly improving move, lowest cluster id on ties) repeated on
//! successively aggregated networks until nothing moves.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TermNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub resolution: f64,
    pub seed: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            resolution: 1.0,
            seed: 0,
        }
    }
}

const MAX_PASSES: usize = 10_000;

struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    weight: Vec<f64>,
}

fn node_weights(adj: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let strength: Vec<f64> = adj.iter().map(|nb| nb.iter().map(|&(_, s)| s).sum()).collect();
    let n = strength.len();
    if n == 0 {
        return strength;
    }
    let mean = strength.iter().sum::<f64>() / n as f64;
    if mean > 0.0 {
        strength.iter().map(|k| k / mean).collect()
    } else {
        vec![0.0; n]
    }
}

/// Local moving on one level. Returns whether any node moved.
fn local_moving(level: &Level, resolution: f64, rng: &mut ChaCha8Rng, assign: &mut [usize]) -> bool {
    let n = level.weight.len();
    let mut cluster_weight = vec![0.0; n];
    let mut cluster_size = vec![0usize; n];
    for i in 0..n {
        cluster_weight[assign[i]] += level.weight[i];
        cluster_size[assign[i]] += 1;
    }
    let mut empty: BTreeSet<usize> = (0..n).filter(|&c| cluster_size[c] == 0).collect();
    let mut link = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..MAX_PASSES {
        order.shuffle(rng);
        let mut moved = false;
        for &i in &order {
            let cur = assign[i];
            let wi = level.weight[i];
            for &(j, s) in &level.adj[i] {
                let c = assign[j];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                link[c] += s;
            }
            cluster_weight[cur] -= wi;
            cluster_size[cur] -= 1;
            if cluster_size[cur] == 0 {
                cluster_weight[cur] = 0.0;
            }

            let stay = link[cur] - resolution * wi * cluster_weight[cur];
            let mut best: Option<(usize, f64)> = None;
            let mut consider = |c: usize, g: f64| {
                if g > stay {
                    match best {
                        Some((bc, bg)) if g < bg || (g == bg && c > bc) => {}
                        _ => best = Some((c, g)),
                    }
                }
            };
            for &c in &touched {
                if c != cur {
                    consider(c, link[c] - resolution * wi * cluster_weight[c]);
                }
            }
            if cluster_size[cur] > 0 {
                if let Some(&e) = empty.iter().next() {
                    consider(e, 0.0);
                }
            }
            let target = best.map_or(cur, |(c, _)| c);
            if target != cur {
                moved = true;
                if cluster_size[cur] == 0 {
                    empty.insert(cur);
                }
                empty.remove(&target);
            }
            assign[i] = target;
            cluster_weight[target] += wi;
            cluster_size[target] += 1;
            for &c in &touched {
                link[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    any_move
}

/// Renumbers cluster ids to `0..k` in order of first appearance.
fn compact(assign: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; assign.len().max(1)];
    let mut next = 0;
    for a in assign.iter_mut() {
        if map[*a] == usize::MAX {
            map[*a] = next;
            next += 1;
        }
        *a = map[*a];
    }
    next
}

fn aggregate(level: &Level, assign: &[usize], k: usize) -> Level {
    let mut weight = vec![0.0; k];
    let mut acc: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
    for (i, nb) in level.adj.iter().enumerate() {
        weight[assign[i]] += level.weight[i];
        for &(j, s) in nb {
            let (a, b) = (assign[i], assign[j]);
            if a != b {
                *acc[a].entry(b).or_default() += s;
            }
        }
    }
    Level {
        adj: acc.into_iter().map(|m| m.into_iter().collect()).collect(),
        weight,
    }
}

/// Clusters the network; returns one cluster id per node. Ids are ordered by
/// cluster size (largest first), ties by smallest member index.
pub fn cluster(network: &TermNetwork, params: ClusterParams) -> Vec<usize> {
    let n = network.len();
    if n == 0 {
        return Vec::new();
    }
    let adj = network.adjacency();
    let weight = node_weights(&adj);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut level = Level { adj, weight };
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let mut assign: Vec<usize> = (0..level.weight.len()).collect();
        let moved = local_moving(&level, params.resolution, &mut rng, &mut assign);
        let k = compact(&mut assign);
        for m in membership.iter_mut() {
            *m = assign[*m];
        }
        if !moved || k == level.weight.len() {
            break;
        }
        level = aggregate(&level, &assign, k);
    }
    canonical_labels(&membership)
}

fn canonical_labels(membership: &[usize]) -> Vec<usize> {
    let k = membership.iter().max().map_or(0, |m| m + 1);
    let mut size = vec![0usize; k];
    let mut first = vec![usize::MAX; k];
    for (i, &c) in membership.iter().enumerate() {
        size[c] += 1;
        first[c] = first[c].min(i);
    }
    let mut ids: Vec<usize> = (0..k).filter(|&c| size[c] > 0).collect();
    ids.sort_by_key(|&c| (std::cmp::Reverse(size[c]), first[c]));
    let mut relabel = vec![0; k];
    for (new, &old) in ids.iter().enumerate() {
        relabel[old] = new;
    }
    membership.iter().map(|&c| relabel[c]).collect()
}

/// Objective value of `partition` (see module docs).
pub fn partition_quality(network: &TermNetwork, partition: &[usize], resolution: f64) -> f64 {
    let adj = network.adjacency();
    let weight = node_weights(&adj);
    let mut q = 0.0;
    for e in &network.edges {
        if partition[e.i] == partition[e.j] {
            q += e.sim;
        }
    }
    let k = partition.iter().max().map_or(0, |m| m + 1);
    let mut cw = vec![0.0; k];
    let mut sq = vec![0.0; k];
    for (i, &c) in partition.iter().enumerate() {
        cw[c] += weight[i];
        sq[c] += weight[i] * weight[i];
    }
    for c in 0..k {
        q -= resolution * 0.5 * (cw[c] * cw[c] - sq[c]);
    }
    q
}
