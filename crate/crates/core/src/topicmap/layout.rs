//! Similarity-weighted 2-D layout.
//!
//! Minimizes `V(x) = Σ_{i<j} s_ij ‖x_i − x_j‖²` subject to the mean pairwise
//! distance being 1. Equivalently it minimizes the scale-free ratio
//! `P² · Σ s_ij d_ij² / (Σ d_ij)²` (with `P` the number of pairs), which an
//! iterative majorization of `Σ s_ij d_ij² − 2 Σ d_ij` decreases
//! monotonically: every step solves `(L + 11ᵀ/m) X = B(Y) Y`, where `L` is
//! the similarity Laplacian and `B(Y)` the usual SMACOF matrix built from
//! the current distances.
//!
//! Each connected component is laid out on its own (the objective is
//! unbounded across components) and components are then packed left to
//! right by decreasing size, one unit apart.

use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TermNetwork;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the relative objective decrease falls below this.
    pub tol: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            seed: 0,
            max_iter: 1000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutResult {
    pub coords: Vec<[f64; 2]>,
    /// Objective after the random start and after every iteration, one
    /// history per multi-node component (largest component first).
    pub histories: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// Gap between packed components, in units of mean intra-component distance.
const COMPONENT_GAP: f64 = 1.0;

fn components(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j, s) in edges {
        if s > 0.0 {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| (std::cmp::Reverse(g.len()), g[0]));
    out
}

/// Mean-distance-normalized objective `V` of a configuration.
pub fn pair_objective(coords: &[[f64; 2]], edges: &[(usize, usize, f64)]) -> f64 {
    let m = coords.len();
    if m < 2 {
        return 0.0;
    }
    let mut dsum = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            dsum += dist(coords[i], coords[j]);
        }
    }
    let pairs = (m * (m - 1) / 2) as f64;
    let mean = dsum / pairs;
    let f: f64 = edges.iter().map(|&(i, j, s)| s * dist2(coords[i], coords[j])).sum();
    f / (mean * mean)
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    dist2(a, b).sqrt()
}

fn mean_distance(coords: &[[f64; 2]]) -> f64 {
    let m = coords.len();
    if m < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            s += dist(coords[i], coords[j]);
        }
    }
    s / (m * (m - 1) / 2) as f64
}

fn rescale_to_unit_mean(coords: &mut [[f64; 2]]) {
    let md = mean_distance(coords);
    if md > 0.0 {
        for c in coords.iter_mut() {
            c[0] /= md;
            c[1] /= md;
        }
    }
}

/// Majorization on one connected component (local indices).
fn layout_component(
    m: usize,
    edges: &[(usize, usize, f64)],
    params: &LayoutParams,
    rng: &mut ChaCha8Rng,
    iterations: &mut usize,
) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    let mut lap = DMatrix::<f64>::from_element(m, m, 1.0 / m as f64);
    for &(i, j, s) in edges {
        lap[(i, j)] -= s;
        lap[(j, i)] -= s;
        lap[(i, i)] += s;
        lap[(j, j)] += s;
    }
    let chol =
        Cholesky::new(lap).ok_or_else(|| Error::Invalid("similarity Laplacian is not positive definite".into()))?;

    let mut x = DMatrix::<f64>::zeros(m, 2);
    for i in 0..m {
        x[(i, 0)] = rng.gen_range(-1.0..1.0);
        x[(i, 1)] = rng.gen_range(-1.0..1.0);
    }
    let as_coords = |x: &DMatrix<f64>| -> Vec<[f64; 2]> { (0..m).map(|i| [x[(i, 0)], x[(i, 1)]]).collect() };

    let mut history = vec![pair_objective(&as_coords(&x), edges)];
    let mut b = DMatrix::<f64>::zeros(m, m);
    for iter in 1..=params.max_iter {
        b.fill(0.0);
        for i in 0..m {
            for j in i + 1..m {
                let dx = x[(i, 0)] - x[(j, 0)];
                let dy = x[(i, 1)] - x[(j, 1)];
                let d = (dx * dx + dy * dy).sqrt();
                if d > 0.0 {
                    let w = -1.0 / d;
                    b[(i, j)] = w;
                    b[(j, i)] = w;
                    b[(i, i)] -= w;
                    b[(j, j)] -= w;
                }
            }
        }
        let rhs = &b * &x;
        let next = chol.solve(&rhs);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::LayoutDiverged { iteration: iter });
        }
        x = next;
        *iterations += 1;
        let obj = pair_objective(&as_coords(&x), edges);
        if !obj.is_finite() {
            return Err(Error::LayoutDiverged { iteration: iter });
        }
        let prev = *history.last().unwrap();
        history.push(obj);
        if prev <= 0.0 || (prev - obj) / prev < params.tol {
            break;
        }
    }
    let mut coords = as_coords(&x);
    rescale_to_unit_mean(&mut coords);
    Ok((coords, history))
}

/// Centers, rotates onto principal axes, and fixes reflections so node 0
/// (the lexicographically smallest term) has non-negative coordinates.
fn normalize_pose(coords: &mut [[f64; 2]]) {
    let n = coords.len() as f64;
    if coords.is_empty() {
        return;
    }
    let (mx, my) = coords.iter().fold((0.0, 0.0), |(a, b), c| (a + c[0], b + c[1]));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for c in coords.iter_mut() {
        c[0] -= mx;
        c[1] -= my;
        sxx += c[0] * c[0];
        syy += c[1] * c[1];
        sxy += c[0] * c[1];
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (sin, cos) = theta.sin_cos();
    for c in coords.iter_mut() {
        let (x, y) = (c[0], c[1]);
        c[0] = x * cos + y * sin;
        c[1] = -x * sin + y * cos;
    }
    let (fx, fy) = (coords[0][0] < 0.0, coords[0][1] < 0.0);
    for c in coords.iter_mut() {
        if fx {
            c[0] = -c[0];
        }
        if fy {
            c[1] = -c[1];
        }
    }
}

/// Computes 2-D coordinates for every node of a network with `sim` set.
pub fn layout(network: &TermNetwork, params: LayoutParams) -> Result<LayoutResult> {
    let n = network.len();
    let edges: Vec<(usize, usize, f64)> = network.edges.iter().map(|e| (e.i, e.j, e.sim)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut coords = vec![[0.0; 2]; n];
    let mut histories = Vec::new();
    let mut iterations = 0;

    let mut local = vec![usize::MAX; n];
    let mut cursor = 0.0;
    for (ci, comp) in components(n, &edges).into_iter().enumerate() {
        for (k, &g) in comp.iter().enumerate() {
            local[g] = k;
        }
        let sub_edges: Vec<(usize, usize, f64)> = edges
            .iter()
            .filter(|&&(i, j, s)| s > 0.0 && local[i] != usize::MAX && local[j] != usize::MAX)
            .map(|&(i, j, s)| (local[i], local[j], s))
            .collect();
        let placed = if comp.len() == 1 {
            vec![[0.0, 0.0]]
        } else {
            let (c, h) = layout_component(comp.len(), &sub_edges, &params, &mut rng, &mut iterations)?;
            histories.push(h);
            c
        };
        let min_x = placed.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
        let max_x = placed.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max);
        let cy = placed.iter().map(|c| c[1]).sum::<f64>() / placed.len() as f64;
        let offset = if ci == 0 {
            -min_x
        } else {
            cursor + COMPONENT_GAP - min_x
        };
        for (k, &g) in comp.iter().enumerate() {
            coords[g] = [placed[k][0] + offset, placed[k][1] - cy];
        }
        cursor = max_x + offset;
        for &g in &comp {
            local[g] = usize::MAX;
        }
    }
    rescale_to_unit_mean(&mut coords);
    normalize_pose(&mut coords);
    Ok(LayoutResult {
        coords,
        histories,
        iterations,
    })
}
