//! Dimension reduction of the supra matrix to the plane, and per-layer
//! extraction of disk coordinates.
//!
//! Isomap here takes the supra graph itself as its neighbourhood graph:
//! shortest-path distances over nonzero entries, then classical MDS. Each
//! node keeps the angle of its planar coordinate and receives the radius
//! `1 - tanh(w / beta)` from its layer-local weighted degree `w`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypgeo::PoincarePoint;
use crate::network::MultilayerNetwork;
use crate::supra::{components_of, SupraMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("beta must be positive and finite, got {0}")]
    NonPositiveBeta(f64),
    #[error("weighted degree must be non-negative, got {0}")]
    NegativeDegree(f64),
    #[error("distance matrix must be square and symmetric with zero diagonal")]
    InvalidDistanceMatrix,
    #[error("need at least {needed} nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    #[default]
    Isomap,
    LaplacianEigenmaps,
}

impl std::str::FromStr for Reducer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "isomap" => Ok(Self::Isomap),
            "laplacian_eigenmaps" | "laplacian-eigenmaps" | "le" => Ok(Self::LaplacianEigenmaps),
            other => Err(format!(
                "unknown reducer `{other}` (isomap|laplacian_eigenmaps)"
            )),
        }
    }
}

/// Planar coordinates for a subset of supra rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanCoords2D {
    /// Supra row of each point.
    pub rows: Vec<usize>,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsResult {
    pub points: Vec<[f64; 2]>,
    /// Two largest eigenvalues of the double-centred matrix.
    pub eigenvalues: [f64; 2],
    /// Fewer than two positive eigenvalues; missing coordinates are zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapItem { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, len) in &adj[node] {
            let nd = d + len;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(HeapItem {
                    dist: nd,
                    node: next,
                });
            }
        }
    }
    dist
}

/// Converts nonzero weights into edge lengths.
pub fn lengths_from_weights(
    adj: &[Vec<(usize, f64)>],
    invert_weights: bool,
) -> Vec<Vec<(usize, f64)>> {
    adj.iter()
        .map(|row| {
            row.iter()
                .map(|&(c, w)| (c, if invert_weights { 1.0 / w } else { w }))
                .collect()
        })
        .collect()
}

/// All-pairs shortest paths over a graph given as length-weighted adjacency lists.
pub fn all_pairs_shortest_paths(adj: &[Vec<(usize, f64)>]) -> Result<DMatrix<f64>, ReduceError> {
    let n = adj.len();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(adj, s)).collect();
    if rows.iter().any(|r| r.iter().any(|d| !d.is_finite())) {
        return Err(ReduceError::DisconnectedGraph {
            components: components_of(adj).len(),
        });
    }
    let mut d = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    // floating-point path sums can differ by direction; keep exact symmetry
    for i in 0..n {
        for j in i + 1..n {
            let m = d[(i, j)].min(d[(j, i)]);
            d[(i, j)] = m;
            d[(j, i)] = m;
        }
    }
    Ok(d)
}

/// Shortest-path distances over the supra graph, using entries as edge lengths
/// (or their reciprocals when `invert_weights` is set).
pub fn geodesic_distances(
    supra: &SupraMatrix,
    invert_weights: bool,
) -> Result<DMatrix<f64>, ReduceError> {
    all_pairs_shortest_paths(&lengths_from_weights(
        &supra.adjacency_lists(),
        invert_weights,
    ))
}

/// Flips `v` so that its largest-magnitude entry is positive. Near-ties go to
/// the lowest index.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let idx = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigenpairs of a symmetric matrix sorted by ascending eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &val)| (val, eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Classical multidimensional scaling to two dimensions.
pub fn classical_mds_2d(d: &DMatrix<f64>) -> Result<MdsResult, ReduceError> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(ReduceError::InvalidDistanceMatrix);
    }
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Err(ReduceError::InvalidDistanceMatrix);
        }
        for j in i + 1..n {
            let (a, b) = (d[(i, j)], d[(j, i)]);
            if !a.is_finite() || (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                return Err(ReduceError::InvalidDistanceMatrix);
            }
        }
    }
    if n == 0 {
        return Ok(MdsResult {
            points: Vec::new(),
            eigenvalues: [0.0, 0.0],
            degenerate: true,
        });
    }

    // B = -1/2 J (D∘D) J
    let sq = d.map(|x| x * x);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let total_mean = row_mean.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + total_mean)
    });
    let b = (&b + b.transpose()) * 0.5;

    let pairs = sorted_eigen(b);
    let top = pairs[n - 1].0;
    let tol = 1e-10 * top.abs().max(1e-300);
    let mut coords = vec![[0.0; 2]; n];
    let mut eigenvalues = [0.0; 2];
    let mut degenerate = false;
    for axis in 0..2 {
        if axis >= n {
            degenerate = true;
            break;
        }
        let (val, vec) = &pairs[n - 1 - axis];
        eigenvalues[axis] = *val;
        if *val <= tol {
            degenerate = true;
            continue;
        }
        let mut v = vec.clone();
        fix_sign(&mut v);
        let s = val.sqrt();
        for (c, x) in coords.iter_mut().zip(v) {
            c[axis] = x * s;
        }
    }
    if degenerate {
        log::warn!(
            "MDS spectrum has fewer than two positive eigenvalues ({:.3e}, {:.3e}); missing axes are zero-filled",
            eigenvalues[0],
            eigenvalues[1]
        );
    }
    for axis in 0..2 {
        let mean = coords.iter().map(|c| c[axis]).sum::<f64>() / n as f64;
        coords.iter_mut().for_each(|c| c[axis] -= mean);
    }
    Ok(MdsResult {
        points: coords,
        eigenvalues,
        degenerate,
    })
}

/// Isomap on the supra graph restricted to `rows`.
///
/// `rows` must induce a connected subgraph; pass all rows for the full matrix.
pub fn isomap_embed_rows(
    supra: &SupraMatrix,
    rows: &[usize],
    invert_weights: bool,
) -> Result<EuclideanCoords2D, ReduceError> {
    let adj = induced_adjacency(supra, rows);
    let d = all_pairs_shortest_paths(&lengths_from_weights(&adj, invert_weights))?;
    let mds = classical_mds_2d(&d)?;
    Ok(EuclideanCoords2D {
        rows: rows.to_vec(),
        points: mds.points,
    })
}

pub fn isomap_embed(
    supra: &SupraMatrix,
    invert_weights: bool,
) -> Result<EuclideanCoords2D, ReduceError> {
    let rows: Vec<usize> = (0..supra.dim()).collect();
    isomap_embed_rows(supra, &rows, invert_weights)
}

fn induced_adjacency(supra: &SupraMatrix, rows: &[usize]) -> Vec<Vec<(usize, f64)>> {
    let sub = supra.submatrix(rows);
    let n = rows.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && sub[(i, j)] != 0.0)
                .map(|j| (j, sub[(i, j)]))
                .collect()
        })
        .collect()
}

/// Laplacian eigenmaps on the supra graph restricted to `rows`.
///
/// Affinities are the supra entries when `invert_weights` is set (entries are
/// similarities) and their reciprocals otherwise (entries are lengths).
pub fn laplacian_eigenmaps_rows(
    supra: &SupraMatrix,
    rows: &[usize],
    invert_weights: bool,
) -> Result<EuclideanCoords2D, ReduceError> {
    let adj = induced_adjacency(supra, rows);
    let n = adj.len();
    if n < 3 {
        return Err(ReduceError::TooFewNodes { needed: 3, got: n });
    }
    let comps = components_of(&adj).len();
    if comps > 1 {
        return Err(ReduceError::DisconnectedGraph { components: comps });
    }
    let affinity = |w: f64| if invert_weights { w } else { 1.0 / w };
    let mut w = DMatrix::zeros(n, n);
    for (i, row) in adj.iter().enumerate() {
        for &(j, v) in row {
            w[(i, j)] = affinity(v);
        }
    }
    let inv_sqrt_deg: Vec<f64> = (0..n).map(|i| 1.0 / w.row(i).sum().sqrt()).collect();
    let lap = DMatrix::from_fn(n, n, |i, j| {
        let off = w[(i, j)] * inv_sqrt_deg[i] * inv_sqrt_deg[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    });
    let lap = (&lap + lap.transpose()) * 0.5;
    let pairs = sorted_eigen(lap);
    let mut points = vec![[0.0; 2]; n];
    // pairs[0] is the trivial eigenvector of a connected graph
    for axis in 0..2 {
        let mut v = pairs[1 + axis].1.clone();
        fix_sign(&mut v);
        for (p, x) in points.iter_mut().zip(v) {
            p[axis] = x;
        }
    }
    Ok(EuclideanCoords2D {
        rows: rows.to_vec(),
        points,
    })
}

pub fn laplacian_eigenmaps_2d(
    supra: &SupraMatrix,
    invert_weights: bool,
) -> Result<EuclideanCoords2D, ReduceError> {
    let rows: Vec<usize> = (0..supra.dim()).collect();
    laplacian_eigenmaps_rows(supra, &rows, invert_weights)
}

/// Radius `1 - tanh(w / beta)`.
pub fn assign_radius(w: f64, beta: f64) -> Result<f64, ReduceError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(ReduceError::NonPositiveBeta(beta));
    }
    if w.is_nan() || w < 0.0 {
        return Err(ReduceError::NegativeDegree(w));
    }
    Ok(1.0 - (w / beta).tanh())
}

/// Mean layer-local weighted degree over all nodes of all layers.
pub fn default_beta(network: &MultilayerNetwork) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for l in 0..network.layer_count() {
        for v in 0..network.node_count(l) {
            total += network.weighted_degree(l, v).expect("valid index");
            count += 1;
        }
    }
    total / count as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskNode {
    pub node: usize,
    pub theta: f64,
    pub r: f64,
    pub point: PoincarePoint,
}

/// Disk coordinates of one layer's nodes, sorted by node index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskEmbedding {
    pub layer: usize,
    /// Radius scale used to place the nodes; unknown when read back from CSV.
    pub beta: Option<f64>,
    pub nodes: Vec<DiskNode>,
}

impl DiskEmbedding {
    pub fn get(&self, node: usize) -> Option<&DiskNode> {
        self.nodes
            .binary_search_by_key(&node, |n| n.node)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies an isometry fixing the origin to every point.
    pub fn map_points(&self, f: impl Fn(PoincarePoint) -> PoincarePoint) -> Self {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let point = f(n.point);
                DiskNode {
                    node: n.node,
                    theta: point.y().atan2(point.x()),
                    r: point.norm(),
                    point,
                }
            })
            .collect();
        Self {
            layer: self.layer,
            beta: self.beta,
            nodes,
        }
    }
}

/// Angle of a planar point; the origin maps to 0 with a warning.
pub fn node_angle(p: [f64; 2]) -> f64 {
    if p[0] == 0.0 && p[1] == 0.0 {
        log::warn!("node at the planar origin; angle set to 0");
        return 0.0;
    }
    p[1].atan2(p[0])
}

/// Splits planar coordinates by layer and assigns radii.
///
/// `coords.rows` index the supra layout of `network`. Radii equal to 1 are
/// clamped to `1 - epsilon`.
pub fn extract_layers(
    coords: &EuclideanCoords2D,
    network: &MultilayerNetwork,
    beta: f64,
    epsilon: f64,
) -> Result<Vec<DiskEmbedding>, ReduceError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(ReduceError::NonPositiveBeta(beta));
    }
    let mut layers: Vec<DiskEmbedding> = (0..network.layer_count())
        .map(|l| DiskEmbedding {
            layer: l,
            beta: Some(beta),
            nodes: Vec::new(),
        })
        .collect();
    let r_max = 1.0 - epsilon;
    for (&row, &p) in coords.rows.iter().zip(&coords.points) {
        let at = network.locate(row);
        let theta = node_angle(p);
        let w = network
            .weighted_degree(at.layer, at.node)
            .expect("row within network");
        let r = assign_radius(w, beta)?.min(r_max);
        let point =
            PoincarePoint::from_polar(r, theta).expect("radius below one lies in the open disk");
        layers[at.layer].nodes.push(DiskNode {
            node: at.node,
            theta,
            r,
            point,
        });
    }
    for layer in &mut layers {
        layer.nodes.sort_by_key(|n| n.node);
    }
    Ok(layers)
}
