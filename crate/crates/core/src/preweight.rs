//! Edge pre-weighting.
//!
//! The repulsion-attraction rule gives an edge between `i` and `j` the weight
//! `(d_i + d_j + d_i d_j) / (1 + CN_ij)`, so links between well-connected
//! nodes that share few neighbours become long. Edge betweenness is offered as
//! an alternative. Both act on intra-layer and explicit inter-layer edges and
//! never add or remove edges.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::network::{MultilayerNetwork, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreweightMode {
    #[default]
    Ra,
    Ebc,
    None,
}

impl std::str::FromStr for PreweightMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ra" => Ok(Self::Ra),
            "ebc" => Ok(Self::Ebc),
            "none" => Ok(Self::None),
            other => Err(format!(
                "unknown pre-weighting mode `{other}` (ra|ebc|none)"
            )),
        }
    }
}

/// Degree used by the repulsion-attraction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeKind {
    #[default]
    Binary,
    Weighted,
}

impl std::str::FromStr for DegreeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(Self::Binary),
            "weighted" => Ok(Self::Weighted),
            other => Err(format!("unknown degree kind `{other}` (binary|weighted)")),
        }
    }
}

/// Repulsion-attraction weight for one edge.
pub fn ra_weight(d_i: f64, d_j: f64, common: usize) -> f64 {
    (d_i + d_j + d_i * d_j) / (1.0 + common as f64)
}

/// Replaces every edge weight by its repulsion-attraction weight.
///
/// Degrees and common neighbours are taken on the full multilayer graph
/// (intra-layer plus explicit inter-layer edges).
pub fn ra_preweight(network: &MultilayerNetwork, degree: DegreeKind) -> MultilayerNetwork {
    let deg = |g: usize| match degree {
        DegreeKind::Binary => network.neighbors_global(g).len() as f64,
        DegreeKind::Weighted => network.total_strength(g),
    };
    network.map_weights(|a, b, _| {
        let (ga, gb) = (network.global_index(a), network.global_index(b));
        ra_weight(deg(ga), deg(gb), network.common_neighbors_global(ga, gb))
    })
}

/// Edge betweenness on the full multilayer graph with hop-count paths.
///
/// Unordered node pairs are counted once and split evenly over their
/// shortest paths; no further normalisation is applied.
pub fn edge_betweenness(network: &MultilayerNetwork) -> HashMap<(usize, usize), f64> {
    let n = network.total_nodes();
    let mut edge_ids = HashMap::new();
    for g in 0..n {
        for nb in network.neighbors_global(g) {
            if g < nb.global {
                let id = edge_ids.len();
                edge_ids.insert((g, nb.global), id);
            }
        }
    }
    let m = edge_ids.len();
    // adjacency with edge ids, built once for all sources
    let adj: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|g| {
            network
                .neighbors_global(g)
                .iter()
                .map(|nb| {
                    let key = (g.min(nb.global), g.max(nb.global));
                    (nb.global, edge_ids[&key])
                })
                .collect()
        })
        .collect();

    // Fixed-size chunks reduced in order keep the floating-point sum deterministic.
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(32)
        .map(|chunk| {
            let mut acc = vec![0.0; m];
            for &s in chunk {
                brandes_from(&adj, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; m];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    edge_ids
        .into_iter()
        .map(|(key, id)| (key, total[id] / 2.0))
        .collect()
}

fn brandes_from(adj: &[Vec<(usize, usize)>], source: usize, acc: &mut [f64]) {
    let n = adj.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    sigma[source] = 1.0;
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _) in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        for &(v, eid) in &adj[w] {
            if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                acc[eid] += c;
                delta[v] += c;
            }
        }
    }
}

/// Replaces every edge weight by its edge betweenness.
pub fn ebc_preweight(network: &MultilayerNetwork) -> MultilayerNetwork {
    let ebc = edge_betweenness(network);
    network.map_weights(|a, b, _| {
        let (ga, gb) = (network.global_index(a), network.global_index(b));
        ebc[&(ga.min(gb), ga.max(gb))]
    })
}

/// Leaves the weights untouched.
pub fn skip_preweight(network: &MultilayerNetwork) -> MultilayerNetwork {
    network.clone()
}

pub fn apply(
    network: &MultilayerNetwork,
    mode: PreweightMode,
    degree: DegreeKind,
) -> MultilayerNetwork {
    match mode {
        PreweightMode::Ra => ra_preweight(network, degree),
        PreweightMode::Ebc => ebc_preweight(network),
        PreweightMode::None => skip_preweight(network),
    }
}

/// Topology of a network as a sorted list of endpoint pairs (weights dropped).
pub fn topology(network: &MultilayerNetwork) -> Vec<(NodeRef, NodeRef)> {
    let mut out = Vec::new();
    for (l, layer) in network.layers().iter().enumerate() {
        for e in &layer.edges {
            out.push((NodeRef::new(l, e.u.min(e.v)), NodeRef::new(l, e.u.max(e.v))));
        }
    }
    for e in network.interlayer().iter() {
        out.push((e.a.min(e.b), e.a.max(e.b)));
    }
    out.sort();
    out
}
