//! Multilayer network data model.
//!
//! A [`MultilayerNetwork`] is a list of undirected weighted layers, a map of
//! node correspondences between layer pairs, and an optional set of explicit
//! inter-layer edges. Correspondences are coupling metadata only: they never
//! count as edges for degree, common-neighbour or pre-weighting purposes.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network must have at least one layer")]
    NoLayers,
    #[error("layer {layer} must have at least one node")]
    EmptyLayer { layer: usize },
    #[error("index out of range: {what} {index} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("duplicate edge ({u}, {v}) in {context}")]
    DuplicateEdge { context: String, u: usize, v: usize },
    #[error("invalid weight {weight} on edge ({u}, {v}) in {context}")]
    NegativeWeight {
        context: String,
        u: usize,
        v: usize,
        weight: f64,
    },
    #[error("self-loop on node {node} in layer {layer}")]
    SelfLoop { layer: usize, node: usize },
    #[error("node {node} appears in more than one correspondence between layers {a} and {b}")]
    DuplicateCorrespondence { a: usize, b: usize, node: usize },
    #[error("layer pair ({a}, {b}) must join two distinct layers")]
    SameLayerPair { a: usize, b: usize },
    #[error("common neighbours requested for a node with itself ({node})")]
    SameNode { node: usize },
}

/// Undirected weighted edge inside a layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        Self { u, v, weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub node_count: usize,
    pub edges: Vec<Edge>,
}

impl Layer {
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Self {
        Self { node_count, edges }
    }

    pub fn from_triples(node_count: usize, edges: &[(usize, usize, f64)]) -> Self {
        Self::new(
            node_count,
            edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect(),
        )
    }
}

/// A node addressed by (layer, index-in-layer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    pub layer: usize,
    pub node: usize,
}

impl NodeRef {
    pub fn new(layer: usize, node: usize) -> Self {
        Self { layer, node }
    }
}

/// Node associations between layer pairs. Keys are stored with `a < b`; the
/// pairs are `(node in a, node in b)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceMap {
    pairs: BTreeMap<(usize, usize), Vec<(usize, usize)>>,
}

impl CorrespondenceMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Identity correspondence between every pair of `layers` layers of `n` nodes.
    pub fn identity(layers: usize, n: usize) -> Self {
        let mut map = Self::new();
        for a in 0..layers {
            for b in a + 1..layers {
                map.pairs.insert((a, b), (0..n).map(|i| (i, i)).collect());
            }
        }
        map
    }

    /// Adds a correspondence; the orientation of the layer pair is normalised.
    pub fn insert(&mut self, first: NodeRef, second: NodeRef) {
        let (key, pair) = if first.layer <= second.layer {
            ((first.layer, second.layer), (first.node, second.node))
        } else {
            ((second.layer, first.layer), (second.node, first.node))
        };
        self.pairs.entry(key).or_default().push(pair);
    }

    /// Pairs for layers `(a, b)`, oriented as `(node in a, node in b)`.
    pub fn between(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        if a <= b {
            self.pairs.get(&(a, b)).cloned().unwrap_or_default()
        } else {
            self.pairs
                .get(&(b, a))
                .map(|v| v.iter().map(|&(x, y)| (y, x)).collect())
                .unwrap_or_default()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<(usize, usize)>)> {
        self.pairs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.values().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.pairs.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterlayerEdge {
    pub a: NodeRef,
    pub b: NodeRef,
    pub weight: f64,
}

/// `(node in a, node in b, weight)` triples of one layer pair.
type WeightedPairs = Vec<(usize, usize, f64)>;

/// Explicit edges between nodes of different layers, keyed by `(a, b)` with `a < b`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterlayerEdges {
    edges: BTreeMap<(usize, usize), WeightedPairs>,
}

impl InterlayerEdges {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, first: NodeRef, second: NodeRef, weight: f64) {
        let (key, e) = if first.layer <= second.layer {
            (
                (first.layer, second.layer),
                (first.node, second.node, weight),
            )
        } else {
            (
                (second.layer, first.layer),
                (second.node, first.node, weight),
            )
        };
        self.edges.entry(key).or_default().push(e);
    }

    pub fn between(&self, a: usize, b: usize) -> Vec<(usize, usize, f64)> {
        if a <= b {
            self.edges.get(&(a, b)).cloned().unwrap_or_default()
        } else {
            self.edges
                .get(&(b, a))
                .map(|v| v.iter().map(|&(x, y, w)| (y, x, w)).collect())
                .unwrap_or_default()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = InterlayerEdge> + '_ {
        self.edges.iter().flat_map(|(&(la, lb), v)| {
            v.iter().map(move |&(a, b, w)| InterlayerEdge {
                a: NodeRef::new(la, a),
                b: NodeRef::new(lb, b),
                weight: w,
            })
        })
    }

    pub fn len(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn map_weights(&self, mut f: impl FnMut(InterlayerEdge) -> f64) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|(&(la, lb), v)| {
                let v = v
                    .iter()
                    .map(|&(a, b, w)| {
                        let nw = f(InterlayerEdge {
                            a: NodeRef::new(la, a),
                            b: NodeRef::new(lb, b),
                            weight: w,
                        });
                        (a, b, nw)
                    })
                    .collect();
                ((la, lb), v)
            })
            .collect();
        Self { edges }
    }
}

/// Adjacency entry of the full multilayer graph (intra plus explicit inter edges).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub global: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerNetwork {
    layers: Vec<Layer>,
    correspondences: CorrespondenceMap,
    interlayer: InterlayerEdges,
    offsets: Vec<usize>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl MultilayerNetwork {
    /// Validates and assembles a network.
    ///
    /// When `correspondences` is `None` and all layers have the same node
    /// count, the identity correspondence is installed between every layer
    /// pair. With differing node counts and no map, layers are uncoupled.
    pub fn build(
        layers: Vec<Layer>,
        correspondences: Option<CorrespondenceMap>,
        interlayer: InterlayerEdges,
    ) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::NoLayers);
        }
        for (l, layer) in layers.iter().enumerate() {
            validate_layer(l, layer)?;
        }
        let correspondences = match correspondences {
            Some(map) => map,
            None => {
                let n = layers[0].node_count;
                if layers.iter().all(|l| l.node_count == n) {
                    CorrespondenceMap::identity(layers.len(), n)
                } else {
                    CorrespondenceMap::new()
                }
            }
        };
        validate_correspondences(&layers, &correspondences)?;
        validate_interlayer(&layers, &interlayer)?;

        let mut offsets = Vec::with_capacity(layers.len() + 1);
        let mut acc = 0;
        for layer in &layers {
            offsets.push(acc);
            acc += layer.node_count;
        }
        offsets.push(acc);

        let mut adjacency = vec![Vec::new(); acc];
        for (l, layer) in layers.iter().enumerate() {
            for e in &layer.edges {
                let (gu, gv) = (offsets[l] + e.u, offsets[l] + e.v);
                adjacency[gu].push(Neighbor {
                    global: gv,
                    weight: e.weight,
                });
                adjacency[gv].push(Neighbor {
                    global: gu,
                    weight: e.weight,
                });
            }
        }
        for e in interlayer.iter() {
            let (ga, gb) = (offsets[e.a.layer] + e.a.node, offsets[e.b.layer] + e.b.node);
            adjacency[ga].push(Neighbor {
                global: gb,
                weight: e.weight,
            });
            adjacency[gb].push(Neighbor {
                global: ga,
                weight: e.weight,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|n| n.global);
        }

        Ok(Self {
            layers,
            correspondences,
            interlayer,
            offsets,
            adjacency,
        })
    }

    /// Builds a network with no explicit inter-layer edges.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, NetworkError> {
        Self::build(layers, None, InterlayerEdges::new())
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> Option<&Layer> {
        self.layers.get(l)
    }

    pub fn node_count(&self, l: usize) -> usize {
        self.layers[l].node_count
    }

    pub fn total_nodes(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn correspondences(&self) -> &CorrespondenceMap {
        &self.correspondences
    }

    pub fn interlayer(&self) -> &InterlayerEdges {
        &self.interlayer
    }

    /// Row of `(layer, node)` in layer-major order.
    pub fn global_index(&self, r: NodeRef) -> usize {
        self.offsets[r.layer] + r.node
    }

    pub fn layer_offset(&self, l: usize) -> usize {
        self.offsets[l]
    }

    pub fn locate(&self, global: usize) -> NodeRef {
        let layer = self.offsets.partition_point(|&o| o <= global) - 1;
        NodeRef::new(layer, global - self.offsets[layer])
    }

    /// Neighbours of a node in the full multilayer graph, sorted by global index.
    pub fn neighbors_global(&self, global: usize) -> &[Neighbor] {
        &self.adjacency[global]
    }

    fn check(&self, r: NodeRef) -> Result<(), NetworkError> {
        if r.layer >= self.layers.len() {
            return Err(NetworkError::IndexOutOfRange {
                what: "layer",
                index: r.layer,
                limit: self.layers.len(),
            });
        }
        let limit = self.layers[r.layer].node_count;
        if r.node >= limit {
            return Err(NetworkError::IndexOutOfRange {
                what: "node",
                index: r.node,
                limit,
            });
        }
        Ok(())
    }

    /// Number of distinct neighbours across intra-layer and explicit inter-layer edges.
    pub fn degree(&self, layer: usize, node: usize) -> Result<usize, NetworkError> {
        let r = NodeRef::new(layer, node);
        self.check(r)?;
        Ok(self.adjacency[self.global_index(r)].len())
    }

    /// Sum of incident intra-layer edge weights.
    pub fn weighted_degree(&self, layer: usize, node: usize) -> Result<f64, NetworkError> {
        let r = NodeRef::new(layer, node);
        self.check(r)?;
        let lo = self.offsets[layer];
        let hi = self.offsets[layer + 1];
        Ok(self.adjacency[self.global_index(r)]
            .iter()
            .filter(|n| (lo..hi).contains(&n.global))
            .map(|n| n.weight)
            .sum())
    }

    /// Sum of weights over all incident edges, intra- and inter-layer.
    pub fn total_strength(&self, global: usize) -> f64 {
        self.adjacency[global].iter().map(|n| n.weight).sum()
    }

    /// Common neighbours of two nodes of the same layer, counted within that layer.
    pub fn common_neighbors(
        &self,
        layer: usize,
        a: usize,
        b: usize,
    ) -> Result<usize, NetworkError> {
        self.check(NodeRef::new(layer, a))?;
        self.check(NodeRef::new(layer, b))?;
        if a == b {
            return Err(NetworkError::SameNode { node: a });
        }
        let lo = self.offsets[layer];
        let hi = self.offsets[layer + 1];
        let ga = self.adjacency[lo + a]
            .iter()
            .filter(|n| (lo..hi).contains(&n.global));
        let gb = self.adjacency[lo + b]
            .iter()
            .filter(|n| (lo..hi).contains(&n.global));
        Ok(sorted_intersection(
            ga.map(|n| n.global),
            gb.map(|n| n.global),
        ))
    }

    /// Common neighbours of two nodes (any layers) in the full multilayer graph.
    pub fn common_neighbors_global(&self, ga: usize, gb: usize) -> usize {
        sorted_intersection(
            self.adjacency[ga].iter().map(|n| n.global),
            self.adjacency[gb].iter().map(|n| n.global),
        )
    }

    /// Number of intra-layer plus explicit inter-layer edges.
    pub fn edge_count(&self) -> usize {
        self.layers.iter().map(|l| l.edges.len()).sum::<usize>() + self.interlayer.len()
    }

    /// Mean weight over all intra-layer and explicit inter-layer edges (0 when none).
    pub fn mean_edge_weight(&self) -> f64 {
        let count = self.edge_count();
        if count == 0 {
            return 0.0;
        }
        let total: f64 = self
            .layers
            .iter()
            .flat_map(|l| l.edges.iter().map(|e| e.weight))
            .chain(self.interlayer.iter().map(|e| e.weight))
            .sum();
        total / count as f64
    }

    /// Same topology with every weight replaced by `f(edge endpoints, old weight)`.
    pub fn map_weights(&self, mut f: impl FnMut(NodeRef, NodeRef, f64) -> f64) -> Self {
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(l, layer)| Layer {
                node_count: layer.node_count,
                edges: layer
                    .edges
                    .iter()
                    .map(|e| Edge {
                        weight: f(NodeRef::new(l, e.u), NodeRef::new(l, e.v), e.weight),
                        ..*e
                    })
                    .collect(),
            })
            .collect();
        let interlayer = self.interlayer.map_weights(|e| f(e.a, e.b, e.weight));
        Self::build(layers, Some(self.correspondences.clone()), interlayer)
            .expect("reweighting keeps a validated network valid")
    }

    /// Multiplies every edge weight by `factor`.
    pub fn scale_weights(&self, factor: f64) -> Self {
        self.map_weights(|_, _, w| w * factor)
    }

    /// Decomposes the network into the parts accepted by [`MultilayerNetwork::build`].
    pub fn into_parts(self) -> (Vec<Layer>, CorrespondenceMap, InterlayerEdges) {
        (self.layers, self.correspondences, self.interlayer)
    }

    /// Single layer `l` as a standalone network.
    pub fn single_layer(&self, l: usize) -> Self {
        Self::build(
            vec![self.layers[l].clone()],
            Some(CorrespondenceMap::new()),
            InterlayerEdges::new(),
        )
        .expect("a layer of a valid network is valid")
    }
}

fn sorted_intersection(a: impl Iterator<Item = usize>, b: impl Iterator<Item = usize>) -> usize {
    let mut a = a.peekable();
    let mut b = b.peekable();
    let mut count = 0;
    while let (Some(&x), Some(&y)) = (a.peek(), b.peek()) {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                count += 1;
                a.next();
                b.next();
            }
        }
    }
    count
}

fn check_weight(
    context: impl Fn() -> String,
    u: usize,
    v: usize,
    w: f64,
) -> Result<(), NetworkError> {
    if !(w.is_finite() && w >= 0.0) {
        return Err(NetworkError::NegativeWeight {
            context: context(),
            u,
            v,
            weight: w,
        });
    }
    Ok(())
}

fn validate_layer(l: usize, layer: &Layer) -> Result<(), NetworkError> {
    if layer.node_count == 0 {
        return Err(NetworkError::EmptyLayer { layer: l });
    }
    let mut seen = HashSet::with_capacity(layer.edges.len());
    for e in &layer.edges {
        for idx in [e.u, e.v] {
            if idx >= layer.node_count {
                return Err(NetworkError::IndexOutOfRange {
                    what: "node",
                    index: idx,
                    limit: layer.node_count,
                });
            }
        }
        if e.u == e.v {
            return Err(NetworkError::SelfLoop {
                layer: l,
                node: e.u,
            });
        }
        check_weight(|| format!("layer {l}"), e.u, e.v, e.weight)?;
        if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(NetworkError::DuplicateEdge {
                context: format!("layer {l}"),
                u: e.u,
                v: e.v,
            });
        }
    }
    Ok(())
}

fn check_pair(layers: &[Layer], a: usize, b: usize) -> Result<(), NetworkError> {
    for l in [a, b] {
        if l >= layers.len() {
            return Err(NetworkError::IndexOutOfRange {
                what: "layer",
                index: l,
                limit: layers.len(),
            });
        }
    }
    if a == b {
        return Err(NetworkError::SameLayerPair { a, b });
    }
    Ok(())
}

fn check_node(layers: &[Layer], l: usize, node: usize) -> Result<(), NetworkError> {
    if node >= layers[l].node_count {
        return Err(NetworkError::IndexOutOfRange {
            what: "node",
            index: node,
            limit: layers[l].node_count,
        });
    }
    Ok(())
}

fn validate_correspondences(layers: &[Layer], map: &CorrespondenceMap) -> Result<(), NetworkError> {
    for (&(a, b), pairs) in map.iter() {
        check_pair(layers, a, b)?;
        let mut seen_a = BTreeSet::new();
        let mut seen_b = BTreeSet::new();
        for &(x, y) in pairs {
            check_node(layers, a, x)?;
            check_node(layers, b, y)?;
            if !seen_a.insert(x) {
                return Err(NetworkError::DuplicateCorrespondence { a, b, node: x });
            }
            if !seen_b.insert(y) {
                return Err(NetworkError::DuplicateCorrespondence { a, b, node: y });
            }
        }
    }
    Ok(())
}

fn validate_interlayer(layers: &[Layer], edges: &InterlayerEdges) -> Result<(), NetworkError> {
    for (&(a, b), list) in &edges.edges {
        check_pair(layers, a, b)?;
        let mut seen = HashSet::with_capacity(list.len());
        for &(x, y, w) in list {
            check_node(layers, a, x)?;
            check_node(layers, b, y)?;
            check_weight(|| format!("layers ({a}, {b})"), x, y, w)?;
            if !seen.insert((x, y)) {
                return Err(NetworkError::DuplicateEdge {
                    context: format!("layers ({a}, {b})"),
                    u: x,
                    v: y,
                });
            }
        }
    }
    Ok(())
}
