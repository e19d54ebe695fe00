//! Multilayer stochastic block model.
//!
//! Nodes `i`, `j` in communities `c_i`, `c_j` and layers `l_i`, `l_j` are
//! linked with probability `p_eq` / `p_neq` inside a layer and `p_eq / alpha`
//! / `p_neq / alpha` across layers, depending on whether `c_i == c_j`.
//! Community labels are shared by all layers.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{
    CorrespondenceMap, Edge, InterlayerEdges, Layer, MultilayerNetwork, NetworkError, NodeRef,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SbmError {
    #[error("invalid SBM configuration: {0}")]
    InvalidConfig(String),
    #[error("keep count {keep} must be within 1..={available}")]
    InvalidKeepCount { keep: usize, available: usize },
    #[error("layer {0} does not exist")]
    UnknownLayer(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossLayerPairs {
    /// Every (node, node) pair of two different layers is drawn.
    #[default]
    All,
    /// No cross-layer edges are drawn.
    None,
}

impl std::str::FromStr for CrossLayerPairs {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Self::All),
            "none" => Ok(Self::None),
            other => Err(format!("unknown cross-layer pairing `{other}` (all|none)")),
        }
    }
}

/// Intra-layer edge probabilities of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerProbs {
    pub p_eq: f64,
    pub p_neq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmConfig {
    /// Nodes per layer.
    pub n: usize,
    pub layers: usize,
    pub communities: usize,
    pub p_eq: f64,
    pub p_neq: f64,
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cross_layer_pairs: CrossLayerPairs,
    /// Per-layer overrides of `(p_eq, p_neq)`; cross-layer probabilities then
    /// use the mean of the two layers' values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer_probs: Option<Vec<LayerProbs>>,
}

impl SbmConfig {
    pub fn new(
        n: usize,
        layers: usize,
        communities: usize,
        p_eq: f64,
        p_neq: f64,
        alpha: f64,
    ) -> Self {
        Self {
            n,
            layers,
            communities,
            p_eq,
            p_neq,
            alpha,
            seed: 0,
            cross_layer_pairs: CrossLayerPairs::All,
            layer_probs: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SbmError> {
        let bad = |m: String| Err(SbmError::InvalidConfig(m));
        if self.n == 0 || self.layers == 0 {
            return bad("n and layers must be positive".into());
        }
        if self.communities == 0 || self.communities > self.n {
            return bad(format!("communities must be in 1..={}", self.n));
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        check_probs(self.p_eq, self.p_neq)?;
        if let Some(per_layer) = &self.layer_probs {
            if per_layer.len() != self.layers {
                return bad(format!(
                    "layer_probs has {} entries for {} layers",
                    per_layer.len(),
                    self.layers
                ));
            }
            for lp in per_layer {
                check_probs(lp.p_eq, lp.p_neq)?;
            }
        }
        Ok(())
    }

    fn probs(&self, layer: usize) -> LayerProbs {
        match &self.layer_probs {
            Some(v) => v[layer],
            None => LayerProbs {
                p_eq: self.p_eq,
                p_neq: self.p_neq,
            },
        }
    }
}

fn check_probs(p_eq: f64, p_neq: f64) -> Result<(), SbmError> {
    if !(0.0 <= p_neq && p_neq <= p_eq && p_eq <= 1.0) {
        return Err(SbmError::InvalidConfig(format!(
            "need 0 <= p_neq <= p_eq <= 1, got p_eq = {p_eq}, p_neq = {p_neq}"
        )));
    }
    Ok(())
}

/// Community of each node, per layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityLabels {
    pub labels: Vec<Vec<usize>>,
}

impl CommunityLabels {
    pub fn layer(&self, l: usize) -> &[usize] {
        &self.labels[l]
    }

    pub fn get(&self, l: usize, node: usize) -> usize {
        self.labels[l][node]
    }
}

/// Balanced deterministic assignment: node `k` of `n` joins community `k * n_c / n`.
pub fn community_of(k: usize, n: usize, communities: usize) -> usize {
    k * communities / n
}

pub fn generate_sbm(config: &SbmConfig) -> Result<(MultilayerNetwork, CommunityLabels), SbmError> {
    config.validate()?;
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let community: Vec<usize> = (0..n)
        .map(|k| community_of(k, n, config.communities))
        .collect();

    let mut layers = Vec::with_capacity(config.layers);
    for l in 0..config.layers {
        let probs = config.probs(l);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if community[i] == community[j] {
                    probs.p_eq
                } else {
                    probs.p_neq
                };
                if rng.gen::<f64>() < p {
                    edges.push(Edge::new(i, j, 1.0));
                }
            }
        }
        layers.push(Layer::new(n, edges));
    }

    let mut interlayer = InterlayerEdges::new();
    if config.cross_layer_pairs == CrossLayerPairs::All {
        for la in 0..config.layers {
            for lb in la + 1..config.layers {
                let (pa, pb) = (config.probs(la), config.probs(lb));
                let p_eq = 0.5 * (pa.p_eq + pb.p_eq) / config.alpha;
                let p_neq = 0.5 * (pa.p_neq + pb.p_neq) / config.alpha;
                for i in 0..n {
                    for j in 0..n {
                        let p = if community[i] == community[j] {
                            p_eq
                        } else {
                            p_neq
                        };
                        if rng.gen::<f64>() < p {
                            interlayer.insert(NodeRef::new(la, i), NodeRef::new(lb, j), 1.0);
                        }
                    }
                }
            }
        }
    }

    let network = MultilayerNetwork::build(
        layers,
        Some(CorrespondenceMap::identity(config.layers, n)),
        interlayer,
    )?;
    let labels = CommunityLabels {
        labels: vec![community; config.layers],
    };
    Ok((network, labels))
}

/// Result of removing nodes from one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsampled {
    pub network: MultilayerNetwork,
    pub labels: CommunityLabels,
    /// Old index → new index in the subsampled layer (`None` when removed).
    pub old_to_new: Vec<Option<usize>>,
}

/// Keeps `keep` uniformly chosen nodes of `layer` and re-indexes them densely
/// in their original order. Incident edges, correspondences, inter-layer
/// edges and labels of removed nodes are dropped.
pub fn subsample_layer(
    network: &MultilayerNetwork,
    labels: &CommunityLabels,
    layer: usize,
    keep: usize,
    seed: u64,
) -> Result<Subsampled, SbmError> {
    if layer >= network.layer_count() {
        return Err(SbmError::UnknownLayer(layer));
    }
    let available = network.node_count(layer);
    if keep == 0 || keep > available {
        return Err(SbmError::InvalidKeepCount { keep, available });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = sample(&mut rng, available, keep).into_vec();
    kept.sort_unstable();
    let mut old_to_new = vec![None; available];
    for (new, &old) in kept.iter().enumerate() {
        old_to_new[old] = Some(new);
    }
    let remap = |r: NodeRef| -> Option<NodeRef> {
        if r.layer == layer {
            old_to_new[r.node].map(|n| NodeRef::new(layer, n))
        } else {
            Some(r)
        }
    };

    let layers = network
        .layers()
        .iter()
        .enumerate()
        .map(|(l, lay)| {
            if l != layer {
                return lay.clone();
            }
            let edges = lay
                .edges
                .iter()
                .filter_map(|e| Some(Edge::new(old_to_new[e.u]?, old_to_new[e.v]?, e.weight)))
                .collect();
            Layer::new(keep, edges)
        })
        .collect();

    let mut correspondences = CorrespondenceMap::new();
    for (&(a, b), pairs) in network.correspondences().iter() {
        for &(x, y) in pairs {
            if let (Some(ra), Some(rb)) = (remap(NodeRef::new(a, x)), remap(NodeRef::new(b, y))) {
                correspondences.insert(ra, rb);
            }
        }
    }
    let mut interlayer = InterlayerEdges::new();
    for e in network.interlayer().iter() {
        if let (Some(ra), Some(rb)) = (remap(e.a), remap(e.b)) {
            interlayer.insert(ra, rb, e.weight);
        }
    }
    let network = MultilayerNetwork::build(layers, Some(correspondences), interlayer)?;

    let mut new_labels = labels.clone();
    new_labels.labels[layer] = kept.iter().map(|&old| labels.labels[layer][old]).collect();
    Ok(Subsampled {
        network,
        labels: new_labels,
        old_to_new,
    })
}
