//! End-to-end embedding: pre-weighting, supra matrix, reduction, layer extraction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::MultilayerNetwork;
use crate::preweight::{self, DegreeKind, PreweightMode};
use crate::reduce::{self, DiskEmbedding, EuclideanCoords2D, ReduceError, Reducer};
use crate::supra::{build_supra, connected_components, SupraError, SupraMatrix, SupraOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Supra(#[from] SupraError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("supra graph is disconnected into {} components (sizes {sizes:?}); enable largest_component to embed the largest one", sizes.len())]
    Disconnected { sizes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub preweight: PreweightMode,
    /// Degree used by the repulsion-attraction rule.
    pub ra_degree: DegreeKind,
    pub mu: f64,
    /// Radius scale; `None` uses the mean layer-local weighted degree.
    pub beta: Option<f64>,
    pub reducer: Reducer,
    /// Treat supra entries as similarities (edge length `1 / w`).
    pub invert_weights: bool,
    pub largest_component: bool,
    pub additive_coupling: bool,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preweight: PreweightMode::Ra,
            ra_degree: DegreeKind::Binary,
            mu: 1.0,
            beta: None,
            reducer: Reducer::Isomap,
            invert_weights: false,
            largest_component: false,
            additive_coupling: false,
            epsilon: 1e-9,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if let Some(b) = self.beta {
            if !(b.is_finite() && b > 0.0) {
                return bad(format!("beta must be positive, got {b}"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad(format!("epsilon must be in (0, 0.5), got {}", self.epsilon));
        }
        Ok(())
    }
}

/// Output of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// Pre-weighted network the supra matrix was built from.
    pub network: MultilayerNetwork,
    pub supra: SupraMatrix,
    pub coords: EuclideanCoords2D,
    pub beta: f64,
    pub layers: Vec<DiskEmbedding>,
}

fn resolve_beta(config: &PipelineConfig, network: &MultilayerNetwork) -> f64 {
    match config.beta {
        Some(b) => b,
        None => {
            let b = reduce::default_beta(network);
            if b > 0.0 {
                b
            } else {
                log::warn!("network has no weighted degree; beta falls back to 1");
                1.0
            }
        }
    }
}

/// Embeds every layer of `network` jointly into the Poincaré disk.
pub fn embed(
    network: &MultilayerNetwork,
    config: &PipelineConfig,
) -> Result<Embedding, PipelineError> {
    config.validate()?;
    let weighted = preweight::apply(network, config.preweight, config.ra_degree);
    let supra = build_supra(
        &weighted,
        config.mu,
        SupraOptions {
            additive_coupling: config.additive_coupling,
        },
    )?;
    let comps = connected_components(&supra);
    let rows: Vec<usize> = if comps.len() == 1 {
        comps.into_iter().next().unwrap_or_default()
    } else if config.largest_component {
        let largest = comps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .expect("at least one component");
        log::warn!(
            "supra graph has {} components; keeping the largest ({} of {} rows)",
            comps.len(),
            comps[largest].len(),
            supra.dim()
        );
        comps[largest].clone()
    } else {
        return Err(PipelineError::Disconnected {
            sizes: comps.iter().map(Vec::len).collect(),
        });
    };
    let coords = match config.reducer {
        Reducer::Isomap => reduce::isomap_embed_rows(&supra, &rows, config.invert_weights)?,
        Reducer::LaplacianEigenmaps => {
            reduce::laplacian_eigenmaps_rows(&supra, &rows, config.invert_weights)?
        }
    };
    let beta = resolve_beta(config, &weighted);
    let layers = reduce::extract_layers(&coords, &weighted, beta, config.epsilon)?;
    Ok(Embedding {
        network: weighted,
        supra,
        coords,
        beta,
        layers,
    })
}

/// Embeds each layer on its own (no coupling, no inter-layer edges).
pub fn embed_independently(
    network: &MultilayerNetwork,
    config: &PipelineConfig,
) -> Result<Vec<DiskEmbedding>, PipelineError> {
    (0..network.layer_count())
        .map(|l| {
            let single = network.single_layer(l);
            let mut emb = embed(&single, config)?.layers.remove(0);
            emb.layer = l;
            Ok(emb)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Layer;

    fn two_paths() -> MultilayerNetwork {
        MultilayerNetwork::from_layers(vec![
            Layer::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]),
            Layer::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]),
        ])
        .unwrap()
    }

    #[test]
    fn embeds_all_nodes_inside_disk() {
        let emb = embed(&two_paths(), &PipelineConfig::default()).unwrap();
        assert_eq!(emb.layers.len(), 2);
        for layer in &emb.layers {
            assert_eq!(layer.len(), 4);
            assert!(layer.nodes.iter().all(|n| n.point.norm() < 1.0));
        }
        // radii depend only on layer-local strength
        for i in 0..4 {
            let a = emb.layers[0].nodes[i].r;
            let b = emb.layers[1].nodes[i].r;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn disconnected_fails_unless_largest_component() {
        let net = MultilayerNetwork::from_layers(vec![Layer::from_triples(
            5,
            &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)],
        )])
        .unwrap();
        let err = embed(&net, &PipelineConfig::default()).unwrap_err();
        assert_eq!(err, PipelineError::Disconnected { sizes: vec![3, 2] });
        let cfg = PipelineConfig {
            largest_component: true,
            ..Default::default()
        };
        let emb = embed(&net, &cfg).unwrap();
        let nodes: Vec<usize> = emb.layers[0].nodes.iter().map(|n| n.node).collect();
        assert_eq!(nodes, vec![0, 1, 2]);
    }

    #[test]
    fn rejects_invalid_config() {
        let cfg = PipelineConfig {
            mu: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            embed(&two_paths(), &cfg),
            Err(PipelineError::InvalidConfig(_))
        ));
    }

    #[test]
    fn deterministic() {
        let cfg = PipelineConfig::default();
        assert_eq!(
            embed(&two_paths(), &cfg).unwrap(),
            embed(&two_paths(), &cfg).unwrap()
        );
    }

    #[test]
    fn laplacian_reducer_runs() {
        let cfg = PipelineConfig {
            reducer: Reducer::LaplacianEigenmaps,
            ..Default::default()
        };
        let emb = embed(&two_paths(), &cfg).unwrap();
        assert_eq!(emb.layers[1].len(), 4);
    }
}
