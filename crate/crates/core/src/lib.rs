//! Hyperbolic embedding of multilayer networks in the Poincaré disk.
//!
//! Layers are coupled into one supra connectivity matrix, reduced to the
//! plane with graph-geodesic Isomap (or Laplacian eigenmaps), and split back
//! into one disk embedding per layer, with radii set by weighted degree.
//!
//! ```
//! use hypmlnet::network::{Layer, MultilayerNetwork};
//! use hypmlnet::pipeline::{embed, PipelineConfig};
//!
//! let path = Layer::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
//! let net = MultilayerNetwork::from_layers(vec![path.clone(), path]).unwrap();
//! let emb = embed(&net, &PipelineConfig::default()).unwrap();
//! assert_eq!(emb.layers.len(), 2);
//! assert!(emb.layers[0].nodes.iter().all(|n| n.point.norm() < 1.0));
//! ```

pub mod config;
pub mod hypgeo;
pub mod io;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod plot;
pub mod preweight;
pub mod reduce;
pub mod sbm;
pub mod supra;
