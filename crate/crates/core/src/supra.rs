//! Supra (global) connectivity matrix.
//!
//! Rows are laid out layer-major: the first `n_0` rows are layer 0's nodes,
//! the next `n_1` rows layer 1's, and so on. Diagonal blocks hold the layer
//! adjacencies. Off-diagonal blocks hold the coupling `mu` at correspondence
//! positions and explicit inter-layer edge weights.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::network::{MultilayerNetwork, NodeRef};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupraError {
    #[error("coupling mu must be positive and finite, got {0}")]
    NonPositiveMu(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SupraOptions {
    /// Add `mu` on top of an explicit inter-layer edge that coincides with a
    /// correspondence instead of keeping the edge weight alone.
    pub additive_coupling: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupraMatrix {
    values: DMatrix<f64>,
    offsets: Vec<usize>,
    mu: f64,
}

impl SupraMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn layer_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn layer_size(&self, l: usize) -> usize {
        self.offsets[l + 1] - self.offsets[l]
    }

    pub fn row(&self, r: NodeRef) -> usize {
        self.offsets[r.layer] + r.node
    }

    pub fn locate(&self, row: usize) -> NodeRef {
        let layer = self.offsets.partition_point(|&o| o <= row) - 1;
        NodeRef::new(layer, row - self.offsets[layer])
    }

    /// Block `(i, j)` as an `n_i x n_j` matrix.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.values
            .view(
                (self.offsets[i], self.offsets[j]),
                (self.layer_size(i), self.layer_size(j)),
            )
            .into_owned()
    }

    /// Nonzero off-diagonal entries of each row as `(column, value)`.
    pub fn adjacency_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let n = self.dim();
        (0..n)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != r && self.values[(r, c)] != 0.0)
                    .map(|c| (c, self.values[(r, c)]))
                    .collect()
            })
            .collect()
    }

    /// Principal submatrix on `rows` (kept in the given order).
    pub fn submatrix(&self, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| {
            self.values[(rows[i], rows[j])]
        })
    }
}

pub fn build_supra(
    network: &MultilayerNetwork,
    mu: f64,
    options: SupraOptions,
) -> Result<SupraMatrix, SupraError> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(SupraError::NonPositiveMu(mu));
    }
    let n = network.total_nodes();
    let offsets: Vec<usize> = (0..=network.layer_count())
        .map(|l| {
            if l == network.layer_count() {
                n
            } else {
                network.layer_offset(l)
            }
        })
        .collect();
    let mut values = DMatrix::zeros(n, n);
    fn set(values: &mut DMatrix<f64>, r: usize, c: usize, v: f64) {
        values[(r, c)] = v;
        values[(c, r)] = v;
    }

    for (l, layer) in network.layers().iter().enumerate() {
        for e in &layer.edges {
            set(&mut values, offsets[l] + e.u, offsets[l] + e.v, e.weight);
        }
    }
    for (&(a, b), pairs) in network.correspondences().iter() {
        for &(x, y) in pairs {
            set(&mut values, offsets[a] + x, offsets[b] + y, mu);
        }
    }
    for e in network.interlayer().iter() {
        let r = offsets[e.a.layer] + e.a.node;
        let c = offsets[e.b.layer] + e.b.node;
        let coupled = values[(r, c)] != 0.0;
        let v = if coupled && options.additive_coupling {
            mu + e.weight
        } else {
            e.weight
        };
        set(&mut values, r, c, v);
    }
    Ok(SupraMatrix {
        values,
        offsets,
        mu,
    })
}

/// Connected components of the graph of nonzero off-diagonal entries.
///
/// Each component is sorted; components are ordered by their smallest row.
pub fn connected_components(supra: &SupraMatrix) -> Vec<Vec<usize>> {
    components_of(&supra.adjacency_lists())
}

pub(crate) fn components_of(adj: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = vec![start];
        label[start] = id;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = id;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{CorrespondenceMap, InterlayerEdges, Layer};

    fn two_empty_layers() -> MultilayerNetwork {
        MultilayerNetwork::from_layers(vec![
            Layer::from_triples(2, &[]),
            Layer::from_triples(2, &[]),
        ])
        .unwrap()
    }

    #[test]
    fn identity_coupling_block() {
        let s = build_supra(&two_empty_layers(), 1.0, SupraOptions::default()).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0., 0., 1., 0., //
                0., 0., 0., 1., //
                1., 0., 0., 0., //
                0., 1., 0., 0.,
            ],
        );
        assert_eq!(s.values(), &expected);
    }

    #[test]
    fn diagonal_block_holds_layer_weights() {
        let net = MultilayerNetwork::from_layers(vec![
            Layer::from_triples(2, &[(0, 1, 2.0)]),
            Layer::from_triples(2, &[]),
        ])
        .unwrap();
        let s = build_supra(&net, 5.0, SupraOptions::default()).unwrap();
        let g = s.values();
        assert_eq!((g[(0, 1)], g[(1, 0)]), (2.0, 2.0));
        assert_eq!((g[(0, 2)], g[(1, 3)]), (5.0, 5.0));
        assert_eq!(g[(2, 3)], 0.0);
    }

    #[test]
    fn rectangular_block_for_heterogeneous_layers() {
        let mut corr = CorrespondenceMap::new();
        corr.insert(NodeRef::new(0, 0), NodeRef::new(1, 0));
        corr.insert(NodeRef::new(0, 2), NodeRef::new(1, 1));
        let net = MultilayerNetwork::build(
            vec![Layer::from_triples(3, &[]), Layer::from_triples(2, &[])],
            Some(corr),
            InterlayerEdges::new(),
        )
        .unwrap();
        let s = build_supra(&net, 7.0, SupraOptions::default()).unwrap();
        let block = s.block(0, 1);
        assert_eq!(block.shape(), (3, 2));
        let expected = DMatrix::from_row_slice(3, 2, &[7., 0., 0., 0., 0., 7.]);
        assert_eq!(block, expected);
        assert_eq!(s.block(1, 0), expected.transpose());
    }

    #[test]
    fn interlayer_edge_overrides_or_adds_coupling() {
        let mut inter = InterlayerEdges::new();
        inter.insert(NodeRef::new(0, 0), NodeRef::new(1, 0), 0.5);
        inter.insert(NodeRef::new(1, 0), NodeRef::new(0, 1), 0.25);
        let net = MultilayerNetwork::build(
            vec![Layer::from_triples(2, &[]), Layer::from_triples(2, &[])],
            None,
            inter,
        )
        .unwrap();
        let s = build_supra(&net, 3.0, SupraOptions::default()).unwrap();
        assert_eq!(s.values()[(0, 2)], 0.5);
        assert_eq!(s.values()[(1, 2)], 0.25);
        assert_eq!(s.values()[(1, 3)], 3.0);
        let add = build_supra(
            &net,
            3.0,
            SupraOptions {
                additive_coupling: true,
            },
        )
        .unwrap();
        assert_eq!(add.values()[(0, 2)], 3.5);
        assert_eq!(add.values()[(1, 2)], 0.25);
    }

    #[test]
    fn rejects_bad_mu() {
        for mu in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(build_supra(&two_empty_layers(), mu, SupraOptions::default()).is_err());
        }
    }

    #[test]
    fn components() {
        let s = build_supra(&two_empty_layers(), 1.0, SupraOptions::default()).unwrap();
        assert_eq!(connected_components(&s), vec![vec![0, 2], vec![1, 3]]);

        let full = MultilayerNetwork::from_layers(vec![
            Layer::from_triples(2, &[(0, 1, 1.0)]),
            Layer::from_triples(2, &[]),
        ])
        .unwrap();
        let s = build_supra(&full, 1.0, SupraOptions::default()).unwrap();
        assert_eq!(connected_components(&s).len(), 1);
    }

    #[test]
    fn uncorresponded_isolated_node_is_alone() {
        let mut corr = CorrespondenceMap::new();
        corr.insert(NodeRef::new(0, 0), NodeRef::new(1, 0));
        corr.insert(NodeRef::new(0, 1), NodeRef::new(1, 1));
        let net = MultilayerNetwork::build(
            vec![
                Layer::from_triples(3, &[(0, 1, 1.0)]),
                Layer::from_triples(2, &[(0, 1, 1.0)]),
            ],
            Some(corr),
            InterlayerEdges::new(),
        )
        .unwrap();
        let s = build_supra(&net, 2.0, SupraOptions::default()).unwrap();
        let comps = connected_components(&s);
        assert_eq!(comps.len(), 2);
        assert!(comps.contains(&vec![2]));
    }

    #[test]
    fn disjoint_cliques_partially_coupled() {
        // Each layer: clique A = {0,1,2}, clique B = {3,4,5}; only A is coupled.
        let mut edges = Vec::new();
        for c in [[0, 1, 2], [3, 4, 5]] {
            edges.push((c[0], c[1], 1.0));
            edges.push((c[1], c[2], 1.0));
            edges.push((c[0], c[2], 1.0));
        }
        let mut corr = CorrespondenceMap::new();
        for i in 0..3 {
            corr.insert(NodeRef::new(0, i), NodeRef::new(1, i));
        }
        let net = MultilayerNetwork::build(
            vec![
                Layer::from_triples(6, &edges),
                Layer::from_triples(6, &edges),
            ],
            Some(corr),
            InterlayerEdges::new(),
        )
        .unwrap();
        let s = build_supra(&net, 1.0, SupraOptions::default()).unwrap();
        // union-find by hand: {A0 u A1}, {B0}, {B1}
        let comps = connected_components(&s);
        assert_eq!(comps.len(), 3);
        assert_eq!(comps[0], vec![0, 1, 2, 6, 7, 8]);
    }
}
