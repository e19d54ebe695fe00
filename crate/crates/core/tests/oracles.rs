//! Library results checked against independent brute-force computations.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use hypmlnet::network::{InterlayerEdges, Layer, MultilayerNetwork, NodeRef};
use hypmlnet::preweight::{ebc_preweight, ra_preweight, DegreeKind};
use hypmlnet::reduce::{all_pairs_shortest_paths, classical_mds_2d, isomap_embed};
use hypmlnet::sbm::{community_of, generate_sbm, CrossLayerPairs, SbmConfig};
use hypmlnet::supra::{build_supra, SupraOptions};

use common::*;

fn random_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (3..max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let k = pairs.len();
        (
            Just(n),
            prop::collection::vec((any::<bool>(), 0.1..5.0f64), k).prop_map(move |mask| {
                pairs
                    .iter()
                    .zip(mask)
                    .filter(|(_, (keep, _))| *keep)
                    .map(|(&(i, j), (_, w))| (i, j, w))
                    .collect::<Vec<_>>()
            }),
        )
    })
}

fn dense(n: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, w) in edges {
        m[(i, j)] = w;
        m[(j, i)] = w;
    }
    m
}

fn floyd_warshall(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if w[(i, j)] != 0.0 {
            w[(i, j)]
        } else {
            f64::INFINITY
        }
    });
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[(i, k)] + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    d
}

/// Edge betweenness from hop distances and path counts: pair (s, t) sends
/// `sigma(s,u) * sigma(v,t) / sigma(s,t)` through edge (u, v) whenever the
/// edge lies on a shortest s-t path.
fn brute_edge_betweenness(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let unit: Vec<(usize, usize, f64)> = edges.iter().map(|&(i, j, _)| (i, j, 1.0)).collect();
    let d = floyd_warshall(&dense(n, &unit));
    // sigma[s][t] by increasing distance
    let mut sigma = vec![vec![0.0f64; n]; n];
    for s in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&t| d[(s, t)].is_finite()).collect();
        order.sort_by(|&a, &b| d[(s, a)].total_cmp(&d[(s, b)]));
        sigma[s][s] = 1.0;
        for &t in &order {
            if t == s {
                continue;
            }
            sigma[s][t] = unit
                .iter()
                .filter_map(|&(a, b, _)| {
                    if b == t && d[(s, a)] + 1.0 == d[(s, t)] {
                        Some(sigma[s][a])
                    } else if a == t && d[(s, b)] + 1.0 == d[(s, t)] {
                        Some(sigma[s][b])
                    } else {
                        None
                    }
                })
                .sum();
        }
    }
    unit.iter()
        .map(|&(u, v, _)| {
            let mut total = 0.0;
            for s in 0..n {
                for t in s + 1..n {
                    if !d[(s, t)].is_finite() {
                        continue;
                    }
                    for (x, y) in [(u, v), (v, u)] {
                        if d[(s, x)] + 1.0 + d[(y, t)] == d[(s, t)] {
                            total += sigma[s][x] * sigma[y][t] / sigma[s][t];
                        }
                    }
                }
            }
            total
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shortest_paths_match_floyd_warshall((n, edges) in random_graph(12)) {
        let supra = single_layer_supra(n, &edges);
        let adj = supra.adjacency_lists();
        let fw = floyd_warshall(&dense(n, &edges));
        match all_pairs_shortest_paths(&adj) {
            Ok(d) => {
                for i in 0..n {
                    for j in 0..n {
                        prop_assert!((d[(i, j)] - fw[(i, j)]).abs() < 1e-9);
                    }
                }
            }
            Err(_) => prop_assert!(fw.iter().any(|v| v.is_infinite())),
        }
    }

    #[test]
    fn edge_betweenness_matches_path_counting((n, edges) in random_graph(10)) {
        prop_assume!(!edges.is_empty());
        let net = MultilayerNetwork::from_layers(vec![Layer::from_triples(n, &edges)]).unwrap();
        let weighted = ebc_preweight(&net);
        let expected = brute_edge_betweenness(n, &edges);
        for (e, want) in weighted.layers()[0].edges.iter().zip(expected) {
            prop_assert!((e.weight - want).abs() < 1e-9, "edge {}-{}: {} vs {}", e.u, e.v, e.weight, want);
        }
    }

    #[test]
    fn ra_matches_adjacency_formula((n, edges) in random_graph(12)) {
        prop_assume!(!edges.is_empty());
        let net = MultilayerNetwork::from_layers(vec![Layer::from_triples(n, &edges)]).unwrap();
        let a = dense(n, &edges).map(|w| if w != 0.0 { 1.0 } else { 0.0 });
        let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
        let cn = &a * &a;
        for e in &ra_preweight(&net, DegreeKind::Binary).layers()[0].edges {
            let (i, j) = (e.u, e.v);
            let want = (deg[i] + deg[j] + deg[i] * deg[j]) / (1.0 + cn[(i, j)]);
            prop_assert!((e.weight - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mds_recovers_planar_configurations(pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3..12)) {
        let n = pts.len();
        let d = DMatrix::from_fn(n, n, |i, j| ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt());
        // skip nearly collinear sets where the second axis is ill-defined
        let mds = classical_mds_2d(&d).unwrap();
        prop_assume!(!mds.degenerate);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (mds.points[i], mds.points[j]);
                let got = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                prop_assert!((got - d[(i, j)]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn supra_matches_hand_assembly() {
    let layers = vec![
        Layer::from_triples(3, &[(0, 1, 2.0), (1, 2, 3.0)]),
        Layer::from_triples(2, &[(0, 1, 4.0)]),
    ];
    let mut corr = hypmlnet::network::CorrespondenceMap::new();
    corr.insert(NodeRef::new(0, 0), NodeRef::new(1, 0));
    corr.insert(NodeRef::new(0, 2), NodeRef::new(1, 1));
    let mut inter = InterlayerEdges::new();
    inter.insert(NodeRef::new(0, 1), NodeRef::new(1, 1), 0.5);
    inter.insert(NodeRef::new(0, 2), NodeRef::new(1, 1), 0.25);
    let net = MultilayerNetwork::build(layers, Some(corr), inter).unwrap();
    let mu = 7.0;
    #[rustfmt::skip]
    let want = DMatrix::from_row_slice(5, 5, &[
        0.0, 2.0, 0.0, mu,  0.0,
        2.0, 0.0, 3.0, 0.0, 0.5,
        0.0, 3.0, 0.0, 0.0, 0.25,
        mu,  0.0, 0.0, 0.0, 4.0,
        0.0, 0.5, 0.25, 4.0, 0.0,
    ]);
    assert_eq!(
        build_supra(&net, mu, SupraOptions::default())
            .unwrap()
            .values(),
        &want
    );
    let additive = build_supra(
        &net,
        mu,
        SupraOptions {
            additive_coupling: true,
        },
    )
    .unwrap();
    assert_eq!(additive.values()[(2, 4)], mu + 0.25);
    assert_eq!(additive.values()[(1, 4)], 0.5);
}

#[test]
fn isomap_ring_and_path() {
    let ring = isomap_embed(&single_layer_supra(12, &cycle_edges(12)), false).unwrap();
    assert!(in_cyclic_order(&ring.points));
    // unit path: consecutive first coordinates are evenly spaced
    let path = isomap_embed(&single_layer_supra(6, &path_edges(6)), false).unwrap();
    let x: Vec<f64> = path.points.iter().map(|p| p[0]).collect();
    for w in x.windows(2) {
        assert!(((w[1] - w[0]).abs() - 1.0).abs() < 1e-9, "{x:?}");
    }
}

/// Intra- and cross-layer edge counts of a generated SBM agree with their
/// binomial expectations within three standard deviations.
#[test]
fn sbm_edge_counts_match_expectation() {
    let (n, c) = (150, 3);
    let (p_eq, p_neq, alpha) = (0.2, 0.05, 4.0);
    let com: Vec<usize> = (0..n).map(|k| community_of(k, n, c)).collect();
    let same_pairs = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| com[i] == com[j])
        .count() as f64;
    let all_pairs = (n * (n - 1) / 2) as f64;
    let intra_mean = same_pairs * p_eq + (all_pairs - same_pairs) * p_neq;
    let intra_var =
        same_pairs * p_eq * (1.0 - p_eq) + (all_pairs - same_pairs) * p_neq * (1.0 - p_neq);

    let same_ordered = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| com[i] == com[j])
        .count() as f64;
    let ordered = (n * n) as f64;
    let (q_eq, q_neq) = (p_eq / alpha, p_neq / alpha);
    let cross_mean = same_ordered * q_eq + (ordered - same_ordered) * q_neq;
    let cross_var =
        same_ordered * q_eq * (1.0 - q_eq) + (ordered - same_ordered) * q_neq * (1.0 - q_neq);

    for seed in 0..5 {
        let (net, labels) =
            generate_sbm(&SbmConfig::new(n, 2, c, p_eq, p_neq, alpha).with_seed(seed)).unwrap();
        assert_eq!(labels.layer(1), &com[..]);
        for layer in net.layers() {
            let m = layer.edges.len() as f64;
            assert!(
                (m - intra_mean).abs() <= 3.0 * intra_var.sqrt(),
                "seed {seed}: {m} vs {intra_mean}"
            );
        }
        let cross = net.interlayer().len() as f64;
        assert!(
            (cross - cross_mean).abs() <= 3.0 * cross_var.sqrt(),
            "seed {seed}: {cross} vs {cross_mean}"
        );
        assert_eq!(net.correspondences().between(0, 1).len(), n);
    }

    let mut none = SbmConfig::new(n, 2, c, p_eq, p_neq, alpha);
    none.cross_layer_pairs = CrossLayerPairs::None;
    assert!(generate_sbm(&none).unwrap().0.interlayer().is_empty());
}

#[test]
fn pdf_integrates_to_one() {
    use hypmlnet::hypgeo::{fit_gaussian, PoincarePoint};
    let pts: Vec<PoincarePoint> = [
        (0.3, 0.1),
        (0.35, 0.2),
        (0.25, 0.05),
        (0.4, 0.12),
        (0.28, 0.22),
        (0.33, 0.0),
    ]
    .iter()
    .map(|&(x, y)| PoincarePoint::new(x, y).unwrap())
    .collect();
    let g = fit_gaussian(&pts).unwrap();
    assert!((pdf_mass(&g, 8.0, 300) - 1.0).abs() < 1e-3);
}
