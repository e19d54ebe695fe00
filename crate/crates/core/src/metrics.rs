//! Alignment and community metrics on disk embeddings.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypgeo::poincare_distance;
use crate::network::MultilayerNetwork;
use crate::pipeline::{embed, PipelineConfig};
use crate::reduce::DiskEmbedding;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no corresponding node pairs are present in both embeddings")]
    EmptyCorrespondence,
    #[error("need at least {needed} grid points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("mu grid must be positive and strictly increasing")]
    InvalidGrid,
    #[error("network must have at least two layers")]
    SingleLayer,
    #[error("no grid point produced a score")]
    NoScores,
}

/// Mean hyperbolic displacement over corresponding nodes.
///
/// `pairs` maps node indices of `e1` to node indices of `e2`; pairs whose
/// nodes are missing from either embedding are skipped.
pub fn g_score(
    e1: &DiskEmbedding,
    e2: &DiskEmbedding,
    pairs: &[(usize, usize)],
) -> Result<f64, MetricsError> {
    let mut total = 0.0;
    let mut count = 0usize;
    for &(a, b) in pairs {
        if let (Some(x), Some(y)) = (e1.get(a), e2.get(b)) {
            total += poincare_distance(x.point, y.point);
            count += 1;
        }
    }
    if count == 0 {
        return Err(MetricsError::EmptyCorrespondence);
    }
    Ok(total / count as f64)
}

/// Identity pairs over the nodes present in both embeddings.
pub fn shared_nodes(e1: &DiskEmbedding, e2: &DiskEmbedding) -> Vec<(usize, usize)> {
    e1.nodes
        .iter()
        .filter(|n| e2.get(n.node).is_some())
        .map(|n| (n.node, n.node))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Rotation angle in `[0, 2π)`, applied after the optional reflection.
    pub angle: f64,
    /// Reflected across the x-axis before rotating.
    pub reflected: bool,
    pub score: f64,
    pub aligned: DiskEmbedding,
}

fn transform(e: &DiskEmbedding, angle: f64, reflected: bool) -> DiskEmbedding {
    e.map_points(|p| {
        let p = if reflected { p.reflect_x() } else { p };
        p.rotate(angle)
    })
}

const COARSE_STEPS: usize = 360;

/// Rotation (and optional reflection) of `moving` that minimises its g-score
/// against `fixed`: a 1° scan for each reflection case followed by
/// golden-section refinement around the best scanned angle.
pub fn rotational_align(
    fixed: &DiskEmbedding,
    moving: &DiskEmbedding,
    pairs: &[(usize, usize)],
) -> Result<Alignment, MetricsError> {
    let score_at = |angle: f64, refl: bool| g_score(fixed, &transform(moving, angle, refl), pairs);
    score_at(0.0, false)?;
    let step = std::f64::consts::TAU / COARSE_STEPS as f64;
    let mut best: Option<(f64, bool, f64)> = None;
    for refl in [false, true] {
        let scan: Vec<(f64, f64)> = (0..COARSE_STEPS)
            .map(|k| {
                let a = k as f64 * step;
                (a, score_at(a, refl).expect("pairs checked"))
            })
            .collect();
        let &(a0, s0) = scan
            .iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty scan");
        let (a, s) = golden_section(
            |a| score_at(a, refl).expect("pairs checked"),
            a0 - step,
            a0 + step,
        );
        let (a, s) = if s < s0 { (a, s) } else { (a0, s0) };
        if best.is_none_or(|(_, _, bs)| s < bs) {
            best = Some((a, refl, s));
        }
    }
    let (angle, reflected, score) = best.expect("two cases scanned");
    let angle = angle.rem_euclid(std::f64::consts::TAU);
    Ok(Alignment {
        angle,
        reflected,
        score,
        aligned: transform(moving, angle, reflected),
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSweepCurve {
    pub mu_grid: Vec<f64>,
    /// Score per grid point; `None` where the pipeline failed.
    pub scores: Vec<Option<f64>>,
    /// Pipeline error message per failed grid point.
    pub failures: Vec<(usize, String)>,
    pub mu_star: f64,
    pub plateau: f64,
}

/// Mean g-score over all layer pairs of an embedding, using the network's
/// correspondences.
pub fn mean_pairwise_g_score(
    layers: &[DiskEmbedding],
    network: &MultilayerNetwork,
) -> Result<f64, MetricsError> {
    let mut scores = Vec::new();
    for a in 0..layers.len() {
        for b in a + 1..layers.len() {
            let pairs = network.correspondences().between(a, b);
            scores.push(g_score(&layers[a], &layers[b], &pairs)?);
        }
    }
    if scores.is_empty() {
        return Err(MetricsError::SingleLayer);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Embeds `network` at every coupling in `mu_grid` and scores layer alignment.
pub fn mu_sweep(
    network: &MultilayerNetwork,
    mu_grid: &[f64],
    config: &PipelineConfig,
    rel_tol: f64,
) -> Result<MuSweepCurve, MetricsError> {
    if network.layer_count() < 2 {
        return Err(MetricsError::SingleLayer);
    }
    if mu_grid.is_empty()
        || mu_grid.iter().any(|&m| !(m.is_finite() && m > 0.0))
        || mu_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(MetricsError::InvalidGrid);
    }
    let results: Vec<Result<f64, String>> = mu_grid
        .par_iter()
        .map(|&mu| {
            let cfg = PipelineConfig {
                mu,
                ..config.clone()
            };
            let emb = embed(network, &cfg).map_err(|e| e.to_string())?;
            mean_pairwise_g_score(&emb.layers, network).map_err(|e| e.to_string())
        })
        .collect();
    let mut scores = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => scores.push(Some(s)),
            Err(e) => {
                log::warn!("mu = {}: {e}", mu_grid[i]);
                failures.push((i, e));
                scores.push(None);
            }
        }
    }
    let valid: Vec<(f64, f64)> = mu_grid
        .iter()
        .zip(&scores)
        .filter_map(|(&m, s)| s.map(|s| (m, s)))
        .collect();
    if valid.is_empty() {
        return Err(MetricsError::NoScores);
    }
    let (grid, vals): (Vec<f64>, Vec<f64>) = valid.into_iter().unzip();
    let (mu_star, plateau) = mu_star_unchecked(&grid, &vals, rel_tol);
    Ok(MuSweepCurve {
        mu_grid: mu_grid.to_vec(),
        scores,
        failures,
        mu_star,
        plateau,
    })
}

/// Plateau = mean score over the top quartile of the grid; `mu*` = smallest
/// grid value whose score is within `rel_tol` of the plateau.
pub fn estimate_mu_star(
    grid: &[f64],
    scores: &[f64],
    rel_tol: f64,
) -> Result<(f64, f64), MetricsError> {
    if grid.len() < 4 || scores.len() != grid.len() {
        return Err(MetricsError::TooFewPoints {
            needed: 4,
            got: grid.len().min(scores.len()),
        });
    }
    Ok(mu_star_unchecked(grid, scores, rel_tol))
}

fn mu_star_unchecked(grid: &[f64], scores: &[f64], rel_tol: f64) -> (f64, f64) {
    let n = grid.len();
    let top = n.div_ceil(4).max(1);
    let plateau = scores[n - top..].iter().sum::<f64>() / top as f64;
    let threshold = plateau * (1.0 + rel_tol);
    let mu_star = grid
        .iter()
        .zip(scores)
        .find(|(_, &s)| s <= threshold)
        .map(|(&m, _)| m)
        .unwrap_or(grid[n - 1]);
    (mu_star, plateau)
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Clusters node angles on the circle with k-means (chordal distance,
/// `restarts` seeded k-means++ runs) and returns the NMI against `labels`.
///
/// `labels[node]` gives the ground-truth community of each embedded node.
pub fn angular_community_score(
    embedding: &DiskEmbedding,
    labels: &[usize],
    communities: usize,
    seed: u64,
) -> f64 {
    let points: Vec<[f64; 2]> = embedding
        .nodes
        .iter()
        .map(|n| [n.theta.cos(), n.theta.sin()])
        .collect();
    let truth: Vec<usize> = embedding.nodes.iter().map(|n| labels[n.node]).collect();
    let clusters = kmeans(&points, communities, 50, seed);
    normalized_mutual_information(&truth, &clusters)
}

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Lloyd's k-means with k-means++ seeding; best of `restarts` by inertia.
pub fn kmeans(points: &[[f64; 2]], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    if n == 0 || k == 0 {
        return vec![0; n];
    }
    let k = k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let mut centers = vec![points[rng.gen_range(0..n)]];
        while centers.len() < k {
            let d: Vec<f64> = points
                .iter()
                .map(|&p| {
                    centers
                        .iter()
                        .map(|&c| sq_dist(p, c))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let total: f64 = d.iter().sum();
            let next = if total <= 0.0 {
                rng.gen_range(0..n)
            } else {
                let mut t = rng.gen::<f64>() * total;
                let mut idx = n - 1;
                for (i, &di) in d.iter().enumerate() {
                    if t < di {
                        idx = i;
                        break;
                    }
                    t -= di;
                }
                idx
            };
            centers.push(points[next]);
        }
        let mut assign = vec![0usize; n];
        for _ in 0..100 {
            let mut changed = false;
            for (i, &p) in points.iter().enumerate() {
                let c = (0..k)
                    .min_by(|&a, &b| sq_dist(p, centers[a]).total_cmp(&sq_dist(p, centers[b])))
                    .expect("k > 0");
                if c != assign[i] {
                    assign[i] = c;
                    changed = true;
                }
            }
            let mut sums = vec![[0.0f64; 2]; k];
            let mut counts = vec![0usize; k];
            for (i, &p) in points.iter().enumerate() {
                sums[assign[i]][0] += p[0];
                sums[assign[i]][1] += p[1];
                counts[assign[i]] += 1;
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centers[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = points
            .iter()
            .zip(&assign)
            .map(|(&p, &c)| sq_dist(p, centers[c]))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b - 1e-12) {
            best = Some((inertia, assign));
        }
    }
    best.map(|(_, a)| a).unwrap_or_default()
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI with natural-log mutual information normalised by the arithmetic mean
/// of the two entropies. Two single-cluster labelings score 1.
pub fn normalized_mutual_information(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must have equal length");
    let n = a.len() as f64;
    if a.is_empty() {
        return 1.0;
    }
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ca: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cb: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    let mut mi = 0.0;
    for (&(x, y), &c) in &joint {
        let pxy = c as f64 / n;
        let px = ca[&x] as f64 / n;
        let py = cb[&y] as f64 / n;
        mi += pxy * (pxy / (px * py)).ln();
    }
    let denom = 0.5 * (ha + hb);
    if denom <= 0.0 {
        return if ha == hb { 1.0 } else { 0.0 };
    }
    (mi / denom).clamp(0.0, 1.0)
}
