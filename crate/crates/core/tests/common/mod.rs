#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use hypmlnet::hypgeo::{exp_map, gaussian_pdf, HyperbolicGaussian};
use hypmlnet::network::{Layer, MultilayerNetwork};
use hypmlnet::supra::{build_supra, SupraMatrix, SupraOptions};
use nalgebra::Vector2;

pub fn single_layer_supra(n: usize, edges: &[(usize, usize, f64)]) -> SupraMatrix {
    let net = MultilayerNetwork::from_layers(vec![Layer::from_triples(n, edges)]).unwrap();
    build_supra(&net, 1.0, SupraOptions::default()).unwrap()
}

pub fn path_edges(n: usize) -> Vec<(usize, usize, f64)> {
    (0..n - 1).map(|i| (i, i + 1, 1.0)).collect()
}

pub fn cycle_edges(n: usize) -> Vec<(usize, usize, f64)> {
    (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect()
}

/// True when the points, sorted by angle about their centroid, visit the
/// indices in cyclic order (either direction).
pub fn in_cyclic_order(points: &[[f64; 2]]) -> bool {
    let n = points.len();
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let ta = (points[a][1] - cy).atan2(points[a][0] - cx);
        let tb = (points[b][1] - cy).atan2(points[b][0] - cx);
        ta.total_cmp(&tb)
    });
    let start = idx.iter().position(|&i| i == 0).unwrap();
    let rotated: Vec<usize> = (0..n).map(|k| idx[(start + k) % n]).collect();
    let forward = (0..n).all(|k| rotated[k] == k);
    let backward = (0..n).all(|k| rotated[k] == (n - k) % n);
    forward || backward
}

/// Integral of the density over the tangent plane at the barycenter, by the
/// midpoint rule in whitened coordinates over `[-half, half]^2`.
pub fn pdf_mass(g: &HyperbolicGaussian, half: f64, steps: usize) -> f64 {
    let l = g.covariance.cholesky().expect("positive definite").l();
    let h = 2.0 * half / steps as f64;
    let jac = l.determinant() * h * h;
    let mut total = 0.0;
    for i in 0..steps {
        for j in 0..steps {
            let u = Vector2::new(-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h);
            let x = exp_map(g.barycenter, l * u);
            total += gaussian_pdf(g, x).unwrap();
        }
    }
    total * jac
}

pub fn run_cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypmlnet"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}
