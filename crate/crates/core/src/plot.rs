//! SVG rendering of disk embeddings.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{SymmetricEigen, Vector2};

use crate::hypgeo::{exp_map, HyperbolicGaussian, PoincarePoint};
use crate::io::{write_text, IoError};
use crate::reduce::DiskEmbedding;
use crate::sbm::CommunityLabels;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const SIZE_PX: u32 = 640;
const MARKER_RADIUS: f64 = 0.012;
const ELLIPSE_SAMPLES: usize = 96;

pub fn color(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

fn fmt(v: f64) -> String {
    // fixed precision keeps output byte-stable; "-0.000000" is normalised
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Closed boundary of the `k`-sigma level set of `g`, traced in the tangent
/// plane and mapped onto the disk.
pub fn ellipse_points(g: &HyperbolicGaussian, k: f64) -> Vec<PoincarePoint> {
    let eig = SymmetricEigen::new(g.covariance);
    let axes: Vec<Vector2<f64>> = (0..2)
        .map(|i| eig.eigenvectors.column(i) * eig.eigenvalues[i].max(0.0).sqrt())
        .collect();
    (0..ELLIPSE_SAMPLES)
        .map(|s| {
            let t = std::f64::consts::TAU * s as f64 / ELLIPSE_SAMPLES as f64;
            let v = (axes[0] * t.cos() + axes[1] * t.sin()) * k;
            exp_map(g.barycenter, v)
        })
        .collect()
}

/// Renders embeddings as an SVG document. Markers are coloured by community
/// when `labels` covers the node, by layer otherwise; each Gaussian adds its
/// 1σ and 2σ level curves.
pub fn render_disk(
    embeddings: &[DiskEmbedding],
    labels: Option<&CommunityLabels>,
    gaussians: &[HyperbolicGaussian],
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE_PX}" height="{SIZE_PX}" viewBox="-1.05 -1.05 2.1 2.1">"#
    );
    let _ = writeln!(
        s,
        r#"<circle class="disk" cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.004"/>"#
    );
    for e in embeddings {
        for n in &e.nodes {
            let c = labels
                .and_then(|l| l.labels.get(e.layer)?.get(n.node).copied())
                .unwrap_or(e.layer);
            // SVG y grows downwards
            let _ = writeln!(
                s,
                r#"<circle class="node" data-layer="{}" data-node="{}" cx="{}" cy="{}" r="{MARKER_RADIUS}" fill="{}"/>"#,
                e.layer,
                n.node,
                fmt(n.point.x()),
                fmt(-n.point.y()),
                color(c)
            );
        }
    }
    for (i, g) in gaussians.iter().enumerate() {
        for k in [1u32, 2] {
            let pts = ellipse_points(g, k as f64);
            let mut d = String::new();
            for (j, p) in pts.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{} {} ",
                    if j == 0 { "M" } else { "L" },
                    fmt(p.x()),
                    fmt(-p.y())
                );
            }
            d.push('Z');
            let _ = writeln!(
                s,
                r#"<path class="gaussian sigma{k}" data-gaussian="{i}" d="{d}" fill="none" stroke="black" stroke-width="0.004"{}/>"#,
                if k == 2 {
                    r#" stroke-dasharray="0.02 0.01""#
                } else {
                    ""
                }
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn plot_disk(
    embeddings: &[DiskEmbedding],
    labels: Option<&CommunityLabels>,
    gaussians: &[HyperbolicGaussian],
    path: &Path,
) -> Result<(), IoError> {
    write_text(path, &render_disk(embeddings, labels, gaussians))
}
