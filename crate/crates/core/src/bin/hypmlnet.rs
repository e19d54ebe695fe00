use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hypmlnet::config::{AppConfig, ConfigError};
use hypmlnet::hypgeo::{fit_gaussian, gaussian_pdf, HyperbolicGaussian, PoincarePoint};
use hypmlnet::io::{self, EmbeddingFormat, IoError};
use hypmlnet::metrics::{
    angular_community_score, g_score, mu_sweep, rotational_align, shared_nodes,
};
use hypmlnet::network::MultilayerNetwork;
use hypmlnet::pipeline::{embed, embed_independently, PipelineConfig};
use hypmlnet::plot::plot_disk;
use hypmlnet::preweight::{DegreeKind, PreweightMode};
use hypmlnet::reduce::{DiskEmbedding, Reducer};
use hypmlnet::sbm::{generate_sbm, CrossLayerPairs, SbmConfig};

/// Hyperbolic embedding of multilayer networks in the Poincaré disk.
#[derive(Debug, Parser)]
#[command(name = "hypmlnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed a multilayer network and write per-layer disk coordinates.
    Embed(EmbedArgs),
    /// Generate a multilayer stochastic block model and write its files.
    Sbm(SbmArgs),
    /// Sweep the coupling strength and report the alignment curve and mu*.
    SweepMu(SweepArgs),
    /// Mean hyperbolic displacement between two embeddings.
    Gscore(GscoreArgs),
    /// Fit tangent-space Gaussians to groups of embedded nodes.
    Gaussian(GaussianArgs),
    /// Rotate (and optionally reflect) one embedding onto another.
    Align(AlignArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON configuration file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random choice made by the command.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct NetworkArgs {
    /// Edge-list file of one layer (`u v [w]` per line); repeat once per layer, in order.
    #[arg(long = "layer", required = true)]
    layers: Vec<PathBuf>,
    /// Correspondence file (`L<a>:<node> L<b>:<node>` per line).
    #[arg(long)]
    correspondences: Option<PathBuf>,
    /// Inter-layer edge file (`L<a>:<node> L<b>:<node> [w]` per line).
    #[arg(long)]
    interlayer: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Edge pre-weighting: ra, ebc or none.
    #[arg(long)]
    preweight: Option<PreweightMode>,
    /// Degree used by the ra rule: binary or weighted.
    #[arg(long)]
    ra_degree: Option<DegreeKind>,
    /// Coupling strength placed on correspondence entries.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Radius scale (default: mean layer-local weighted degree).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Dimensionality reduction: isomap or laplacian_eigenmaps.
    #[arg(long)]
    reducer: Option<Reducer>,
    /// Treat weights as similarities (edge length 1/w).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    invert_weights: Option<bool>,
    /// Embed only the largest connected component of the supra graph.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    largest_component: Option<bool>,
    /// Add mu to explicit inter-layer edge weights instead of overriding it.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    additive_coupling: Option<bool>,
    /// Radii are clamped to 1 - epsilon.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
}

impl PipelineArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        if let Some(v) = self.preweight {
            c.preweight = v;
        }
        if let Some(v) = self.ra_degree {
            c.ra_degree = v;
        }
        if let Some(v) = self.mu {
            c.mu = v;
        }
        if let Some(v) = self.beta {
            c.beta = Some(v);
        }
        if let Some(v) = self.reducer {
            c.reducer = v;
        }
        if let Some(v) = self.invert_weights {
            c.invert_weights = v;
        }
        if let Some(v) = self.largest_component {
            c.largest_component = v;
        }
        if let Some(v) = self.additive_coupling {
            c.additive_coupling = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
    }
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    network: NetworkArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Embed each layer on its own instead of jointly.
    #[arg(long)]
    independent: bool,
    /// Output embedding file (.csv or .json).
    #[arg(long)]
    out: PathBuf,
    /// Output format; inferred from the extension of --out when omitted.
    #[arg(long)]
    format: Option<EmbeddingFormat>,
    /// Also write an SVG plot of the disk.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Community labels (`layer,node,community` CSV) used to colour the plot
    /// and to report per-layer angular community scores.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SbmArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Nodes per layer.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    communities: Option<usize>,
    /// Within-community edge probability.
    #[arg(long, allow_hyphen_values = true)]
    p_eq: Option<f64>,
    /// Between-community edge probability.
    #[arg(long, allow_hyphen_values = true)]
    p_neq: Option<f64>,
    /// Cross-layer probabilities are divided by alpha.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Cross-layer node pairs that may receive edges: all or none.
    #[arg(long)]
    cross_layer_pairs: Option<CrossLayerPairs>,
    /// Output directory for layer, correspondence, inter-layer and label files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    network: NetworkArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Explicit comma-separated coupling grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Option<Vec<f64>>,
    /// Generated grid starts at this multiple of the mean edge weight.
    #[arg(long, allow_hyphen_values = true)]
    lo_factor: Option<f64>,
    /// Generated grid ends at this multiple of the mean edge weight.
    #[arg(long, allow_hyphen_values = true)]
    hi_factor: Option<f64>,
    /// Number of generated grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Relative tolerance for locating mu* on the plateau.
    #[arg(long, allow_hyphen_values = true)]
    rel_tol: Option<f64>,
    /// Output curve CSV (`mu,score`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// First (fixed) embedding file.
    #[arg(long)]
    first: PathBuf,
    /// Second (moving) embedding file.
    #[arg(long)]
    second: PathBuf,
    /// Layer to take from the first file (default: its first layer).
    #[arg(long)]
    first_layer: Option<usize>,
    /// Layer to take from the second file (default: its first layer).
    #[arg(long)]
    second_layer: Option<usize>,
    /// Node correspondences, written `L0:<node> L1:<node>` with L0 the first
    /// file and L1 the second; default pairs equal node indices.
    #[arg(long)]
    correspondences: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GscoreArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    pair: PairArgs,
}

#[derive(Debug, Args)]
struct GaussianArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Embedding file (.csv or .json).
    #[arg(long)]
    embedding: PathBuf,
    /// Node groups (`<group> <layer> <node>` per line).
    #[arg(long)]
    groups: PathBuf,
    /// Output JSON with the fitted parameters.
    #[arg(long)]
    out: PathBuf,
    /// Also write the density of each group on a square grid over the disk (CSV).
    #[arg(long)]
    pdf_grid: Option<PathBuf>,
    /// Grid points per axis for --pdf-grid.
    #[arg(long, default_value_t = 41)]
    grid_size: usize,
    /// Also write an SVG plot with the 1σ and 2σ level curves.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    pair: PairArgs,
    /// Output file for the aligned second embedding (.csv or .json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Io(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(e) => e.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn load_config(common: &CommonArgs) -> Result<AppConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => AppConfig::load(p)?,
        None => AppConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.pipeline.seed = seed;
        if let Some(s) = cfg.sbm.as_mut() {
            s.seed = seed;
        }
    }
    Ok(cfg)
}

fn load_network(args: &NetworkArgs) -> Result<MultilayerNetwork, CliError> {
    Ok(io::load_network(
        &args.layers,
        args.correspondences.as_deref(),
        args.interlayer.as_deref(),
    )?)
}

fn out_format(path: &Path, explicit: Option<EmbeddingFormat>) -> EmbeddingFormat {
    explicit.unwrap_or_else(|| EmbeddingFormat::from_path(path))
}

fn run_embed(args: EmbedArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common)?;
    args.pipeline.apply(&mut cfg.pipeline);
    cfg.pipeline.validate().map_err(invalid)?;
    let network = load_network(&args.network)?;
    let layers = if args.independent {
        embed_independently(&network, &cfg.pipeline).map_err(invalid)?
    } else {
        embed(&network, &cfg.pipeline).map_err(invalid)?.layers
    };
    io::export_embedding(&layers, &args.out, out_format(&args.out, args.format))?;
    let labels = match &args.labels {
        Some(p) => Some(io::parse_labels(&io::read_text(p)?, p)?),
        None => None,
    };
    if let Some(labels) = &labels {
        for e in &layers {
            let layer_labels = labels
                .labels
                .get(e.layer)
                .filter(|l| {
                    e.nodes
                        .iter()
                        .all(|n| l.get(n.node).is_some_and(|&c| c != usize::MAX))
                })
                .ok_or_else(|| {
                    invalid(format!(
                        "labels do not cover every node of layer {}",
                        e.layer
                    ))
                })?;
            let k = layer_labels
                .iter()
                .filter(|&&c| c != usize::MAX)
                .max()
                .map_or(1, |&m| m + 1);
            let nmi = angular_community_score(e, layer_labels, k, cfg.pipeline.seed);
            println!("layer {} community_nmi {nmi}", e.layer);
        }
    }
    if let Some(p) = &args.plot {
        plot_disk(&layers, labels.as_ref(), &[], p)?;
    }
    Ok(())
}

fn need<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| {
        invalid(format!(
            "--{name} is required when the config has no sbm section"
        ))
    })
}

fn run_sbm(args: SbmArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let base = cfg.sbm.clone();
    let mut sbm = match base {
        Some(s) => s,
        None => SbmConfig::new(
            need(args.n, "n")?,
            need(args.layers, "layers")?,
            need(args.communities, "communities")?,
            need(args.p_eq, "p-eq")?,
            need(args.p_neq, "p-neq")?,
            need(args.alpha, "alpha")?,
        ),
    };
    if let Some(v) = args.n {
        sbm.n = v;
    }
    if let Some(v) = args.layers {
        sbm.layers = v;
    }
    if let Some(v) = args.communities {
        sbm.communities = v;
    }
    if let Some(v) = args.p_eq {
        sbm.p_eq = v;
    }
    if let Some(v) = args.p_neq {
        sbm.p_neq = v;
    }
    if let Some(v) = args.alpha {
        sbm.alpha = v;
    }
    if let Some(v) = args.cross_layer_pairs {
        sbm.cross_layer_pairs = v;
    }
    if let Some(seed) = args.common.seed {
        sbm.seed = seed;
    }
    let (network, labels) = generate_sbm(&sbm).map_err(invalid)?;
    io::write_network(&network, &args.out_dir)?;
    io::write_text(
        &args.out_dir.join("labels.csv"),
        &io::format_labels(&labels),
    )?;
    println!(
        "layers {} nodes_per_layer {} edges {}",
        network.layer_count(),
        sbm.n,
        network.edge_count()
    );
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common)?;
    args.pipeline.apply(&mut cfg.pipeline);
    if let Some(g) = args.grid {
        cfg.sweep.grid = Some(g);
    }
    if let Some(v) = args.lo_factor {
        cfg.sweep.lo_factor = v;
    }
    if let Some(v) = args.hi_factor {
        cfg.sweep.hi_factor = v;
    }
    if let Some(v) = args.points {
        cfg.sweep.points = v;
    }
    if let Some(v) = args.rel_tol {
        cfg.sweep.rel_tol = v;
    }
    cfg.pipeline.validate().map_err(invalid)?;
    cfg.sweep.validate()?;
    let network = load_network(&args.network)?;
    let grid = cfg.sweep.grid_for(&network, &cfg.pipeline);
    let curve = mu_sweep(&network, &grid, &cfg.pipeline, cfg.sweep.rel_tol).map_err(invalid)?;
    let mut csv = String::from("mu,score\n");
    for (mu, s) in curve.mu_grid.iter().zip(&curve.scores) {
        match s {
            Some(s) => writeln!(csv, "{mu},{s}"),
            None => writeln!(csv, "{mu},"),
        }
        .expect("string write");
    }
    io::write_text(&args.out, &csv)?;
    println!("mu_star {}", curve.mu_star);
    println!("plateau {}", curve.plateau);
    if !curve.failures.is_empty() {
        println!("failed_points {}", curve.failures.len());
    }
    Ok(())
}

fn pick_layer(
    embeddings: Vec<DiskEmbedding>,
    layer: Option<usize>,
    path: &Path,
) -> Result<DiskEmbedding, CliError> {
    let found = match layer {
        Some(l) => embeddings.into_iter().find(|e| e.layer == l),
        None => embeddings.into_iter().next(),
    };
    found.ok_or_else(|| match layer {
        Some(l) => invalid(format!("{}: no layer {l}", path.display())),
        None => invalid(format!("{}: no layers", path.display())),
    })
}

type EmbeddingPair = (DiskEmbedding, DiskEmbedding, Vec<(usize, usize)>);

fn load_pair(args: &PairArgs) -> Result<EmbeddingPair, CliError> {
    let a = pick_layer(
        io::load_embedding(&args.first)?,
        args.first_layer,
        &args.first,
    )?;
    let b = pick_layer(
        io::load_embedding(&args.second)?,
        args.second_layer,
        &args.second,
    )?;
    let pairs = match &args.correspondences {
        Some(p) => {
            let map = io::parse_correspondences(&io::read_text(p)?, p)?;
            if map.iter().any(|(&k, _)| k != (0, 1)) {
                return Err(invalid(format!(
                    "{}: only L0 (first file) and L1 (second file) may appear",
                    p.display()
                )));
            }
            map.between(0, 1)
        }
        None => shared_nodes(&a, &b),
    };
    Ok((a, b, pairs))
}

fn run_gscore(args: GscoreArgs) -> Result<(), CliError> {
    load_config(&args.common)?;
    let (a, b, pairs) = load_pair(&args.pair)?;
    let s = g_score(&a, &b, &pairs).map_err(invalid)?;
    println!("g_score {s}");
    Ok(())
}

fn run_align(args: AlignArgs) -> Result<(), CliError> {
    load_config(&args.common)?;
    let (a, b, pairs) = load_pair(&args.pair)?;
    let al = rotational_align(&a, &b, &pairs).map_err(invalid)?;
    io::export_embedding(
        &[al.aligned],
        &args.out,
        EmbeddingFormat::from_path(&args.out),
    )?;
    println!("angle {}", al.angle);
    println!("reflected {}", al.reflected);
    println!("g_score {}", al.score);
    Ok(())
}

#[derive(Serialize)]
struct GaussianReport {
    group: String,
    count: usize,
    barycenter: [f64; 2],
    covariance: [[f64; 2]; 2],
    determinant: f64,
    singular: bool,
}

#[derive(Serialize)]
struct GaussianOutput {
    gaussians: Vec<GaussianReport>,
}

fn run_gaussian(args: GaussianArgs) -> Result<(), CliError> {
    load_config(&args.common)?;
    let embeddings = io::load_embedding(&args.embedding)?;
    let by_layer: BTreeMap<usize, &DiskEmbedding> =
        embeddings.iter().map(|e| (e.layer, e)).collect();
    let groups = io::parse_groups(&io::read_text(&args.groups)?, &args.groups)?;
    let mut fitted: Vec<(String, HyperbolicGaussian)> = Vec::new();
    for (name, members) in &groups {
        let points = members
            .iter()
            .map(|m| {
                by_layer
                    .get(&m.layer)
                    .and_then(|e| e.get(m.node))
                    .map(|n| n.point)
                    .ok_or_else(|| {
                        invalid(format!(
                            "group {name}: L{}:{} is not embedded",
                            m.layer, m.node
                        ))
                    })
            })
            .collect::<Result<Vec<PoincarePoint>, _>>()?;
        let g = fit_gaussian(&points).map_err(|e| invalid(format!("group {name}: {e}")))?;
        fitted.push((name.clone(), g));
    }
    let out = GaussianOutput {
        gaussians: fitted
            .iter()
            .map(|(name, g)| GaussianReport {
                group: name.clone(),
                count: groups[name].len(),
                barycenter: [g.barycenter.x(), g.barycenter.y()],
                covariance: [
                    [g.covariance[(0, 0)], g.covariance[(0, 1)]],
                    [g.covariance[(1, 0)], g.covariance[(1, 1)]],
                ],
                determinant: g.determinant(),
                singular: g.is_singular(),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&out).expect("serialisable");
    json.push('\n');
    io::write_text(&args.out, &json)?;
    if let Some(p) = &args.pdf_grid {
        if args.grid_size < 2 {
            return Err(invalid("--grid-size must be at least 2"));
        }
        let mut csv = String::from("group,x,y,pdf\n");
        for (name, g) in &fitted {
            if g.is_singular() {
                log::warn!("group {name}: singular covariance, density skipped");
                continue;
            }
            let m = args.grid_size;
            for i in 0..m {
                for j in 0..m {
                    let x = -1.0 + 2.0 * i as f64 / (m - 1) as f64;
                    let y = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
                    if let Ok(pt) = PoincarePoint::new(x, y) {
                        let d = gaussian_pdf(g, pt).map_err(invalid)?;
                        writeln!(csv, "{name},{x},{y},{d}").expect("string write");
                    }
                }
            }
        }
        io::write_text(p, &csv)?;
    }
    if let Some(p) = &args.plot {
        let gs: Vec<HyperbolicGaussian> = fitted.iter().map(|(_, g)| *g).collect();
        plot_disk(&embeddings, None, &gs, p)?;
    }
    for (name, g) in &fitted {
        println!("{name} det {}", g.determinant());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Embed(a) => run_embed(a),
        Command::Sbm(a) => run_sbm(a),
        Command::SweepMu(a) => run_sweep(a),
        Command::Gscore(a) => run_gscore(a),
        Command::Gaussian(a) => run_gaussian(a),
        Command::Align(a) => run_align(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
