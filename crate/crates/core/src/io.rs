//! Text file formats.
//!
//! * Edge lists: one `u v [w]` per line, whitespace separated, 0-based, `#`
//!   starts a comment. A `# nodes: N` line fixes the node count (otherwise
//!   it is one more than the largest index). Missing weights default to 1.
//! * Correspondences: `L<a>:<node> L<b>:<node>` per line.
//! * Inter-layer edges: `L<a>:<node> L<b>:<node> [w]` per line.
//! * Embeddings: CSV with columns `layer,node,theta,r,x,y`, or JSON (see
//!   `docs/embedding.schema.json`); rows are ordered by (layer, node).
//! * Labels: CSV with columns `layer,node,community`.
//! * Node groups: `<group> <layer> <node>` per line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypgeo::PoincarePoint;
use crate::network::{
    CorrespondenceMap, Edge, InterlayerEdges, Layer, MultilayerNetwork, NetworkError, NodeRef,
};
use crate::reduce::{DiskEmbedding, DiskNode};
use crate::sbm::CommunityLabels;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("invalid network: {0}")]
    Validation(#[from] NetworkError),
}

impl IoError {
    /// True for failures of the filesystem itself (as opposed to bad content).
    pub fn is_io(&self) -> bool {
        matches!(self, IoError::Io { .. })
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-comment lines as `(1-based line number, tokens)`.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn node_count_directive(text: &str) -> Option<Result<(usize, usize), String>> {
    text.lines().enumerate().find_map(|(i, line)| {
        let rest = line.trim().strip_prefix('#')?.trim();
        let value = rest.strip_prefix("nodes:")?.trim();
        Some(
            value
                .parse::<usize>()
                .map(|n| (i + 1, n))
                .map_err(|_| format!("line {}: invalid node count `{value}`", i + 1)),
        )
    })
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<Layer, IoError> {
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut edges = Vec::new();
    let mut max_index = None::<usize>;
    for (line, tokens) in data_lines(text) {
        if !(2..=3).contains(&tokens.len()) {
            return Err(parse_err(
                line,
                format!("expected `u v [w]`, got {} fields", tokens.len()),
            ));
        }
        let idx = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| parse_err(line, format!("invalid node index `{t}`")))
        };
        let u = idx(tokens[0])?;
        let v = idx(tokens[1])?;
        let w = match tokens.get(2) {
            Some(t) => t
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("invalid weight `{t}`")))?,
            None => 1.0,
        };
        max_index = Some(max_index.unwrap_or(0).max(u).max(v));
        edges.push(Edge::new(u, v, w));
    }
    let node_count = match node_count_directive(text) {
        Some(Ok((_, n))) => n,
        Some(Err(message)) => {
            return Err(IoError::Format {
                path: path.to_path_buf(),
                message,
            })
        }
        None => max_index.map_or(0, |m| m + 1),
    };
    Ok(Layer::new(node_count, edges))
}

fn parse_node_ref(token: &str, line: usize, path: &Path) -> Result<NodeRef, IoError> {
    let err = || IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("expected `L<layer>:<node>`, got `{token}`"),
    };
    let rest = token.strip_prefix('L').ok_or_else(err)?;
    let (l, n) = rest.split_once(':').ok_or_else(err)?;
    Ok(NodeRef::new(
        l.parse().map_err(|_| err())?,
        n.parse().map_err(|_| err())?,
    ))
}

pub fn parse_correspondences(text: &str, path: &Path) -> Result<CorrespondenceMap, IoError> {
    let mut map = CorrespondenceMap::new();
    for (line, tokens) in data_lines(text) {
        if tokens.len() != 2 {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: "expected `L<a>:<node> L<b>:<node>`".into(),
            });
        }
        let a = parse_node_ref(tokens[0], line, path)?;
        let b = parse_node_ref(tokens[1], line, path)?;
        map.insert(a, b);
    }
    Ok(map)
}

pub fn parse_interlayer(text: &str, path: &Path) -> Result<InterlayerEdges, IoError> {
    let mut edges = InterlayerEdges::new();
    for (line, tokens) in data_lines(text) {
        if !(2..=3).contains(&tokens.len()) {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: "expected `L<a>:<node> L<b>:<node> [w]`".into(),
            });
        }
        let a = parse_node_ref(tokens[0], line, path)?;
        let b = parse_node_ref(tokens[1], line, path)?;
        let w = match tokens.get(2) {
            Some(t) => t.parse::<f64>().map_err(|_| IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("invalid weight `{t}`"),
            })?,
            None => 1.0,
        };
        edges.insert(a, b, w);
    }
    Ok(edges)
}

/// Reads one edge-list file per layer plus optional correspondence and
/// inter-layer edge files.
pub fn load_network(
    layer_paths: &[PathBuf],
    correspondences: Option<&Path>,
    interlayer: Option<&Path>,
) -> Result<MultilayerNetwork, IoError> {
    let layers = layer_paths
        .iter()
        .map(|p| parse_edge_list(&read_text(p)?, p))
        .collect::<Result<Vec<_>, _>>()?;
    let corr = correspondences
        .map(|p| parse_correspondences(&read_text(p)?, p))
        .transpose()?;
    let inter = interlayer
        .map(|p| parse_interlayer(&read_text(p)?, p))
        .transpose()?
        .unwrap_or_default();
    Ok(MultilayerNetwork::build(layers, corr, inter)?)
}

pub fn format_edge_list(layer: &Layer) -> String {
    let mut out = format!("# nodes: {}\n", layer.node_count);
    for e in &layer.edges {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, e.weight));
    }
    out
}

pub fn format_correspondences(map: &CorrespondenceMap) -> String {
    let mut out = String::new();
    for (&(a, b), pairs) in map.iter() {
        for &(x, y) in pairs {
            out.push_str(&format!("L{a}:{x} L{b}:{y}\n"));
        }
    }
    out
}

pub fn format_interlayer(edges: &InterlayerEdges) -> String {
    let mut out = String::new();
    for e in edges.iter() {
        out.push_str(&format!(
            "L{}:{} L{}:{} {}\n",
            e.a.layer, e.a.node, e.b.layer, e.b.node, e.weight
        ));
    }
    out
}

/// File names written by [`write_network`].
pub fn network_file_names(layers: usize) -> (Vec<String>, String, String) {
    (
        (0..layers).map(|l| format!("layer_{l}.edges")).collect(),
        "correspondences.txt".into(),
        "interlayer.edges".into(),
    )
}

/// Writes a network as `layer_<l>.edges`, `correspondences.txt` and
/// `interlayer.edges` inside `dir`.
pub fn write_network(network: &MultilayerNetwork, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let (layer_names, corr, inter) = network_file_names(network.layer_count());
    let mut written = Vec::new();
    for (layer, name) in network.layers().iter().zip(layer_names) {
        let p = dir.join(name);
        write_text(&p, &format_edge_list(layer))?;
        written.push(p);
    }
    let p = dir.join(corr);
    write_text(&p, &format_correspondences(network.correspondences()))?;
    written.push(p);
    let p = dir.join(inter);
    write_text(&p, &format_interlayer(network.interlayer()))?;
    written.push(p);
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    #[default]
    Csv,
    Json,
}

impl EmbeddingFormat {
    /// Guesses the format from a file extension (`.json` or CSV otherwise).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (csv|json)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EmbeddingRow {
    layer: usize,
    node: usize,
    theta: f64,
    r: f64,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonNode {
    node: usize,
    theta: f64,
    r: f64,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonLayer {
    layer: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    nodes: Vec<JsonNode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonEmbeddings {
    embeddings: Vec<JsonLayer>,
}

fn sorted_layers(embeddings: &[DiskEmbedding]) -> Vec<&DiskEmbedding> {
    let mut v: Vec<&DiskEmbedding> = embeddings.iter().collect();
    v.sort_by_key(|e| e.layer);
    v
}

pub fn format_embedding_csv(embeddings: &[DiskEmbedding]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(["layer", "node", "theta", "r", "x", "y"])
        .expect("in-memory write");
    for e in sorted_layers(embeddings) {
        let mut nodes: Vec<&DiskNode> = e.nodes.iter().collect();
        nodes.sort_by_key(|n| n.node);
        for n in nodes {
            w.serialize(EmbeddingRow {
                layer: e.layer,
                node: n.node,
                theta: n.theta,
                r: n.r,
                x: n.point.x(),
                y: n.point.y(),
            })
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn format_embedding_json(embeddings: &[DiskEmbedding]) -> String {
    let doc = JsonEmbeddings {
        embeddings: sorted_layers(embeddings)
            .into_iter()
            .map(|e| {
                let mut nodes: Vec<JsonNode> = e
                    .nodes
                    .iter()
                    .map(|n| JsonNode {
                        node: n.node,
                        theta: n.theta,
                        r: n.r,
                        x: n.point.x(),
                        y: n.point.y(),
                    })
                    .collect();
                nodes.sort_by_key(|n| n.node);
                JsonLayer {
                    layer: e.layer,
                    beta: e.beta,
                    nodes,
                }
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serialisable");
    s.push('\n');
    s
}

pub fn export_embedding(
    embeddings: &[DiskEmbedding],
    path: &Path,
    format: EmbeddingFormat,
) -> Result<(), IoError> {
    let text = match format {
        EmbeddingFormat::Csv => format_embedding_csv(embeddings),
        EmbeddingFormat::Json => format_embedding_json(embeddings),
    };
    write_text(path, &text)
}

fn to_node(
    path: &Path,
    node: usize,
    theta: f64,
    r: f64,
    x: f64,
    y: f64,
) -> Result<DiskNode, IoError> {
    let point = PoincarePoint::new(x, y).map_err(|e| IoError::Format {
        path: path.to_path_buf(),
        message: format!("node {node}: {e}"),
    })?;
    Ok(DiskNode {
        node,
        theta,
        r,
        point,
    })
}

pub fn parse_embedding_csv(text: &str, path: &Path) -> Result<Vec<DiskEmbedding>, IoError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut layers: BTreeMap<usize, Vec<DiskNode>> = BTreeMap::new();
    for (i, row) in reader.deserialize::<EmbeddingRow>().enumerate() {
        let row = row.map_err(|e| IoError::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        let node = to_node(path, row.node, row.theta, row.r, row.x, row.y)?;
        layers.entry(row.layer).or_default().push(node);
    }
    Ok(layers
        .into_iter()
        .map(|(layer, mut nodes)| {
            nodes.sort_by_key(|n| n.node);
            DiskEmbedding {
                layer,
                beta: None,
                nodes,
            }
        })
        .collect())
}

pub fn parse_embedding_json(text: &str, path: &Path) -> Result<Vec<DiskEmbedding>, IoError> {
    let doc: JsonEmbeddings = serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    doc.embeddings
        .into_iter()
        .map(|l| {
            let mut nodes = l
                .nodes
                .into_iter()
                .map(|n| to_node(path, n.node, n.theta, n.r, n.x, n.y))
                .collect::<Result<Vec<_>, _>>()?;
            nodes.sort_by_key(|n| n.node);
            Ok(DiskEmbedding {
                layer: l.layer,
                beta: l.beta,
                nodes,
            })
        })
        .collect()
}

pub fn load_embedding(path: &Path) -> Result<Vec<DiskEmbedding>, IoError> {
    let text = read_text(path)?;
    match EmbeddingFormat::from_path(path) {
        EmbeddingFormat::Csv => parse_embedding_csv(&text, path),
        EmbeddingFormat::Json => parse_embedding_json(&text, path),
    }
}

pub fn format_labels(labels: &CommunityLabels) -> String {
    let mut out = String::from("layer,node,community\n");
    for (l, layer) in labels.labels.iter().enumerate() {
        for (node, c) in layer.iter().enumerate() {
            out.push_str(&format!("{l},{node},{c}\n"));
        }
    }
    out
}

pub fn parse_labels(text: &str, path: &Path) -> Result<CommunityLabels, IoError> {
    #[derive(Deserialize)]
    struct Row {
        layer: usize,
        node: usize,
        community: usize,
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut labels: Vec<Vec<usize>> = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| IoError::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        if labels.len() <= row.layer {
            labels.resize(row.layer + 1, Vec::new());
        }
        let layer = &mut labels[row.layer];
        if layer.len() <= row.node {
            layer.resize(row.node + 1, usize::MAX);
        }
        layer[row.node] = row.community;
    }
    Ok(CommunityLabels { labels })
}

/// Named node groups: `group -> [(layer, node)]`.
pub fn parse_groups(text: &str, path: &Path) -> Result<BTreeMap<String, Vec<NodeRef>>, IoError> {
    let mut groups: BTreeMap<String, Vec<NodeRef>> = BTreeMap::new();
    for (line, tokens) in data_lines(text) {
        let err = |message: String| IoError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if tokens.len() != 3 {
            return Err(err("expected `<group> <layer> <node>`".into()));
        }
        let layer = tokens[1]
            .parse()
            .map_err(|_| err(format!("invalid layer `{}`", tokens[1])))?;
        let node = tokens[2]
            .parse()
            .map_err(|_| err(format!("invalid node `{}`", tokens[2])))?;
        groups
            .entry(tokens[0].to_string())
            .or_default()
            .push(NodeRef::new(layer, node));
    }
    Ok(groups)
}
