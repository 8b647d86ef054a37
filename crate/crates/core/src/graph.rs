//! Weighted bidirected graphs: the datum that generates a TLJ 2-category.
//!
//! [`BiGraphData`] is the raw, possibly malformed, record form (what a file
//! contains). [`BiGraph`] is the validated and indexed form used everywhere
//! else. Vertices and edges of a `BiGraph` are stored in lexicographic id
//! order, so indices are deterministic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{ValidationReport, Violation, ViolationCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexIx(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeIx(pub usize);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: String,
    pub source: String,
    pub target: String,
    pub weight: f64,
    pub dual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiGraphData {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
}

impl BiGraphData {
    /// Sorts vertices and edges by id.
    pub fn canonicalize(&mut self) {
        self.vertices.sort();
        self.edges.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid bidirected graph: {0}")]
    Invalid(ValidationReport),
    #[error("{kind:?} takes {expected} weight(s), got {got}")]
    WeightCount {
        kind: StandardKind,
        expected: usize,
        got: usize,
    },
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: String,
    pub source: VertexIx,
    pub target: VertexIx,
    pub weight: f64,
    pub dual: EdgeIx,
}

/// A validated weighted bidirected graph.
#[derive(Clone, Debug)]
pub struct BiGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: BTreeMap<String, VertexIx>,
    edge_index: BTreeMap<String, EdgeIx>,
}

impl PartialEq for BiGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

/// Checks every structural invariant of a candidate bidirected graph.
///
/// Never fails: each broken invariant becomes one violation.
pub fn validate_bigraph(g: &BiGraphData) -> ValidationReport {
    let mut report = ValidationReport::new();

    let mut seen = BTreeSet::new();
    for v in &g.vertices {
        if !seen.insert(v.as_str()) {
            report.push(Violation::new(
                ViolationCode::DuplicateId,
                vec![v.clone()],
                format!("vertex id `{v}` declared more than once"),
            ));
        }
    }
    let vertices = seen;

    let mut edges: BTreeMap<&str, &EdgeRecord> = BTreeMap::new();
    for e in &g.edges {
        if edges.insert(e.id.as_str(), e).is_some() {
            report.push(Violation::new(
                ViolationCode::DuplicateId,
                vec![e.id.clone()],
                format!("edge id `{}` declared more than once", e.id),
            ));
        }
    }

    for e in &g.edges {
        for (role, v) in [("source", &e.source), ("target", &e.target)] {
            if !vertices.contains(v.as_str()) {
                report.push(Violation::new(
                    ViolationCode::DanglingReference,
                    vec![e.id.clone(), v.clone()],
                    format!("edge `{}` has undeclared {role} `{v}`", e.id),
                ));
            }
        }
        if !edges.contains_key(e.dual.as_str()) {
            report.push(Violation::new(
                ViolationCode::DanglingReference,
                vec![e.id.clone(), e.dual.clone()],
                format!("edge `{}` has undeclared dual `{}`", e.id, e.dual),
            ));
        }
        if !(e.weight > 0.0 && e.weight.is_finite()) {
            report.push(Violation::new(
                ViolationCode::NonpositiveWeight,
                vec![e.id.clone()],
                format!("edge `{}` has weight {} (must be a positive real)", e.id, e.weight),
            ));
        }
    }

    for e in &g.edges {
        let Some(d) = edges.get(e.dual.as_str()) else {
            continue;
        };
        if d.dual != e.id {
            report.push(Violation::new(
                ViolationCode::DualNotInvolution,
                vec![e.id.clone(), d.id.clone()],
                format!(
                    "dual(dual(`{}`)) = `{}`, expected `{}`",
                    e.id, d.dual, e.id
                ),
            ));
            continue;
        }
        // Each unordered dual pair is reported once.
        if e.id > d.id {
            continue;
        }
        if d.source != e.target || d.target != e.source {
            report.push(Violation::new(
                ViolationCode::DualEndpointMismatch,
                vec![e.id.clone(), d.id.clone()],
                format!(
                    "`{}`: {} -> {} but its dual `{}`: {} -> {}",
                    e.id, e.source, e.target, d.id, d.source, d.target
                ),
            ));
        }
        if e.weight.to_bits() != d.weight.to_bits() {
            report.push(Violation::new(
                ViolationCode::DualWeightMismatch,
                vec![e.id.clone(), d.id.clone()],
                format!(
                    "`{}` has weight {} but its dual `{}` has weight {}",
                    e.id, e.weight, d.id, d.weight
                ),
            ));
        }
    }

    report
}

impl TryFrom<BiGraphData> for BiGraph {
    type Error = GraphError;

    fn try_from(data: BiGraphData) -> Result<Self, GraphError> {
        BiGraph::new(data)
    }
}

impl BiGraph {
    pub fn new(mut data: BiGraphData) -> Result<Self, GraphError> {
        let report = validate_bigraph(&data);
        if !report.ok {
            return Err(GraphError::Invalid(report));
        }
        data.canonicalize();
        let vertex_index: BTreeMap<String, VertexIx> = data
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), VertexIx(i)))
            .collect();
        let edge_index: BTreeMap<String, EdgeIx> = data
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), EdgeIx(i)))
            .collect();
        let edges = data
            .edges
            .iter()
            .map(|e| Edge {
                id: e.id.clone(),
                source: vertex_index[&e.source],
                target: vertex_index[&e.target],
                weight: e.weight,
                dual: edge_index[&e.dual],
            })
            .collect();
        Ok(BiGraph {
            vertices: data.vertices,
            edges,
            vertex_index,
            edge_index,
        })
    }

    pub fn to_data(&self) -> BiGraphData {
        BiGraphData {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    source: self.vertices[e.source.0].clone(),
                    target: self.vertices[e.target.0].clone(),
                    weight: e.weight,
                    dual: self.edges[e.dual.0].id.clone(),
                })
                .collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, v: VertexIx) -> &str {
        &self.vertices[v.0]
    }

    pub fn vertex_ix(&self, id: &str) -> Result<VertexIx, GraphError> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn edge_ix(&self, id: &str) -> Result<EdgeIx, GraphError> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))
    }

    pub fn edge(&self, e: EdgeIx) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeIx, &Edge)> {
        self.edges.iter().enumerate().map(|(i, e)| (EdgeIx(i), e))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexIx> {
        (0..self.vertices.len()).map(VertexIx)
    }

    pub fn source(&self, e: EdgeIx) -> VertexIx {
        self.edges[e.0].source
    }

    pub fn target(&self, e: EdgeIx) -> VertexIx {
        self.edges[e.0].target
    }

    pub fn dual(&self, e: EdgeIx) -> EdgeIx {
        self.edges[e.0].dual
    }

    pub fn weight(&self, e: EdgeIx) -> f64 {
        self.edges[e.0].weight
    }

    pub fn edge_id(&self, e: EdgeIx) -> &str {
        &self.edges[e.0].id
    }

    pub fn is_self_dual(&self, e: EdgeIx) -> bool {
        self.dual(e) == e
    }

    /// Edges leaving `v`, in index order.
    pub fn out_edges(&self, v: VertexIx) -> impl Iterator<Item = EdgeIx> + '_ {
        self.edges()
            .filter(move |(_, e)| e.source == v)
            .map(|(ix, _)| ix)
    }
}

/// Connectivity of the underlying undirected graph. The empty graph is not
/// connected.
pub fn is_connected(g: &BiGraph) -> bool {
    let n = g.vertex_count();
    if n == 0 {
        return false;
    }
    let mut adjacency = vec![Vec::new(); n];
    for (_, e) in g.edges() {
        adjacency[e.source.0].push(e.target.0);
        adjacency[e.target.0].push(e.source.0);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == n
}

/// The four classical generating graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardKind {
    /// One vertex, one self-dual loop.
    Unoriented,
    /// One vertex, a dual pair of loops.
    Oriented,
    /// One vertex, two self-dual loops (`red`, `blue`).
    TwoColor,
    /// Two vertices joined by a dual pair of edges.
    Shaded,
}

impl StandardKind {
    fn weight_count(self) -> usize {
        match self {
            StandardKind::TwoColor => 2,
            _ => 1,
        }
    }
}

fn edge(id: &str, source: &str, target: &str, weight: f64, dual: &str) -> EdgeRecord {
    EdgeRecord {
        id: id.into(),
        source: source.into(),
        target: target.into(),
        weight,
        dual: dual.into(),
    }
}

pub fn standard_gamma(kind: StandardKind, weights: &[f64]) -> Result<BiGraph, GraphError> {
    if weights.len() != kind.weight_count() {
        return Err(GraphError::WeightCount {
            kind,
            expected: kind.weight_count(),
            got: weights.len(),
        });
    }
    let data = match kind {
        StandardKind::Unoriented => BiGraphData {
            vertices: vec!["a".into()],
            edges: vec![edge("e", "a", "a", weights[0], "e")],
        },
        StandardKind::Oriented => BiGraphData {
            vertices: vec!["a".into()],
            edges: vec![
                edge("e", "a", "a", weights[0], "e_bar"),
                edge("e_bar", "a", "a", weights[0], "e"),
            ],
        },
        StandardKind::TwoColor => BiGraphData {
            vertices: vec!["a".into()],
            edges: vec![
                edge("red", "a", "a", weights[0], "red"),
                edge("blue", "a", "a", weights[1], "blue"),
            ],
        },
        StandardKind::Shaded => BiGraphData {
            vertices: vec!["white".into(), "shaded".into()],
            edges: vec![
                edge("e", "white", "shaded", weights[0], "e_bar"),
                edge("e_bar", "shaded", "white", weights[0], "e"),
            ],
        },
    };
    BiGraph::new(data)
}
