//! JSON documents: `{"kind", "version", "payload"}` envelopes with canonical
//! serialization (sorted keys, id-sorted arrays, shortest round-trip floats).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::diagram::{DiagramError, Diagram, Endpoint, GammaPath, Morphism2, Side};
use crate::fair::{FairEdgeRecord, FairError, FairGraph, FairGraphData, FairVertexRecord};
use crate::functor::BlockOperator;
use crate::graph::{BiGraph, BiGraphData, GraphError};
use crate::iso::IsoWitness;
use crate::linalg::CMatrix;
use crate::mw::{CycleWitness, DimensionFunction};
use crate::report::{ValidationReport, Violation};
use crate::solution::{BlockKey, FundamentalSolution, GradingFamily, SolutionError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("unsupported document version {0} (expected {FORMAT_VERSION})")]
    VersionUnsupported(u64),
    #[error("expected a `{expected}` document, found `{found}`")]
    KindMismatch { expected: DocumentKind, found: DocumentKind },
    #[error("cannot read `{path}`: {message}")]
    File { path: PathBuf, message: String },
    #[error("embedded base graph differs from the one supplied")]
    GammaConflict,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Fair(#[from] FairError),
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

impl IoError {
    /// Stable code for input errors; wrapped library errors report `INVALID_INPUT`.
    pub fn code(&self) -> &'static str {
        match self {
            IoError::MalformedJson(_) => "MALFORMED_JSON",
            IoError::SchemaViolation { .. } => "SCHEMA_VIOLATION",
            IoError::VersionUnsupported(_) => "VERSION_UNSUPPORTED",
            IoError::KindMismatch { .. } => "KIND_MISMATCH",
            IoError::File { .. } => "FILE_ERROR",
            IoError::GammaConflict => "GAMMA_CONFLICT",
            _ => "INVALID_INPUT",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    Gamma,
    FairGraph,
    Solution,
    Morphism2,
    Report,
    Witness,
}

impl std::fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DocumentKind::Gamma => "gamma",
            DocumentKind::FairGraph => "fair_graph",
            DocumentKind::Solution => "solution",
            DocumentKind::Morphism2 => "morphism2",
            DocumentKind::Report => "report",
            DocumentKind::Witness => "witness",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub kind: DocumentKind,
    pub version: u32,
    pub payload: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: Value,
    version: Value,
    payload: Value,
}

fn schema<E: std::fmt::Display>(err: serde_path_to_error::Error<E>, prefix: &str) -> IoError {
    let inner = err.path().to_string();
    let path = match (prefix.is_empty(), inner.as_str()) {
        (true, _) => inner.clone(),
        (false, ".") => prefix.to_string(),
        (false, _) => format!("{prefix}.{inner}"),
    };
    IoError::SchemaViolation {
        path,
        message: err.into_inner().to_string(),
    }
}

fn from_value<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, IoError> {
    serde_path_to_error::deserialize(value).map_err(|e| schema(e, prefix))
}

/// Parses and checks the envelope; the payload stays untyped.
pub fn parse(bytes: &[u8]) -> Result<Document, IoError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| IoError::MalformedJson(e.to_string()))?;
    let env: Envelope = from_value(value, "")?;
    let kind: DocumentKind = from_value(env.kind, "kind")?;
    let version = match env.version.as_u64() {
        Some(v) => v,
        None => {
            return Err(IoError::SchemaViolation {
                path: "version".into(),
                message: "expected a non-negative integer".into(),
            })
        }
    };
    if version != u64::from(FORMAT_VERSION) {
        return Err(IoError::VersionUnsupported(version));
    }
    Ok(Document {
        kind,
        version: FORMAT_VERSION,
        payload: env.payload,
    })
}

/// Canonical bytes: pretty-printed, keys sorted, trailing newline.
pub fn serialize(doc: &Document) -> Vec<u8> {
    let value = serde_json::to_value(doc).expect("documents are plain data");
    let mut out = serde_json::to_vec_pretty(&value).expect("values serialize");
    out.push(b'\n');
    out
}

/// Re-emits a parsed document in canonical form, sorting id-keyed arrays.
pub fn canonicalize(doc: &Document) -> Result<Document, IoError> {
    let payload = match doc.kind {
        DocumentKind::Gamma => {
            let mut data: BiGraphData = doc.payload_as(DocumentKind::Gamma)?;
            data.canonicalize();
            to_value(&data)
        }
        DocumentKind::FairGraph => {
            let mut p: FairGraphPayload = doc.payload_as(DocumentKind::FairGraph)?;
            if let GammaRef::Inline(g) = &mut p.gamma {
                g.canonicalize();
            }
            p.vertices.sort_by(|a, b| a.id.cmp(&b.id));
            p.edges.sort_by(|a, b| a.id.cmp(&b.id));
            to_value(&p)
        }
        DocumentKind::Solution => {
            let mut p: SolutionPayload = doc.payload_as(DocumentKind::Solution)?;
            if let GammaRef::Inline(g) = &mut p.gamma {
                g.canonicalize();
            }
            p.blocks.sort_by(|a, b| (&a.edge, &a.v, &a.w).cmp(&(&b.edge, &b.v, &b.w)));
            to_value(&p)
        }
        DocumentKind::Morphism2 => to_value(&doc.payload_as::<MorphismPayload>(DocumentKind::Morphism2)?),
        DocumentKind::Report => to_value(&doc.payload_as::<ReportPayload>(DocumentKind::Report)?),
        DocumentKind::Witness => to_value(&doc.payload_as::<WitnessPayload>(DocumentKind::Witness)?),
    };
    Ok(Document {
        kind: doc.kind,
        version: FORMAT_VERSION,
        payload,
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("payloads are plain data")
}

impl Document {
    pub fn new<T: Serialize>(kind: DocumentKind, payload: &T) -> Self {
        Document {
            kind,
            version: FORMAT_VERSION,
            payload: to_value(payload),
        }
    }

    pub fn expect_kind(&self, expected: DocumentKind) -> Result<(), IoError> {
        if self.kind != expected {
            return Err(IoError::KindMismatch {
                expected,
                found: self.kind,
            });
        }
        Ok(())
    }

    pub fn payload_as<T: DeserializeOwned>(&self, expected: DocumentKind) -> Result<T, IoError> {
        self.expect_kind(expected)?;
        from_value(self.payload.clone(), "payload")
    }
}

pub fn read_document(path: &Path) -> Result<Document, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse(&bytes)
}

/// A base graph given inline or as a path to a gamma document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaRef {
    File(String),
    Inline(BiGraphData),
}

impl GammaRef {
    /// Loads the graph. Relative file references resolve against `base_dir`.
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<BiGraph, IoError> {
        match self {
            GammaRef::Inline(data) => Ok(BiGraph::new(data.clone())?),
            GammaRef::File(f) => {
                let path = match base_dir {
                    Some(dir) if Path::new(f).is_relative() => dir.join(f),
                    _ => PathBuf::from(f),
                };
                let doc = read_document(&path)?;
                Ok(BiGraph::new(doc.payload_as(DocumentKind::Gamma)?)?)
            }
        }
    }
}

/// Picks the authoritative base graph: `supplied` if given (the embedded one
/// must then agree), else the embedded one.
fn pick_gamma(
    embedded: &GammaRef,
    base_dir: Option<&Path>,
    supplied: Option<&Arc<BiGraph>>,
) -> Result<Arc<BiGraph>, IoError> {
    let own = embedded.resolve(base_dir)?;
    match supplied {
        Some(g) if **g != own => Err(IoError::GammaConflict),
        Some(g) => Ok(g.clone()),
        None => Ok(Arc::new(own)),
    }
}

pub fn gamma_document(g: &BiGraph) -> Document {
    Document::new(DocumentKind::Gamma, &g.to_data())
}

pub fn read_gamma(doc: &Document) -> Result<BiGraph, IoError> {
    Ok(BiGraph::new(doc.payload_as(DocumentKind::Gamma)?)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FairGraphPayload {
    pub gamma: GammaRef,
    pub vertices: Vec<FairVertexRecord>,
    pub edges: Vec<FairEdgeRecord>,
}

pub fn fair_graph_document(l: &FairGraph) -> Document {
    let data = l.to_data();
    Document::new(
        DocumentKind::FairGraph,
        &FairGraphPayload {
            gamma: GammaRef::Inline(l.gamma().to_data()),
            vertices: data.vertices,
            edges: data.edges,
        },
    )
}

pub fn read_fair_graph(
    doc: &Document,
    base_dir: Option<&Path>,
    gamma: Option<&Arc<BiGraph>>,
) -> Result<FairGraph, IoError> {
    let p: FairGraphPayload = doc.payload_as(DocumentKind::FairGraph)?;
    let g = pick_gamma(&p.gamma, base_dir, gamma)?;
    Ok(FairGraph::new(
        g,
        FairGraphData {
            vertices: p.vertices,
            edges: p.edges,
        },
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockRecord {
    pub edge: String,
    pub v: String,
    pub w: String,
    /// Row-major, each entry `[re, im]`.
    pub cup: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionPayload {
    pub gamma: GammaRef,
    pub gradings: BTreeMap<String, Vec<String>>,
    pub blocks: Vec<BlockRecord>,
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_json(rows: &[Vec<[f64; 2]>], at: &str) -> Result<CMatrix, IoError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != c) {
        return Err(IoError::SchemaViolation {
            path: at.to_string(),
            message: "rows have different lengths".into(),
        });
    }
    Ok(CMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn solution_document(s: &FundamentalSolution) -> Document {
    let g = s.gamma();
    let mut blocks: Vec<BlockRecord> = s
        .cups()
        .iter()
        .map(|(&key, c)| BlockRecord {
            edge: g.edge_id(key.edge).to_string(),
            v: s.gradings().set(g.source(key.edge))[key.v].clone(),
            w: s.gradings().set(g.target(key.edge))[key.w].clone(),
            cup: matrix_to_json(c),
        })
        .collect();
    blocks.sort_by(|a, b| (&a.edge, &a.v, &a.w).cmp(&(&b.edge, &b.v, &b.w)));
    Document::new(
        DocumentKind::Solution,
        &SolutionPayload {
            gamma: GammaRef::Inline(g.to_data()),
            gradings: s.gradings().to_map(g),
            blocks,
        },
    )
}

pub fn read_solution(
    doc: &Document,
    base_dir: Option<&Path>,
    gamma: Option<&Arc<BiGraph>>,
) -> Result<FundamentalSolution, IoError> {
    let p: SolutionPayload = doc.payload_as(DocumentKind::Solution)?;
    let g = pick_gamma(&p.gamma, base_dir, gamma)?;
    let allow_empty = p.gradings.values().any(|s| s.is_empty());
    let gradings = GradingFamily::new(&g, &p.gradings, allow_empty)?;
    let mut cups = BTreeMap::new();
    for (i, b) in p.blocks.iter().enumerate() {
        let e = g.edge_ix(&b.edge)?;
        let v = gradings.index_of(&g, g.source(e), &b.v)?;
        let w = gradings.index_of(&g, g.target(e), &b.w)?;
        let m = matrix_from_json(&b.cup, &format!("payload.blocks[{i}].cup"))?;
        if cups.insert(BlockKey::new(e, v, w), m).is_some() {
            return Err(IoError::SchemaViolation {
                path: format!("payload.blocks[{i}]"),
                message: "duplicate block".into(),
            });
        }
    }
    Ok(FundamentalSolution::new(g, gradings, cups)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathRecord {
    pub edges: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    Bottom,
    Top,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub coeff: [f64; 2],
    pub arcs: Vec<[(SideName, usize); 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismPayload {
    pub bottom: PathRecord,
    pub top: PathRecord,
    pub terms: Vec<TermRecord>,
}

fn path_record(g: &BiGraph, p: &GammaPath) -> PathRecord {
    PathRecord {
        edges: p.labels(g).into_iter().map(String::from).collect(),
        at: Some(g.vertex_id(p.start()).to_string()),
    }
}

fn endpoint_record(p: Endpoint) -> (SideName, usize) {
    let side = match p.side {
        Side::Bottom => SideName::Bottom,
        Side::Top => SideName::Top,
    };
    (side, p.index)
}

pub fn morphism_document(m: &Morphism2) -> Document {
    let g = &**m.gamma();
    let terms = m
        .terms()
        .map(|(d, c)| TermRecord {
            coeff: [c.re, c.im],
            arcs: d
                .arcs()
                .into_iter()
                .map(|(a, b)| [endpoint_record(a), endpoint_record(b)])
                .collect(),
        })
        .collect();
    Document::new(
        DocumentKind::Morphism2,
        &MorphismPayload {
            bottom: path_record(g, m.bottom()),
            top: path_record(g, m.top()),
            terms,
        },
    )
}

/// Resolves a morphism document against `gamma`. Every term is validated.
pub fn read_morphism(doc: &Document, gamma: &Arc<BiGraph>) -> Result<Morphism2, IoError> {
    let p: MorphismPayload = doc.payload_as(DocumentKind::Morphism2)?;
    let path = |r: &PathRecord| {
        let ids: Vec<&str> = r.edges.iter().map(String::as_str).collect();
        GammaPath::from_ids(gamma, &ids, r.at.as_deref())
    };
    let bottom = path(&p.bottom)?;
    let top = path(&p.top)?;
    let ep = |(side, index): (SideName, usize)| match side {
        SideName::Bottom => Endpoint::bottom(index),
        SideName::Top => Endpoint::top(index),
    };
    let mut terms = Vec::new();
    for t in &p.terms {
        let arcs: Vec<(Endpoint, Endpoint)> = t.arcs.iter().map(|[a, b]| (ep(*a), ep(*b))).collect();
        let d = Diagram::from_arcs(bottom.clone(), top.clone(), &arcs)?;
        terms.push((d, Complex64::new(t.coeff[0], t.coeff[1])));
    }
    Ok(Morphism2::from_terms(gamma.clone(), bottom, top, terms)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportPayload {
    pub command: String,
    pub ok: bool,
    pub violations: Vec<Violation>,
    #[serde(default)]
    pub warnings: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

pub fn report_document(command: &str, report: &ValidationReport, data: Value) -> Document {
    Document::new(
        DocumentKind::Report,
        &ReportPayload {
            command: command.to_string(),
            ok: report.ok,
            violations: report.violations.clone(),
            warnings: report.warnings.clone(),
            data,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessPayload {
    Isomorphism(IsoWitness),
    Dimension(DimensionFunction),
    Cycle(CycleWitness),
    Involution { pairing: BTreeMap<String, String> },
}

pub fn witness_document(w: &WitnessPayload) -> Document {
    Document::new(DocumentKind::Witness, w)
}

/// JSON view of an evaluated operator; grading tuples use grading ids.
pub fn block_operator_json(s: &FundamentalSolution, op: &BlockOperator) -> Value {
    let g = &**s.gamma();
    let names = |p: &GammaPath, t: &[usize]| -> Vec<String> {
        t.iter()
            .enumerate()
            .map(|(i, &v)| s.gradings().set(p.vertex_at(g, i))[v].clone())
            .collect()
    };
    let blocks: Vec<Value> = op
        .blocks()
        .iter()
        .map(|((d, c), m)| {
            serde_json::json!({
                "domain": names(op.domain(), d),
                "codomain": names(op.codomain(), c),
                "matrix": matrix_to_json(m),
            })
        })
        .collect();
    serde_json::json!({
        "domain": path_record(g, op.domain()),
        "codomain": path_record(g, op.codomain()),
        "blocks": blocks,
    })
}
