//! Parametric families of balanced fair graphs.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fair::{
    find_balanced_involution, FairEdgeRecord, FairError, FairGraph, FairGraphData, FairVertexRecord,
};
use crate::graph::BiGraph;

#[derive(Clone, Debug)]
pub enum Family {
    /// Aₙ path weighted by quantum dimensions, over one self-dual loop with
    /// `δ = 2cos(π/(n+1))`.
    APathQuantumDim(usize),
    /// Two vertices over an oriented loop pair with `δ = a + 1/a`.
    TwoVertexReciprocal(f64),
    /// `N` copies of each Γ-vertex joined by unit-weight edges; needs every
    /// `δ_e` to be a positive integer.
    IntegerSheets(usize),
    /// Disjoint copies of a balanced graph with one dual pair of edges
    /// shifted cyclically between sheets.
    Cover(Box<FairGraph>, usize),
    /// The same graph under freshly shuffled ids.
    Relabel(Box<FairGraph>, u64),
}

const SHAPE_TOL: f64 = 1e-10;

fn vrec(id: impl Into<String>, pi: &str) -> FairVertexRecord {
    FairVertexRecord { id: id.into(), pi: pi.to_string() }
}

fn erec(id: impl Into<String>, source: impl Into<String>, target: impl Into<String>, weight: f64, pi: &str) -> FairEdgeRecord {
    FairEdgeRecord {
        id: id.into(),
        source: source.into(),
        target: target.into(),
        weight,
        pi: pi.to_string(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SHAPE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Quantum dimension `sin(iπ/(n+1))`.
pub fn quantum_dim(i: usize, n: usize) -> f64 {
    (i as f64 * PI / (n as f64 + 1.0)).sin()
}

pub fn a_path_delta(n: usize) -> f64 {
    2.0 * (PI / (n as f64 + 1.0)).cos()
}

pub fn generate_family(family: &Family, g: &Arc<BiGraph>) -> Result<FairGraph, FairError> {
    match family {
        Family::APathQuantumDim(n) => a_path(*n, g),
        Family::TwoVertexReciprocal(a) => two_vertex_reciprocal(*a, g),
        Family::IntegerSheets(n) => integer_sheets(*n, g),
        Family::Cover(l, sheets) => cover(l, *sheets),
        Family::Relabel(l, seed) => relabel(l, *seed),
    }
}

fn a_path(n: usize, g: &Arc<BiGraph>) -> Result<FairGraph, FairError> {
    if n < 2 {
        return Err(FairError::Family(format!("A-path needs n >= 2, got {n}")));
    }
    let loop_edge = match g.edges().collect::<Vec<_>>()[..] {
        [(e, edge)] if g.vertex_count() == 1 && edge.dual == e => e,
        _ => {
            return Err(FairError::Family(
                "A-path needs Γ with one vertex and one self-dual loop".into(),
            ))
        }
    };
    let delta = g.weight(loop_edge);
    if !close(delta, a_path_delta(n)) {
        return Err(FairError::Family(format!(
            "A-path with n = {n} needs δ = 2cos(π/{}) = {}, Γ has {delta}",
            n + 1,
            a_path_delta(n)
        )));
    }
    let a = g.vertex_id(g.source(loop_edge)).to_string();
    let e = g.edge_id(loop_edge).to_string();
    let name = |i: usize| format!("v{i}");
    let mut data = FairGraphData {
        vertices: (1..=n).map(|i| vrec(name(i), &a)).collect(),
        edges: Vec::new(),
    };
    for i in 1..n {
        let (di, dj) = (quantum_dim(i, n), quantum_dim(i + 1, n));
        data.edges.push(erec(format!("{e}:{}:{}", name(i), name(i + 1)), name(i), name(i + 1), dj / di, &e));
        data.edges.push(erec(format!("{e}:{}:{}", name(i + 1), name(i)), name(i + 1), name(i), di / dj, &e));
    }
    FairGraph::new(g.clone(), data)
}

fn two_vertex_reciprocal(a: f64, g: &Arc<BiGraph>) -> Result<FairGraph, FairError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(FairError::Family(format!("parameter a must be positive, got {a}")));
    }
    let edges: Vec<_> = g.edges().collect();
    let (e, eb) = match edges[..] {
        [(e, x), (f, _)] if g.vertex_count() == 1 && x.dual == f && e != f => (e, f),
        _ => {
            return Err(FairError::Family(
                "two-vertex family needs Γ with one vertex and one dual pair of loops".into(),
            ))
        }
    };
    let delta = g.weight(e);
    if !close(delta, a + 1.0 / a) {
        return Err(FairError::Family(format!("δ = {delta} differs from a + 1/a = {}", a + 1.0 / a)));
    }
    let base = g.vertex_id(g.source(e)).to_string();
    let (e, eb) = (g.edge_id(e).to_string(), g.edge_id(eb).to_string());
    let mut data = FairGraphData {
        vertices: vec![vrec("v0", &base), vrec("v1", &base)],
        edges: Vec::new(),
    };
    for (s, t, w) in [("v0", "v0", a), ("v0", "v1", 1.0 / a), ("v1", "v1", a), ("v1", "v0", 1.0 / a)] {
        data.edges.push(erec(format!("{e}:{s}:{t}"), s, t, w, &e));
        data.edges.push(erec(format!("{eb}:{t}:{s}"), t, s, 1.0 / w, &eb));
    }
    FairGraph::new(g.clone(), data)
}

fn integer_sheets(n: usize, g: &Arc<BiGraph>) -> Result<FairGraph, FairError> {
    if n == 0 {
        return Err(FairError::Family("need at least one sheet".into()));
    }
    let mut data = FairGraphData::default();
    let name = |a: &str, i: usize| format!("{a}:{i}");
    for a in g.vertex_ids() {
        for i in 0..n {
            data.vertices.push(vrec(name(a, i), a));
        }
    }
    for (e, edge) in g.edges() {
        let delta = edge.weight;
        if delta.fract() != 0.0 || delta < 1.0 {
            return Err(FairError::Family(format!(
                "edge `{}` has non-integer δ = {delta}",
                edge.id
            )));
        }
        let count = delta as usize;
        let (src, tgt) = (g.vertex_id(edge.source), g.vertex_id(edge.target));
        let eb = g.dual(e);
        for i in 0..n {
            for k in 0..count {
                let j = if e == eb {
                    i
                } else if e < eb {
                    (i + k) % n
                } else {
                    (i + n * count - k) % n
                };
                data.edges.push(erec(format!("{}:{i}:{k}", edge.id), name(src, i), name(tgt, j), 1.0, &edge.id));
            }
        }
    }
    FairGraph::new(g.clone(), data)
}

fn cover(l: &FairGraph, sheets: usize) -> Result<FairGraph, FairError> {
    if sheets == 0 {
        return Err(FairError::Family("need at least one sheet".into()));
    }
    let inv = find_balanced_involution(l, SHAPE_TOL)?
        .ok_or_else(|| FairError::Family("cover needs a balanced graph".into()))?;
    let shifted = (0..l.edge_count()).find(|&k| inv.pairing[k] != k);
    let g = l.gamma();
    let name = |id: &str, s: usize| format!("{id}#{s}");
    let mut data = FairGraphData::default();
    for s in 0..sheets {
        for v in l.vertices() {
            data.vertices.push(vrec(name(&v.id, s), g.vertex_id(v.pi)));
        }
        for (k, e) in l.edges().iter().enumerate() {
            let (src, tgt) = (&l.vertex(e.source).id, &l.vertex(e.target).id);
            let t = match shifted {
                Some(x) if x == k => (s + 1) % sheets,
                Some(x) if inv.pairing[x] == k => (s + sheets - 1) % sheets,
                _ => s,
            };
            data.edges.push(erec(name(&e.id, s), name(src, s), name(tgt, t), e.weight, g.edge_id(e.pi)));
        }
    }
    FairGraph::new(g.clone(), data)
}

fn relabel(l: &FairGraph, seed: u64) -> Result<FairGraph, FairError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vperm: Vec<usize> = (0..l.vertex_count()).collect();
    let mut eperm: Vec<usize> = (0..l.edge_count()).collect();
    vperm.shuffle(&mut rng);
    eperm.shuffle(&mut rng);
    let g = l.gamma();
    let vname = |i: usize| format!("n{:03}", vperm[i]);
    let data = FairGraphData {
        vertices: l
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| vrec(vname(i), g.vertex_id(v.pi)))
            .collect(),
        edges: l
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| erec(format!("x{:03}", eperm[k]), vname(e.source), vname(e.target), e.weight, g.edge_id(e.pi)))
            .collect(),
    };
    FairGraph::new(g.clone(), data)
}
