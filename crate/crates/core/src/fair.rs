//! Γ-fair graphs and balanced involutions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BiGraph, EdgeIx, GraphError, VertexIx};
use crate::report::{ValidationReport, Violation, ViolationCode};

#[derive(Debug, Error)]
pub enum FairError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    Dangling { edge: String, vertex: String },
    #[error("edge `{0}` does not project onto a Γ-edge with matching endpoints")]
    NotHomomorphism(String),
    #[error("edge `{0}` has a nonpositive or non-finite weight")]
    NonpositiveWeight(String),
    #[error("graph is not fair: {0}")]
    NotFair(ValidationReport),
    #[error("graph is not balanced: {0}")]
    NotBalanced(ValidationReport),
    #[error("family does not apply: {0}")]
    Family(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FairVertexRecord {
    pub id: String,
    pub pi: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FairEdgeRecord {
    pub id: String,
    pub source: String,
    pub target: String,
    pub weight: f64,
    pub pi: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FairGraphData {
    pub vertices: Vec<FairVertexRecord>,
    pub edges: Vec<FairEdgeRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FairVertex {
    pub id: String,
    pub pi: VertexIx,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FairEdge {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub weight: f64,
    pub pi: EdgeIx,
}

/// `(Λ, w, π)` over a fixed Γ. Vertices and edges are kept sorted by id.
#[derive(Clone, Debug)]
pub struct FairGraph {
    gamma: Arc<BiGraph>,
    vertices: Vec<FairVertex>,
    edges: Vec<FairEdge>,
    vertex_index: BTreeMap<String, usize>,
    edge_index: BTreeMap<String, usize>,
    out: Vec<Vec<usize>>,
}

impl PartialEq for FairGraph {
    fn eq(&self, other: &Self) -> bool {
        *self.gamma == *other.gamma && self.vertices == other.vertices && self.edges == other.edges
    }
}

impl FairGraph {
    pub fn new(gamma: Arc<BiGraph>, mut data: FairGraphData) -> Result<Self, FairError> {
        data.vertices.sort_by(|a, b| a.id.cmp(&b.id));
        data.edges.sort_by(|a, b| a.id.cmp(&b.id));
        let mut vertex_index = BTreeMap::new();
        let mut vertices = Vec::with_capacity(data.vertices.len());
        for (i, v) in data.vertices.iter().enumerate() {
            if vertex_index.insert(v.id.clone(), i).is_some() {
                return Err(FairError::DuplicateId(v.id.clone()));
            }
            vertices.push(FairVertex {
                id: v.id.clone(),
                pi: gamma.vertex_ix(&v.pi)?,
            });
        }
        let mut edge_index = BTreeMap::new();
        let mut edges = Vec::with_capacity(data.edges.len());
        let mut out = vec![Vec::new(); vertices.len()];
        for (i, e) in data.edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() || vertex_index.contains_key(&e.id) {
                return Err(FairError::DuplicateId(e.id.clone()));
            }
            let lookup = |v: &str| {
                vertex_index.get(v).copied().ok_or_else(|| FairError::Dangling {
                    edge: e.id.clone(),
                    vertex: v.to_string(),
                })
            };
            let source = lookup(&e.source)?;
            let target = lookup(&e.target)?;
            let pi = gamma.edge_ix(&e.pi)?;
            if vertices[source].pi != gamma.source(pi) || vertices[target].pi != gamma.target(pi) {
                return Err(FairError::NotHomomorphism(e.id.clone()));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(FairError::NonpositiveWeight(e.id.clone()));
            }
            out[source].push(i);
            edges.push(FairEdge {
                id: e.id.clone(),
                source,
                target,
                weight: e.weight,
                pi,
            });
        }
        Ok(FairGraph {
            gamma,
            vertices,
            edges,
            vertex_index,
            edge_index,
            out,
        })
    }

    pub fn gamma(&self) -> &Arc<BiGraph> {
        &self.gamma
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[FairVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[FairEdge] {
        &self.edges
    }

    pub fn vertex(&self, i: usize) -> &FairVertex {
        &self.vertices[i]
    }

    pub fn edge(&self, i: usize) -> &FairEdge {
        &self.edges[i]
    }

    pub fn vertex_ix(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_ix(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// `π⁻¹(a)` in id order.
    pub fn fiber(&self, a: VertexIx) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&i| self.vertices[i].pi == a)
    }

    pub fn to_data(&self) -> FairGraphData {
        let g = &*self.gamma;
        FairGraphData {
            vertices: self
                .vertices
                .iter()
                .map(|v| FairVertexRecord {
                    id: v.id.clone(),
                    pi: g.vertex_id(v.pi).to_string(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| FairEdgeRecord {
                    id: e.id.clone(),
                    source: self.vertices[e.source].id.clone(),
                    target: self.vertices[e.target].id.clone(),
                    weight: e.weight,
                    pi: g.edge_id(e.pi).to_string(),
                })
                .collect(),
        }
    }
}

/// Checks `Σ_{ε: α -> ·, π(ε) = e} w(ε) = δ_e` at every vertex and Γ-edge
/// leaving its image.
pub fn check_fair(l: &FairGraph, tol: f64) -> ValidationReport {
    let g = &*l.gamma;
    let mut report = ValidationReport::new();
    for a in g.vertices() {
        if l.fiber(a).next().is_none() {
            report.warn(Violation::new(
                ViolationCode::EmptyFiber,
                vec![g.vertex_id(a).to_string()],
                format!("no vertex projects to `{}`", g.vertex_id(a)),
            ));
        }
    }
    for (alpha, v) in l.vertices.iter().enumerate() {
        let mut sums: BTreeMap<EdgeIx, f64> = g.out_edges(v.pi).map(|e| (e, 0.0)).collect();
        for &k in &l.out[alpha] {
            *sums.get_mut(&l.edges[k].pi).expect("homomorphism") += l.edges[k].weight;
        }
        for (e, sum) in sums {
            let r = (sum - g.weight(e)).abs();
            if !(r <= tol) {
                report.push(
                    Violation::new(
                        ViolationCode::Unfair,
                        vec![v.id.clone(), g.edge_id(e).to_string()],
                        format!(
                            "weights over `{}` leaving `{}` sum to {sum}, expected {}",
                            g.edge_id(e),
                            v.id,
                            g.weight(e)
                        ),
                    )
                    .with_residual(r),
                );
            }
        }
    }
    report
}

/// An edge involution reversing direction, inverting weights and covering
/// the duality of Γ. `pairing[k]` is the partner of edge `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancedInvolution {
    pub pairing: Vec<usize>,
}

impl BalancedInvolution {
    pub fn to_id_map(&self, l: &FairGraph) -> BTreeMap<String, String> {
        self.pairing
            .iter()
            .enumerate()
            .map(|(k, &p)| (l.edges[k].id.clone(), l.edges[p].id.clone()))
            .collect()
    }

    pub fn fixed_points(&self) -> usize {
        self.pairing.iter().enumerate().filter(|(k, &p)| *k == p).count()
    }
}

fn same_weight(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(1.0)
}

/// Validates every involution invariant. Weight products are compared with
/// the scale-aware tolerance `2·tol·max(1, w, w')`.
pub fn check_involution(l: &FairGraph, inv: &BalancedInvolution, tol: f64) -> ValidationReport {
    let g = &*l.gamma;
    let mut report = ValidationReport::new();
    if inv.pairing.len() != l.edges.len() {
        report.push(Violation::new(
            ViolationCode::InvolutionBroken,
            vec![],
            "pairing does not cover every edge",
        ));
        return report;
    }
    for (k, &p) in inv.pairing.iter().enumerate() {
        let (a, b) = (&l.edges[k], &l.edges[p]);
        let mut fail = |why: &str| {
            report.push(Violation::new(
                ViolationCode::InvolutionBroken,
                vec![a.id.clone(), b.id.clone()],
                format!("`{}` ↔ `{}`: {why}", a.id, b.id),
            ))
        };
        if inv.pairing[p] != k {
            fail("not an involution");
        }
        if a.source != b.target || a.target != b.source {
            fail("does not reverse direction");
        }
        if b.pi != g.dual(a.pi) {
            fail("does not cover the duality of Γ");
        }
        let prod = a.weight * b.weight;
        if !((prod - 1.0).abs() <= 2.0 * tol * a.weight.max(b.weight).max(1.0)) {
            fail("weights are not reciprocal");
        }
    }
    report
}

/// A set of parallel edges with equal weight (within tolerance).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightGroup {
    pub source: usize,
    pub target: usize,
    pub pi: EdgeIx,
    pub weight: f64,
    /// Edge indices sorted by id.
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BalanceAnalysis {
    pub involution: Option<BalancedInvolution>,
    /// Groups with no partner group of the same size.
    pub unmatched: Vec<WeightGroup>,
}

impl BalanceAnalysis {
    pub fn report(&self, l: &FairGraph) -> ValidationReport {
        let g = &*l.gamma;
        let mut report = ValidationReport::new();
        for grp in &self.unmatched {
            let ids = grp.edges.iter().map(|&k| l.edges[k].id.clone()).collect();
            report.push(Violation::new(
                ViolationCode::UnmatchedWeightGroup,
                ids,
                format!(
                    "{} edge(s) `{}` -> `{}` over `{}` with weight {} have no reciprocal partners over `{}`",
                    grp.edges.len(),
                    l.vertices[grp.source].id,
                    l.vertices[grp.target].id,
                    g.edge_id(grp.pi),
                    grp.weight,
                    g.edge_id(g.dual(grp.pi)),
                ),
            ));
        }
        report
    }
}

type BucketKey = (usize, usize, EdgeIx);

/// Buckets by `(source, target, π)` and splits each bucket into weight groups
/// by a sorted sweep anchored at each group's smallest weight.
fn weight_groups(l: &FairGraph, tol: f64) -> BTreeMap<BucketKey, Vec<WeightGroup>> {
    let mut buckets: BTreeMap<BucketKey, Vec<usize>> = BTreeMap::new();
    for (k, e) in l.edges.iter().enumerate() {
        buckets.entry((e.source, e.target, e.pi)).or_default().push(k);
    }
    buckets
        .into_iter()
        .map(|(key, mut ks)| {
            ks.sort_by(|&a, &b| l.edges[a].weight.total_cmp(&l.edges[b].weight).then(a.cmp(&b)));
            let mut groups: Vec<WeightGroup> = Vec::new();
            for k in ks {
                let w = l.edges[k].weight;
                match groups.last_mut() {
                    Some(grp) if same_weight(grp.weight, w, tol) => grp.edges.push(k),
                    _ => groups.push(WeightGroup {
                        source: key.0,
                        target: key.1,
                        pi: key.2,
                        weight: w,
                        edges: vec![k],
                    }),
                }
            }
            for grp in &mut groups {
                grp.edges.sort();
            }
            (key, groups)
        })
        .collect()
}

/// Matches groups `lhs` (ascending weight) with `rhs` (ascending reciprocal
/// weight). Returns matched index pairs and pushes leftovers to `unmatched`.
fn match_reciprocal(
    lhs: &[&WeightGroup],
    rhs: &[&WeightGroup],
    tol: f64,
    unmatched: &mut Vec<WeightGroup>,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < lhs.len() && j < rhs.len() {
        let (x, y) = (lhs[i].weight, 1.0 / rhs[j].weight);
        if same_weight(x, y, tol) || same_weight(y, x, tol) {
            if lhs[i].edges.len() == rhs[j].edges.len() {
                pairs.push((i, j));
            } else {
                unmatched.push(lhs[i].clone());
                unmatched.push(rhs[j].clone());
            }
            i += 1;
            j += 1;
        } else if x < y {
            unmatched.push(lhs[i].clone());
            i += 1;
        } else {
            unmatched.push(rhs[j].clone());
            j += 1;
        }
    }
    unmatched.extend(lhs[i..].iter().map(|g| (*g).clone()));
    unmatched.extend(rhs[j..].iter().map(|g| (*g).clone()));
    pairs
}

fn pair_up(pairing: &mut [usize], a: &[usize], b: &[usize], shift: usize) {
    let n = b.len();
    for (i, &x) in a.iter().enumerate() {
        let y = b[(i + shift) % n];
        pairing[x] = y;
        pairing[y] = x;
    }
}

/// Group-count analysis with a deterministic choice of pairing. `variant`
/// selects among the pairings the counting argument allows: cross groups are
/// zipped after rotating the partner list by `variant`, and unit-weight
/// self-partner groups are paired consecutively for even `variant` and left
/// as fixed points for odd `variant`.
pub fn balance_analysis_variant(l: &FairGraph, tol: f64, variant: usize) -> BalanceAnalysis {
    let g = &*l.gamma;
    let buckets = weight_groups(l, tol);
    let mut pairing: Vec<usize> = (0..l.edges.len()).collect();
    let mut unmatched = Vec::new();
    let empty = Vec::new();
    for (&(s, t, e), groups) in &buckets {
        let partner_key = (t, s, g.dual(e));
        if partner_key == (s, t, e) {
            let is_unit = |grp: &&WeightGroup| same_weight(grp.weight, 1.0, tol);
            let units: Vec<&WeightGroup> = groups.iter().filter(is_unit).collect();
            for grp in units {
                if variant.is_multiple_of(2) {
                    for pair in grp.edges.chunks(2) {
                        if let [x, y] = *pair {
                            pairing[x] = y;
                            pairing[y] = x;
                        }
                    }
                }
            }
            let lows: Vec<&WeightGroup> = groups.iter().filter(|g| !is_unit(g) && g.weight < 1.0).collect();
            let mut highs: Vec<&WeightGroup> = groups.iter().filter(|g| !is_unit(g) && g.weight > 1.0).collect();
            highs.reverse();
            for (i, j) in match_reciprocal(&lows, &highs, tol, &mut unmatched) {
                pair_up(&mut pairing, &lows[i].edges, &highs[j].edges, variant);
            }
        } else if (s, t, e) < partner_key {
            let lhs: Vec<&WeightGroup> = groups.iter().collect();
            let mut rhs: Vec<&WeightGroup> = buckets.get(&partner_key).unwrap_or(&empty).iter().collect();
            rhs.reverse();
            for (i, j) in match_reciprocal(&lhs, &rhs, tol, &mut unmatched) {
                pair_up(&mut pairing, &lhs[i].edges, &rhs[j].edges, variant);
            }
        } else if !buckets.contains_key(&partner_key) {
            unmatched.extend(groups.iter().cloned());
        }
    }
    let involution = unmatched.is_empty().then_some(BalancedInvolution { pairing });
    BalanceAnalysis {
        involution,
        unmatched,
    }
}

pub fn balance_analysis(l: &FairGraph, tol: f64) -> BalanceAnalysis {
    balance_analysis_variant(l, tol, 0)
}

/// A balanced involution, if one exists. Requires a fair graph.
pub fn find_balanced_involution(l: &FairGraph, tol: f64) -> Result<Option<BalancedInvolution>, FairError> {
    let fair = check_fair(l, tol);
    if !fair.ok {
        return Err(FairError::NotFair(fair));
    }
    Ok(balance_analysis(l, tol).involution)
}

/// All distinct pairings reachable through [`balance_analysis_variant`] with
/// `variant < count`.
pub fn involution_variants(l: &FairGraph, tol: f64, count: usize) -> Vec<BalancedInvolution> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 0..count {
        if let Some(inv) = balance_analysis_variant(l, tol, k).involution {
            if seen.insert(inv.pairing.clone()) {
                out.push(inv);
            }
        }
    }
    out
}
