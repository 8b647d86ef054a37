//! The two directions between fundamental solutions and balanced fair graphs.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::fair::{
    check_fair, check_involution, find_balanced_involution, BalancedInvolution, FairEdgeRecord, FairError,
    FairGraph, FairGraphData, FairVertexRecord,
};
use crate::graph::BiGraph;
use crate::iso::fair_graph_isomorphic;
use crate::linalg::{c64, CMatrix};
use crate::report::ValidationReport;
use crate::solution::{
    check_zigzag, cups_from_phi, phi_from_cups, AntiLinearBlock, BlockKey, FundamentalSolution, GradingFamily,
    SolutionError,
};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Fair(#[from] FairError),
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error("solution fails the zigzag relations: {0}")]
    NotZigzag(ValidationReport),
    #[error("graph is not balanced: {0}")]
    NotBalanced(ValidationReport),
    #[error("involution is invalid: {0}")]
    BadInvolution(ValidationReport),
    #[error("operands live over different base graphs")]
    GammaMismatch,
    #[error("dimension function fails its own sum check: {0}")]
    DimensionSelfCheck(ValidationReport),
    #[error("no random family for this base graph: {0}")]
    Unsupported(String),
}

pub(crate) fn same_gamma(a: &Arc<BiGraph>, b: &Arc<BiGraph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// The fair graph traced out by a solution: one vertex `(a, v)` per grading
/// index and `dim H^e_{vw}` edges `(e, v, w, k)` weighted by the spectrum of
/// `Φ*Φ`, ascending.
pub fn graph_from_solution(s: &FundamentalSolution, tol: f64) -> Result<FairGraph, ClassifyError> {
    let report = check_zigzag(s, tol);
    if !report.ok {
        return Err(ClassifyError::NotZigzag(report));
    }
    let g = s.gamma();
    let grading = |a, v: usize| s.gradings().set(a)[v].clone();
    let vname = |a, v| format!("({},{})", g.vertex_id(a), grading(a, v));
    let mut data = FairGraphData::default();
    for a in g.vertices() {
        for v in 0..s.gradings().len(a) {
            data.vertices.push(FairVertexRecord {
                id: vname(a, v),
                pi: g.vertex_id(a).to_string(),
            });
        }
    }
    for (key, phi) in phi_from_cups(s) {
        let (a, b) = (g.source(key.edge), g.target(key.edge));
        let e = g.edge_id(key.edge);
        for (k, lambda) in phi.spectrum().into_iter().enumerate() {
            data.edges.push(FairEdgeRecord {
                id: format!("({},{},{},{k})", e, grading(a, key.v), grading(b, key.w)),
                source: vname(a, key.v),
                target: vname(b, key.w),
                weight: lambda,
                pi: e.to_string(),
            });
        }
    }
    Ok(FairGraph::new(g.clone(), data)?)
}

/// The solution built from a balanced fair graph using the involution found
/// by [`find_balanced_involution`].
pub fn solution_from_graph(l: &FairGraph, tol: f64) -> Result<FundamentalSolution, ClassifyError> {
    let inv = find_balanced_involution(l, tol)?.ok_or_else(|| {
        ClassifyError::NotBalanced(crate::fair::balance_analysis(l, tol).report(l))
    })?;
    solution_from_graph_with(l, &inv, tol)
}

/// `J^a = π⁻¹(a)`, `H^e_{vw}` spanned by the edges `v -> w` over `e` (in id
/// order), and `Φ(ε) = w(ε)^{1/2} · pairing(ε)`.
pub fn solution_from_graph_with(
    l: &FairGraph,
    inv: &BalancedInvolution,
    tol: f64,
) -> Result<FundamentalSolution, ClassifyError> {
    let fair = check_fair(l, tol);
    if !fair.ok {
        return Err(FairError::NotFair(fair).into());
    }
    let report = check_involution(l, inv, tol);
    if !report.ok {
        return Err(ClassifyError::BadInvolution(report));
    }
    let g = l.gamma();
    let mut local = vec![0usize; l.vertex_count()];
    let mut sets: BTreeMap<String, Vec<String>> = g.vertex_ids().iter().map(|a| (a.clone(), Vec::new())).collect();
    for (i, v) in l.vertices().iter().enumerate() {
        let set = sets.get_mut(g.vertex_id(v.pi)).expect("known vertex");
        local[i] = set.len();
        set.push(v.id.clone());
    }
    let gradings = GradingFamily::new(g, &sets, true)?;

    let mut position = vec![0usize; l.edge_count()];
    let mut dims: BTreeMap<BlockKey, usize> = BTreeMap::new();
    let key_of = |k: usize| {
        let e = l.edge(k);
        BlockKey::new(e.pi, local[e.source], local[e.target])
    };
    for (k, pos) in position.iter_mut().enumerate() {
        let d = dims.entry(key_of(k)).or_default();
        *pos = *d;
        *d += 1;
    }
    let mut phi: BTreeMap<BlockKey, AntiLinearBlock> = BTreeMap::new();
    for (k, &p) in inv.pairing.iter().enumerate() {
        let key = key_of(k);
        let rows = dims[&key_of(p)];
        let block = phi.entry(key).or_insert_with(|| AntiLinearBlock {
            matrix: CMatrix::zeros(rows, dims[&key]),
        });
        block.matrix[(position[p], position[k])] = c64(l.edge(k).weight.sqrt(), 0.0);
    }
    Ok(cups_from_phi(g.clone(), gradings, &phi)?)
}

/// Unitary equivalence of the induced modules, decided through isomorphism
/// of the induced fair graphs.
pub fn solutions_equivalent(s: &FundamentalSolution, t: &FundamentalSolution, tol: f64) -> Result<bool, ClassifyError> {
    if !same_gamma(s.gamma(), t.gamma()) {
        return Err(ClassifyError::GammaMismatch);
    }
    let ls = graph_from_solution(s, tol)?;
    let lt = graph_from_solution(t, tol)?;
    Ok(fair_graph_isomorphic(&ls, &lt, tol)?.is_some())
}
