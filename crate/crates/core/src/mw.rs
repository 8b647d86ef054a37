//! Detection of MW-type graphs: a positive dimension function `d` with
//! `w(α -> β) = d(β)/d(α)` on every edge.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::classify::ClassifyError;
use crate::fair::{balance_analysis, check_fair, BalancedInvolution, FairError, FairGraph};
use crate::report::{ValidationReport, Violation, ViolationCode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionFunction {
    pub d: BTreeMap<String, f64>,
}

/// A closed walk whose weight product is not one. Steps against an edge's
/// direction are taken along its involution partner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleWitness {
    pub edges: Vec<String>,
    pub product: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MwCheck {
    Dimension(DimensionFunction),
    Inconsistent(CycleWitness),
}

impl MwCheck {
    pub fn dimension(&self) -> Option<&DimensionFunction> {
        match self {
            MwCheck::Dimension(d) => Some(d),
            MwCheck::Inconsistent(_) => None,
        }
    }
}

/// Both sum conditions: for each `α` over `a` and `e: a -> b`,
/// `Σ_{ε: α -> β} d(β)/d(α) = δ_e`, and for each `β` over `b`,
/// `Σ_{ε: α -> β} d(α)/d(β) = δ_e`.
pub fn verify_dimension_function(l: &FairGraph, d: &DimensionFunction, tol: f64) -> ValidationReport {
    let g = l.gamma();
    let val: Vec<f64> = l.vertices().iter().map(|v| d.d.get(&v.id).copied().unwrap_or(f64::NAN)).collect();
    let mut outgoing: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut incoming: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, v) in l.vertices().iter().enumerate() {
        for (e, edge) in g.edges() {
            if edge.source == v.pi {
                outgoing.insert((i, e.0), 0.0);
            }
            if edge.target == v.pi {
                incoming.insert((i, e.0), 0.0);
            }
        }
    }
    for e in l.edges() {
        *outgoing.get_mut(&(e.source, e.pi.0)).unwrap() += val[e.target] / val[e.source];
        *incoming.get_mut(&(e.target, e.pi.0)).unwrap() += val[e.source] / val[e.target];
    }
    let mut report = ValidationReport::new();
    for (dir, sums) in [("out of", &outgoing), ("into", &incoming)] {
        for (&(i, e), &sum) in sums {
            let delta = g.weight(crate::graph::EdgeIx(e));
            let r = (sum - delta).abs();
            if !(r <= tol * delta.max(1.0)) {
                let eid = g.edge_id(crate::graph::EdgeIx(e)).to_string();
                report.push(
                    Violation::new(
                        ViolationCode::DimensionSum,
                        vec![l.vertex(i).id.clone(), eid.clone()],
                        format!("dimension ratios {dir} `{}` over `{eid}` sum to {sum}, expected {delta}", l.vertex(i).id),
                    )
                    .with_residual(r),
                );
            }
        }
    }
    report
}

/// Propagates `d` along a breadth-first spanning forest rooted at the
/// smallest vertex id of each component, then tests every remaining edge.
/// Edges between distinct vertices are tested before self-loops.
pub fn check_mw_type(l: &FairGraph, tol: f64) -> Result<MwCheck, ClassifyError> {
    let fair = check_fair(l, tol);
    if !fair.ok {
        return Err(FairError::NotFair(fair).into());
    }
    let analysis = balance_analysis(l, tol);
    let inv = analysis
        .involution
        .clone()
        .ok_or_else(|| ClassifyError::NotBalanced(analysis.report(l)))?;
    let g = l.gamma();
    let n = l.vertex_count();

    let mut order: Vec<usize> = (0..l.edge_count()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (l.edge(a), l.edge(b));
        (g.edge_id(ea.pi), &l.vertex(ea.source).id, &l.vertex(ea.target).id, a)
            .cmp(&(g.edge_id(eb.pi), &l.vertex(eb.source).id, &l.vertex(eb.target).id, b))
    });
    let mut incident = vec![Vec::new(); n];
    for &k in &order {
        let e = l.edge(k);
        if e.source != e.target {
            incident[e.source].push(k);
            incident[e.target].push(k);
        }
    }

    let mut d = vec![f64::NAN; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut tree = vec![false; l.edge_count()];
    for root in 0..n {
        if !d[root].is_nan() {
            continue;
        }
        d[root] = 1.0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &k in &incident[u] {
                let e = l.edge(k);
                let (x, value) = if e.source == u {
                    (e.target, d[u] * e.weight)
                } else {
                    (e.source, d[u] / e.weight)
                };
                if d[x].is_nan() {
                    d[x] = value;
                    parent[x] = Some(k);
                    depth[x] = depth[u] + 1;
                    tree[k] = true;
                    queue.push_back(x);
                }
            }
        }
    }

    let (loops, others): (Vec<usize>, Vec<usize>) =
        order.iter().copied().filter(|&k| !tree[k]).partition(|&k| l.edge(k).source == l.edge(k).target);
    for k in others.into_iter().chain(loops) {
        let e = l.edge(k);
        let ratio = d[e.target] / d[e.source];
        if (ratio - e.weight).abs() > tol * e.weight.max(1.0) {
            return Ok(MwCheck::Inconsistent(witness_cycle(l, &inv, &parent, &depth, k)));
        }
    }

    let dim = DimensionFunction {
        d: (0..n).map(|i| (l.vertex(i).id.clone(), d[i])).collect(),
    };
    let report = verify_dimension_function(l, &dim, tol.max(1e-9));
    if !report.ok {
        return Err(ClassifyError::DimensionSelfCheck(report));
    }
    Ok(MwCheck::Dimension(dim))
}

/// The closed walk `α -ε-> β ~~> α` returning through the spanning tree.
fn witness_cycle(
    l: &FairGraph,
    inv: &BalancedInvolution,
    parent: &[Option<usize>],
    depth: &[usize],
    k: usize,
) -> CycleWitness {
    let e = l.edge(k);
    let other = |k: usize, v: usize| {
        let e = l.edge(k);
        if e.source == v {
            e.target
        } else {
            e.source
        }
    };
    // Oriented step from `from` across tree edge `t`.
    let step = |t: usize, from: usize| if l.edge(t).source == from { t } else { inv.pairing[t] };

    let (mut up, mut down) = (e.target, e.source);
    let mut ascent = Vec::new();
    let mut descent = Vec::new();
    while up != down {
        if depth[up] >= depth[down] {
            let t = parent[up].expect("non-root");
            ascent.push(step(t, up));
            up = other(t, up);
        } else {
            let t = parent[down].expect("non-root");
            let above = other(t, down);
            descent.push(step(t, above));
            down = above;
        }
    }
    descent.reverse();
    let mut edges = vec![k];
    edges.extend(ascent);
    edges.extend(descent);
    let product = edges.iter().map(|&x| l.edge(x).weight).product();
    CycleWitness {
        edges: edges.into_iter().map(|x| l.edge(x).id.clone()).collect(),
        product,
    }
}
