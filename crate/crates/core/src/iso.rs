//! Isomorphism of Γ-fair graphs respecting projection and weights.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classify::{same_gamma, ClassifyError};
use crate::fair::FairGraph;
use crate::graph::EdgeIx;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoWitness {
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, String>,
}

/// Assigns joint weight classes to the edges of both graphs by a sorted sweep
/// anchored at each class's smallest weight.
fn weight_classes(l1: &FairGraph, l2: &FairGraph, tol: f64) -> (Vec<usize>, Vec<usize>) {
    let mut all: Vec<(f64, usize, usize)> = l1
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| (e.weight, 0, k))
        .chain(l2.edges().iter().enumerate().map(|(k, e)| (e.weight, 1, k)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut classes = [vec![0; l1.edge_count()], vec![0; l2.edge_count()]];
    let mut anchor = f64::NAN;
    let mut class = 0;
    for (i, &(w, side, k)) in all.iter().enumerate() {
        if i == 0 {
            anchor = w;
        } else if (w - anchor).abs() > tol * anchor.abs().max(1.0) {
            class += 1;
            anchor = w;
        }
        classes[side][k] = class;
    }
    let [a, b] = classes;
    (a, b)
}

type Incidence = (u8, EdgeIx, usize);

struct Side<'a> {
    l: &'a FairGraph,
    class: Vec<usize>,
    /// For each ordered vertex pair, the sorted `(π, class)` list of edges.
    pairs: BTreeMap<(usize, usize), Vec<(EdgeIx, usize)>>,
    /// Incident edges per vertex: direction, π, class, other endpoint.
    incident: Vec<Vec<(Incidence, usize)>>,
}

impl<'a> Side<'a> {
    fn new(l: &'a FairGraph, class: Vec<usize>) -> Self {
        let mut pairs: BTreeMap<(usize, usize), Vec<(EdgeIx, usize)>> = BTreeMap::new();
        let mut incident = vec![Vec::new(); l.vertex_count()];
        for (k, e) in l.edges().iter().enumerate() {
            pairs.entry((e.source, e.target)).or_default().push((e.pi, class[k]));
            incident[e.source].push(((0, e.pi, class[k]), e.target));
            incident[e.target].push(((1, e.pi, class[k]), e.source));
        }
        for list in pairs.values_mut() {
            list.sort();
        }
        Side { l, class, pairs, incident }
    }

    fn pair(&self, a: usize, b: usize) -> &[(EdgeIx, usize)] {
        self.pairs.get(&(a, b)).map_or(&[], |v| v.as_slice())
    }
}

/// A vertex's color with the sorted colors of its incidences.
type Signature = (usize, Vec<(Incidence, usize)>);

/// Joint color refinement. Returns final colors, or `None` as soon as the
/// color histograms differ.
fn refine(s1: &Side, s2: &Side) -> Option<(Vec<usize>, Vec<usize>)> {
    let init = |s: &Side| -> Vec<usize> { s.l.vertices().iter().map(|v| v.pi.0).collect() };
    let mut colors = [init(s1), init(s2)];
    let mut count = usize::MAX;
    loop {
        let mut table: BTreeMap<Signature, usize> = BTreeMap::new();
        let mut sigs: [Vec<Signature>; 2] = [Vec::new(), Vec::new()];
        for (side, s) in [s1, s2].into_iter().enumerate() {
            for v in 0..s.l.vertex_count() {
                let mut nb: Vec<(Incidence, usize)> =
                    s.incident[v].iter().map(|&(inc, u)| (inc, colors[side][u])).collect();
                nb.sort();
                let sig = (colors[side][v], nb);
                table.entry(sig.clone()).or_insert(0);
                sigs[side].push(sig);
            }
        }
        for (i, id) in table.values_mut().enumerate() {
            *id = i;
        }
        let next = [
            sigs[0].iter().map(|s| table[s]).collect::<Vec<_>>(),
            sigs[1].iter().map(|s| table[s]).collect::<Vec<_>>(),
        ];
        let mut h1 = next[0].clone();
        let mut h2 = next[1].clone();
        h1.sort();
        h2.sort();
        if h1 != h2 {
            return None;
        }
        colors = next;
        if table.len() == count {
            let [a, b] = colors;
            return Some((a, b));
        }
        count = table.len();
    }
}

struct Search<'a> {
    s1: &'a Side<'a>,
    s2: &'a Side<'a>,
    c1: Vec<usize>,
    c2: Vec<usize>,
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
}

const UNSET: usize = usize::MAX;

impl Search<'_> {
    fn consistent(&self, v: usize, x: usize) -> bool {
        if self.s1.pair(v, v) != self.s2.pair(x, x) {
            return false;
        }
        for (u, &y) in self.map.iter().enumerate() {
            if y == UNSET || u == v {
                continue;
            }
            if self.s1.pair(v, u) != self.s2.pair(x, y) || self.s1.pair(u, v) != self.s2.pair(y, x) {
                return false;
            }
        }
        true
    }

    fn run(&mut self, depth: usize) -> bool {
        let Some(&v) = self.order.get(depth) else {
            return true;
        };
        for x in 0..self.c2.len() {
            if self.used[x] || self.c2[x] != self.c1[v] || !self.consistent(v, x) {
                continue;
            }
            self.map[v] = x;
            self.used[x] = true;
            if self.run(depth + 1) {
                return true;
            }
            self.map[v] = UNSET;
            self.used[x] = false;
        }
        false
    }
}

/// Searches for an isomorphism commuting with π and preserving weights within
/// `tol` (relative to `max(1, w)`).
pub fn fair_graph_isomorphic(l1: &FairGraph, l2: &FairGraph, tol: f64) -> Result<Option<IsoWitness>, ClassifyError> {
    if !same_gamma(l1.gamma(), l2.gamma()) {
        return Err(ClassifyError::GammaMismatch);
    }
    if l1.vertex_count() != l2.vertex_count() || l1.edge_count() != l2.edge_count() {
        return Ok(None);
    }
    let (k1, k2) = weight_classes(l1, l2, tol);
    let s1 = Side::new(l1, k1);
    let s2 = Side::new(l2, k2);
    let Some((c1, c2)) = refine(&s1, &s2) else {
        return Ok(None);
    };

    // Visit small color classes first, then follow adjacency so that each
    // new vertex is constrained by already placed neighbours.
    let mut size: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &c1 {
        *size.entry(c).or_default() += 1;
    }
    let mut seeds: Vec<usize> = (0..l1.vertex_count()).collect();
    seeds.sort_by_key(|&v| (size[&c1[v]], c1[v], v));
    let mut order = Vec::with_capacity(seeds.len());
    let mut placed = vec![false; seeds.len()];
    for &root in &seeds {
        if placed[root] {
            continue;
        }
        placed[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = s1.incident[v].iter().map(|&(_, u)| u).collect();
            nbrs.sort_by_key(|&u| (size[&c1[u]], c1[u], u));
            for u in nbrs {
                if !placed[u] {
                    placed[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }

    let n = l1.vertex_count();
    let mut search = Search {
        s1: &s1,
        s2: &s2,
        c1,
        c2,
        order,
        map: vec![UNSET; n],
        used: vec![false; n],
    };
    if !search.run(0) {
        return Ok(None);
    }
    let vmap = search.map;

    // Parallel edges: match by (π, class, weight, id) order.
    let group = |s: &Side, remap: &dyn Fn(usize) -> usize| {
        let mut m: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (k, e) in s.l.edges().iter().enumerate() {
            m.entry((remap(e.source), remap(e.target))).or_default().push(k);
        }
        for list in m.values_mut() {
            list.sort_by(|&a, &b| {
                let (ea, eb) = (s.l.edge(a), s.l.edge(b));
                (ea.pi, s.class[a])
                    .cmp(&(eb.pi, s.class[b]))
                    .then(ea.weight.total_cmp(&eb.weight))
                    .then(a.cmp(&b))
            });
        }
        m
    };
    let g1 = group(&s1, &|v| vmap[v]);
    let g2 = group(&s2, &|v| v);
    let mut emap = vec![UNSET; l1.edge_count()];
    for (key, list) in &g1 {
        let Some(other) = g2.get(key) else {
            return Ok(None);
        };
        if other.len() != list.len() {
            return Ok(None);
        }
        for (&a, &b) in list.iter().zip(other) {
            emap[a] = b;
        }
    }
    let witness = IsoWitness {
        vertex_map: (0..n).map(|v| (l1.vertex(v).id.clone(), l2.vertex(vmap[v]).id.clone())).collect(),
        edge_map: emap
            .iter()
            .enumerate()
            .map(|(a, &b)| (l1.edge(a).id.clone(), l2.edge(b).id.clone()))
            .collect(),
    };
    Ok(verify_iso_witness(l1, l2, &witness, tol).then_some(witness))
}

/// Checks every isomorphism condition of a witness directly.
pub fn verify_iso_witness(l1: &FairGraph, l2: &FairGraph, w: &IsoWitness, tol: f64) -> bool {
    if w.vertex_map.len() != l1.vertex_count() || w.edge_map.len() != l1.edge_count() {
        return false;
    }
    let vimg: BTreeSet<&String> = w.vertex_map.values().collect();
    let eimg: BTreeSet<&String> = w.edge_map.values().collect();
    if vimg.len() != l2.vertex_count() || eimg.len() != l2.edge_count() {
        return false;
    }
    let vmap = |i: usize| w.vertex_map.get(&l1.vertex(i).id).and_then(|id| l2.vertex_ix(id));
    for i in 0..l1.vertex_count() {
        match vmap(i) {
            Some(j) if l2.vertex(j).pi == l1.vertex(i).pi => {}
            _ => return false,
        }
    }
    for (k, e) in l1.edges().iter().enumerate() {
        let Some(m) = w.edge_map.get(&l1.edge(k).id).and_then(|id| l2.edge_ix(id)) else {
            return false;
        };
        let f = l2.edge(m);
        if f.pi != e.pi
            || Some(f.source) != vmap(e.source)
            || Some(f.target) != vmap(e.target)
            || (f.weight - e.weight).abs() > tol * e.weight.max(1.0)
        {
            return false;
        }
    }
    true
}
