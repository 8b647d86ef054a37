//! TLJ(Γ) diagrams as labelled non-crossing matchings, and their linear
//! combinations.
//!
//! A diagram has `n` bottom points and `m` top points. Boundary point `i < n`
//! is the `i`-th bottom point (left to right) and point `n + j` is the `j`-th
//! top point (left to right). The matching is stored as a partner array over
//! these `n + m` indices. Closed loops are never stored; they are traded for
//! their weight the moment a composition produces them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{BiGraph, EdgeIx, GraphError, VertexIx};
use crate::report::{ValidationReport, Violation, ViolationCode};

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("path edges do not compose at position {position}")]
    BrokenPath { position: usize },
    #[error("an empty path needs an explicit vertex")]
    MissingVertex,
    #[error("not a perfect matching: {0}")]
    NotPerfectMatching(String),
    #[error("invalid diagram: {0}")]
    Invalid(ValidationReport),
    #[error("boundary mismatch at position {position}: {below} below vs {above} above")]
    BoundaryMismatch {
        position: usize,
        below: String,
        above: String,
    },
    #[error("vertex mismatch: left ends at `{left}`, right starts at `{right}`")]
    VertexMismatch { left: String, right: String },
    #[error("operands live over different base graphs")]
    GammaMismatch,
    #[error("terms must share boundary paths")]
    TermBoundary,
}

/// A path in Γ; for the empty path, the vertex it sits at.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaPath {
    edges: Vec<EdgeIx>,
    start: VertexIx,
    end: VertexIx,
}

impl GammaPath {
    pub fn empty(at: VertexIx) -> Self {
        GammaPath {
            edges: Vec::new(),
            start: at,
            end: at,
        }
    }

    /// A path through the given edges. `at` is required for the empty path and
    /// must agree with the first source otherwise.
    pub fn new(g: &BiGraph, edges: Vec<EdgeIx>, at: Option<VertexIx>) -> Result<Self, DiagramError> {
        for &e in &edges {
            if e.0 >= g.edge_count() {
                return Err(GraphError::UnknownEdge(format!("#{}", e.0)).into());
            }
        }
        let Some(&first) = edges.first() else {
            return at.map(GammaPath::empty).ok_or(DiagramError::MissingVertex);
        };
        if let Some(at) = at {
            if at != g.source(first) {
                return Err(DiagramError::BrokenPath { position: 0 });
            }
        }
        for (i, pair) in edges.windows(2).enumerate() {
            if g.target(pair[0]) != g.source(pair[1]) {
                return Err(DiagramError::BrokenPath { position: i + 1 });
            }
        }
        let start = g.source(first);
        let end = g.target(*edges.last().unwrap());
        Ok(GammaPath { edges, start, end })
    }

    pub fn from_ids(g: &BiGraph, ids: &[&str], at: Option<&str>) -> Result<Self, DiagramError> {
        let edges = ids
            .iter()
            .map(|id| g.edge_ix(id))
            .collect::<Result<Vec<_>, _>>()?;
        let at = at.map(|v| g.vertex_ix(v)).transpose()?;
        GammaPath::new(g, edges, at)
    }

    pub fn edges(&self) -> &[EdgeIx] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn start(&self) -> VertexIx {
        self.start
    }

    pub fn end(&self) -> VertexIx {
        self.end
    }

    /// Vertex sitting before edge `p` (or the end vertex for `p == len`).
    pub fn vertex_at(&self, g: &BiGraph, p: usize) -> VertexIx {
        if p < self.edges.len() {
            g.source(self.edges[p])
        } else {
            self.end
        }
    }

    pub fn concat(&self, other: &GammaPath) -> Option<GammaPath> {
        if self.end != other.start {
            return None;
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Some(GammaPath {
            edges,
            start: self.start,
            end: other.end,
        })
    }

    /// Inserts `e, dual(e)` before position `p`.
    pub fn insert_pair(&self, g: &BiGraph, p: usize, e: EdgeIx) -> Result<GammaPath, DiagramError> {
        let mut edges = self.edges.clone();
        edges.splice(p..p, [e, g.dual(e)]);
        GammaPath::new(g, edges, Some(self.start))
    }

    /// Removes the two edges at positions `p, p + 1`.
    pub fn remove_pair(&self, g: &BiGraph, p: usize) -> Result<GammaPath, DiagramError> {
        let mut edges = self.edges.clone();
        edges.drain(p..p + 2);
        GammaPath::new(g, edges, Some(self.start))
    }

    pub fn labels<'g>(&self, g: &'g BiGraph) -> Vec<&'g str> {
        self.edges.iter().map(|&e| g.edge_id(e)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Bottom,
    Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Endpoint {
    pub side: Side,
    pub index: usize,
}

impl Endpoint {
    pub fn bottom(index: usize) -> Self {
        Endpoint {
            side: Side::Bottom,
            index,
        }
    }

    pub fn top(index: usize) -> Self {
        Endpoint {
            side: Side::Top,
            index,
        }
    }
}

/// A single loop-free diagram. Construction only checks that the arcs form
/// a perfect matching; planarity and labels are checked by
/// [`validate_diagram`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagram {
    bottom: GammaPath,
    top: GammaPath,
    partner: Vec<usize>,
}

impl Diagram {
    pub fn from_arcs(
        bottom: GammaPath,
        top: GammaPath,
        arcs: &[(Endpoint, Endpoint)],
    ) -> Result<Self, DiagramError> {
        let n = bottom.len();
        let m = top.len();
        let flat = |p: Endpoint| -> Result<usize, DiagramError> {
            match p.side {
                Side::Bottom if p.index < n => Ok(p.index),
                Side::Top if p.index < m => Ok(n + p.index),
                _ => Err(DiagramError::NotPerfectMatching(format!(
                    "endpoint {:?} {} out of range",
                    p.side, p.index
                ))),
            }
        };
        let mut partner = vec![usize::MAX; n + m];
        for &(a, b) in arcs {
            let (x, y) = (flat(a)?, flat(b)?);
            if x == y || partner[x] != usize::MAX || partner[y] != usize::MAX {
                return Err(DiagramError::NotPerfectMatching(format!(
                    "endpoint used twice in arc {a:?}-{b:?}"
                )));
            }
            partner[x] = y;
            partner[y] = x;
        }
        if let Some(free) = partner.iter().position(|&p| p == usize::MAX) {
            return Err(DiagramError::NotPerfectMatching(format!(
                "boundary point {} is unmatched",
                free
            )));
        }
        Ok(Diagram {
            bottom,
            top,
            partner,
        })
    }

    fn from_partner(bottom: GammaPath, top: GammaPath, partner: Vec<usize>) -> Self {
        debug_assert_eq!(partner.len(), bottom.len() + top.len());
        Diagram {
            bottom,
            top,
            partner,
        }
    }

    pub fn bottom(&self) -> &GammaPath {
        &self.bottom
    }

    pub fn top(&self) -> &GammaPath {
        &self.top
    }

    fn endpoint(&self, x: usize) -> Endpoint {
        let n = self.bottom.len();
        if x < n {
            Endpoint::bottom(x)
        } else {
            Endpoint::top(x - n)
        }
    }

    /// Arcs in canonical order, each with its smaller boundary index first.
    pub fn arcs(&self) -> Vec<(Endpoint, Endpoint)> {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(x, &y)| x < y)
            .map(|(x, &y)| (self.endpoint(x), self.endpoint(y)))
            .collect()
    }

    pub fn partner_of(&self, p: Endpoint) -> Endpoint {
        let x = match p.side {
            Side::Bottom => p.index,
            Side::Top => self.bottom.len() + p.index,
        };
        self.endpoint(self.partner[x])
    }

    fn label(&self, x: usize) -> EdgeIx {
        let n = self.bottom.len();
        if x < n {
            self.bottom.edges[x]
        } else {
            self.top.edges[x - n]
        }
    }

    fn is_bottom(&self, x: usize) -> bool {
        x < self.bottom.len()
    }
}

/// Identity diagram: bottom point `i` joined to top point `i`.
pub fn identity_diagram(p: &GammaPath) -> Diagram {
    let n = p.len();
    let partner = (0..2 * n).map(|x| if x < n { x + n } else { x - n }).collect();
    Diagram::from_partner(p.clone(), p.clone(), partner)
}

/// The cup `1 ⇒ e ⊗ dual(e)` at `source(e)`.
pub fn make_cup(g: &BiGraph, e: EdgeIx) -> Result<Diagram, DiagramError> {
    if e.0 >= g.edge_count() {
        return Err(GraphError::UnknownEdge(format!("#{}", e.0)).into());
    }
    let bottom = GammaPath::empty(g.source(e));
    let top = GammaPath::new(g, vec![e, g.dual(e)], None)?;
    Ok(Diagram::from_partner(bottom, top, vec![1, 0]))
}

/// The cap `e ⊗ dual(e) ⇒ 1`, adjoint of [`make_cup`].
pub fn make_cap(g: &BiGraph, e: EdgeIx) -> Result<Diagram, DiagramError> {
    let cup = make_cup(g, e)?;
    Ok(reflect(&cup))
}

fn reflect(d: &Diagram) -> Diagram {
    let n = d.bottom.len();
    let m = d.top.len();
    let remap = |x: usize| if x < n { m + x } else { x - n };
    let mut partner = vec![0; n + m];
    for (x, &y) in d.partner.iter().enumerate() {
        partner[remap(x)] = remap(y);
    }
    Diagram::from_partner(d.top.clone(), d.bottom.clone(), partner)
}

fn check_path(g: &BiGraph, p: &GammaPath, which: &str, report: &mut ValidationReport) {
    if let Err(err) = GammaPath::new(g, p.edges.clone(), Some(p.start)) {
        report.push(Violation::new(
            ViolationCode::InvalidPath,
            vec![which.to_string()],
            format!("{which} path is not a path in the base graph: {err}"),
        ));
    }
}

/// Checks path compatibility, planarity and the label rule.
///
/// Planarity is decided by deleting same-side arcs between adjacent surviving
/// points; the diagram is planar iff nothing but an order-preserving set of
/// through-strands remains.
pub fn validate_diagram(g: &BiGraph, d: &Diagram) -> ValidationReport {
    let mut report = ValidationReport::new();
    check_path(g, &d.bottom, "bottom", &mut report);
    check_path(g, &d.top, "top", &mut report);
    if !report.ok {
        return report;
    }
    if d.bottom.start != d.top.start || d.bottom.end != d.top.end {
        report.push(Violation::new(
            ViolationCode::PathMismatch,
            vec![],
            format!(
                "bottom runs {} -> {}, top runs {} -> {}",
                g.vertex_id(d.bottom.start),
                g.vertex_id(d.bottom.end),
                g.vertex_id(d.top.start),
                g.vertex_id(d.top.end)
            ),
        ));
    }

    let n = d.bottom.len();
    let m = d.top.len();
    let mut crossing = false;
    let mut residue = [Vec::new(), Vec::new()];
    for (side, range) in [(0usize, 0..n), (1, n..n + m)] {
        let stack = &mut residue[side];
        for x in range {
            let y = d.partner[x];
            let same_side = d.is_bottom(x) == d.is_bottom(y);
            if same_side && y < x {
                if stack.last() == Some(&y) {
                    stack.pop();
                } else {
                    crossing = true;
                }
            } else {
                stack.push(x);
            }
        }
        if stack.iter().any(|&x| d.is_bottom(x) == d.is_bottom(d.partner[x])) {
            crossing = true;
        }
    }
    if !crossing {
        let [bottoms, tops] = &residue;
        crossing = bottoms.len() != tops.len()
            || bottoms.iter().zip(tops).any(|(&b, &t)| d.partner[b] != t);
    }
    if crossing {
        report.push(Violation::new(
            ViolationCode::Crossing,
            vec![],
            "arcs cross or a same-side arc encloses a through-strand",
        ));
    }

    for (x, &y) in d.partner.iter().enumerate() {
        if x > y {
            continue;
        }
        let (a, b) = (d.label(x), d.label(y));
        let same_side = d.is_bottom(x) == d.is_bottom(y);
        let fine = if same_side { b == g.dual(a) } else { a == b };
        if !fine {
            let (pa, pb) = (d.endpoint(x), d.endpoint(y));
            report.push(Violation::new(
                ViolationCode::LabelRule,
                vec![g.edge_id(a).to_string(), g.edge_id(b).to_string()],
                format!(
                    "arc {:?}{}-{:?}{} joins `{}` and `{}`",
                    pa.side,
                    pa.index,
                    pb.side,
                    pb.index,
                    g.edge_id(a),
                    g.edge_id(b)
                ),
            ));
        }
    }
    report
}

/// A finite linear combination of diagrams sharing the same boundary.
#[derive(Clone, Debug)]
pub struct Morphism2 {
    gamma: Arc<BiGraph>,
    bottom: GammaPath,
    top: GammaPath,
    terms: BTreeMap<Vec<usize>, Complex64>,
}

impl PartialEq for Morphism2 {
    fn eq(&self, other: &Self) -> bool {
        same_gamma(&self.gamma, &other.gamma)
            && self.bottom == other.bottom
            && self.top == other.top
            && self.terms == other.terms
    }
}

fn same_gamma(a: &Arc<BiGraph>, b: &Arc<BiGraph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn is_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

impl Morphism2 {
    pub fn zero(gamma: Arc<BiGraph>, bottom: GammaPath, top: GammaPath) -> Self {
        Morphism2 {
            gamma,
            bottom,
            top,
            terms: BTreeMap::new(),
        }
    }

    /// Wraps a single diagram with coefficient one, after validating it.
    pub fn from_diagram(gamma: Arc<BiGraph>, d: Diagram) -> Result<Self, DiagramError> {
        Self::from_terms(gamma, d.bottom.clone(), d.top.clone(), [(d, Complex64::new(1.0, 0.0))])
    }

    pub fn from_terms(
        gamma: Arc<BiGraph>,
        bottom: GammaPath,
        top: GammaPath,
        terms: impl IntoIterator<Item = (Diagram, Complex64)>,
    ) -> Result<Self, DiagramError> {
        let mut out = Morphism2::zero(gamma, bottom, top);
        for (d, c) in terms {
            if d.bottom != out.bottom || d.top != out.top {
                return Err(DiagramError::TermBoundary);
            }
            let report = validate_diagram(&out.gamma, &d);
            if !report.ok {
                return Err(DiagramError::Invalid(report));
            }
            out.accumulate(d.partner, c);
        }
        Ok(out)
    }

    pub fn identity(gamma: Arc<BiGraph>, p: &GammaPath) -> Self {
        let d = identity_diagram(p);
        let mut out = Morphism2::zero(gamma, p.clone(), p.clone());
        out.accumulate(d.partner, Complex64::new(1.0, 0.0));
        out
    }

    pub fn cup(gamma: Arc<BiGraph>, e: EdgeIx) -> Result<Self, DiagramError> {
        let d = make_cup(&gamma, e)?;
        Morphism2::from_diagram(gamma, d)
    }

    pub fn cap(gamma: Arc<BiGraph>, e: EdgeIx) -> Result<Self, DiagramError> {
        let d = make_cap(&gamma, e)?;
        Morphism2::from_diagram(gamma, d)
    }

    fn accumulate(&mut self, key: Vec<usize>, c: Complex64) {
        let entry = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if is_zero(*entry) {
            let zero_keys: Vec<_> = self
                .terms
                .iter()
                .filter(|(_, v)| is_zero(**v))
                .map(|(k, _)| k.clone())
                .collect();
            for k in zero_keys {
                self.terms.remove(&k);
            }
        }
    }

    pub fn gamma(&self) -> &Arc<BiGraph> {
        &self.gamma
    }

    pub fn bottom(&self) -> &GammaPath {
        &self.bottom
    }

    pub fn top(&self) -> &GammaPath {
        &self.top
    }

    /// Number of diagrams with nonzero coefficient.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Diagram, Complex64)> + '_ {
        self.terms.iter().map(|(k, &c)| {
            (
                Diagram::from_partner(self.bottom.clone(), self.top.clone(), k.clone()),
                c,
            )
        })
    }

    pub fn coefficient(&self, d: &Diagram) -> Complex64 {
        if d.bottom != self.bottom || d.top != self.top {
            return Complex64::new(0.0, 0.0);
        }
        self.terms
            .get(&d.partner)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Morphism2 {
        let mut out = Morphism2::zero(self.gamma.clone(), self.bottom.clone(), self.top.clone());
        for (k, &v) in &self.terms {
            out.accumulate(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Morphism2) -> Result<Morphism2, DiagramError> {
        if !same_gamma(&self.gamma, &other.gamma) {
            return Err(DiagramError::GammaMismatch);
        }
        if self.bottom != other.bottom || self.top != other.top {
            return Err(DiagramError::TermBoundary);
        }
        let mut out = self.clone();
        for (k, &v) in &other.terms {
            out.accumulate(k.clone(), v);
        }
        Ok(out)
    }

    /// Largest coefficient difference against `other` over the union of terms.
    pub fn max_coefficient_diff(&self, other: &Morphism2) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, v) in &self.terms {
            let w = other.terms.get(k).copied().unwrap_or_default();
            worst = worst.max((v - w).norm());
        }
        for (k, w) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(w.norm());
            }
        }
        worst
    }
}

impl fmt::Display for Morphism2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.gamma;
        write!(
            f,
            "[{}] => [{}]:",
            self.bottom.labels(g).join(" "),
            self.top.labels(g).join(" ")
        )?;
        if self.terms.is_empty() {
            return write!(f, " 0");
        }
        for (d, c) in self.terms() {
            write!(f, " ({c})·{:?}", d.arcs())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Layer {
    Lower,
    Upper,
}

/// Vertical stacking: `lower` is applied first, `upper` is placed on top of it.
/// Every closed loop formed at the interface contributes its edge weight.
pub fn compose_vertical(lower: &Morphism2, upper: &Morphism2) -> Result<Morphism2, DiagramError> {
    if !same_gamma(&lower.gamma, &upper.gamma) {
        return Err(DiagramError::GammaMismatch);
    }
    let g = &*lower.gamma;
    let mid = &lower.top;
    if *mid != upper.bottom {
        let a = mid.edges();
        let b = upper.bottom.edges();
        let position = a.iter().zip(b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        let show = |p: &[EdgeIx]| {
            p.get(position)
                .map(|&e| format!("`{}`", g.edge_id(e)))
                .unwrap_or_else(|| "end of path".to_string())
        };
        return Err(DiagramError::BoundaryMismatch {
            position,
            below: show(a),
            above: show(b),
        });
    }

    let n = lower.bottom.len();
    let m = mid.len();
    let k = upper.top.len();
    let mut out = Morphism2::zero(lower.gamma.clone(), lower.bottom.clone(), upper.top.clone());
    for (lk, &lc) in &lower.terms {
        for (uk, &uc) in &upper.terms {
            let (partner, loops) = glue(lk, n, m, uk, k, mid.edges(), g);
            let scalar: f64 = loops.iter().map(|&e| g.weight(e)).product();
            out.accumulate(partner, lc * uc * scalar);
        }
    }
    Ok(out)
}

/// Glues two matchings along the `m` interface points. Returns the combined
/// matching and one label per closed loop.
fn glue(
    lower: &[usize],
    n: usize,
    m: usize,
    upper: &[usize],
    k: usize,
    mid_labels: &[EdgeIx],
    g: &BiGraph,
) -> (Vec<usize>, Vec<EdgeIx>) {
    let mut seen = vec![false; m];
    let exit = |mut layer: Layer, mut pt: usize, seen: &mut Vec<bool>| -> usize {
        loop {
            match layer {
                Layer::Lower => {
                    let q = lower[pt];
                    if q < n {
                        return q;
                    }
                    seen[q - n] = true;
                    layer = Layer::Upper;
                    pt = q - n;
                }
                Layer::Upper => {
                    let q = upper[pt];
                    if q >= m {
                        return n + (q - m);
                    }
                    seen[q] = true;
                    layer = Layer::Lower;
                    pt = n + q;
                }
            }
        }
    };

    let mut partner = vec![usize::MAX; n + k];
    for i in 0..n {
        if partner[i] == usize::MAX {
            let j = exit(Layer::Lower, i, &mut seen);
            partner[i] = j;
            partner[j] = i;
        }
    }
    for j in 0..k {
        if partner[n + j] == usize::MAX {
            let i = exit(Layer::Upper, m + j, &mut seen);
            partner[n + j] = i;
            partner[i] = n + j;
        }
    }

    let mut loops = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let label = mid_labels[start];
        let mut j = start;
        loop {
            seen[j] = true;
            debug_assert!(mid_labels[j] == label || mid_labels[j] == g.dual(label));
            let across = lower[n + j] - n;
            seen[across] = true;
            debug_assert!(mid_labels[across] == label || mid_labels[across] == g.dual(label));
            j = upper[across];
            if j == start {
                break;
            }
        }
        loops.push(label);
    }
    (partner, loops)
}

/// Side-by-side juxtaposition, `left` then `right`.
pub fn compose_horizontal(left: &Morphism2, right: &Morphism2) -> Result<Morphism2, DiagramError> {
    if !same_gamma(&left.gamma, &right.gamma) {
        return Err(DiagramError::GammaMismatch);
    }
    let g = &*left.gamma;
    let mismatch = |a: VertexIx, b: VertexIx| DiagramError::VertexMismatch {
        left: g.vertex_id(a).to_string(),
        right: g.vertex_id(b).to_string(),
    };
    let bottom = left
        .bottom
        .concat(&right.bottom)
        .ok_or_else(|| mismatch(left.bottom.end, right.bottom.start))?;
    let top = left
        .top
        .concat(&right.top)
        .ok_or_else(|| mismatch(left.top.end, right.top.start))?;

    let (nb1, nt1) = (left.bottom.len(), left.top.len());
    let (nb2, nt2) = (right.bottom.len(), right.top.len());
    let map_left = |x: usize| if x < nb1 { x } else { nb1 + nb2 + (x - nb1) };
    let map_right = |y: usize| if y < nb2 { nb1 + y } else { nb1 + nb2 + nt1 + (y - nb2) };

    let mut out = Morphism2::zero(left.gamma.clone(), bottom, top);
    for (lk, &lc) in &left.terms {
        for (rk, &rc) in &right.terms {
            let mut partner = vec![0; nb1 + nb2 + nt1 + nt2];
            for (x, &y) in lk.iter().enumerate() {
                partner[map_left(x)] = map_left(y);
            }
            for (x, &y) in rk.iter().enumerate() {
                partner[map_right(x)] = map_right(y);
            }
            out.accumulate(partner, lc * rc);
        }
    }
    Ok(out)
}

/// Reflection in a horizontal axis with conjugated coefficients.
pub fn adjoint(f: &Morphism2) -> Morphism2 {
    let mut out = Morphism2::zero(f.gamma.clone(), f.top.clone(), f.bottom.clone());
    for (key, &c) in &f.terms {
        let d = Diagram::from_partner(f.bottom.clone(), f.top.clone(), key.clone());
        out.accumulate(reflect(&d).partner, c.conj());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SliceKind {
    Identity,
    /// Inserts `e, dual(e)` at `position`.
    Cup { position: usize, edge: EdgeIx },
    /// Removes `e, dual(e)` from `position`.
    Cap { position: usize, edge: EdgeIx },
}

/// One horizontal strip: identity strands plus at most one cup or cap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementarySlice {
    pub bottom: GammaPath,
    pub top: GammaPath,
    pub kind: SliceKind,
}

impl ElementarySlice {
    pub fn to_diagram(&self) -> Diagram {
        match self.kind {
            SliceKind::Identity => identity_diagram(&self.bottom),
            SliceKind::Cup { position, .. } => {
                let n = self.bottom.len();
                let mut partner = vec![0; 2 * n + 2];
                for i in 0..n {
                    let j = if i < position { i } else { i + 2 };
                    partner[i] = n + j;
                    partner[n + j] = i;
                }
                partner[n + position] = n + position + 1;
                partner[n + position + 1] = n + position;
                Diagram::from_partner(self.bottom.clone(), self.top.clone(), partner)
            }
            SliceKind::Cap { position, edge } => {
                let cup = ElementarySlice {
                    bottom: self.top.clone(),
                    top: self.bottom.clone(),
                    kind: SliceKind::Cup { position, edge },
                };
                reflect(&cup.to_diagram())
            }
        }
    }
}

/// Tie-break among simultaneously removable arcs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SweepOrder {
    #[default]
    LeftmostFirst,
    RightmostFirst,
}

/// Cuts a valid diagram into elementary slices, bottom to top: all caps
/// (innermost first), then all cups (innermost last). A diagram with no
/// arcs yields a single identity slice.
pub fn decompose_to_slices(g: &BiGraph, d: &Diagram) -> Result<Vec<ElementarySlice>, DiagramError> {
    decompose_with_order(g, d, SweepOrder::LeftmostFirst)
}

pub fn decompose_with_order(
    g: &BiGraph,
    d: &Diagram,
    order: SweepOrder,
) -> Result<Vec<ElementarySlice>, DiagramError> {
    let report = validate_diagram(g, d);
    if !report.ok {
        return Err(DiagramError::Invalid(report));
    }
    let n = d.bottom.len();
    let m = d.top.len();

    let pick = |points: &[usize]| -> Option<usize> {
        let removable = (0..points.len().saturating_sub(1))
            .filter(|&p| d.partner[points[p]] == points[p + 1]);
        match order {
            SweepOrder::LeftmostFirst => removable.min(),
            SweepOrder::RightmostFirst => removable.max(),
        }
    };

    let mut slices = Vec::new();
    let mut points: Vec<usize> = (0..n).collect();
    let mut path = d.bottom.clone();
    while let Some(p) = pick(&points) {
        let top = path.remove_pair(g, p)?;
        slices.push(ElementarySlice {
            bottom: path.clone(),
            top: top.clone(),
            kind: SliceKind::Cap {
                position: p,
                edge: path.edges[p],
            },
        });
        points.drain(p..p + 2);
        path = top;
    }

    let mut points: Vec<usize> = (n..n + m).collect();
    let mut upper = d.top.clone();
    let mut cups = Vec::new();
    while let Some(p) = pick(&points) {
        let lower = upper.remove_pair(g, p)?;
        cups.push(ElementarySlice {
            bottom: lower.clone(),
            top: upper.clone(),
            kind: SliceKind::Cup {
                position: p,
                edge: upper.edges[p],
            },
        });
        points.drain(p..p + 2);
        upper = lower;
    }
    debug_assert_eq!(upper, path);
    slices.extend(cups.into_iter().rev());

    if slices.is_empty() {
        slices.push(ElementarySlice {
            bottom: d.bottom.clone(),
            top: d.top.clone(),
            kind: SliceKind::Identity,
        });
    }
    Ok(slices)
}
