//! Fundamental solutions: grading sets, cup blocks and their antilinear
//! counterparts.
//!
//! Coordinates: the cup block for `(e, v, w)` is a matrix `c` with rows
//! indexing the basis `ξ_i` of `H^e_{vw}` and columns indexing the basis
//! `η_j` of `H^{ē}_{wv}`, so that `C^e_{vw}(1) = Σ c_ij ξ_i ⊗ η_j`. The
//! inner product is linear in the first argument, hence
//! `Φ^e_{vw}(ξ_k) = Σ_j c_kj η_j` and the matrix `A` with
//! `Φ(x) = A · conj(x)` is `cᵀ`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{BiGraph, EdgeIx, GraphError, VertexIx};
use crate::linalg::{frobenius_sq, identity, op_norm, singular_values, unitarity_defect, CMatrix};
use crate::report::{ValidationReport, Violation, ViolationCode};

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no grading set for vertex `{0}`")]
    MissingGrading(String),
    #[error("grading set for `{0}` is empty")]
    EmptyGrading(String),
    #[error("duplicate grading id `{id}` at vertex `{vertex}`")]
    DuplicateGrading { vertex: String, id: String },
    #[error("unknown grading id `{id}` at vertex `{vertex}`")]
    UnknownGrading { vertex: String, id: String },
    #[error("block {0} is out of range")]
    BlockOutOfRange(String),
    #[error("block {0} has a zero dimension; omit it instead")]
    EmptyBlock(String),
    #[error("block {block}: expected shape {expected:?}, got {got:?}")]
    Shape {
        block: String,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("block {0} has no partner block")]
    MissingPartner(String),
    #[error("unitary for block {block} is off by {defect:e}")]
    NotUnitary { block: String, defect: f64 },
    #[error("solutions live over different base graphs")]
    GammaMismatch,
}

/// Grading sets `J^a`, one per vertex of Γ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradingFamily {
    sets: Vec<Vec<String>>,
}

impl GradingFamily {
    /// Sets are keyed by Γ-vertex id. Empty sets need `allow_empty`.
    pub fn new(
        g: &BiGraph,
        sets: &BTreeMap<String, Vec<String>>,
        allow_empty: bool,
    ) -> Result<Self, SolutionError> {
        for key in sets.keys() {
            g.vertex_ix(key)?;
        }
        let mut out = Vec::with_capacity(g.vertex_count());
        for a in g.vertex_ids() {
            let set = sets
                .get(a)
                .ok_or_else(|| SolutionError::MissingGrading(a.clone()))?;
            if set.is_empty() && !allow_empty {
                return Err(SolutionError::EmptyGrading(a.clone()));
            }
            let mut seen = BTreeSet::new();
            for id in set {
                if !seen.insert(id) {
                    return Err(SolutionError::DuplicateGrading {
                        vertex: a.clone(),
                        id: id.clone(),
                    });
                }
            }
            out.push(set.clone());
        }
        Ok(GradingFamily { sets: out })
    }

    pub fn set(&self, a: VertexIx) -> &[String] {
        &self.sets[a.0]
    }

    pub fn len(&self, a: VertexIx) -> usize {
        self.sets[a.0].len()
    }

    pub fn index_of(&self, g: &BiGraph, a: VertexIx, id: &str) -> Result<usize, SolutionError> {
        self.sets[a.0]
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| SolutionError::UnknownGrading {
                vertex: g.vertex_id(a).to_string(),
                id: id.to_string(),
            })
    }

    pub fn to_map(&self, g: &BiGraph) -> BTreeMap<String, Vec<String>> {
        g.vertex_ids()
            .iter()
            .cloned()
            .zip(self.sets.iter().cloned())
            .collect()
    }
}

/// Address of a block: Γ-edge `e: a -> b`, `v ∈ J^a`, `w ∈ J^b` (as indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockKey {
    pub edge: EdgeIx,
    pub v: usize,
    pub w: usize,
}

impl BlockKey {
    pub fn new(edge: EdgeIx, v: usize, w: usize) -> Self {
        BlockKey { edge, v, w }
    }

    pub fn partner(self, g: &BiGraph) -> BlockKey {
        BlockKey {
            edge: g.dual(self.edge),
            v: self.w,
            w: self.v,
        }
    }
}

/// The antilinear map `Φ(x) = A · conj(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiLinearBlock {
    pub matrix: CMatrix,
}

impl AntiLinearBlock {
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        &self.matrix * x.map(|z| z.conj())
    }

    /// Matrix of the antilinear adjoint: `Φ*(y) = Aᵀ · conj(y)`.
    pub fn adjoint_matrix(&self) -> CMatrix {
        self.matrix.transpose()
    }

    /// Matrix of the linear operator `Φ*Φ`, namely `Aᵀ · conj(A)`.
    pub fn positive_square(&self) -> CMatrix {
        self.matrix.transpose() * self.matrix.map(|z| z.conj())
    }

    /// Spectrum of `Φ*Φ`, ascending, as squared singular values of `A`.
    pub fn spectrum(&self) -> Vec<f64> {
        singular_values(&self.matrix).into_iter().map(|s| s * s).collect()
    }
}

#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    gamma: Arc<BiGraph>,
    gradings: GradingFamily,
    cups: BTreeMap<BlockKey, CMatrix>,
}

impl FundamentalSolution {
    pub fn new(
        gamma: Arc<BiGraph>,
        gradings: GradingFamily,
        cups: BTreeMap<BlockKey, CMatrix>,
    ) -> Result<Self, SolutionError> {
        let g = &*gamma;
        let s = FundamentalSolution {
            gamma: gamma.clone(),
            gradings,
            cups,
        };
        for (&key, c) in &s.cups {
            let name = s.block_name(key);
            if key.edge.0 >= g.edge_count()
                || key.v >= s.gradings.len(g.source(key.edge))
                || key.w >= s.gradings.len(g.target(key.edge))
            {
                return Err(SolutionError::BlockOutOfRange(format!(
                    "(#{}, {}, {})",
                    key.edge.0, key.v, key.w
                )));
            }
            if c.nrows() == 0 || c.ncols() == 0 {
                return Err(SolutionError::EmptyBlock(name));
            }
            let partner = s
                .cups
                .get(&key.partner(g))
                .ok_or_else(|| SolutionError::MissingPartner(name.clone()))?;
            let expected = (partner.ncols(), partner.nrows());
            if c.shape() != expected {
                return Err(SolutionError::Shape {
                    block: name,
                    expected,
                    got: c.shape(),
                });
            }
        }
        Ok(s)
    }

    pub fn gamma(&self) -> &Arc<BiGraph> {
        &self.gamma
    }

    pub fn gradings(&self) -> &GradingFamily {
        &self.gradings
    }

    pub fn cups(&self) -> &BTreeMap<BlockKey, CMatrix> {
        &self.cups
    }

    pub fn cup(&self, key: BlockKey) -> Option<&CMatrix> {
        self.cups.get(&key)
    }

    /// `dim_e(v, w)`; zero where no block is stored.
    pub fn dim(&self, key: BlockKey) -> usize {
        self.cups.get(&key).map_or(0, |c| c.nrows())
    }

    /// Human-readable block address `(e, v, w)` using ids.
    pub fn block_name(&self, key: BlockKey) -> String {
        let g = &*self.gamma;
        let get = |a: VertexIx, i: usize| {
            self.gradings
                .sets
                .get(a.0)
                .and_then(|s| s.get(i))
                .cloned()
                .unwrap_or_else(|| format!("#{i}"))
        };
        if key.edge.0 >= g.edge_count() {
            return format!("(#{}, {}, {})", key.edge.0, key.v, key.w);
        }
        format!(
            "({}, {}, {})",
            g.edge_id(key.edge),
            get(g.source(key.edge), key.v),
            get(g.target(key.edge), key.w)
        )
    }

    /// Blocks leaving `v ∈ J^{source(e)}` along `e`.
    pub fn row(&self, e: EdgeIx, v: usize) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.cups
            .range(BlockKey::new(e, v, 0)..=BlockKey::new(e, v, usize::MAX))
            .map(|(k, c)| (k.w, c))
    }
}

/// `Φ` blocks, one per cup block.
pub fn phi_from_cups(s: &FundamentalSolution) -> BTreeMap<BlockKey, AntiLinearBlock> {
    s.cups
        .iter()
        .map(|(&k, c)| (k, AntiLinearBlock { matrix: c.transpose() }))
        .collect()
}

/// Inverse of [`phi_from_cups`].
pub fn cups_from_phi(
    gamma: Arc<BiGraph>,
    gradings: GradingFamily,
    phi: &BTreeMap<BlockKey, AntiLinearBlock>,
) -> Result<FundamentalSolution, SolutionError> {
    let cups = phi.iter().map(|(&k, a)| (k, a.matrix.transpose())).collect();
    FundamentalSolution::new(gamma, gradings, cups)
}

/// Residuals of both zigzag conditions.
#[derive(Clone, Debug, Default)]
pub struct ZigzagSummary {
    /// `‖Φ^{ē}_{wv} Φ^e_{vw} − 1‖` per block.
    pub snake: Vec<(BlockKey, f64)>,
    /// `|Σ_w Tr((Φ^e_{vw})*Φ^e_{vw}) − δ_e|` per `(e, v)`.
    pub trace: Vec<(EdgeIx, usize, f64)>,
}

impl ZigzagSummary {
    pub fn worst(&self) -> f64 {
        self.snake
            .iter()
            .map(|x| x.1)
            .chain(self.trace.iter().map(|x| x.2))
            .fold(0.0, f64::max)
    }
}

pub fn zigzag_summary(s: &FundamentalSolution) -> ZigzagSummary {
    let g = &*s.gamma;
    let mut out = ZigzagSummary::default();
    for (&key, c) in &s.cups {
        let a = c.transpose();
        let b = s.cups[&key.partner(g)].transpose();
        let r = op_norm(&(b * a.map(|z| z.conj()) - identity(c.nrows())));
        out.snake.push((key, r));
    }
    for (e, _) in g.edges() {
        for v in 0..s.gradings.len(g.source(e)) {
            let total: f64 = s.row(e, v).map(|(_, c)| frobenius_sq(c)).sum();
            out.trace.push((e, v, (total - g.weight(e)).abs()));
        }
    }
    out
}

pub fn check_zigzag(s: &FundamentalSolution, tol: f64) -> ValidationReport {
    let g = &*s.gamma;
    let summary = zigzag_summary(s);
    let mut report = ValidationReport::new();
    for &(key, r) in &summary.snake {
        if !(r <= tol) {
            report.push(
                Violation::new(
                    ViolationCode::ZigzagSnake,
                    vec![s.block_name(key)],
                    format!("snake identity off by {r:e} at {}", s.block_name(key)),
                )
                .with_residual(r),
            );
        }
    }
    for &(e, v, r) in &summary.trace {
        if !(r <= tol) {
            let at = &s.gradings.set(g.source(e))[v];
            report.push(
                Violation::new(
                    ViolationCode::ZigzagTrace,
                    vec![g.edge_id(e).to_string(), at.clone()],
                    format!("loop value at ({}, {at}) off by {r:e}", g.edge_id(e)),
                )
                .with_residual(r),
            );
        }
    }
    report
}

/// Unitaries per block; blocks without an entry are left alone.
pub type UnitaryFamily = BTreeMap<BlockKey, CMatrix>;

const UNITARY_TOL: f64 = 1e-10;

fn check_unitaries(s: &FundamentalSolution, u: &UnitaryFamily) -> Result<(), SolutionError> {
    for (&key, m) in u {
        let d = s.dim(key);
        let name = s.block_name(key);
        if d == 0 || m.shape() != (d, d) {
            return Err(SolutionError::Shape {
                block: name,
                expected: (d, d),
                got: m.shape(),
            });
        }
        let defect = unitarity_defect(m);
        if !(defect <= UNITARY_TOL) {
            return Err(SolutionError::NotUnitary { block: name, defect });
        }
    }
    Ok(())
}

/// Replaces each cup by `(U^e ⊗ U^{ē}) C^e`, i.e. `c' = U^e c (U^{ē}_{wv})ᵀ`.
pub fn conjugate_solution(
    s: &FundamentalSolution,
    u: &UnitaryFamily,
) -> Result<FundamentalSolution, SolutionError> {
    check_unitaries(s, u)?;
    let g = &*s.gamma;
    let mut cups = BTreeMap::new();
    for (&key, c) in &s.cups {
        let mut next = c.clone();
        if let Some(ue) = u.get(&key) {
            next = ue * next;
        }
        if let Some(ub) = u.get(&key.partner(g)) {
            next *= ub.transpose();
        }
        cups.insert(key, next);
    }
    Ok(FundamentalSolution {
        gamma: s.gamma.clone(),
        gradings: s.gradings.clone(),
        cups,
    })
}

/// Checks `Φ^e_{vw} = U^{ē}_{wv} ∘ Ψ^e_{φv φw} ∘ (U^e_{vw})*` for every block of
/// `s`, where `Ψ` belongs to `t`. In coordinates this reads
/// `A_s = U^{ē}_{wv} · A_t · (U^e_{vw})ᵀ`. Missing unitaries are identities;
/// `bijections[a][v]` is the image of `v ∈ J^a`.
pub fn verify_equivalence_witness(
    s: &FundamentalSolution,
    t: &FundamentalSolution,
    u: &UnitaryFamily,
    bijections: &[Vec<usize>],
    tol: f64,
) -> Result<bool, SolutionError> {
    if *s.gamma != *t.gamma {
        return Err(SolutionError::GammaMismatch);
    }
    let g = &*s.gamma;
    check_unitaries(s, u)?;
    if bijections.len() != g.vertex_count() {
        return Err(SolutionError::BlockOutOfRange("vertex bijections".into()));
    }
    for a in g.vertices() {
        let phi = &bijections[a.0];
        let n = s.gradings.len(a);
        let mut hit = vec![false; t.gradings.len(a)];
        if phi.len() != n || t.gradings.len(a) != n {
            return Ok(false);
        }
        for &x in phi {
            if x >= n || std::mem::replace(&mut hit[x], true) {
                return Ok(false);
            }
        }
    }
    let map = |key: BlockKey| BlockKey {
        edge: key.edge,
        v: bijections[g.source(key.edge).0][key.v],
        w: bijections[g.target(key.edge).0][key.w],
    };
    let image: BTreeSet<BlockKey> = s.cups.keys().map(|&k| map(k)).collect();
    if image.len() != t.cups.len() || !t.cups.keys().all(|k| image.contains(k)) {
        return Ok(false);
    }
    for (&key, c) in &s.cups {
        let Some(ct) = t.cup(map(key)) else {
            return Ok(false);
        };
        if ct.shape() != c.shape() {
            return Ok(false);
        }
        let mut rhs = ct.transpose();
        if let Some(ub) = u.get(&key.partner(g)) {
            rhs = ub * rhs;
        }
        if let Some(ue) = u.get(&key) {
            rhs *= ue.transpose();
        }
        if !(op_norm(&(c.transpose() - rhs)) <= tol) {
            return Ok(false);
        }
    }
    Ok(true)
}
