//! Numerical evaluation of diagrams through a fundamental solution.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::diagram::{
    decompose_with_order, DiagramError, ElementarySlice, GammaPath, Morphism2, SliceKind,
    SweepOrder,
};
use crate::graph::BiGraph;
use crate::linalg::{identity, kron, max_abs_diff, vec_row_major, CMatrix};
use crate::solution::{BlockKey, FundamentalSolution};

#[derive(Debug, Error)]
pub enum FunctorError {
    #[error("solution and morphism live over different base graphs")]
    GammaMismatch,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("operators are not composable: {0}")]
    NotComposable(String),
}

/// `(v_0, ..., v_n)`: one grading index per vertex along a path.
pub type GradingTuple = Vec<usize>;

/// A bigraded linear map between the spaces attached to two paths.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    domain: GammaPath,
    codomain: GammaPath,
    blocks: BTreeMap<(GradingTuple, GradingTuple), CMatrix>,
}

/// All grading tuples of `p` with nonzero dimension, with that dimension.
pub fn grading_tuples(s: &FundamentalSolution, p: &GammaPath) -> Vec<(GradingTuple, usize)> {
    let mut out: Vec<(GradingTuple, usize)> = (0..s.gradings().len(p.start()))
        .map(|v| (vec![v], 1))
        .collect();
    for &e in p.edges() {
        let mut next = Vec::new();
        for (t, d) in out {
            let v = *t.last().unwrap();
            for (w, c) in s.row(e, v) {
                let mut t2 = t.clone();
                t2.push(w);
                next.push((t2, d * c.nrows()));
            }
        }
        out = next;
    }
    debug_assert!(out.iter().all(|(t, _)| t.len() == p.len() + 1));
    out
}

fn tuple_dim(s: &FundamentalSolution, p: &GammaPath, t: &[usize], range: std::ops::Range<usize>) -> usize {
    range
        .map(|i| s.dim(BlockKey::new(p.edges()[i], t[i], t[i + 1])))
        .product()
}

impl BlockOperator {
    pub fn zero(domain: GammaPath, codomain: GammaPath) -> Self {
        BlockOperator {
            domain,
            codomain,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(s: &FundamentalSolution, p: &GammaPath) -> Self {
        let mut out = BlockOperator::zero(p.clone(), p.clone());
        for (t, d) in grading_tuples(s, p) {
            out.blocks.insert((t.clone(), t), identity(d));
        }
        out
    }

    pub fn domain(&self) -> &GammaPath {
        &self.domain
    }

    pub fn codomain(&self) -> &GammaPath {
        &self.codomain
    }

    pub fn blocks(&self) -> &BTreeMap<(GradingTuple, GradingTuple), CMatrix> {
        &self.blocks
    }

    pub fn block(&self, dom: &[usize], cod: &[usize]) -> Option<&CMatrix> {
        self.blocks.get(&(dom.to_vec(), cod.to_vec()))
    }

    fn add_block(&mut self, key: (GradingTuple, GradingTuple), m: CMatrix) {
        match self.blocks.get_mut(&key) {
            Some(acc) => *acc += m,
            None => {
                self.blocks.insert(key, m);
            }
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for m in out.blocks.values_mut() {
            *m *= c;
        }
        out
    }

    pub fn add(&self, other: &BlockOperator) -> Result<Self, FunctorError> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(FunctorError::NotComposable("sum of operators with different boundaries".into()));
        }
        let mut out = self.clone();
        for (k, m) in &other.blocks {
            out.add_block(k.clone(), m.clone());
        }
        Ok(out)
    }

    /// `self ∘ rhs`: apply `rhs` first.
    pub fn compose(&self, rhs: &BlockOperator) -> Result<Self, FunctorError> {
        if rhs.codomain != self.domain {
            return Err(FunctorError::NotComposable(
                "codomain of the first factor differs from the domain of the second".into(),
            ));
        }
        let mut by_mid: BTreeMap<&GradingTuple, Vec<(&GradingTuple, &CMatrix)>> = BTreeMap::new();
        for ((dom, mid), m) in &rhs.blocks {
            by_mid.entry(mid).or_default().push((dom, m));
        }
        let mut out = BlockOperator::zero(rhs.domain.clone(), self.codomain.clone());
        for ((mid, cod), a) in &self.blocks {
            if let Some(list) = by_mid.get(mid) {
                for &(dom, b) in list {
                    out.add_block((dom.clone(), cod.clone()), a * b);
                }
            }
        }
        Ok(out)
    }

    /// Horizontal product: `self` on the left factors, `rhs` on the right.
    pub fn tensor(&self, rhs: &BlockOperator) -> Result<Self, FunctorError> {
        let err = || FunctorError::NotComposable("paths do not meet at a common vertex".into());
        let domain = self.domain.concat(&rhs.domain).ok_or_else(err)?;
        let codomain = self.codomain.concat(&rhs.codomain).ok_or_else(err)?;
        let mut out = BlockOperator::zero(domain, codomain);
        for ((d1, c1), a) in &self.blocks {
            for ((d2, c2), b) in &rhs.blocks {
                if d1.last() != d2.first() || c1.last() != c2.first() {
                    continue;
                }
                let dom = d1.iter().chain(&d2[1..]).copied().collect();
                let cod = c1.iter().chain(&c2[1..]).copied().collect();
                out.add_block((dom, cod), kron(a, b));
            }
        }
        Ok(out)
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        BlockOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|((d, c), m)| ((c.clone(), d.clone()), m.adjoint()))
                .collect(),
        }
    }

    /// Largest entrywise difference, treating missing blocks as zero.
    pub fn max_diff(&self, other: &BlockOperator) -> f64 {
        if self.domain != other.domain || self.codomain != other.codomain {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for (k, m) in &self.blocks {
            worst = worst.max(match other.blocks.get(k) {
                Some(n) => max_abs_diff(m, n),
                None => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
            });
        }
        for (k, n) in &other.blocks {
            if !self.blocks.contains_key(k) {
                worst = worst.max(n.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

/// Operator of one elementary slice.
pub fn slice_operator(s: &FundamentalSolution, slice: &ElementarySlice) -> BlockOperator {
    let g: &BiGraph = s.gamma();
    match slice.kind {
        SliceKind::Identity => BlockOperator::identity(s, &slice.bottom),
        SliceKind::Cup { position: p, edge: e } => {
            let bottom = &slice.bottom;
            let n = bottom.len();
            let mut out = BlockOperator::zero(bottom.clone(), slice.top.clone());
            for (t, _) in grading_tuples(s, bottom) {
                let v = t[p];
                let left = tuple_dim(s, bottom, &t, 0..p);
                let right = tuple_dim(s, bottom, &t, p..n);
                for (w, c) in s.row(e, v) {
                    let mut cod = t[..=p].to_vec();
                    cod.push(w);
                    cod.extend_from_slice(&t[p..]);
                    let m = kron(&kron(&identity(left), &vec_row_major(c)), &identity(right));
                    out.add_block((t.clone(), cod), m);
                }
            }
            out
        }
        SliceKind::Cap { position: p, edge: e } => {
            let bottom = &slice.bottom;
            let n = bottom.len();
            debug_assert_eq!(bottom.edges()[p + 1], g.dual(e));
            let mut out = BlockOperator::zero(bottom.clone(), slice.top.clone());
            for (t, _) in grading_tuples(s, bottom) {
                if t[p + 2] != t[p] {
                    continue;
                }
                let c = s.cup(BlockKey::new(e, t[p], t[p + 1])).expect("tuple has nonzero dims");
                let left = tuple_dim(s, bottom, &t, 0..p);
                let right = tuple_dim(s, bottom, &t, p + 2..n);
                let mut cod = t[..=p].to_vec();
                cod.extend_from_slice(&t[p + 3..]);
                let m = kron(&kron(&identity(left), &vec_row_major(c).adjoint()), &identity(right));
                out.add_block((t.clone(), cod), m);
            }
            out
        }
    }
}

/// Evaluates `m` through `s`, slice by slice.
pub fn evaluate_functor(s: &FundamentalSolution, m: &Morphism2) -> Result<BlockOperator, FunctorError> {
    evaluate_with_order(s, m, SweepOrder::LeftmostFirst)
}

pub fn evaluate_with_order(
    s: &FundamentalSolution,
    m: &Morphism2,
    order: SweepOrder,
) -> Result<BlockOperator, FunctorError> {
    if !Arc::ptr_eq(s.gamma(), m.gamma()) && **s.gamma() != **m.gamma() {
        return Err(FunctorError::GammaMismatch);
    }
    let g = &**s.gamma();
    let mut total = BlockOperator::zero(m.bottom().clone(), m.top().clone());
    for (d, coeff) in m.terms() {
        let slices = decompose_with_order(g, &d, order)?;
        let mut acc = slice_operator(s, &slices[0]);
        for slice in &slices[1..] {
            acc = slice_operator(s, slice).compose(&acc)?;
        }
        total = total.add(&acc.scale(coeff))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{compose_horizontal, compose_vertical};
    use crate::graph::{standard_gamma, StandardKind};
    use crate::linalg::c64;
    use crate::solution::GradingFamily;

    fn two_dim(delta_l: f64) -> FundamentalSolution {
        let g = Arc::new(standard_gamma(StandardKind::Unoriented, &[delta_l + 1.0 / delta_l]).unwrap());
        let sets = BTreeMap::from([("a".to_string(), vec!["x".to_string()])]);
        let gradings = GradingFamily::new(&g, &sets, false).unwrap();
        let l = delta_l;
        let c = CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(l.sqrt(), 0.0), c64(1.0 / l.sqrt(), 0.0), c64(0.0, 0.0)],
        );
        let e = g.edge_ix("e").unwrap();
        FundamentalSolution::new(g, gradings, BTreeMap::from([(BlockKey::new(e, 0, 0), c)])).unwrap()
    }

    #[test]
    fn loop_evaluates_to_delta() {
        let s = two_dim(3.0);
        let g = s.gamma().clone();
        let e = g.edge_ix("e").unwrap();
        let cup = Morphism2::cup(g.clone(), e).unwrap();
        let cap = Morphism2::cap(g.clone(), e).unwrap();
        let circle = compose_vertical(&cup, &cap).unwrap();
        let val = evaluate_functor(&s, &circle).unwrap();
        let b = val.block(&[0], &[0]).unwrap();
        assert!((b[(0, 0)] - c64(3.0 + 1.0 / 3.0, 0.0)).norm() < 1e-12);
        let direct = evaluate_functor(&s, &cap).unwrap().compose(&evaluate_functor(&s, &cup).unwrap()).unwrap();
        assert!(val.max_diff(&direct) < 1e-12);
    }

    #[test]
    fn zigzag_evaluates_to_identity() {
        let s = two_dim(2.0);
        let g = s.gamma().clone();
        let e = g.edge_ix("e").unwrap();
        let strand = GammaPath::from_ids(&g, &["e"], None).unwrap();
        let id = Morphism2::identity(g.clone(), &strand);
        let lower = compose_horizontal(&id, &Morphism2::cup(g.clone(), e).unwrap()).unwrap();
        let upper = compose_horizontal(&Morphism2::cap(g.clone(), e).unwrap(), &id).unwrap();
        let fl = evaluate_functor(&s, &lower).unwrap();
        let fu = evaluate_functor(&s, &upper).unwrap();
        let snake = fu.compose(&fl).unwrap();
        assert!(snake.max_diff(&BlockOperator::identity(&s, &strand)) < 1e-12);
    }

    #[test]
    fn identity_diagram_evaluates_to_identity() {
        let s = two_dim(2.0);
        let g = s.gamma().clone();
        let p = GammaPath::from_ids(&g, &["e"], None).unwrap();
        let val = evaluate_functor(&s, &Morphism2::identity(g, &p)).unwrap();
        assert_eq!(val.block(&[0, 0], &[0, 0]).unwrap(), &identity(2));
    }
}
