//! Seeded random fundamental solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{solution_from_graph, ClassifyError};
use crate::fair::FairGraph;
use crate::families::{a_path_delta, generate_family, Family};
use crate::graph::BiGraph;
use crate::linalg::random_unitary;
use crate::solution::{conjugate_solution, FundamentalSolution, UnitaryFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomParams {
    /// Number of cover sheets; `1` keeps the base family.
    pub sheets: usize,
    /// Shuffle ids before building the solution.
    pub relabel: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { sheets: 1, relabel: true }
    }
}

const SHAPE_TOL: f64 = 1e-10;

fn is_integer(x: f64) -> bool {
    x >= 1.0 && x.fract() == 0.0
}

/// The family used for a base graph, or a description of why none applies.
pub fn family_for(g: &BiGraph) -> Result<Family, String> {
    let edges: Vec<_> = g.edges().collect();
    let max_delta = edges.iter().map(|(_, e)| e.weight).fold(0.0, f64::max);
    if edges.iter().all(|(_, e)| is_integer(e.weight)) && !edges.is_empty() {
        let sheets = if g.vertex_count() == 1 && edges.len() == 1 { 1 } else { max_delta as usize };
        return Ok(Family::IntegerSheets(sheets));
    }
    if g.vertex_count() == 1 {
        match edges[..] {
            [(e, edge)] if edge.dual == e && edge.weight < 2.0 => {
                let n = (PI / (edge.weight / 2.0).acos()).round() as usize - 1;
                if n >= 2 && (a_path_delta(n) - edge.weight).abs() <= SHAPE_TOL {
                    return Ok(Family::APathQuantumDim(n));
                }
                return Err(format!(
                    "loop weight {} is not of the form 2cos(π/(n+1))",
                    edge.weight
                ));
            }
            [(e, edge), (f, _)] if edge.dual == f && e != f && edge.weight >= 2.0 => {
                let delta = edge.weight;
                let a = (delta + (delta * delta - 4.0).sqrt()) / 2.0;
                return Ok(Family::TwoVertexReciprocal(a));
            }
            _ => {}
        }
    }
    let offender = edges
        .iter()
        .find(|(_, e)| !is_integer(e.weight))
        .map(|(_, e)| format!("edge `{}` has non-integer weight {}", e.id, e.weight))
        .unwrap_or_else(|| "graph has no edges".to_string());
    Err(format!(
        "{offender}; only integer weights or single-vertex loop shapes are supported"
    ))
}

/// A random balanced fair graph over `g`: a family member, optionally
/// covered and relabelled.
pub fn random_fair_graph(g: &Arc<BiGraph>, seed: u64, params: RandomParams) -> Result<FairGraph, ClassifyError> {
    let family = family_for(g).map_err(ClassifyError::Unsupported)?;
    let mut l = generate_family(&family, g)?;
    if params.sheets > 1 {
        l = generate_family(&Family::Cover(Box::new(l), params.sheets), g)?;
    }
    if params.relabel {
        l = generate_family(&Family::Relabel(Box::new(l), seed), g)?;
    }
    Ok(l)
}

/// Haar-random unitaries for every block of `s`.
pub fn random_unitaries<R: Rng + ?Sized>(s: &FundamentalSolution, rng: &mut R) -> UnitaryFamily {
    s.cups()
        .iter()
        .map(|(&key, c)| (key, random_unitary(c.nrows(), rng)))
        .collect()
}

/// A random solution over `g`, deterministic in `seed`.
pub fn random_solution(g: &Arc<BiGraph>, seed: u64, params: RandomParams) -> Result<FundamentalSolution, ClassifyError> {
    let l = random_fair_graph(g, seed, params)?;
    let s = solution_from_graph(&l, SHAPE_TOL)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitaries(&s, &mut rng);
    Ok(conjugate_solution(&s, &u)?)
}
