//! Shared corpus and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use tlj_core::diagram::{compose_horizontal, compose_vertical, GammaPath, Morphism2};
use tlj_core::fair::FairGraph;
use tlj_core::families::{a_path_delta, generate_family, Family};
use tlj_core::fixtures::lambda1;
use tlj_core::graph::{standard_gamma, BiGraph, StandardKind};
use tlj_core::solution::{BlockKey, FundamentalSolution};

pub struct Entry {
    pub name: String,
    pub graph: FairGraph,
}

pub fn a_path(n: usize) -> FairGraph {
    let g = Arc::new(standard_gamma(StandardKind::Unoriented, &[a_path_delta(n)]).unwrap());
    generate_family(&Family::APathQuantumDim(n), &g).unwrap()
}

pub fn two_vertex(a: f64) -> FairGraph {
    let g = Arc::new(standard_gamma(StandardKind::Oriented, &[a + 1.0 / a]).unwrap());
    generate_family(&Family::TwoVertexReciprocal(a), &g).unwrap()
}

/// Λ₁, A-paths n = 2..=10, two-vertex graphs a ∈ {1, 2, 5}, a 3-sheet cover
/// of Λ₁ and 20 seeded relabelings.
pub fn corpus() -> Vec<Entry> {
    let mut out = vec![Entry {
        name: "lambda1".into(),
        graph: lambda1(),
    }];
    for n in 2..=10 {
        out.push(Entry {
            name: format!("a_path_{n}"),
            graph: a_path(n),
        });
    }
    for a in [1.0, 2.0, 5.0] {
        out.push(Entry {
            name: format!("two_vertex_{a}"),
            graph: two_vertex(a),
        });
    }
    let l1 = lambda1();
    out.push(Entry {
        name: "lambda1_cover_3".into(),
        graph: generate_family(&Family::Cover(Box::new(l1.clone()), 3), l1.gamma()).unwrap(),
    });
    let bases = out.len();
    for seed in 0..20u64 {
        let base = &out[seed as usize % bases];
        let graph = generate_family(&Family::Relabel(Box::new(base.graph.clone()), seed), base.graph.gamma()).unwrap();
        let name = format!("{}_relabel_{seed}", base.name);
        out.push(Entry { name, graph });
    }
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(1.0)
}

/// Tries every vertex bijection that respects π; for each, compares the
/// sorted `(π, weight)` lists of every ordered vertex pair.
pub fn brute_force_iso(l1: &FairGraph, l2: &FairGraph, tol: f64) -> bool {
    let n = l1.vertex_count();
    if n != l2.vertex_count() || l1.edge_count() != l2.edge_count() {
        return false;
    }
    let lists = |l: &FairGraph| {
        let mut m: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for e in l.edges() {
            m.entry((e.source, e.target)).or_default().push((e.pi.0, e.weight));
        }
        for v in m.values_mut() {
            v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        m
    };
    let (m1, m2) = (lists(l1), lists(l2));
    let empty = Vec::new();
    let same = |a: &Vec<(usize, f64)>, b: &Vec<(usize, f64)>| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.0 == y.0 && close(x.1, y.1, tol))
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut found = false;
    permute(&mut perm, 0, &mut |p| {
        if found {
            return;
        }
        if (0..n).any(|i| l1.vertex(i).pi != l2.vertex(p[i]).pi) {
            return;
        }
        for i in 0..n {
            for j in 0..n {
                let a = m1.get(&(i, j)).unwrap_or(&empty);
                let b = m2.get(&(p[i], p[j])).unwrap_or(&empty);
                if !same(a, b) {
                    return;
                }
            }
        }
        found = true;
    });
    found
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Exhaustive search over all edge involutions (fixed points included).
pub fn exhaustive_involution(l: &FairGraph, tol: f64) -> bool {
    let g = l.gamma();
    let m = l.edge_count();
    let compatible = |a: usize, b: usize| {
        let (x, y) = (l.edge(a), l.edge(b));
        x.source == y.target
            && x.target == y.source
            && y.pi == g.dual(x.pi)
            && (x.weight * y.weight - 1.0).abs() <= 2.0 * tol * x.weight.max(y.weight).max(1.0)
    };
    fn go(k: usize, used: &mut Vec<bool>, compatible: &dyn Fn(usize, usize) -> bool) -> bool {
        let m = used.len();
        let Some(a) = (k..m).find(|&i| !used[i]) else {
            return true;
        };
        used[a] = true;
        if compatible(a, a) && go(a + 1, used, compatible) {
            return true;
        }
        for b in a + 1..m {
            if !used[b] && compatible(a, b) {
                used[b] = true;
                if go(a + 1, used, compatible) {
                    return true;
                }
                used[b] = false;
            }
        }
        used[a] = false;
        false
    }
    go(0, &mut vec![false; m], &compatible)
}

/// Worst residual of both zigzag conditions, computed from the cup form
/// `((C^e)* ⊗ 1)(1 ⊗ C^{ē})` with explicit index sums.
pub fn zigzag_cup_form(s: &FundamentalSolution) -> f64 {
    let g = s.gamma();
    let mut worst: f64 = 0.0;
    for (&key, c) in s.cups() {
        let cb = s.cup(key.partner(g)).unwrap();
        let (de, db) = c.shape();
        for i in 0..de {
            for k in 0..de {
                // (C^e)*(ξ_i ⊗ η_j) = conj(c_ij); C^{ē}(1) = Σ cb_jk η_j ⊗ ξ_k
                let mut z = Complex64::new(0.0, 0.0);
                for j in 0..db {
                    z += c[(i, j)].conj() * cb[(j, k)];
                }
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((z - target).norm());
            }
        }
    }
    for (e, edge) in g.edges() {
        for v in 0..s.gradings().len(edge.source) {
            let mut total = 0.0;
            for w in 0..s.gradings().len(edge.target) {
                if let Some(c) = s.cup(BlockKey::new(e, v, w)) {
                    total += c.iter().map(|z| z.norm_sqr()).sum::<f64>();
                }
            }
            worst = worst.max((total - edge.weight).abs());
        }
    }
    worst
}

/// A random diagram from `start`, built as a stack of random cups and caps
/// with at most `max_len` strands at any height.
pub fn random_stack<R: Rng>(g: &Arc<BiGraph>, start: &GammaPath, steps: usize, max_len: usize, rng: &mut R) -> Morphism2 {
    let mut acc = Morphism2::identity(g.clone(), start);
    for _ in 0..steps {
        let p = acc.top().clone();
        let caps: Vec<usize> = (0..p.len().saturating_sub(1))
            .filter(|&i| p.edges()[i + 1] == g.dual(p.edges()[i]))
            .collect();
        let want_cap = !caps.is_empty() && (p.len() + 2 > max_len || rng.random_bool(0.5));
        let slice = if want_cap {
            let i = caps[rng.random_range(0..caps.len())];
            let e = p.edges()[i];
            insert_at(g, &p, i, Morphism2::cap(g.clone(), e).unwrap())
        } else if p.len() + 2 <= max_len {
            let i = rng.random_range(0..=p.len());
            let v = p.vertex_at(g, i);
            let out: Vec<_> = g.out_edges(v).collect();
            let e = out[rng.random_range(0..out.len())];
            insert_at(g, &p, i, Morphism2::cup(g.clone(), e).unwrap())
        } else {
            continue;
        };
        acc = compose_vertical(&acc, &slice).unwrap();
    }
    acc
}

/// `id_{p[..i]} ⊗ m ⊗ id_{p[i + k..]}` where `m` consumes `k` strands.
fn insert_at(g: &Arc<BiGraph>, p: &GammaPath, i: usize, m: Morphism2) -> Morphism2 {
    let k = m.bottom().len();
    let left = GammaPath::new(g, p.edges()[..i].to_vec(), Some(p.start())).unwrap();
    let right = GammaPath::new(g, p.edges()[i + k..].to_vec(), Some(p.vertex_at(g, i + k))).unwrap();
    let lhs = compose_horizontal(&Morphism2::identity(g.clone(), &left), &m).unwrap();
    compose_horizontal(&lhs, &Morphism2::identity(g.clone(), &right)).unwrap()
}

pub fn random_coeff<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// A random nonempty path of length `len` (fewer if stuck).
pub fn random_path<R: Rng>(g: &Arc<BiGraph>, len: usize, rng: &mut R) -> GammaPath {
    let verts: Vec<_> = g.vertices().collect();
    let mut v = verts[rng.random_range(0..verts.len())];
    let start = v;
    let mut edges = Vec::new();
    for _ in 0..len {
        let out: Vec<_> = g.out_edges(v).collect();
        if out.is_empty() {
            break;
        }
        let e = out[rng.random_range(0..out.len())];
        edges.push(e);
        v = g.target(e);
    }
    GammaPath::new(g, edges, Some(start)).unwrap()
}

/// A random path of length `len` (fewer if stuck) starting at `v`.
pub fn path_from<R: Rng>(g: &Arc<BiGraph>, v: tlj_core::graph::VertexIx, len: usize, rng: &mut R) -> GammaPath {
    let mut at = v;
    let mut edges = Vec::new();
    for _ in 0..len {
        let out: Vec<_> = g.out_edges(at).collect();
        if out.is_empty() {
            break;
        }
        let e = out[rng.random_range(0..out.len())];
        edges.push(e);
        at = g.target(e);
    }
    GammaPath::new(g, edges, Some(v)).unwrap()
}

/// A random linear combination of `id_p` and the cap-then-cup diagrams
/// available on `p`.
pub fn random_endo<R: Rng>(g: &Arc<BiGraph>, p: &GammaPath, rng: &mut R) -> Morphism2 {
    let mut acc = Morphism2::identity(g.clone(), p).scale(random_coeff(rng));
    for i in 0..p.len().saturating_sub(1) {
        let e = p.edges()[i];
        if p.edges()[i + 1] != g.dual(e) {
            continue;
        }
        let cap = insert_at(g, p, i, Morphism2::cap(g.clone(), e).unwrap());
        let mid = cap.top().clone();
        let cup = insert_at(g, &mid, i, Morphism2::cup(g.clone(), e).unwrap());
        let term = compose_vertical(&cap, &cup).unwrap().scale(random_coeff(rng));
        acc = acc.add(&term).unwrap();
    }
    acc
}

/// Random composable pair `f: p -> q`, `h: q -> r` with random coefficients.
pub fn random_pair<R: Rng>(g: &Arc<BiGraph>, max_len: usize, rng: &mut R) -> (Morphism2, Morphism2) {
    let len = rng.random_range(0..=max_len.min(4));
    let p = random_path(g, len, rng);
    let steps = rng.random_range(1..=4);
    let f = compose_vertical(&random_endo(g, &p, rng), &random_stack(g, &p, steps, max_len, rng)).unwrap();
    let q = f.top().clone();
    let steps = rng.random_range(1..=4);
    let h = compose_vertical(&random_endo(g, &q, rng), &random_stack(g, &q, steps, max_len, rng)).unwrap();
    (f, h)
}

/// A small set of conjugated solutions over different base graphs.
pub fn sample_solutions() -> Vec<(String, tlj_core::solution::FundamentalSolution)> {
    use rand::SeedableRng;
    use tlj_core::classify::solution_from_graph;
    use tlj_core::random::random_unitaries;
    use tlj_core::solution::conjugate_solution;

    let mut out = Vec::new();
    for (i, (name, l)) in [("lambda1", lambda1()), ("a_path_4", a_path(4)), ("two_vertex_2", two_vertex(2.0))]
        .into_iter()
        .enumerate()
    {
        let s = solution_from_graph(&l, 1e-10).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100 + i as u64);
        let u = random_unitaries(&s, &mut rng);
        out.push((name.to_string(), conjugate_solution(&s, &u).unwrap()));
    }
    out
}
