//! Excess-intersection product, boundary pullbacks and pushforwards.
//!
//! Everything here is driven by [`Degeneration`]s: for a source graph Γ₁ and
//! a target graph Γ₂, a degeneration is a graph A obtained by replacing each
//! vertex v of Γ₂ with a stable graph A_v, together with an identification of
//! the contraction of A along the edges of Γ₂ not kept (all but a subset S)
//! with Γ₁. Pulling back ξ_{Γ₁*}γ₁ to M̄_{Γ₂} gives the sum over
//! degenerations, weighted by 1/Π|Aut A_v|, of γ₁ transported to A times the
//! excess class Π_{e∈S} -(ψ'_e + ψ''_e).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use itertools::Itertools;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use rayon::prelude::*;

use super::{check_stable, compositions, DecoratedGraph, TautClass};
use crate::error::{Result, TautError};
use crate::graphs::{canonicalize, graphs_with_edges, isomorphisms, StableGraph};
use crate::integrals::integrate_graph;
use crate::scalar::{rat_int, Rational, Scalar};

/// A graph built by inserting one graph per vertex of a target graph.
#[derive(Clone, Debug)]
pub(crate) struct Assembly {
    pub graph: StableGraph,
    pub parts: Vec<StableGraph>,
    pub vertex_offset: Vec<usize>,
    pub edge_offset: Vec<usize>,
    /// Half-edges of the target at each vertex, in local order.
    pub local: Vec<Vec<usize>>,
}

impl Assembly {
    /// Half-edge of the assembled graph for half-edge `h` of part `v`.
    pub fn part_half_edge(&self, v: usize, h: usize) -> usize {
        let part = &self.parts[v];
        if h < part.n() {
            self.local[v][h]
        } else {
            let n = self.graph.n();
            n + 2 * self.edge_offset[v] + (h - part.n())
        }
    }

    pub fn part_vertices(&self, v: usize) -> std::ops::Range<usize> {
        self.vertex_offset[v]..self.vertex_offset[v] + self.parts[v].num_vertices()
    }
}

pub(crate) fn assemble(target: &StableGraph, parts: Vec<StableGraph>) -> Assembly {
    let nv = target.num_vertices();
    let local: Vec<Vec<usize>> = (0..nv).map(|v| target.half_edges_at(v)).collect();
    let mut pos = vec![(0, 0); target.num_half_edges()];
    for (v, hs) in local.iter().enumerate() {
        for (j, &h) in hs.iter().enumerate() {
            pos[h] = (v, j);
        }
    }
    let mut vertex_offset = Vec::with_capacity(nv);
    let mut genera = Vec::new();
    for p in &parts {
        vertex_offset.push(genera.len());
        genera.extend(&p.genera);
    }
    let at = |h: usize| {
        let (v, j) = pos[h];
        parts[v].legs[j] + vertex_offset[v]
    };
    let legs = (0..target.n()).map(at).collect();
    let mut edges: Vec<(usize, usize)> = (0..target.num_edges())
        .map(|k| {
            let (h0, h1) = target.edge_half_edges(k);
            (at(h0), at(h1))
        })
        .collect();
    let mut edge_offset = Vec::with_capacity(nv);
    for (v, p) in parts.iter().enumerate() {
        edge_offset.push(edges.len());
        edges.extend(
            p.edges
                .iter()
                .map(|&(a, b)| (a + vertex_offset[v], b + vertex_offset[v])),
        );
    }
    Assembly {
        graph: StableGraph {
            genera,
            legs,
            edges,
        },
        parts,
        vertex_offset,
        edge_offset,
        local,
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Degeneration {
    pub assembly: Assembly,
    pub weight: Rational,
    /// Source vertex -> vertices of A it pulls back to.
    pub src_vertices: Vec<Vec<usize>>,
    /// Source half-edge -> half-edge of A.
    pub src_half_edges: Vec<usize>,
    /// Edges of A carrying an excess factor.
    pub excess: Vec<usize>,
}

static DEGENERATIONS: Lazy<DashMap<(StableGraph, StableGraph), Arc<Vec<Degeneration>>>> =
    Lazy::new(DashMap::new);
static AUT: Lazy<DashMap<StableGraph, u64>> = Lazy::new(DashMap::new);

fn aut_order(g: &StableGraph) -> u64 {
    if let Some(a) = AUT.get(g) {
        return *a;
    }
    let a = canonicalize(g).aut_order;
    AUT.insert(g.clone(), a);
    a
}

fn sorted_genera(g: &StableGraph) -> Vec<u32> {
    let mut v = g.genera.clone();
    v.sort_unstable();
    v
}

pub(crate) fn degenerations(src: &StableGraph, tgt: &StableGraph) -> Result<Arc<Vec<Degeneration>>> {
    let key = (src.clone(), tgt.clone());
    if let Some(d) = DEGENERATIONS.get(&key) {
        return Ok(d.clone());
    }
    let e1 = src.num_edges();
    let e2 = tgt.num_edges();
    let nv = tgt.num_vertices();
    let src_genera = sorted_genera(src);
    let mut out = Vec::new();
    if src.genus() == tgt.genus() && src.n() == tgt.n() {
        for s in (0..e2).powerset() {
            if s.len() > e1 {
                continue;
            }
            let contracted: Vec<usize> = (0..e2).filter(|k| !s.contains(k)).collect();
            for comp in compositions((e1 - s.len()) as u32, nv) {
                let choices: Vec<Arc<Vec<StableGraph>>> = (0..nv)
                    .map(|v| {
                        graphs_with_edges(tgt.genera[v], tgt.valence(v), comp[v] as usize)
                    })
                    .collect::<Result<_>>()?;
                if choices.iter().any(|c| c.is_empty()) {
                    continue;
                }
                for pick in choices.iter().map(|c| 0..c.len()).multi_cartesian_product() {
                    let parts: Vec<StableGraph> =
                        pick.iter().enumerate().map(|(v, &i)| choices[v][i].clone()).collect();
                    let weight = Rational::one()
                        / rat_int(parts.iter().map(|p| aut_order(p) as i64).product());
                    let assembly = assemble(tgt, parts);
                    let c = assembly.graph.contract_edges(&contracted);
                    if c.graph.num_vertices() != src.num_vertices()
                        || sorted_genera(&c.graph) != src_genera
                    {
                        continue;
                    }
                    for phi in isomorphisms(&c.graph, src) {
                        let mut src_half_edges = vec![usize::MAX; src.num_half_edges()];
                        for (h, m) in c.half_edge_map.iter().enumerate() {
                            if let Some(ch) = m {
                                src_half_edges[phi[*ch]] = h;
                            }
                        }
                        // a lone vertex may carry no half-edges at all (n = 0)
                        let mut vmap = vec![0; c.graph.num_vertices()];
                        for ch in 0..c.graph.num_half_edges() {
                            vmap[c.graph.vertex_of(ch)] = src.vertex_of(phi[ch]);
                        }
                        let mut src_vertices = vec![Vec::new(); src.num_vertices()];
                        for (w, &cv) in c.vertex_map.iter().enumerate() {
                            src_vertices[vmap[cv]].push(w);
                        }
                        out.push(Degeneration {
                            assembly: assembly.clone(),
                            weight: weight.clone(),
                            src_vertices,
                            src_half_edges,
                            excess: s.clone(),
                        });
                    }
                }
            }
        }
    }
    let out = Arc::new(out);
    DEGENERATIONS.insert(key, out.clone());
    Ok(out)
}

type Decoration = (Vec<Vec<u32>>, Vec<u32>);

/// Decorations on A obtained from the source decoration `a`, an optional
/// target decoration `b`, and the excess factors. Terms violating a vertex
/// bound are dropped.
fn expand(deg: &Degeneration, a: &DecoratedGraph, b: Option<&DecoratedGraph>) -> Vec<(Decoration, i64)> {
    let graph = &deg.assembly.graph;
    let nv = graph.num_vertices();
    let dims: Vec<u32> = (0..nv).map(|v| graph.vertex_dim(v)).collect();
    let mut psi = vec![0u32; graph.num_half_edges()];
    for (h, &ah) in deg.src_half_edges.iter().enumerate() {
        psi[ah] += a.psi[h];
    }
    let mut load = vec![0u32; nv];
    let mut sources: Vec<(&[u32], Vec<usize>)> = a
        .kappa
        .iter()
        .zip(&deg.src_vertices)
        .map(|(k, ws)| (k.as_slice(), ws.clone()))
        .collect();
    if let Some(b) = b {
        for (h, &p) in b.psi.iter().enumerate() {
            psi[h] += p;
        }
        for (v, k) in b.kappa.iter().enumerate() {
            sources.push((k.as_slice(), deg.assembly.part_vertices(v).collect()));
        }
    }
    for (h, &p) in psi.iter().enumerate() {
        load[graph.vertex_of(h)] += p;
    }
    if (0..nv).any(|v| load[v] > dims[v]) {
        return Vec::new();
    }
    let mut terms: HashMap<Decoration, i64> = HashMap::new();
    terms.insert((vec![Vec::new(); nv], psi), 1);
    for (mono, ws) in sources {
        for &kidx in mono {
            let mut next: HashMap<Decoration, i64> = HashMap::new();
            for ((kap, ps), c) in terms {
                for &w in &ws {
                    let used: u32 = kap[w].iter().sum::<u32>() + load_at(graph, &ps, w);
                    if used + kidx > dims[w] {
                        continue;
                    }
                    let mut k2 = kap.clone();
                    let pos = k2[w].partition_point(|&x| x <= kidx);
                    k2[w].insert(pos, kidx);
                    *next.entry((k2, ps.clone())).or_insert(0) += c;
                }
            }
            terms = next;
        }
    }
    for &e in &deg.excess {
        let (h0, h1) = graph.edge_half_edges(e);
        let mut next: HashMap<Decoration, i64> = HashMap::new();
        for ((kap, ps), c) in terms {
            for h in [h0, h1] {
                let w = graph.vertex_of(h);
                let used: u32 = kap[w].iter().sum::<u32>() + load_at(graph, &ps, w);
                if used + 1 > dims[w] {
                    continue;
                }
                let mut p2 = ps.clone();
                p2[h] += 1;
                *next.entry((kap.clone(), p2)).or_insert(0) -= c;
            }
        }
        terms = next;
    }
    terms.into_iter().filter(|(_, c)| *c != 0).collect()
}

fn load_at(graph: &StableGraph, psi: &[u32], w: usize) -> u32 {
    (0..psi.len())
        .filter(|&h| psi[h] > 0 && graph.vertex_of(h) == w)
        .map(|h| psi[h])
        .sum()
}

/// Orders a pair so the target has at least as many edges as the source.
fn orient<'a>(a: &'a DecoratedGraph, b: &'a DecoratedGraph) -> (&'a DecoratedGraph, &'a DecoratedGraph) {
    if a.graph.num_edges() > b.graph.num_edges() {
        (b, a)
    } else {
        (a, b)
    }
}

/// Product of two basis elements, as canonical decorated graphs with
/// rational coefficients.
pub(crate) fn basic_product(a: &DecoratedGraph, b: &DecoratedGraph) -> Vec<(DecoratedGraph, Rational)> {
    let (src, tgt) = orient(a, b);
    let degs = degenerations(&src.graph, &tgt.graph).expect("types agree");
    let mut acc: BTreeMap<DecoratedGraph, Rational> = BTreeMap::new();
    for deg in degs.iter() {
        for ((kappa, psi), c) in expand(deg, src, Some(tgt)) {
            let dg = DecoratedGraph {
                graph: deg.assembly.graph.clone(),
                kappa,
                psi,
            }
            .canonical();
            *acc.entry(dg).or_insert_with(Rational::zero) += &deg.weight * rat_int(c);
        }
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// ∫ x · b without materializing the product.
pub fn pairing_terms<S: Scalar>(x: &TautClass<S>, b: &DecoratedGraph) -> Result<S> {
    if (x.g(), x.n()) != (b.graph.genus(), b.graph.n()) {
        return Err(TautError::Mismatch("pairing across different types".into()));
    }
    let dim = x.dim();
    let mut acc = S::zero();
    for (a, c) in x.terms() {
        if a.degree() + b.degree() != dim {
            continue;
        }
        let (src, tgt) = orient(a, b);
        let mut val = Rational::zero();
        for deg in degenerations(&src.graph, &tgt.graph)?.iter() {
            let mut sub = Rational::zero();
            for ((kappa, psi), k) in expand(deg, src, Some(tgt)) {
                let dg = DecoratedGraph {
                    graph: deg.assembly.graph.clone(),
                    kappa,
                    psi,
                };
                sub += integrate_graph(&dg) * rat_int(k);
            }
            val += sub * &deg.weight;
        }
        acc.add_to(&c.scaled(&val));
    }
    Ok(acc)
}

/// A class on M̄_Γ = Π_v M̄_{g(v),n(v)}: combinations of tuples of decorated
/// graphs, one per vertex of `target`, legs in local half-edge order.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorClass<S> {
    target: StableGraph,
    terms: BTreeMap<Vec<DecoratedGraph>, S>,
}

impl<S: Scalar> TensorClass<S> {
    pub fn zero(target: StableGraph) -> Self {
        TensorClass {
            target,
            terms: BTreeMap::new(),
        }
    }

    pub fn target(&self) -> &StableGraph {
        &self.target
    }

    /// Types (g(v), n(v)) of the factors.
    pub fn factor_types(&self) -> Vec<(u32, usize)> {
        (0..self.target.num_vertices())
            .map(|v| (self.target.genera[v], self.target.valence(v)))
            .collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<DecoratedGraph>, &S)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, parts: Vec<DecoratedGraph>, c: S) {
        if c.is_zero() || parts.iter().any(|p| !p.within_bounds()) {
            return;
        }
        let key: Vec<DecoratedGraph> = parts.iter().map(DecoratedGraph::canonical).collect();
        match self.terms.get_mut(&key) {
            Some(v) => {
                v.add_to(&c);
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// Tensor product of one class per factor.
    pub fn from_factors(target: StableGraph, factors: &[TautClass<S>]) -> Result<Self> {
        let mut out = Self::zero(target);
        let types = out.factor_types();
        if factors.len() != types.len()
            || factors.iter().zip(&types).any(|(f, t)| (f.g(), f.n()) != *t)
        {
            return Err(TautError::Mismatch("factor types do not match the graph".into()));
        }
        let lists: Vec<Vec<(&DecoratedGraph, &S)>> =
            factors.iter().map(|f| f.terms().collect()).collect();
        for combo in lists.iter().map(|l| l.iter()).multi_cartesian_product() {
            let mut c = S::one();
            let mut parts = Vec::new();
            for (dg, s) in combo {
                c = c.times(s);
                parts.push((*dg).clone());
            }
            out.add_term(parts, c);
        }
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        if self.target != other.target {
            return Err(TautError::Mismatch("tensor classes on different graphs".into()));
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v.clone());
        }
        Ok(())
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        let neg = TensorClass {
            target: other.target.clone(),
            terms: other.terms.iter().map(|(k, v)| (k.clone(), v.negated())).collect(),
        };
        out.add_assign(&neg)?;
        Ok(out)
    }

    pub fn scaled(&self, s: &S) -> Self {
        let mut out = Self::zero(self.target.clone());
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.times(s));
        }
        out
    }

    /// ∫ over Π M̄_v of this class times `b_1 ⊗ ⋯ ⊗ b_k`.
    pub fn pair_with(&self, others: &[DecoratedGraph]) -> Result<S> {
        let mut acc = S::zero();
        for (parts, c) in &self.terms {
            let mut val = Rational::one();
            for (p, b) in parts.iter().zip(others) {
                let single: TautClass<Rational> = TautClass::from_graph(p.clone(), Rational::one());
                val *= pairing_terms(&single, b)?;
                if val.is_zero() {
                    break;
                }
            }
            acc.add_to(&c.scaled(&val));
        }
        Ok(acc)
    }

    /// Whether all pairings against tuples of basis elements of
    /// complementary total degree vanish.
    pub fn pairs_to_zero(&self) -> Result<bool> {
        if self.is_zero() {
            return Ok(true);
        }
        let types = self.factor_types();
        let mut degrees: Vec<u32> = self
            .terms
            .keys()
            .map(|p| p.iter().map(DecoratedGraph::degree).sum())
            .collect();
        degrees.sort_unstable();
        degrees.dedup();
        let dims: Vec<u32> = types.iter().map(|&(g, n)| 3 * g + n as u32 - 3).collect();
        let total: u32 = dims.iter().sum();
        for d in degrees {
            let part = TensorClass {
                target: self.target.clone(),
                terms: self
                    .terms
                    .iter()
                    .filter(|(p, _)| p.iter().map(DecoratedGraph::degree).sum::<u32>() == d)
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
            };
            let comp = total - d;
            for split in compositions(comp, types.len()) {
                if split.iter().zip(&dims).any(|(s, m)| s > m) {
                    continue;
                }
                let bases: Vec<Vec<DecoratedGraph>> = types
                    .iter()
                    .zip(&split)
                    .map(|(&(g, n), &s)| super::basis(g, n, s))
                    .collect::<Result<_>>()?;
                let tuples: Vec<Vec<DecoratedGraph>> = bases
                    .iter()
                    .map(|b| b.iter().cloned())
                    .multi_cartesian_product()
                    .collect();
                let bad = tuples
                    .par_iter()
                    .map(|t| part.pair_with(t).map(|v| !v.is_zero()))
                    .collect::<Result<Vec<bool>>>()?;
                if bad.into_iter().any(|b| b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl<S: Scalar> fmt::Display for TensorClass<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for (parts, c) in &self.terms {
            let p: Vec<String> = parts.iter().map(|x| format!("[{x}]")).collect();
            writeln!(f, "{c} * {}", p.join(" (x) "))?;
        }
        Ok(())
    }
}

/// Pullback along ξ_Γ for an arbitrary stable graph Γ of the same type.
pub fn pullback_boundary_to<S: Scalar>(x: &TautClass<S>, target: &StableGraph) -> Result<TensorClass<S>> {
    if (target.genus(), target.n()) != (x.g(), x.n()) {
        return Err(TautError::Mismatch("boundary graph of a different type".into()));
    }
    target.validate()?;
    let mut out = TensorClass::zero(target.clone());
    let trivial = DecoratedGraph::plain(target.clone());
    for (a, c) in x.terms() {
        for deg in degenerations(&a.graph, target)?.iter() {
            for ((kappa, psi), k) in expand(deg, a, Some(&trivial)) {
                let asm = &deg.assembly;
                let parts: Vec<DecoratedGraph> = (0..target.num_vertices())
                    .map(|v| {
                        let pg = asm.parts[v].clone();
                        let kap = asm.part_vertices(v).map(|w| kappa[w].clone()).collect();
                        let ps = (0..pg.num_half_edges())
                            .map(|h| psi[asm.part_half_edge(v, h)])
                            .collect();
                        DecoratedGraph {
                            graph: pg,
                            kappa: kap,
                            psi: ps,
                        }
                    })
                    .collect();
                out.add_term(parts, c.scaled(&(&deg.weight * rat_int(k))));
            }
        }
    }
    Ok(out)
}

/// Pullback along the gluing map of a one-edge graph.
pub fn pullback_boundary<S: Scalar>(x: &TautClass<S>, phi: &StableGraph) -> Result<TensorClass<S>> {
    if phi.num_edges() != 1 {
        return Err(TautError::InvalidArgument("boundary graph must have exactly one edge".into()));
    }
    pullback_boundary_to(x, phi)
}

/// Grafts one decorated graph into each vertex of `target`.
pub fn glue(target: &StableGraph, parts: &[DecoratedGraph]) -> Result<DecoratedGraph> {
    if parts.len() != target.num_vertices() {
        return Err(TautError::Mismatch("one part per vertex required".into()));
    }
    for (v, p) in parts.iter().enumerate() {
        if (p.graph.genus(), p.graph.n()) != (target.genera[v], target.valence(v)) {
            return Err(TautError::Mismatch(format!("part {v} has the wrong type")));
        }
    }
    let asm = assemble(target, parts.iter().map(|p| p.graph.clone()).collect());
    let mut kappa = Vec::new();
    for p in parts {
        kappa.extend(p.kappa.iter().cloned());
    }
    let mut psi = vec![0; asm.graph.num_half_edges()];
    for (v, p) in parts.iter().enumerate() {
        for (h, &y) in p.psi.iter().enumerate() {
            psi[asm.part_half_edge(v, h)] += y;
        }
    }
    Ok(DecoratedGraph {
        graph: asm.graph,
        kappa,
        psi,
    })
}

/// Pushforward along ξ_Γ; no automorphism factor.
pub fn pushforward_boundary<S: Scalar>(x: &TensorClass<S>) -> Result<TautClass<S>> {
    let t = x.target();
    check_stable(t.genus(), t.n())?;
    let mut out = TautClass::zero(t.genus(), t.n())?;
    for (parts, c) in x.terms() {
        out.add_term(glue(t, parts)?, c.clone());
    }
    Ok(out)
}
