//! The strata algebra: decorated graphs, classes, product, boundary and
//! forgetful maps.

mod forgetful;
mod kappa;
mod product;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Result, TautError};
use crate::graphs::{canonical_labeling, enumerate_stable_graphs, StableGraph};
use crate::scalar::{Rational, Scalar};

pub use forgetful::{pullback_forgetful, pushforward_forget, pushforward_forgetful};
pub use kappa::{kappa_polynomial, kappa_series_class, KappaPolynomial};
pub use product::{
    glue, pairing_terms, pullback_boundary, pullback_boundary_to, pushforward_boundary,
    TensorClass,
};

/// A stable graph with κ-monomials at vertices and ψ-powers at half-edges.
///
/// `kappa[v]` is the sorted multiset of indices `i` of the factors `κ_i` at
/// `v`; `psi[h]` is the exponent of ψ at half-edge `h`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedGraph {
    pub graph: StableGraph,
    pub kappa: Vec<Vec<u32>>,
    pub psi: Vec<u32>,
}

impl DecoratedGraph {
    pub fn plain(graph: StableGraph) -> Self {
        DecoratedGraph {
            kappa: vec![Vec::new(); graph.num_vertices()],
            psi: vec![0; graph.num_half_edges()],
            graph,
        }
    }

    pub fn vertex_degree(&self, v: usize) -> u32 {
        let k: u32 = self.kappa[v].iter().sum();
        let p: u32 = self.graph.half_edges_at(v).iter().map(|&h| self.psi[h]).sum();
        k + p
    }

    pub fn degree(&self) -> u32 {
        self.graph.num_edges() as u32
            + self.kappa.iter().flatten().sum::<u32>()
            + self.psi.iter().sum::<u32>()
    }

    /// Every vertex carries a decoration of degree at most its dimension.
    pub fn within_bounds(&self) -> bool {
        (0..self.graph.num_vertices()).all(|v| self.vertex_degree(v) <= self.graph.vertex_dim(v))
    }

    fn labels(&self) -> Vec<Vec<u32>> {
        (0..self.graph.num_vertices())
            .map(|v| {
                let mut l = vec![self.graph.genera[v]];
                l.extend(&self.kappa[v]);
                l
            })
            .collect()
    }

    /// Canonical representative together with the automorphism order.
    pub fn canonical_with_aut(&self) -> (Self, u64) {
        let labels = self.labels();
        let lab = canonical_labeling(&self.graph, &labels, &self.psi);
        let perm = &lab.leaves[0];
        let (graph, hmap) = lab.relabel(&self.graph, &self.psi);
        let mut kappa = vec![Vec::new(); perm.len()];
        for (v, &p) in perm.iter().enumerate() {
            kappa[p] = self.kappa[v].clone();
        }
        let mut psi = vec![0; self.psi.len()];
        for (h, &nh) in hmap.iter().enumerate() {
            psi[nh] = self.psi[h];
        }
        (DecoratedGraph { graph, kappa, psi }, lab.aut_order())
    }

    pub fn canonical(&self) -> Self {
        self.canonical_with_aut().0
    }

    pub fn aut_order(&self) -> u64 {
        self.canonical_with_aut().1
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: &str| TautError::Parse(format!("{m}: `{s}`"));
        let sections: Vec<&str> = s.split(';').map(str::trim).collect();
        if sections.len() < 4 {
            return Err(bad("too few sections"));
        }
        let graph = StableGraph::parse(&sections[..4].join("; "))?;
        let mut dg = DecoratedGraph::plain(graph);
        for sec in &sections[4..] {
            if let Some(rest) = sec.strip_prefix("K v") {
                let (v, mons) = rest.split_once(':').ok_or_else(|| bad("bad K section"))?;
                let v: usize = v.trim().parse().map_err(|_| bad("bad vertex"))?;
                if v >= dg.kappa.len() {
                    return Err(bad("vertex out of range"));
                }
                for m in mons.split_whitespace() {
                    let (i, x) = m.split_once('^').ok_or_else(|| bad("bad kappa"))?;
                    let i: u32 = i.parse().map_err(|_| bad("bad kappa"))?;
                    let x: usize = x.parse().map_err(|_| bad("bad kappa"))?;
                    if i == 0 {
                        return Err(bad("kappa index must be positive"));
                    }
                    dg.kappa[v].extend(std::iter::repeat(i).take(x));
                }
                dg.kappa[v].sort_unstable();
            } else if let Some(rest) = sec.strip_prefix("P h") {
                let (h, y) = rest.split_once(':').ok_or_else(|| bad("bad P section"))?;
                let h: usize = h.trim().parse().map_err(|_| bad("bad half-edge"))?;
                if h >= dg.psi.len() {
                    return Err(bad("half-edge out of range"));
                }
                dg.psi[h] = y.trim().parse().map_err(|_| bad("bad psi power"))?;
            } else {
                return Err(bad("unknown section"));
            }
        }
        Ok(dg)
    }
}

impl fmt::Display for DecoratedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.graph)?;
        for (v, k) in self.kappa.iter().enumerate() {
            if k.is_empty() {
                continue;
            }
            write!(f, "; K v{v}:")?;
            let mut i = 0;
            while i < k.len() {
                let j = k[i..].iter().take_while(|&&x| x == k[i]).count();
                write!(f, " {}^{}", k[i], j)?;
                i += j;
            }
        }
        for (h, &y) in self.psi.iter().enumerate() {
            if y > 0 {
                write!(f, "; P h{h}: {y}")?;
            }
        }
        Ok(())
    }
}

/// A finite combination of decorated graphs of type (g, n).
#[derive(Clone, Debug, PartialEq)]
pub struct TautClass<S> {
    g: u32,
    n: usize,
    terms: BTreeMap<DecoratedGraph, S>,
}

pub(crate) fn check_stable(g: u32, n: usize) -> Result<()> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        Err(TautError::Unstable { g, n })
    } else {
        Ok(())
    }
}

impl<S: Scalar> TautClass<S> {
    pub fn zero(g: u32, n: usize) -> Result<Self> {
        check_stable(g, n)?;
        Ok(TautClass {
            g,
            n,
            terms: BTreeMap::new(),
        })
    }

    pub fn fundamental(g: u32, n: usize) -> Result<Self> {
        let mut x = Self::zero(g, n)?;
        x.add_term(DecoratedGraph::plain(StableGraph::trivial(g, n)?), S::one());
        Ok(x)
    }

    /// `c` times a single decorated graph.
    pub fn from_graph(dg: DecoratedGraph, c: S) -> Self {
        let mut x = TautClass {
            g: dg.graph.genus(),
            n: dg.graph.n(),
            terms: BTreeMap::new(),
        };
        x.add_term(dg, c);
        x
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> u32 {
        (3 * self.g as i64 - 3 + self.n as i64) as u32
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DecoratedGraph, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, dg: &DecoratedGraph) -> S {
        self.terms
            .get(&dg.canonical())
            .cloned()
            .unwrap_or_else(S::zero)
    }

    /// Adds `c · dg`; `dg` is canonicalized, and dropped if it violates a
    /// vertex bound.
    pub fn add_term(&mut self, dg: DecoratedGraph, c: S) {
        debug_assert_eq!((dg.graph.genus(), dg.graph.n()), (self.g, self.n));
        if c.is_zero() || !dg.within_bounds() {
            return;
        }
        self.add_canonical(dg.canonical(), c);
    }

    pub(crate) fn add_canonical(&mut self, dg: DecoratedGraph, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&dg) {
            Some(v) => {
                v.add_to(&c);
                if v.is_zero() {
                    self.terms.remove(&dg);
                }
            }
            None => {
                self.terms.insert(dg, c);
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if (self.g, self.n) != (other.g, other.n) {
            return Err(TautError::Mismatch(format!(
                "classes on ({}, {}) and ({}, {})",
                self.g, self.n, other.g, other.n
            )));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same(other)?;
        for (dg, c) in &other.terms {
            self.add_canonical(dg.clone(), c.clone());
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.negated())
    }

    pub fn negated(&self) -> Self {
        self.map_coeffs(|c| c.negated())
    }

    pub fn scaled(&self, s: &S) -> Self {
        self.map_coeffs(|c| c.times(s))
    }

    pub fn scaled_rational(&self, q: &Rational) -> Self {
        self.map_coeffs(|c| c.scaled(q))
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TautClass<T> {
        TautClass {
            g: self.g,
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), f(v)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// Degrees present, ascending.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(DecoratedGraph::degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn degree_part(&self, d: u32) -> Self {
        TautClass {
            g: self.g,
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.degree() == d)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Drops all terms of degree above `d`.
    pub fn truncated(&self, d: u32) -> Self {
        TautClass {
            g: self.g,
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.degree() <= d)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Product in the strata algebra.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let dim = self.dim();
        let pairs: Vec<(&DecoratedGraph, &S, &DecoratedGraph, &S)> = self
            .terms
            .iter()
            .flat_map(|(a, ca)| other.terms.iter().map(move |(b, cb)| (a, ca, b, cb)))
            .filter(|(a, _, b, _)| a.degree() + b.degree() <= dim)
            .collect();
        let parts: Vec<Vec<(DecoratedGraph, S)>> = pairs
            .par_iter()
            .map(|(a, ca, b, cb)| {
                let c = ca.times(cb);
                product::basic_product(a, b)
                    .into_iter()
                    .map(|(dg, q)| (dg, c.scaled(&q)))
                    .collect()
            })
            .collect();
        let mut out = Self::zero(self.g, self.n)?;
        for (dg, c) in parts.into_iter().flatten() {
            out.add_canonical(dg, c);
        }
        Ok(out)
    }

    /// Multiplies by Π ψ_i^{e_i}. On a stratum, ψ_i restricts to the ψ class
    /// of the half-edge carrying leg i, so this is a relabeling of exponents.
    pub fn times_psi(&self, exps: &[u32]) -> Result<Self> {
        if exps.len() != self.n {
            return Err(TautError::InvalidArgument("one exponent per marking".into()));
        }
        if exps.iter().all(|&e| e == 0) {
            return Ok(self.clone());
        }
        let mut out = Self::zero(self.g, self.n)?;
        for (dg, c) in &self.terms {
            let mut d = dg.clone();
            for (i, &e) in exps.iter().enumerate() {
                d.psi[i] += e;
            }
            out.add_term(d, c.clone());
        }
        Ok(out)
    }

    /// Reorders the markings: marking `i` of the result is marking `perm[i]`
    /// (both 1-based) of `self`.
    pub fn permute_markings(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(TautError::InvalidArgument("permutation length".into()));
        }
        let mut out = Self::zero(self.g, self.n)?;
        for (dg, c) in &self.terms {
            let mut d = dg.clone();
            for (i, &p) in perm.iter().enumerate() {
                d.graph.legs[i] = dg.graph.legs[p - 1];
                d.psi[i] = dg.psi[p - 1];
            }
            out.add_term(d, c.clone());
        }
        Ok(out)
    }

    /// Lines `<coeff> * <decorated graph>`, sorted.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| format!("{v} * {k}"))
            .collect();
        lines.sort();
        lines
    }

    pub fn parse(g: u32, n: usize, text: &str) -> Result<Self> {
        let mut out = Self::zero(g, n)?;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line == "0" {
                continue;
            }
            let (c, dg) = line
                .split_once(" * G ")
                .ok_or_else(|| TautError::Parse(format!("bad term `{line}`")))?;
            let c = S::parse_scalar(c)
                .ok_or_else(|| TautError::Parse(format!("bad coefficient `{c}`")))?;
            let dg = DecoratedGraph::parse(&format!("G {dg}"))?;
            if (dg.graph.genus(), dg.graph.n()) != (g, n) {
                return Err(TautError::Mismatch(format!("term `{line}` not of type ({g}, {n})")));
            }
            out.add_term(dg, c);
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Display for TautClass<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for l in self.to_lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// All decorated graphs of degree `d`, deterministic order. Empty when `d`
/// is out of range.
pub fn basis(g: u32, n: usize, d: u32) -> Result<Vec<DecoratedGraph>> {
    check_stable(g, n)?;
    let dim = (3 * g as i64 - 3 + n as i64) as u32;
    if d > dim {
        return Ok(Vec::new());
    }
    let graphs = enumerate_stable_graphs(g, n, Some(d as usize))?;
    let found: Vec<DecoratedGraph> = graphs
        .par_iter()
        .flat_map_iter(|gr| {
            let rest = d - gr.num_edges() as u32;
            let mut out = Vec::new();
            decorate(gr, 0, rest, &mut DecoratedGraph::plain(gr.clone()), &mut out);
            out.into_iter().map(|x| x.canonical())
        })
        .collect();
    let mut all: Vec<DecoratedGraph> = found;
    all.sort();
    all.dedup();
    Ok(all)
}

fn decorate(
    gr: &StableGraph,
    v: usize,
    rest: u32,
    cur: &mut DecoratedGraph,
    out: &mut Vec<DecoratedGraph>,
) {
    if v == gr.num_vertices() {
        if rest == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let cap = gr.vertex_dim(v).min(rest);
    let hs = gr.half_edges_at(v);
    for dv in 0..=cap {
        for kdeg in 0..=dv {
            for part in partitions(kdeg, kdeg) {
                for psis in compositions(dv - kdeg, hs.len()) {
                    cur.kappa[v] = part.clone();
                    for (&h, &p) in hs.iter().zip(&psis) {
                        cur.psi[h] = p;
                    }
                    decorate(gr, v + 1, rest - dv, cur, out);
                }
            }
        }
    }
    cur.kappa[v].clear();
    for &h in &hs {
        cur.psi[h] = 0;
    }
}

/// Partitions of `n` into parts at most `max`, each sorted ascending.
pub(crate) fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(n)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.push(first);
            out.push(rest);
        }
    }
    for p in &mut out {
        p.sort_unstable();
    }
    out
}

/// Weak compositions of `n` into `k` parts.
pub(crate) fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Index map of a basis for fast lookup.
pub fn basis_index(b: &[DecoratedGraph]) -> BTreeMap<DecoratedGraph, usize> {
    b.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect()
}
