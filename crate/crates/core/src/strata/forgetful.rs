//! Forgetful pushforward and pullback.

use super::{check_stable, DecoratedGraph, TautClass};
use crate::error::{Result, TautError};
use crate::graphs::StableGraph;
use crate::scalar::{rat_int, Scalar};

/// Free-form description of a decorated graph, assembled into normalized
/// form by [`Builder::build`].
#[derive(Clone, Debug, Default)]
pub(crate) struct Builder {
    pub genera: Vec<u32>,
    pub kappa: Vec<Vec<u32>>,
    /// (vertex, ψ exponent) per marking.
    pub legs: Vec<(usize, u32)>,
    /// (vertex, ψ, vertex, ψ) per edge.
    pub edges: Vec<(usize, u32, usize, u32)>,
}

impl Builder {
    pub fn from_decorated(dg: &DecoratedGraph) -> Self {
        let g = &dg.graph;
        let n = g.n();
        Builder {
            genera: g.genera.clone(),
            kappa: dg.kappa.clone(),
            legs: (0..n).map(|i| (g.legs[i], dg.psi[i])).collect(),
            edges: g
                .edges
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (a, dg.psi[n + 2 * k], b, dg.psi[n + 2 * k + 1]))
                .collect(),
        }
    }

    /// Removes vertex `v`; indices above it shift down. The vertex must no
    /// longer be referenced.
    pub fn remove_vertex(&mut self, v: usize) {
        self.genera.remove(v);
        self.kappa.remove(v);
        let fix = |w: &mut usize| {
            if *w > v {
                *w -= 1;
            }
        };
        for l in &mut self.legs {
            fix(&mut l.0);
        }
        for e in &mut self.edges {
            fix(&mut e.0);
            fix(&mut e.2);
        }
    }

    pub fn build(&self) -> DecoratedGraph {
        let n = self.legs.len();
        let graph = StableGraph {
            genera: self.genera.clone(),
            legs: self.legs.iter().map(|l| l.0).collect(),
            edges: self.edges.iter().map(|e| (e.0, e.2)).collect(),
        };
        let mut psi: Vec<u32> = self.legs.iter().map(|l| l.1).collect();
        psi.resize(n + 2 * self.edges.len(), 0);
        for (k, e) in self.edges.iter().enumerate() {
            psi[n + 2 * k] = e.1;
            psi[n + 2 * k + 1] = e.3;
        }
        DecoratedGraph {
            graph,
            kappa: self.kappa.clone(),
            psi,
        }
    }
}

/// Pushforward forgetting marking `i` (1-based); later markings shift down.
pub fn pushforward_forget<S: Scalar>(x: &TautClass<S>, i: usize) -> Result<TautClass<S>> {
    if i == 0 || i > x.n() {
        return Err(TautError::InvalidArgument(format!("no marking {i}")));
    }
    check_stable(x.g(), x.n() - 1)?;
    let mut out = TautClass::zero(x.g(), x.n() - 1)?;
    for (dg, c) in x.terms() {
        for (d, k) in push_term(dg, i - 1) {
            out.add_term(d, c.scaled(&rat_int(k)));
        }
    }
    Ok(out)
}

/// Pushforward forgetting the last marking.
pub fn pushforward_forgetful<S: Scalar>(x: &TautClass<S>) -> Result<TautClass<S>> {
    pushforward_forget(x, x.n())
}

fn push_term(dg: &DecoratedGraph, leg: usize) -> Vec<(DecoratedGraph, i64)> {
    let g = &dg.graph;
    let v = g.legs[leg];
    let mut b = Builder::from_decorated(dg);
    let (_, p_exp) = b.legs.remove(leg);
    let val = g.valence(v) as i64 - 1;
    let gv = g.genera[v] as i64;
    if 2 * gv - 2 + val <= 0 {
        // the vertex is a (0,3) bubble carrying no decoration: contract it
        return contract_bubble(b, v).into_iter().map(|d| (d, 1)).collect();
    }
    let kap = std::mem::take(&mut b.kappa[v]);
    let mut out = Vec::new();
    for mask in 0u32..(1 << kap.len()) {
        let mut rest = Vec::new();
        let mut e = p_exp;
        for (j, &kj) in kap.iter().enumerate() {
            if mask & (1 << j) != 0 {
                e += kj;
            } else {
                rest.push(kj);
            }
        }
        if e >= 1 {
            let mut t = b.clone();
            let mut coeff = 1;
            if e == 1 {
                coeff = 2 * gv - 2 + val;
            } else {
                rest.push(e - 1);
                rest.sort_unstable();
            }
            t.kappa[v] = rest;
            out.push((t.build(), coeff));
        } else {
            // string equation
            for li in 0..t_len(&b) {
                if let Some(t) = lower_psi(&b, v, li, &rest) {
                    out.push((t, 1));
                }
            }
        }
    }
    out
}

fn t_len(b: &Builder) -> usize {
    b.legs.len() + 2 * b.edges.len()
}

/// Lowers the ψ exponent of the `slot`-th half-edge of the builder (legs
/// first, then edge sides) if it sits at `v` and is positive.
fn lower_psi(b: &Builder, v: usize, slot: usize, kappa: &[u32]) -> Option<DecoratedGraph> {
    let mut t = b.clone();
    t.kappa[v] = kappa.to_vec();
    let n = t.legs.len();
    if slot < n {
        let l = &mut t.legs[slot];
        if l.0 != v || l.1 == 0 {
            return None;
        }
        l.1 -= 1;
    } else {
        let e = &mut t.edges[(slot - n) / 2];
        let side = if (slot - n) % 2 == 0 { (&e.0, &mut e.1) } else { (&e.2, &mut e.3) };
        if *side.0 != v || *side.1 == 0 {
            return None;
        }
        *side.1 -= 1;
    }
    Some(t.build())
}

fn contract_bubble(mut b: Builder, v: usize) -> Option<DecoratedGraph> {
    let legs_at: Vec<usize> = (0..b.legs.len()).filter(|&i| b.legs[i].0 == v).collect();
    let edges_at: Vec<usize> = (0..b.edges.len())
        .filter(|&k| b.edges[k].0 == v || b.edges[k].2 == v)
        .collect();
    // the far side of an edge at v
    let far = |e: &(usize, u32, usize, u32)| if e.0 == v { (e.2, e.3) } else { (e.0, e.1) };
    match (legs_at.len(), edges_at.len()) {
        (1, 1) => {
            let e = b.edges.remove(edges_at[0]);
            let (u, y) = far(&e);
            b.legs[legs_at[0]] = (u, y);
        }
        (0, 2) => {
            let e1 = b.edges[edges_at[0]];
            let e2 = b.edges[edges_at[1]];
            let (u1, y1) = far(&e1);
            let (u2, y2) = far(&e2);
            b.edges.remove(edges_at[1]);
            b.edges[edges_at[0]] = (u1, y1, u2, y2);
        }
        _ => return None,
    }
    b.remove_vertex(v);
    Some(b.build())
}

/// Pullback along the map forgetting a new last marking.
pub fn pullback_forgetful<S: Scalar>(x: &TautClass<S>) -> Result<TautClass<S>> {
    let mut out = TautClass::zero(x.g(), x.n() + 1)?;
    for (dg, c) in x.terms() {
        for (d, k) in pull_term(dg) {
            out.add_term(d, c.scaled(&rat_int(k)));
        }
    }
    Ok(out)
}

fn pull_term(dg: &DecoratedGraph) -> Vec<(DecoratedGraph, i64)> {
    let base = Builder::from_decorated(dg);
    let mut out = Vec::new();
    for v in 0..base.genera.len() {
        // new point on the component v, with κ_a ↦ κ_a - ψ_p^a
        let kap = base.kappa[v].clone();
        for mask in 0u32..(1 << kap.len()) {
            let mut t = base.clone();
            let mut rest = Vec::new();
            let mut e = 0;
            for (j, &kj) in kap.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    e += kj;
                } else {
                    rest.push(kj);
                }
            }
            t.kappa[v] = rest;
            t.legs.push((v, e));
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            out.push((t.build(), sign));
        }
        // corrections: the new point bubbles off with a ψ-decorated half-edge
        let n = base.legs.len();
        for i in 0..n {
            let (w, y) = base.legs[i];
            if w != v || y == 0 {
                continue;
            }
            let mut t = base.clone();
            let bub = t.genera.len();
            t.genera.push(0);
            t.kappa.push(Vec::new());
            t.legs[i] = (bub, 0);
            t.legs.push((bub, 0));
            t.edges.push((v, y - 1, bub, 0));
            out.push((t.build(), -1));
        }
        for k in 0..base.edges.len() {
            let e = base.edges[k];
            for side in 0..2 {
                let (w, y, u, z) = if side == 0 { e } else { (e.2, e.3, e.0, e.1) };
                if w != v || y == 0 {
                    continue;
                }
                let mut t = base.clone();
                let bub = t.genera.len();
                t.genera.push(0);
                t.kappa.push(Vec::new());
                t.edges[k] = (v, y - 1, bub, 0);
                t.edges.push((bub, 0, u, z));
                t.legs.push((bub, 0));
                out.push((t.build(), -1));
            }
        }
    }
    out
}
