//! The r = 3 theory: the series B₀ and B₁, the edge factor, the relation
//! classes R^d_{g,A}, the A₂ Frobenius manifold and its R-matrix, and
//! Witten's 3-spin class.
//!
//! Parities of ζ_v are tracked as bits (ζ² = 1); the coefficient of
//! ζ_v^{g(v)-1} is read modulo 2, so genus-0 vertices select odd parity.

mod a2;

use std::collections::BTreeMap;
use std::sync::Arc;

use dashmap::DashMap;
use num_traits::{One, Zero};
use rayon::prelude::*;

pub use a2::{
    a2_frobenius, a2_frobenius_hat, a2_rmatrix, a2_rmatrix_closed, a2_rmatrix_recursion, a2_tqft_value,
    mu_hat, shifted_witten_action, shifted_witten_formula, shifted_witten_table, to_flat_frame, witten_frobenius,
    xi_hat, ShiftedWittenFormula,
};

use crate::cohft::{CohFT, FrobeniusData};
use crate::error::{Result, TautError};
use crate::graphs::{canonicalize, enumerate_stable_graphs, StableGraph};
use crate::scalar::{factorial, rat, rat_int, Rational};
use crate::strata::{kappa_polynomial, pushforward_forget, DecoratedGraph, TautClass};

/// (6m)! / ((2m)! (3m)!).
fn central(m: u64) -> Rational {
    Rational::from_integer(factorial(6 * m) / (factorial(2 * m) * factorial(3 * m)))
}

/// Coefficients of B₀ (`which = 0`) or B₁ (`which = 1`) through T^order.
pub fn b_series(which: u8, order: usize) -> Vec<Rational> {
    (0..=order as u64)
        .map(|m| {
            let sign = if m % 2 == 0 { rat_int(1) } else { rat_int(-1) };
            let c = central(m) * sign;
            if which == 0 {
                c
            } else {
                c * rat(1 + 6 * m as i64, 1 - 6 * m as i64)
            }
        })
        .collect()
}

/// Even or odd degree part of a series.
pub fn parity_part(series: &[Rational], odd: bool) -> Vec<Rational> {
    series
        .iter()
        .enumerate()
        .map(|(k, c)| if (k % 2 == 1) == odd { c.clone() } else { Rational::zero() })
        .collect()
}

/// The edge factor Δ_e: `coeffs[(p, q)][(i, j)]` is the coefficient of
/// ζ'^p ζ''^q ψ'^i ψ''^j, through total ψ-degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFactor {
    pub order: usize,
    pub coeffs: BTreeMap<(u8, u8), BTreeMap<(u32, u32), Rational>>,
}

impl EdgeFactor {
    pub fn coeff(&self, p: u8, q: u8, i: u32, j: u32) -> Rational {
        self.coeffs
            .get(&(p, q))
            .and_then(|m| m.get(&(i, j)))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// All nonzero (p, q, i, j, coefficient) with i + j ≤ `max_deg`.
    pub fn terms(&self, max_deg: u32) -> Vec<(u8, u8, u32, u32, Rational)> {
        let mut out = Vec::new();
        for (&(p, q), m) in &self.coeffs {
            for (&(i, j), c) in m {
                if i + j <= max_deg {
                    out.push((p, q, i, j, c.clone()));
                }
            }
        }
        out
    }
}

/// Divides ζ' + ζ'' - B₀(ζ'ψ')ζ''B₁(ζ''ψ'') - ζ'B₁(ζ'ψ')B₀(ζ''ψ'') by
/// ψ' + ψ'' in each parity sector, insisting on a zero remainder.
pub fn edge_factor(order: usize) -> Result<EdgeFactor> {
    let top = order + 1;
    let b0 = b_series(0, top);
    let b1 = b_series(1, top);
    // numerator[(p, q)][i][j]
    let mut num: BTreeMap<(u8, u8), Vec<Vec<Rational>>> = BTreeMap::new();
    let mut add = |p: u8, q: u8, i: usize, j: usize, c: Rational| {
        let m = num.entry((p, q)).or_insert_with(|| vec![vec![Rational::zero(); top + 1]; top + 1]);
        m[i][j] += c;
    };
    add(1, 0, 0, 0, rat_int(1));
    add(0, 1, 0, 0, rat_int(1));
    for i in 0..=top {
        for j in 0..=(top - i) {
            let (pi, pj) = ((i % 2) as u8, (j % 2) as u8);
            // B₀(ζ'ψ') ζ'' B₁(ζ''ψ'')
            add(pi, 1 - pj, i, j, -(&b0[i] * &b1[j]));
            // ζ' B₁(ζ'ψ') B₀(ζ''ψ'')
            add(1 - pi, pj, i, j, -(&b1[i] * &b0[j]));
        }
    }
    let mut coeffs = BTreeMap::new();
    for (sector, n) in num {
        if !n[0][0].is_zero() {
            return Err(TautError::Remainder(format!("constant term in sector {sector:?}")));
        }
        let mut q: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for s in 1..=top {
            // n_{i, s-i} = q_{i-1, s-i} + q_{i, s-1-i}
            let mut prev = Rational::zero();
            for i in 0..s {
                let cur = &n[i][s - i] - &prev;
                if !cur.is_zero() {
                    q.insert((i as u32, (s - 1 - i) as u32), cur.clone());
                }
                prev = cur;
            }
            if n[s][0] != prev {
                return Err(TautError::Remainder(format!("sector {sector:?} at degree {s}")));
            }
        }
        if !q.is_empty() {
            coeffs.insert(sector, q);
        }
    }
    Ok(EdgeFactor { order, coeffs })
}

/// κ(T - T·B₀(T)) as (κ-monomial, degree, coefficient), through `max_deg`.
/// With ζ restored, each monomial of degree k carries ζ^k.
fn vertex_kappa_terms(max_deg: u32) -> Result<Vec<(Vec<u32>, u32, Rational)>> {
    let b0 = b_series(0, max_deg as usize + 1);
    let mut f = vec![Rational::zero(); max_deg as usize + 2];
    for m in 1..=max_deg as usize {
        f[m + 1] = -b0[m].clone();
    }
    Ok(kappa_polynomial(&f, max_deg)?
        .into_iter()
        .map(|(mono, c)| {
            let d = mono.iter().sum();
            (mono, d, c)
        })
        .collect())
}

fn check_residues(a: &[u8]) -> Result<()> {
    if let Some(x) = a.iter().find(|&&x| x > 1) {
        return Err(TautError::InvalidArgument(format!("entries of A must be 0 or 1, found {x}")));
    }
    Ok(())
}

/// Contribution of one stable graph to R^d_{g,A}.
fn relation_graph_term(
    graph: &StableGraph,
    a: &[u8],
    d: u32,
    edge: &EdgeFactor,
    kappa: &[(Vec<u32>, u32, Rational)],
    b: &[Vec<Rational>; 2],
) -> Result<TautClass<Rational>> {
    let g = graph.genus();
    let n = graph.n();
    let mut out = TautClass::zero(g, n)?;
    let ne = graph.num_edges() as u32;
    if ne > d {
        return Ok(out);
    }
    let budget = d - ne;
    let nv = graph.num_vertices();
    let vdims: Vec<u32> = (0..nv).map(|v| graph.vertex_dim(v)).collect();
    // target parity per vertex: g(v) - 1 mod 2
    let target: Vec<u8> = graph.genera.iter().map(|&gv| ((gv + 1) % 2) as u8).collect();
    let edge_terms = edge.terms(budget);

    struct St {
        psi: Vec<u32>,
        parity: Vec<u8>,
        load: Vec<u32>,
        used: u32,
        coeff: Rational,
    }
    let mut st = St {
        psi: vec![0; graph.num_half_edges()],
        parity: vec![0; nv],
        load: vec![0; nv],
        used: 0,
        coeff: Rational::one(),
    };

    let weight = rat(1, canonicalize(graph).aut_order as i64) / Rational::from_integer((1u64 << graph.h1()).into());

    #[allow(clippy::too_many_arguments)]
    fn vertices(
        v: usize,
        graph: &StableGraph,
        kappa: &[(Vec<u32>, u32, Rational)],
        target: &[u8],
        vdims: &[u32],
        budget: u32,
        st: &St,
        chosen: &mut Vec<Vec<u32>>,
        coeff: Rational,
        used: u32,
        out: &mut TautClass<Rational>,
        weight: &Rational,
    ) {
        if v == graph.num_vertices() {
            if used == budget {
                let dg = DecoratedGraph {
                    graph: graph.clone(),
                    kappa: chosen.clone(),
                    psi: st.psi.clone(),
                };
                out.add_term(dg, coeff * weight);
            }
            return;
        }
        for (mono, k, c) in kappa {
            if (st.parity[v] + (*k % 2) as u8) % 2 != target[v]
                || used + k > budget
                || st.load[v] + k > vdims[v]
            {
                continue;
            }
            chosen[v] = mono.clone();
            vertices(v + 1, graph, kappa, target, vdims, budget, st, chosen, &coeff * c, used + k, out, weight);
        }
        chosen[v] = Vec::new();
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        step: usize,
        graph: &StableGraph,
        a: &[u8],
        b: &[Vec<Rational>; 2],
        edge_terms: &[(u8, u8, u32, u32, Rational)],
        kappa: &[(Vec<u32>, u32, Rational)],
        target: &[u8],
        vdims: &[u32],
        budget: u32,
        st: &mut St,
        out: &mut TautClass<Rational>,
        weight: &Rational,
    ) {
        let n = graph.n();
        if step == n + graph.num_edges() {
            let mut chosen = vec![Vec::new(); graph.num_vertices()];
            let coeff = st.coeff.clone();
            vertices(0, graph, kappa, target, vdims, budget, st, &mut chosen, coeff, st.used, out, weight);
            return;
        }
        if step < n {
            let v = graph.vertex_of(step);
            let al = a[step] as usize;
            for k in 0..=(budget - st.used).min(vdims[v] - st.load[v]) {
                let c = &b[al][k as usize];
                if c.is_zero() {
                    continue;
                }
                // ζ^{a_l} B_{a_l}(ζψ): the ψ^k term has parity k + a_l
                let p = ((k as usize + al) % 2) as u8;
                let saved = st.coeff.clone();
                st.psi[step] = k;
                st.parity[v] ^= p;
                st.load[v] += k;
                st.used += k;
                st.coeff = &saved * c;
                walk(step + 1, graph, a, b, edge_terms, kappa, target, vdims, budget, st, out, weight);
                st.parity[v] ^= p;
                st.load[v] -= k;
                st.used -= k;
                st.coeff = saved;
            }
        } else {
            let (h0, h1) = graph.edge_half_edges(step - n);
            let (v0, v1) = (graph.vertex_of(h0), graph.vertex_of(h1));
            for (p, q, i, j, c) in edge_terms {
                if st.used + i + j > budget {
                    continue;
                }
                st.load[v0] += i;
                st.load[v1] += j;
                if st.load[v0] <= vdims[v0] && st.load[v1] <= vdims[v1] {
                    let saved = st.coeff.clone();
                    st.psi[h0] = *i;
                    st.psi[h1] = *j;
                    st.parity[v0] ^= p;
                    st.parity[v1] ^= q;
                    st.used += i + j;
                    st.coeff = &saved * c;
                    walk(step + 1, graph, a, b, edge_terms, kappa, target, vdims, budget, st, out, weight);
                    st.parity[v0] ^= p;
                    st.parity[v1] ^= q;
                    st.used -= i + j;
                    st.coeff = saved;
                }
                st.load[v0] -= i;
                st.load[v1] -= j;
            }
        }
    }

    walk(0, graph, a, b, &edge_terms, kappa, &target, &vdims, budget, &mut st, &mut out, &weight);
    Ok(out)
}

/// The degree-d part of R_{g,A}, a sum over stable graphs weighted by
/// 1/(|Aut Γ| 2^{h¹(Γ)}).
pub fn relation_class(g: u32, n: usize, a: &[u8], d: u32) -> Result<TautClass<Rational>> {
    let trivial = StableGraph::trivial(g, n)?;
    if a.len() != n {
        return Err(TautError::InvalidArgument(format!("A has {} entries, expected {n}", a.len())));
    }
    check_residues(a)?;
    let mut out = TautClass::zero(g, n)?;
    if d > trivial.dim() {
        return Ok(out);
    }
    let edge = edge_factor(d as usize)?;
    let kappa = vertex_kappa_terms(d)?;
    let b = [b_series(0, d as usize), b_series(1, d as usize)];
    let graphs = enumerate_stable_graphs(g, n, Some(d as usize))?;
    let parts = graphs
        .par_iter()
        .map(|gr| relation_graph_term(gr, a, d, &edge, &kappa, &b))
        .collect::<Result<Vec<_>>>()?;
    for p in &parts {
        out.add_assign(p)?;
    }
    Ok(out)
}

/// Admissible (A, d) with (g - 1 + Σa)/3 < d ≤ 3g - 3 + n.
pub fn ptilde_enumerate(g: u32, n: usize) -> Result<Vec<(Vec<u8>, u32)>> {
    let dim = StableGraph::trivial(g, n)?.dim();
    let mut out = Vec::new();
    for mask in 0u64..(1 << n) {
        let a: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
        let s: u32 = a.iter().map(|&x| x as u32).sum();
        for d in 0..=dim {
            // 3d > g - 1 + Σa
            if 3 * d as i64 > g as i64 - 1 + s as i64 {
                out.push((a.clone(), d));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// R^d_{g,A,σ} = p_* R^d_{g,(A, σ+3)} where an entry a ≥ 3 contributes
/// ψ^{⌊a/3⌋} times the relation for a mod 3 in degree d - ⌊a/3⌋.
pub fn extended_relation(g: u32, a: &[u32], sigma: &[u32], d: u32) -> Result<TautClass<Rational>> {
    let full: Vec<u32> = a.iter().copied().chain(sigma.iter().map(|s| s + 3)).collect();
    if let Some(x) = full.iter().find(|&&x| x % 3 == 2) {
        return Err(TautError::InvalidArgument(format!("entry {x} is 2 mod 3")));
    }
    let n = full.len();
    let residues: Vec<u8> = full.iter().map(|&x| (x % 3) as u8).collect();
    let lifts: Vec<u32> = full.iter().map(|&x| x / 3).collect();
    let shift: u32 = lifts.iter().sum();
    let mut x = if shift > d {
        TautClass::zero(g, n)?
    } else {
        relation_class(g, n, &residues, d - shift)?.times_psi(&lifts)?
    };
    for j in (a.len() + 1..=n).rev() {
        x = pushforward_forget(&x, j)?;
    }
    Ok(x)
}

/// Degree of Witten's 3-spin class, when it is an integer.
pub fn witten_degree(g: u32, a: &[u8]) -> Option<u32> {
    let s = g as i64 - 1 + a.iter().map(|&x| x as i64).sum::<i64>();
    (s >= 0 && s % 3 == 0).then(|| (s / 3) as u32)
}

/// W_{g,n}(a₁, …, a_n) = 2^g 1728^{-D} R^D_{g,A}, or 0 when D is not an
/// integer.
pub fn witten_class(g: u32, a: &[u8]) -> Result<TautClass<Rational>> {
    check_residues(a)?;
    let n = a.len();
    let Some(dd) = witten_degree(g, a) else {
        return TautClass::zero(g, n);
    };
    let r = relation_class(g, n, a, dd)?;
    let scale = Rational::from_integer(num_bigint::BigInt::from(2u32).pow(g))
        / Rational::from_integer(num_bigint::BigInt::from(1728u32).pow(dd));
    Ok(r.scaled_rational(&scale))
}

/// Witten's 3-spin class as a CohFT over the A₂ Frobenius algebra at τ = 0.
pub struct WittenCohFT {
    frob: Arc<FrobeniusData<Rational>>,
    memo: DashMap<(u32, Vec<usize>), TautClass<Rational>>,
}

impl WittenCohFT {
    pub fn new() -> Self {
        WittenCohFT {
            frob: Arc::new(witten_frobenius()),
            memo: DashMap::new(),
        }
    }
}

impl Default for WittenCohFT {
    fn default() -> Self {
        Self::new()
    }
}

impl CohFT<Rational> for WittenCohFT {
    fn frobenius(&self) -> &Arc<FrobeniusData<Rational>> {
        &self.frob
    }

    fn eval(&self, g: u32, args: &[usize]) -> Result<TautClass<Rational>> {
        let key = (g, args.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let a: Vec<u8> = args
            .iter()
            .map(|&x| u8::try_from(x).map_err(|_| TautError::InvalidArgument(format!("basis index {x}"))))
            .collect::<Result<_>>()?;
        let v = witten_class(g, &a)?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}
