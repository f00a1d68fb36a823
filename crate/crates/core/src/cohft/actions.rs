use std::collections::HashMap;
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;

use super::series::{EdgeSeries, RMatrix, TVector};
use super::{CohFT, FrobeniusData, SharedCohFT};
use crate::error::{Result, TautError};
use crate::graphs::{canonicalize, enumerate_stable_graphs, StableGraph};
use crate::scalar::{rat, Scalar};
use crate::strata::{pushforward_boundary, pushforward_forget, TautClass, TensorClass};

/// Keyed by (g, args, degree cap), the cap clamped to the dimension.
type Memo<S> = DashMap<(u32, Vec<usize>, u32), TautClass<S>>;

fn dim_of(g: u32, args: &[usize]) -> u32 {
    3 * g + args.len() as u32 - 3
}

fn memoized<S: Scalar>(
    memo: &Memo<S>,
    g: u32,
    args: &[usize],
    cap: u32,
    compute: impl FnOnce() -> Result<TautClass<S>>,
) -> Result<TautClass<S>> {
    let dim = dim_of(g, args);
    if let Some(v) = memo.get(&(g, args.to_vec(), dim)) {
        return Ok(v.truncated(cap));
    }
    let key = (g, args.to_vec(), cap);
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    // the lock must not be held while recursing
    let v = compute()?;
    memo.insert(key, v.clone());
    Ok(v)
}

fn check_args<S: Scalar>(frob: &FrobeniusData<S>, g: u32, args: &[usize]) -> Result<()> {
    if 2 * g as i64 - 2 + args.len() as i64 <= 0 {
        return Err(TautError::Unstable { g, n: args.len() });
    }
    if let Some(a) = args.iter().find(|&&a| a >= frob.rank()) {
        return Err(TautError::InvalidArgument(format!("basis index {a} out of range")));
    }
    Ok(())
}

/// ω_{g,n}(v_1, …, v_n) = ε(v_1 • ⋯ • v_n • H^g) times the fundamental class.
#[derive(Clone, Debug)]
pub struct Tqft<S> {
    frob: Arc<FrobeniusData<S>>,
}

impl<S: Scalar> Tqft<S> {
    pub fn new(frob: Arc<FrobeniusData<S>>) -> Self {
        Tqft { frob }
    }

    pub fn value(&self, g: u32, args: &[usize]) -> S {
        let f = &self.frob;
        let mut v = f.unit.clone();
        for &a in args {
            v = f.multiply(&v, &f.basis_vector(a));
        }
        let h = f.handle();
        for _ in 0..g {
            v = f.multiply(&v, &h);
        }
        f.pair(&v, &f.unit)
    }
}

impl<S: Scalar> CohFT<S> for Tqft<S> {
    fn frobenius(&self) -> &Arc<FrobeniusData<S>> {
        &self.frob
    }

    fn eval(&self, g: u32, args: &[usize]) -> Result<TautClass<S>> {
        check_args(&self.frob, g, args)?;
        Ok(TautClass::fundamental(g, args.len())?.scaled(&self.value(g, args)))
    }
}

/// R.Ω: a sum over stable graphs with Ω at vertices, R^{-1}(ψ) on legs and
/// the edge bivector on edges.
pub struct RAction<S: Scalar> {
    inner: SharedCohFT<S>,
    r: RMatrix<S>,
    rinv: RMatrix<S>,
    edge: Option<EdgeSeries<S>>,
    memo: Memo<S>,
}

impl<S: Scalar> RAction<S> {
    /// Fails unless R has the rank of the state space and is symplectic.
    pub fn new(r: RMatrix<S>, inner: SharedCohFT<S>) -> Result<Self> {
        let frob = inner.frobenius().clone();
        if r.rank() != frob.rank() {
            return Err(TautError::Mismatch(format!(
                "R matrix of rank {} on a rank {} theory",
                r.rank(),
                frob.rank()
            )));
        }
        if !r.is_symplectic(&frob.eta, &frob.eta_inv) {
            return Err(TautError::InvalidArgument("R matrix is not symplectic".into()));
        }
        let rinv = r.inverse();
        let edge = if r.order() >= 1 {
            Some(EdgeSeries::new(&rinv, &frob.eta_inv, r.order() - 1)?)
        } else {
            None
        };
        Ok(RAction {
            inner,
            r,
            rinv,
            edge,
            memo: DashMap::new(),
        })
    }

    pub fn r_matrix(&self) -> &RMatrix<S> {
        &self.r
    }

    fn graph_term(&self, graph: &StableGraph, args: &[usize], budget: u32) -> Result<TautClass<S>> {
        let frob = self.inner.frobenius();
        let rank = frob.rank();
        let nh = graph.num_half_edges();
        let n = graph.n();
        let vdims: Vec<u32> = (0..graph.num_vertices()).map(|v| graph.vertex_dim(v)).collect();

        // (k, b, coefficient) per leg
        let leg_options: Vec<Vec<(u32, usize, S)>> = args
            .iter()
            .map(|&a| {
                let mut opts = Vec::new();
                for k in 0..=budget.min(self.rinv.order() as u32) {
                    let m = self.rinv.coeff(k as usize);
                    for (b, row) in m.iter().enumerate() {
                        if !row[a].is_zero() {
                            opts.push((k, b, row[a].clone()));
                        }
                    }
                }
                opts
            })
            .collect();
        // (i, j, b, c, coefficient) per edge, the same for all edges
        let mut edge_options: Vec<(u32, u32, usize, usize, S)> = Vec::new();
        if graph.num_edges() > 0 {
            let edge = self.edge.as_ref().ok_or(TautError::Truncation { have: 0, need: 1 })?;
            for i in 0..=budget as usize {
                for j in 0..=(budget as usize - i) {
                    let Some(m) = edge.coeff(i, j) else { continue };
                    for b in 0..rank {
                        for c in 0..rank {
                            if !m[b][c].is_zero() {
                                edge_options.push((i as u32, j as u32, b, c, m[b][c].clone()));
                            }
                        }
                    }
                }
            }
        }

        struct State<S> {
            psi: Vec<u32>,
            label: Vec<usize>,
            load: Vec<u32>,
            used: u32,
            coeff: S,
        }
        let mut state = State {
            psi: vec![0; nh],
            label: vec![0; nh],
            load: vec![0; graph.num_vertices()],
            used: 0,
            coeff: S::one(),
        };
        let mut cache: HashMap<(usize, Vec<usize>, Vec<u32>, u32), TautClass<S>> = HashMap::new();
        let mut acc = TensorClass::zero(graph.clone());

        // depth-first over legs then edges
        #[allow(clippy::too_many_arguments)]
        fn walk<S: Scalar>(
            step: usize,
            graph: &StableGraph,
            n: usize,
            budget: u32,
            vdims: &[u32],
            legs: &[Vec<(u32, usize, S)>],
            edges: &[(u32, u32, usize, usize, S)],
            st: &mut State<S>,
            leaf: &mut dyn FnMut(&State<S>) -> Result<()>,
        ) -> Result<()> {
            let total = n + graph.num_edges();
            if step == total {
                return leaf(st);
            }
            if step < n {
                let v = graph.vertex_of(step);
                for (k, b, c) in &legs[step] {
                    if st.used + k > budget || st.load[v] + k > vdims[v] {
                        continue;
                    }
                    let saved = st.coeff.clone();
                    st.psi[step] = *k;
                    st.label[step] = *b;
                    st.load[v] += k;
                    st.used += k;
                    st.coeff = saved.times(c);
                    walk(step + 1, graph, n, budget, vdims, legs, edges, st, leaf)?;
                    st.load[v] -= k;
                    st.used -= k;
                    st.coeff = saved;
                }
            } else {
                let e = step - n;
                let (h0, h1) = graph.edge_half_edges(e);
                let (v0, v1) = (graph.vertex_of(h0), graph.vertex_of(h1));
                for (i, j, b, c, x) in edges {
                    if st.used + 1 + i + j > budget {
                        continue;
                    }
                    st.load[v0] += i;
                    st.load[v1] += j;
                    if st.load[v0] <= vdims[v0] && st.load[v1] <= vdims[v1] {
                        let saved = st.coeff.clone();
                        st.psi[h0] = *i;
                        st.psi[h1] = *j;
                        st.label[h0] = *b;
                        st.label[h1] = *c;
                        st.used += 1 + i + j;
                        st.coeff = saved.times(x);
                        walk(step + 1, graph, n, budget, vdims, legs, edges, st, leaf)?;
                        st.used -= 1 + i + j;
                        st.coeff = saved;
                    }
                    st.load[v0] -= i;
                    st.load[v1] -= j;
                }
            }
            Ok(())
        }

        // the graph itself has codimension |E|
        let start_used = 0;
        state.used = start_used;
        let inner = &self.inner;
        let mut leaf = |st: &State<S>| -> Result<()> {
            let mut factors = Vec::with_capacity(graph.num_vertices());
            for v in 0..graph.num_vertices() {
                let hs = graph.half_edges_at(v);
                let labels: Vec<usize> = hs.iter().map(|&h| st.label[h]).collect();
                let psi: Vec<u32> = hs.iter().map(|&h| st.psi[h]).collect();
                // total degree is st.used plus the vertex degrees
                let key = (v, labels, psi, budget - st.used);
                let class = match cache.get(&key) {
                    Some(c) => c.clone(),
                    None => {
                        let c = inner.eval_upto(graph.genera[v], &key.1, key.3)?.times_psi(&key.2)?;
                        cache.insert(key, c.clone());
                        c
                    }
                };
                if class.is_zero() {
                    return Ok(());
                }
                factors.push(class);
            }
            acc.add_assign(&TensorClass::from_factors(graph.clone(), &factors)?.scaled(&st.coeff))
        };
        walk(0, graph, n, budget, &vdims, &leg_options, &edge_options, &mut state, &mut leaf)?;
        let aut = canonicalize(graph).aut_order;
        Ok(pushforward_boundary(&acc)?
            .truncated(budget)
            .scaled_rational(&rat(1, aut as i64)))
    }
}

impl<S: Scalar> CohFT<S> for RAction<S> {
    fn frobenius(&self) -> &Arc<FrobeniusData<S>> {
        self.inner.frobenius()
    }

    fn eval(&self, g: u32, args: &[usize]) -> Result<TautClass<S>> {
        check_args(self.frobenius(), g, args)?;
        self.eval_upto(g, args, dim_of(g, args))
    }

    fn eval_upto(&self, g: u32, args: &[usize], max_deg: u32) -> Result<TautClass<S>> {
        check_args(self.frobenius(), g, args)?;
        let cap = max_deg.min(dim_of(g, args));
        memoized(&self.memo, g, args, cap, || {
            if (self.r.order() as u32) < cap {
                return Err(TautError::Truncation {
                    have: self.r.order(),
                    need: cap as usize,
                });
            }
            let graphs = enumerate_stable_graphs(g, args.len(), Some(cap as usize))?;
            let parts = graphs
                .par_iter()
                .map(|gr| self.graph_term(gr, args, cap))
                .collect::<Result<Vec<_>>>()?;
            let mut out = TautClass::zero(g, args.len())?;
            for p in &parts {
                out.add_assign(p)?;
            }
            Ok(out)
        })
    }
}

/// T.Ω = Σ_m (1/m!) p_{m*} Ω_{g,n+m}(⋯ ⊗ T(ψ_{n+1}) ⊗ ⋯ ⊗ T(ψ_{n+m})).
/// Coefficients of T past its stored order count as zero.
pub struct Translation<S: Scalar> {
    inner: SharedCohFT<S>,
    t: TVector<S>,
    memo: Memo<S>,
}

impl<S: Scalar> Translation<S> {
    pub fn new(t: TVector<S>, inner: SharedCohFT<S>) -> Result<Self> {
        let r = inner.frobenius().rank();
        if (0..=t.order()).any(|k| t.coeff(k).len() != r) {
            return Err(TautError::Mismatch("translation vector has the wrong rank".into()));
        }
        Ok(Translation {
            inner,
            t,
            memo: DashMap::new(),
        })
    }

    pub fn vector(&self) -> &TVector<S> {
        &self.t
    }
}

/// Nondecreasing tuples over `options` of length m with Σ weight ≤ cap.
fn multisets(options: &[(u32, usize)], m: usize, cap: u32) -> Vec<Vec<usize>> {
    fn rec(options: &[(u32, usize)], m: usize, cap: u32, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in from..options.len() {
            let w = options[i].0 - 1;
            if w <= cap {
                cur.push(i);
                rec(options, m, cap - w, i, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(options, m, cap, 0, &mut Vec::new(), &mut out);
    out
}

impl<S: Scalar> CohFT<S> for Translation<S> {
    fn frobenius(&self) -> &Arc<FrobeniusData<S>> {
        self.inner.frobenius()
    }

    fn eval(&self, g: u32, args: &[usize]) -> Result<TautClass<S>> {
        check_args(self.frobenius(), g, args)?;
        self.eval_upto(g, args, dim_of(g, args))
    }

    fn eval_upto(&self, g: u32, args: &[usize], max_deg: u32) -> Result<TautClass<S>> {
        check_args(self.frobenius(), g, args)?;
        let cap = max_deg.min(dim_of(g, args));
        memoized(&self.memo, g, args, cap, || {
            let n = args.len();
            // (k, b) with T_k[b] nonzero; each marking costs k - 1 after p_*
            let options: Vec<(u32, usize)> = (2..=self.t.order())
                .flat_map(|k| {
                    let v = self.t.coeff(k);
                    (0..v.len()).filter(move |&b| !v[b].is_zero()).map(move |b| (k as u32, b))
                })
                .collect();
            let mut out = self.inner.eval_upto(g, args, cap)?;
            for m in 1..=cap as usize {
                let tuples = multisets(&options, m, cap);
                let parts = tuples
                    .par_iter()
                    .map(|tuple| -> Result<TautClass<S>> {
                        let mut full = args.to_vec();
                        let mut psi = vec![0; n];
                        let mut coeff = S::one();
                        let mut weight = rat(1, 1);
                        let mut run = 0;
                        for (pos, &i) in tuple.iter().enumerate() {
                            let (k, b) = options[i];
                            full.push(b);
                            psi.push(k);
                            coeff = coeff.times(&self.t.coeff(k as usize)[b]);
                            run = if pos > 0 && tuple[pos - 1] == i { run + 1 } else { 1 };
                            weight = weight * rat(1, run);
                        }
                        // p_* of ψ^k costs k - 1 degrees per forgotten marking
                        let spent: u32 = psi[n..].iter().map(|k| k - 1).sum();
                        let mut x = self.inner.eval_upto(g, &full, cap - spent)?.times_psi(&psi)?;
                        for j in (n + 1..=n + m).rev() {
                            if x.is_zero() {
                                break;
                            }
                            x = pushforward_forget(&x, j)?;
                        }
                        Ok(x.scaled(&coeff).scaled_rational(&weight))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for p in &parts {
                    if !p.is_zero() {
                        out.add_assign(p)?;
                    }
                }
            }
            Ok(out)
        })
    }
}

pub fn r_action<S: Scalar>(r: RMatrix<S>, inner: SharedCohFT<S>) -> Result<SharedCohFT<S>> {
    Ok(Arc::new(RAction::new(r, inner)?))
}

pub fn translation_action<S: Scalar>(t: TVector<S>, inner: SharedCohFT<S>) -> Result<SharedCohFT<S>> {
    Ok(Arc::new(Translation::new(t, inner)?))
}

/// R.Ω := R(T.Ω) with T(z) = z(1 - R^{-1}(z))1, which keeps a unital
/// theory unital.
pub fn unit_r_action<S: Scalar>(r: RMatrix<S>, inner: SharedCohFT<S>) -> Result<SharedCohFT<S>> {
    let unit = inner.frobenius().unit.clone();
    let t = TVector::unit_translation(&r.inverse(), &unit);
    let translated = translation_action(t, inner)?;
    r_action(r, translated)
}
