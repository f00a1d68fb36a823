//! κ(f) = Σ_m (1/m!) p_{m*}(f(ψ_{n+1}) ⋯ f(ψ_{n+m})).
//!
//! Pushing forward a product of ψ-powers along p_m gives a sum over S_m of
//! products of κ classes over cycles; summing over m, this exponentiates:
//! κ(f) = exp(Σ_b c_b κ_b) with Σ_b c_b T^b = -log(1 - f(T)/T).

use std::collections::BTreeMap;

use super::{DecoratedGraph, TautClass};
use crate::error::{Result, TautError};
use crate::graphs::StableGraph;
use crate::scalar::{rat, Scalar};

/// Polynomial in κ_1, κ_2, …: sorted index multiset -> coefficient.
pub type KappaPolynomial<S> = BTreeMap<Vec<u32>, S>;

fn mul<S: Scalar>(a: &KappaPolynomial<S>, b: &KappaPolynomial<S>, max_deg: u32) -> KappaPolynomial<S> {
    let mut out: KappaPolynomial<S> = BTreeMap::new();
    for (ma, ca) in a {
        let da: u32 = ma.iter().sum();
        for (mb, cb) in b {
            if da + mb.iter().sum::<u32>() > max_deg {
                continue;
            }
            let mut m = ma.clone();
            m.extend(mb);
            m.sort_unstable();
            let e = out.entry(m).or_insert_with(S::zero);
            e.add_to(&ca.times(cb));
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// κ(f) as a polynomial in κ classes up to degree `max_deg`. `f[k]` is the
/// coefficient of T^k; `f[0]` and `f[1]` must vanish.
pub fn kappa_polynomial<S: Scalar>(f: &[S], max_deg: u32) -> Result<KappaPolynomial<S>> {
    if f.iter().take(2).any(|c| !c.is_zero()) {
        return Err(TautError::InvalidArgument(
            "κ(f) needs f with vanishing constant and linear terms".into(),
        ));
    }
    let len = max_deg as usize + 1;
    // h(T) = f(T)/T, no constant term
    let mut h = vec![S::zero(); len];
    for (k, c) in f.iter().enumerate().skip(2) {
        if k - 1 < len {
            h[k - 1] = c.clone();
        }
    }
    // c(T) = Σ_l h^l / l
    let mut c = vec![S::zero(); len];
    let mut power = h.clone();
    for l in 1..len {
        for (b, x) in power.iter().enumerate() {
            c[b].add_to(&x.scaled(&rat(1, l as i64)));
        }
        power = series_mul(&power, &h, len);
    }
    let mut linear: KappaPolynomial<S> = BTreeMap::new();
    for (b, x) in c.iter().enumerate().skip(1) {
        if !x.is_zero() {
            linear.insert(vec![b as u32], x.clone());
        }
    }
    let mut out: KappaPolynomial<S> = BTreeMap::new();
    out.insert(Vec::new(), S::one());
    let mut term = out.clone();
    for m in 1..=max_deg as i64 {
        term = mul(&term, &linear, max_deg);
        if term.is_empty() {
            break;
        }
        for (k, v) in &term {
            let e = out.entry(k.clone()).or_insert_with(S::zero);
            e.add_to(v);
        }
        // next power carries 1/(m+1)
        for v in term.values_mut() {
            *v = v.scaled(&rat(1, m + 1));
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn series_mul<S: Scalar>(a: &[S], b: &[S], len: usize) -> Vec<S> {
    let mut out = vec![S::zero(); len];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j].add_to(&x.times(y));
        }
    }
    out
}

/// κ(f) on M̄_{g,n}, truncated at degree `max_deg` (and at 3g - 3 + n).
pub fn kappa_series_class<S: Scalar>(g: u32, n: usize, f: &[S], max_deg: u32) -> Result<TautClass<S>> {
    let trivial = StableGraph::trivial(g, n)?;
    let cap = max_deg.min(trivial.dim());
    let poly = kappa_polynomial(f, cap)?;
    let mut out = TautClass::zero(g, n)?;
    for (mono, c) in poly {
        let mut dg = DecoratedGraph::plain(trivial.clone());
        dg.kappa[0] = mono;
        out.add_term(dg, c);
    }
    Ok(out)
}
