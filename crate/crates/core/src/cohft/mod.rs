//! Cohomological field theories over a finite-dimensional space with a
//! metric: topological field theories, the R-matrix and translation actions,
//! axiom checks, and the Euler operator.
//!
//! A CohFT is evaluated lazily through the [`CohFT`] trait (each action
//! memoizes its values); [`CohFTTable`] materializes one up to a dimension
//! cap and refuses queries past it.

mod actions;
pub mod series;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;

pub use actions::{r_action, translation_action, unit_r_action, RAction, Tqft, Translation};
pub use series::{EdgeSeries, Mat, RMatrix, TVector};

use crate::error::{Result, TautError};
use crate::graphs::one_edge_graphs;
use crate::integrals::certify_zero;
use crate::scalar::{rat_int, Rational, Scalar};
use crate::strata::{pullback_boundary, pullback_forgetful, pushforward_forgetful, TautClass, TensorClass};
use series::{identity, mat_mul, transpose};

/// Euler field E = Σ (α_i t^i + β_i) ∂_i with conformal dimension δ.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerData<S> {
    pub alpha: Vec<Rational>,
    pub beta: Vec<S>,
    pub delta: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusData<S> {
    pub eta: Mat<S>,
    pub eta_inv: Mat<S>,
    pub unit: Vec<S>,
    /// `product[i][j]` holds the coordinates of e_i • e_j.
    pub product: Vec<Vec<Vec<S>>>,
    pub euler: Option<EulerData<S>>,
    /// Shifted degree operator, when known.
    pub mu: Option<Mat<S>>,
}

impl<S: Scalar> FrobeniusData<S> {
    pub fn new(eta: Mat<S>, eta_inv: Mat<S>, unit: Vec<S>, product: Vec<Vec<Vec<S>>>) -> Result<Self> {
        let f = FrobeniusData {
            eta,
            eta_inv,
            unit,
            product,
            euler: None,
            mu: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_euler(mut self, euler: EulerData<S>) -> Result<Self> {
        self.euler = Some(euler);
        self.validate()?;
        Ok(self)
    }

    pub fn with_mu(mut self, mu: Mat<S>) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn rank(&self) -> usize {
        self.eta.len()
    }

    pub fn basis_vector(&self, i: usize) -> Vec<S> {
        (0..self.rank()).map(|j| if i == j { S::one() } else { S::zero() }).collect()
    }

    pub fn multiply(&self, u: &[S], v: &[S]) -> Vec<S> {
        let r = self.rank();
        let mut out = vec![S::zero(); r];
        for i in 0..r {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..r {
                if v[j].is_zero() {
                    continue;
                }
                let c = u[i].times(&v[j]);
                for (o, p) in out.iter_mut().zip(&self.product[i][j]) {
                    if !p.is_zero() {
                        o.add_to(&c.times(p));
                    }
                }
            }
        }
        out
    }

    pub fn pair(&self, u: &[S], v: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                if !u[i].is_zero() && !v[j].is_zero() && !self.eta[i][j].is_zero() {
                    acc.add_to(&u[i].times(&self.eta[i][j]).times(&v[j]));
                }
            }
        }
        acc
    }

    /// η(e_a • e_b, e_c).
    pub fn three_point(&self, a: usize, b: usize, c: usize) -> S {
        self.pair(&self.product[a][b], &self.basis_vector(c))
    }

    /// Σ η^{jk} e_j • e_k.
    pub fn handle(&self) -> Vec<S> {
        let r = self.rank();
        let mut h = vec![S::zero(); r];
        for j in 0..r {
            for k in 0..r {
                if self.eta_inv[j][k].is_zero() {
                    continue;
                }
                for (o, p) in h.iter_mut().zip(&self.product[j][k]) {
                    o.add_to(&self.eta_inv[j][k].times(p));
                }
            }
        }
        h
    }

    /// Checks the structure exactly: metric, product, unit, Euler weights.
    pub fn validate(&self) -> Result<()> {
        let r = self.rank();
        let bad = |m: &str| Err(TautError::InvalidArgument(m.to_string()));
        if r == 0
            || self.eta.iter().any(|row| row.len() != r)
            || self.eta_inv.len() != r
            || self.unit.len() != r
            || self.product.len() != r
            || self.product.iter().any(|row| row.len() != r || row.iter().any(|v| v.len() != r))
        {
            return bad("inconsistent dimensions");
        }
        if self.eta != transpose(&self.eta) {
            return bad("metric is not symmetric");
        }
        if mat_mul(&self.eta, &self.eta_inv) != identity(r) {
            return bad("eta_inv is not the inverse of eta");
        }
        for i in 0..r {
            let e = self.basis_vector(i);
            if self.multiply(&self.unit, &e) != e {
                return bad("unit is not an identity for the product");
            }
            for j in 0..r {
                if self.product[i][j] != self.product[j][i] {
                    return bad("product is not commutative");
                }
                for k in 0..r {
                    let left = self.multiply(&self.product[i][j], &self.basis_vector(k));
                    let right = self.multiply(&e, &self.product[j][k]);
                    if left != right {
                        return bad("product is not associative");
                    }
                }
            }
        }
        if let Some(eu) = &self.euler {
            if eu.alpha.len() != r || eu.beta.len() != r {
                return bad("Euler data has the wrong length");
            }
            let two_minus = rat_int(2) - &eu.delta;
            for i in 0..r {
                for j in 0..r {
                    if !self.eta[i][j].is_zero() && &eu.alpha[i] + &eu.alpha[j] != two_minus {
                        return bad("metric is not an L_E eigenvector of weight 2 - delta");
                    }
                }
                if !self.unit[i].is_zero() && eu.alpha[i] != rat_int(1) {
                    return bad("unit is not an L_E eigenvector of weight -1");
                }
            }
        }
        Ok(())
    }
}

/// A CohFT evaluated on basis vectors.
pub trait CohFT<S: Scalar>: Send + Sync {
    fn frobenius(&self) -> &Arc<FrobeniusData<S>>;

    /// Ω_{g,n}(e_{a_1} ⊗ ⋯ ⊗ e_{a_n}).
    fn eval(&self, g: u32, args: &[usize]) -> Result<TautClass<S>>;

    /// The part of Ω_{g,n}(e_{a_1} ⊗ ⋯) of degree at most `max_deg`. Actions
    /// override this to skip work on degrees nobody asked for.
    fn eval_upto(&self, g: u32, args: &[usize], max_deg: u32) -> Result<TautClass<S>> {
        Ok(self.eval(g, args)?.truncated(max_deg))
    }

    /// Ω_{g,n} on arbitrary vectors, by multilinearity.
    fn eval_vectors(&self, g: u32, vecs: &[Vec<S>]) -> Result<TautClass<S>> {
        if vecs.is_empty() {
            return self.eval(g, &[]);
        }
        let mut out = TautClass::zero(g, vecs.len())?;
        let supports: Vec<Vec<usize>> = vecs
            .iter()
            .map(|v| (0..v.len()).filter(|&i| !v[i].is_zero()).collect())
            .collect();
        for args in supports.iter().map(|s| s.iter().copied()).multi_cartesian_product() {
            let mut c = S::one();
            for (v, &a) in vecs.iter().zip(&args) {
                c = c.times(&v[a]);
            }
            out.add_assign(&self.eval(g, &args)?.scaled(&c))?;
        }
        Ok(out)
    }
}

pub type SharedCohFT<S> = Arc<dyn CohFT<S>>;

/// Stable (g, n) with 3g - 3 + n ≤ cap.
pub fn stable_types(cap: u32) -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    let mut g = 0;
    while 3 * g <= cap + 3 {
        for n in 0..=(cap + 3 - 3 * g) as usize {
            if 2 * g as i64 - 2 + n as i64 > 0 {
                out.push((g, n));
            }
        }
        g += 1;
    }
    out
}

/// All argument tuples in {0..r}^n.
pub fn argument_tuples(r: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (0..n).map(|_| 0..r).multi_cartesian_product().collect()
}

/// A CohFT materialized for all stable (g, n) with 3g - 3 + n ≤ cap.
#[derive(Clone, Debug)]
pub struct CohFTTable<S> {
    frob: Arc<FrobeniusData<S>>,
    cap: u32,
    entries: BTreeMap<(u32, Vec<usize>), TautClass<S>>,
}

impl<S: Scalar> CohFTTable<S> {
    pub fn materialize(omega: &dyn CohFT<S>, cap: u32) -> Result<Self> {
        let r = omega.frobenius().rank();
        let keys: Vec<(u32, Vec<usize>)> = stable_types(cap)
            .into_iter()
            .flat_map(|(g, n)| argument_tuples(r, n).into_iter().map(move |a| (g, a)))
            .collect();
        let values = keys
            .par_iter()
            .map(|(g, a)| omega.eval(*g, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(CohFTTable {
            frob: omega.frobenius().clone(),
            cap,
            entries: keys.into_iter().zip(values).collect(),
        })
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, Vec<usize>), &TautClass<S>)> {
        self.entries.iter()
    }

    /// Overwrites one entry (used to build negative controls).
    pub fn set(&mut self, g: u32, args: Vec<usize>, value: TautClass<S>) -> Result<()> {
        if !self.entries.contains_key(&(g, args.clone())) {
            return Err(TautError::OutOfBound { g, n: args.len() });
        }
        self.entries.insert((g, args), value);
        Ok(())
    }

    /// Records `(g,n) [a1 .. an] :` followed by the class lines and a blank
    /// line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for ((g, args), v) in &self.entries {
            let a: Vec<String> = args.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("({g},{}) [{}] :\n{v}\n", args.len(), a.join(" ")));
        }
        out
    }

    pub fn parse(frob: Arc<FrobeniusData<S>>, cap: u32, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for block in text.split("\n\n").map(str::trim).filter(|b| !b.is_empty()) {
            let (head, body) = block.split_once('\n').unwrap_or((block, ""));
            let head = head
                .strip_suffix(':')
                .ok_or_else(|| TautError::Parse(format!("bad record header `{head}`")))?
                .trim();
            let (gn, args) = head
                .split_once(' ')
                .ok_or_else(|| TautError::Parse(format!("bad record header `{head}`")))?;
            let (g, n) = gn
                .trim_start_matches('(')
                .trim_end_matches(')')
                .split_once(',')
                .ok_or_else(|| TautError::Parse(format!("bad type `{gn}`")))?;
            let g: u32 = g.parse().map_err(|_| TautError::Parse(format!("bad genus `{g}`")))?;
            let n: usize = n.parse().map_err(|_| TautError::Parse(format!("bad n `{n}`")))?;
            let args: Vec<usize> = args
                .trim()
                .trim_start_matches('[')
                .trim_end_matches(']')
                .split_whitespace()
                .map(|a| a.parse().map_err(|_| TautError::Parse(format!("bad argument `{a}`"))))
                .collect::<Result<_>>()?;
            if args.len() != n {
                return Err(TautError::Parse(format!("record `{head}` has {} arguments", args.len())));
            }
            entries.insert((g, args), TautClass::parse(g, n, body)?);
        }
        Ok(CohFTTable { frob, cap, entries })
    }
}

impl<S: Scalar> PartialEq for CohFTTable<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cap == other.cap && self.entries == other.entries
    }
}

impl<S: Scalar> CohFT<S> for CohFTTable<S> {
    fn frobenius(&self) -> &Arc<FrobeniusData<S>> {
        &self.frob
    }

    fn eval(&self, g: u32, args: &[usize]) -> Result<TautClass<S>> {
        self.entries
            .get(&(g, args.to_vec()))
            .cloned()
            .ok_or(TautError::OutOfBound { g, n: args.len() })
    }
}

/// Equality in cohomology: formal equality, or every homogeneous part of the
/// difference pairs to zero with the complementary basis.
pub fn same_class<S: Scalar>(a: &TautClass<S>, b: &TautClass<S>) -> Result<bool> {
    if a == b {
        return Ok(true);
    }
    let diff = a.minus(b)?;
    for d in diff.degrees() {
        if !certify_zero(&diff.degree_part(d))?.certified() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn same_tensor<S: Scalar>(a: &TensorClass<S>, b: &TensorClass<S>) -> Result<bool> {
    if a == b {
        return Ok(true);
    }
    a.minus(b)?.pairs_to_zero()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxiomReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(what());
        }
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "checked {} identities, {} violations", self.checked, self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Checks symmetry, splitting and (when `unit` is set) the unit axiom on all
/// stable (g, n) with 3g - 3 + n ≤ cap.
pub fn check_axioms<S: Scalar>(omega: &dyn CohFT<S>, cap: u32, unit: bool) -> Result<AxiomReport> {
    let mut report = AxiomReport::default();
    let frob = omega.frobenius().clone();
    let r = frob.rank();
    for (g, n) in stable_types(cap) {
        for args in argument_tuples(r, n) {
            let value = omega.eval(g, &args)?;
            // (i) adjacent transpositions generate S_n
            for i in 1..n {
                let mut swapped = args.clone();
                swapped.swap(i - 1, i);
                let mut perm: Vec<usize> = (1..=n).collect();
                perm.swap(i - 1, i);
                let ok = omega.eval(g, &swapped)? == value.permute_markings(&perm)?;
                report.record(ok, || format!("symmetry fails at g={g} {args:?} swapping {i},{}", i + 1));
            }
            // (ii) splitting along every one-edge graph
            for phi in one_edge_graphs(g, n)? {
                let pulled = pullback_boundary(&value, &phi)?;
                let mut expect = TensorClass::zero(phi.clone());
                let (h0, h1) = phi.edge_half_edges(0);
                for b in 0..r {
                    for c in 0..r {
                        let w = &frob.eta_inv[b][c];
                        if w.is_zero() {
                            continue;
                        }
                        let mut label = vec![0; phi.num_half_edges()];
                        label[..n].copy_from_slice(&args);
                        label[h0] = b;
                        label[h1] = c;
                        let factors = (0..phi.num_vertices())
                            .map(|v| {
                                let local: Vec<usize> = phi.half_edges_at(v).iter().map(|&h| label[h]).collect();
                                omega.eval(phi.genera[v], &local)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        expect.add_assign(&TensorClass::from_factors(phi.clone(), &factors)?.scaled(w))?;
                    }
                }
                let ok = same_tensor(&pulled, &expect)?;
                report.record(ok, || format!("splitting fails at g={g} {args:?} along {phi}"));
            }
            // (iii) unit: compare with the pullback from one marking fewer
            if unit && n >= 1 && 2 * g as i64 - 3 + n as i64 > 0 {
                let mut vecs: Vec<Vec<S>> = args[..n - 1].iter().map(|&a| frob.basis_vector(a)).collect();
                if args[n - 1] == 0 {
                    let lower = omega.eval(g, &args[..n - 1])?;
                    vecs.push(frob.unit.clone());
                    let with_unit = omega.eval_vectors(g, &vecs)?;
                    let ok = same_class(&with_unit, &pullback_forgetful(&lower)?)?;
                    report.record(ok, || format!("unit axiom fails at g={g} {:?}", &args[..n - 1]));
                }
            }
        }
    }
    if unit {
        for a in 0..r {
            for b in 0..r {
                let vecs = vec![frob.basis_vector(a), frob.basis_vector(b), frob.unit.clone()];
                let value = omega.eval_vectors(0, &vecs)?;
                let expect = TautClass::fundamental(0, 3)?.scaled(&frob.eta[a][b]);
                report.record(value == expect, || format!("Ω_{{0,3}}(e{a}, e{b}, 1) != η"));
            }
        }
    }
    Ok(report)
}

/// Multiplies each homogeneous part of degree d by d + shift.
fn degree_weighted<S: Scalar>(x: &TautClass<S>, shift: &Rational) -> Result<TautClass<S>> {
    let mut out = TautClass::zero(x.g(), x.n())?;
    for (dg, c) in x.terms() {
        out.add_term(dg.clone(), c.scaled(&(rat_int(dg.degree() as i64) + shift)));
    }
    Ok(out)
}

/// (E.Ω)_{g,n}(e_{a_1} ⊗ ⋯) = (deg + Σ α_{a_l}) Ω + p_* Ω_{g,n+1}(⋯ ⊗ Σ β_i e_i).
pub fn euler_action<S: Scalar>(omega: &dyn CohFT<S>, g: u32, args: &[usize]) -> Result<TautClass<S>> {
    let frob = omega.frobenius();
    let eu = frob
        .euler
        .as_ref()
        .ok_or_else(|| TautError::InvalidArgument("no Euler data".into()))?;
    let shift: Rational = args.iter().map(|&a| eu.alpha[a].clone()).sum();
    let mut out = degree_weighted(&omega.eval(g, args)?, &shift)?;
    if eu.beta.iter().any(|b| !b.is_zero()) {
        let mut vecs: Vec<Vec<S>> = args.iter().map(|&a| frob.basis_vector(a)).collect();
        vecs.push(eu.beta.clone());
        out.add_assign(&pushforward_forgetful(&omega.eval_vectors(g, &vecs)?)?)?;
    }
    Ok(out)
}

/// Compares E.Ω with [(g - 1)δ + n] Ω at the given types, for all arguments.
pub fn check_homogeneity<S: Scalar>(omega: &dyn CohFT<S>, types: &[(u32, usize)]) -> Result<AxiomReport> {
    let frob = omega.frobenius();
    let eu = frob
        .euler
        .as_ref()
        .ok_or_else(|| TautError::InvalidArgument("no Euler data".into()))?;
    let mut report = AxiomReport::default();
    for &(g, n) in types {
        let weight = (rat_int(g as i64) - rat_int(1)) * &eu.delta + rat_int(n as i64);
        for args in argument_tuples(frob.rank(), n) {
            let lhs = euler_action(omega, g, &args)?;
            let rhs = omega.eval(g, &args)?.scaled_rational(&weight);
            let ok = same_class(&lhs, &rhs)?;
            report.record(ok, || format!("homogeneity fails at g={g} {args:?}"));
        }
    }
    Ok(report)
}
