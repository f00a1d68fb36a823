//! Intersection numbers of ψ, κ and boundary classes, and zero certification
//! by pairing against a full basis of complementary degree.

mod psi;

use num_traits::{One, Zero};

pub use psi::{correlator, psi_integral};

use crate::error::{Result, TautError};
use crate::scalar::{Rational, Scalar};
use crate::strata::{basis, pairing_terms, DecoratedGraph, TautClass};

/// ∫_{M̄_{g,n}} Π ψ_i^{psi_i} Π_j κ_{kappa_j}.
///
/// The κ-monomial is traded for ψ-classes on a forgetful cover: a set
/// partition of the κ indices contributes Π_B (-1)^{|B|-1} times the
/// correlator with one extra point of exponent b_B + 1 per block.
pub fn vertex_integral(g: u32, psi: &[u32], kappa: &[u32]) -> Rational {
    let dim = 3 * g as i64 - 3 + psi.len() as i64;
    let total: i64 = psi.iter().chain(kappa).map(|&x| x as i64).sum();
    if total != dim {
        return Rational::zero();
    }
    if kappa.is_empty() {
        return correlator(g, psi);
    }
    let mut acc = Rational::zero();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    set_partitions(kappa.len(), 0, &mut blocks, &mut |bs| {
        let mut args = psi.to_vec();
        let mut weight = Rational::one();
        for b in bs {
            if b.len() % 2 == 0 {
                weight = -weight;
            }
            args.push(b.iter().map(|&j| kappa[j]).sum::<u32>() + 1);
        }
        acc += weight * correlator(g, &args);
    });
    acc
}

fn set_partitions(
    m: usize,
    i: usize,
    blocks: &mut Vec<Vec<usize>>,
    visit: &mut dyn FnMut(&[Vec<usize>]),
) {
    if i == m {
        visit(blocks);
        return;
    }
    for b in 0..blocks.len() {
        blocks[b].push(i);
        set_partitions(m, i + 1, blocks, visit);
        blocks[b].pop();
    }
    blocks.push(vec![i]);
    set_partitions(m, i + 1, blocks, visit);
    blocks.pop();
}

/// ∫ of a single decorated graph: the product of its vertex integrals.
///
/// No automorphism factor appears: a basis element stands for the
/// pushforward of its decoration along the gluing map.
pub fn integrate_graph(dg: &DecoratedGraph) -> Rational {
    let graph = &dg.graph;
    let mut acc = Rational::one();
    for v in 0..graph.num_vertices() {
        let psi: Vec<u32> = graph.half_edges_at(v).iter().map(|&h| dg.psi[h]).collect();
        let val = vertex_integral(graph.genera[v], &psi, &dg.kappa[v]);
        if val.is_zero() {
            return val;
        }
        acc *= val;
    }
    acc
}

/// Integral of a class of top degree 3g - 3 + n.
pub fn integrate<S: Scalar>(x: &TautClass<S>) -> Result<S> {
    let top = (3 * x.g() as i64 - 3 + x.n() as i64) as u32;
    let mut acc = S::zero();
    for (dg, c) in x.terms() {
        let d = dg.degree();
        if d != top {
            return Err(TautError::NotTopDegree { found: d, top });
        }
        acc.add_to(&c.scaled(&integrate_graph(dg)));
    }
    Ok(acc)
}

/// ∫ x · b, computed without materializing the product.
pub fn pairing<S: Scalar>(x: &TautClass<S>, b: &DecoratedGraph) -> Result<S> {
    pairing_terms(x, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroReport<S> {
    pub g: u32,
    pub n: usize,
    pub degree: u32,
    /// One entry per complementary basis element, in basis order.
    pub pairings: Vec<S>,
}

impl<S: Scalar> ZeroReport<S> {
    /// All pairings vanish. This is numerical evidence of lying in the
    /// kernel of the tautological pairing, not a proof of a relation.
    pub fn certified(&self) -> bool {
        self.pairings.iter().all(Zero::is_zero)
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.pairings.iter().position(|p| !p.is_zero())
    }
}

/// Pairs each homogeneous part of `x` with every basis element of
/// complementary degree. `x` must be homogeneous.
pub fn certify_zero<S: Scalar>(x: &TautClass<S>) -> Result<ZeroReport<S>> {
    use rayon::prelude::*;
    let degrees = x.degrees();
    if degrees.len() > 1 {
        return Err(TautError::InvalidArgument(format!(
            "class is not homogeneous (degrees {degrees:?})"
        )));
    }
    let top = 3 * x.g() + x.n() as u32 - 3;
    let d = degrees.first().copied().unwrap_or(0);
    let comp = basis(x.g(), x.n(), top.saturating_sub(d))?;
    let pairings = if d > top {
        Vec::new()
    } else {
        comp.par_iter()
            .map(|b| pairing(x, b))
            .collect::<Result<Vec<S>>>()?
    };
    Ok(ZeroReport {
        g: x.g(),
        n: x.n(),
        degree: d,
        pairings,
    })
}
