use num_traits::{One, Zero};
use proptest::prelude::*;
use taut_core::graphs::{one_edge_graphs, StableGraph};
use taut_core::integrals::{certify_zero, integrate, integrate_graph, pairing};
use taut_core::scalar::{rat, Rational};
use taut_core::strata::{
    basis, kappa_series_class, pullback_boundary, pullback_forgetful, pushforward_boundary,
    pushforward_forget, pushforward_forgetful, DecoratedGraph, TautClass, TensorClass,
};

type Q = TautClass<Rational>;

fn trivial(g: u32, n: usize) -> DecoratedGraph {
    DecoratedGraph::plain(StableGraph::trivial(g, n).unwrap())
}

fn psi(g: u32, n: usize, i: usize, e: u32) -> Q {
    let mut d = trivial(g, n);
    d.psi[i - 1] = e;
    Q::from_graph(d, Rational::one())
}

fn kappa(g: u32, n: usize, k: &[u32]) -> Q {
    let mut d = trivial(g, n);
    d.kappa[0] = k.to_vec();
    Q::from_graph(d, Rational::one())
}

fn split(n: usize, left: &[usize]) -> DecoratedGraph {
    let legs = (1..=n).map(|i| if left.contains(&i) { 0 } else { 1 }).collect();
    DecoratedGraph::plain(StableGraph::new(vec![0, 0], legs, vec![(0, 1)]).unwrap())
}

fn delta(n: usize, left: &[usize]) -> Q {
    Q::from_graph(split(n, left), Rational::one())
}

fn loop11() -> DecoratedGraph {
    DecoratedGraph::plain(StableGraph::new(vec![0], vec![0], vec![(0, 0)]).unwrap())
}

#[test]
fn basis_sizes() {
    assert_eq!(basis(0, 4, 1).unwrap().len(), 8);
    assert_eq!(basis(0, 3, 0).unwrap().len(), 1);
    assert_eq!(basis(1, 1, 1).unwrap().len(), 3);
    assert!(basis(0, 4, 2).unwrap().is_empty());
}

#[test]
fn products_on_m04() {
    let a = delta(4, &[1, 2]);
    let b = delta(4, &[1, 3]);
    assert!(a.product(&b).unwrap().is_zero());
    assert!(a.product(&a).unwrap().is_zero());
    let one = Q::fundamental(0, 4).unwrap();
    assert_eq!(one.product(&a).unwrap(), a);
    assert_eq!(a.product(&one).unwrap(), a);
    assert_eq!(one.product(&kappa(0, 4, &[1])).unwrap(), kappa(0, 4, &[1]));
}

#[test]
fn top_degree_integrals() {
    for b in basis(0, 4, 1).unwrap() {
        assert_eq!(integrate_graph(&b), Rational::one());
    }
    assert_eq!(integrate(&psi(1, 1, 1, 1)).unwrap(), rat(1, 24));
    assert_eq!(integrate(&kappa(1, 1, &[1])).unwrap(), rat(1, 24));
    assert_eq!(integrate_graph(&loop11()), Rational::one());
    let two = psi(0, 5, 1, 1).product(&psi(0, 5, 2, 1)).unwrap();
    assert_eq!(integrate(&two).unwrap(), rat(2, 1));
    assert!(integrate(&psi(0, 5, 1, 1)).is_err());
}

#[test]
fn kappa_monomial_integrals() {
    use taut_core::integrals::vertex_integral;
    // κ₁^{n-3} on M̄_{0,n}
    for (n, v) in [(4, 1), (5, 5), (6, 61), (7, 1379)] {
        assert_eq!(vertex_integral(0, &vec![0; n], &vec![1; n - 3]), rat(v, 1));
    }
    assert_eq!(vertex_integral(1, &[0, 0], &[1, 1]), rat(1, 8));
    assert_eq!(vertex_integral(2, &[], &[1, 1, 1]), rat(43, 2880));
    assert_eq!(vertex_integral(2, &[], &[1, 2]), rat(29, 5760) - rat(1, 1152));
    assert_eq!(vertex_integral(2, &[], &[3]), rat(1, 1152));
}

#[test]
fn boundary_self_intersection_on_m05() {
    let d = delta(5, &[1, 2]);
    let sq = d.product(&d).unwrap();
    assert_eq!(integrate(&sq).unwrap(), rat(-1, 1));
    assert_eq!(pairing(&d, &split(5, &[1, 2])).unwrap(), rat(-1, 1));
    // disjoint pairs give transverse divisors, overlapping pairs miss
    assert_eq!(pairing(&d, &split(5, &[3, 4])).unwrap(), rat(1, 1));
    assert_eq!(pairing(&d, &split(5, &[1, 3])).unwrap(), rat(0, 1));
}

#[test]
fn first_relation_on_m04() {
    let mut x = kappa(0, 4, &[1]);
    for i in 1..=4 {
        x = x.minus(&psi(0, 4, i, 1)).unwrap();
    }
    for s in [[1, 2], [1, 3], [1, 4]] {
        x = x.plus(&delta(4, &s)).unwrap();
    }
    assert!(certify_zero(&x).unwrap().certified());
    assert!(!certify_zero(&psi(0, 4, 1, 1)).unwrap().certified());
    // ψ_1 equals the boundary divisor separating 1,4 from 2,3
    let y = psi(0, 4, 1, 1).minus(&delta(4, &[1, 4])).unwrap();
    assert!(certify_zero(&y).unwrap().certified());
}

#[test]
fn genus_one_relation() {
    // ψ_1 = κ_1 = δ_irr / 12 with δ_irr = [loop] / 2
    let l = Q::from_graph(loop11(), rat(1, 24));
    assert!(certify_zero(&psi(1, 1, 1, 1).minus(&l).unwrap()).unwrap().certified());
    assert!(certify_zero(&kappa(1, 1, &[1]).minus(&l).unwrap()).unwrap().certified());
}

#[test]
fn boundary_pullbacks() {
    let phi = split(4, &[1, 2]).graph;
    let k = pullback_boundary(&kappa(0, 4, &[1]), &phi).unwrap();
    assert!(k.is_zero());
    let d = pullback_boundary(&delta(4, &[1, 2]), &phi).unwrap();
    assert!(d.is_zero());
    let one = pullback_boundary(&Q::fundamental(0, 4).unwrap(), &phi).unwrap();
    let f = TensorClass::from_factors(
        phi.clone(),
        &[Q::fundamental(0, 3).unwrap(), Q::fundamental(0, 3).unwrap()],
    )
    .unwrap();
    assert_eq!(one, f);
    assert_eq!(pushforward_boundary(&f).unwrap(), delta(4, &[1, 2]));
}

#[test]
fn boundary_pushforward_of_node_psi() {
    let phi = split(5, &[1, 2]).graph;
    let mut right = trivial(0, 4);
    right.psi[3] = 1;
    let mut t = TensorClass::zero(phi.clone());
    t.add_term(vec![trivial(0, 3), right], Rational::one());
    let pushed = pushforward_boundary(&t).unwrap();
    let mut expect = split(5, &[1, 2]);
    expect.psi[6] = 1;
    assert_eq!(pushed, Q::from_graph(expect, Rational::one()));
}

#[test]
fn pullback_then_integrate_matches_pairing() {
    // ∫ x · [Φ] = ∫_{M̄_Φ} ξ_Φ^* x for one-edge Φ
    for (g, n) in [(0usize, 5usize), (1, 2), (2, 0), (1, 3)] {
        let g = g as u32;
        let dim = 3 * g + n as u32 - 3;
        for phi in one_edge_graphs(g, n).unwrap() {
            for b in basis(g, n, dim - 1).unwrap() {
                let x = Q::from_graph(b, Rational::one());
                let direct = pairing(&x, &DecoratedGraph::plain(phi.clone())).unwrap();
                let pulled = pullback_boundary(&x, &phi).unwrap();
                let mut via = Rational::zero();
                for (parts, c) in pulled.terms() {
                    let mut v = c.clone();
                    for p in parts {
                        v *= integrate_graph(p);
                    }
                    via += v;
                }
                assert_eq!(direct, via, "{phi}");
            }
        }
    }
}

#[test]
fn forgetful_pushforwards() {
    assert!(pushforward_forgetful(&psi(0, 4, 4, 2)).unwrap().is_zero());
    assert_eq!(pushforward_forgetful(&psi(0, 5, 5, 2)).unwrap(), kappa(0, 4, &[1]));
    assert!(pushforward_forgetful(&Q::fundamental(1, 2).unwrap()).unwrap().is_zero());
    // dilaton: p_* ψ_{n+1} = (2g - 2 + n)
    assert_eq!(
        pushforward_forgetful(&psi(1, 2, 2, 1)).unwrap(),
        Q::fundamental(1, 1).unwrap()
    );
    // a (0,3) bubble carrying the forgotten point contracts
    let b = split(4, &[1, 4]);
    assert_eq!(
        pushforward_forgetful(&Q::from_graph(b, Rational::one())).unwrap(),
        Q::fundamental(0, 3).unwrap()
    );
}

#[test]
fn forgetful_pullbacks() {
    assert_eq!(
        pullback_forgetful(&Q::fundamental(0, 3).unwrap()).unwrap(),
        Q::fundamental(0, 4).unwrap()
    );
    let l = pullback_forgetful(&Q::from_graph(loop11(), Rational::one())).unwrap();
    let expect = DecoratedGraph::plain(StableGraph::new(vec![0], vec![0, 0], vec![(0, 0)]).unwrap());
    assert_eq!(l, Q::from_graph(expect, Rational::one()));
    // p^*ψ_1 = ψ_1 - δ_{1,3} on (1,2)
    let p = pullback_forgetful(&psi(1, 1, 1, 1)).unwrap();
    let bubble = DecoratedGraph::plain(StableGraph::new(vec![1, 0], vec![1, 1], vec![(0, 1)]).unwrap());
    let expect = psi(1, 2, 1, 1).minus(&Q::from_graph(bubble, Rational::one())).unwrap();
    assert_eq!(p, expect);
}

#[test]
fn kappa_series() {
    let t2 = [Rational::zero(), Rational::zero(), Rational::one()];
    assert_eq!(
        kappa_series_class(0, 4, &t2, 1).unwrap(),
        Q::fundamental(0, 4).unwrap().plus(&kappa(0, 4, &[1])).unwrap()
    );
    assert_eq!(
        kappa_series_class::<Rational>(0, 4, &[], 1).unwrap(),
        Q::fundamental(0, 4).unwrap()
    );
    let f = [Rational::zero(), Rational::zero(), rat(3, 1), rat(5, 1)];
    let k = kappa_series_class(1, 1, &f, 1).unwrap();
    assert_eq!(k.degree_part(1), kappa(1, 1, &[1]).scaled(&rat(3, 1)));
    assert!(kappa_series_class(1, 1, &[Rational::zero(), Rational::one()], 1).is_err());
}

/// Σ_m (1/m!) p_{m*} Π f(ψ_{n+j}) by explicit pushforwards.
fn kappa_by_pushforward(g: u32, n: usize, f: &[Rational], max_deg: u32) -> Q {
    let mut out = Q::fundamental(g, n).unwrap();
    let mut fact = Rational::one();
    for m in 1..=max_deg as usize {
        fact *= rat(m as i64, 1);
        let mut x = Q::fundamental(g, n + m).unwrap();
        for j in 0..m {
            let mut fj = Q::zero(g, n + m).unwrap();
            for (k, c) in f.iter().enumerate().skip(2) {
                fj.add_assign(&psi(g, n + m, n + j + 1, k as u32).scaled(c)).unwrap();
            }
            x = x.product(&fj).unwrap().truncated(max_deg + m as u32);
        }
        for _ in 0..m {
            x = pushforward_forgetful(&x).unwrap();
        }
        out.add_assign(&x.scaled(&(Rational::one() / &fact))).unwrap();
    }
    out.truncated(max_deg)
}

#[test]
fn kappa_series_matches_pushforwards() {
    let f = [Rational::zero(), Rational::zero(), rat(2, 1), rat(-3, 1), rat(1, 2)];
    for (g, n, d) in [(0u32, 5usize, 2u32), (1, 1, 1), (1, 2, 2), (0, 6, 3)] {
        assert_eq!(
            kappa_series_class(g, n, &f, d).unwrap(),
            kappa_by_pushforward(g, n, &f, d),
            "({g},{n})"
        );
    }
}

fn class_from(bases: &[DecoratedGraph], picks: &[(usize, i64)]) -> Q {
    let mut x = Q::zero(bases[0].graph.genus(), bases[0].graph.n()).unwrap();
    for &(i, c) in picks {
        x.add_assign(&Q::from_graph(bases[i % bases.len()].clone(), rat(c, 1))).unwrap();
    }
    x
}

fn all_basis(g: u32, n: usize) -> Vec<DecoratedGraph> {
    let dim = 3 * g + n as u32 - 3;
    (0..=dim).flat_map(|d| basis(g, n, d).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn product_is_commutative_and_associative(
        t in prop_oneof![Just((0u32, 5usize)), Just((1, 2)), Just((1, 3)), Just((0, 6))],
        i in 0usize..1000, j in 0usize..1000, k in 0usize..1000,
    ) {
        let b = all_basis(t.0, t.1);
        let (x, y, z) = (class_from(&b, &[(i, 1)]), class_from(&b, &[(j, 1)]), class_from(&b, &[(k, 1)]));
        prop_assert_eq!(x.product(&y).unwrap(), y.product(&x).unwrap());
        let l = x.product(&y).unwrap().product(&z).unwrap();
        let r = x.product(&y.product(&z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn forgetful_pullback_is_multiplicative(
        t in prop_oneof![Just((0u32, 4usize)), Just((1, 1)), Just((1, 2)), Just((0, 5))],
        i in 0usize..1000, j in 0usize..1000,
    ) {
        let b = all_basis(t.0, t.1);
        let (x, y) = (class_from(&b, &[(i, 1)]), class_from(&b, &[(j, 2)]));
        // equal in cohomology; the formal strata may differ by relations
        let lhs = pullback_forgetful(&x.product(&y).unwrap()).unwrap();
        let rhs = pullback_forgetful(&x).unwrap().product(&pullback_forgetful(&y).unwrap()).unwrap();
        let diff = lhs.minus(&rhs).unwrap();
        for d in diff.degrees() {
            prop_assert!(certify_zero(&diff.degree_part(d)).unwrap().certified());
        }
    }

    #[test]
    fn projection_formula(
        t in prop_oneof![Just((0u32, 4usize)), Just((1, 1)), Just((1, 2)), Just((0, 5))],
        i in 0usize..1000, j in 0usize..1000,
    ) {
        let (g, n) = t;
        let down = all_basis(g, n);
        let up = all_basis(g, n + 1);
        let x = class_from(&down, &[(i, 1)]);
        let y = class_from(&up, &[(j, 1)]);
        let dim = 3 * g + n as u32 - 3;
        let lhs_prod = x.product(&pushforward_forgetful(&y).unwrap()).unwrap().degree_part(dim);
        let rhs_prod = pullback_forgetful(&x).unwrap().product(&y).unwrap().degree_part(dim + 1);
        prop_assert_eq!(integrate(&lhs_prod).unwrap(), integrate(&rhs_prod).unwrap());
    }

    #[test]
    fn pull_push_commute(
        t in prop_oneof![Just((0u32, 4usize)), Just((1, 1)), Just((1, 2)), Just((0, 5))],
        j in 0usize..1000,
    ) {
        let (g, n) = t;
        let up = all_basis(g, n + 1);
        let y = class_from(&up, &[(j, 1)]);
        let a = pullback_forgetful(&pushforward_forgetful(&y).unwrap()).unwrap();
        let b = pushforward_forget(&pullback_forgetful(&y).unwrap(), n + 1).unwrap();
        prop_assert_eq!(a, b);
    }
}
