use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taut_core::graphs::{canonicalize, enumerate_stable_graphs, isomorphisms, one_edge_graphs, StableGraph};

/// Counts structure-preserving bijections x -> y fixing legs, by trying
/// every assignment of edges to edges with both orientations.
fn brute_isomorphisms(x: &StableGraph, y: &StableGraph) -> u64 {
    if x.genera.len() != y.genera.len() || x.edges.len() != y.edges.len() || x.legs.len() != y.legs.len() {
        return 0;
    }
    if x.edges.is_empty() && x.legs.is_empty() {
        // a single bare vertex
        return u64::from(x.genera == y.genera);
    }
    let mut vmap = vec![usize::MAX; x.genera.len()];
    let mut taken = vec![false; y.genera.len()];
    fn bind(v: usize, w: usize, x: &StableGraph, y: &StableGraph, vmap: &mut [usize], taken: &mut [bool]) -> Option<bool> {
        if vmap[v] == usize::MAX {
            if taken[w] || x.genera[v] != y.genera[w] {
                return None;
            }
            vmap[v] = w;
            taken[w] = true;
            Some(true)
        } else if vmap[v] == w {
            Some(false)
        } else {
            None
        }
    }
    fn unbind(v: usize, fresh: bool, vmap: &mut [usize], taken: &mut [bool]) {
        if fresh {
            taken[vmap[v]] = false;
            vmap[v] = usize::MAX;
        }
    }
    for (&v, &w) in x.legs.iter().zip(&y.legs) {
        if bind(v, w, x, y, &mut vmap, &mut taken).is_none() {
            return 0;
        }
    }
    fn go(k: usize, x: &StableGraph, y: &StableGraph, used: &mut [bool], vmap: &mut [usize], taken: &mut [bool]) -> u64 {
        if k == x.edges.len() {
            return u64::from(vmap.iter().all(|&w| w != usize::MAX));
        }
        let (a, b) = x.edges[k];
        let mut total = 0;
        for j in 0..y.edges.len() {
            if used[j] {
                continue;
            }
            let (c, d) = y.edges[j];
            for (p, q) in [(c, d), (d, c)] {
                let Some(fa) = bind(a, p, x, y, vmap, taken) else { continue };
                if let Some(fb) = bind(b, q, x, y, vmap, taken) {
                    used[j] = true;
                    total += go(k + 1, x, y, used, vmap, taken);
                    used[j] = false;
                    unbind(b, fb, vmap, taken);
                }
                unbind(a, fa, vmap, taken);
            }
        }
        total
    }
    let mut used = vec![false; y.edges.len()];
    go(0, x, y, &mut used, &mut vmap, &mut taken)
}

/// The same graph with vertices permuted, edges shuffled and reoriented.
fn scramble(gr: &StableGraph, seed: u64) -> StableGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..gr.genera.len()).collect();
    perm.shuffle(&mut rng);
    let mut genera = vec![0; perm.len()];
    for (v, &p) in perm.iter().enumerate() {
        genera[p] = gr.genera[v];
    }
    let legs = gr.legs.iter().map(|&v| perm[v]).collect();
    let mut edges: Vec<(usize, usize)> = gr
        .edges
        .iter()
        .map(|&(a, b)| if rng.gen() { (perm[a], perm[b]) } else { (perm[b], perm[a]) })
        .collect();
    edges.shuffle(&mut rng);
    StableGraph::new(genera, legs, edges).unwrap()
}

const TYPES: [(u32, usize); 8] = [(0, 4), (0, 5), (0, 6), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1)];

#[test]
fn enumeration_counts() {
    assert_eq!(enumerate_stable_graphs(0, 3, None).unwrap().len(), 1);
    assert_eq!(enumerate_stable_graphs(0, 4, None).unwrap().len(), 4);
    assert_eq!(enumerate_stable_graphs(0, 5, None).unwrap().len(), 26);
    assert_eq!(enumerate_stable_graphs(1, 2, None).unwrap().len(), 5);
    assert_eq!(enumerate_stable_graphs(2, 0, None).unwrap().len(), 7);
    assert_eq!(enumerate_stable_graphs(2, 0, Some(1)).unwrap().len(), 3);
    assert_eq!(one_edge_graphs(0, 4).unwrap().len(), 3);
    assert_eq!(one_edge_graphs(1, 1).unwrap().len(), 1);
    assert_eq!(one_edge_graphs(2, 0).unwrap().len(), 2);
    assert!(enumerate_stable_graphs(0, 2, None).is_err());
    assert!(enumerate_stable_graphs(1, 0, None).is_err());
}

#[test]
fn automorphism_orders() {
    let split = StableGraph::new(vec![0, 0], vec![0, 0, 1, 1], vec![(0, 1)]).unwrap();
    assert_eq!(canonicalize(&split).aut_order, 1);
    let lp = StableGraph::new(vec![0], vec![0], vec![(0, 0)]).unwrap();
    assert_eq!(canonicalize(&lp).aut_order, 2);
    let banana = StableGraph::new(vec![0, 0], vec![], vec![(0, 1), (0, 1), (0, 1)]).unwrap();
    assert_eq!(canonicalize(&banana).aut_order, 12);
    let c = banana.contract_edge(0).unwrap();
    assert_eq!((c.genera.clone(), c.edges.len()), (vec![0], 2));
    assert_eq!(canonicalize(&c).aut_order, 8);
}

/// Every graph is a genuine representative: no two enumerated graphs are
/// isomorphic, and every automorphism count matches brute force.
#[test]
fn enumeration_is_exhaustive_and_distinct() {
    for (g, n) in TYPES {
        let all = enumerate_stable_graphs(g, n, None).unwrap();
        let strings: BTreeSet<String> = all.iter().map(|x| canonicalize(x).string).collect();
        assert_eq!(strings.len(), all.len());
        for x in &all {
            assert_eq!(brute_isomorphisms(x, x), canonicalize(x).aut_order, "{x}");
            for e in 0..x.edges.len() {
                let c = x.contract_edge(e).unwrap();
                assert_eq!(c.genus(), x.genus());
                // every contraction lands on an enumerated class
                assert!(strings.contains(&canonicalize(&c).string), "{c}");
            }
        }
    }
}

fn pick() -> impl Strategy<Value = (StableGraph, u64, u64)> {
    (0..TYPES.len(), any::<prop::sample::Index>(), any::<u64>(), any::<u64>()).prop_map(|(t, i, s1, s2)| {
        let (g, n) = TYPES[t];
        let all = enumerate_stable_graphs(g, n, None).unwrap();
        (all[i.index(all.len())].clone(), s1, s2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_form_is_relabeling_invariant((gr, s, _) in pick()) {
        let y = scramble(&gr, s);
        let (cx, cy) = (canonicalize(&gr), canonicalize(&y));
        prop_assert_eq!(&cx.string, &cy.string);
        prop_assert_eq!(cx.aut_order, cy.aut_order);
        prop_assert_eq!(StableGraph::parse(&y.to_string()).unwrap(), y);
    }

    #[test]
    fn orbit_stabilizer((gr, s1, s2) in pick()) {
        let (x, y) = (scramble(&gr, s1), scramble(&gr, s2));
        let aut = canonicalize(&gr).aut_order;
        prop_assert_eq!(brute_isomorphisms(&x, &y), aut);
        prop_assert_eq!(isomorphisms(&x, &y).len() as u64, aut);
    }
}
