//! Canonical labeling by color refinement plus exhaustive individualization.
//!
//! The search tree is never pruned, so the leaves reaching the minimal key
//! are exactly one orbit of the vertex-level automorphism group.

use std::collections::BTreeMap;

use itertools::Itertools;

use super::StableGraph;

/// Isomorphism-invariant description of a labeled graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonKey<VL> {
    pub vertices: Vec<VL>,
    pub legs: Vec<(usize, u32)>,
    pub edges: Vec<(usize, u32, usize, u32)>,
}

#[derive(Clone, Debug)]
pub struct Labeling<VL> {
    pub key: CanonKey<VL>,
    /// Every vertex permutation (old -> new) attaining `key`.
    pub leaves: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub graph: StableGraph,
    pub string: String,
    pub aut_order: u64,
}

struct Search<'a, VL> {
    graph: &'a StableGraph,
    vlabels: &'a [VL],
    hlabels: &'a [u32],
    incident: Vec<Vec<(usize, usize)>>,
    best: Option<CanonKey<VL>>,
    leaves: Vec<Vec<usize>>,
}

impl<VL: Ord + Clone> Search<'_, VL> {
    fn refine(&self, colors: &mut Vec<usize>) {
        loop {
            let sigs: Vec<(usize, Vec<(usize, u32, u32)>)> = (0..colors.len())
                .map(|v| {
                    let mut nb: Vec<(usize, u32, u32)> = self.incident[v]
                        .iter()
                        .map(|&(h, p)| {
                            (colors[self.graph.vertex_of(p)], self.hlabels[h], self.hlabels[p])
                        })
                        .collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let new = rank(&sigs);
            let done = count_classes(&new) == count_classes(colors);
            *colors = new;
            if done {
                return;
            }
        }
    }

    fn key_for(&self, perm: &[usize]) -> CanonKey<VL> {
        let g = self.graph;
        let n = g.n();
        let mut vertices = vec![self.vlabels[0].clone(); perm.len()];
        for (v, &p) in perm.iter().enumerate() {
            vertices[p] = self.vlabels[v].clone();
        }
        let legs = (0..n).map(|i| (perm[g.legs[i]], self.hlabels[i])).collect();
        let mut edges: Vec<_> = g
            .edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                normalize((perm[a], self.hlabels[n + 2 * k]), (perm[b], self.hlabels[n + 2 * k + 1])).0
            })
            .collect();
        edges.sort_unstable();
        CanonKey {
            vertices,
            legs,
            edges,
        }
    }

    fn explore(&mut self, mut colors: Vec<usize>) {
        self.refine(&mut colors);
        let nv = colors.len();
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..nv {
            cells.entry(colors[v]).or_default().push(v);
        }
        let Some(cell) = cells.values().find(|c| c.len() > 1).cloned() else {
            let key = self.key_for(&colors);
            match &self.best {
                Some(b) if key > *b => {}
                Some(b) if key == *b => self.leaves.push(colors),
                _ => {
                    self.best = Some(key);
                    self.leaves = vec![colors];
                }
            }
            return;
        };
        let target = colors[cell[0]];
        for &w in &cell {
            let split: Vec<usize> = (0..nv)
                .map(|u| 2 * colors[u] + (colors[u] == target && u != w) as usize)
                .collect();
            self.explore(rank(&split));
        }
    }
}

fn normalize(x: (usize, u32), y: (usize, u32)) -> ((usize, u32, usize, u32), bool) {
    if x <= y {
        ((x.0, x.1, y.0, y.1), false)
    } else {
        ((y.0, y.1, x.0, x.1), true)
    }
}

fn rank<T: Ord>(sigs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<&T> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(&s).expect("present"))
        .collect()
}

fn count_classes(colors: &[usize]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m + 1)
}

/// Canonical labeling of a graph with vertex labels `vlabels` and half-edge
/// labels `hlabels`. Legs are fixed by marking.
pub fn canonical_labeling<VL: Ord + Clone>(
    graph: &StableGraph,
    vlabels: &[VL],
    hlabels: &[u32],
) -> Labeling<VL> {
    let nv = graph.num_vertices();
    let mut incident = vec![Vec::new(); nv];
    for k in 0..graph.num_edges() {
        let (h0, h1) = graph.edge_half_edges(k);
        incident[graph.vertex_of(h0)].push((h0, h1));
        incident[graph.vertex_of(h1)].push((h1, h0));
    }
    let initial: Vec<(&VL, Vec<(usize, u32)>)> = (0..nv)
        .map(|v| {
            let legs = (0..graph.n())
                .filter(|&i| graph.legs[i] == v)
                .map(|i| (i, hlabels[i]))
                .collect();
            (&vlabels[v], legs)
        })
        .collect();
    let colors = rank(&initial);
    let mut search = Search {
        graph,
        vlabels,
        hlabels,
        incident,
        best: None,
        leaves: Vec::new(),
    };
    search.explore(colors);
    Labeling {
        key: search.best.expect("at least one leaf"),
        leaves: search.leaves,
    }
}

impl<VL> Labeling<VL> {
    /// Size of the automorphism group of the labeled graph.
    pub fn aut_order(&self) -> u64 {
        let mut order = self.leaves.len() as u64;
        for (_, run) in &self.key.edges.iter().group_by(|e| **e) {
            let e = run.count() as u64;
            order *= (1..=e).product::<u64>();
        }
        for &(a, la, b, lb) in &self.key.edges {
            if a == b && la == lb {
                order *= 2;
            }
        }
        order
    }

    /// Relabels by the first optimal leaf. Returns the canonical graph and the
    /// half-edge map old -> new.
    pub fn relabel(&self, graph: &StableGraph, hlabels: &[u32]) -> (StableGraph, Vec<usize>) {
        relabel_with(graph, hlabels, &self.leaves[0])
    }
}

/// Applies a vertex permutation; edges are sorted by their labeled tuples.
pub(crate) fn relabel_with(
    graph: &StableGraph,
    hlabels: &[u32],
    perm: &[usize],
) -> (StableGraph, Vec<usize>) {
    let n = graph.n();
    let mut tuples: Vec<((usize, u32, usize, u32), bool, usize)> = graph
        .edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let (t, swapped) =
                normalize((perm[a], hlabels[n + 2 * k]), (perm[b], hlabels[n + 2 * k + 1]));
            (t, swapped, k)
        })
        .collect();
    tuples.sort();
    let mut genera = vec![0; perm.len()];
    for (v, &p) in perm.iter().enumerate() {
        genera[p] = graph.genera[v];
    }
    let legs = graph.legs.iter().map(|&v| perm[v]).collect();
    let mut hmap: Vec<usize> = (0..graph.num_half_edges()).collect();
    let mut edges = Vec::with_capacity(tuples.len());
    for (j, &((a, _, b, _), swapped, k)) in tuples.iter().enumerate() {
        edges.push((a, b));
        let (x, y) = if swapped { (1, 0) } else { (0, 1) };
        hmap[n + 2 * k] = n + 2 * j + x;
        hmap[n + 2 * k + 1] = n + 2 * j + y;
    }
    (
        StableGraph {
            genera,
            legs,
            edges,
        },
        hmap,
    )
}

fn plain_labeling(graph: &StableGraph) -> Labeling<u32> {
    canonical_labeling(graph, &graph.genera, &vec![0; graph.num_half_edges()])
}

pub fn canonicalize(graph: &StableGraph) -> CanonicalForm {
    let lab = plain_labeling(graph);
    let (canon, _) = lab.relabel(graph, &vec![0; graph.num_half_edges()]);
    CanonicalForm {
        string: canon.to_string(),
        aut_order: lab.aut_order(),
        graph: canon,
    }
}

/// All isomorphisms `x -> y` fixing legs, as half-edge maps.
pub fn isomorphisms(x: &StableGraph, y: &StableGraph) -> Vec<Vec<usize>> {
    if x.n() != y.n()
        || x.num_vertices() != y.num_vertices()
        || x.num_edges() != y.num_edges()
    {
        return Vec::new();
    }
    let lx = plain_labeling(x);
    let ly = plain_labeling(y);
    if lx.key != ly.key {
        return Vec::new();
    }
    let mut inv_y = vec![0; y.num_vertices()];
    for (v, &p) in ly.leaves[0].iter().enumerate() {
        inv_y[p] = v;
    }
    let n = x.n();
    let mut out = Vec::new();
    for px in &lx.leaves {
        let sigma: Vec<usize> = px.iter().map(|&p| inv_y[p]).collect();
        // group edges by unordered endpoint pair
        let mut groups: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (k, &(a, b)) in x.edges.iter().enumerate() {
            let (a, b) = (sigma[a], sigma[b]);
            groups.entry((a.min(b), a.max(b))).or_default().0.push(k);
        }
        for (k, &(a, b)) in y.edges.iter().enumerate() {
            groups.entry((a.min(b), a.max(b))).or_default().1.push(k);
        }
        let mut partial: Vec<Vec<usize>> = vec![(0..n).chain(std::iter::repeat(usize::MAX).take(2 * x.num_edges())).collect()];
        for (&(u, w), (xs, ys)) in &groups {
            let mut next = Vec::new();
            for assignment in ys.iter().copied().permutations(ys.len()) {
                let flips: u32 = if u == w { 1 << xs.len() } else { 1 };
                for mask in 0..flips {
                    for base in &partial {
                        let mut m = base.clone();
                        for (i, (&kx, &ky)) in xs.iter().zip(&assignment).enumerate() {
                            let (x0, x1) = x.edge_half_edges(kx);
                            let (y0, y1) = y.edge_half_edges(ky);
                            let straight = if u == w {
                                mask & (1 << i) == 0
                            } else {
                                sigma[x.vertex_of(x0)] == y.vertex_of(y0)
                            };
                            if straight {
                                m[x0] = y0;
                                m[x1] = y1;
                            } else {
                                m[x0] = y1;
                                m[x1] = y0;
                            }
                        }
                        next.push(m);
                    }
                }
            }
            partial = next;
        }
        out.extend(partial);
    }
    out
}

pub fn automorphisms(graph: &StableGraph) -> Vec<Vec<usize>> {
    isomorphisms(graph, graph)
}
