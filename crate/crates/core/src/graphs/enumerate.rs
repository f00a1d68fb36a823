//! Enumeration of stable graphs, level by level in the number of edges.
//!
//! Every graph with `k + 1` edges is an elementary degeneration (a loop added
//! at a positive-genus vertex, or a vertex split in two) of a graph with `k`
//! edges, so iterating degenerations from the trivial graph is exhaustive.

use std::collections::HashMap;
use std::sync::Arc;

use dashmap::DashMap;
use once_cell::sync::Lazy;
use rayon::prelude::*;

use super::canon::{canonical_labeling, CanonKey};
use super::StableGraph;
use crate::error::Result;

static LEVELS: Lazy<DashMap<(u32, usize), Arc<Vec<Vec<StableGraph>>>>> = Lazy::new(DashMap::new);

fn degenerations(graph: &StableGraph) -> Vec<StableGraph> {
    let mut out = Vec::new();
    let n = graph.n();
    let nv = graph.num_vertices();
    for v in 0..nv {
        if graph.genera[v] >= 1 {
            let mut g = graph.clone();
            g.genera[v] -= 1;
            g.edges.push((v, v));
            out.push(g);
        }
        let hs = graph.half_edges_at(v);
        let gv = graph.genera[v];
        for mask in 0u64..(1 << hs.len()) {
            let k2 = mask.count_ones() as i64;
            let k1 = hs.len() as i64 - k2;
            for g1 in 0..=gv {
                let g2 = gv - g1;
                if 2 * g1 as i64 - 1 + k1 <= 0 || 2 * g2 as i64 - 1 + k2 <= 0 {
                    continue;
                }
                let mut g = graph.clone();
                g.genera[v] = g1;
                g.genera.push(g2);
                for (i, &h) in hs.iter().enumerate() {
                    if mask & (1 << i) == 0 {
                        continue;
                    }
                    if h < n {
                        g.legs[h] = nv;
                    } else if (h - n) % 2 == 0 {
                        g.edges[(h - n) / 2].0 = nv;
                    } else {
                        g.edges[(h - n) / 2].1 = nv;
                    }
                }
                g.edges.push((v, nv));
                out.push(g);
            }
        }
    }
    out
}

fn canonical(graph: &StableGraph) -> (CanonKey<u32>, StableGraph) {
    let hl = vec![0; graph.num_half_edges()];
    let lab = canonical_labeling(graph, &graph.genera, &hl);
    let (canon, _) = lab.relabel(graph, &hl);
    (lab.key, canon)
}

fn sort_by_string(graphs: &mut [StableGraph]) {
    graphs.sort_by_cached_key(|g| g.to_string());
}

fn levels(g: u32, n: usize) -> Result<Arc<Vec<Vec<StableGraph>>>> {
    if let Some(l) = LEVELS.get(&(g, n)) {
        return Ok(l.clone());
    }
    let trivial = StableGraph::trivial(g, n)?;
    let max = (3 * g as i64 - 3 + n as i64).max(0) as usize;
    let mut all = vec![vec![trivial]];
    for _ in 0..max {
        let prev = all.last().expect("nonempty");
        let found: Vec<(CanonKey<u32>, StableGraph)> = prev
            .par_iter()
            .flat_map_iter(|gr| degenerations(gr).into_iter().map(|d| canonical(&d)))
            .collect();
        let mut unique: HashMap<CanonKey<u32>, StableGraph> = HashMap::new();
        for (k, gr) in found {
            unique.entry(k).or_insert(gr);
        }
        let mut next: Vec<StableGraph> = unique.into_values().collect();
        sort_by_string(&mut next);
        all.push(next);
    }
    let all = Arc::new(all);
    LEVELS.insert((g, n), all.clone());
    Ok(all)
}

/// One canonical representative per isomorphism class with at most
/// `max_edges` edges (default `3g - 3 + n`), sorted by canonical string.
pub fn enumerate_stable_graphs(g: u32, n: usize, max_edges: Option<usize>) -> Result<Vec<StableGraph>> {
    let levels = levels(g, n)?;
    let cap = max_edges.unwrap_or(usize::MAX);
    let mut out: Vec<StableGraph> = levels
        .iter()
        .take(cap.saturating_add(1))
        .flatten()
        .cloned()
        .collect();
    sort_by_string(&mut out);
    Ok(out)
}

/// Canonical graphs with exactly `k` edges, sorted by canonical string.
pub fn graphs_with_edges(g: u32, n: usize, k: usize) -> Result<Arc<Vec<StableGraph>>> {
    let levels = levels(g, n)?;
    Ok(Arc::new(levels.get(k).cloned().unwrap_or_default()))
}

pub fn one_edge_graphs(g: u32, n: usize) -> Result<Vec<StableGraph>> {
    Ok(graphs_with_edges(g, n, 1)?.as_ref().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_stable_graphs(0, 3, None).unwrap().len(), 1);
        assert_eq!(enumerate_stable_graphs(0, 4, None).unwrap().len(), 4);
        assert_eq!(enumerate_stable_graphs(2, 0, None).unwrap().len(), 7);
        assert_eq!(one_edge_graphs(0, 4).unwrap().len(), 3);
        assert_eq!(one_edge_graphs(1, 1).unwrap().len(), 1);
        assert_eq!(one_edge_graphs(2, 0).unwrap().len(), 2);
        assert!(enumerate_stable_graphs(0, 2, None).is_err());
    }
}
