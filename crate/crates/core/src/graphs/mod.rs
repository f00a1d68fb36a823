//! Stable graphs: representation, text format, contraction.
//!
//! A graph is stored in normalized form. Marking `i` (1-based) is the leg
//! half-edge `i - 1`; edge `k` owns half-edges `n + 2k` (at `edges[k].0`) and
//! `n + 2k + 1` (at `edges[k].1`).

mod canon;
mod enumerate;

use std::fmt;

use crate::error::{Result, TautError};

pub use canon::{
    automorphisms, canonical_labeling, canonicalize, isomorphisms, CanonKey, CanonicalForm,
    Labeling,
};
pub use enumerate::{enumerate_stable_graphs, graphs_with_edges, one_edge_graphs};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableGraph {
    pub genera: Vec<u32>,
    pub legs: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// Result of contracting a set of edges.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub graph: StableGraph,
    /// Old vertex -> new vertex.
    pub vertex_map: Vec<usize>,
    /// Old half-edge -> new half-edge, `None` for half-edges of contracted edges.
    pub half_edge_map: Vec<Option<usize>>,
}

impl StableGraph {
    pub fn new(genera: Vec<u32>, legs: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = StableGraph { genera, legs, edges };
        g.validate()?;
        Ok(g)
    }

    /// The one-vertex graph of type (g, n).
    pub fn trivial(g: u32, n: usize) -> Result<Self> {
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(TautError::Unstable { g, n });
        }
        Ok(StableGraph {
            genera: vec![g],
            legs: vec![0; n],
            edges: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.legs.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_half_edges(&self) -> usize {
        self.legs.len() + 2 * self.edges.len()
    }

    pub fn h1(&self) -> u32 {
        (self.edges.len() + 1 - self.genera.len()) as u32
    }

    pub fn genus(&self) -> u32 {
        self.genera.iter().sum::<u32>() + self.h1()
    }

    /// 3g - 3 + n.
    pub fn dim(&self) -> u32 {
        (3 * self.genus() as i64 - 3 + self.n() as i64) as u32
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        let n = self.n();
        if h < n {
            self.legs[h]
        } else {
            let (a, b) = self.edges[(h - n) / 2];
            if (h - n) % 2 == 0 {
                a
            } else {
                b
            }
        }
    }

    /// The other half of an edge; `None` for legs.
    pub fn partner(&self, h: usize) -> Option<usize> {
        let n = self.n();
        if h < n {
            None
        } else {
            Some(n + ((h - n) ^ 1))
        }
    }

    pub fn edge_of(&self, h: usize) -> Option<usize> {
        h.checked_sub(self.n()).map(|k| k / 2)
    }

    pub fn edge_half_edges(&self, k: usize) -> (usize, usize) {
        let n = self.n();
        (n + 2 * k, n + 2 * k + 1)
    }

    pub fn is_loop(&self, k: usize) -> bool {
        self.edges[k].0 == self.edges[k].1
    }

    /// Half-edges at `v` in local order: legs by marking, then edge half-edges.
    pub fn half_edges_at(&self, v: usize) -> Vec<usize> {
        (0..self.num_half_edges())
            .filter(|&h| self.vertex_of(h) == v)
            .collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.legs.iter().filter(|&&w| w == v).count()
            + self
                .edges
                .iter()
                .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
                .sum::<usize>()
    }

    /// 3g(v) - 3 + n(v).
    pub fn vertex_dim(&self, v: usize) -> u32 {
        (3 * self.genera[v] as i64 - 3 + self.valence(v) as i64) as u32
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.genera.len();
        if nv == 0 {
            return Err(TautError::InvalidGraph("no vertices".into()));
        }
        if self.legs.iter().any(|&v| v >= nv)
            || self.edges.iter().any(|&(a, b)| a >= nv || b >= nv)
        {
            return Err(TautError::InvalidGraph("vertex index out of range".into()));
        }
        for v in 0..nv {
            if 2 * self.genera[v] as i64 - 2 + self.valence(v) as i64 <= 0 {
                return Err(TautError::InvalidGraph(format!("vertex {v} is unstable")));
            }
        }
        let mut parent: Vec<usize> = (0..nv).collect();
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        if (0..nv).any(|v| find(&mut parent, v) != root) {
            return Err(TautError::InvalidGraph("graph is disconnected".into()));
        }
        Ok(())
    }

    /// Contracts a single edge.
    pub fn contract_edge(&self, k: usize) -> Result<StableGraph> {
        if k >= self.num_edges() {
            return Err(TautError::NotAnEdge(k));
        }
        Ok(self.contract_edges(&[k]).graph)
    }

    /// Contracts every edge in `set`; surviving edges keep their relative order.
    pub fn contract_edges(&self, set: &[usize]) -> Contraction {
        let nv = self.num_vertices();
        let mut parent: Vec<usize> = (0..nv).collect();
        for &k in set {
            let (a, b) = self.edges[k];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut vertex_map = vec![usize::MAX; nv];
        let mut next = 0;
        let mut roots = vec![usize::MAX; nv];
        for v in 0..nv {
            let r = find(&mut parent, v);
            if roots[r] == usize::MAX {
                roots[r] = next;
                next += 1;
            }
            vertex_map[v] = roots[r];
        }
        let mut genera = vec![0u32; next];
        let mut counts = vec![0i64; next];
        for v in 0..nv {
            genera[vertex_map[v]] += self.genera[v];
            counts[vertex_map[v]] -= 1;
        }
        for &k in set {
            counts[vertex_map[self.edges[k].0]] += 1;
        }
        for (w, c) in counts.iter().enumerate() {
            // loops created by contraction: edges - vertices + 1
            genera[w] += (c + 1) as u32;
        }
        let n = self.n();
        let legs = self.legs.iter().map(|&v| vertex_map[v]).collect();
        let mut half_edge_map: Vec<Option<usize>> = (0..n).map(Some).collect();
        half_edge_map.resize(self.num_half_edges(), None);
        let mut edges = Vec::new();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if set.contains(&k) {
                continue;
            }
            let j = edges.len();
            edges.push((vertex_map[a], vertex_map[b]));
            half_edge_map[n + 2 * k] = Some(n + 2 * j);
            half_edge_map[n + 2 * k + 1] = Some(n + 2 * j + 1);
        }
        Contraction {
            graph: StableGraph {
                genera,
                legs,
                edges,
            },
            vertex_map,
            half_edge_map,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: &str| TautError::Parse(format!("{m}: `{s}`"));
        let parts: Vec<&str> = s.split(';').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(bad("expected four `;`-separated sections"));
        }
        let header: Vec<&str> = parts[0].split_whitespace().collect();
        if header.len() != 3 || header[0] != "G" {
            return Err(bad("bad header"));
        }
        let g: u32 = header[1]
            .strip_prefix("g=")
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad genus"))?;
        let n: usize = header[2]
            .strip_prefix("n=")
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad n"))?;
        let genera = section(parts[1], "V", &bad)?
            .iter()
            .map(|t| t.parse::<u32>().map_err(|_| bad("bad vertex genus")))
            .collect::<Result<Vec<_>>>()?;
        let mut edges = Vec::new();
        for t in section(parts[2], "E", &bad)? {
            let inner = t
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| bad("bad edge"))?;
            let (a, b) = inner.split_once(':').ok_or_else(|| bad("bad edge"))?;
            edges.push((
                a.parse().map_err(|_| bad("bad edge"))?,
                b.parse().map_err(|_| bad("bad edge"))?,
            ));
        }
        let mut legs = vec![usize::MAX; n];
        for t in section(parts[3], "L", &bad)? {
            let (i, v) = t.split_once("->").ok_or_else(|| bad("bad leg"))?;
            let i: usize = i.parse().map_err(|_| bad("bad leg"))?;
            let v: usize = v.parse().map_err(|_| bad("bad leg"))?;
            if i == 0 || i > n || legs[i - 1] != usize::MAX {
                return Err(bad("bad leg marking"));
            }
            legs[i - 1] = v;
        }
        if legs.contains(&usize::MAX) {
            return Err(bad("missing leg"));
        }
        let graph = StableGraph::new(genera, legs, edges)?;
        if graph.genus() != g {
            return Err(bad("genus does not match header"));
        }
        Ok(graph)
    }
}

fn section<'a>(
    part: &'a str,
    tag: &str,
    bad: &dyn Fn(&str) -> TautError,
) -> Result<Vec<&'a str>> {
    let mut it = part.split_whitespace();
    if it.next() != Some(tag) {
        return Err(bad(&format!("expected section {tag}")));
    }
    Ok(it.collect())
}

pub(crate) fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

impl fmt::Display for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G g={} n={}; V", self.genus(), self.n())?;
        for g in &self.genera {
            write!(f, " {g}")?;
        }
        write!(f, "; E")?;
        for (a, b) in &self.edges {
            write!(f, " ({a}:{b})")?;
        }
        write!(f, "; L")?;
        for (i, v) in self.legs.iter().enumerate() {
            write!(f, " {}->{v}", i + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_preserves_genus() {
        let banana = StableGraph::new(vec![0, 0], vec![], vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        assert_eq!(banana.genus(), 2);
        let c = banana.contract_edge(0).unwrap();
        assert_eq!(c.genera, vec![0]);
        assert_eq!(c.edges, vec![(0, 0), (0, 0)]);
        let lp = StableGraph::new(vec![0], vec![0], vec![(0, 0)]).unwrap();
        let c = lp.contract_edge(0).unwrap();
        assert_eq!(c, StableGraph::trivial(1, 1).unwrap());
        assert!(lp.contract_edge(1).is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = StableGraph::new(vec![1, 0], vec![1, 1, 0], vec![(0, 1), (1, 1)]).unwrap();
        let s = g.to_string();
        assert_eq!(s, "G g=2 n=3; V 1 0; E (0:1) (1:1); L 1->1 2->1 3->0");
        assert_eq!(StableGraph::parse(&s).unwrap(), g);
        let t = StableGraph::trivial(2, 0).unwrap();
        assert_eq!(StableGraph::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn rejects_unstable_and_disconnected() {
        assert!(StableGraph::new(vec![0, 0], vec![0, 0, 1, 1], vec![]).is_err());
        assert!(StableGraph::new(vec![0], vec![0, 0], vec![]).is_err());
        assert!(StableGraph::trivial(0, 2).is_err());
    }
}
