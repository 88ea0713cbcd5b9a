use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub parity: Parity,
    pub index: usize,
}

impl Vertex {
    pub fn even(index: usize) -> Self {
        Self { parity: Parity::Even, index }
    }
    pub fn odd(index: usize) -> Self {
        Self { parity: Parity::Odd, index }
    }
}

/// Connected bipartite multigraph with a distinguished vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDto", into = "GraphDto")]
pub struct BipartiteGraph {
    even: Vec<String>,
    odd: Vec<String>,
    /// `(even, odd, multiplicity)`, sorted, one entry per adjacent pair.
    edges: Vec<(usize, usize, usize)>,
    star: Vertex,
}

#[derive(Serialize, Deserialize)]
struct GraphDto {
    even: Vec<String>,
    odd: Vec<String>,
    edges: Vec<(String, String, usize)>,
    star: String,
}

impl TryFrom<GraphDto> for BipartiteGraph {
    type Error = Error;
    fn try_from(d: GraphDto) -> Result<Self> {
        let edges: Vec<(&str, &str, usize)> = d.edges.iter().map(|(a, b, m)| (a.as_str(), b.as_str(), *m)).collect();
        let even: Vec<&str> = d.even.iter().map(String::as_str).collect();
        let odd: Vec<&str> = d.odd.iter().map(String::as_str).collect();
        BipartiteGraph::from_labels(&even, &odd, &edges, &d.star)
    }
}

impl From<BipartiteGraph> for GraphDto {
    fn from(g: BipartiteGraph) -> Self {
        GraphDto {
            edges: g.edges.iter().map(|&(e, o, m)| (g.even[e].clone(), g.odd[o].clone(), m)).collect(),
            star: g.label(g.star).to_string(),
            even: g.even,
            odd: g.odd,
        }
    }
}

impl BipartiteGraph {
    pub fn new(even: Vec<String>, odd: Vec<String>, edges: Vec<(usize, usize, usize)>, star: Vertex) -> Result<Self> {
        let mut merged: HashMap<(usize, usize), usize> = HashMap::new();
        for &(e, o, m) in &edges {
            if e >= even.len() || o >= odd.len() {
                return Err(Error::Invalid(format!("edge ({e},{o}) out of range")));
            }
            *merged.entry((e, o)).or_default() += m;
        }
        let mut edges: Vec<_> = merged.into_iter().filter(|&(_, m)| m > 0).map(|((e, o), m)| (e, o, m)).collect();
        edges.sort();
        let n_star = match star.parity {
            Parity::Even => even.len(),
            Parity::Odd => odd.len(),
        };
        if star.index >= n_star {
            return Err(Error::Invalid("distinguished vertex out of range".into()));
        }
        let mut labels: Vec<&String> = even.iter().chain(&odd).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("vertex labels must be unique".into()));
        }
        let g = Self { even, odd, edges, star };
        if g.even.is_empty() || g.odd.is_empty() {
            return Err(Error::Invalid("graph needs vertices of both parities".into()));
        }
        if !g.is_connected() {
            return Err(Error::Disconnected("bipartite graph must be connected".into()));
        }
        Ok(g)
    }

    pub fn from_labels(even: &[&str], odd: &[&str], edges: &[(&str, &str, usize)], star: &str) -> Result<Self> {
        let ei: HashMap<&str, usize> = even.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let oi: HashMap<&str, usize> = odd.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut es = Vec::new();
        for &(a, b, m) in edges {
            match (ei.get(a), oi.get(b)) {
                (Some(&e), Some(&o)) => es.push((e, o, m)),
                _ => return Err(Error::Invalid(format!("edge ({a},{b}) does not join an even and an odd vertex"))),
            }
        }
        let star = if let Some(&i) = ei.get(star) {
            Vertex::even(i)
        } else if let Some(&i) = oi.get(star) {
            Vertex::odd(i)
        } else {
            return Err(Error::Invalid(format!("unknown distinguished vertex {star}")));
        };
        Self::new(
            even.iter().map(|s| s.to_string()).collect(),
            odd.iter().map(|s| s.to_string()).collect(),
            es,
            star,
        )
    }

    /// Graph of a Bratteli matrix (rows even, columns odd).
    pub fn from_incidence(
        incidence: &[Vec<usize>],
        even: Vec<String>,
        odd: Vec<String>,
        star: Vertex,
    ) -> Result<Self> {
        let mut es = Vec::new();
        for (e, row) in incidence.iter().enumerate() {
            for (o, &m) in row.iter().enumerate() {
                if m > 0 {
                    es.push((e, o, m));
                }
            }
        }
        Self::new(even, odd, es, star)
    }

    pub fn even_labels(&self) -> &[String] {
        &self.even
    }

    pub fn odd_labels(&self) -> &[String] {
        &self.odd
    }

    pub fn n_even(&self) -> usize {
        self.even.len()
    }

    pub fn n_odd(&self) -> usize {
        self.odd.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Edges with multiplicity expanded; the position is the edge id.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges.iter().flat_map(|&(e, o, m)| std::iter::repeat((e, o)).take(m)).collect()
    }

    pub fn star(&self) -> Vertex {
        self.star
    }

    pub fn with_star(&self, star: Vertex) -> Result<Self> {
        Self::new(self.even.clone(), self.odd.clone(), self.edges.clone(), star)
    }

    pub fn label(&self, v: Vertex) -> &str {
        match v.parity {
            Parity::Even => &self.even[v.index],
            Parity::Odd => &self.odd[v.index],
        }
    }

    pub fn find(&self, label: &str) -> Option<Vertex> {
        if let Some(i) = self.even.iter().position(|l| l == label) {
            return Some(Vertex::even(i));
        }
        self.odd.iter().position(|l| l == label).map(Vertex::odd)
    }

    /// Index into `adjacency()`: even vertices first.
    pub fn flat_index(&self, v: Vertex) -> usize {
        match v.parity {
            Parity::Even => v.index,
            Parity::Odd => self.even.len() + v.index,
        }
    }

    pub fn vertex_at(&self, flat: usize) -> Vertex {
        if flat < self.even.len() {
            Vertex::even(flat)
        } else {
            Vertex::odd(flat - self.even.len())
        }
    }

    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut m = vec![vec![0; self.odd.len()]; self.even.len()];
        for &(e, o, k) in &self.edges {
            m[e][o] = k;
        }
        m
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.n_vertices();
        let ne = self.even.len();
        let mut a = DMatrix::zeros(n, n);
        for &(e, o, m) in &self.edges {
            a[(e, ne + o)] = m as f64;
            a[(ne + o, e)] = m as f64;
        }
        a
    }

    pub fn neighbors(&self, v: Vertex) -> Vec<(Vertex, usize)> {
        self.edges
            .iter()
            .filter_map(|&(e, o, m)| match v.parity {
                Parity::Even if e == v.index => Some((Vertex::odd(o), m)),
                Parity::Odd if o == v.index => Some((Vertex::even(e), m)),
                _ => None,
            })
            .collect()
    }

    fn is_connected(&self) -> bool {
        self.distances_from(Vertex::even(0)).iter().all(|d| d.is_some())
    }

    /// Graph distances from `v`, indexed by flat index.
    pub fn distances_from(&self, v: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_vertices()];
        let mut q = VecDeque::new();
        dist[self.flat_index(v)] = Some(0);
        q.push_back(v);
        while let Some(x) = q.pop_front() {
            let d = dist[self.flat_index(x)].unwrap();
            for (y, _) in self.neighbors(x) {
                let fy = self.flat_index(y);
                if dist[fy].is_none() {
                    dist[fy] = Some(d + 1);
                    q.push_back(y);
                }
            }
        }
        dist
    }

    /// Same graph with the roles of the two vertex classes exchanged.
    pub fn swapped(&self) -> Self {
        let mut edges: Vec<_> = self.edges.iter().map(|&(e, o, m)| (o, e, m)).collect();
        edges.sort();
        let star = Vertex {
            parity: match self.star.parity {
                Parity::Even => Parity::Odd,
                Parity::Odd => Parity::Even,
            },
            index: self.star.index,
        };
        Self { even: self.odd.clone(), odd: self.even.clone(), edges, star }
    }

    /// Isomorphism test that maps star to star.
    pub fn is_isomorphic(&self, other: &Self) -> bool {
        if self.n_vertices() != other.n_vertices() || self.n_edges() != other.n_edges() {
            return false;
        }
        let (a, b) = (self.adjacency(), other.adjacency());
        let n = a.nrows();
        let ds = self.distances_from(self.star);
        let dt = other.distances_from(other.star);
        let deg = |m: &DMatrix<f64>, i: usize| (0..n).map(|j| m[(i, j)]).sum::<f64>() as usize;
        let sig = |m: &DMatrix<f64>, d: &[Option<usize>], i: usize| (d[i], deg(m, i));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| ds[i]);
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn extend(
            k: usize,
            order: &[usize],
            map: &mut [usize],
            used: &mut [bool],
            a: &DMatrix<f64>,
            b: &DMatrix<f64>,
            ok: &dyn Fn(usize, usize) -> bool,
        ) -> bool {
            if k == order.len() {
                return true;
            }
            let i = order[k];
            for j in 0..a.nrows() {
                if used[j] || !ok(i, j) {
                    continue;
                }
                let consistent = order[..k].iter().all(|&p| a[(i, p)] == b[(j, map[p])]);
                if consistent {
                    map[i] = j;
                    used[j] = true;
                    if extend(k + 1, order, map, used, a, b, ok) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        let ok = |i: usize, j: usize| sig(&a, &ds, i) == sig(&b, &dt, j);
        let si = self.flat_index(self.star);
        let sj = other.flat_index(other.star);
        if !ok(si, sj) {
            return false;
        }
        extend(0, &order, &mut map, &mut used, &a, &b, &ok)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph {name} {{");
        for (i, l) in self.even.iter().enumerate() {
            let shape = if self.star == Vertex::even(i) { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  \"{l}\" [shape={shape}];");
        }
        for (i, l) in self.odd.iter().enumerate() {
            let shape = if self.star == Vertex::odd(i) { "doublecircle" } else { "box" };
            let _ = writeln!(s, "  \"{l}\" [shape={shape}];");
        }
        for &(e, o, m) in &self.edges {
            for _ in 0..m {
                let _ = writeln!(s, "  \"{}\" -- \"{}\";", self.even[e], self.odd[o]);
            }
        }
        s.push_str("}\n");
        s
    }
}
