use serde::{Deserialize, Serialize};

use crate::algebra::pf_data;
use crate::error::{Error, Result};
use crate::paths::graph::{BipartiteGraph, Parity, Vertex};

/// Direction of a single step in a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Step {
    H,
    V,
}

/// Corners: 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right.
/// Graphs: 0 top (0–1), 1 bottom (2–3), 2 left (0–2), 3 right (1–3).
/// Each graph's even side is the first corner it joins.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SystemDto", into = "SystemDto")]
pub struct FourGraphSystem {
    graphs: [BipartiteGraph; 4],
    corner_offset: [usize; 5],
    node_labels: Vec<String>,
    node_corner: Vec<u8>,
    edge_offset: [usize; 5],
    edge_ends: Vec<(u32, u32)>,
    out_h: Vec<Vec<(u32, u32)>>,
    out_v: Vec<Vec<(u32, u32)>>,
    beta_h: f64,
    beta_v: f64,
    mu: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SystemDto {
    top: BipartiteGraph,
    bottom: BipartiteGraph,
    left: BipartiteGraph,
    right: BipartiteGraph,
}

impl TryFrom<SystemDto> for FourGraphSystem {
    type Error = Error;
    fn try_from(d: SystemDto) -> Result<Self> {
        FourGraphSystem::new(d.top, d.bottom, d.left, d.right)
    }
}

impl From<FourGraphSystem> for SystemDto {
    fn from(s: FourGraphSystem) -> Self {
        let [top, bottom, left, right] = s.graphs;
        SystemDto { top, bottom, left, right }
    }
}

pub const TOP: usize = 0;
pub const BOTTOM: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;

impl FourGraphSystem {
    pub fn new(top: BipartiteGraph, bottom: BipartiteGraph, left: BipartiteGraph, right: BipartiteGraph) -> Result<Self> {
        let same = |a: &[String], b: &[String], what: &str| {
            if a == b {
                Ok(())
            } else {
                Err(Error::Invalid(format!("corner vertex sets disagree at the {what} corner")))
            }
        };
        same(top.even_labels(), left.even_labels(), "top-left")?;
        same(top.odd_labels(), right.even_labels(), "top-right")?;
        same(left.odd_labels(), bottom.even_labels(), "bottom-left")?;
        same(right.odd_labels(), bottom.odd_labels(), "bottom-right")?;
        let corners: [&[String]; 4] =
            [top.even_labels(), top.odd_labels(), left.odd_labels(), right.odd_labels()];
        let mut corner_offset = [0; 5];
        for c in 0..4 {
            corner_offset[c + 1] = corner_offset[c] + corners[c].len();
        }
        let mut node_labels = Vec::new();
        let mut node_corner = Vec::new();
        for (c, ls) in corners.iter().enumerate() {
            node_labels.extend(ls.iter().cloned());
            node_corner.extend(std::iter::repeat(c as u8).take(ls.len()));
        }
        let graphs = [top, bottom, left, right];
        let ends_corner = [(0usize, 1usize), (2, 3), (0, 2), (1, 3)];
        let mut edge_offset = [0; 5];
        let mut edge_ends = Vec::new();
        for (g, gr) in graphs.iter().enumerate() {
            let (ce, co) = ends_corner[g];
            for (e, o) in gr.edge_list() {
                edge_ends.push(((corner_offset[ce] + e) as u32, (corner_offset[co] + o) as u32));
            }
            edge_offset[g + 1] = edge_ends.len();
        }
        let n = node_labels.len();
        let mut out_h = vec![Vec::new(); n];
        let mut out_v = vec![Vec::new(); n];
        for g in 0..4 {
            for id in edge_offset[g]..edge_offset[g + 1] {
                let (a, b) = edge_ends[id];
                let out = if g < 2 { &mut out_h } else { &mut out_v };
                out[a as usize].push((id as u32, b));
                out[b as usize].push((id as u32, a));
            }
        }
        let mut sys = Self {
            graphs,
            corner_offset,
            node_labels,
            node_corner,
            edge_offset,
            edge_ends,
            out_h,
            out_v,
            beta_h: 0.0,
            beta_v: 0.0,
            mu: Vec::new(),
        };
        sys.compute_markov()?;
        Ok(sys)
    }

    /// Perron-Frobenius weights on all four corners, consistent across the four graphs.
    fn compute_markov(&mut self) -> Result<()> {
        let top = &self.graphs[TOP];
        let star = match top.star().parity {
            Parity::Even => top.star(),
            Parity::Odd => Vertex::even(0),
        };
        let pf_top = pf_data(&top.with_star(star)?)?;
        let pf_left = pf_data(&self.graphs[LEFT].with_star(Vertex::even(star.index))?)?;
        let (bh, bv) = (pf_top.norm, pf_left.norm);
        let mut mu = vec![0.0; self.node_labels.len()];
        let (n0, n1) = (top.n_even(), top.n_odd());
        mu[..n0 + n1].copy_from_slice(&pf_top.weights);
        for i in 0..n0 {
            if (pf_left.weights[i] - mu[i]).abs() > 1e-8 * mu[i].max(1.0) {
                return Err(Error::Invalid("top and left graphs have incompatible Perron-Frobenius weights".into()));
            }
        }
        let n2 = self.graphs[LEFT].n_odd();
        mu[self.corner_offset[2]..self.corner_offset[2] + n2].copy_from_slice(&pf_left.weights[n0..]);
        // right corner from the right graph applied to the top-right weights
        for id in self.edge_offset[RIGHT]..self.edge_offset[RIGHT + 1] {
            let (a, b) = self.edge_ends[id];
            mu[b as usize] += mu[a as usize] / bv;
        }
        self.beta_h = bh;
        self.beta_v = bv;
        self.mu = mu;
        let defect = self.markov_defect();
        if defect > 1e-8 {
            return Err(Error::Invalid(format!(
                "graph system admits no consistent Markov weights (defect {defect:.2e})"
            )));
        }
        Ok(())
    }

    /// Largest violation of `Σ_{neighbours} μ = β μ` over all nodes and both directions.
    pub fn markov_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.node_labels.len() {
            for (kind, beta) in [(Step::H, self.beta_h), (Step::V, self.beta_v)] {
                let s: f64 = self.out(x as u32, kind).iter().map(|&(_, y)| self.mu[y as usize]).sum();
                worst = worst.max((s - beta * self.mu[x]).abs() / self.mu[x].max(1.0));
            }
        }
        worst
    }

    pub fn graph(&self, g: usize) -> &BipartiteGraph {
        &self.graphs[g]
    }

    pub fn top(&self) -> &BipartiteGraph {
        &self.graphs[TOP]
    }
    pub fn bottom(&self) -> &BipartiteGraph {
        &self.graphs[BOTTOM]
    }
    pub fn left(&self) -> &BipartiteGraph {
        &self.graphs[LEFT]
    }
    pub fn right(&self) -> &BipartiteGraph {
        &self.graphs[RIGHT]
    }

    pub fn beta(&self, kind: Step) -> f64 {
        match kind {
            Step::H => self.beta_h,
            Step::V => self.beta_v,
        }
    }

    pub fn mu(&self, node: u32) -> f64 {
        self.mu[node as usize]
    }

    pub fn n_nodes(&self) -> usize {
        self.node_labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_ends.len()
    }

    pub fn node(&self, corner: usize, index: usize) -> u32 {
        (self.corner_offset[corner] + index) as u32
    }

    pub fn corner_of(&self, node: u32) -> usize {
        self.node_corner[node as usize] as usize
    }

    pub fn local_index(&self, node: u32) -> usize {
        node as usize - self.corner_offset[self.corner_of(node)]
    }

    pub fn corner_size(&self, corner: usize) -> usize {
        self.corner_offset[corner + 1] - self.corner_offset[corner]
    }

    pub fn node_label(&self, node: u32) -> &str {
        &self.node_labels[node as usize]
    }

    /// Graph containing a global edge id, and the edge id local to that graph.
    pub fn edge_location(&self, edge: u32) -> (usize, usize) {
        let e = edge as usize;
        let g = (0..4).find(|&g| e < self.edge_offset[g + 1]).expect("edge id in range");
        (g, e - self.edge_offset[g])
    }

    pub fn global_edge(&self, graph: usize, local: usize) -> u32 {
        (self.edge_offset[graph] + local) as u32
    }

    pub fn graph_edges(&self, graph: usize) -> std::ops::Range<u32> {
        self.edge_offset[graph] as u32..self.edge_offset[graph + 1] as u32
    }

    pub fn edge_ends(&self, edge: u32) -> (u32, u32) {
        self.edge_ends[edge as usize]
    }

    /// Outgoing `(edge, target)` pairs of the given kind.
    pub fn out(&self, node: u32, kind: Step) -> &[(u32, u32)] {
        match kind {
            Step::H => &self.out_h[node as usize],
            Step::V => &self.out_v[node as usize],
        }
    }

    pub fn other_end(&self, edge: u32, from: u32) -> u32 {
        let (a, b) = self.edge_ends[edge as usize];
        if a == from {
            b
        } else {
            a
        }
    }

    /// Exchange horizontal and vertical roles (top ↔ left, bottom ↔ right).
    pub fn transposed(&self) -> Result<Self> {
        Self::new(
            self.graphs[LEFT].clone(),
            self.graphs[RIGHT].clone(),
            self.graphs[TOP].clone(),
            self.graphs[BOTTOM].clone(),
        )
    }

    /// Node where the distinguished vertex of the top graph lives (top-left corner).
    pub fn star(&self) -> u32 {
        let s = self.graphs[TOP].star();
        match s.parity {
            Parity::Even => self.node(0, s.index),
            Parity::Odd => self.node(0, 0),
        }
    }
}

/// The entries `v_j^i` of a generalized start set, in lexicographic `(j, i)` order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StartVertexSet {
    multiplicities: Vec<usize>,
    entries: Vec<u32>,
}

impl StartVertexSet {
    /// `multiplicities[j]` copies of the j-th top-left vertex.
    pub fn new(sys: &FourGraphSystem, multiplicities: Vec<usize>) -> Result<Self> {
        if multiplicities.len() != sys.corner_size(0) {
            return Err(Error::Shape("one multiplicity per top-left vertex required".into()));
        }
        if multiplicities.iter().all(|&n| n == 0) {
            return Err(Error::Invalid("start set must contain at least one vertex".into()));
        }
        let entries = multiplicities
            .iter()
            .enumerate()
            .flat_map(|(j, &n)| std::iter::repeat(sys.node(0, j)).take(n))
            .collect();
        Ok(Self { multiplicities, entries })
    }

    pub fn single(sys: &FourGraphSystem, node: u32) -> Result<Self> {
        if sys.corner_of(node) != 0 {
            return Err(Error::Invalid("start vertices must lie in the top-left corner".into()));
        }
        let mut m = vec![0; sys.corner_size(0)];
        m[sys.local_index(node)] = 1;
        Self::new(sys, m)
    }

    pub fn star(sys: &FourGraphSystem) -> Self {
        Self::single(sys, sys.star()).expect("star lies in the top-left corner")
    }

    /// Nodes of the entries, in order.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn mass(&self, sys: &FourGraphSystem) -> f64 {
        self.entries.iter().map(|&v| sys.mu(v)).sum()
    }
}
