use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::{AlgebraElement, MultiMatrixAlgebra, TraceVector};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::paths::system::{FourGraphSystem, StartVertexSet, Step};

/// Largest number of steps of either kind accepted by the enumerators.
pub const DEFAULT_MAX_DEPTH: usize = 16;

/// A path: index of its start entry and the edge ids it traverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub entry: u32,
    pub edges: Vec<u32>,
}

/// All paths following a fixed step signature, grouped by range node.
#[derive(Debug)]
pub struct PathSpace {
    pub signature: Vec<Step>,
    /// Node of each start entry.
    pub starts: Vec<u32>,
    pub blocks: Vec<PathBlock>,
    index: HashMap<Path, (usize, usize)>,
    block_of_node: HashMap<u32, usize>,
}

#[derive(Debug)]
pub struct PathBlock {
    pub node: u32,
    pub paths: Vec<Path>,
}

impl PathSpace {
    pub fn new(sys: &FourGraphSystem, starts: &[u32], signature: &[Step]) -> Self {
        let mut frontier: Vec<(Path, u32)> = starts
            .iter()
            .enumerate()
            .map(|(i, &v)| (Path { entry: i as u32, edges: Vec::new() }, v))
            .collect();
        for &kind in signature {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (p, v) in &frontier {
                for &(e, w) in sys.out(*v, kind) {
                    let mut q = p.clone();
                    q.edges.push(e);
                    next.push((q, w));
                }
            }
            frontier = next;
        }
        let mut by_node: HashMap<u32, Vec<Path>> = HashMap::new();
        for (p, v) in frontier {
            by_node.entry(v).or_default().push(p);
        }
        let mut nodes: Vec<u32> = by_node.keys().copied().collect();
        nodes.sort();
        let mut blocks = Vec::with_capacity(nodes.len());
        let mut index = HashMap::new();
        let mut block_of_node = HashMap::new();
        for (b, v) in nodes.into_iter().enumerate() {
            let mut paths = by_node.remove(&v).unwrap();
            paths.sort();
            for (i, p) in paths.iter().enumerate() {
                index.insert(p.clone(), (b, i));
            }
            block_of_node.insert(v, b);
            blocks.push(PathBlock { node: v, paths });
        }
        Self { signature: signature.to_vec(), starts: starts.to_vec(), blocks, index, block_of_node }
    }

    pub fn locate(&self, p: &Path) -> Option<(usize, usize)> {
        self.index.get(p).copied()
    }

    pub fn block_of(&self, node: u32) -> Option<usize> {
        self.block_of_node.get(&node).copied()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.paths.len()).collect()
    }

    pub fn n_paths(&self) -> usize {
        self.blocks.iter().map(|b| b.paths.len()).sum()
    }

    pub fn algebra(&self, sys: &FourGraphSystem) -> MultiMatrixAlgebra {
        let labels = self.blocks.iter().map(|b| sys.node_label(b.node).to_string()).collect();
        MultiMatrixAlgebra::new(labels, self.sizes()).expect("path blocks are nonempty with distinct labels")
    }

    /// Node visited after `pos` steps.
    pub fn node_at(&self, sys: &FourGraphSystem, p: &Path, pos: usize) -> u32 {
        let mut v = self.starts[p.entry as usize];
        for &e in &p.edges[..pos] {
            v = sys.other_end(e, v);
        }
        v
    }

    pub fn count(&self, kind: Step) -> usize {
        self.signature.iter().filter(|&&s| s == kind).count()
    }

    /// Markov trace: minimal projection at `w` weighs `μ(w) / (β_v^k β_h^l · Σ_V μ)`.
    pub fn markov_trace(&self, sys: &FourGraphSystem) -> TraceVector {
        let mass: f64 = self.starts.iter().map(|&v| sys.mu(v)).sum();
        let scale = sys.beta(Step::V).powi(self.count(Step::V) as i32)
            * sys.beta(Step::H).powi(self.count(Step::H) as i32)
            * mass;
        TraceVector { weights: self.blocks.iter().map(|b| sys.mu(b.node) / scale).collect() }
    }

    /// Jones projection acting on steps `pos`, `pos + 1` (a step and its reversal).
    ///
    /// Matrix entries are `√(μ(y)μ(y')) / (β μ(x))` between backtracking paths that agree
    /// outside the two steps, where `x` is the node before the steps and `y, y'` the turning nodes.
    pub fn cup_projection(&self, sys: &FourGraphSystem, pos: usize) -> Result<AlgebraElement> {
        if pos + 1 >= self.signature.len() || self.signature[pos] != self.signature[pos + 1] {
            return Err(Error::Invalid(format!("no pair of equal steps at position {pos}")));
        }
        let beta = sys.beta(self.signature[pos]);
        let mut x = AlgebraElement { blocks: self.sizes().iter().map(|&n| CMat::zeros(n, n)).collect() };
        for (b, block) in self.blocks.iter().enumerate() {
            let mut groups: HashMap<(u32, Vec<u32>), Vec<(usize, f64, f64)>> = HashMap::new();
            for (i, p) in block.paths.iter().enumerate() {
                if p.edges[pos] != p.edges[pos + 1] {
                    continue;
                }
                let xnode = self.node_at(sys, p, pos);
                let y = sys.other_end(p.edges[pos], xnode);
                let mut rest = p.edges.clone();
                rest.drain(pos..pos + 2);
                groups.entry((p.entry, rest)).or_default().push((i, sys.mu(y), sys.mu(xnode)));
            }
            for members in groups.values() {
                for &(i, mi, mx) in members {
                    for &(j, mj, _) in members {
                        x.blocks[b][(i, j)] = c((mi * mj).sqrt() / (beta * mx));
                    }
                }
            }
        }
        Ok(x)
    }
}

/// Multi-matrix algebra spanned by strings `(ξ, ξ')` of signature `k` vertical then `l` horizontal steps.
#[derive(Debug, Clone)]
pub struct StringAlgebra {
    pub k: usize,
    pub l: usize,
    pub space: Arc<PathSpace>,
    pub algebra: MultiMatrixAlgebra,
    pub trace: TraceVector,
}

pub fn canonical_signature(k: usize, l: usize) -> Vec<Step> {
    let mut s = vec![Step::V; k];
    s.extend(std::iter::repeat(Step::H).take(l));
    s
}

fn check_depth(k: usize, l: usize) -> Result<()> {
    let requested = k.max(l);
    if requested > DEFAULT_MAX_DEPTH {
        return Err(Error::DepthBound { requested, bound: DEFAULT_MAX_DEPTH });
    }
    Ok(())
}

/// Paths with `k` vertical then `l` horizontal steps from `v`, grouped by range.
pub fn enumerate_paths(sys: &FourGraphSystem, v: &StartVertexSet, k: usize, l: usize) -> Result<Vec<Path>> {
    check_depth(k, l)?;
    let space = PathSpace::new(sys, v.entries(), &canonical_signature(k, l));
    Ok(space.blocks.into_iter().flat_map(|b| b.paths).collect())
}

pub fn string_algebra(sys: &FourGraphSystem, v: &StartVertexSet, k: usize, l: usize) -> Result<StringAlgebra> {
    check_depth(k, l)?;
    let space = PathSpace::new(sys, v.entries(), &canonical_signature(k, l));
    let algebra = space.algebra(sys);
    let trace = space.markov_trace(sys);
    Ok(StringAlgebra { k, l, space: Arc::new(space), algebra, trace })
}

pub fn trace_on_strings(sys: &FourGraphSystem, v: &StartVertexSet, k: usize, l: usize) -> Result<TraceVector> {
    Ok(string_algebra(sys, v, k, l)?.trace)
}

/// Which family of Jones projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}

impl StringAlgebra {
    /// `e_level` (vertical) or `f_level` (horizontal) as an element of this algebra.
    pub fn jones(&self, sys: &FourGraphSystem, dir: Direction, level: usize) -> Result<AlgebraElement> {
        if level == 0 {
            return Err(Error::Invalid("Jones projections are indexed from 1".into()));
        }
        let pos = match dir {
            Direction::Vertical if level < self.k => level - 1,
            Direction::Horizontal if level < self.l => self.k + level - 1,
            _ => {
                return Err(Error::Invalid(format!(
                    "projection {level} does not live at position ({}, {})",
                    self.k, self.l
                )))
            }
        };
        self.space.cup_projection(sys, pos)
    }
}

/// Jones projection `e_level` / `f_level` in the string algebra at `(k, l)`.
pub fn jones_projection_string(
    sys: &FourGraphSystem,
    v: &StartVertexSet,
    k: usize,
    l: usize,
    dir: Direction,
    level: usize,
) -> Result<AlgebraElement> {
    string_algebra(sys, v, k, l)?.jones(sys, dir, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::trace_eval;
    use crate::paths::graph::BipartiteGraph;

    fn a3_system() -> FourGraphSystem {
        let g = BipartiteGraph::from_labels(&["*", "b"], &["a"], &[("*", "a", 1), ("b", "a", 1)], "*").unwrap();
        FourGraphSystem::new(g.clone(), g.swapped(), g.clone(), g.swapped()).unwrap()
    }

    #[test]
    fn a3_horizontal_paths() {
        let sys = a3_system();
        let v = StartVertexSet::star(&sys);
        let p = enumerate_paths(&sys, &v, 0, 2).unwrap();
        assert_eq!(p.len(), 2);
        let sa = string_algebra(&sys, &v, 0, 2).unwrap();
        assert_eq!(sa.algebra.sizes(), &[1, 1]);
        let labels: Vec<&str> = sa.algebra.labels().iter().map(String::as_str).collect();
        assert_eq!(labels, ["*", "b"]);
    }

    #[test]
    fn empty_path_and_multiplicity() {
        let sys = a3_system();
        let v = StartVertexSet::star(&sys);
        assert_eq!(enumerate_paths(&sys, &v, 0, 0).unwrap().len(), 1);
        let v2 = StartVertexSet::new(&sys, vec![2, 0]).unwrap();
        let sa = string_algebra(&sys, &v2, 0, 0).unwrap();
        assert_eq!(sa.algebra.sizes(), &[2]);
    }

    #[test]
    fn depth_bound() {
        let sys = a3_system();
        let v = StartVertexSet::star(&sys);
        assert!(matches!(enumerate_paths(&sys, &v, 0, 40), Err(Error::DepthBound { .. })));
    }

    #[test]
    fn first_horizontal_jones_projection_has_trace_half() {
        let sys = a3_system();
        let v = StartVertexSet::star(&sys);
        let sa = string_algebra(&sys, &v, 0, 2).unwrap();
        let f = sa.jones(&sys, Direction::Horizontal, 1).unwrap();
        assert!(f.is_close(&(&f * &f), 1e-14));
        let t = trace_eval(&sa.algebra, &sa.trace, &f).unwrap();
        assert!((t.re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn trace_restricts_consistently() {
        let sys = a3_system();
        let v = StartVertexSet::star(&sys);
        let small = string_algebra(&sys, &v, 0, 1).unwrap();
        assert!((small.trace.weights[0] - 1.0).abs() < 1e-14);
        let big = string_algebra(&sys, &v, 0, 2).unwrap();
        // the single path *a extends to *a* and *ab
        let restricted: f64 = big.trace.weights.iter().sum();
        assert!((restricted - small.trace.weights[0]).abs() < 1e-14);
    }
}
