//! Commutation with the horizontal string algebras, imposed one horizontal step at a time.
//!
//! An element `x ∈ A_{k,0}` commutes with `A_{0,l}` inside `A_{k,l}` exactly when, rewritten in
//! the signature `H^l V^k`, it has the form `⊕_w 1 ⊗ y_w` over the end points `w` of the
//! horizontal prefixes. The field `y` at level `l + 1` is read off from the level-`l` field by
//! appending a horizontal step and moving it to the front.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::AlgebraElement;
use crate::connection::Transporter;
use crate::error::{Error, Result};
use crate::linalg::{null_space, C64, CMat};
use crate::paths::{canonical_signature, FourGraphSystem, Path, PathSpace, Step};

/// Outcome of a commutant solve over a family of candidates.
#[derive(Clone, Debug)]
pub struct FieldSolve {
    /// Orthonormal solution vectors in candidate coordinates, as columns.
    pub coeffs: CMat,
    /// Solution dimension after imposing commutation with `A_{0,l}`, for `l = 0, 1, …`.
    pub dims_by_l: Vec<usize>,
    pub l_star: usize,
}

/// Horizontal level sets from the start nodes.
pub fn horizontal_levels(sys: &FourGraphSystem, starts: &[u32], n: usize) -> Vec<Vec<u32>> {
    let first: BTreeSet<u32> = starts.iter().copied().collect();
    let mut out = vec![first.into_iter().collect::<Vec<_>>()];
    for _ in 0..n {
        let next: BTreeSet<u32> =
            out.last().unwrap().iter().flat_map(|&w| sys.out(w, Step::H).iter().map(|&(_, t)| t)).collect();
        out.push(next.into_iter().collect());
    }
    out
}

/// First `l ≥ 1` whose neighbouring horizontal level sets coincide; from there on `A_{0,l+1}` is
/// generated by `A_{0,l}` and a Jones projection, which commutes with `A_{k,0}` automatically.
pub fn horizontal_saturation(sys: &FourGraphSystem, starts: &[u32]) -> usize {
    let levels = horizontal_levels(sys, starts, 2 * sys.n_nodes() + 4);
    (1..levels.len() - 1).find(|&l| levels[l + 1] == levels[l - 1]).expect("level sets are eventually periodic")
}

/// How the paths of a space split as a prefix followed by a vertical tail.
struct Split {
    /// Per block, per path: (prefix key, target node, tail block, tail index).
    parts: Vec<Vec<(u32, u32, usize, usize)>>,
}

impl Split {
    fn new(space: &PathSpace, tails: &HashMap<u32, Arc<PathSpace>>, prefix: impl Fn(&Path) -> (u32, u32, usize)) -> Self {
        let parts = space
            .blocks
            .iter()
            .map(|b| {
                b.paths
                    .iter()
                    .map(|p| {
                        let (key, target, skip) = prefix(p);
                        let tail = Path { entry: 0, edges: p.edges[skip..].to_vec() };
                        let (tb, ti) = tails[&target].locate(&tail).expect("tail path exists");
                        (key, target, tb, ti)
                    })
                    .collect()
            })
            .collect();
        Self { parts }
    }
}

/// One field: an operator on the vertical paths of length `k` from each node of a level set.
type Field = Vec<AlgebraElement>;

struct Level {
    nodes: Vec<u32>,
    tails: HashMap<u32, Arc<PathSpace>>,
}

impl Level {
    fn new(tr: &Transporter, nodes: Vec<u32>, k: usize) -> Self {
        let sig = canonical_signature(k, 0);
        let tails = nodes.iter().map(|&w| (w, tr.space(&[w], &sig))).collect();
        Self { nodes, tails }
    }

    fn zero_field(&self) -> Field {
        self.nodes
            .iter()
            .map(|w| {
                let s = &self.tails[w];
                AlgebraElement { blocks: s.blocks.iter().map(|b| CMat::zeros(b.paths.len(), b.paths.len())).collect() }
            })
            .collect()
    }
}

/// Splits operators `zs[i]` on the spaces of `splits[i]` into constraint values and the field they
/// define on `next`. The first (space, prefix) pair reaching a node is its reference.
fn split_operators(splits: &[Split], zs: &[AlgebraElement], next: &Level) -> (Vec<C64>, Field) {
    let mut field = next.zero_field();
    let pos: HashMap<u32, usize> = next.nodes.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let mut refs: HashMap<u32, (usize, u32)> = HashMap::new();
    for (si, sp) in splits.iter().enumerate() {
        for blk in &sp.parts {
            for &(key, target, _, _) in blk {
                refs.entry(target).or_insert((si, key));
            }
        }
    }
    for (si, (sp, z)) in splits.iter().zip(zs).enumerate() {
        for (b, blk) in sp.parts.iter().enumerate() {
            for (i, &(ki, ti, tbi, tii)) in blk.iter().enumerate() {
                if refs[&ti] != (si, ki) {
                    continue;
                }
                for (j, &(kj, _, _, tij)) in blk.iter().enumerate() {
                    if kj == ki {
                        field[pos[&ti]].blocks[tbi][(tii, tij)] = z.blocks[b][(i, j)];
                    }
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (si, (sp, z)) in splits.iter().zip(zs).enumerate() {
        for (b, blk) in sp.parts.iter().enumerate() {
            for (i, &(ki, ti, tbi, tii)) in blk.iter().enumerate() {
                let is_ref = refs[&ti] == (si, ki);
                for (j, &(kj, _, _, tij)) in blk.iter().enumerate() {
                    if kj != ki {
                        rows.push(z.blocks[b][(i, j)]);
                    } else if !is_ref {
                        rows.push(z.blocks[b][(i, j)] - field[pos[&ti]].blocks[tbi][(tii, tij)]);
                    }
                }
            }
        }
    }
    (rows, field)
}

/// Commutant solver for one vertical level `k` over a start set.
pub struct FieldSolver<'a> {
    tr: &'a Transporter,
    starts: Vec<u32>,
    k: usize,
}

impl<'a> FieldSolver<'a> {
    pub fn new(tr: &'a Transporter, starts: &[u32], k: usize) -> Self {
        Self { tr, starts: starts.to_vec(), k }
    }

    fn sys(&self) -> &FourGraphSystem {
        self.tr.system()
    }

    /// Constraint values and level-0 field of an element of `A_{k,0}`.
    fn level_zero(&self, level: &Level, split: &Split, x: &AlgebraElement) -> (Vec<C64>, Field) {
        split_operators(std::slice::from_ref(split), std::slice::from_ref(x), level)
    }

    fn zero_split(&self, level: &Level) -> Split {
        let space = self.tr.space(&self.starts, &canonical_signature(self.k, 0));
        let starts = self.starts.clone();
        Split::new(&space, &level.tails, |p| (p.entry, starts[p.entry as usize], 0))
    }

    fn step_splits(&self, level: &Level, next: &Level) -> Vec<Split> {
        let mut sig = vec![Step::H];
        sig.extend(canonical_signature(self.k, 0));
        let sys = self.sys();
        level
            .nodes
            .iter()
            .map(|&w| {
                let space = self.tr.space(&[w], &sig);
                Split::new(&space, &next.tails, |p| {
                    let e = p.edges[0];
                    (e, sys.other_end(e, w), 1)
                })
            })
            .collect()
    }

    /// Moves a field one horizontal step: `y_w ⊗ 1_H` rewritten with the new step first.
    fn transport(&self, level: &Level, y: &Field) -> Result<Vec<AlgebraElement>> {
        let vk = canonical_signature(self.k, 0);
        let mut vkh = vk.clone();
        vkh.push(Step::H);
        let mut hvk = vec![Step::H];
        hvk.extend(vk.iter().copied());
        level
            .nodes
            .iter()
            .zip(y)
            .map(|(&w, yw)| {
                let ext = self.tr.append(yw, &[w], &vk, Step::H);
                self.tr.reorder(&ext, &[w], &vkh, &hvk)
            })
            .collect()
    }

    /// Subspace of `span(candidates)` commuting with `A_{0,l}` for every `l`.
    ///
    /// Horizontal levels are processed until one past the saturation level; exceeding `l_cap`
    /// yields `Error::Undecided` with the dimensions seen so far.
    pub fn solve(&self, candidates: &[AlgebraElement], l_cap: usize, tol: f64) -> Result<FieldSolve> {
        let sat = horizontal_saturation(self.sys(), &self.starts);
        let last = sat + 1;
        let levels = horizontal_levels(self.sys(), &self.starts, last);
        let d = candidates.len();
        if d == 0 {
            return Ok(FieldSolve { coeffs: CMat::zeros(0, 0), dims_by_l: vec![0], l_star: 0 });
        }
        let mut total = CMat::identity(d, d);
        let mut level = Level::new(self.tr, levels[0].clone(), self.k);
        let split0 = self.zero_split(&level);
        let parts: Vec<(Vec<C64>, Field)> =
            candidates.par_iter().map(|x| self.level_zero(&level, &split0, x)).collect();
        let (n, mut fields) = self.reduce(parts, tol);
        total = &total * &n;
        let mut dims = vec![total.ncols()];
        log::info!("k={} l=0 dim={}", self.k, total.ncols());
        for l in 1..=last {
            if l > l_cap {
                return Err(Error::Undecided {
                    depth: self.k,
                    reason: format!("horizontal levels need l = {last} but the cap is {l_cap}"),
                    dims: vec![dims],
                });
            }
            if total.ncols() == 0 {
                dims.push(0);
                continue;
            }
            let next = Level::new(self.tr, levels[l].clone(), self.k);
            let splits = self.step_splits(&level, &next);
            let parts: Vec<Result<(Vec<C64>, Field)>> = fields
                .par_iter()
                .map(|y| {
                    let zs = self.transport(&level, y)?;
                    Ok(split_operators(&splits, &zs, &next))
                })
                .collect();
            let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
            let (n, f) = self.reduce(parts, tol);
            total = &total * &n;
            fields = f;
            level = next;
            dims.push(total.ncols());
            log::info!("k={} l={} dim={}", self.k, l, total.ncols());
        }
        Ok(FieldSolve { coeffs: total, dims_by_l: dims, l_star: sat })
    }

    /// Null space of the stacked constraints and the fields of the surviving combinations.
    fn reduce(&self, parts: Vec<(Vec<C64>, Field)>, tol: f64) -> (CMat, Vec<Field>) {
        let d = parts.len();
        let r = parts.first().map_or(0, |p| p.0.len());
        let m = CMat::from_fn(r, d, |i, j| parts[j].0[i]);
        let n = null_space(&m, tol);
        let fields = (0..n.ncols())
            .map(|c| {
                let mut f: Field = parts[0].1.iter().map(|y| y.scale(C64::new(0.0, 0.0))).collect();
                for (j, p) in parts.iter().enumerate() {
                    let z = n[(j, c)];
                    if z.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (fw, yw) in f.iter_mut().zip(&p.1) {
                        fw.axpy(z, yw);
                    }
                }
                f
            })
            .collect();
        (n, fields)
    }

    /// Norm of the commutation defect of a single element at each horizontal level up to `l_max`.
    ///
    /// Past the first nonzero entry the later values describe the nearest admissible field only.
    pub fn defects(&self, x: &AlgebraElement, l_max: usize) -> Result<Vec<f64>> {
        let levels = horizontal_levels(self.sys(), &self.starts, l_max);
        let mut level = Level::new(self.tr, levels[0].clone(), self.k);
        let split0 = self.zero_split(&level);
        let (rows, mut field) = self.level_zero(&level, &split0, x);
        let norm = |r: &[C64]| r.iter().fold(0.0, |s, z| s + z.norm_sqr()).sqrt();
        let mut out = vec![norm(&rows)];
        for l in 1..=l_max {
            let next = Level::new(self.tr, levels[l].clone(), self.k);
            let splits = self.step_splits(&level, &next);
            let zs = self.transport(&level, &field)?;
            let (rows, f) = split_operators(&splits, &zs, &next);
            out.push(norm(&rows));
            field = f;
            level = next;
        }
        Ok(out)
    }
}
