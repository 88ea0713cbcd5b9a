//! Higher relative commutants, flatness, principal graphs and indices.

mod decompose;
mod fields;
mod tower;

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{pf_data, AlgebraElement, Inclusion, MultiMatrixAlgebra};
use crate::connection::BiUnitaryConnection;
use crate::error::{Error, Result};
use crate::linalg::{C64, CMat};
use crate::paths::{BipartiteGraph, Direction, PathSpace, StartVertexSet, Step, Vertex};
use crate::square::DoubleSequence;

pub use decompose::{decompose, IrrepColumns};
pub use fields::{horizontal_levels, horizontal_saturation, FieldSolve, FieldSolver};
use tower::TowerBuilder;

/// Schema tag of the JSON records emitted here.
pub const SCHEMA: &str = "commsq/flatness/v1";

/// Depth caps and numerical tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Caps {
    pub k_max: usize,
    pub l_cap: usize,
    /// Absolute singular-value cutoff for null spaces.
    pub tol: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Self { k_max: 12, l_cap: 12, tol: 1e-8 }
    }
}

/// Above this many candidates `relative_commutant` goes through the tower instead.
pub const DIRECT_LIMIT: usize = 2000;

/// One irreducible summand of a commutant, `M_d ⊗ 1` on the path space.
#[derive(Clone, Debug)]
pub struct Irrep {
    /// Principal-graph vertex inside a tower; position in the list for a standalone solve.
    pub vertex: usize,
    pub d: usize,
    /// Multiplicity in each block of the path space.
    pub mult: Vec<usize>,
    /// Per block, `d · mult` orthonormal columns ordered `(t, s)` with `t` outer.
    pub cols: Vec<CMat>,
}

/// `C_k = A_{0,∞}' ∩ A_{k,∞}`, realised inside `A_{k,0}`.
#[derive(Clone, Debug)]
pub struct Commutant {
    pub k: usize,
    pub space: Arc<PathSpace>,
    pub irreps: Vec<Irrep>,
    /// Per block, all irreducible columns side by side in the order of `irreps`.
    pub unitaries: Vec<CMat>,
    /// Markov trace weights of `A_{k,0}`.
    pub weights: Vec<f64>,
    /// Horizontal level up to which commutation was imposed; `None` if nothing had to be solved.
    pub l_star: Option<usize>,
    pub dims_by_l: Vec<usize>,
}

impl Commutant {
    pub fn dim(&self) -> usize {
        self.irreps.iter().map(|i| i.d * i.d).sum()
    }

    /// Sizes of the matrix summands.
    pub fn sizes(&self) -> Vec<usize> {
        self.irreps.iter().map(|i| i.d).collect()
    }

    /// Sum of the summand sizes.
    pub fn total_size(&self) -> usize {
        self.irreps.iter().map(|i| i.d).sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.sizes().iter().map(|n| n * n).sum()
    }

    pub fn algebra(&self) -> MultiMatrixAlgebra {
        let labels = self.irreps.iter().map(|i| format!("v{}", i.vertex)).collect();
        MultiMatrixAlgebra::new(labels, self.sizes()).expect("summands are nonempty")
    }

    fn zero(&self) -> AlgebraElement {
        AlgebraElement { blocks: self.space.sizes().iter().map(|&n| CMat::zeros(n, n)).collect() }
    }

    /// Matrix unit `e_{ij}` of summand `p`, as an element of `A_{k,0}`.
    pub fn matrix_unit(&self, p: usize, i: usize, j: usize) -> AlgebraElement {
        let irr = &self.irreps[p];
        let mut x = self.zero();
        for (b, c) in irr.cols.iter().enumerate() {
            let m = irr.mult[b];
            if m > 0 {
                x.blocks[b] = c.columns(i * m, m) * c.columns(j * m, m).adjoint();
            }
        }
        x
    }

    /// The embedding `C_k ⊂ A_{k,0}`.
    pub fn inclusion(&self, sys: &crate::paths::FourGraphSystem) -> Result<Inclusion> {
        let bratteli = self.irreps.iter().map(|i| i.mult.clone()).collect();
        let unitaries = self
            .unitaries
            .iter()
            .enumerate()
            .map(|(b, u)| {
                let mut w = CMat::zeros(u.nrows(), u.ncols());
                let (mut ours, mut std) = (0, 0);
                for irr in &self.irreps {
                    let m = irr.mult[b];
                    for s in 0..m {
                        for t in 0..irr.d {
                            w.set_column(std, &u.column(ours + t * m + s));
                            std += 1;
                        }
                    }
                    ours += irr.d * m;
                }
                Some(w)
            })
            .collect();
        Inclusion::new(self.algebra(), self.space.algebra(sys), bratteli, unitaries)
    }

    /// Trace-preserving conditional expectation of `A_{k,0}` onto `C_k`.
    pub fn expectation(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut out = self.zero();
        for (p, irr) in self.irreps.iter().enumerate() {
            let norm: f64 = irr.mult.iter().zip(&self.weights).map(|(&m, w)| m as f64 * w).sum();
            for i in 0..irr.d {
                for j in 0..irr.d {
                    let mut z = C64::new(0.0, 0.0);
                    for (b, c) in irr.cols.iter().enumerate() {
                        let m = irr.mult[b];
                        if m == 0 {
                            continue;
                        }
                        let ci = c.columns(i * m, m);
                        let cj = c.columns(j * m, m);
                        z += (ci.adjoint() * &x.blocks[b] * cj).trace() * self.weights[b];
                    }
                    if z.norm() > 0.0 {
                        out.axpy(z / norm, &self.matrix_unit(p, i, j));
                    }
                }
            }
        }
        out
    }

    pub fn contains(&self, x: &AlgebraElement, tol: f64) -> bool {
        let e = self.expectation(x);
        let mut d = x.clone();
        d.axpy(C64::new(-1.0, 0.0), &e);
        d.norm() <= tol * x.norm().max(1.0)
    }
}

fn assemble_unitaries(sizes: &[usize], irreps: &[Irrep]) -> Vec<CMat> {
    sizes
        .iter()
        .enumerate()
        .map(|(b, &n)| {
            let mut u = CMat::zeros(n, n);
            let mut off = 0;
            for irr in irreps {
                let w = irr.d * irr.mult[b];
                u.columns_mut(off, w).copy_from(&irr.cols[b]);
                off += w;
            }
            u
        })
        .collect()
}

/// The double sequence whose horizontal (resp. vertical) subfactor is asked for.
///
/// The vertical subfactor of a connection is the horizontal one of its transpose.
pub fn sequence_for(conn: &BiUnitaryConnection, start: &StartVertexSet, dir: Direction) -> Result<DoubleSequence> {
    Ok(match dir {
        Direction::Horizontal => DoubleSequence::new(conn.clone(), start.clone()),
        Direction::Vertical => {
            let t = conn.transposed()?;
            let start = StartVertexSet::new(t.system(), start.multiplicities().to_vec())?;
            DoubleSequence::new(t, start)
        }
    })
}

/// `C_k` by a single solve over all of `A_{k,0}`, or through the tower when that is too large.
pub fn relative_commutant(ds: &DoubleSequence, k: usize, caps: &Caps) -> Result<Commutant> {
    let space = ds.space(k, 0)?;
    let sizes = space.sizes();
    let n: usize = sizes.iter().map(|n| n * n).sum();
    if n > DIRECT_LIMIT {
        let t = tower(ds, k, caps)?;
        return Ok(t.levels.into_iter().nth(k).unwrap());
    }
    let mut candidates = Vec::with_capacity(n);
    for (b, &nb) in sizes.iter().enumerate() {
        for i in 0..nb {
            for j in 0..nb {
                let mut blocks: Vec<CMat> = sizes.iter().map(|&m| CMat::zeros(m, m)).collect();
                blocks[b][(i, j)] = C64::new(1.0, 0.0);
                candidates.push(AlgebraElement { blocks });
            }
        }
    }
    let solver = FieldSolver::new(ds.transporter(), ds.start().entries(), k);
    let sol = solver.solve(&candidates, caps.l_cap, caps.tol)?;
    let basis: Vec<AlgebraElement> = (0..sol.coeffs.ncols())
        .map(|c| {
            let mut x = candidates[0].scale(C64::new(0.0, 0.0));
            for (j, cand) in candidates.iter().enumerate() {
                let z = sol.coeffs[(j, c)];
                if z.norm_sqr() > 0.0 {
                    x.axpy(z, cand);
                }
            }
            x
        })
        .collect();
    let irreps: Vec<Irrep> = decompose(&basis, caps.tol)?
        .into_iter()
        .enumerate()
        .map(|(vertex, IrrepColumns { d, mult, cols })| Irrep { vertex, d, mult, cols })
        .collect();
    let unitaries = assemble_unitaries(&sizes, &irreps);
    let weights = space.markov_trace(ds.system()).weights;
    Ok(Commutant { k, space, irreps, unitaries, weights, l_star: Some(sol.l_star), dims_by_l: sol.dims_by_l })
}

/// `C_0 ⊂ C_1 ⊂ …` with the Bratteli matrices between consecutive levels.
#[derive(Clone, Debug)]
pub struct TowerOfCommutants {
    pub levels: Vec<Commutant>,
    /// `bratteli[k]`: multiplicity of irreducible `i` of `C_k` in irreducible `j` of `C_{k+1}`.
    pub bratteli: Vec<Vec<Vec<usize>>>,
    /// Indices of the irreducibles of each level that are not reflections of earlier ones.
    pub new_at: Vec<Vec<usize>>,
}

impl TowerOfCommutants {
    pub fn depth_computed(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    /// First level `K ≥ 1` without new irreducibles.
    pub fn stable_level(&self) -> Option<usize> {
        (1..self.new_at.len()).find(|&k| self.new_at[k].is_empty())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Commutant::dim).collect()
    }

    pub fn sizes(&self) -> Vec<Vec<usize>> {
        self.levels.iter().map(Commutant::sizes).collect()
    }

    /// Inclusion `C_k ⊂ C_{k+1}` as a map between the abstract multi-matrix algebras.
    pub fn inclusion(&self, k: usize) -> Result<Inclusion> {
        let (small, big) = (&self.levels[k], &self.levels[k + 1]);
        Inclusion::standard(small.algebra(), big.algebra(), self.bratteli[k].clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .map(|c| {
                serde_json::json!({
                    "k": c.k,
                    "dim": c.dim(),
                    "ambient_dim": c.ambient_dim(),
                    "vertices": c.irreps.iter().map(|i| i.vertex).collect::<Vec<_>>(),
                    "sizes": c.sizes(),
                    "l_star": c.l_star,
                    "dims_by_l": c.dims_by_l,
                })
            })
            .collect();
        serde_json::json!({
            "schema": SCHEMA,
            "kind": "tower",
            "levels": levels,
            "bratteli": self.bratteli,
            "stable_level": self.stable_level(),
        })
    }

    /// Bratteli diagram in DOT.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{name}\" {{\n  rankdir=TB;\n");
        for c in &self.levels {
            s.push_str(&format!("  subgraph level{} {{ rank=same;", c.k));
            for (p, irr) in c.irreps.iter().enumerate() {
                s.push_str(&format!(" \"{}:{}\" [label=\"{}\"];", c.k, p, irr.d));
            }
            s.push_str(" }\n");
        }
        for (k, m) in self.bratteli.iter().enumerate() {
            for (i, row) in m.iter().enumerate() {
                for (j, &n) in row.iter().enumerate() {
                    for _ in 0..n {
                        s.push_str(&format!("  \"{}:{}\" -- \"{}:{}\";\n", k, i, k + 1, j));
                    }
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Computes `C_0, …, C_{k_max}`.
pub fn tower(ds: &DoubleSequence, k_max: usize, caps: &Caps) -> Result<TowerOfCommutants> {
    let mut b = TowerBuilder::new(ds, *caps);
    while b.depth() <= k_max {
        b.extend()?;
    }
    Ok(finish(b))
}

fn finish(b: TowerBuilder) -> TowerOfCommutants {
    TowerOfCommutants { levels: b.levels, bratteli: b.bratteli, new_at: b.new_at }
}

/// Extends the tower until a level without new irreducibles appears, within `caps.k_max`.
pub fn tower_to_stability(ds: &DoubleSequence, caps: &Caps) -> Result<TowerOfCommutants> {
    let mut b = TowerBuilder::new(ds, *caps);
    while b.stable_level().is_none() {
        if b.depth() > caps.k_max {
            return Err(Error::Undecided {
                depth: caps.k_max,
                reason: format!("no stable Bratteli step up to depth {}", caps.k_max),
                dims: vec![b.levels.iter().map(Commutant::dim).collect()],
            });
        }
        b.extend()?;
    }
    Ok(finish(b))
}

/// Principal graph with its index data.
#[derive(Clone, Debug, Serialize)]
pub struct PrincipalGraphResult {
    pub graph: BipartiteGraph,
    pub depth: usize,
    pub finite_depth: bool,
    pub index: f64,
    pub global_index: f64,
    /// Horizontal level used per commutant level.
    pub l_star: Vec<Option<usize>>,
}

impl PrincipalGraphResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": SCHEMA,
            "kind": "principal_graph",
            "index": self.index,
            "global_index": self.global_index,
            "depth": self.depth,
            "finite_depth": self.finite_depth,
            "graph": self.graph,
            "l_star": self.l_star,
        })
    }

    pub fn to_dot(&self, name: &str) -> String {
        self.graph.to_dot(name)
    }
}

/// Reads the principal graph off the Bratteli diagram: one vertex per irreducible that is not a
/// reflection, joined to the irreducibles of the previous level it contains.
pub fn principal_graph(t: &TowerOfCommutants) -> Result<PrincipalGraphResult> {
    let stable = t.stable_level().ok_or_else(|| Error::Undecided {
        depth: t.depth_computed(),
        reason: format!("undecided at depth {}", t.depth_computed()),
        dims: vec![t.dims()],
    })?;
    let mut even = Vec::new();
    let mut odd = Vec::new();
    // vertex id -> (parity, index within parity)
    let mut place: Vec<Vertex> = Vec::new();
    for k in 0..stable {
        for &p in &t.new_at[k] {
            let v = t.levels[k].irreps[p].vertex;
            debug_assert_eq!(v, place.len());
            let label = format!("v{v}");
            place.push(if k % 2 == 0 {
                even.push(label);
                Vertex::even(even.len() - 1)
            } else {
                odd.push(label);
                Vertex::odd(odd.len() - 1)
            });
        }
    }
    let mut edges = Vec::new();
    for k in 1..stable {
        for &p in &t.new_at[k] {
            let v = place[t.levels[k].irreps[p].vertex];
            for (q, row) in t.bratteli[k - 1].iter().enumerate() {
                let m = row[p];
                if m == 0 {
                    continue;
                }
                let w = place[t.levels[k - 1].irreps[q].vertex];
                let (e, o) = if v.parity == crate::paths::Parity::Even { (v, w) } else { (w, v) };
                edges.push((e.index, o.index, m));
            }
        }
    }
    let graph = BipartiteGraph::new(even, odd, edges, Vertex::even(0))?;
    let pf = pf_data(&graph)?;
    let global_index = pf.weights[..graph.n_even()].iter().map(|w| w * w).sum();
    Ok(PrincipalGraphResult {
        index: pf.norm * pf.norm,
        global_index,
        depth: stable - 1,
        finite_depth: true,
        graph,
        l_star: t.levels.iter().map(|c| c.l_star).collect(),
    })
}

/// Builds the tower as far as needed and returns it with its principal graph.
pub fn analyze(ds: &DoubleSequence, caps: &Caps) -> Result<(TowerOfCommutants, PrincipalGraphResult)> {
    let t = tower_to_stability(ds, caps)?;
    let pg = principal_graph(&t)?;
    Ok((t, pg))
}

/// Sum over even vertices of the squared Perron-Frobenius weights, normalised at the star.
pub fn global_index(pg: &PrincipalGraphResult) -> Result<f64> {
    if !pg.finite_depth {
        return Err(Error::Invalid("the global index of an infinite-depth subfactor is infinite".into()));
    }
    let pf = pf_data(&pg.graph)?;
    Ok(pf.weights[..pg.graph.n_even()].iter().map(|w| w * w).sum())
}

/// Index of `A_{0,∞} ⊂ A_{1,∞}` (horizontal) or of `A_{∞,0} ⊂ A_{∞,1}` (vertical).
pub fn subfactor_index(conn: &BiUnitaryConnection, dir: Direction) -> f64 {
    let b = match dir {
        Direction::Horizontal => conn.system().beta(Step::V),
        Direction::Vertical => conn.system().beta(Step::H),
    };
    b * b
}

/// An element of `A_{k,0}` outside `C_k`, with its commutation defect per horizontal level.
#[derive(Clone, Debug)]
pub struct FlatnessWitness {
    pub k: usize,
    pub element: AlgebraElement,
    pub defects: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub flat: bool,
    /// `(dim C_k, dim A_{k,0})` for every level examined.
    pub dims: Vec<(usize, usize)>,
    pub witness: Option<FlatnessWitness>,
}

impl FlatnessReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": SCHEMA,
            "kind": "flatness",
            "flat": self.flat,
            "dims": self.dims,
            "witness": self.witness.as_ref().map(|w| serde_json::json!({
                "k": w.k,
                "norm": w.element.norm(),
                "defects": w.defects,
                "blocks": w.element.blocks.iter().map(|m| {
                    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>()).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
            })),
        })
    }
}

/// Vertical counterpart of `horizontal_saturation`: from this level on `A_{k+1,0}` is generated
/// by `A_{k,0}` and `e_k`.
pub fn vertical_saturation(ds: &DoubleSequence) -> Result<usize> {
    let t = ds.connection().transposed()?;
    Ok(horizontal_saturation(t.system(), ds.start().entries()))
}

/// Flat iff `C_k = A_{k,0}` at every level up to one past the vertical saturation level.
pub fn is_flat(ds: &DoubleSequence, caps: &Caps) -> Result<FlatnessReport> {
    let last = vertical_saturation(ds)? + 1;
    let mut b = TowerBuilder::new(ds, *caps);
    let mut dims = Vec::new();
    for k in 0..=last {
        if k > caps.k_max {
            return Err(Error::Undecided {
                depth: caps.k_max,
                reason: format!("flatness needs level {last} but the cap is {}", caps.k_max),
                dims: vec![dims.iter().map(|d: &(usize, usize)| d.0).collect()],
            });
        }
        b.extend()?;
        let c = &b.levels[k];
        dims.push((c.dim(), c.ambient_dim()));
        if c.dim() != c.ambient_dim() {
            let witness = witness(ds, c, caps)?;
            return Ok(FlatnessReport { flat: false, dims, witness: Some(witness) });
        }
    }
    Ok(FlatnessReport { flat: true, dims, witness: None })
}

/// The matrix unit of `A_{k,0}` farthest from `C_k`, minus its expectation.
fn witness(ds: &DoubleSequence, c: &Commutant, caps: &Caps) -> Result<FlatnessWitness> {
    let sizes = c.space.sizes();
    let mut best: Option<AlgebraElement> = None;
    for (b, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let mut x = c.zero();
                x.blocks[b][(i, j)] = C64::new(1.0, 0.0);
                let e = c.expectation(&x);
                x.axpy(C64::new(-1.0, 0.0), &e);
                if best.as_ref().map_or(true, |y| x.norm() > y.norm() + 1e-12) {
                    best = Some(x);
                }
            }
        }
    }
    let element = best.expect("nonempty path space");
    let solver = FieldSolver::new(ds.transporter(), ds.start().entries(), c.k);
    let l = horizontal_saturation(ds.system(), ds.start().entries()) + 1;
    let defects = solver.defects(&element, l.min(caps.l_cap))?;
    Ok(FlatnessWitness { k: c.k, element, defects })
}

#[cfg(test)]
mod tests;
