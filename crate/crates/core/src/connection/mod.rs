//! Bi-unitary connections on four-graph systems.
//!
//! # Cell convention
//!
//! A cell is a quadrilateral with corners `a` (top-left), `b` (top-right), `c` (bottom-left),
//! `d` (bottom-right) and edges `α = a–b` (top), `β = b–d` (right), `γ = a–c` (left),
//! `δ = c–d` (bottom). Its value `W(α,β,γ,δ)` is the overlap `⟨αβ | γδ⟩` between the
//! horizontal-first path `a→b→d` and the vertical-first path `a→c→d`.
//!
//! * unitarity: for fixed `(a,d)`, the matrix with rows `(α,β)` and columns `(γ,δ)` is unitary;
//! * renormalization: for fixed `(b,c)`, the matrix with rows `(α,γ)`, columns `(β,δ)` and
//!   entries `√(μ(a)μ(d)/(μ(b)μ(c))) · conj W(α,β,γ,δ)` is unitary.
//!
//! Reordering a horizontal step followed by a vertical step starting at a corner `x` uses the
//! overlap `S_x(h-first | v-first)`:
//!
//! | start | h-first | v-first | `S_x` |
//! |-------|---------|---------|-------|
//! | `a` | `α β` | `γ δ` | `W` |
//! | `b` | `α γ` | `β δ` | `√(μ_a μ_d/μ_b μ_c) · conj W` |
//! | `c` | `δ β` | `γ α` | `√(μ_a μ_d/μ_b μ_c) · conj W` |
//! | `d` | `δ γ` | `β α` | `W` |
//!
//! These are exactly the choices under which Jones projections built from the string formula
//! are carried to Jones projections by the reordering.

mod from_square;
mod solve;
mod transport;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};
use crate::paths::{FourGraphSystem, Step, BOTTOM, LEFT, RIGHT, TOP};

pub use from_square::{from_square, square_to_system};
pub use solve::{solve_connection, temperley_lieb_connection, SolverOptions};
pub use transport::{LocalSwap, SpaceCache, Transporter};

/// Global edge ids of the four sides of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConnectionCell {
    pub top: u32,
    pub left: u32,
    pub right: u32,
    pub bottom: u32,
}

/// All cells sharing the corners `(a, d)`; rows are `(top, right)`, columns `(left, bottom)`.
#[derive(Clone, Debug)]
pub struct CellBlock {
    pub a: u32,
    pub d: u32,
    pub h: Vec<(u32, u32)>,
    pub v: Vec<(u32, u32)>,
    pub w: CMat,
}

/// Cells of a four-graph system grouped into `(a, d)` blocks, empty values.
fn cell_layout(sys: &FourGraphSystem) -> Result<Vec<CellBlock>> {
    let mut blocks = Vec::new();
    for ia in 0..sys.corner_size(0) {
        let a = sys.node(0, ia);
        let mut h: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
        for &(alpha, b) in sys.out(a, Step::H) {
            for &(beta, d) in sys.out(b, Step::V) {
                h.entry(d).or_default().push((alpha, beta));
            }
        }
        let mut v: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
        for &(gamma, cn) in sys.out(a, Step::V) {
            for &(delta, d) in sys.out(cn, Step::H) {
                v.entry(d).or_default().push((gamma, delta));
            }
        }
        let mut ds: Vec<u32> = h.keys().chain(v.keys()).copied().collect();
        ds.sort();
        ds.dedup();
        for d in ds {
            let hp = h.remove(&d).unwrap_or_default();
            let vp = v.remove(&d).unwrap_or_default();
            if hp.len() != vp.len() {
                return Err(Error::Invalid(format!(
                    "corners ({}, {}) have {} horizontal-first but {} vertical-first paths",
                    sys.node_label(a),
                    sys.node_label(d),
                    hp.len(),
                    vp.len()
                )));
            }
            let n = hp.len();
            blocks.push(CellBlock { a, d, h: hp, v: vp, w: CMat::zeros(n, n) });
        }
    }
    // the (b, c) counts must match as well, otherwise renormalization cannot hold
    for ib in 0..sys.corner_size(1) {
        let b = sys.node(1, ib);
        for ic in 0..sys.corner_size(2) {
            let cn = sys.node(2, ic);
            let count = |first: Step, second: Step| -> usize {
                sys.out(b, first).iter().map(|&(_, x)| sys.out(x, second).iter().filter(|y| y.1 == cn).count()).sum()
            };
            let (via_a, via_d) = (count(Step::H, Step::V), count(Step::V, Step::H));
            if via_a != via_d {
                return Err(Error::Invalid(format!(
                    "corners ({}, {}) admit no renormalized unitary: {via_a} vs {via_d} paths",
                    sys.node_label(b),
                    sys.node_label(cn)
                )));
            }
        }
    }
    Ok(blocks)
}

#[derive(Clone, Debug)]
pub struct BiUnitaryConnection {
    sys: Arc<FourGraphSystem>,
    blocks: Vec<CellBlock>,
    block_of: HashMap<(u32, u32), usize>,
    cell_pos: HashMap<ConnectionCell, (usize, usize, usize)>,
}

/// Residuals reported by [`verify_biunitarity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiUnitarityReport {
    pub unitarity_residual: f64,
    pub renormalization_residual: f64,
}

impl BiUnitarityReport {
    pub fn max(&self) -> f64 {
        self.unitarity_residual.max(self.renormalization_residual)
    }
    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

impl BiUnitaryConnection {
    /// Every cell evaluated by `f`.
    pub fn from_fn(sys: FourGraphSystem, mut f: impl FnMut(&FourGraphSystem, ConnectionCell) -> C64) -> Result<Self> {
        let mut blocks = cell_layout(&sys)?;
        for blk in blocks.iter_mut() {
            for (i, &(top, right)) in blk.h.iter().enumerate() {
                for (j, &(left, bottom)) in blk.v.iter().enumerate() {
                    blk.w[(i, j)] = f(&sys, ConnectionCell { top, left, right, bottom });
                }
            }
        }
        Ok(Self::assemble(Arc::new(sys), blocks))
    }

    /// From an explicit list of cells; every quadrilateral must be present exactly once.
    pub fn from_cells(sys: FourGraphSystem, cells: &[(ConnectionCell, C64)]) -> Result<Self> {
        let given: HashMap<ConnectionCell, C64> = cells.iter().copied().collect();
        let mut missing = Vec::new();
        let mut used = 0;
        let conn = Self::from_fn(sys, |s, cell| match given.get(&cell) {
            Some(&z) => {
                used += 1;
                z
            }
            None => {
                missing.push(local_ids(s, cell));
                ZERO
            }
        })?;
        if !missing.is_empty() {
            return Err(Error::MissingCells(missing));
        }
        if used != given.len() {
            return Err(Error::Invalid("connection lists cells that are not quadrilaterals of the system".into()));
        }
        Ok(conn)
    }

    fn assemble(sys: Arc<FourGraphSystem>, blocks: Vec<CellBlock>) -> Self {
        let mut block_of = HashMap::new();
        let mut cell_pos = HashMap::new();
        for (k, blk) in blocks.iter().enumerate() {
            block_of.insert((blk.a, blk.d), k);
            for (i, &(top, right)) in blk.h.iter().enumerate() {
                for (j, &(left, bottom)) in blk.v.iter().enumerate() {
                    cell_pos.insert(ConnectionCell { top, left, right, bottom }, (k, i, j));
                }
            }
        }
        Self { sys, blocks, block_of, cell_pos }
    }

    pub fn system(&self) -> &FourGraphSystem {
        &self.sys
    }

    pub fn system_arc(&self) -> Arc<FourGraphSystem> {
        self.sys.clone()
    }

    pub fn blocks(&self) -> &[CellBlock] {
        &self.blocks
    }

    pub fn n_cells(&self) -> usize {
        self.cell_pos.len()
    }

    pub fn cells(&self) -> Vec<(ConnectionCell, C64)> {
        let mut out = Vec::with_capacity(self.n_cells());
        for blk in &self.blocks {
            for (i, &(top, right)) in blk.h.iter().enumerate() {
                for (j, &(left, bottom)) in blk.v.iter().enumerate() {
                    out.push((ConnectionCell { top, left, right, bottom }, blk.w[(i, j)]));
                }
            }
        }
        out
    }

    pub fn value(&self, cell: ConnectionCell) -> Option<C64> {
        self.cell_pos.get(&cell).map(|&(k, i, j)| self.blocks[k].w[(i, j)])
    }

    pub fn block(&self, a: u32, d: u32) -> Option<&CellBlock> {
        self.block_of.get(&(a, d)).map(|&k| &self.blocks[k])
    }

    /// Same cell layout with new values.
    pub(crate) fn with_values(&self, values: Vec<CMat>) -> Self {
        let mut out = self.clone();
        for (blk, w) in out.blocks.iter_mut().zip(values) {
            blk.w = w;
        }
        out
    }

    /// The renormalized `(b, c)` matrices: rows `(top, left)`, columns `(right, bottom)`.
    pub fn reflected_blocks(&self) -> Vec<(u32, u32, CMat)> {
        let sys = &*self.sys;
        let mut rows: HashMap<(u32, u32), Vec<(u32, u32)>> = HashMap::new();
        let mut cols: HashMap<(u32, u32), Vec<(u32, u32)>> = HashMap::new();
        let mut entries: HashMap<(u32, u32), Vec<((u32, u32), (u32, u32), C64)>> = HashMap::new();
        for blk in &self.blocks {
            let (ma, md) = (sys.mu(blk.a), sys.mu(blk.d));
            for (i, &(top, right)) in blk.h.iter().enumerate() {
                let b = sys.other_end(top, blk.a);
                for (j, &(left, bottom)) in blk.v.iter().enumerate() {
                    let cn = sys.other_end(left, blk.a);
                    let f = (ma * md / (sys.mu(b) * sys.mu(cn))).sqrt();
                    entries.entry((b, cn)).or_default().push(((top, left), (right, bottom), blk.w[(i, j)].conj() * f));
                    rows.entry((b, cn)).or_default().push((top, left));
                    cols.entry((b, cn)).or_default().push((right, bottom));
                }
            }
        }
        let mut keys: Vec<_> = entries.keys().copied().collect();
        keys.sort();
        keys.into_iter()
            .map(|key| {
                let mut r = rows.remove(&key).unwrap();
                let mut cl = cols.remove(&key).unwrap();
                r.sort();
                r.dedup();
                cl.sort();
                cl.dedup();
                let ri: HashMap<_, _> = r.iter().enumerate().map(|(i, x)| (*x, i)).collect();
                let ci: HashMap<_, _> = cl.iter().enumerate().map(|(i, x)| (*x, i)).collect();
                let mut m = CMat::zeros(r.len(), cl.len());
                for (row, col, z) in &entries[&key] {
                    m[(ri[row], ci[col])] = *z;
                }
                (key.0, key.1, m)
            })
            .collect()
    }

    /// Multiply cells by edge phases: `W ↦ conj(u_top u_right) u_left u_bottom W`.
    pub fn gauge_transform(&self, phases: &[C64]) -> Result<Self> {
        if phases.len() != self.sys.n_edges() {
            return Err(Error::Shape("one phase per edge required".into()));
        }
        let mut out = self.clone();
        for blk in out.blocks.iter_mut() {
            for (i, &(top, right)) in blk.h.iter().enumerate() {
                for (j, &(left, bottom)) in blk.v.iter().enumerate() {
                    let g = (phases[top as usize] * phases[right as usize]).conj()
                        * phases[left as usize]
                        * phases[bottom as usize];
                    blk.w[(i, j)] *= g;
                }
            }
        }
        Ok(out)
    }

    /// Gauge in which a maximal gauge-independent set of nonzero cells is real positive.
    ///
    /// Cells are visited in layout order; a cell joins the fixed set when its edge-incidence
    /// vector is independent of those already chosen.
    pub fn canonical_gauge(&self) -> Self {
        let ne = self.sys.n_edges();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut phases: Vec<f64> = Vec::new();
        for (cell, z) in self.cells() {
            if z.norm() < 1e-9 {
                continue;
            }
            let mut r = vec![0.0; ne];
            r[cell.top as usize] -= 1.0;
            r[cell.right as usize] -= 1.0;
            r[cell.left as usize] += 1.0;
            r[cell.bottom as usize] += 1.0;
            let mut q = r.clone();
            for b in &basis {
                let p: f64 = q.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in q.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
            let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-8 {
                basis.push(q.iter().map(|x| x / n).collect());
                rows.push(r);
                phases.push(z.arg());
            }
        }
        if rows.is_empty() {
            return self.clone();
        }
        let m = rows.len();
        let r = nalgebra::DMatrix::from_fn(m, ne, |i, j| rows[i][j]);
        let rhs = nalgebra::DVector::from_iterator(m, phases.iter().map(|p| -p));
        // least-norm solution of R θ = -φ
        let rrt = &r * r.transpose();
        let y = rrt.lu().solve(&rhs).expect("independent rows give an invertible Gram matrix");
        let theta = r.transpose() * y;
        let u: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        let mut out = self.gauge_transform(&u).expect("phase count matches");
        for blk in out.blocks.iter_mut() {
            for z in blk.w.iter_mut() {
                if z.im.abs() < 1e-13 * z.norm().max(1.0) {
                    z.im = 0.0;
                }
            }
        }
        out
    }

    /// Connection on the transposed system (horizontal and vertical exchanged): `W' = conj W`.
    pub fn transposed(&self) -> Result<Self> {
        let old = &*self.sys;
        let sys = old.transposed()?;
        let to_old = |s: &FourGraphSystem, e: u32| {
            let (g, local) = s.edge_location(e);
            let og = match g {
                TOP => LEFT,
                BOTTOM => RIGHT,
                LEFT => TOP,
                _ => BOTTOM,
            };
            old.global_edge(og, local)
        };
        Self::from_fn(sys, |s, cell| {
            let oc = ConnectionCell {
                top: to_old(s, cell.left),
                left: to_old(s, cell.top),
                right: to_old(s, cell.bottom),
                bottom: to_old(s, cell.right),
            };
            self.value(oc).map(|z| z.conj()).unwrap_or(ZERO)
        })
    }

    /// Same cells with every value conjugated (the mirror-image connection).
    pub fn conjugate(&self) -> Self {
        let vals = self.blocks.iter().map(|b| b.w.map(|z| z.conj())).collect();
        self.with_values(vals)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ConnectionDto::from(self)).expect("connection serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: ConnectionDto = serde_json::from_value(v.clone())?;
        dto.try_into()
    }
}

fn local_ids(sys: &FourGraphSystem, cell: ConnectionCell) -> [usize; 4] {
    [
        sys.edge_location(cell.top).1,
        sys.edge_location(cell.left).1,
        sys.edge_location(cell.right).1,
        sys.edge_location(cell.bottom).1,
    ]
}

pub fn verify_biunitarity(conn: &BiUnitaryConnection) -> BiUnitarityReport {
    let unitarity_residual = conn.blocks.iter().map(|b| linalg::unitarity_defect(&b.w)).fold(0.0, f64::max);
    let renormalization_residual =
        conn.reflected_blocks().iter().map(|(_, _, m)| linalg::unitarity_defect(m)).fold(0.0, f64::max);
    BiUnitarityReport { unitarity_residual, renormalization_residual }
}

pub const CONNECTION_SCHEMA: &str = "commsq/connection/v1";

#[derive(Serialize, Deserialize)]
struct CellDto {
    /// Local edge ids: top, left, right, bottom.
    cell: [usize; 4],
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ConnectionDto {
    schema: String,
    system: FourGraphSystem,
    cells: Vec<CellDto>,
}

impl From<&BiUnitaryConnection> for ConnectionDto {
    fn from(c: &BiUnitaryConnection) -> Self {
        let sys = c.system();
        ConnectionDto {
            schema: CONNECTION_SCHEMA.into(),
            system: sys.clone(),
            cells: c
                .cells()
                .into_iter()
                .map(|(cell, z)| CellDto { cell: local_ids(sys, cell), re: z.re, im: z.im })
                .collect(),
        }
    }
}

impl TryFrom<ConnectionDto> for BiUnitaryConnection {
    type Error = Error;
    fn try_from(d: ConnectionDto) -> Result<Self> {
        if d.schema != CONNECTION_SCHEMA {
            return Err(Error::Invalid(format!("unsupported schema {}", d.schema)));
        }
        let sys = d.system;
        let mut cells = Vec::with_capacity(d.cells.len());
        for cd in &d.cells {
            let [t, l, r, b] = cd.cell;
            let check = |g: usize, e: usize| {
                if e < sys.graph(g).n_edges() {
                    Ok(sys.global_edge(g, e))
                } else {
                    Err(Error::Invalid(format!("edge id {e} out of range")))
                }
            };
            let cell = ConnectionCell { top: check(TOP, t)?, left: check(LEFT, l)?, right: check(RIGHT, r)?, bottom: check(BOTTOM, b)? };
            cells.push((cell, C64::new(cd.re, cd.im)));
        }
        BiUnitaryConnection::from_cells(sys, &cells)
    }
}

/// Random edge phases, one per edge of the system.
pub fn random_gauge<R: rand::Rng + ?Sized>(sys: &FourGraphSystem, rng: &mut R) -> Vec<C64> {
    (0..sys.n_edges()).map(|_| linalg::random_phase(rng)).collect()
}
