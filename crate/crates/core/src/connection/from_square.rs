use std::collections::HashMap;

use crate::algebra::Inclusion;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::paths::{BipartiteGraph, FourGraphSystem, Vertex, BOTTOM, LEFT, RIGHT, TOP};
use crate::square::{is_symmetric, CommutingSquare};

use super::{verify_biunitarity, BiUnitaryConnection, ConnectionCell};

fn inclusion_graph(inc: &Inclusion) -> Result<BipartiteGraph> {
    let mut edges = Vec::new();
    for (i, row) in inc.bratteli.iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            if m > 0 {
                edges.push((i, j, m));
            }
        }
    }
    BipartiteGraph::new(inc.small.labels().to_vec(), inc.big.labels().to_vec(), edges, Vertex::even(0))
}

/// The four Bratteli diagrams of a square as a four-graph system.
pub fn square_to_system(sq: &CommutingSquare) -> Result<FourGraphSystem> {
    FourGraphSystem::new(
        inclusion_graph(&sq.i00_01)?,
        inclusion_graph(&sq.i10_11)?,
        inclusion_graph(&sq.i00_10)?,
        inclusion_graph(&sq.i01_11)?,
    )
}

/// `(small, big, copy) → local edge id`.
fn edge_ids(g: &BipartiteGraph) -> HashMap<(usize, usize, usize), usize> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out = HashMap::new();
    for (id, (e, o)) in g.edge_list().into_iter().enumerate() {
        let m = count.entry((e, o)).or_default();
        out.insert((e, o, *m), id);
        *m += 1;
    }
    out
}

/// Column `col` of the big-block unitary (identity when absent).
fn unitary_column(inc: &Inclusion, block: usize, col: usize) -> Vec<C64> {
    let n = inc.big.sizes()[block];
    match &inc.unitaries[block] {
        Some(u) => u.column(col).iter().copied().collect(),
        None => (0..n).map(|i| if i == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect(),
    }
}

/// For each big block of `outer`, the vectors of the two-step paths `a → mid → big` through
/// `inner ⊂ outer`, taking the first basis vector of the starting summand.
fn path_vectors(inner: &Inclusion, outer: &Inclusion) -> Vec<Vec<((usize, usize, usize), (usize, usize, usize), Vec<C64>)>> {
    let mut out = Vec::new();
    for d in 0..outer.big.n_summands() {
        let n = outer.big.sizes()[d];
        let ud: CMat = outer.unitaries[d].clone().unwrap_or_else(|| CMat::identity(n, n));
        let mut vecs = Vec::new();
        for s2 in outer.slots(d) {
            let mid = s2.small;
            for s1 in inner.slots(mid) {
                let inner_col = unitary_column(inner, mid, s1.offset);
                let mut padded = nalgebra::DVector::<C64>::zeros(n);
                for (i, z) in inner_col.into_iter().enumerate() {
                    padded[s2.offset + i] = z;
                }
                let v = &ud * padded;
                vecs.push(((s1.small, mid, s1.copy), (mid, d, s2.copy), v.iter().copied().collect()));
            }
        }
        out.push(vecs);
    }
    out
}

/// Connection of a symmetric commuting square: the overlaps between the two path bases of
/// `B11` over `B00` (through `B01` and through `B10`).
pub fn from_square(sq: &CommutingSquare) -> Result<BiUnitaryConnection> {
    if !is_symmetric(sq) {
        return Err(Error::NotSymmetric);
    }
    let sys = square_to_system(sq)?;
    let ids: Vec<_> = [TOP, BOTTOM, LEFT, RIGHT].iter().map(|&g| edge_ids(sys.graph(g))).collect();
    let h = path_vectors(&sq.i00_01, &sq.i01_11);
    let v = path_vectors(&sq.i00_10, &sq.i10_11);
    let mut cells = Vec::new();
    for d in 0..sq.b11.n_summands() {
        for (top, right, x) in &h[d] {
            for (left, bottom, y) in &v[d] {
                if top.0 != left.0 {
                    continue;
                }
                let w: C64 = x.iter().zip(y).map(|(p, q)| p.conj() * q).sum();
                let cell = ConnectionCell {
                    top: sys.global_edge(TOP, ids[TOP][top]),
                    right: sys.global_edge(RIGHT, ids[RIGHT][right]),
                    left: sys.global_edge(LEFT, ids[LEFT][left]),
                    bottom: sys.global_edge(BOTTOM, ids[BOTTOM][bottom]),
                };
                cells.push((cell, w));
            }
        }
    }
    let conn = BiUnitaryConnection::from_cells(sys, &cells)?;
    let report = verify_biunitarity(&conn);
    if !report.passes(1e-9) {
        return Err(Error::Verification(format!(
            "extracted cells are not bi-unitary (unitarity {:.2e}, renormalization {:.2e}); is the trace Markov?",
            report.unitarity_residual, report.renormalization_residual
        )));
    }
    Ok(conn)
}
