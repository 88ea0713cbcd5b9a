//! Level-by-level construction of the relative commutants `C_k ⊂ A_{k,0}`.
//!
//! `C_k` splits as the ideal generated by `e_{k-1}`, a copy of the basic construction for
//! `C_{k-2} ⊂ C_{k-1}` assembled directly from the previous two levels, and a new corner that is
//! solved for with the field solver.

use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{null_space, C64, CMat};
use crate::paths::{Path, PathSpace, Step};
use crate::square::DoubleSequence;

use super::decompose::{decompose, IrrepColumns};
use super::fields::FieldSolver;
use super::{assemble_unitaries, Caps, Commutant, Irrep};

/// Position of each path of `A_{k,0}` relative to its prefix in `A_{k-1,0}`.
struct Segments {
    /// Per block of the longer space: `(prefix block, positions indexed by prefix index)`.
    per_block: Vec<Vec<(usize, Vec<usize>)>>,
}

impl Segments {
    fn new(short: &PathSpace, long: &PathSpace) -> Self {
        let per_block = long
            .blocks
            .iter()
            .map(|blk| {
                let mut segs: Vec<(usize, u32, Vec<usize>)> = Vec::new();
                let mut index: HashMap<(usize, u32), usize> = HashMap::new();
                for (i, p) in blk.paths.iter().enumerate() {
                    let n = p.edges.len() - 1;
                    let prefix = Path { entry: p.entry, edges: p.edges[..n].to_vec() };
                    let (b1, i1) = short.locate(&prefix).expect("prefix exists");
                    let key = (b1, p.edges[n]);
                    let s = *index.entry(key).or_insert_with(|| {
                        segs.push((b1, p.edges[n], vec![usize::MAX; short.blocks[b1].paths.len()]));
                        segs.len() - 1
                    });
                    segs[s].2[i1] = i;
                }
                segs.into_iter().map(|(b1, _, pos)| (b1, pos)).collect()
            })
            .collect();
        Self { per_block }
    }
}

/// Coordinates of vectors of `A_{k,0}`'s path space relative to the isotypic basis of `C_{k-1}`.
struct Coords<'a> {
    prev: &'a Commutant,
    segs: Segments,
    /// Offsets of each irrep's columns inside the prefix block unitaries.
    offsets: Vec<Vec<usize>>,
}

impl<'a> Coords<'a> {
    fn new(prev: &'a Commutant, long: &PathSpace) -> Self {
        let segs = Segments::new(&prev.space, long);
        let offsets = (0..prev.space.blocks.len())
            .map(|u| {
                let mut off = 0;
                prev.irreps
                    .iter()
                    .map(|irr| {
                        let o = off;
                        off += irr.d * irr.mult[u];
                        o
                    })
                    .collect()
            })
            .collect();
        Self { prev, segs, offsets }
    }

    /// Per irrep `Q` of `C_{k-1}`, the `d_Q × N_Q` matrix of a vector of block `b`.
    fn of(&self, b: usize, v: &[C64]) -> Vec<CMat> {
        let irreps = &self.prev.irreps;
        let widths: Vec<usize> = irreps
            .iter()
            .map(|irr| self.segs.per_block[b].iter().map(|(b1, _)| irr.mult[*b1]).sum())
            .collect();
        let mut out: Vec<CMat> = irreps.iter().zip(&widths).map(|(irr, &w)| CMat::zeros(irr.d, w)).collect();
        let mut col0 = vec![0usize; irreps.len()];
        for (b1, pos) in &self.segs.per_block[b] {
            let u = &self.prev.unitaries[*b1];
            let seg = CMat::from_fn(pos.len(), 1, |i, _| v[pos[i]]);
            let c = u.adjoint() * seg;
            for (q, irr) in irreps.iter().enumerate() {
                let m = irr.mult[*b1];
                let off = self.offsets[*b1][q];
                for t in 0..irr.d {
                    for s in 0..m {
                        out[q][(t, col0[q] + s)] = c[(off + t * m + s, 0)];
                    }
                }
                col0[q] += m;
            }
        }
        out
    }

    /// Vector of block `b` whose only nonzero coordinates are row `t` of irrep `q`, equal to `row`.
    fn vector(&self, b: usize, n: usize, q: usize, t: usize, row: &[C64]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        let irr = &self.prev.irreps[q];
        let mut col0 = 0;
        for (b1, pos) in &self.segs.per_block[b] {
            let m = irr.mult[*b1];
            if m > 0 {
                let off = self.offsets[*b1][q] + t * m;
                let u = &self.prev.unitaries[*b1];
                for s in 0..m {
                    let z = row[col0 + s];
                    if z.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (i, &p) in pos.iter().enumerate() {
                        v[p] += u[(i, off + s)] * z;
                    }
                }
            }
            col0 += m;
        }
        v
    }
}

/// Incremental tower builder over a double sequence.
pub struct TowerBuilder<'a> {
    ds: &'a DoubleSequence,
    caps: Caps,
    pub(crate) levels: Vec<Commutant>,
    /// `bratteli[k - 1]`: multiplicities of `C_{k-1}` irreps (rows) in `C_k` irreps (columns).
    pub(crate) bratteli: Vec<Vec<Vec<usize>>>,
    pub(crate) new_at: Vec<Vec<usize>>,
    next_vertex: usize,
}

impl<'a> TowerBuilder<'a> {
    pub fn new(ds: &'a DoubleSequence, caps: Caps) -> Self {
        Self { ds, caps, levels: Vec::new(), bratteli: Vec::new(), new_at: Vec::new(), next_vertex: 0 }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level at which no new irreducible appeared, if any.
    pub fn stable_level(&self) -> Option<usize> {
        (1..self.new_at.len()).find(|&k| self.new_at[k].is_empty())
    }

    fn space(&self, k: usize) -> Result<Arc<PathSpace>> {
        self.ds.space(k, 0)
    }

    /// Computes the next level.
    pub fn extend(&mut self) -> Result<()> {
        let k = self.levels.len();
        let space = self.space(k)?;
        let nb = space.blocks.len();
        let sizes: Vec<usize> = space.blocks.iter().map(|b| b.paths.len()).collect();
        let mut irreps: Vec<Irrep> = Vec::new();
        let mut bratteli_old: Vec<Vec<usize>> = Vec::new();
        let coords = if k >= 1 { Some(Coords::new(&self.levels[k - 1], &space)) } else { None };
        if k >= 2 {
            let c = coords.as_ref().unwrap();
            for (irr, lam) in self.old_part(k, &space, c)? {
                irreps.push(irr);
                bratteli_old.push(lam);
            }
        }
        // complement of the old part
        let mut comp: Vec<CMat> = Vec::with_capacity(nb);
        for b in 0..nb {
            let used: usize = irreps.iter().map(|i| i.d * i.mult[b]).sum();
            if used == 0 {
                comp.push(CMat::identity(sizes[b], sizes[b]));
                continue;
            }
            let mut o = CMat::zeros(sizes[b], used);
            let mut off = 0;
            for irr in &irreps {
                let w = irr.d * irr.mult[b];
                o.columns_mut(off, w).copy_from(&irr.cols[b]);
                off += w;
            }
            let gram = o.adjoint() * &o - CMat::identity(used, used);
            if gram.iter().any(|z| z.norm() > 1e-7) {
                return Err(Error::Numerical(format!("old part of level {k} is not orthonormal")));
            }
            let r = if used == sizes[b] { CMat::zeros(sizes[b], 0) } else { null_space(&o.adjoint(), 1e-8) };
            if r.ncols() + used != sizes[b] {
                return Err(Error::Numerical(format!("complement of the old part at level {k} has wrong rank")));
            }
            comp.push(r);
        }
        let mut l_star = None;
        let mut dims_by_l = Vec::new();
        let mut new_irreps: Vec<(Irrep, Vec<usize>)> = Vec::new();
        if comp.iter().any(|r| r.ncols() > 0) {
            let (solve_dims, ls, found) = self.new_part(k, &space, &comp)?;
            dims_by_l = solve_dims;
            l_star = Some(ls);
            for irr in found {
                let lam = match &coords {
                    Some(c) => self.attachments(c, &irr)?,
                    None => Vec::new(),
                };
                new_irreps.push((irr, lam));
            }
            new_irreps.sort_by(|a, b| (&a.1, a.0.d, &a.0.mult).cmp(&(&b.1, b.0.d, &b.0.mult)));
        }
        let mut new_idx = Vec::new();
        let mut columns: Vec<Vec<usize>> = bratteli_old;
        for (mut irr, lam) in new_irreps {
            irr.vertex = self.next_vertex;
            self.next_vertex += 1;
            new_idx.push(irreps.len());
            irreps.push(irr);
            columns.push(lam);
        }
        if k >= 1 {
            let n_prev = self.levels[k - 1].irreps.len();
            let mat = (0..n_prev).map(|q| columns.iter().map(|c| c[q]).collect()).collect();
            self.bratteli.push(mat);
        }
        let unitaries = assemble_unitaries(&sizes, &irreps);
        log::info!(
            "level {k}: {} irreducibles ({} new), sizes {:?}",
            irreps.len(),
            new_idx.len(),
            irreps.iter().map(|i| i.d).collect::<Vec<_>>()
        );
        let weights = space.markov_trace(self.ds.system()).weights;
        self.levels.push(Commutant { k, space, irreps, unitaries, weights, l_star, dims_by_l });
        self.new_at.push(new_idx);
        Ok(())
    }

    /// Irreducibles of the ideal generated by `e_{k-1}`, with their multiplicities over `C_{k-1}`.
    fn old_part(&self, k: usize, space: &PathSpace, coords: &Coords) -> Result<Vec<(Irrep, Vec<usize>)>> {
        let sys = self.ds.system();
        let lev2 = &self.levels[k - 2];
        let n_prev = self.levels[k - 1].irreps.len();
        let beta = sys.beta(Step::V);
        let mut out = Vec::new();
        for irr2 in &lev2.irreps {
            // range of r e_{k-1}: first copies of the irrep, followed by a cup
            let mut vecs: Vec<(usize, Vec<C64>)> = Vec::new();
            for (b2, blk2) in lev2.space.blocks.iter().enumerate() {
                let m = irr2.mult[b2];
                if m == 0 {
                    continue;
                }
                let x = blk2.node;
                let b = space.block_of(x).ok_or_else(|| Error::Numerical("cup leaves the level".into()))?;
                let n = space.blocks[b].paths.len();
                for s in 0..m {
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    for (i2, p) in blk2.paths.iter().enumerate() {
                        let z = irr2.cols[b2][(i2, s)];
                        if z.norm_sqr() == 0.0 {
                            continue;
                        }
                        for &(e, y) in sys.out(x, Step::V) {
                            let mut edges = p.edges.clone();
                            edges.push(e);
                            edges.push(e);
                            let (bb, i) = space.locate(&Path { entry: p.entry, edges }).expect("cup path exists");
                            debug_assert_eq!(bb, b);
                            v[i] += z * (sys.mu(y) / (beta * sys.mu(x))).sqrt();
                        }
                    }
                    vecs.push((b, v));
                }
            }
            let (bref, vref) = &vecs[0];
            let aref = coords.of(*bref, vref);
            // singular vectors of the reference fix the copies for every vector of the range
            let mut gs: Vec<(usize, nalgebra::DVector<C64>, f64)> = Vec::new();
            let mut lam = vec![0usize; n_prev];
            for (q, a) in aref.iter().enumerate() {
                if a.ncols() == 0 || a.nrows() == 0 {
                    continue;
                }
                let svd = a.clone().svd(true, false);
                let u = svd.u.unwrap();
                for (c, &sv) in svd.singular_values.iter().enumerate() {
                    if sv > 1e-7 {
                        gs.push((q, u.column(c).into_owned(), sv));
                        lam[q] += 1;
                    }
                }
            }
            let d: usize = gs.iter().map(|(q, _, _)| self.levels[k - 1].irreps[*q].d).sum();
            let mut mult = vec![0usize; space.blocks.len()];
            for (b, _) in &vecs {
                mult[*b] += 1;
            }
            let mut cols: Vec<CMat> =
                space.blocks.iter().zip(&mult).map(|(blk, &m)| CMat::zeros(blk.paths.len(), d * m)).collect();
            let mut seen = vec![0usize; space.blocks.len()];
            for (b, v) in &vecs {
                let s = seen[*b];
                seen[*b] += 1;
                let a = coords.of(*b, v);
                let mut t = 0;
                for (q, g, sv) in &gs {
                    let row: Vec<C64> = (0..a[*q].ncols())
                        .map(|j| (0..a[*q].nrows()).map(|i| g[i].conj() * a[*q][(i, j)]).sum::<C64>() / *sv)
                        .collect();
                    for i in 0..self.levels[k - 1].irreps[*q].d {
                        let col = coords.vector(*b, space.blocks[*b].paths.len(), *q, i, &row);
                        let m = mult[*b];
                        for (r, z) in col.into_iter().enumerate() {
                            cols[*b][(r, t * m + s)] = z;
                        }
                        t += 1;
                    }
                }
            }
            out.push((Irrep { vertex: irr2.vertex, d, mult, cols }, lam));
        }
        Ok(out)
    }

    /// Solves for `C_k` on the complement of the old part.
    fn new_part(&self, k: usize, space: &PathSpace, comp: &[CMat]) -> Result<(Vec<usize>, usize, Vec<Irrep>)> {
        let nb = space.blocks.len();
        let mut candidates = Vec::new();
        let mut labels = Vec::new();
        for b in 0..nb {
            let r = &comp[b];
            for i in 0..r.ncols() {
                for j in 0..r.ncols() {
                    let mut blocks: Vec<CMat> =
                        space.blocks.iter().map(|blk| CMat::zeros(blk.paths.len(), blk.paths.len())).collect();
                    blocks[b] = r.column(i) * r.column(j).adjoint();
                    candidates.push(AlgebraElement { blocks });
                    labels.push((b, i, j));
                }
            }
        }
        log::info!("level {k}: solving on a corner with {} candidates", candidates.len());
        let solver = FieldSolver::new(self.ds.transporter(), self.ds.start().entries(), k);
        let sol = solver.solve(&candidates, self.caps.l_cap, self.caps.tol)?;
        if sol.coeffs.ncols() == 0 {
            return Err(Error::Numerical(format!("level {k}: the complement of the old part carries no commutant")));
        }
        let basis: Vec<AlgebraElement> = (0..sol.coeffs.ncols())
            .map(|c| {
                let mut blocks: Vec<CMat> = comp.iter().map(|r| CMat::zeros(r.ncols(), r.ncols())).collect();
                for (idx, &(b, i, j)) in labels.iter().enumerate() {
                    blocks[b][(i, j)] += sol.coeffs[(idx, c)];
                }
                AlgebraElement { blocks }
            })
            .collect();
        let found = decompose(&basis, self.caps.tol)?;
        let irreps = found
            .into_iter()
            .map(|IrrepColumns { d, mult, cols }| Irrep {
                vertex: usize::MAX,
                d,
                mult,
                cols: cols.iter().zip(comp).map(|(c, r)| r * c).collect(),
            })
            .collect();
        Ok((sol.dims_by_l, sol.l_star, irreps))
    }

    /// Multiplicity of each `C_{k-1}` irrep inside a new irrep of `C_k`.
    fn attachments(&self, coords: &Coords, irr: &Irrep) -> Result<Vec<usize>> {
        let prev = coords.prev;
        let mut acc = vec![0.0; prev.irreps.len()];
        for (b, m) in irr.cols.iter().enumerate() {
            for c in 0..m.ncols() {
                let v: Vec<C64> = m.column(c).iter().copied().collect();
                for (q, a) in coords.of(b, &v).iter().enumerate() {
                    acc[q] += a.iter().map(|z| z.norm_sqr()).sum::<f64>();
                }
            }
        }
        let m_tot: usize = irr.mult.iter().sum();
        let mut lam = Vec::with_capacity(acc.len());
        for (q, a) in acc.iter().enumerate() {
            let x = a / (prev.irreps[q].d * m_tot) as f64;
            if (x - x.round()).abs() > 1e-6 {
                return Err(Error::Numerical(format!("non-integral inclusion multiplicity {x}")));
            }
            lam.push(x.round() as usize);
        }
        let d: usize = lam.iter().zip(&prev.irreps).map(|(l, p)| l * p.d).sum();
        if d != irr.d {
            return Err(Error::Numerical("inclusion multiplicities do not add up".into()));
        }
        Ok(lam)
    }
}
