use std::sync::Arc;

use crate::algebra::{AlgebraElement, Inclusion, MultiMatrixAlgebra, TraceVector};
use crate::connection::{from_square, BiUnitaryConnection, Transporter};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::paths::{canonical_signature, FourGraphSystem, PathSpace, StartVertexSet, Step, DEFAULT_MAX_DEPTH};

use super::{is_symmetric, verify_commuting, CommutingSquare};

/// The double sequence `A_{k,l}` of string algebras over a connection with start set `V`.
///
/// `A_{k,l}` is spanned by pairs of paths with `k` vertical then `l` horizontal steps. Horizontal
/// embeddings append a step; vertical embeddings append a step and move it left through the
/// horizontal ones with the connection.
pub struct DoubleSequence {
    transporter: Arc<Transporter>,
    start: StartVertexSet,
    max_depth: usize,
}

impl DoubleSequence {
    pub fn new(conn: BiUnitaryConnection, start: StartVertexSet) -> Self {
        Self::from_transporter(Arc::new(Transporter::new(Arc::new(conn))), start)
    }

    pub fn from_transporter(transporter: Arc<Transporter>, start: StartVertexSet) -> Self {
        Self { transporter, start, max_depth: DEFAULT_MAX_DEPTH }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn connection(&self) -> &BiUnitaryConnection {
        self.transporter.connection()
    }

    pub fn transporter(&self) -> &Arc<Transporter> {
        &self.transporter
    }

    pub fn system(&self) -> &FourGraphSystem {
        self.transporter.system()
    }

    pub fn start(&self) -> &StartVertexSet {
        &self.start
    }

    fn check(&self, k: usize, l: usize) -> Result<()> {
        let requested = k.max(l);
        if requested > self.max_depth {
            return Err(Error::DepthBound { requested, bound: self.max_depth });
        }
        Ok(())
    }

    pub fn space(&self, k: usize, l: usize) -> Result<Arc<PathSpace>> {
        self.check(k, l)?;
        Ok(self.transporter.space(self.start.entries(), &canonical_signature(k, l)))
    }

    pub fn algebra(&self, k: usize, l: usize) -> Result<MultiMatrixAlgebra> {
        Ok(self.space(k, l)?.algebra(self.system()))
    }

    pub fn trace(&self, k: usize, l: usize) -> Result<TraceVector> {
        Ok(self.space(k, l)?.markov_trace(self.system()))
    }

    /// `A_{k,l} → A_{k,l+1}`.
    pub fn embed_h(&self, x: &AlgebraElement, k: usize, l: usize) -> Result<AlgebraElement> {
        self.check(k, l + 1)?;
        self.algebra(k, l)?.check(x)?;
        Ok(self.transporter.append(x, self.start.entries(), &canonical_signature(k, l), Step::H))
    }

    /// `A_{k,l} → A_{k+1,l}`.
    pub fn embed_v(&self, x: &AlgebraElement, k: usize, l: usize) -> Result<AlgebraElement> {
        self.check(k + 1, l)?;
        self.algebra(k, l)?.check(x)?;
        let starts = self.start.entries();
        let mut sig = canonical_signature(k, l);
        let y = self.transporter.append(x, starts, &sig, Step::V);
        sig.push(Step::V);
        self.transporter.reorder(&y, starts, &sig, &canonical_signature(k + 1, l))
    }

    /// `A_{k,l} → A_{k2,l2}`, vertical steps first.
    pub fn embed(&self, x: &AlgebraElement, from: (usize, usize), to: (usize, usize)) -> Result<AlgebraElement> {
        if to.0 < from.0 || to.1 < from.1 {
            return Err(Error::Invalid(format!("no embedding from {from:?} into {to:?}")));
        }
        let mut y = x.clone();
        for k in from.0..to.0 {
            y = self.embed_v(&y, k, from.1)?;
        }
        for l in from.1..to.1 {
            y = self.embed_h(&y, to.0, l)?;
        }
        Ok(y)
    }

    /// Vertical Jones projection `e_j ∈ A_{k,l}` for `1 ≤ j < k`, from the string formula.
    pub fn e(&self, k: usize, l: usize, j: usize) -> Result<AlgebraElement> {
        if j == 0 || j >= k {
            return Err(Error::Invalid(format!("e_{j} does not lie in A_({k},{l})")));
        }
        self.space(k, l)?.cup_projection(self.system(), j - 1)
    }

    /// Horizontal Jones projection `f_j ∈ A_{k,l}` for `1 ≤ j < l`, from the string formula.
    pub fn f(&self, k: usize, l: usize, j: usize) -> Result<AlgebraElement> {
        if j == 0 || j >= l {
            return Err(Error::Invalid(format!("f_{j} does not lie in A_({k},{l})")));
        }
        self.space(k, l)?.cup_projection(self.system(), k + j - 1)
    }

    /// Standard-form permutation for appending one step of kind `kind`, one matrix per block of
    /// the extended space (columns standard positions, rows path positions).
    fn append_layout(&self, sig: &[Step], kind: Step) -> Result<(Vec<Vec<usize>>, Vec<CMat>)> {
        let sys = self.system();
        let starts = self.start.entries();
        let old = self.transporter.space(starts, sig);
        let mut ext_sig = sig.to_vec();
        ext_sig.push(kind);
        let ext = self.transporter.space(starts, &ext_sig);
        let n = sig.len();
        let mut bratteli = vec![vec![0; ext.blocks.len()]; old.blocks.len()];
        let mut perms = Vec::with_capacity(ext.blocks.len());
        for (bj, blk) in ext.blocks.iter().enumerate() {
            // slots by small block, then by edge (copy) in id order
            let mut offsets = std::collections::HashMap::new();
            let mut off = 0;
            for (bi, ob) in old.blocks.iter().enumerate() {
                let edges: Vec<u32> =
                    sys.out(ob.node, kind).iter().filter(|&&(_, t)| t == blk.node).map(|&(e, _)| e).collect();
                bratteli[bi][bj] = edges.len();
                for e in edges {
                    offsets.insert(e, off);
                    off += ob.paths.len();
                }
            }
            let m = blk.paths.len();
            let mut p = CMat::zeros(m, m);
            for (iq, q) in blk.paths.iter().enumerate() {
                let prefix = crate::paths::Path { entry: q.entry, edges: q.edges[..n].to_vec() };
                let (_, ip) = old.locate(&prefix).expect("prefix exists");
                p[(iq, offsets[&q.edges[n]] + ip)] = c(1.0);
            }
            perms.push(p);
        }
        Ok((bratteli, perms))
    }

    pub fn horizontal_inclusion(&self, k: usize, l: usize) -> Result<Inclusion> {
        self.check(k, l + 1)?;
        let (bratteli, perms) = self.append_layout(&canonical_signature(k, l), Step::H)?;
        Inclusion::new(self.algebra(k, l)?, self.algebra(k, l + 1)?, bratteli, perms.into_iter().map(Some).collect())
    }

    pub fn vertical_inclusion(&self, k: usize, l: usize) -> Result<Inclusion> {
        self.check(k + 1, l)?;
        let starts = self.start.entries();
        let mut sig = canonical_signature(k, l);
        let (bratteli, mut us) = self.append_layout(&sig, Step::V)?;
        sig.push(Step::V);
        // carry the appended step left through the horizontal ones
        for pos in (k..k + l).rev() {
            let ops = self.transporter.swap_operator(starts, &sig, pos)?;
            let old = self.transporter.space(starts, &sig);
            sig.swap(pos, pos + 1);
            let new = self.transporter.space(starts, &sig);
            let mut next = Vec::with_capacity(us.len());
            for (nb, blk) in new.blocks.iter().enumerate() {
                let ob = old.block_of(blk.node).expect("same range nodes");
                next.push(ops[nb].mul_dense(&us[ob]));
            }
            us = next;
        }
        Inclusion::new(self.algebra(k, l)?, self.algebra(k + 1, l)?, bratteli, us.into_iter().map(Some).collect())
    }

    /// The commuting square `A_{k,l} ⊂ A_{k,l+1}, A_{k+1,l} ⊂ A_{k+1,l+1}`.
    pub fn window(&self, k: usize, l: usize) -> Result<CommutingSquare> {
        CommutingSquare::new(
            self.horizontal_inclusion(k, l)?,
            self.vertical_inclusion(k, l)?,
            self.vertical_inclusion(k, l + 1)?,
            self.horizontal_inclusion(k + 1, l)?,
            self.trace(k + 1, l + 1)?,
        )
    }
}

/// Double sequence generated by a symmetric commuting square through repeated basic
/// constructions, realized on the connection extracted from the square.
pub fn iterate(sq: &CommutingSquare) -> Result<DoubleSequence> {
    if !is_symmetric(sq) {
        return Err(Error::NotSymmetric);
    }
    let report = verify_commuting(sq, 1e-8);
    if !report.passes() {
        return Err(Error::Verification(format!("not a commuting square: {}", report.failing().join(", "))));
    }
    let conn = from_square(sq)?;
    let start = StartVertexSet::new(conn.system(), sq.b00.sizes().to_vec())?;
    Ok(DoubleSequence::new(conn, start))
}

/// The sequence `p A_{k+k', l+l'} p` for a projection `p ∈ A_{k,l}`, `k` and `l` even.
///
/// A projection of rank `r_w` in the summand of node `w` cuts down to the string algebras whose
/// start set contains `w` with multiplicity `r_w`.
pub fn cut_by_projection(ds: &DoubleSequence, k: usize, l: usize, p: &AlgebraElement) -> Result<DoubleSequence> {
    if k % 2 == 1 || l % 2 == 1 {
        return Err(Error::Invalid("cuts are taken at even positions".into()));
    }
    let space = ds.space(k, l)?;
    space.algebra(ds.system()).check(p)?;
    let p2 = p * p;
    if !p2.is_close(p, 1e-9) || !p.adjoint().is_close(p, 1e-9) {
        return Err(Error::Invalid("cut element is not a projection".into()));
    }
    let sys = ds.system();
    let mut mult = vec![0usize; sys.corner_size(0)];
    for (blk, m) in space.blocks.iter().zip(&p.blocks) {
        let r = m.trace().re.round() as usize;
        mult[sys.local_index(blk.node)] += r;
    }
    if mult.iter().all(|&r| r == 0) {
        return Err(Error::Invalid("cut by the zero projection".into()));
    }
    let start = StartVertexSet::new(sys, mult)?;
    Ok(DoubleSequence::from_transporter(ds.transporter.clone(), start).with_max_depth(ds.max_depth))
}
