//! Reordering horizontal and vertical steps of paths through the connection.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{CMat, SparseRows};
use crate::paths::{FourGraphSystem, Path, PathSpace, Step};

use super::BiUnitaryConnection;

/// Overlaps between two-step paths `x → z`: rows horizontal-first, columns vertical-first.
#[derive(Clone, Debug)]
pub struct LocalSwap {
    pub hv: Vec<(u32, u32)>,
    pub vh: Vec<(u32, u32)>,
    pub s: CMat,
    hv_index: HashMap<(u32, u32), usize>,
    vh_index: HashMap<(u32, u32), usize>,
}

impl LocalSwap {
    fn build(entries: Vec<((u32, u32), (u32, u32), crate::linalg::C64)>) -> Self {
        let mut hv: Vec<_> = entries.iter().map(|e| e.0).collect();
        let mut vh: Vec<_> = entries.iter().map(|e| e.1).collect();
        hv.sort();
        hv.dedup();
        vh.sort();
        vh.dedup();
        let hv_index: HashMap<_, _> = hv.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let vh_index: HashMap<_, _> = vh.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let mut s = CMat::zeros(hv.len(), vh.len());
        for (r, cl, z) in entries {
            s[(hv_index[&r], vh_index[&cl])] = z;
        }
        Self { hv, vh, s, hv_index, vh_index }
    }
}

/// All local swap tables of a connection, keyed by `(start, end)` node.
pub(crate) fn local_swaps(conn: &BiUnitaryConnection) -> HashMap<(u32, u32), LocalSwap> {
    let sys = conn.system();
    let mut acc: HashMap<(u32, u32), Vec<((u32, u32), (u32, u32), crate::linalg::C64)>> = HashMap::new();
    for blk in conn.blocks() {
        let (a, d) = (blk.a, blk.d);
        for (i, &(al, be)) in blk.h.iter().enumerate() {
            let b = sys.other_end(al, a);
            for (j, &(ga, de)) in blk.v.iter().enumerate() {
                let cn = sys.other_end(ga, a);
                let w = blk.w[(i, j)];
                let r = (sys.mu(a) * sys.mu(d) / (sys.mu(b) * sys.mu(cn))).sqrt();
                acc.entry((a, d)).or_default().push(((al, be), (ga, de), w));
                acc.entry((b, cn)).or_default().push(((al, ga), (be, de), w.conj() * r));
                acc.entry((cn, b)).or_default().push(((de, be), (ga, al), w.conj() * r));
                acc.entry((d, a)).or_default().push(((de, ga), (be, al), w));
            }
        }
    }
    acc.into_iter().map(|(k, v)| (k, LocalSwap::build(v))).collect()
}

type SpaceKey = (Vec<u32>, Vec<Step>);

/// Path spaces and step-reordering operators, memoized.
#[derive(Default)]
pub struct SpaceCache {
    spaces: Mutex<HashMap<SpaceKey, Arc<PathSpace>>>,
    swaps: Mutex<HashMap<(SpaceKey, usize), Arc<Vec<SparseRows>>>>,
}

impl SpaceCache {
    pub fn clear(&self) {
        self.spaces.lock().unwrap().clear();
        self.swaps.lock().unwrap().clear();
    }
}

/// Moves elements of path algebras between step signatures.
pub struct Transporter {
    conn: Arc<BiUnitaryConnection>,
    swaps: HashMap<(u32, u32), LocalSwap>,
    cache: SpaceCache,
}

impl Transporter {
    pub fn new(conn: Arc<BiUnitaryConnection>) -> Self {
        let swaps = local_swaps(&conn);
        Self { conn, swaps, cache: SpaceCache::default() }
    }

    pub fn connection(&self) -> &BiUnitaryConnection {
        &self.conn
    }

    pub fn system(&self) -> &FourGraphSystem {
        self.conn.system()
    }

    pub fn local(&self, x: u32, z: u32) -> Option<&LocalSwap> {
        self.swaps.get(&(x, z))
    }

    pub fn clear_cache(&self) {
        self.cache.clear();
    }

    pub fn space(&self, starts: &[u32], sig: &[Step]) -> Arc<PathSpace> {
        let key = (starts.to_vec(), sig.to_vec());
        if let Some(s) = self.cache.spaces.lock().unwrap().get(&key) {
            return s.clone();
        }
        let s = Arc::new(PathSpace::new(self.system(), starts, sig));
        self.cache.spaces.lock().unwrap().entry(key).or_insert(s).clone()
    }

    /// Coordinate change from signature `sig` to `sig` with steps `pos`, `pos + 1` exchanged,
    /// one sparse matrix per range block (rows new paths, columns old paths).
    pub fn swap_operator(&self, starts: &[u32], sig: &[Step], pos: usize) -> Result<Arc<Vec<SparseRows>>> {
        if pos + 1 >= sig.len() || sig[pos] == sig[pos + 1] {
            return Err(Error::Invalid(format!("steps {pos} and {} cannot be exchanged", pos + 1)));
        }
        let key = ((starts.to_vec(), sig.to_vec()), pos);
        if let Some(op) = self.cache.swaps.lock().unwrap().get(&key) {
            return Ok(op.clone());
        }
        let sys = self.system();
        let old = self.space(starts, sig);
        let mut new_sig = sig.to_vec();
        new_sig.swap(pos, pos + 1);
        let new = self.space(starts, &new_sig);
        let h_first = sig[pos] == Step::H;
        let mut ops: Vec<SparseRows> = new
            .blocks
            .iter()
            .map(|b| SparseRows { ncols: 0, rows: vec![Vec::new(); b.paths.len()] })
            .collect();
        for block in &old.blocks {
            let nb = new
                .block_of(block.node)
                .ok_or_else(|| Error::Numerical("reordered path space lost a range node".into()))?;
            ops[nb].ncols = block.paths.len();
            for (ip, p) in block.paths.iter().enumerate() {
                let x = old.node_at(sys, p, pos);
                let z = sys.other_end(p.edges[pos + 1], sys.other_end(p.edges[pos], x));
                let table = self
                    .local(x, z)
                    .ok_or_else(|| Error::Invalid("no cell for a two-step path".into()))?;
                let pair = (p.edges[pos], p.edges[pos + 1]);
                let mut q: Path = p.clone();
                if h_first {
                    let i = table.hv_index[&pair];
                    for (j, &(e1, e2)) in table.vh.iter().enumerate() {
                        let z = table.s[(i, j)];
                        if z.norm_sqr() == 0.0 {
                            continue;
                        }
                        q.edges[pos] = e1;
                        q.edges[pos + 1] = e2;
                        let (b2, iq) = new.locate(&q).expect("reordered path exists");
                        debug_assert_eq!(b2, nb);
                        ops[nb].rows[iq].push((ip, z.conj()));
                    }
                } else {
                    let j = table.vh_index[&pair];
                    for (i, &(e1, e2)) in table.hv.iter().enumerate() {
                        let z = table.s[(i, j)];
                        if z.norm_sqr() == 0.0 {
                            continue;
                        }
                        q.edges[pos] = e1;
                        q.edges[pos + 1] = e2;
                        let (_, iq) = new.locate(&q).expect("reordered path exists");
                        ops[nb].rows[iq].push((ip, z));
                    }
                }
            }
        }
        let ops = Arc::new(ops);
        self.cache.swaps.lock().unwrap().insert(key, ops.clone());
        Ok(ops)
    }

    /// Exchange steps `pos`, `pos + 1`; returns the element in the new signature.
    pub fn swap(&self, x: &AlgebraElement, starts: &[u32], sig: &[Step], pos: usize) -> Result<(AlgebraElement, Vec<Step>)> {
        let ops = self.swap_operator(starts, sig, pos)?;
        let old = self.space(starts, sig);
        let mut new_sig = sig.to_vec();
        new_sig.swap(pos, pos + 1);
        let new = self.space(starts, &new_sig);
        let mut blocks = Vec::with_capacity(new.blocks.len());
        for (nb, blk) in new.blocks.iter().enumerate() {
            let ob = old.block_of(blk.node).expect("same range nodes");
            blocks.push(ops[nb].conjugate(&x.blocks[ob]));
        }
        Ok((AlgebraElement { blocks }, new_sig))
    }

    /// Move `x` from signature `sig` to `target` by adjacent exchanges.
    pub fn reorder(&self, x: &AlgebraElement, starts: &[u32], sig: &[Step], target: &[Step]) -> Result<AlgebraElement> {
        if sig.len() != target.len()
            || sig.iter().filter(|&&s| s == Step::H).count() != target.iter().filter(|&&s| s == Step::H).count()
        {
            return Err(Error::Invalid("signatures are not rearrangements of each other".into()));
        }
        let mut cur = sig.to_vec();
        let mut y = x.clone();
        for i in 0..cur.len() {
            if cur[i] == target[i] {
                continue;
            }
            let j = (i + 1..cur.len()).find(|&j| cur[j] == target[i]).expect("counts agree");
            for p in (i..j).rev() {
                let (z, s) = self.swap(&y, starts, &cur, p)?;
                y = z;
                cur = s;
            }
        }
        Ok(y)
    }

    /// `x ⊗ 1`: the element acting trivially on one appended step of kind `kind`.
    pub fn append(&self, x: &AlgebraElement, starts: &[u32], sig: &[Step], kind: Step) -> AlgebraElement {
        let old = self.space(starts, sig);
        let mut ext_sig = sig.to_vec();
        ext_sig.push(kind);
        let ext = self.space(starts, &ext_sig);
        let n = sig.len();
        let mut blocks = Vec::with_capacity(ext.blocks.len());
        for blk in &ext.blocks {
            let m = blk.paths.len();
            let mut out = CMat::zeros(m, m);
            let mut groups: HashMap<u32, Vec<(usize, usize, usize)>> = HashMap::new();
            for (iq, q) in blk.paths.iter().enumerate() {
                let prefix = Path { entry: q.entry, edges: q.edges[..n].to_vec() };
                let (b, ip) = old.locate(&prefix).expect("prefix exists");
                groups.entry(q.edges[n]).or_default().push((iq, b, ip));
            }
            for members in groups.values() {
                for &(i1, b, p1) in members {
                    for &(i2, _, p2) in members {
                        out[(i1, i2)] = x.blocks[b][(p1, p2)];
                    }
                }
            }
            blocks.push(out);
        }
        AlgebraElement { blocks }
    }
}
