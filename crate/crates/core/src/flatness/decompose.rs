//! Isotypic decomposition of a finite-dimensional *-algebra of block-diagonal operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, null_space, unitarity_defect, C64, CMat};

/// One irreducible summand `M_d ⊗ 1_m` acting on `⊕_u C^{n_u}`.
///
/// `cols[u]` has `d · m_u` orthonormal columns ordered `(t, s)` with `t` outer: column `(t, s)`
/// is the `s`-th copy of the `t`-th basis vector.
#[derive(Clone, Debug)]
pub struct IrrepColumns {
    pub d: usize,
    pub mult: Vec<usize>,
    pub cols: Vec<CMat>,
}

impl IrrepColumns {
    pub fn total_mult(&self) -> usize {
        self.mult.iter().sum()
    }

    /// Columns of copy `t` in block `u`.
    pub fn copy(&self, u: usize, t: usize) -> CMat {
        let m = self.mult[u];
        self.cols[u].columns(t * m, m).into_owned()
    }
}

const ATTEMPTS: u64 = 6;

fn random_combination(basis: &[AlgebraElement], rng: &mut ChaCha8Rng, hermitian: bool) -> AlgebraElement {
    let mut x = basis[0].scale(C64::new(0.0, 0.0));
    for b in basis {
        let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        x.axpy(z, b);
    }
    if hermitian {
        let xa = x.adjoint();
        x = &x + &xa;
    }
    x
}

/// Eigenvalues grouped across blocks: each group lists `(block, eigenvector column)` pairs.
fn clusters(vals: &[Vec<f64>], gap: f64) -> Vec<Vec<(usize, usize)>> {
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (u, vs) in vals.iter().enumerate() {
        for (i, &v) in vs.iter().enumerate() {
            all.push((v, u, i));
        }
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let spread = all.last().map_or(0.0, |l| l.0) - all.first().map_or(0.0, |f| f.0);
    let cut = gap * spread.max(1.0);
    let mut out: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for (v, u, i) in all {
        if out.is_empty() || v - prev > cut {
            out.push(Vec::new());
        }
        out.last_mut().unwrap().push((u, i));
        prev = v;
    }
    out
}

/// Columns of the eigenvectors in a cluster, per block.
fn gather(vecs: &[CMat], cluster: &[(usize, usize)]) -> Vec<CMat> {
    let mut per: Vec<Vec<usize>> = vec![Vec::new(); vecs.len()];
    for &(u, i) in cluster {
        per[u].push(i);
    }
    per.iter()
        .zip(vecs)
        .map(|(idx, v)| {
            let mut m = CMat::zeros(v.nrows(), idx.len());
            for (c, &i) in idx.iter().enumerate() {
                m.set_column(c, &v.column(i));
            }
            m
        })
        .collect()
}

fn compress(x: &AlgebraElement, basis: &[CMat]) -> Vec<CMat> {
    x.blocks.iter().zip(basis).map(|(m, v)| v.adjoint() * m * v).collect()
}

/// Splits `span(basis)`, a *-algebra containing the identity, into irreducibles.
///
/// `tol` is the absolute singular-value cutoff for the centre computation.
pub fn decompose(basis: &[AlgebraElement], tol: f64) -> Result<Vec<IrrepColumns>> {
    if basis.is_empty() {
        return Err(Error::Invalid("cannot decompose the zero algebra".into()));
    }
    let mut last = None;
    for attempt in 0..ATTEMPTS {
        match try_decompose(basis, tol, 0x5eed_0000 + attempt) {
            Ok(v) => return Ok(v),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

fn try_decompose(basis: &[AlgebraElement], tol: f64, seed: u64) -> Result<Vec<IrrepColumns>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = basis[0].blocks.iter().map(|b| b.nrows()).collect();
    // centre: elements of the span commuting with two generic elements
    let a1 = random_combination(basis, &mut rng, false);
    let a2 = random_combination(basis, &mut rng, false);
    let cols: Vec<Vec<C64>> = basis
        .iter()
        .map(|b| {
            let mut v = Vec::new();
            for a in [&a1, &a2] {
                for m in &b.commutator(a).blocks {
                    v.extend(m.iter().copied());
                }
            }
            v
        })
        .collect();
    let m = CMat::from_fn(cols[0].len(), basis.len(), |i, j| cols[j][i]);
    let scale = basis.iter().map(|b| b.norm()).fold(0.0, f64::max) * a1.norm().max(a2.norm());
    let cz = null_space(&m, tol * scale.max(1.0));
    let centre: Vec<AlgebraElement> = (0..cz.ncols())
        .map(|c| {
            let mut z = basis[0].scale(C64::new(0.0, 0.0));
            for (j, b) in basis.iter().enumerate() {
                z.axpy(cz[(j, c)], b);
            }
            z
        })
        .collect();
    if centre.is_empty() {
        return Err(Error::Numerical("algebra has trivial centre, so it is not unital".into()));
    }
    let h = random_combination(&centre, &mut rng, true);
    let eig: Vec<(Vec<f64>, CMat)> = h.blocks.iter().map(hermitian_eigen).collect();
    let vals: Vec<Vec<f64>> = eig.iter().map(|e| e.0.clone()).collect();
    let vecs: Vec<CMat> = eig.into_iter().map(|e| e.1).collect();
    let mut out = Vec::new();
    for cl in clusters(&vals, 1e-6) {
        let v = gather(&vecs, &cl);
        let a = random_combination(basis, &mut rng, true);
        let ac = compress(&a, &v);
        let inner: Vec<(Vec<f64>, CMat)> = ac.iter().map(hermitian_eigen).collect();
        let ivals: Vec<Vec<f64>> = inner.iter().map(|e| e.0.clone()).collect();
        let ivecs: Vec<CMat> = inner.into_iter().zip(&v).map(|(e, vb)| vb * e.1).collect();
        let copies: Vec<Vec<CMat>> = clusters(&ivals, 1e-6).iter().map(|c| gather(&ivecs, c)).collect();
        let mult: Vec<usize> = copies[0].iter().map(|m| m.ncols()).collect();
        if copies.iter().any(|c| c.iter().map(|m| m.ncols()).collect::<Vec<_>>() != mult) {
            return Err(Error::Numerical("eigenvalue clusters of a generic element have unequal sizes".into()));
        }
        let d = copies.len();
        let total: usize = mult.iter().sum();
        // identify every copy with the first through a generic element
        let b = random_combination(basis, &mut rng, false);
        let mut blocks: Vec<CMat> = sizes.iter().zip(&mult).map(|(&n, &m)| CMat::zeros(n, d * m)).collect();
        for u in 0..sizes.len() {
            blocks[u].columns_mut(0, mult[u]).copy_from(&copies[0][u]);
        }
        for t in 1..d {
            let ts: Vec<CMat> =
                (0..sizes.len()).map(|u| copies[t][u].adjoint() * &b.blocks[u] * &copies[0][u]).collect();
            let c2: f64 = ts.iter().map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() / total as f64;
            if c2.sqrt() < 1e-4 * b.norm() / (total as f64).sqrt() {
                return Err(Error::Numerical("generic element does not link two copies".into()));
            }
            for u in 0..sizes.len() {
                if mult[u] == 0 {
                    continue;
                }
                let w = &ts[u] / C64::new(c2.sqrt(), 0.0);
                if unitarity_defect(&w) > 1e-6 {
                    return Err(Error::Numerical("copy identification is not unitary".into()));
                }
                let col = &copies[t][u] * w;
                blocks[u].columns_mut(t * mult[u], mult[u]).copy_from(&col);
            }
        }
        out.push(IrrepColumns { d, mult, cols: blocks });
    }
    // a cluster on which every basis element vanishes is not part of the algebra
    out.retain(|irr| {
        let u = (0..irr.mult.len()).find(|&u| irr.mult[u] > 0).unwrap();
        let c = irr.copy(u, 0);
        basis.iter().any(|b| (c.adjoint() * &b.blocks[u] * &c).iter().any(|z| z.norm() > 1e-8))
    });
    Ok(out)
}
