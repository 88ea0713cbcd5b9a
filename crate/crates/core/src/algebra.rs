//! Multi-matrix algebras, traces, inclusions and conditional expectations.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64, ONE, ZERO};
use crate::paths::BipartiteGraph;

/// Finite direct sum of full matrix algebras `M_{n_1} ⊕ … ⊕ M_{n_m}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraDto", into = "AlgebraDto")]
pub struct MultiMatrixAlgebra {
    labels: Vec<String>,
    sizes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraDto {
    summands: Vec<(String, usize)>,
}

impl TryFrom<AlgebraDto> for MultiMatrixAlgebra {
    type Error = Error;
    fn try_from(d: AlgebraDto) -> Result<Self> {
        let (labels, sizes) = d.summands.into_iter().unzip();
        MultiMatrixAlgebra::new(labels, sizes)
    }
}

impl From<MultiMatrixAlgebra> for AlgebraDto {
    fn from(a: MultiMatrixAlgebra) -> Self {
        AlgebraDto { summands: a.labels.into_iter().zip(a.sizes).collect() }
    }
}

impl MultiMatrixAlgebra {
    pub fn new(labels: Vec<String>, sizes: Vec<usize>) -> Result<Self> {
        if labels.len() != sizes.len() {
            return Err(Error::Shape("labels and sizes differ in length".into()));
        }
        if sizes.is_empty() {
            return Err(Error::Invalid("algebra needs at least one summand".into()));
        }
        if sizes.iter().any(|&n| n == 0) {
            return Err(Error::Invalid("block sizes must be positive".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::Invalid(format!("duplicate summand label {l}")));
            }
        }
        Ok(Self { labels, sizes })
    }

    /// Summands labelled `0, 1, …`.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        Self::new((0..sizes.len()).map(|i| i.to_string()).collect(), sizes.to_vec())
    }

    pub fn scalars() -> Self {
        Self { labels: vec!["0".into()], sizes: vec![1] }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_summands(&self) -> usize {
        self.sizes.len()
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().map(|n| n * n).sum()
    }

    /// Matrix units `(block, row, col)` in block-major, row-major order.
    pub fn basis(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &n)| (0..n).flat_map(move |i| (0..n).map(move |j| (b, i, j))))
    }

    pub fn matrix_unit(&self, block: usize, i: usize, j: usize) -> AlgebraElement {
        let mut x = AlgebraElement::zero(self);
        x.blocks[block][(i, j)] = ONE;
        x
    }

    pub fn check(&self, x: &AlgebraElement) -> Result<()> {
        if x.blocks.len() != self.sizes.len()
            || x.blocks.iter().zip(&self.sizes).any(|(b, &n)| b.nrows() != n || b.ncols() != n)
        {
            return Err(Error::Shape(format!(
                "element with blocks {:?} does not belong to algebra with sizes {:?}",
                x.shape(),
                self.sizes
            )));
        }
        Ok(())
    }

    /// Coordinates of `x` in the matrix-unit basis.
    pub fn coords(&self, x: &AlgebraElement) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.dim());
        for b in &x.blocks {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    v.push(b[(i, j)]);
                }
            }
        }
        v
    }

    pub fn from_coords(&self, v: &[C64]) -> AlgebraElement {
        let mut x = AlgebraElement::zero(self);
        let mut k = 0;
        for b in x.blocks.iter_mut() {
            let n = b.nrows();
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] = v[k];
                    k += 1;
                }
            }
        }
        x
    }
}

/// Minimal-projection weights of a faithful trace, one per summand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceVector {
    pub weights: Vec<f64>,
}

impl TraceVector {
    pub fn new(alg: &MultiMatrixAlgebra, weights: Vec<f64>) -> Result<Self> {
        let t = Self { weights };
        t.validate(alg, 1e-9)?;
        Ok(t)
    }

    /// Weights proportional to `w`, rescaled so that `tr(1) = 1`.
    pub fn normalized(alg: &MultiMatrixAlgebra, w: &[f64]) -> Result<Self> {
        let total: f64 = alg.sizes().iter().zip(w).map(|(&n, &x)| n as f64 * x).sum();
        Self::new(alg, w.iter().map(|x| x / total).collect())
    }

    pub fn validate(&self, alg: &MultiMatrixAlgebra, tol: f64) -> Result<()> {
        if self.weights.len() != alg.n_summands() {
            return Err(Error::Shape("trace has wrong number of weights".into()));
        }
        if self.weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Invalid("trace weights must be positive".into()));
        }
        let total: f64 = alg.sizes().iter().zip(&self.weights).map(|(&n, &w)| n as f64 * w).sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::Invalid(format!("trace is not normalized: tr(1) = {total}")));
        }
        Ok(())
    }
}

/// Block-diagonal element, one dense matrix per summand.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn zero(alg: &MultiMatrixAlgebra) -> Self {
        Self { blocks: alg.sizes().iter().map(|&n| CMat::zeros(n, n)).collect() }
    }

    pub fn identity(alg: &MultiMatrixAlgebra) -> Self {
        Self { blocks: alg.sizes().iter().map(|&n| CMat::identity(n, n)).collect() }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * z).collect() }
    }

    pub fn axpy(&mut self, z: C64, other: &Self) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b * z;
        }
    }

    /// Unweighted Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Unweighted Frobenius inner product `Σ_j Tr(y_j^* x_j)`.
    pub fn dot(&self, y: &Self) -> C64 {
        let mut s = ZERO;
        for (a, b) in self.blocks.iter().zip(&y.blocks) {
            s += a.iter().zip(b.iter()).map(|(p, q)| q.conj() * p).sum::<C64>();
        }
        s
    }

    pub fn commutator(&self, y: &Self) -> Self {
        &(self * y) - &(y * self)
    }

    pub fn is_close(&self, y: &Self, tol: f64) -> bool {
        self.shape() == y.shape() && (self - y).max_abs() <= tol
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, o: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, o: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, o: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a * b).collect() }
    }
}

pub fn trace_eval(alg: &MultiMatrixAlgebra, tr: &TraceVector, x: &AlgebraElement) -> Result<C64> {
    alg.check(x)?;
    if tr.weights.len() != alg.n_summands() {
        return Err(Error::Shape("trace and algebra differ in summand count".into()));
    }
    Ok(x.blocks.iter().zip(&tr.weights).map(|(b, &w)| b.trace() * w).sum())
}

/// `⟨x, y⟩ = tr(y^* x)`.
pub fn inner_product(tr: &TraceVector, x: &AlgebraElement, y: &AlgebraElement) -> Result<C64> {
    if x.shape() != y.shape() || x.blocks.len() != tr.weights.len() {
        return Err(Error::Shape("inner product of mismatched elements".into()));
    }
    let mut s = ZERO;
    for ((a, b), &w) in x.blocks.iter().zip(&y.blocks).zip(&tr.weights) {
        s += a.iter().zip(b.iter()).map(|(p, q)| q.conj() * p).sum::<C64>() * w;
    }
    Ok(s)
}

/// Where copy `copy` of small block `small` sits inside a big block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub small: usize,
    pub copy: usize,
    pub offset: usize,
}

/// Unital *-embedding `a ↦ U_j (⊕ a_i^{⊕Λ_ij}) U_j^*` in each big block `j`.
///
/// Copies inside a big block are laid out by small block index, then copy index.
/// `unitaries[j] == None` means `U_j = 1`.
#[derive(Clone, Debug)]
pub struct Inclusion {
    pub small: MultiMatrixAlgebra,
    pub big: MultiMatrixAlgebra,
    pub bratteli: Vec<Vec<usize>>,
    pub unitaries: Vec<Option<CMat>>,
    slots: Vec<Vec<Slot>>,
}

impl Inclusion {
    pub fn new(
        small: MultiMatrixAlgebra,
        big: MultiMatrixAlgebra,
        bratteli: Vec<Vec<usize>>,
        unitaries: Vec<Option<CMat>>,
    ) -> Result<Self> {
        let (ns, nb) = (small.n_summands(), big.n_summands());
        if bratteli.len() != ns || bratteli.iter().any(|r| r.len() != nb) {
            return Err(Error::Shape(format!("Bratteli matrix must be {ns}x{nb}")));
        }
        if unitaries.len() != nb {
            return Err(Error::Shape("one unitary slot per big summand required".into()));
        }
        let mut slots = Vec::with_capacity(nb);
        for j in 0..nb {
            let mut off = 0;
            let mut s = Vec::new();
            for i in 0..ns {
                for copy in 0..bratteli[i][j] {
                    s.push(Slot { small: i, copy, offset: off });
                    off += small.sizes()[i];
                }
            }
            if off != big.sizes()[j] {
                return Err(Error::Shape(format!(
                    "big block {j} has size {} but the Bratteli column accounts for {off}",
                    big.sizes()[j]
                )));
            }
            if let Some(u) = &unitaries[j] {
                if u.nrows() != off || u.ncols() != off || linalg::unitarity_defect(u) > 1e-8 {
                    return Err(Error::Invalid(format!("unitary for big block {j} is malformed")));
                }
            }
            slots.push(s);
        }
        Ok(Self { small, big, bratteli, unitaries, slots })
    }

    pub fn standard(small: MultiMatrixAlgebra, big: MultiMatrixAlgebra, bratteli: Vec<Vec<usize>>) -> Result<Self> {
        let nb = big.n_summands();
        Self::new(small, big, bratteli, vec![None; nb])
    }

    pub fn slots(&self, big_block: usize) -> &[Slot] {
        &self.slots[big_block]
    }

    pub fn embed(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.small.check(a)?;
        Ok(self.embed_unchecked(a))
    }

    pub(crate) fn embed_unchecked(&self, a: &AlgebraElement) -> AlgebraElement {
        let blocks = (0..self.big.n_summands())
            .map(|j| {
                let n = self.big.sizes()[j];
                let mut m = CMat::zeros(n, n);
                for s in &self.slots[j] {
                    let k = self.small.sizes()[s.small];
                    m.view_mut((s.offset, s.offset), (k, k)).copy_from(&a.blocks[s.small]);
                }
                match &self.unitaries[j] {
                    Some(u) => u * m * u.adjoint(),
                    None => m,
                }
            })
            .collect();
        AlgebraElement { blocks }
    }

    /// `U_j^* b_j U_j` for every big block.
    fn standard_form(&self, b: &AlgebraElement) -> Vec<CMat> {
        b.blocks
            .iter()
            .zip(&self.unitaries)
            .map(|(m, u)| match u {
                Some(u) => u.adjoint() * m * u,
                None => m.clone(),
            })
            .collect()
    }

    /// Trace on the small algebra obtained by restriction.
    pub fn restrict_trace(&self, tr: &TraceVector) -> TraceVector {
        let w = (0..self.small.n_summands())
            .map(|i| (0..self.big.n_summands()).map(|j| self.bratteli[i][j] as f64 * tr.weights[j]).sum())
            .collect();
        TraceVector { weights: w }
    }

    pub fn bratteli_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.small.n_summands(), self.big.n_summands(), |i, j| self.bratteli[i][j] as f64)
    }

    pub fn is_connected(&self) -> bool {
        let (ns, nb) = (self.small.n_summands(), self.big.n_summands());
        let mut seen = vec![false; ns + nb];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            let nbrs: Vec<usize> = if v < ns {
                (0..nb).filter(|&j| self.bratteli[v][j] > 0).map(|j| ns + j).collect()
            } else {
                (0..ns).filter(|&i| self.bratteli[i][v - ns] > 0).collect()
            };
            for w in nbrs {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Largest deviation from being a unital *-homomorphism, tested on matrix units.
    pub fn homomorphism_defect(&self) -> f64 {
        let one = AlgebraElement::identity(&self.small);
        let mut worst = (&self.embed_unchecked(&one) - &AlgebraElement::identity(&self.big)).max_abs();
        let units: Vec<_> = self.small.basis().collect();
        for &(b, i, j) in &units {
            let x = self.small.matrix_unit(b, i, j);
            let ex = self.embed_unchecked(&x);
            worst = worst.max((&self.embed_unchecked(&x.adjoint()) - &ex.adjoint()).max_abs());
            for k in 0..self.small.sizes()[b] {
                let y = self.small.matrix_unit(b, j, k);
                let lhs = &ex * &self.embed_unchecked(&y);
                let rhs = self.embed_unchecked(&(&x * &y));
                worst = worst.max((&lhs - &rhs).max_abs());
            }
        }
        worst
    }
}

/// Orthogonal projection of `b` onto the embedded small algebra for `⟨x,y⟩ = tr(y^*x)`.
///
/// In standard form the projection averages the diagonal copies of each small block,
/// weighted by the trace of the big block they sit in.
pub fn conditional_expectation(incl: &Inclusion, tr: &TraceVector, b: &AlgebraElement) -> Result<AlgebraElement> {
    incl.big.check(b)?;
    if tr.weights.len() != incl.big.n_summands() {
        return Err(Error::Shape("trace does not match the big algebra".into()));
    }
    Ok(expectation_unchecked(incl, tr, b))
}

pub(crate) fn expectation_unchecked(incl: &Inclusion, tr: &TraceVector, b: &AlgebraElement) -> AlgebraElement {
    let std = incl.standard_form(b);
    let mut out = AlgebraElement::zero(&incl.small);
    let mut denom = vec![0.0; incl.small.n_summands()];
    for (j, m) in std.iter().enumerate() {
        let w = tr.weights[j];
        for s in incl.slots(j) {
            let k = incl.small.sizes()[s.small];
            out.blocks[s.small] += m.view((s.offset, s.offset), (k, k)) * c(w);
            denom[s.small] += w;
        }
    }
    for (blk, d) in out.blocks.iter_mut().zip(denom) {
        *blk /= c(d);
    }
    out
}

/// Perron-Frobenius data of a connected graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PFData {
    pub norm: f64,
    /// Indexed like the adjacency matrix that produced it.
    pub weights: Vec<f64>,
}

/// Spectral radius and positive eigenvector of a symmetric non-negative matrix, normalized at `distinguished`.
pub fn pf_from_adjacency(adj: &DMatrix<f64>, distinguished: usize) -> Result<PFData> {
    let n = adj.nrows();
    if n == 0 || adj.ncols() != n || distinguished >= n {
        return Err(Error::Shape("adjacency must be square and contain the distinguished vertex".into()));
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if adj[(v, w)] > 0.0 && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Disconnected("Perron-Frobenius data needs a connected graph".into()));
    }
    if n == 1 {
        return Ok(PFData { norm: adj[(0, 0)], weights: vec![1.0] });
    }
    let eig = adj.clone().symmetric_eigen();
    let top = (0..n).max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap()).unwrap();
    let v = eig.eigenvectors.column(top);
    let scale = 1.0 / v[distinguished];
    let mut weights: Vec<f64> = v.iter().map(|x| x * scale).collect();
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::Numerical("Perron-Frobenius vector is not positive".into()));
    }
    let norm = eig.eigenvalues[top];
    // One refinement sweep: w ← A w / β, which tightens the eigen-equation residual.
    let w = DMatrix::from_column_slice(n, 1, &weights);
    let aw = adj * &w;
    for i in 0..n {
        weights[i] = aw[(i, 0)] / norm;
    }
    let d = weights[distinguished];
    for x in weights.iter_mut() {
        *x /= d;
    }
    Ok(PFData { norm, weights })
}

/// PF data of a bipartite graph; weights are ordered even vertices first, then odd.
pub fn pf_data(g: &BipartiteGraph) -> Result<PFData> {
    pf_from_adjacency(&g.adjacency(), g.flat_index(g.star()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m2() -> MultiMatrixAlgebra {
        MultiMatrixAlgebra::from_sizes(&[2]).unwrap()
    }

    #[test]
    fn trace_of_identity_is_one() {
        let a = MultiMatrixAlgebra::from_sizes(&[1, 2, 3]).unwrap();
        let tr = TraceVector::normalized(&a, &[1.0, 2.0, 0.5]).unwrap();
        let t = trace_eval(&a, &tr, &AlgebraElement::identity(&a)).unwrap();
        assert!((t - ONE).norm() < 1e-14);
    }

    #[test]
    fn diagonal_projection_has_half_trace() {
        let a = m2();
        let tr = TraceVector::new(&a, vec![0.5]).unwrap();
        let x = a.matrix_unit(0, 0, 0);
        assert!((trace_eval(&a, &tr, &x).unwrap() - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_of_sign_matrix() {
        let a = m2();
        let tr = TraceVector::new(&a, vec![0.5]).unwrap();
        let mut x = AlgebraElement::zero(&a);
        x.blocks[0][(0, 0)] = ONE;
        x.blocks[0][(1, 1)] = -ONE;
        assert!((inner_product(&tr, &x, &x).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = m2();
        let tr = TraceVector::new(&a, vec![0.5]).unwrap();
        let b = MultiMatrixAlgebra::from_sizes(&[3]).unwrap();
        assert!(trace_eval(&a, &tr, &AlgebraElement::identity(&b)).is_err());
    }

    #[test]
    fn expectation_onto_scalars_is_trace() {
        let big = MultiMatrixAlgebra::from_sizes(&[1, 2]).unwrap();
        let tr = TraceVector::normalized(&big, &[1.0, 1.0]).unwrap();
        let incl = Inclusion::standard(MultiMatrixAlgebra::scalars(), big.clone(), vec![vec![1, 2]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = AlgebraElement { blocks: vec![random_gaussian(1, 1, &mut rng), random_gaussian(2, 2, &mut rng)] };
        let e = conditional_expectation(&incl, &tr, &b).unwrap();
        let t = trace_eval(&big, &tr, &b).unwrap();
        assert!((e.blocks[0][(0, 0)] - t).norm() < 1e-14);
    }

    #[test]
    fn expectation_onto_diagonal() {
        let small = MultiMatrixAlgebra::from_sizes(&[1, 1]).unwrap();
        let incl = Inclusion::standard(small, m2(), vec![vec![1], vec![1]]).unwrap();
        let tr = TraceVector::new(&m2(), vec![0.5]).unwrap();
        let b = AlgebraElement {
            blocks: vec![CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)])],
        };
        let e = conditional_expectation(&incl, &tr, &b).unwrap();
        assert!((e.blocks[0][(0, 0)] - c(1.0)).norm() < 1e-15);
        assert!((e.blocks[1][(0, 0)] - c(4.0)).norm() < 1e-15);
    }

    #[test]
    fn pf_of_single_edge_and_a3() {
        let adj = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let pf = pf_from_adjacency(&adj, 0).unwrap();
        assert!((pf.norm - 1.0).abs() < 1e-14);
        assert!(pf.weights.iter().all(|w| (w - 1.0).abs() < 1e-14));
        let a3 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let pf = pf_from_adjacency(&a3, 0).unwrap();
        assert!((pf.norm - 2f64.sqrt()).abs() < 1e-14);
        let expect = [1.0, 2f64.sqrt(), 1.0];
        for (w, e) in pf.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-13);
        }
    }

    #[test]
    fn pf_rejects_disconnected() {
        let adj = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(pf_from_adjacency(&adj, 0), Err(Error::Disconnected(_))));
    }

    #[test]
    fn conjugated_inclusion_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let small = MultiMatrixAlgebra::from_sizes(&[1, 2]).unwrap();
        let big = MultiMatrixAlgebra::from_sizes(&[3, 5]).unwrap();
        let u0 = linalg::random_unitary(3, &mut rng);
        let u1 = linalg::random_unitary(5, &mut rng);
        let incl = Inclusion::new(small, big, vec![vec![1, 1], vec![1, 2]], vec![Some(u0), Some(u1)]).unwrap();
        assert!(incl.homomorphism_defect() < 1e-12);
        assert!(incl.is_connected());
    }
}
